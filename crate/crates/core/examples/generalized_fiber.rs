//! Generalized construction with `Fvert = 2 y1² + y2⁴` over the unit disk:
//! validates the vertical data, resolves T and classifies fibers.

use special_generic::analyze::{collar_model_check, default_band, fiber_at, fiber_suite, singular_set_check};
use special_generic::construct::{build_generalized, validate_vertical_spec, TChoice, VerticalSpec};
use special_generic::{shapes, MultiPoly, UniPoly};

fn main() -> special_generic::Result<()> {
    let fvert = MultiPoly::from_terms(2, [(vec![2, 0], 2.0), (vec![0, 4], 1.0)])?;
    let spec = VerticalSpec::new(UniPoly::identity(), fvert, 1.0, TChoice::Auto)?;
    let report = validate_vertical_spec(&spec, 2);
    println!("vertical spec valid: {} (levels {:?})", report.passed, report.checked_levels);

    let h = build_generalized(&shapes::disk(), &spec)?;
    println!("T = {}  max level = {}", h.t(), h.max_level());

    for x in [[0.0, 0.0], [0.6, -0.3], [0.0, 1.0]] {
        let f = fiber_at(&h, &x)?;
        println!(
            "fiber over {x:?}: level {:.4} -> {:?}, {} component(s), euler {:?}",
            f.level, f.classification, f.components, f.euler_char
        );
    }
    let suite = fiber_suite(&h, 16, 32)?;
    println!(
        "fiber suite: {} interior + {} boundary points, {} failures",
        suite.interior_checked,
        suite.boundary_checked,
        suite.failures.len()
    );
    let sing = singular_set_check(&h, 1e-6)?;
    println!("singular set Hausdorff distance {:e}, passed {}", sing.hausdorff_to_boundary, sing.passed);
    let collar = collar_model_check(&h, default_band(&h))?;
    println!("collar: {} rays, passed {}", collar.rays, collar.passed);

    let bad = VerticalSpec::new(UniPoly::new(vec![0.0, 0.0, 1.0]), MultiPoly::from_terms(1, [(vec![2], 1.0)])?, 1.0, TChoice::Auto)?;
    let r = validate_vertical_spec(&bad, 1);
    println!("F0 = t²: {:?}", r.first_failure());
    Ok(())
}

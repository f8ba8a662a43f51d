//! Inputs that must be rejected: a squared boundary polynomial, an empty
//! region and a vertical spec with `F0'(0) = 0`.

use special_generic::analyze::{sample_manifold, verify_nonsingular};
use special_generic::construct::{build_basic, build_basic_unchecked, validate_vertical_spec, TChoice, VerticalSpec};
use special_generic::{shapes, MultiPoly, UniPoly};

fn main() -> special_generic::Result<()> {
    // (f, f) does not certify; built anyway, P = f² - y² is singular on f = 0
    let dup = shapes::duplicated_disk();
    println!("duplicated disk certifies: {}", dup.certify().passed);
    println!("build_basic: {}", build_basic(&dup, 1).unwrap_err());
    let h = build_basic_unchecked(&dup, 1)?;
    let samples = sample_manifold(&h, 500, 1)?;
    let ns = verify_nonsingular(&h, &samples, None);
    println!(
        "non-singularity: passed {} (descent reached |grad P| = {:e} < delta {:e} at {:?})",
        ns.passed,
        ns.descent_min_grad_norm,
        ns.delta,
        ns.descent_witness
    );
    if let Some(path) = std::env::args().nth(1) {
        special_generic::pipeline::write_document(path.as_ref(), &h)?;
        println!("wrote hypersurface document to {path}");
    }

    let swapped = shapes::swapped_annulus();
    println!("swapped annulus certifies: {}", swapped.certify().passed);

    let spec = VerticalSpec::new(UniPoly::new(vec![0.0, 0.0, 1.0]), MultiPoly::from_terms(1, [(vec![2], 1.0)])?, 1.0, TChoice::Auto)?;
    println!("F0 = t²: {:?}", validate_vertical_spec(&spec, 1).first_failure());
    Ok(())
}

//! The unit disk with k = 1 gives the unit sphere `1 - x1² - x2² - y² = 0`.
//! Samples it, checks non-singularity and fibers, and meshes it.

use special_generic::analyze::{fiber_at, sample_manifold, singular_set_check, verify_nonsingular};
use special_generic::construct::build_basic;
use special_generic::{mesh, shapes};

fn main() -> special_generic::Result<()> {
    let h = build_basic(&shapes::disk(), 1)?;
    println!("P = {}", h.poly());

    let samples = sample_manifold(&h, 1000, 7)?;
    let worst = samples
        .iter()
        .map(|s| (s.coords.iter().map(|c| c * c).sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max);
    println!("{} samples, max | |z| - 1 | = {worst:e}", samples.len());

    let ns = verify_nonsingular(&h, &samples, Some(1.0));
    println!("min |grad P| = {} (descent {}), passed {}", ns.min_grad_norm, ns.descent_min_grad_norm, ns.passed);

    let sing = singular_set_check(&h, 1e-6)?;
    println!(
        "{} projection-critical points, Hausdorff distance to the boundary circle {:e}",
        sing.candidates.len(),
        sing.hausdorff_to_boundary
    );

    for x in [[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]] {
        let f = fiber_at(&h, &x)?;
        println!("fiber over {x:?}: {:?} ({} components)", f.classification, f.components);
    }

    let start = std::time::Instant::now();
    let m = mesh::extract_isosurface(h.poly(), &h.bbox(), 96)?;
    let s = mesh::summarize(&m)?;
    println!(
        "mesh at res 96: V={} E={} F={} euler={} components={} in {:.2?}",
        s.vertices,
        s.edges,
        s.faces,
        s.euler,
        s.components,
        start.elapsed()
    );
    Ok(())
}

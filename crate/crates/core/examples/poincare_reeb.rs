//! Poincaré–Reeb graphs of planar regions by a vertical sweep.

use special_generic::construct::build_basic;
use special_generic::reeb::{poincare_reeb, poincare_reeb_at_angle, reeb_of_composition, slice_region, to_dot};
use special_generic::shapes;

fn main() -> special_generic::Result<()> {
    println!("annulus slice at x1 = 0: {:?}", slice_region(&shapes::annulus(), 0.0)?.intervals);
    for (name, r) in [
        ("disk", shapes::disk()),
        ("annulus", shapes::annulus()),
        ("two-holed disk", shapes::two_holed_disk()),
    ] {
        let g = poincare_reeb(&r, 512)?;
        let (v, e, b) = g.shape();
        println!("{name}: V={v} E={e} betti1={b} (1 - euler = {})", 1 - r.region_euler()?);
        for vert in &g.vertices {
            println!("  {:?} at x1 = {:.9}", vert.kind, vert.x);
        }
    }
    // along x2 both holes appear at the same sweep value: rejected
    match poincare_reeb_at_angle(&shapes::two_holed_disk(), 512, 90.0) {
        Ok(g) => println!("two-holed disk swept along x2: betti1 {}", g.betti1),
        Err(e) => println!("two-holed disk swept along x2: {e}"),
    }
    let g = poincare_reeb_at_angle(&shapes::two_holed_disk(), 512, 70.0)?;
    println!("two-holed disk swept at 70 degrees: betti1 {}", g.betti1);

    let h = build_basic(&shapes::annulus(), 2)?;
    let c = reeb_of_composition(&h, 512, 0.0)?;
    println!("composition over the annulus, k = 2: {:?}\n  {}", c.graph.shape(), c.justification);
    print!("{}", to_dot(&c.graph));
    Ok(())
}

//! One-dimensional regions with k = 2: an interval gives a sphere, two
//! disjoint intervals give two spheres.

use special_generic::construct::build_basic;
use special_generic::{mesh, shapes};

fn main() -> special_generic::Result<()> {
    for (name, region) in [("[-1, 1]", shapes::interval()), ("[-2, -1] ∪ [1, 2]", shapes::two_intervals())] {
        let h = build_basic(&region, 2)?;
        println!("{name}: P = {}", h.poly());
        let m = mesh::extract_isosurface(h.poly(), &h.bbox(), 64)?;
        for (i, part) in mesh::split_components(&m).iter().enumerate() {
            println!("  component {i}: {} triangles, euler {}", part.cell_count(), mesh::euler_char(part)?);
        }
    }
    Ok(())
}

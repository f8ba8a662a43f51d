//! Meshes the hypersurfaces over the annulus (a torus) and the two-holed disk
//! (genus two) and writes OBJ files.
//!
//! Usage: `cargo run --example torus_mesh -- [out_dir]`

use std::path::PathBuf;

use special_generic::construct::build_basic;
use special_generic::pipeline::expected_euler;
use special_generic::{mesh, shapes};

fn main() -> special_generic::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    for (name, region) in [("torus", shapes::annulus()), ("genus2", shapes::two_holed_disk())] {
        let h = build_basic(&region, 1)?;
        let chi_region = region.region_euler()?;
        for res in [64, 128] {
            let m = mesh::extract_isosurface(h.poly(), &h.bbox(), res)?;
            let s = mesh::summarize(&m)?;
            println!(
                "{name} res {res}: euler {} (expected {}), components {}, closed {}",
                s.euler,
                expected_euler(h.m(), chi_region),
                s.components,
                mesh::is_closed(&m)
            );
            if res == 64 {
                let path = out.join(format!("{name}.obj"));
                mesh::export_obj(&m, &path)?;
                println!("  wrote {}", path.display());
            }
        }
    }
    Ok(())
}

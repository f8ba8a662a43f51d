//! Grid certification, Euler characteristic and component count of regions.

use special_generic::shapes;

fn main() -> special_generic::Result<()> {
    let regions = [
        ("disk", shapes::disk()),
        ("annulus", shapes::annulus()),
        ("two-holed disk", shapes::two_holed_disk()),
        ("interval", shapes::interval()),
        ("two intervals", shapes::two_intervals()),
        ("swapped annulus", shapes::swapped_annulus()),
        ("duplicated disk", shapes::duplicated_disk()),
    ];
    for (name, r) in regions {
        let cert = r.certify();
        print!("{name:>16}: certified={:<5}", cert.passed);
        if cert.passed {
            print!(" euler={} components={}", r.region_euler()?, r.components_at(r.grid_res()));
        } else {
            for (check, res) in [
                ("intersection_nonneg", &cert.intersection_nonneg),
                ("interior_positivity", &cert.interior_positivity),
                ("exactly_one_negative", &cert.exactly_one_negative),
            ] {
                if !res.passed {
                    print!(" {check}: {}", res.detail);
                    break;
                }
            }
        }
        println!();
    }

    let disk = shapes::disk();
    for x in [[0.0, 0.0], [1.0, 0.0], [1.1, 0.0]] {
        println!("disk point {x:?} -> {:?}", disk.classify(&x)?);
    }
    let with_margin = disk.certify_with(Some(0.5));
    println!("disk with gradient margin 0.5: {}", with_margin.passed);
    Ok(())
}

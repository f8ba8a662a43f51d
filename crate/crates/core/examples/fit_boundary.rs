//! Fits an implicit conic to noisy samples of an ellipse and uses it as a
//! region boundary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use special_generic::region::fit_boundary;
use special_generic::{BBox, Region};

fn main() -> special_generic::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 200.0;
            let noise = 1.0 + 1e-4 * rng.gen_range(-1.0..1.0);
            vec![1.5 * t.cos() * noise, 0.8 * t.sin() * noise]
        })
        .collect();
    let fit = fit_boundary(&samples, 2)?;
    println!("fitted boundary: {}", fit.poly);
    println!("rms residual {:e}, min gradient {:.4}", fit.rms_residual, fit.min_gradient_norm);
    println!("singular values {:?}", fit.singular_values);

    let region = Region::new(vec![fit.poly], BBox::symmetric(2, 2.0)?, 128)?;
    let cert = region.certify();
    println!("fitted region certified: {}, euler {}", cert.passed, region.region_euler()?);
    Ok(())
}

//! Sparse polynomials: arithmetic, derivatives, evaluation and the text format.

use special_generic::polynomial::{compose_univariate, product_of};
use special_generic::{MultiPoly, UniPoly};

fn main() -> special_generic::Result<()> {
    let x = MultiPoly::var(2, 0)?;
    let y = MultiPoly::var(2, 1)?;
    let one = MultiPoly::constant(2, 1.0);

    // unit disk and the outside of the radius-1/2 disk
    let disk = &one - &(&(&x * &x) + &(&y * &y));
    let hole = &(&(&x * &x) + &(&y * &y)) - &MultiPoly::constant(2, 0.25);
    let g = product_of(&[disk.clone(), hole])?;
    println!("g = {g}");
    println!("degree {} with {} terms", g.degree(), g.terms().len());
    println!("g(0.75, 0) = {}", g.eval(&[0.75, 0.0])?);

    let dg = g.gradient();
    println!("grad g(0.75, 0) = [{}, {}]", dg[0].eval(&[0.75, 0.0])?, dg[1].eval(&[0.75, 0.0])?);

    // F0(g / T) with F0(t) = t + t^3
    let f0 = UniPoly::new(vec![0.0, 1.0, 0.0, 1.0]);
    let composed = compose_univariate(&f0, &disk, 2.0)?;
    println!("F0(disk / 2) = {composed}");

    let text = g.to_text();
    let back = MultiPoly::from_text(&text, Some(2))?;
    assert_eq!(back, g);
    println!("text form:\n{text}");
    Ok(())
}

//! Ready-made regions used throughout the examples and tests.

use crate::polynomial::MultiPoly;
use crate::region::{BBox, Region, DEFAULT_GRID_RES};

/// `r² - (x - cx)² - (y - cy)²`: positive inside the circle.
pub fn circle_inside(cx: f64, cy: f64, r: f64) -> MultiPoly {
    MultiPoly::from_terms(
        2,
        [
            (vec![0, 0], r * r - cx * cx - cy * cy),
            (vec![1, 0], 2.0 * cx),
            (vec![0, 1], 2.0 * cy),
            (vec![2, 0], -1.0),
            (vec![0, 2], -1.0),
        ],
    )
    .expect("two variables")
}

/// `(x - cx)² + (y - cy)² - r²`: positive outside the circle.
pub fn circle_outside(cx: f64, cy: f64, r: f64) -> MultiPoly {
    circle_inside(cx, cy, r).scale(-1.0)
}

fn planar(polys: Vec<MultiPoly>) -> Region {
    Region::new(polys, BBox::symmetric(2, 1.2).expect("valid box"), DEFAULT_GRID_RES)
        .expect("valid region")
}

/// Unit disk `1 - x1² - x2² ≥ 0`.
pub fn disk() -> Region {
    planar(vec![circle_inside(0.0, 0.0, 1.0)])
}

/// Annulus with radii 0.5 and 1.
pub fn annulus() -> Region {
    planar(vec![circle_outside(0.0, 0.0, 0.5), circle_inside(0.0, 0.0, 1.0)])
}

/// Unit disk with round holes of radius 0.2 centered at `(±0.45, 0)`.
pub fn two_holed_disk() -> Region {
    planar(vec![
        circle_inside(0.0, 0.0, 1.0),
        circle_outside(0.45, 0.0, 0.2),
        circle_outside(-0.45, 0.0, 0.2),
    ])
}

/// Annulus with the sign conventions swapped; not a valid region.
pub fn swapped_annulus() -> Region {
    planar(vec![circle_outside(0.0, 0.0, 1.0), circle_inside(0.0, 0.0, 0.5)])
}

/// Unit circles centered at `(±0.5, 0)`; their zero sets cross.
pub fn overlapping_circles() -> Region {
    Region::new(
        vec![circle_inside(0.5, 0.0, 1.0), circle_inside(-0.5, 0.0, 1.0)],
        BBox::symmetric(2, 2.5).expect("valid box"),
        DEFAULT_GRID_RES,
    )
    .expect("valid region")
}

/// The unit disk listed twice; violates the one-negative-outside convention.
pub fn duplicated_disk() -> Region {
    planar(vec![circle_inside(0.0, 0.0, 1.0), circle_inside(0.0, 0.0, 1.0)])
}

/// `[-1, 1] ⊂ ℝ` as `1 - x² ≥ 0`.
pub fn interval() -> Region {
    Region::new(
        vec![MultiPoly::from_terms(1, [(vec![0], 1.0), (vec![2], -1.0)]).expect("one variable")],
        BBox::symmetric(1, 1.2).expect("valid box"),
        DEFAULT_GRID_RES,
    )
    .expect("valid region")
}

/// `[-2, -1] ∪ [1, 2]` as `x² - 1 ≥ 0`, `4 - x² ≥ 0`.
pub fn two_intervals() -> Region {
    Region::new(
        vec![
            MultiPoly::from_terms(1, [(vec![0], -1.0), (vec![2], 1.0)]).expect("one variable"),
            MultiPoly::from_terms(1, [(vec![0], 4.0), (vec![2], -1.0)]).expect("one variable"),
        ],
        BBox::symmetric(1, 2.5).expect("valid box"),
        DEFAULT_GRID_RES,
    )
    .expect("valid region")
}

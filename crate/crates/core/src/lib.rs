//! Real algebraic hypersurfaces whose coordinate projections are special
//! generic maps.
//!
//! Given boundary polynomials `f_1, …, f_l` cutting out a compact region
//! `N = ⋂ {f_j ≥ 0} ⊂ ℝⁿ`, the crate builds the hypersurface
//! `M = {(x, y) : F0(∏ f_j(x) / T) = Fvert(y)} ⊂ ℝⁿ × ℝᵏ` and checks
//! numerically that the projection `(x, y) ↦ x` restricted to `M` behaves as a
//! special generic map: `M` is non-singular, the projection is critical exactly
//! over `∂N`, fibers over interior points are spheres and fibers over boundary
//! points are single points.
//!
//! - [`polynomial`]: sparse multivariate polynomials
//! - [`region`]: regions, certification, Euler characteristic, boundary fitting
//! - [`construct`]: the defining polynomial of `M`
//! - [`analyze`]: sampling and special-generic verification
//! - [`mesh`]: isosurface extraction and mesh topology
//! - [`reeb`]: Poincaré–Reeb graphs of planar regions
//! - [`pipeline`]: documents, jobs and the command-line driver

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analyze;
pub mod construct;
pub mod error;
pub mod mesh;
pub mod pipeline;
pub mod polynomial;
pub mod reeb;
pub mod region;
pub mod roots;
pub mod shapes;
pub mod unionfind;

pub use error::{Error, Result};
pub use polynomial::{MultiPoly, UniPoly};
pub use region::{BBox, Region};

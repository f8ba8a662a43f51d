//! Compact regions cut out by boundary polynomials `f_j ≥ 0`.
//!
//! A region is usable downstream only once [`Region::certify`] passes: every
//! point of the bounding box must be inside (all `f_j > 0`), on exactly one
//! boundary piece, or outside with exactly one negative `f_j`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{product_of, MultiPoly};
use crate::unionfind::UnionFind;

pub const DEFAULT_GRID_RES: usize = 256;
pub const MAX_EULER_RES: usize = 2048;

/// Relative classification tolerance.
const REL_TOL: f64 = 1e-9;

/// Caps the grid used to derive the default tolerance.
const TOL_GRID_POINTS: usize = 1 << 20;

/// Axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxDoc", into = "BoxDoc")]
pub struct BBox {
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BoxDoc {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl TryFrom<BoxDoc> for BBox {
    type Error = Error;
    fn try_from(d: BoxDoc) -> Result<Self> {
        BBox::new(d.min, d.max)
    }
}

impl From<BBox> for BoxDoc {
    fn from(b: BBox) -> Self {
        BoxDoc {
            min: b.min,
            max: b.max,
        }
    }
}

impl BBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: max.len(),
            });
        }
        if min.is_empty() || min.iter().zip(&max).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidArgument(
                "bounding box must have positive, finite extent on every axis".into(),
            ));
        }
        Ok(BBox { min, max })
    }

    /// The cube `[-r, r]^dim`.
    pub fn symmetric(dim: usize, r: f64) -> Result<Self> {
        BBox::new(vec![-r; dim], vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim()).map(|i| self.extent(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &BBox) -> BBox {
        let mut min = self.min.clone();
        min.extend_from_slice(&other.min);
        let mut max = self.max.clone();
        max.extend_from_slice(&other.max);
        BBox { min, max }
    }

    /// `res + 1` evenly spaced sample coordinates per axis, endpoints included.
    pub fn axes(&self, res: usize) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| linspace(self.min[i], self.max[i], res))
            .collect()
    }
}

pub(crate) fn linspace(a: f64, b: f64, cells: usize) -> Vec<f64> {
    let h = (b - a) / cells as f64;
    (0..=cells)
        .map(|i| if i == cells { b } else { a + h * i as f64 })
        .collect()
}

/// Row-major multi-index helpers for tensor grids.
pub(crate) fn unravel(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
}

pub(crate) fn ravel(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    Interior,
    BoundaryBand(usize),
    Exterior(usize),
}

/// Classifies a vector of boundary-polynomial values.
pub fn classify_values(vals: &[f64], tol: f64) -> Result<PointClass> {
    let mut near = Vec::new();
    let mut neg = Vec::new();
    for (j, &v) in vals.iter().enumerate() {
        if v.abs() <= tol {
            near.push(j);
        } else if v < 0.0 {
            neg.push(j);
        }
    }
    match (near.as_slice(), neg.as_slice()) {
        ([], []) => Ok(PointClass::Interior),
        ([j], []) => Ok(PointClass::BoundaryBand(*j)),
        ([], [j]) => Ok(PointClass::Exterior(*j)),
        _ => {
            let mut indices = near;
            indices.extend(neg);
            indices.sort_unstable();
            Err(Error::Ambiguous { indices })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub passed: bool,
    pub witness: Option<Vec<f64>>,
    pub detail: String,
}

impl CheckResult {
    fn pass(detail: impl Into<String>) -> Self {
        CheckResult {
            passed: true,
            witness: None,
            detail: detail.into(),
        }
    }

    fn fail(witness: Option<Vec<f64>>, detail: impl Into<String>) -> Self {
        CheckResult {
            passed: false,
            witness,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionCertificate {
    pub passed: bool,
    /// Each `f_j` changes sign inside the box and the region stays off the box faces.
    pub intersection_nonneg: CheckResult,
    /// Some grid point has every `f_j` positive.
    pub interior_positivity: CheckResult,
    /// No grid point is ambiguous: outside points have exactly one negative `f_j`.
    pub exactly_one_negative: CheckResult,
    /// Present only when a gradient margin was required.
    pub gradient_margin_check: Option<CheckResult>,
    pub grid_res: usize,
    pub tol: f64,
    /// Smallest value of the non-responsible polynomials over non-interior grid points.
    pub margin: Option<f64>,
    /// Smallest `|∇f_j|` at grid-edge sign changes of `f_j`.
    pub gradient_margin: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RegionDoc {
    dim: usize,
    boundary_polys: Vec<MultiPoly>,
    bbox: BBox,
    grid_res: usize,
}

/// The region `⋂_j {f_j ≥ 0}` inside a bounding box.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RegionDoc", into = "RegionDoc")]
pub struct Region {
    dim: usize,
    boundary_polys: Vec<MultiPoly>,
    bbox: BBox,
    grid_res: usize,
    tol: f64,
}

impl TryFrom<RegionDoc> for Region {
    type Error = Error;
    fn try_from(d: RegionDoc) -> Result<Self> {
        let r = Region::new(d.boundary_polys, d.bbox, d.grid_res)?;
        if r.dim != d.dim {
            return Err(Error::DimensionMismatch {
                expected: d.dim,
                got: r.dim,
            });
        }
        Ok(r)
    }
}

impl From<Region> for RegionDoc {
    fn from(r: Region) -> Self {
        RegionDoc {
            dim: r.dim,
            boundary_polys: r.boundary_polys,
            bbox: r.bbox,
            grid_res: r.grid_res,
        }
    }
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.boundary_polys == other.boundary_polys
            && self.bbox == other.bbox
            && self.grid_res == other.grid_res
    }
}

impl Region {
    pub fn new(boundary_polys: Vec<MultiPoly>, bbox: BBox, grid_res: usize) -> Result<Self> {
        let dim = bbox.dim();
        if boundary_polys.is_empty() {
            return Err(Error::InvalidArgument("at least one boundary polynomial is required".into()));
        }
        if let Some(p) = boundary_polys.iter().find(|p| p.nvars() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.nvars(),
            });
        }
        if grid_res < 2 {
            return Err(Error::InvalidArgument("grid_res must be at least 2".into()));
        }
        let mut r = Region {
            dim,
            boundary_polys,
            bbox,
            grid_res,
            tol: 0.0,
        };
        r.tol = r.compute_default_tol();
        Ok(r)
    }

    fn compute_default_tol(&self) -> f64 {
        let mut res = self.grid_res;
        while (res + 1).pow(self.dim as u32) > TOL_GRID_POINTS && res > 2 {
            res /= 2;
        }
        let axes = self.bbox.axes(res);
        let max = self
            .boundary_polys
            .iter()
            .flat_map(|p| p.eval_grid(&axes).expect("dims checked"))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        REL_TOL * max.max(f64::MIN_POSITIVE)
    }

    pub fn with_grid_res(&self, grid_res: usize) -> Result<Self> {
        Region::new(self.boundary_polys.clone(), self.bbox.clone(), grid_res)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn boundary_polys(&self) -> &[MultiPoly] {
        &self.boundary_polys
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    pub fn grid_res(&self) -> usize {
        self.grid_res
    }

    /// Default classification tolerance: `1e-9 · max |f_j|` over the box grid.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn product(&self) -> MultiPoly {
        product_of(&self.boundary_polys).expect("non-empty, same nvars")
    }

    pub fn values_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.boundary_polys.iter().map(|p| p.eval(x)).collect()
    }

    pub fn classify_point(&self, x: &[f64], tol: f64) -> Result<PointClass> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
        }
        classify_values(&self.values_at(x)?, tol)
    }

    /// [`Region::classify_point`] with the default tolerance.
    pub fn classify(&self, x: &[f64]) -> Result<PointClass> {
        self.classify_point(x, self.tol)
    }

    fn grid_values(&self, res: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let axes = self.bbox.axes(res);
        let vals = self
            .boundary_polys
            .iter()
            .map(|p| p.eval_grid(&axes).expect("dims checked"))
            .collect();
        (axes, vals)
    }

    /// Grid maximum of `∏ f_j` at the given resolution.
    pub fn grid_max_product(&self, res: usize) -> f64 {
        let (_, vals) = self.grid_values(res);
        let n = vals[0].len();
        (0..n)
            .map(|i| vals.iter().map(|v| v[i]).product::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Maximum of `∏ f_j`: the grid maximum at the region resolution,
    /// polished by gradient ascent from the best grid point. Never below the
    /// grid value.
    pub fn max_product(&self) -> f64 {
        let (axes, vals) = self.grid_values(self.grid_res);
        let (best, grid_max) = (0..vals[0].len())
            .map(|i| (i, vals.iter().map(|v| v[i]).product::<f64>()))
            .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
        if !(grid_max > 0.0) {
            return grid_max;
        }
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let mut idx = vec![0; self.dim];
        unravel(best, &dims, &mut idx);
        let mut x: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect();
        let prod = self.product();
        let grad = prod.gradient();
        let mut fx = prod.eval_unchecked(&x);
        let floor = 1e-15 * self.bbox.diagonal();
        let mut step = self.bbox.diagonal() / self.grid_res as f64;
        for _ in 0..400 {
            let g: Vec<f64> = grad.iter().map(|d| d.eval_unchecked(&x)).collect();
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(gn > 0.0) || step < floor {
                break;
            }
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + step * gi / gn).collect();
            let fc = prod.eval_unchecked(&cand);
            if fc > fx && self.bbox.contains(&cand) {
                x = cand;
                fx = fc;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        fx.max(grid_max)
    }

    pub fn certify(&self) -> RegionCertificate {
        self.certify_with(None)
    }

    /// Grid certification of the sign conventions. With `require_margin`, the
    /// boundary gradient margin must also reach the given value.
    pub fn certify_with(&self, require_margin: Option<f64>) -> RegionCertificate {
        let res = self.grid_res;
        let tol = self.tol;
        let (axes, vals) = self.grid_values(res);
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let npts = vals[0].len();
        let l = self.boundary_polys.len();

        let mut idx = vec![0; self.dim];
        let point = |idx: &[usize]| -> Vec<f64> {
            idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect()
        };

        let mut ambiguous: Option<(Vec<f64>, Vec<usize>)> = None;
        let mut interior_count = 0usize;
        let mut has_pos = vec![false; l];
        let mut has_neg = vec![false; l];
        let mut on_face: Option<Vec<f64>> = None;
        let mut margin: Option<f64> = None;
        let mut pv = vec![0.0; l];

        for flat in 0..npts {
            for j in 0..l {
                pv[j] = vals[j][flat];
                if pv[j] > tol {
                    has_pos[j] = true;
                } else if pv[j] < -tol {
                    has_neg[j] = true;
                }
            }
            match classify_values(&pv, tol) {
                Ok(PointClass::Interior) => interior_count += 1,
                Ok(PointClass::BoundaryBand(j)) | Ok(PointClass::Exterior(j)) => {
                    let others = pv
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != j)
                        .map(|(_, &v)| v)
                        .fold(f64::INFINITY, f64::min);
                    if others.is_finite() {
                        margin = Some(margin.map_or(others, |m: f64| m.min(others)));
                    }
                }
                Err(Error::Ambiguous { indices }) => {
                    if ambiguous.is_none() {
                        unravel(flat, &dims, &mut idx);
                        ambiguous = Some((point(&idx), indices));
                    }
                }
                Err(_) => unreachable!("classify_values only reports ambiguity"),
            }
            if on_face.is_none() && pv.iter().all(|&v| v >= -tol) {
                unravel(flat, &dims, &mut idx);
                if idx.iter().zip(&dims).any(|(&i, &d)| i == 0 || i + 1 == d) {
                    on_face = Some(point(&idx));
                }
            }
        }

        let intersection_nonneg = if let Some(j) = (0..l).find(|&j| !(has_pos[j] && has_neg[j])) {
            CheckResult::fail(
                None,
                format!("boundary polynomial {j} does not change sign on the grid"),
            )
        } else if let Some(w) = on_face {
            CheckResult::fail(Some(w), "region reaches the bounding box faces")
        } else {
            CheckResult::pass("every boundary polynomial changes sign inside the box")
        };
        let interior_positivity = if interior_count > 0 {
            CheckResult::pass(format!("{interior_count} interior grid points"))
        } else {
            CheckResult::fail(None, "no grid point has all boundary polynomials positive")
        };
        let exactly_one_negative = match ambiguous {
            None => CheckResult::pass("every grid point classifies uniquely"),
            Some((w, ids)) => CheckResult::fail(
                Some(w),
                format!("boundary polynomials {ids:?} are simultaneously non-positive"),
            ),
        };

        let gradient_margin = self.sign_change_gradient_margin(&axes, &vals);
        let gradient_margin_check = require_margin.map(|need| match gradient_margin {
            Some(g) if g >= need => CheckResult::pass(format!("gradient margin {g:e} ≥ {need:e}")),
            g => CheckResult::fail(None, format!("gradient margin {g:?} below required {need:e}")),
        });

        let passed = intersection_nonneg.passed
            && interior_positivity.passed
            && exactly_one_negative.passed
            && gradient_margin_check.as_ref().is_none_or(|c| c.passed);
        RegionCertificate {
            passed,
            intersection_nonneg,
            interior_positivity,
            exactly_one_negative,
            gradient_margin_check,
            grid_res: res,
            tol,
            margin,
            gradient_margin,
        }
    }

    fn sign_change_gradient_margin(&self, axes: &[Vec<f64>], vals: &[Vec<f64>]) -> Option<f64> {
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let grads: Vec<Vec<MultiPoly>> = self.boundary_polys.iter().map(MultiPoly::gradient).collect();
        let mut idx = vec![0; self.dim];
        let mut best: Option<f64> = None;
        for (j, v) in vals.iter().enumerate() {
            for flat in 0..v.len() {
                unravel(flat, &dims, &mut idx);
                for axis in 0..self.dim {
                    if idx[axis] + 1 >= dims[axis] {
                        continue;
                    }
                    idx[axis] += 1;
                    let other = ravel(&idx, &dims);
                    idx[axis] -= 1;
                    let (a, b) = (v[flat], v[other]);
                    if (a < 0.0) == (b < 0.0) {
                        continue;
                    }
                    let t = a / (a - b);
                    let mut x: Vec<f64> = idx.iter().enumerate().map(|(ax, &i)| axes[ax][i]).collect();
                    x[axis] += t * (axes[axis][idx[axis] + 1] - axes[axis][idx[axis]]);
                    let g = grads[j]
                        .iter()
                        .map(|d| d.eval_unchecked(&x).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    best = Some(best.map_or(g, |m| m.min(g)));
                }
            }
        }
        best
    }

    /// Flags for the grid cells whose corners all lie in the closed region.
    fn included_cells(&self, res: usize) -> (Vec<bool>, Vec<bool>) {
        let (_, vals) = self.grid_values(res);
        let npts = vals[0].len();
        let tol = self.tol;
        let inside: Vec<bool> = (0..npts)
            .map(|i| vals.iter().all(|v| v[i] >= -tol))
            .collect();
        let d = self.dim;
        let pdims = vec![res + 1; d];
        let cdims = vec![res; d];
        let ncells = res.pow(d as u32);
        let mut cidx = vec![0; d];
        let mut corner = vec![0; d];
        let cells = (0..ncells)
            .map(|c| {
                unravel(c, &cdims, &mut cidx);
                (0..1usize << d).all(|m| {
                    for a in 0..d {
                        corner[a] = cidx[a] + ((m >> a) & 1);
                    }
                    inside[ravel(&corner, &pdims)]
                })
            })
            .collect();
        (inside, cells)
    }

    /// Euler characteristic of the closed cubical complex at a fixed resolution.
    pub fn euler_at(&self, res: usize) -> i64 {
        let d = self.dim;
        let (_, top) = self.included_cells(res);
        let cdims = vec![res; d];
        let mut chi = 0i64;
        let mut lower = vec![0usize; d];
        let mut probe = vec![0usize; d];
        for mask in 0..(1usize << d) {
            let k = mask.count_ones();
            // extents of lower corners for cells spanning the axes in `mask`
            let ext: Vec<usize> = (0..d)
                .map(|a| if mask >> a & 1 == 1 { res } else { res + 1 })
                .collect();
            let free: Vec<usize> = (0..d).filter(|a| mask >> a & 1 == 0).collect();
            let total: usize = ext.iter().product();
            let mut count = 0i64;
            for flat in 0..total {
                unravel(flat, &ext, &mut lower);
                let present = (0..1usize << free.len()).any(|s| {
                    probe.copy_from_slice(&lower);
                    for (bit, &a) in free.iter().enumerate() {
                        if s >> bit & 1 == 1 {
                            if probe[a] == 0 {
                                return false;
                            }
                            probe[a] -= 1;
                        } else if probe[a] >= res {
                            return false;
                        }
                    }
                    top[ravel(&probe, &cdims)]
                });
                if present {
                    count += 1;
                }
            }
            chi += if k % 2 == 0 { count } else { -count };
        }
        chi
    }

    /// Euler characteristic of the region, doubling the resolution from
    /// `grid_res` until two successive values agree.
    pub fn region_euler(&self) -> Result<i64> {
        let mut res = self.grid_res;
        let mut prev = self.euler_at(res);
        let mut history = vec![prev];
        while res * 2 <= MAX_EULER_RES {
            res *= 2;
            let cur = self.euler_at(res);
            history.push(cur);
            if cur == prev {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::EulerNotConverged {
            max_res: MAX_EULER_RES,
            last: history,
        })
    }

    /// Connected components of the closed cubical complex.
    pub fn components_at(&self, res: usize) -> usize {
        let d = self.dim;
        let (_, top) = self.included_cells(res);
        let pdims = vec![res + 1; d];
        let cdims = vec![res; d];
        let mut uf = UnionFind::new((res + 1).pow(d as u32));
        let mut used = vec![false; uf.len()];
        let mut cidx = vec![0; d];
        let mut corner = vec![0; d];
        for (c, _) in top.iter().enumerate().filter(|(_, &t)| t) {
            unravel(c, &cdims, &mut cidx);
            let base = ravel(&cidx, &pdims);
            for m in 0..(1usize << d) {
                for a in 0..d {
                    corner[a] = cidx[a] + ((m >> a) & 1);
                }
                let v = ravel(&corner, &pdims);
                used[v] = true;
                uf.union(base, v);
            }
        }
        let mut roots: Vec<usize> = (0..used.len()).filter(|&v| used[v]).map(|v| uf.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    /// Zeros of `∏ f_j` located by bisection along sign-changing grid edges.
    pub fn boundary_samples(&self, res: usize) -> Vec<Vec<f64>> {
        let prod = self.product();
        let axes = self.bbox.axes(res);
        let vals = prod.eval_grid(&axes).expect("dims checked");
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let mut idx = vec![0; self.dim];
        let mut out = Vec::new();
        for flat in 0..vals.len() {
            unravel(flat, &dims, &mut idx);
            for axis in 0..self.dim {
                if idx[axis] + 1 >= dims[axis] {
                    continue;
                }
                idx[axis] += 1;
                let other = ravel(&idx, &dims);
                idx[axis] -= 1;
                let (fa, fb) = (vals[flat], vals[other]);
                if fa == 0.0 {
                    out.push(idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect());
                    continue;
                }
                if (fa < 0.0) == (fb < 0.0) || fb == 0.0 {
                    continue;
                }
                let mut x: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect();
                let (mut lo, mut hi) = (axes[axis][idx[axis]], axes[axis][idx[axis] + 1]);
                let mut flo = fa;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    x[axis] = mid;
                    let fm = prod.eval_unchecked(&x);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                x[axis] = 0.5 * (lo + hi);
                out.push(x);
            }
        }
        out
    }

    /// The same region expressed in coordinates rotated by `angle` radians,
    /// so that the first new coordinate is `cos·x1 + sin·x2`. Planar only.
    pub fn rotated(&self, angle: f64) -> Result<Region> {
        if self.dim != 2 {
            return Err(Error::NotSupported("rotation is only defined for planar regions".into()));
        }
        let (s, c) = angle.sin_cos();
        let rows = [vec![c, -s], vec![s, c]];
        let polys = self
            .boundary_polys
            .iter()
            .map(|p| p.substitute_linear(&rows))
            .collect::<Result<Vec<_>>>()?;
        let corners = [
            [self.bbox.min[0], self.bbox.min[1]],
            [self.bbox.min[0], self.bbox.max[1]],
            [self.bbox.max[0], self.bbox.min[1]],
            [self.bbox.max[0], self.bbox.max[1]],
        ];
        let mut min = vec![f64::INFINITY; 2];
        let mut max = vec![f64::NEG_INFINITY; 2];
        for [x1, x2] in corners {
            let z = [c * x1 + s * x2, -s * x1 + c * x2];
            for a in 0..2 {
                min[a] = min[a].min(z[a]);
                max[a] = max[a].max(z[a]);
            }
        }
        Region::new(polys, BBox::new(min, max)?, self.grid_res)
    }
}

/// Result of [`fit_boundary`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub poly: MultiPoly,
    pub rms_residual: f64,
    pub min_gradient_norm: f64,
    pub singular_values: Vec<f64>,
}

/// All exponent vectors of total degree at most `degree`, canonical order.
fn monomial_basis(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(var: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if var == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[var] = e;
            rec(var + 1, left - e, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    rec(0, degree, &mut vec![0; nvars], &mut out);
    let mut keyed: BTreeMap<crate::polynomial::Monomial, ()> = BTreeMap::new();
    for e in out {
        keyed.insert(crate::polynomial::Monomial(e), ());
    }
    keyed.into_keys().map(|m| m.0).collect()
}

/// Least-squares implicit polynomial through the samples: minimizes
/// `Σ p(s)²` over unit-norm coefficient vectors (smallest right singular
/// vector of the monomial matrix). The sign is chosen so the fit is positive
/// at the sample centroid.
pub fn fit_boundary(samples: &[Vec<f64>], degree: u32) -> Result<FitReport> {
    if degree < 1 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    let dim = samples
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("no samples".into()))?;
    if dim == 0 {
        return Err(Error::InvalidArgument("samples have no coordinates".into()));
    }
    if let Some(s) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: s.len(),
        });
    }
    let basis = monomial_basis(dim, degree);
    if samples.len() < basis.len() {
        return Err(Error::InvalidArgument(format!(
            "{} samples cannot determine {} coefficients",
            samples.len(),
            basis.len()
        )));
    }
    let a = DMatrix::from_fn(samples.len(), basis.len(), |i, j| {
        samples[i]
            .iter()
            .zip(&basis[j])
            .map(|(x, &e)| x.powi(e as i32))
            .product()
    });
    let svd = a.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    let sv: &[f64] = svd.singular_values.as_slice();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let smax = svd.singular_values[order[order.len() - 1]];
    if order.len() > 1 && svd.singular_values[order[1]] <= 1e-8 * smax {
        return Err(Error::RankDeficient(format!(
            "null space of dimension > 1 at degree {degree}"
        )));
    }
    let best = order[0];
    let mut coeffs: Vec<f64> = v_t.row(best).iter().copied().collect();

    let centroid: Vec<f64> = (0..dim)
        .map(|a| samples.iter().map(|s| s[a]).sum::<f64>() / samples.len() as f64)
        .collect();
    let poly_of = |c: &[f64]| MultiPoly::from_terms(dim, basis.iter().cloned().zip(c.iter().copied()));
    if poly_of(&coeffs)?.eval(&centroid)? < 0.0 {
        coeffs.iter_mut().for_each(|c| *c = -*c);
    }
    let poly = poly_of(&coeffs)?;
    let grad = poly.gradient();
    let mut sq = 0.0;
    let mut min_grad = f64::INFINITY;
    for s in samples {
        sq += poly.eval_unchecked(s).powi(2);
        let g = grad.iter().map(|d| d.eval_unchecked(s).powi(2)).sum::<f64>().sqrt();
        min_grad = min_grad.min(g);
    }
    let mut singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    singular_values.reverse();
    Ok(FitReport {
        poly,
        rms_residual: (sq / samples.len() as f64).sqrt(),
        min_gradient_norm: min_grad,
        singular_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    #[test]
    fn classify_examples() {
        let disk = shapes::disk();
        assert_eq!(disk.classify_point(&[0.0, 0.0], 1e-9).unwrap(), PointClass::Interior);
        assert_eq!(disk.classify_point(&[1.0, 0.0], 1e-9).unwrap(), PointClass::BoundaryBand(0));
        let ann = shapes::annulus();
        assert_eq!(ann.classify_point(&[0.0, 0.0], 1e-9).unwrap(), PointClass::Exterior(0));
        assert!(matches!(disk.classify_point(&[0.0], 1e-9), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(disk.classify_point(&[0.0, 0.0], 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn overlapping_circles_are_ambiguous() {
        let r = shapes::overlapping_circles();
        match r.classify_point(&[2.0, 0.0], 1e-9) {
            Err(Error::Ambiguous { indices }) => assert_eq!(indices, vec![0, 1]),
            other => panic!("expected ambiguity, got {other:?}"),
        }
        let cert = r.certify();
        assert!(!cert.passed);
        assert!(!cert.exactly_one_negative.passed);
        let w = cert.exactly_one_negative.witness.unwrap();
        let v = r.values_at(&w).unwrap();
        assert!(v.iter().filter(|&&x| x <= r.tol()).count() >= 2);
    }

    #[test]
    fn certify_examples() {
        let c = shapes::disk().certify();
        assert!(c.passed, "{c:?}");
        assert_eq!(c.grid_res, 256);
        assert!(c.gradient_margin.unwrap() > 1.0);

        let swapped = shapes::swapped_annulus().certify();
        assert!(!swapped.passed);
        assert!(!swapped.interior_positivity.passed);
        assert!(!swapped.exactly_one_negative.passed);

        for r in [shapes::annulus(), shapes::two_holed_disk(), shapes::interval(), shapes::two_intervals()] {
            assert!(r.certify().passed);
        }
    }

    #[test]
    fn certify_rejects_clipped_region() {
        let disk = shapes::disk();
        let clipped = Region::new(disk.boundary_polys().to_vec(), BBox::symmetric(2, 0.9).unwrap(), 64).unwrap();
        let c = clipped.certify();
        assert!(!c.intersection_nonneg.passed);
    }

    #[test]
    fn require_margin_is_enforced() {
        let disk = shapes::disk();
        assert!(disk.certify_with(Some(1.0)).passed);
        let c = disk.certify_with(Some(10.0));
        assert!(!c.passed);
        assert!(!c.gradient_margin_check.unwrap().passed);
    }

    #[test]
    fn euler_examples() {
        assert_eq!(shapes::disk().region_euler().unwrap(), 1);
        assert_eq!(shapes::annulus().region_euler().unwrap(), 0);
        assert_eq!(shapes::two_holed_disk().region_euler().unwrap(), -1);
        assert_eq!(shapes::interval().region_euler().unwrap(), 1);
        assert_eq!(shapes::two_intervals().region_euler().unwrap(), 2);
    }

    #[test]
    fn euler_is_additive_over_disjoint_parts() {
        let x = MultiPoly::var(1, 0).unwrap();
        let one = MultiPoly::constant(1, 1.0);
        let two = MultiPoly::constant(1, 2.0);
        let bbox = BBox::new(vec![-2.5], vec![2.5]).unwrap();
        // [-2, -1] and [1, 2] separately, same box
        let left = Region::new(vec![&-&x - &one, &x + &two], bbox.clone(), 256).unwrap();
        let right = Region::new(vec![&x - &one, &two - &x], bbox, 256).unwrap();
        let both = shapes::two_intervals();
        assert_eq!(
            both.region_euler().unwrap(),
            left.region_euler().unwrap() + right.region_euler().unwrap()
        );
    }

    #[test]
    fn components() {
        assert_eq!(shapes::disk().components_at(128), 1);
        assert_eq!(shapes::two_intervals().components_at(128), 2);
    }

    #[test]
    fn boundary_samples_lie_on_zero_set() {
        let r = shapes::annulus();
        let pts = r.boundary_samples(64);
        assert!(pts.len() > 100);
        let p = r.product();
        for x in &pts {
            assert!(p.eval(x).unwrap().abs() < 1e-12);
        }
    }

    fn circle_samples(n: usize, a: f64, b: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                vec![a * t.cos(), b * t.sin()]
            })
            .collect()
    }

    #[test]
    fn fit_recovers_circle() {
        let fit = fit_boundary(&circle_samples(64, 1.0, 1.0), 2).unwrap();
        assert!(fit.rms_residual < 1e-8);
        let c = fit.poly.constant_term();
        assert!(c > 0.0);
        let expect = MultiPoly::from_terms(2, [(vec![0, 0], c), (vec![2, 0], -c), (vec![0, 2], -c)]).unwrap();
        for (a, b) in fit.poly.terms().iter().zip(expect.terms()) {
            assert_eq!(a.exps, b.exps);
            assert!((a.coeff - b.coeff).abs() < 1e-9);
        }
        assert_eq!(fit.poly.terms().len(), 3);
    }

    #[test]
    fn fit_ellipse_and_model_class() {
        let fit = fit_boundary(&circle_samples(64, 2.0, 1.0), 2).unwrap();
        assert!(fit.rms_residual < 1e-8);
        assert!(fit.min_gradient_norm > 0.0);

        // zero set of x^2 - 2xy + 3y^2 - 1, parametrized by rays
        let q = MultiPoly::from_terms(2, [(vec![2, 0], 1.0), (vec![1, 1], -2.0), (vec![0, 2], 3.0), (vec![0, 0], -1.0)])
            .unwrap();
        let samples: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 40.0;
                let (s, c) = t.sin_cos();
                let r = 1.0 / (c * c - 2.0 * c * s + 3.0 * s * s).sqrt();
                vec![r * c, r * s]
            })
            .collect();
        let fit = fit_boundary(&samples, 2).unwrap();
        assert!(fit.rms_residual < 1e-10);
        // recovered up to scale; sign is negative since q < 0 at the centroid
        let lambda = fit.poly.coeff(&[2, 0]) / q.coeff(&[2, 0]);
        assert!(lambda < 0.0);
        for t in q.terms() {
            assert!((fit.poly.coeff(&t.exps) - lambda * t.coeff).abs() < 1e-8);
        }
    }

    #[test]
    fn fit_rejects_degenerate_requests() {
        assert!(matches!(
            fit_boundary(&circle_samples(64, 1.0, 1.0), 4),
            Err(Error::RankDeficient(_))
        ));
        assert!(fit_boundary(&circle_samples(3, 1.0, 1.0), 2).is_err());
        assert!(fit_boundary(&circle_samples(64, 1.0, 1.0), 0).is_err());
    }
}

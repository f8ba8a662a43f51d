//! Numerical verification of the special generic structure of the
//! projection `(x, y) ↦ x` restricted to `M = P⁻¹(0)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construct::{directions, fiber_radius, ray_level_radius, Hypersurface};
use crate::error::{Error, Result};
use crate::mesh;
use crate::polynomial::MultiPoly;
use crate::region::{BBox, PointClass};
use crate::roots::isolate_roots;
use crate::unionfind::UnionFind;

/// Newton stops once `|P| ≤ NEWTON_TOL`.
pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 50;
const MAX_HALVINGS: usize = 30;

/// `P` with its gradient and Hessian as polynomials.
#[derive(Clone, Debug)]
pub struct PolyField {
    pub poly: MultiPoly,
    pub grad: Vec<MultiPoly>,
    hess: Vec<Vec<MultiPoly>>,
}

impl PolyField {
    pub fn new(poly: &MultiPoly) -> Self {
        let grad = poly.gradient();
        let hess = grad.iter().map(MultiPoly::gradient).collect();
        PolyField {
            poly: poly.clone(),
            grad,
            hess,
        }
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        self.poly.eval_unchecked(z)
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|d| d.eval_unchecked(z)).collect()
    }

    pub fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let n = self.grad.len();
        DMatrix::from_fn(n, n, |i, j| self.hess[i][j].eval_unchecked(z))
    }

    /// Damped Newton projection onto `P = 0` along `-P ∇P / |∇P|²`. The step
    /// is halved while `|P|` fails to decrease.
    pub fn project(&self, start: &[f64]) -> Option<Vec<f64>> {
        let mut z = start.to_vec();
        let mut p = self.value(&z);
        for _ in 0..NEWTON_MAX_ITER {
            if p.abs() <= NEWTON_TOL {
                return Some(z);
            }
            let g = self.gradient(&z);
            let gn2: f64 = g.iter().map(|v| v * v).sum();
            if !(gn2 > 1e-300) {
                return None;
            }
            let step: Vec<f64> = g.iter().map(|gi| -p * gi / gn2).collect();
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand: Vec<f64> = z.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
                let pc = self.value(&cand);
                if pc.abs() < p.abs() {
                    accepted = Some((cand, pc));
                    break;
                }
                lambda *= 0.5;
            }
            let (zn, pn) = accepted?;
            z = zn;
            p = pn;
        }
        (p.abs() <= NEWTON_TOL).then_some(z)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub coords: Vec<f64>,
    pub residual: f64,
    pub grad_norm: f64,
}

fn uniform_in(bbox: &BBox, rng: &mut ChaCha8Rng) -> Vec<f64> {
    bbox.min()
        .iter()
        .zip(bbox.max())
        .map(|(&a, &b)| rng.gen_range(a..b))
        .collect()
}

/// Newton-refines `count` uniform seeds from `bbox × bbox_y` onto `M`.
/// Fails if fewer than a quarter of the seeds converge.
pub fn sample_manifold(h: &Hypersurface, count: usize, seed: u64) -> Result<Vec<SamplePoint>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let field = PolyField::new(h.poly());
    let bbox = h.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..count {
        let start = uniform_in(&bbox, &mut rng);
        if let Some(z) = field.project(&start) {
            out.push(SamplePoint {
                residual: field.value(&z).abs(),
                grad_norm: norm(&field.gradient(&z)),
                coords: z,
            });
        }
    }
    if out.len() * 4 < count {
        return Err(Error::LowYield {
            got: out.len(),
            requested: count,
        });
    }
    Ok(out)
}

/// Largest `|F0(∏f(x)/T) - Fvert(y)|` over the samples, evaluated from the
/// parts rather than from the expanded `P`.
pub fn collar_identity_residual(h: &Hypersurface, samples: &[SamplePoint]) -> f64 {
    let n = h.n();
    samples
        .iter()
        .map(|s| {
            let (x, y) = s.coords.split_at(n);
            let lhs = h.f0().eval(h.product().eval_unchecked(x) / h.t());
            (lhs - h.fvert().eval_unchecked(y)).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonsingularReport {
    pub passed: bool,
    pub delta: f64,
    pub samples: usize,
    pub min_grad_norm: f64,
    pub max_grad_norm: f64,
    /// Smallest `|∇P|` reached by descent on `|∇P|²` along `M` from the samples.
    pub descent_min_grad_norm: f64,
    pub descent_witness: Option<Vec<f64>>,
}

/// Restarts of the gradient-norm descent.
const DESCENT_RESTARTS: usize = 256;
const DESCENT_ITERS: usize = 40;

/// Checks `|∇P| ≥ delta` on the samples and on the minima of `|∇P|²` found
/// by projected descent from each sample. `delta` defaults to
/// `1e-4 · max |∇P|` over the samples.
pub fn verify_nonsingular(h: &Hypersurface, samples: &[SamplePoint], delta: Option<f64>) -> NonsingularReport {
    let field = PolyField::new(h.poly());
    let min_grad = samples.iter().map(|s| s.grad_norm).fold(f64::INFINITY, f64::min);
    let max_grad = samples.iter().map(|s| s.grad_norm).fold(0.0, f64::max);
    let delta = delta.unwrap_or(1e-4 * max_grad);

    let step_scale = 0.05 * h.bbox().diagonal();
    let mut best = f64::INFINITY;
    let mut witness = None;
    for s in samples.iter().take(DESCENT_RESTARTS) {
        let (g, z) = descend_grad_norm(&field, &s.coords, step_scale);
        if g < best {
            best = g;
            witness = Some(z);
        }
    }
    NonsingularReport {
        passed: !samples.is_empty() && min_grad >= delta && best >= delta,
        delta,
        samples: samples.len(),
        min_grad_norm: min_grad,
        max_grad_norm: max_grad,
        descent_min_grad_norm: best,
        descent_witness: witness,
    }
}

/// Projected descent of `|∇P|²` on `P = 0`; returns the smallest `|∇P|`
/// visited and where.
fn descend_grad_norm(field: &PolyField, start: &[f64], step_scale: f64) -> (f64, Vec<f64>) {
    let mut z = start.to_vec();
    let mut g = field.gradient(&z);
    let mut obj = norm(&g).powi(2);
    let mut eta = step_scale;
    for _ in 0..DESCENT_ITERS {
        let hess = field.hessian(&z);
        let gv = DVector::from_column_slice(&g);
        let mut d = (&hess * &gv) * 2.0;
        let gn = gv.norm();
        if gn > 0.0 {
            let nrm = &gv / gn;
            let along = d.dot(&nrm);
            d -= nrm * along;
        }
        let dn = d.norm();
        if !(dn > 1e-300) {
            break;
        }
        let dir = d / dn;
        let mut improved = false;
        for _ in 0..20 {
            let cand: Vec<f64> = z.iter().zip(dir.iter()).map(|(a, b)| a - eta * b).collect();
            if let Some(p) = field.project(&cand) {
                let gp = field.gradient(&p);
                let op = norm(&gp).powi(2);
                if op < obj {
                    z = p;
                    g = gp;
                    obj = op;
                    improved = true;
                    eta *= 1.5;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (obj.sqrt(), z)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSetReport {
    pub passed: bool,
    pub tol: f64,
    pub boundary_seeds: usize,
    pub candidates: Vec<Vec<f64>>,
    pub hausdorff_to_boundary: f64,
    pub max_fvert: f64,
    pub max_y_norm: f64,
    /// Projection-critical points whose base lies in the region interior.
    pub interior_violations: Vec<Vec<f64>>,
}

/// Relative size of `∇_y P` at which a point counts as projection-critical.
const CRITICAL_TOL: f64 = 1e-12;

/// Levenberg–Marquardt on `{P = 0, ∇_y P = 0}` from `start`.
fn refine_critical(field: &PolyField, n: usize, start: &[f64]) -> Option<Vec<f64>> {
    let dim = start.len();
    let k = dim - n;
    let mut z = start.to_vec();
    for _ in 0..300 {
        let g = field.gradient(&z);
        let p = field.value(&z);
        let gy = &g[n..];
        let gn = norm(&g);
        if p.abs() <= NEWTON_TOL && norm(gy) <= CRITICAL_TOL * gn.max(1.0) {
            return Some(z);
        }
        let hess = field.hessian(&z);
        let mut f = DVector::zeros(1 + k);
        f[0] = p;
        let mut jac = DMatrix::zeros(1 + k, dim);
        for c in 0..dim {
            jac[(0, c)] = g[c];
        }
        for j in 0..k {
            f[1 + j] = gy[j];
            for c in 0..dim {
                jac[(1 + j, c)] = hess[(n + j, c)];
            }
        }
        let jjt = &jac * jac.transpose();
        let lambda = 1e-14 * jjt.trace().max(1e-300);
        let sys = jjt + DMatrix::identity(1 + k, 1 + k) * lambda;
        let w = sys.lu().solve(&f)?;
        let step = jac.transpose() * w;
        if !step.iter().all(|v| v.is_finite()) {
            return None;
        }
        for (zi, si) in z.iter_mut().zip(step.iter()) {
            *zi -= si;
        }
        if step.norm() < 1e-300 {
            break;
        }
    }
    let g = field.gradient(&z);
    (field.value(&z).abs() <= NEWTON_TOL && norm(&g[n..]) <= CRITICAL_TOL * norm(&g).max(1.0)).then_some(z)
}

/// Newton projection of `x` onto the zero set of the boundary product. One
/// step is always taken so that points already within tolerance still
/// report their first-order distance.
fn project_to_boundary(prod: &PolyField, x: &[f64]) -> Option<Vec<f64>> {
    let g = prod.value(x);
    let d = prod.gradient(x);
    let n2: f64 = d.iter().map(|v| v * v).sum();
    if !(n2 > 1e-300) {
        return prod.project(x);
    }
    let stepped: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi - g * di / n2).collect();
    prod.project(&stepped)
}

fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one_sided = |p: &[Vec<f64>], q: &[Vec<f64>]| {
        p.iter()
            .map(|u| q.iter().map(|v| dist(u, v)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    one_sided(a, b).max(one_sided(b, a))
}

/// Seed resolution for boundary samples.
fn boundary_res(h: &Hypersurface) -> usize {
    match h.n() {
        1 => h.region().grid_res(),
        2 => h.region().grid_res().min(256),
        _ => 24,
    }
}

/// Locates the projection-critical points of `M` (where `∇_y P` vanishes
/// relative to `∇P`) from seeds on `{∏f = 0} × {0}` and from a sweep of
/// manifold samples, then checks that they sit over the region boundary at
/// `y ≈ 0`.
pub fn singular_set_check(h: &Hypersurface, tol: f64) -> Result<SingularSetReport> {
    let n = h.n();
    let k = h.k();
    let field = PolyField::new(h.poly());
    let prod = PolyField::new(h.product());
    let seeds = h.region().boundary_samples(boundary_res(h));

    let mut candidates = Vec::new();
    for x in &seeds {
        let mut z = x.clone();
        z.extend(std::iter::repeat_n(0.0, k));
        if let Some(c) = refine_critical(&field, n, &z) {
            candidates.push(c);
        }
    }
    let sweep = sample_manifold(h, 256, 0x51_6e_67)?;
    for s in &sweep {
        if let Some(c) = refine_critical(&field, n, &s.coords) {
            candidates.push(c);
        }
    }

    let mut interior_violations = Vec::new();
    let mut max_fvert: f64 = 0.0;
    let mut max_y: f64 = 0.0;
    let mut cand_x = Vec::with_capacity(candidates.len());
    let mut zero_set = seeds.clone();
    for c in &candidates {
        let (x, y) = c.split_at(n);
        max_fvert = max_fvert.max(h.fvert().eval_unchecked(y));
        max_y = max_y.max(norm(y));
        if let Ok(PointClass::Interior) = h.region().classify(x) {
            interior_violations.push(c.clone());
        }
        if let Some(b) = project_to_boundary(&prod, x) {
            zero_set.push(b);
        }
        cand_x.push(x.to_vec());
    }
    let hd = hausdorff(&cand_x, &zero_set);
    let passed = !candidates.is_empty() && hd <= tol && max_fvert <= tol && interior_violations.is_empty();
    Ok(SingularSetReport {
        passed,
        tol,
        boundary_seeds: seeds.len(),
        candidates,
        hausdorff_to_boundary: hd,
        max_fvert,
        max_y_norm: max_y,
        interior_violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberClass {
    Point,
    TwoPoints,
    Circle,
    Unknown,
    NotComputed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub base_x: Vec<f64>,
    pub region_class: PointClass,
    pub level: f64,
    pub components: usize,
    pub euler_char: Option<i64>,
    pub classification: FiberClass,
    pub expected: FiberClass,
    pub passed: bool,
}

/// Expected fiber over an interior point.
fn sphere_class(k: usize) -> FiberClass {
    match k {
        1 => FiberClass::TwoPoints,
        2 => FiberClass::Circle,
        _ => FiberClass::NotComputed,
    }
}

/// Topology of the fiber `{y : Fvert(y) = F0(∏f(x)/T)}` over `x`.
pub fn fiber_at(h: &Hypersurface, x: &[f64]) -> Result<FiberReport> {
    let region = h.region();
    let class = region.classify(x)?;
    let k = h.k();
    let expected = match class {
        PointClass::Interior => sphere_class(k),
        PointClass::BoundaryBand(_) => FiberClass::Point,
        PointClass::Exterior(j) => {
            return Err(Error::InvalidArgument(format!(
                "base point {x:?} lies outside the region (boundary polynomial {j} is negative)"
            )))
        }
    };
    let level = h.level_at(x)?;
    // worst-case level over the classification band around x
    let level_tol = match class {
        PointClass::BoundaryBand(j) => {
            let vals = region.values_at(x)?;
            let others: f64 = vals.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| v.abs()).product();
            let band = region.tol() * others / h.t();
            h.f0().eval(band).abs().max(h.f0().eval(-band).abs()) * (1.0 + 1e-6) + 1e-300
        }
        _ => 0.0,
    };

    let (components, euler_char, classification) = if level <= level_tol {
        (1, Some(1), FiberClass::Point)
    } else {
        match fiber_radius(h.fvert(), level) {
            None => (0, None, FiberClass::Unknown),
            Some(r) => classify_fiber(h, level, r * 1.25)?,
        }
    };
    let passed = classification == expected && (classification != FiberClass::NotComputed || components == 1);
    Ok(FiberReport {
        base_x: x.to_vec(),
        region_class: class,
        level,
        components,
        euler_char,
        classification,
        expected,
        passed,
    })
}

fn classify_fiber(h: &Hypersurface, level: f64, r: f64) -> Result<(usize, Option<i64>, FiberClass)> {
    let fvert = h.fvert();
    match h.k() {
        1 => {
            let d = fvert.partial_derivative(0)?;
            let roots = isolate_roots(
                |t| fvert.eval_unchecked(&[t]) - level,
                |t| d.eval_unchecked(&[t]),
                -r,
                r,
                1024,
                1e-12 * r,
            );
            let class = match roots.as_slice() {
                [a, b] if *a < 0.0 && *b > 0.0 => FiberClass::TwoPoints,
                _ => FiberClass::Unknown,
            };
            Ok((roots.len(), Some(roots.len() as i64), class))
        }
        2 => {
            let g = fvert - &MultiPoly::constant(2, level);
            let m = mesh::extract_isosurface(&g, &BBox::symmetric(2, r)?, 128)?;
            let comps = mesh::component_count(&m);
            let chi = mesh::euler_char(&m)?;
            let class = if comps == 1 && chi == 0 {
                FiberClass::Circle
            } else {
                FiberClass::Unknown
            };
            Ok((comps, Some(chi), class))
        }
        k => {
            let pts: Vec<Vec<f64>> = directions(k, 512)
                .into_iter()
                .filter_map(|u| ray_level_radius(fvert, &u, level).map(|s| u.iter().map(|c| c * s).collect()))
                .collect();
            Ok((sampled_components(&pts, 0.25 * r), None, FiberClass::NotComputed))
        }
    }
}

/// Components of the `radius`-neighborhood graph of a point sample.
fn sampled_components(pts: &[Vec<f64>], radius: f64) -> usize {
    let mut uf = UnionFind::new(pts.len());
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if dist(&pts[i], &pts[j]) <= radius {
                uf.union(i, j);
            }
        }
    }
    let mut roots: Vec<usize> = (0..pts.len()).map(|i| uf.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSuiteReport {
    pub passed: bool,
    pub interior_checked: usize,
    pub boundary_checked: usize,
    pub failures: Vec<FiberReport>,
}

/// Fibers over the interior points of a coarse region grid and over sampled
/// boundary points.
pub fn fiber_suite(h: &Hypersurface, grid_cells: usize, max_boundary: usize) -> Result<FiberSuiteReport> {
    let region = h.region();
    let axes = region.bbox().axes(grid_cells);
    let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = dims.iter().product();
    let mut idx = vec![0; dims.len()];
    let mut interior = Vec::new();
    for flat in 0..total {
        crate::region::unravel(flat, &dims, &mut idx);
        let x: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect();
        if let Ok(PointClass::Interior) = region.classify(&x) {
            interior.push(x);
        }
    }
    let boundary_all = region.boundary_samples(boundary_res(h).min(128));
    let stride = boundary_all.len().div_ceil(max_boundary.max(1)).max(1);
    let boundary: Vec<Vec<f64>> = boundary_all.into_iter().step_by(stride).collect();

    let mut failures = Vec::new();
    for x in interior.iter().chain(&boundary) {
        let rep = fiber_at(h, x)?;
        if !rep.passed {
            failures.push(rep);
        }
    }
    Ok(FiberSuiteReport {
        passed: failures.is_empty() && !interior.is_empty() && !boundary.is_empty(),
        interior_checked: interior.len(),
        boundary_checked: boundary.len(),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarRay {
    pub origin: Vec<f64>,
    pub depths: Vec<f64>,
    pub extents: Vec<f64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarReport {
    pub passed: bool,
    pub band: f64,
    pub rays: usize,
    pub failures: Vec<CollarRay>,
}

const COLLAR_DEPTHS: usize = 16;
const COLLAR_MAX_RAYS: usize = 64;

/// Default collar depth: 5% of the shortest region box side.
pub fn default_band(h: &Hypersurface) -> f64 {
    let b = h.region().bbox();
    0.05 * (0..b.dim()).map(|a| b.extent(a)).fold(f64::INFINITY, f64::min)
}

/// Fiber extent `ρ(s) = max |y|` along inward normal rays from the region
/// boundary; it must start at zero and increase strictly with depth.
pub fn collar_model_check(h: &Hypersurface, band: f64) -> Result<CollarReport> {
    if !(band > 0.0) {
        return Err(Error::InvalidArgument(format!("band must be positive, got {band}")));
    }
    let region = h.region();
    let prod = PolyField::new(h.product());
    let all = region.boundary_samples(boundary_res(h).min(128));
    let stride = all.len().div_ceil(COLLAR_MAX_RAYS).max(1);
    let k = h.k();
    let dirs = directions(k, if k == 2 { 64 } else { 128 });
    let extent = |x: &[f64]| -> Option<f64> {
        let level = h.level_at(x).ok()?;
        if level <= 0.0 {
            return Some(0.0);
        }
        dirs.iter()
            .map(|u| ray_level_radius(h.fvert(), u, level))
            .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))
    };

    let mut failures = Vec::new();
    let mut rays = 0;
    for z in all.iter().step_by(stride) {
        rays += 1;
        let g = prod.gradient(z);
        let gn = norm(&g);
        let fail = |depths, extents, reason: &str| CollarRay {
            origin: z.clone(),
            depths,
            extents,
            reason: reason.to_string(),
        };
        if !(gn > 0.0) {
            failures.push(fail(vec![], vec![], "boundary product has vanishing gradient"));
            continue;
        }
        let normal: Vec<f64> = g.iter().map(|v| v / gn).collect();
        let depths: Vec<f64> = (0..=COLLAR_DEPTHS).map(|i| band * i as f64 / COLLAR_DEPTHS as f64).collect();
        let mut extents = Vec::with_capacity(depths.len());
        let mut ok = true;
        for &s in &depths {
            let x: Vec<f64> = z.iter().zip(&normal).map(|(a, b)| a + s * b).collect();
            if s > 0.0 && !matches!(region.classify(&x), Ok(PointClass::Interior)) {
                failures.push(fail(depths.clone(), extents.clone(), "inward ray leaves the region interior"));
                ok = false;
                break;
            }
            match extent(&x) {
                Some(e) => extents.push(e),
                None => {
                    failures.push(fail(depths.clone(), extents.clone(), "unbounded fiber"));
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let top = *extents.last().expect("non-empty");
        if !(extents[0] <= 1e-3 * top) {
            failures.push(fail(depths, extents, "fiber extent does not vanish at the boundary"));
        } else if extents.windows(2).any(|w| !(w[1] > w[0])) {
            failures.push(fail(depths, extents, "fiber extent is not strictly increasing"));
        }
    }
    Ok(CollarReport {
        passed: failures.is_empty() && rays > 0,
        band,
        rays,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_basic, build_basic_unchecked, build_generalized, TChoice, VerticalSpec};
    use crate::polynomial::UniPoly;
    use crate::region::Region;
    use crate::shapes;

    fn fvert(k: usize, terms: &[(&[u32], f64)]) -> MultiPoly {
        MultiPoly::from_terms(k, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn sphere_samples() {
        let h = build_basic(&shapes::disk(), 1).unwrap();
        let s = sample_manifold(&h, 1000, 7).unwrap();
        assert!(s.len() >= 250);
        for p in &s {
            assert!((norm(&p.coords) - 1.0).abs() <= 1e-8);
            assert!(p.residual <= NEWTON_TOL);
        }
        assert_eq!(s, sample_manifold(&h, 1000, 7).unwrap());
    }

    #[test]
    fn empty_hypersurface_fails_to_sample() {
        // -1 - x^2 - y^2 over the interval region
        let r = shapes::interval();
        let h = crate::construct::Hypersurface::assemble(
            r,
            UniPoly::new(vec![-1.0, 1.0]),
            fvert(1, &[(&[2], 1.0)]),
            1.0,
            1.0,
            crate::construct::ConstructionKind::Basic,
        )
        .unwrap();
        assert_eq!(h.poly().constant_term(), 0.0);
        let empty = crate::construct::Hypersurface::assemble(
            shapes::interval(),
            UniPoly::new(vec![-2.0, 1.0]),
            fvert(1, &[(&[2], 1.0)]),
            1.0,
            1.0,
            crate::construct::ConstructionKind::Basic,
        )
        .unwrap();
        assert!(matches!(sample_manifold(&empty, 200, 1), Err(Error::LowYield { .. })));
    }

    #[test]
    fn torus_collar_identity() {
        let h = build_basic(&shapes::annulus(), 1).unwrap();
        let s = sample_manifold(&h, 1000, 3).unwrap();
        assert!(collar_identity_residual(&h, &s) <= 1e-8);
    }

    #[test]
    fn nonsingular_sphere_and_torus() {
        let h = build_basic(&shapes::disk(), 1).unwrap();
        let s = sample_manifold(&h, 400, 1).unwrap();
        let rep = verify_nonsingular(&h, &s, Some(1.0));
        assert!(rep.passed, "{rep:?}");
        assert!((rep.min_grad_norm - 2.0).abs() < 1e-8);
        assert!((rep.descent_min_grad_norm - 2.0).abs() < 1e-6);

        let h = build_basic(&shapes::annulus(), 1).unwrap();
        let s = sample_manifold(&h, 400, 1).unwrap();
        let rep = verify_nonsingular(&h, &s, None);
        assert!(rep.passed && rep.min_grad_norm > 0.1, "{rep:?}");
    }

    #[test]
    fn nonsingular_rejects_squared_boundary() {
        let h = build_basic_unchecked(&shapes::duplicated_disk(), 1).unwrap();
        let s = sample_manifold(&h, 400, 1).unwrap();
        let rep = verify_nonsingular(&h, &s, None);
        assert!(!rep.passed, "{rep:?}");
        assert!(rep.descent_min_grad_norm < rep.delta);
    }

    #[test]
    fn singular_set_examples() {
        let h = build_basic(&shapes::disk(), 1).unwrap();
        let rep = singular_set_check(&h, 1e-6).unwrap();
        assert!(rep.passed, "hd = {} fv = {}", rep.hausdorff_to_boundary, rep.max_fvert);
        for c in &rep.candidates {
            assert!((norm(&c[..2]) - 1.0).abs() < 1e-8 && c[2].abs() < 1e-6);
        }

        let h = build_basic(&shapes::interval(), 2).unwrap();
        let rep = singular_set_check(&h, 1e-6).unwrap();
        assert!(rep.passed);
        for c in &rep.candidates {
            assert!((c[0].abs() - 1.0).abs() < 1e-8);
        }

        let spec = VerticalSpec::new(UniPoly::identity(), fvert(1, &[(&[4], 1.0)]), 2.0, TChoice::Fixed(1.0)).unwrap();
        let h = build_generalized(&shapes::disk(), &spec).unwrap();
        let rep = singular_set_check(&h, 1e-6).unwrap();
        assert!(rep.passed, "{:?}", (rep.hausdorff_to_boundary, rep.max_fvert, rep.interior_violations.len()));
    }

    #[test]
    fn fiber_examples() {
        let h = build_basic(&shapes::disk(), 1).unwrap();
        let f = fiber_at(&h, &[0.0, 0.0]).unwrap();
        assert_eq!(f.classification, FiberClass::TwoPoints);
        assert_eq!(f.level, 1.0);
        let f = fiber_at(&h, &[1.0, 0.0]).unwrap();
        assert_eq!((f.classification, f.components), (FiberClass::Point, 1));
        assert!(f.passed);
        assert!(fiber_at(&h, &[1.1, 0.0]).is_err());

        let spec = VerticalSpec::new(
            UniPoly::identity(),
            fvert(2, &[(&[2, 0], 2.0), (&[0, 4], 1.0)]),
            1.0,
            TChoice::Fixed(1.0),
        )
        .unwrap();
        let h = build_generalized(&shapes::disk(), &spec).unwrap();
        let f = fiber_at(&h, &[0.0, 0.0]).unwrap();
        assert_eq!((f.classification, f.components, f.euler_char), (FiberClass::Circle, 1, Some(0)));
    }

    #[test]
    fn fiber_near_boundary_is_tiny_sphere() {
        let h = build_basic(&shapes::disk(), 1).unwrap();
        let f = fiber_at(&h, &[0.999_999, 0.0]).unwrap();
        assert_eq!(f.classification, FiberClass::TwoPoints);
    }

    #[test]
    fn fiber_suite_on_examples() {
        for (r, k) in [(shapes::disk(), 1), (shapes::annulus(), 1), (shapes::interval(), 2), (shapes::two_holed_disk(), 2)] {
            let h = build_basic(&r, k).unwrap();
            let rep = fiber_suite(&h, 16, 16).unwrap();
            assert!(rep.passed, "{:?}", rep.failures.first());
        }
    }

    #[test]
    fn fibers_for_higher_k_are_connected() {
        let h = build_basic(&shapes::interval(), 3).unwrap();
        let f = fiber_at(&h, &[0.2]).unwrap();
        assert_eq!(f.classification, FiberClass::NotComputed);
        assert_eq!(f.components, 1);
        assert!(f.passed);
    }

    #[test]
    fn collar_examples() {
        let h = build_basic(&shapes::disk(), 1).unwrap();
        assert!(collar_model_check(&h, 0.1).unwrap().passed);
        let h = build_basic(&shapes::interval(), 2).unwrap();
        let rep = collar_model_check(&h, 0.1).unwrap();
        assert!(rep.passed && rep.rays == 2);
        let spec = VerticalSpec::new(UniPoly::identity(), fvert(1, &[(&[4], 1.0)]), 2.0, TChoice::Fixed(1.0)).unwrap();
        let h = build_generalized(&shapes::disk(), &spec).unwrap();
        assert!(collar_model_check(&h, 0.1).unwrap().passed);
    }

    #[test]
    fn collar_rejects_overlong_band() {
        // from the hole boundary at radius 0.5, a ray of depth 0.6 leaves the annulus
        let h = build_basic(&shapes::annulus(), 1).unwrap();
        assert!(!collar_model_check(&h, 0.6).unwrap().passed);
    }

    #[test]
    fn reflection_closure() {
        let h = build_basic(&shapes::annulus(), 1).unwrap();
        let field = PolyField::new(h.poly());
        for s in sample_manifold(&h, 200, 11).unwrap() {
            let mut z = s.coords.clone();
            z[2] = -z[2];
            let p = field.project(&z).unwrap();
            assert!(field.value(&p).abs() <= NEWTON_TOL);
        }
        let _ = Region::clone(h.region());
    }
}

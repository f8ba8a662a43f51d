//! Defining polynomials of the hypersurfaces.
//!
//! The basic construction over a region with boundary product `g = ∏ f_j` is
//! `P(x, y) = g(x) - Σ y_j²`. The generalized construction replaces the
//! vertical part by a vertical spec `(F0, Fvert, a, T)`:
//! `P(x, y) = F0(g(x) / T) - Fvert(y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{compose_univariate, MultiPoly, UniPoly};
use crate::region::{BBox, Region};

/// Inflation applied to vertical bounding boxes.
const BBOX_Y_MARGIN: f64 = 1.1;

/// Safety factor in the choice of `T`.
const T_SAFETY: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TChoice {
    Fixed(f64),
    Auto,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TDoc {
    Number(f64),
    Word(String),
}

impl Serialize for TChoice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TChoice::Fixed(t) => TDoc::Number(*t),
            TChoice::Auto => TDoc::Word("auto".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TChoice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match TDoc::deserialize(d)? {
            TDoc::Number(t) => Ok(TChoice::Fixed(t)),
            TDoc::Word(w) if w == "auto" => Ok(TChoice::Auto),
            TDoc::Word(w) => Err(serde::de::Error::custom(format!(
                "T must be a number or \"auto\", got {w:?}"
            ))),
        }
    }
}

/// Fiber-shape data `(F0, Fvert, a, T)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerticalSpec {
    pub f0: UniPoly,
    pub fvert: MultiPoly,
    pub a: f64,
    #[serde(rename = "T")]
    pub t: TChoice,
}

impl VerticalSpec {
    pub fn new(f0: UniPoly, fvert: MultiPoly, a: f64, t: TChoice) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("a must be positive, got {a}")));
        }
        if let TChoice::Fixed(t) = t {
            if !(t > 0.0) {
                return Err(Error::NonPositiveScale(t));
            }
        }
        Ok(VerticalSpec { f0, fvert, a, t })
    }

    /// `F0 = t`, `Fvert = Σ y_j²`, `T = 1`: the basic construction.
    pub fn round(k: usize, a: f64) -> Result<Self> {
        let fvert = MultiPoly::from_terms(
            k,
            (0..k).map(|j| {
                let mut e = vec![0; k];
                e[j] = 2;
                (e, 1.0)
            }),
        )?;
        VerticalSpec::new(UniPoly::identity(), fvert, a, TChoice::Fixed(1.0))
    }

    pub fn k(&self) -> usize {
        self.fvert.nvars()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionFailure {
    pub condition: u8,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub failures: Vec<ConditionFailure>,
    /// Levels `F0(t)` whose level sets were checked for non-singularity.
    pub checked_levels: Vec<f64>,
}

impl ValidationReport {
    pub fn first_failure(&self) -> Option<&ConditionFailure> {
        self.failures.first()
    }
}

/// Deterministic unit directions in `ℝᵏ`.
pub(crate) fn directions(k: usize, count: usize) -> Vec<Vec<f64>> {
    match k {
        1 => vec![vec![-1.0], vec![1.0]],
        2 => (0..count)
            .map(|i| {
                let t = std::f64::consts::TAU * (i as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_d1ec);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (0.1..=1.0).contains(&n) {
                    out.push(v.into_iter().map(|x| x / n).collect());
                }
            }
            out
        }
    }
}

/// Smallest `r > 0` with `fvert(r·u) = level` along the ray `u`, or `None`
/// if `fvert` stays below `level` out to a huge radius.
pub(crate) fn ray_level_radius(fvert: &MultiPoly, u: &[f64], level: f64) -> Option<f64> {
    let g = |r: f64| {
        let y: Vec<f64> = u.iter().map(|c| c * r).collect();
        fvert.eval_unchecked(&y) - level
    };
    if level <= 0.0 {
        return Some(0.0);
    }
    let mut hi = 1.0;
    let mut lo = 0.0;
    let mut steps = 0;
    while g(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 80 {
            return None;
        }
    }
    // tighten from below when the crossing is much closer than 1
    while hi > 1e-300 && lo == 0.0 && g(hi * 0.5) > 0.0 {
        hi *= 0.5;
    }
    if lo == 0.0 {
        lo = hi * 0.5;
        if g(lo) > 0.0 {
            lo = 0.0;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Radius `R` such that the level set `fvert = level` lies inside `[-R, R]^k`
/// (largest ray crossing over a direction sample).
pub(crate) fn fiber_radius(fvert: &MultiPoly, level: f64) -> Option<f64> {
    let k = fvert.nvars();
    let count = match k {
        1 => 2,
        2 => 256,
        _ => 512,
    };
    let mut best: f64 = 0.0;
    for u in directions(k, count) {
        best = best.max(ray_level_radius(fvert, &u, level)?);
    }
    Some(best)
}

/// Checks the hypotheses on a vertical spec. Failures are numbered (1)–(4)
/// after the condition they violate: the split form, the sign and
/// derivative of `F0` at zero, non-negativity of `Fvert` with zero set `{0}`,
/// and non-singular level sets `Fvert = F0(t)` for `t ∈ (0, a]`.
pub fn validate_vertical_spec(spec: &VerticalSpec, k: usize) -> ValidationReport {
    let mut failures = Vec::new();
    let a = spec.a;
    let f0 = &spec.f0;
    let fvert = &spec.fvert;

    // (1) split form F0(t) - Fvert(y) with Fvert in k variables
    if fvert.nvars() != k {
        fail(&mut failures, 1, format!("Fvert has {} variables, expected {k}", fvert.nvars()));
    }
    if f0.is_zero() {
        fail(&mut failures, 1, "F0 is the zero polynomial".into());
    }
    if fvert.is_zero() {
        fail(&mut failures, 1, "Fvert is the zero polynomial".into());
    }

    // (2) F0(0) = 0, F0'(0) ≠ 0, sign F0(t) = sign t
    let c0 = f0.coeffs().first().copied().unwrap_or(0.0);
    if c0 != 0.0 {
        fail(&mut failures, 2, format!("F0(0) = {c0}, expected 0"));
    }
    let d0 = f0.derivative().eval(0.0);
    let scale = f0.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
    if !(d0.abs() > 1e-12 * scale) {
        fail(&mut failures, 2, format!("F0'(0) = {d0}: derivative at zero vanishes"));
    }
    for i in 1..=64 {
        let t = a * i as f64 / 64.0;
        if !(f0.eval(t) > 0.0) || !(f0.eval(-t) < 0.0) {
            fail(&mut failures, 2, format!("F0 does not have the sign of t at t = ±{t}"));
            break;
        }
    }

    let structural_ok = failures.is_empty();
    let mut checked_levels = Vec::new();
    if fvert.nvars() == k && !fvert.is_zero() {
        // (3) Fvert ≥ 0 with zero set {0}
        let c = fvert.constant_term();
        if c != 0.0 {
            fail(&mut failures, 3, format!("Fvert(0) = {c}: zero set does not contain the origin"));
        }
        if let Some(t) = fvert.terms().iter().find(|t| t.exps.iter().any(|e| e % 2 == 1)) {
            fail(&mut failures, 3, format!("Fvert has a term with odd exponents {:?}; y ↦ -y symmetry not guaranteed", t.exps));
        }
        let top = (1..=64).map(|i| f0.eval(a * i as f64 / 64.0)).fold(0.0f64, f64::max);
        match fiber_radius(fvert, top.max(f64::MIN_POSITIVE)) {
            None => fail(&mut failures, 3, "Fvert does not grow: level sets are unbounded".into()),
            Some(r) => {
                if let Some(msg) = check_nonneg_grid(fvert, (r * BBOX_Y_MARGIN).max(1e-6)) {
                    fail(&mut failures, 3, msg);
                }
            }
        }

        // (4) non-singular level sets for t in a geometric ladder in (0, a]
        if structural_ok {
            for i in 0..8 {
                let t = a / 2f64.powi(i);
                let level = f0.eval(t);
                checked_levels.push(level);
                if let Some(msg) = check_level_set(fvert, level) {
                    fail(&mut failures, 4, format!("t = {t}: {msg}"));
                    break;
                }
            }
        }
    }

    failures.sort_by_key(|f| f.condition);
    ValidationReport {
        passed: failures.is_empty(),
        failures,
        checked_levels,
    }
}

fn fail(failures: &mut Vec<ConditionFailure>, condition: u8, message: String) {
    failures.push(ConditionFailure { condition, message });
}

fn check_nonneg_grid(fvert: &MultiPoly, r: f64) -> Option<String> {
    let k = fvert.nvars();
    let res = match k {
        1 => 2048,
        2 => 128,
        3 => 32,
        _ => 8,
    };
    let bbox = BBox::symmetric(k, r).ok()?;
    let axes = bbox.axes(res);
    let vals = fvert.eval_grid(&axes).ok()?;
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let neg_tol = 1e-12 * scale;
    let zero_tol = 1e-9 * scale;
    let h = 2.0 * r / res as f64;
    let dims = vec![res + 1; k];
    let mut idx = vec![0; k];
    for (flat, &v) in vals.iter().enumerate() {
        crate::region::unravel(flat, &dims, &mut idx);
        let y: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| axes[a][i]).collect();
        if v < -neg_tol {
            return Some(format!("Fvert({y:?}) = {v} < 0"));
        }
        let near_origin = y.iter().all(|c| c.abs() <= h * (1.0 + 1e-9));
        if near_origin || v > 1e-3 * scale {
            continue;
        }
        let is_local_min = (0..k).all(|a| {
            [-1isize, 1].iter().all(|&d| {
                let j = idx[a] as isize + d;
                if j < 0 || j as usize > res {
                    return true;
                }
                let mut n = idx.clone();
                n[a] = j as usize;
                vals[crate::region::ravel(&n, &dims)] >= v
            })
        });
        if !is_local_min {
            continue;
        }
        let (z, fz) = polish_minimum(fvert, &y);
        let away = z.iter().map(|c| c * c).sum::<f64>().sqrt() > h;
        if away && fz <= zero_tol {
            return Some(format!("Fvert vanishes near {z:?}, away from the origin"));
        }
    }
    None
}

/// Damped Newton descent from a grid minimum; returns the point reached and
/// the value there.
fn polish_minimum(f: &MultiPoly, start: &[f64]) -> (Vec<f64>, f64) {
    let k = f.nvars();
    let grad = f.gradient();
    let hess: Vec<Vec<MultiPoly>> = grad.iter().map(MultiPoly::gradient).collect();
    let mut y = start.to_vec();
    let mut fy = f.eval_unchecked(&y);
    for _ in 0..60 {
        let g = nalgebra::DVector::from_iterator(k, grad.iter().map(|d| d.eval_unchecked(&y)));
        if g.norm() == 0.0 {
            break;
        }
        let h = nalgebra::DMatrix::from_fn(k, k, |i, j| hess[i][j].eval_unchecked(&y));
        let step = match h.cholesky() {
            Some(c) => c.solve(&g),
            None => g.clone() * (1.0 / g.norm().max(1.0)),
        };
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand: Vec<f64> = y.iter().zip(step.iter()).map(|(a, s)| a - lambda * s).collect();
            let fc = f.eval_unchecked(&cand);
            if fc < fy {
                y = cand;
                fy = fc;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (y, fy)
}

fn check_level_set(fvert: &MultiPoly, level: f64) -> Option<String> {
    if !(level > 0.0) {
        return Some(format!("level {level} is not positive"));
    }
    let k = fvert.nvars();
    let grad = fvert.gradient();
    let count = if k == 2 { 90 } else { 200 };
    for u in directions(k, count) {
        let r = match ray_level_radius(fvert, &u, level) {
            Some(r) => r,
            None => return Some("level set is unbounded".into()),
        };
        let y: Vec<f64> = u.iter().map(|c| c * r).collect();
        let g = grad.iter().map(|d| d.eval_unchecked(&y).powi(2)).sum::<f64>().sqrt();
        if !(g > 1e-6 * level / r.max(f64::MIN_POSITIVE)) {
            return Some(format!("gradient {g:e} vanishes on the level set at {y:?}"));
        }
    }
    None
}

/// `T = 2 · max(∏ f_j) / a`, so that `max(∏ f_j / T) ≤ a / 2`. The maximum is
/// the grid maximum refined by local ascent, so the bound also holds on finer
/// grids.
pub fn choose_t(region: &Region, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("a must be positive, got {a}")));
    }
    let max = region.max_product();
    if !(max > 0.0) {
        return Err(Error::EmptyInterior(max));
    }
    Ok(T_SAFETY * max / a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstructionKind {
    Basic,
    Generalized,
}

/// The hypersurface `M = P⁻¹(0) ⊂ ℝⁿ × ℝᵏ`; the first `n` variables are
/// horizontal.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "HypersurfaceDoc", into = "HypersurfaceDoc")]
pub struct Hypersurface {
    kind: ConstructionKind,
    n: usize,
    k: usize,
    t: f64,
    a: f64,
    f0: UniPoly,
    fvert: MultiPoly,
    bbox_y: BBox,
    region: Region,
    poly: MultiPoly,
    product: MultiPoly,
    max_level: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct HypersurfaceDoc {
    kind: ConstructionKind,
    n: usize,
    k: usize,
    #[serde(rename = "T")]
    t: f64,
    a: f64,
    f0: UniPoly,
    fvert: MultiPoly,
    bbox_y: BBox,
    region: Region,
    poly: MultiPoly,
}

impl From<Hypersurface> for HypersurfaceDoc {
    fn from(h: Hypersurface) -> Self {
        HypersurfaceDoc {
            kind: h.kind,
            n: h.n,
            k: h.k,
            t: h.t,
            a: h.a,
            f0: h.f0,
            fvert: h.fvert,
            bbox_y: h.bbox_y,
            region: h.region,
            poly: h.poly,
        }
    }
}

impl TryFrom<HypersurfaceDoc> for Hypersurface {
    type Error = Error;
    fn try_from(d: HypersurfaceDoc) -> Result<Self> {
        let h = Hypersurface::assemble(d.region, d.f0, d.fvert, d.t, d.a, d.kind)?;
        if h.n != d.n || h.k != d.k {
            return Err(Error::InvalidArgument("n/k do not match the region and Fvert".into()));
        }
        if h.poly != d.poly {
            return Err(Error::InvalidArgument(
                "poly does not match the polynomial assembled from its parts".into(),
            ));
        }
        Ok(Hypersurface { bbox_y: d.bbox_y, ..h })
    }
}

impl Hypersurface {
    /// Assembles `P = F0(∏f / T) - Fvert(y)` without certifying the region
    /// or validating the vertical data.
    pub fn assemble(
        region: Region,
        f0: UniPoly,
        fvert: MultiPoly,
        t: f64,
        a: f64,
        kind: ConstructionKind,
    ) -> Result<Self> {
        let n = region.dim();
        let k = fvert.nvars();
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let product = region.product();
        let horizontal = compose_univariate(&f0, &product, t)?;
        let poly = &horizontal.embed(n + k, 0)? - &fvert.embed(n + k, n)?;

        let grid_vals = product.eval_grid(&region.bbox().axes(region.grid_res()))?;
        let max_level = grid_vals
            .iter()
            .filter(|&&g| g >= 0.0)
            .map(|&g| f0.eval(g / t))
            .fold(0.0f64, f64::max);
        let radius = match kind {
            ConstructionKind::Basic => {
                let gmax = grid_vals.iter().copied().fold(0.0f64, f64::max);
                gmax.sqrt() * BBOX_Y_MARGIN
            }
            ConstructionKind::Generalized => {
                fiber_radius(&fvert, max_level).ok_or_else(|| Error::InvalidVerticalSpec {
                    condition: 3,
                    message: "level sets of Fvert are unbounded".into(),
                })? * BBOX_Y_MARGIN
            }
        };
        let bbox_y = BBox::symmetric(k, radius.max(1e-6))?;
        Ok(Hypersurface {
            kind,
            n,
            k,
            t,
            a,
            f0,
            fvert,
            bbox_y,
            region,
            poly,
            product,
            max_level,
        })
    }

    pub fn kind(&self) -> ConstructionKind {
        self.kind
    }

    /// The defining polynomial `P` in `n + k` variables.
    pub fn poly(&self) -> &MultiPoly {
        &self.poly
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Dimension `m = n + k - 1` of the hypersurface.
    pub fn m(&self) -> usize {
        self.n + self.k - 1
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn f0(&self) -> &UniPoly {
        &self.f0
    }

    pub fn fvert(&self) -> &MultiPoly {
        &self.fvert
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    /// Boundary product `∏ f_j` in the horizontal variables.
    pub fn product(&self) -> &MultiPoly {
        &self.product
    }

    pub fn bbox_y(&self) -> &BBox {
        &self.bbox_y
    }

    /// `region.bbox × bbox_y`.
    pub fn bbox(&self) -> BBox {
        self.region.bbox().product(&self.bbox_y)
    }

    /// Largest fiber level `F0(∏f / T)` over the region grid.
    pub fn max_level(&self) -> f64 {
        self.max_level
    }

    /// Fiber level `F0(∏f(x) / T)` over the base point `x`.
    pub fn level_at(&self, x: &[f64]) -> Result<f64> {
        Ok(self.f0.eval(self.product.eval(x)? / self.t))
    }

    /// Every vertical exponent of `P` is even.
    pub fn is_y_symmetric(&self) -> bool {
        self.poly
            .terms()
            .iter()
            .all(|t| t.exps[self.n..].iter().all(|e| e % 2 == 0))
    }
}

fn require_certified(r: &Region) -> Result<()> {
    let cert = r.certify();
    if cert.passed {
        Ok(())
    } else {
        Err(Error::Uncertified(
            [&cert.intersection_nonneg, &cert.interior_positivity, &cert.exactly_one_negative]
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.detail.clone())
                .collect::<Vec<_>>()
                .join("; "),
        ))
    }
}

/// `P = ∏ f_j(x) - Σ_{j ≤ k} y_j²` over a certified region.
pub fn build_basic(r: &Region, k: usize) -> Result<Hypersurface> {
    require_certified(r)?;
    build_basic_unchecked(r, k)
}

/// [`build_basic`] without certifying the region. Used to construct
/// negative controls from regions that violate the sign conventions.
pub fn build_basic_unchecked(r: &Region, k: usize) -> Result<Hypersurface> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let spec = VerticalSpec::round(k, 1.0)?;
    Hypersurface::assemble(r.clone(), spec.f0, spec.fvert, 1.0, spec.a, ConstructionKind::Basic)
}

/// `P = F0(∏ f_j(x) / T) - Fvert(y)` over a certified region with a
/// validated vertical spec. `T = Auto` resolves through [`choose_t`].
pub fn build_generalized(r: &Region, spec: &VerticalSpec) -> Result<Hypersurface> {
    require_certified(r)?;
    let report = validate_vertical_spec(spec, spec.k());
    if let Some(f) = report.first_failure() {
        return Err(Error::InvalidVerticalSpec {
            condition: f.condition,
            message: f.message.clone(),
        });
    }
    let t = match spec.t {
        TChoice::Fixed(t) => t,
        TChoice::Auto => choose_t(r, spec.a)?,
    };
    Hypersurface::assemble(
        r.clone(),
        spec.f0.clone(),
        spec.fvert.clone(),
        t,
        spec.a,
        ConstructionKind::Generalized,
    )
}

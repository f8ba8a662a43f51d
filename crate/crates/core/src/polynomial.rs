//! Sparse multivariate polynomials with `f64` coefficients.
//!
//! [`MultiPoly`] keeps its terms in graded lexicographic order (ascending
//! total degree, then descending exponent vectors), so two polynomials built
//! through different routes serialize identically once they agree
//! coefficient-for-coefficient.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped after arithmetic.
pub const COEFF_EPS: f64 = 1e-14;

/// Exponent vector with the graded lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: f64,
    pub exps: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct PolyDoc {
    nvars: usize,
    terms: Vec<Term>,
}

/// A sparse polynomial in `nvars` real variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyDoc", into = "PolyDoc")]
pub struct MultiPoly {
    nvars: usize,
    terms: Vec<Term>,
}

impl TryFrom<PolyDoc> for MultiPoly {
    type Error = Error;

    fn try_from(doc: PolyDoc) -> Result<Self> {
        MultiPoly::from_terms(
            doc.nvars,
            doc.terms.into_iter().map(|t| (t.exps, t.coeff)),
        )
    }
}

impl From<MultiPoly> for PolyDoc {
    fn from(p: MultiPoly) -> Self {
        PolyDoc {
            nvars: p.nvars,
            terms: p.terms,
        }
    }
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::from_map(nvars, BTreeMap::from([(Monomial(vec![0; nvars]), c)]))
    }

    /// The coordinate function `x_var`.
    pub fn var(nvars: usize, var: usize) -> Result<Self> {
        if var >= nvars {
            return Err(Error::VarOutOfRange { var, nvars });
        }
        let mut e = vec![0; nvars];
        e[var] = 1;
        Ok(Self::from_map(nvars, BTreeMap::from([(Monomial(e), 1.0)])))
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, combining
    /// repeated monomials.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut map = BTreeMap::new();
        for (exps, coeff) in terms {
            if exps.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: exps.len(),
                });
            }
            if !coeff.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient {coeff}"
                )));
            }
            *map.entry(Monomial(exps)).or_insert(0.0) += coeff;
        }
        Ok(Self::from_map(nvars, map))
    }

    fn from_map(nvars: usize, map: BTreeMap<Monomial, f64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.abs() >= COEFF_EPS)
            .map(|(m, coeff)| Term { coeff, exps: m.0 })
            .collect();
        MultiPoly { nvars, terms }
    }

    fn to_map(&self) -> BTreeMap<Monomial, f64> {
        self.terms
            .iter()
            .map(|t| (Monomial(t.exps.clone()), t.coeff))
            .collect()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exps.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Coefficient of the monomial with the given exponents (zero if absent).
    pub fn coeff(&self, exps: &[u32]) -> f64 {
        self.terms
            .iter()
            .find(|t| t.exps == exps)
            .map_or(0.0, |t| t.coeff)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&vec![0; self.nvars])
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    /// Evaluation without the length check. Terms are summed in canonical
    /// order with Neumaier compensation.
    pub fn eval_unchecked(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.nvars);
        let mut sum = 0.0;
        let mut comp = 0.0;
        for t in &self.terms {
            let mut v = t.coeff;
            for (x, &e) in point.iter().zip(&t.exps) {
                if e != 0 {
                    v *= x.powi(e as i32);
                }
            }
            let s = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - s) + v;
            } else {
                comp += (v - s) + sum;
            }
            sum = s;
        }
        sum + comp
    }

    /// Evaluates on the tensor grid `axes[0] × axes[1] × …`, row-major with
    /// the last axis varying fastest.
    pub fn eval_grid(&self, axes: &[Vec<f64>]) -> Result<Vec<f64>> {
        if axes.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: axes.len(),
            });
        }
        let max_exp: Vec<u32> = (0..self.nvars)
            .map(|v| self.terms.iter().map(|t| t.exps[v]).max().unwrap_or(0))
            .collect();
        // powers[v][i * (max+1) + e] = axes[v][i]^e
        let powers: Vec<Vec<f64>> = axes
            .iter()
            .zip(&max_exp)
            .map(|(ax, &m)| {
                let stride = m as usize + 1;
                let mut out = vec![1.0; ax.len() * stride];
                for (i, &x) in ax.iter().enumerate() {
                    for e in 1..stride {
                        out[i * stride + e] = out[i * stride + e - 1] * x;
                    }
                }
                out
            })
            .collect();
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total: usize = dims.iter().product();
        let mut out = vec![0.0; total];
        let mut idx = vec![0usize; self.nvars];
        for slot in out.iter_mut() {
            let mut sum = 0.0;
            for t in &self.terms {
                let mut v = t.coeff;
                for (var, &e) in t.exps.iter().enumerate() {
                    if e != 0 {
                        let stride = max_exp[var] as usize + 1;
                        v *= powers[var][idx[var] * stride + e as usize];
                    }
                }
                sum += v;
            }
            *slot = sum;
            for var in (0..self.nvars).rev() {
                idx[var] += 1;
                if idx[var] < dims[var] {
                    break;
                }
                idx[var] = 0;
            }
        }
        Ok(out)
    }

    pub fn partial_derivative(&self, var: usize) -> Result<MultiPoly> {
        if var >= self.nvars {
            return Err(Error::VarOutOfRange {
                var,
                nvars: self.nvars,
            });
        }
        let terms = self.terms.iter().filter(|t| t.exps[var] > 0).map(|t| {
            let mut e = t.exps.clone();
            let c = t.coeff * f64::from(e[var]);
            e[var] -= 1;
            (e, c)
        });
        MultiPoly::from_terms(self.nvars, terms)
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars)
            .map(|v| self.partial_derivative(v).expect("index in range"))
            .collect()
    }

    pub fn scale(&self, s: f64) -> MultiPoly {
        let map = self
            .terms
            .iter()
            .map(|t| (Monomial(t.exps.clone()), t.coeff * s))
            .collect();
        Self::from_map(self.nvars, map)
    }

    pub fn try_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_same(other)?;
        let mut map = self.to_map();
        for t in &other.terms {
            *map.entry(Monomial(t.exps.clone())).or_insert(0.0) += t.coeff;
        }
        Ok(Self::from_map(self.nvars, map))
    }

    pub fn try_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.try_add(&other.scale(-1.0))
    }

    pub fn try_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_same(other)?;
        let mut map: BTreeMap<Monomial, f64> = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let e: Vec<u32> = a.exps.iter().zip(&b.exps).map(|(x, y)| x + y).collect();
                *map.entry(Monomial(e)).or_insert(0.0) += a.coeff * b.coeff;
            }
        }
        Ok(Self::from_map(self.nvars, map))
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.nvars, 1.0);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    fn check_same(&self, other: &MultiPoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: other.nvars,
            });
        }
        Ok(())
    }

    /// Re-expresses the polynomial in `total` variables, mapping variable `i`
    /// to variable `offset + i`.
    pub fn embed(&self, total: usize, offset: usize) -> Result<MultiPoly> {
        if offset + self.nvars > total {
            return Err(Error::InvalidArgument(format!(
                "cannot embed {} variables at offset {offset} into {total}",
                self.nvars
            )));
        }
        let terms = self.terms.iter().map(|t| {
            let mut e = vec![0; total];
            e[offset..offset + self.nvars].copy_from_slice(&t.exps);
            (e, t.coeff)
        });
        MultiPoly::from_terms(total, terms)
    }

    /// Substitutes `x_i = Σ_j rows[i][j] · z_j`.
    pub fn substitute_linear(&self, rows: &[Vec<f64>]) -> Result<MultiPoly> {
        if rows.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: rows.len(),
            });
        }
        let new_n = rows.first().map_or(0, Vec::len);
        let forms: Vec<MultiPoly> = rows
            .iter()
            .map(|row| {
                MultiPoly::from_terms(
                    new_n,
                    row.iter().enumerate().map(|(j, &a)| {
                        let mut e = vec![0; new_n];
                        e[j] = 1;
                        (e, a)
                    }),
                )
            })
            .collect::<Result<_>>()?;
        let mut cache: Vec<Vec<MultiPoly>> = forms
            .iter()
            .map(|_| vec![MultiPoly::constant(new_n, 1.0)])
            .collect();
        let mut acc = MultiPoly::zero(new_n);
        for t in &self.terms {
            let mut term = MultiPoly::constant(new_n, t.coeff);
            for (var, &e) in t.exps.iter().enumerate() {
                while cache[var].len() <= e as usize {
                    let next = cache[var].last().expect("non-empty") * &forms[var];
                    cache[var].push(next);
                }
                term = &term * &cache[var][e as usize];
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    /// Text form: one term per line, `coeff e1 e2 … ek`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("{:?}", t.coeff));
            for e in &t.exps {
                out.push_str(&format!(" {e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text form. `nvars` is required for the zero polynomial and
    /// checked against every line when given.
    pub fn from_text(text: &str, nvars: Option<usize>) -> Result<MultiPoly> {
        let mut terms = Vec::new();
        let mut n = nvars;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let coeff: f64 = fields
                .next()
                .ok_or_else(|| parse_err("missing coefficient".into()))?
                .parse()
                .map_err(|e| parse_err(format!("bad coefficient: {e}")))?;
            let exps = fields
                .map(|f| f.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(format!("bad exponent: {e}")))?;
            match n {
                Some(k) if k != exps.len() => {
                    return Err(parse_err(format!(
                        "expected {k} exponents, found {}",
                        exps.len()
                    )))
                }
                None => n = Some(exps.len()),
                _ => {}
            }
            terms.push((exps, coeff));
        }
        let n = n.ok_or_else(|| Error::Parse {
            line: 0,
            message: "empty text and no variable count given".into(),
        })?;
        MultiPoly::from_terms(n, terms)
    }
}

/// Product of a non-empty list of polynomials over the same variables.
pub fn product_of(ps: &[MultiPoly]) -> Result<MultiPoly> {
    let (first, rest) = ps.split_first().ok_or(Error::EmptyProduct)?;
    rest.iter().try_fold(first.clone(), |acc, p| acc.try_mul(p))
}

/// Expands `outer(inner / scale)` as a polynomial in `inner`'s variables.
pub fn compose_univariate(outer: &UniPoly, inner: &MultiPoly, scale: f64) -> Result<MultiPoly> {
    if !(scale > 0.0) {
        return Err(Error::NonPositiveScale(scale));
    }
    let n = inner.nvars();
    let arg = inner.scale(1.0 / scale);
    let mut acc = MultiPoly::zero(n);
    for &c in outer.coeffs().iter().rev() {
        acc = &(&acc * &arg) + &MultiPoly::constant(n, c);
    }
    Ok(acc)
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_add(rhs).expect("nvars mismatch in polynomial addition")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_sub(rhs).expect("nvars mismatch in polynomial subtraction")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.try_mul(rhs).expect("nvars mismatch in polynomial product")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let sign = if t.coeff < 0.0 { "-" } else { "+" };
            if i == 0 {
                if t.coeff < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{}", t.coeff.abs())?;
            for (v, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{v}")?,
                    _ => write!(f, "*x{v}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

/// Univariate polynomial, coefficients indexed by degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UniDoc", into = "UniDoc")]
pub struct UniPoly {
    coeffs: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct UniDoc {
    coeffs: Vec<f64>,
}

impl TryFrom<UniDoc> for UniPoly {
    type Error = Error;
    fn try_from(doc: UniDoc) -> Result<Self> {
        if doc.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(UniPoly::new(doc.coeffs))
    }
}

impl From<UniPoly> for UniDoc {
    fn from(p: UniPoly) -> Self {
        UniDoc { coeffs: p.coeffs }
    }
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last().is_some_and(|&c| c == 0.0) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    /// The identity polynomial `t`.
    pub fn identity() -> Self {
        UniPoly::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> UniPoly {
        UniPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }
}

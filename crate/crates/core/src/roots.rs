//! Real root isolation for univariate functions by sign-change bracketing.
//!
//! A plain sign-change scan misses pairs of roots that fall inside one grid
//! cell. When the derivative changes sign inside a cell without `f` doing so,
//! the extremum is located first and both halves are bracketed from it.

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of `f` in `[lo, hi]`, sorted, found on a `samples`-cell grid and
/// refined by bisection to width `tol`. `df` is the derivative of `f`.
pub fn isolate_roots<F, D>(f: F, df: D, lo: f64, hi: f64, samples: usize, tol: f64) -> Vec<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let n = samples.max(1);
    let h = (hi - lo) / n as f64;
    let ts: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo + h * i as f64 })
        .collect();
    let fs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let ds: Vec<f64> = ts.iter().map(|&t| df(t)).collect();
    let mut roots = Vec::new();
    for i in 0..n {
        let (a, b) = (ts[i], ts[i + 1]);
        let (fa, fb) = (fs[i], fs[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fb == 0.0 {
            continue;
        }
        if (fa < 0.0) != (fb < 0.0) {
            roots.push(bisect(&f, a, b, tol));
            continue;
        }
        if (ds[i] < 0.0) != (ds[i + 1] < 0.0) && ds[i] != 0.0 && ds[i + 1] != 0.0 {
            let tc = bisect(&df, a, b, tol * 1e-3);
            let fc = f(tc);
            if fc == 0.0 {
                roots.push(tc);
            } else if (fc < 0.0) != (fa < 0.0) {
                roots.push(bisect(&f, a, tc, tol));
                roots.push(bisect(&f, tc, b, tol));
            }
        }
    }
    if fs[n] == 0.0 {
        roots.push(hi);
    }
    roots.sort_by(f64::total_cmp);
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_roots() {
        let r = isolate_roots(|t| t * t - 1.0, |t| 2.0 * t, -2.0, 2.0, 64, 1e-13);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn close_pair_inside_one_cell() {
        // roots at 0.3 ± 1e-5, far below the grid spacing
        let f = |t: f64| (t - 0.3).powi(2) - 1e-10;
        let df = |t: f64| 2.0 * (t - 0.3);
        let r = isolate_roots(f, df, -1.0, 1.0, 16, 1e-14);
        assert_eq!(r.len(), 2);
        assert!((r[0] - (0.3 - 1e-5)).abs() < 1e-11);
        assert!((r[1] - (0.3 + 1e-5)).abs() < 1e-11);
    }

    #[test]
    fn grid_hits() {
        let r = isolate_roots(|t| t, |_| 1.0, -1.0, 1.0, 2, 1e-12);
        assert_eq!(r, vec![0.0]);
        assert!(isolate_roots(|t| t * t + 1.0, |t| 2.0 * t, -1.0, 1.0, 8, 1e-12).is_empty());
    }
}

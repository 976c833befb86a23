//! Root bracketing, adaptive quadrature and empirical percentiles.

use crate::error::{Error, Result};

/// Bisection for the root of an increasing function on `[lo, hi]`.
///
/// Requires `f(lo) <= 0 <= f(hi)`. Stops once the bracket is narrower than
/// `tol`.
pub fn bisect_increasing<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (flo, fhi) = (f(lo), f(hi));
    if flo.is_nan() || fhi.is_nan() || flo > 0.0 || fhi < 0.0 {
        return Err(Error::Bracketing(format!(
            "no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"
        )));
    }
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::Numeric(format!("objective is NaN at {mid}")));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature with Richardson correction.
///
/// Fails with [`Error::Integration`] if more than `max_evals` integrand
/// evaluations are needed or a panel bottoms out at the depth limit without
/// meeting its share of the tolerance.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64, max_evals: usize) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if !(abs_tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {abs_tol}")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut state = SimpsonState {
        evals: 3,
        max_evals,
        converged: true,
        error: 0.0,
    };
    let value = simpson_step(&f, a, b, fa, fm, fb, whole, abs_tol, SIMPSON_MAX_DEPTH, &mut state);
    if !state.converged || state.evals > max_evals || !value.is_finite() {
        return Err(Error::Integration {
            tolerance: abs_tol,
            evaluations: state.evals,
        });
    }
    Ok(Quadrature {
        value,
        error_estimate: state.error,
        evaluations: state.evals,
    })
}

struct SimpsonState {
    evals: usize,
    max_evals: usize,
    converged: bool,
    error: f64,
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    st: &mut SimpsonState,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    st.evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        st.error += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    if depth == 0 || st.evals > st.max_evals {
        st.converged = false;
        st.error += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, st)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, st)
}

/// Percentile of already-sorted data by linear interpolation between
/// adjacent order statistics, at position `(N - 1) p`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let i = h.floor() as usize;
    if i + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

pub fn sort_floats(values: &mut [f64]) {
    values.sort_unstable_by(|a, b| a.total_cmp(b));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect_increasing(|x| x * x - 2.0, 0.0, 2.0, 1e-12, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn bisection_requires_bracket() {
        let r = bisect_increasing(|x| x - 5.0, 0.0, 2.0, 1e-12, 200);
        assert!(matches!(r, Err(Error::Bracketing(_))));
    }

    #[test]
    fn simpson_polynomial_and_exp() {
        let q = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-10, 10_000).unwrap();
        assert!((q.value - 4.0).abs() < 1e-12);
        let q = adaptive_simpson(f64::exp, 0.0, 1.0, 1e-10, 100_000).unwrap();
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn simpson_evaluation_cap() {
        let r = adaptive_simpson(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-12, 50);
        assert!(matches!(r, Err(Error::Integration { .. })));
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile_sorted(&v, 0.0), 1.0);
        assert_eq!(percentile_sorted(&v, 1.0), 5.0);
        assert_eq!(percentile_sorted(&v, 0.5), 3.0);
        assert!((percentile_sorted(&v, 0.1) - 1.4).abs() < 1e-15);
        assert!((percentile_sorted(&[1.0, 2.0], 0.5) - 1.5).abs() < 1e-15);
    }
}

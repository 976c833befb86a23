//! Confidence intervals and tests for the Weibull shape parameter.
//!
//! Two methods are provided. The exact method inverts `U = 2 beta S`, which
//! is chi-square with `2n` degrees of freedom. The Wu–Tseng method inverts
//! the scale-free statistic
//!
//! ```text
//! W(beta) = sum r_i^beta / ((n + 1) * (prod r_i)^(beta / (n + 1)))
//! ```
//!
//! against Monte Carlo percentiles of its parameter-free reference
//! distribution `W*`, built from unit-exponential records.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{unit_exponential, DistSpec};
use crate::error::{check_level, check_positive, Error, Result};
use crate::interval::{ConfidenceInterval, Hypotheses, IntervalMethod, TestResult};
use crate::numeric::{bisect_increasing, percentile_sorted, sort_floats};
use crate::par::map_indexed;
use crate::records::RecordSample;
use crate::rng::RngStream;

pub const DEFAULT_WSTAR_REPS: usize = 100_000;
pub const WSTAR_TABLE_VERSION: u32 = 1;

/// Probabilities tabulated by default: the usual two-sided tails plus the
/// median.
pub const DEFAULT_WSTAR_PROBS: [f64; 11] = [
    0.005, 0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99, 0.995,
];

const ROOT_BETA_MIN: f64 = 1e-6;
const ROOT_BETA_CAP: f64 = 1e3;
const ROOT_TOL: f64 = 1e-8;
const PROB_MATCH_TOL: f64 = 1e-9;

/// Exact interval `(chi2_{2n, g/2} / 2S, chi2_{2n, 1-g/2} / 2S)`, `g = 1 - level`.
pub fn exact_ci_shape(sample: &RecordSample, level: f64) -> Result<ConfidenceInterval> {
    check_level(level)?;
    let gamma = 1.0 - level;
    let chi = DistSpec::chi_square(2 * sample.n() as u32)?;
    let two_s = 2.0 * sample.log_ratio_sum();
    ConfidenceInterval::new(
        chi.quantile(gamma / 2.0)? / two_s,
        chi.quantile(1.0 - gamma / 2.0)? / two_s,
        level,
        IntervalMethod::ExactChiSquare,
    )
}

/// Exact test on beta with statistic `U0 = 2 beta0 S`; `significance` is the
/// nominal test size.
pub fn exact_test_shape(
    sample: &RecordSample,
    beta0: f64,
    significance: f64,
    kind: Hypotheses,
) -> Result<TestResult> {
    check_positive("beta0", beta0)?;
    check_level(significance)?;
    let chi = DistSpec::chi_square(2 * sample.n() as u32)?;
    let u0 = 2.0 * beta0 * sample.log_ratio_sum();
    let lower_tail = chi.cdf(u0)?;
    let upper_tail = chi.sf(u0)?;
    let (reject, p) = match kind {
        Hypotheses::OneSidedUpper => (u0 > chi.quantile(1.0 - significance)?, upper_tail),
        Hypotheses::TwoSided => {
            let lo = chi.quantile(significance / 2.0)?;
            let hi = chi.quantile(1.0 - significance / 2.0)?;
            (u0 < lo || u0 > hi, (2.0 * lower_tail.min(upper_tail)).min(1.0))
        }
    };
    Ok(TestResult {
        statistic: u0,
        p_value: Some(p),
        reject,
        level: significance,
        hypotheses: kind,
    })
}

/// Natural log of `W(beta)`, evaluated as a centered log-sum-exp.
pub fn ln_w_statistic(sample: &RecordSample, beta: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    let k = (sample.n() + 1) as f64;
    let mean_log = sample.stats().log_sum / k;
    let terms: Vec<f64> = sample
        .values()
        .iter()
        .map(|r| beta * (r.ln() - mean_log))
        .collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln();
    let ln_w = lse - k.ln();
    if ln_w.is_finite() {
        Ok(ln_w.max(0.0))
    } else {
        Err(Error::Numeric(format!("W({beta}) is not finite")))
    }
}

pub fn w_statistic(sample: &RecordSample, beta: f64) -> Result<f64> {
    let w = ln_w_statistic(sample, beta)?.exp();
    if w.is_finite() {
        Ok(w)
    } else {
        Err(Error::Numeric(format!("W({beta}) overflows")))
    }
}

/// Monte Carlo percentiles of `W*` for samples of `n + 1` records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WStarTable {
    pub version: u32,
    pub n: usize,
    pub probs: Vec<f64>,
    pub values: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

/// One draw of `W*` from unit-exponential records.
fn wstar_draw(n: usize, rng: &mut RngStream) -> f64 {
    let k = (n + 1) as f64;
    let mut t = 0.0;
    let mut sum = 0.0;
    let mut log_sum = 0.0;
    for _ in 0..=n {
        t += unit_exponential(rng);
        sum += t;
        log_sum += t.ln();
    }
    let ln_w = (sum / k).ln() - log_sum / k;
    ln_w.max(0.0).exp()
}

/// Simulated `W*` values for replications `0..reps`, in replication order.
pub fn wstar_draws(n: usize, reps: usize, seed: u64) -> Vec<f64> {
    map_indexed(reps as u64, |r| wstar_draw(n, &mut RngStream::new(seed, r)))
}

pub fn wstar_table(n: usize, probs: &[f64], reps: usize, seed: u64) -> Result<WStarTable> {
    if n == 0 {
        return Err(Error::InsufficientRecords { found: 1 });
    }
    if reps < 2 {
        return Err(Error::Config(format!("W* table needs at least 2 replications, got {reps}")));
    }
    let mut probs = probs.to_vec();
    if probs.is_empty() || probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::Domain("W* probabilities must lie in (0, 1)".into()));
    }
    sort_floats(&mut probs);
    probs.dedup();
    let mut draws = wstar_draws(n, reps, seed);
    sort_floats(&mut draws);
    let values = probs.iter().map(|&p| percentile_sorted(&draws, p)).collect();
    let table = WStarTable {
        version: WSTAR_TABLE_VERSION,
        n,
        probs,
        values,
        reps,
        seed,
    };
    table.validate()?;
    Ok(table)
}

impl WStarTable {
    /// Table for the default probabilities and the tails of each `level`.
    pub fn for_levels(n: usize, levels: &[f64], reps: usize, seed: u64) -> Result<Self> {
        let mut probs = DEFAULT_WSTAR_PROBS.to_vec();
        for &l in levels {
            check_level(l)?;
            let g = 1.0 - l;
            probs.extend([g / 2.0, 1.0 - g / 2.0]);
        }
        sort_floats(&mut probs);
        probs.dedup_by(|a, b| (*a - *b).abs() < PROB_MATCH_TOL);
        wstar_table(n, &probs, reps, seed)
    }

    pub fn percentile(&self, p: f64) -> Option<f64> {
        self.probs
            .iter()
            .position(|q| (q - p).abs() < PROB_MATCH_TOL)
            .map(|i| self.values[i])
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != WSTAR_TABLE_VERSION {
            return Err(Error::Config(format!("unsupported W* table version {}", self.version)));
        }
        if self.probs.len() != self.values.len() || self.probs.is_empty() {
            return Err(Error::Config("W* table probs/values length mismatch".into()));
        }
        if self.values.iter().any(|v| !(*v >= 1.0) || !v.is_finite()) {
            return Err(Error::Config("W* percentiles must be finite and >= 1".into()));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.probs) || !increasing(&self.values) {
            return Err(Error::Config("W* table must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: WStarTable =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("W* table JSON: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}

/// Solve `W(beta) = target` by bisection on `log beta`.
///
/// The bracket starts at `[1e-6, 1]` and the upper end doubles until the
/// sign changes or it passes `1e3`.
pub fn solve_w_equation(sample: &RecordSample, target: f64) -> Result<f64> {
    if !(target > 1.0) {
        return Err(Error::Bracketing(format!("W target {target} must exceed 1")));
    }
    let ln_target = target.ln();
    let g = |u: f64| ln_w_statistic(sample, u.exp()).map_or(f64::NAN, |lw| lw - ln_target);
    let lo = ROOT_BETA_MIN.ln();
    if g(lo) > 0.0 {
        return Err(Error::Bracketing(format!("W({ROOT_BETA_MIN}) already exceeds {target}")));
    }
    let mut hi = 1.0_f64;
    while !(g(hi.ln()) >= 0.0) {
        hi *= 2.0;
        if hi > ROOT_BETA_CAP {
            return Err(Error::Bracketing(format!(
                "W(beta) stays below {target} up to beta = {ROOT_BETA_CAP}"
            )));
        }
    }
    // Bisect in log space; a log-width of ROOT_TOL / hi bounds the beta error by ROOT_TOL.
    let u = bisect_increasing(g, lo, hi.ln(), ROOT_TOL / hi * 1e-2, 400)?;
    Ok(u.exp())
}

pub fn wu_ci_shape(sample: &RecordSample, level: f64, table: &WStarTable) -> Result<ConfidenceInterval> {
    check_level(level)?;
    if table.n != sample.n() {
        return Err(Error::Domain(format!(
            "W* table built for n = {}, sample has n = {}",
            table.n,
            sample.n()
        )));
    }
    let gamma = 1.0 - level;
    let missing = |p: f64| Error::Domain(format!("W* table has no percentile at {p}"));
    let w_lo = table.percentile(gamma / 2.0).ok_or_else(|| missing(gamma / 2.0))?;
    let w_hi = table.percentile(1.0 - gamma / 2.0).ok_or_else(|| missing(1.0 - gamma / 2.0))?;
    ConfidenceInterval::new(
        solve_w_equation(sample, w_lo)?,
        solve_w_equation(sample, w_hi)?,
        level,
        IntervalMethod::WuTseng,
    )
}

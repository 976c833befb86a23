//! Generalized inference for the Weibull scale parameter with the shape
//! unknown.
//!
//! The generalized pivotal is
//!
//! ```text
//! T = r_n * (2 / V)^(2 C / U),    C = sum log(r_n / r_i)
//! ```
//!
//! with independent `U ~ chi2(2n)` and `V ~ chi2(2n + 2)`. Its observed
//! value is alpha, and for fixed data its distribution is free of both
//! parameters, so Monte Carlo percentiles of `T` give a confidence interval
//! and tail frequencies give generalized p-values.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dist::DistSpec;
use crate::error::{check_level, check_positive, Error, Result};
use crate::interval::{ConfidenceInterval, Hypotheses, IntervalMethod};
use crate::numeric::{percentile_sorted, sort_floats};
use crate::par::map_indexed;
use crate::records::{simulate_records_direct, RecordSample};
use crate::rng::RngStream;

pub const DEFAULT_M: usize = 10_000;
pub const MIN_M: usize = 1_000;
/// Draws per substream block; fixes how draws map onto substreams.
pub const DRAW_BLOCK: usize = 1_024;
/// Ceiling on `reps * M` for size/power simulations.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// One realization of `T` for given `(U, V)`, saturated to the positive
/// finite range when a tiny `U` drives the exponent out of range.
pub fn pivotal_t_value(r_n: f64, c_r: f64, u: f64, v: f64) -> f64 {
    (r_n * ((2.0 / v).ln() * (2.0 * c_r / u)).exp()).clamp(f64::MIN_POSITIVE, f64::MAX)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotalDrawSet {
    pub draws: Vec<f64>,
    pub seed: u64,
    pub stream_index: u64,
    pub sample_digest: String,
}

impl PivotalDrawSet {
    pub fn m(&self) -> usize {
        self.draws.len()
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.draws.clone();
        sort_floats(&mut v);
        v
    }

    /// One draw per line, no header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for d in &self.draws {
            writeln!(out, "{d}")?;
        }
        Ok(())
    }
}

/// SHA-256 of the record values (little-endian f64 bytes), hex encoded.
pub fn sample_digest(sample: &RecordSample) -> String {
    let mut h = Sha256::new();
    for v in sample.values() {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Draw `m` realizations of `T` for the observed sample.
///
/// Draw `l` belongs to block `l / DRAW_BLOCK`, which uses
/// `rng.substream(block)`; the result is identical for any thread count.
pub fn draw_pivotal_t(sample: &RecordSample, m: usize, rng: &RngStream) -> Result<PivotalDrawSet> {
    let draws = draw_pivotal_values(sample.n(), sample.last(), sample.log_ratio_sum(), m, rng)?;
    Ok(PivotalDrawSet {
        draws,
        seed: rng.master_seed(),
        stream_index: rng.stream_index(),
        sample_digest: sample_digest(sample),
    })
}

/// Draws of `T` from the statistics `(n, r_n, C)` alone.
pub fn draw_pivotal_values(n: usize, r_n: f64, c_r: f64, m: usize, rng: &RngStream) -> Result<Vec<f64>> {
    if m < MIN_M {
        return Err(Error::Domain(format!("need at least {MIN_M} pivotal draws, got {m}")));
    }
    let u_dist = DistSpec::chi_square(2 * n as u32)?.sampler()?;
    let v_dist = DistSpec::chi_square(2 * n as u32 + 2)?.sampler()?;
    let blocks = m.div_ceil(DRAW_BLOCK);
    let chunks = map_indexed(blocks as u64, |b| {
        let mut s = rng.substream(b);
        let len = DRAW_BLOCK.min(m - b as usize * DRAW_BLOCK);
        (0..len)
            .map(|_| {
                let u = u_dist.sample(&mut s);
                let v = v_dist.sample(&mut s);
                pivotal_t_value(r_n, c_r, u, v)
            })
            .collect::<Vec<f64>>()
    });
    let draws: Vec<f64> = chunks.into_iter().flatten().collect();
    if let Some(bad) = draws.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::Numeric(format!("pivotal draw {bad} is not a positive finite value")));
    }
    Ok(draws)
}

/// Central generalized interval from the empirical `g/2` and `1 - g/2`
/// percentiles of the draws.
pub fn generalized_ci_scale(draws: &PivotalDrawSet, level: f64) -> Result<ConfidenceInterval> {
    check_level(level)?;
    ci_from_sorted(&draws.sorted(), level)
}

pub(crate) fn ci_from_sorted(sorted: &[f64], level: f64) -> Result<ConfidenceInterval> {
    let tail = (1.0 - level) / 2.0;
    if (sorted.len() as f64) * tail < 1.0 {
        return Err(Error::Resolution(format!(
            "{} draws cannot resolve the {tail} tail",
            sorted.len()
        )));
    }
    ConfidenceInterval::new(
        percentile_sorted(sorted, tail),
        percentile_sorted(sorted, 1.0 - tail),
        level,
        IntervalMethod::GeneralizedPivotal,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpvResult {
    pub p_value: f64,
    pub alpha0: f64,
    pub hypotheses: Hypotheses,
    pub m: usize,
    pub mc_se: f64,
}

/// Generalized p-value for `alpha0`. One-sided: fraction of draws below
/// `alpha0`. Two-sided: twice the smaller tail fraction, clipped at 1.
pub fn gpv_scale(draws: &PivotalDrawSet, alpha0: f64, kind: Hypotheses) -> Result<GpvResult> {
    gpv_from_draws(&draws.draws, alpha0, kind)
}

pub(crate) fn gpv_from_draws(draws: &[f64], alpha0: f64, kind: Hypotheses) -> Result<GpvResult> {
    check_positive("alpha0", alpha0)?;
    let m = draws.len();
    let below = draws.iter().filter(|&&t| t < alpha0).count() as f64 / m as f64;
    let above = draws.iter().filter(|&&t| t > alpha0).count() as f64 / m as f64;
    let p_value = match kind {
        Hypotheses::OneSidedUpper => below,
        Hypotheses::TwoSided => (2.0 * below.min(above)).min(1.0),
    };
    Ok(GpvResult {
        p_value,
        alpha0,
        hypotheses: kind,
        m,
        mc_se: (p_value * (1.0 - p_value) / m as f64).sqrt(),
    })
}

/// Draw sets keyed by `(sample digest, M, seed, stream)`, so intervals and
/// p-values at several `alpha0` share one set of draws.
#[derive(Debug, Default)]
pub struct DrawSetCache {
    sets: HashMap<(String, usize, u64, u64), Arc<PivotalDrawSet>>,
}

impl DrawSetCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_draw(&mut self, sample: &RecordSample, m: usize, rng: &RngStream) -> Result<Arc<PivotalDrawSet>> {
        let key = (sample_digest(sample), m, rng.master_seed(), rng.stream_index());
        if let Some(set) = self.sets.get(&key) {
            return Ok(Arc::clone(set));
        }
        let set = Arc::new(draw_pivotal_t(sample, m, rng)?);
        self.sets.insert(key, Arc::clone(&set));
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Empirical rejection rate of the generalized test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub alpha: f64,
    pub alpha0: f64,
    pub beta: f64,
    pub n: usize,
    pub significance: f64,
    pub hypotheses: Hypotheses,
    pub rate: f64,
    pub rate_se: f64,
    pub reps: usize,
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpvStudy {
    pub alpha: f64,
    pub alpha0: f64,
    pub beta: f64,
    pub n: usize,
    pub significance: f64,
    pub hypotheses: Hypotheses,
    pub reps: usize,
    pub m: usize,
    pub budget: u64,
}

/// Size (at `alpha = alpha0`) or power of the generalized test over `reps`
/// simulated record samples. Replication `r` uses `rng.substream(r)`.
pub fn gpv_test_properties(study: &GpvStudy, rng: &RngStream) -> Result<RejectionReport> {
    if study.reps == 0 {
        return Err(Error::Config("reps must be positive".into()));
    }
    if (study.reps as u64).saturating_mul(study.m as u64) > study.budget {
        return Err(Error::Config(format!(
            "reps * M = {} exceeds budget {}",
            study.reps as u128 * study.m as u128,
            study.budget
        )));
    }
    if study.m < MIN_M {
        return Err(Error::Config(format!("M must be at least {MIN_M}")));
    }
    check_positive("alpha", study.alpha)?;
    check_positive("alpha0", study.alpha0)?;
    check_positive("beta", study.beta)?;
    check_level(study.significance)?;
    let outcomes = map_indexed(study.reps as u64, |r| -> Result<bool> {
        let mut rep = rng.substream(r);
        let sample = simulate_records_direct(study.alpha, study.beta, study.n, &mut rep)?;
        let draws = draw_pivotal_values(sample.n(), sample.last(), sample.log_ratio_sum(), study.m, &rep)?;
        let p = gpv_from_draws(&draws, study.alpha0, study.hypotheses)?;
        Ok(p.p_value < study.significance)
    });
    let mut rejected = 0usize;
    for o in outcomes {
        rejected += o? as usize;
    }
    let rate = rejected as f64 / study.reps as f64;
    Ok(RejectionReport {
        alpha: study.alpha,
        alpha0: study.alpha0,
        beta: study.beta,
        n: study.n,
        significance: study.significance,
        hypotheses: study.hypotheses,
        rate,
        rate_se: (rate * (1.0 - rate) / study.reps as f64).sqrt(),
        reps: study.reps,
        m: study.m,
        seed: rng.master_seed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> RecordSample {
        RecordSample::new(vec![26.0, 27.0, 40.0, 41.0]).unwrap()
    }

    #[test]
    fn t_equals_r_n_at_defining_identity() {
        let c = 0.8979;
        assert_eq!(pivotal_t_value(41.0, c, 2.0 * c, 2.0), 41.0);
    }

    #[test]
    fn extreme_pivotals_saturate() {
        assert_eq!(pivotal_t_value(41.0, 3.0, 1e-6, 0.01), f64::MAX);
        assert_eq!(pivotal_t_value(41.0, 3.0, 1e-6, 100.0), f64::MIN_POSITIVE);
    }

    #[test]
    fn draws_reproducible_and_positive() {
        let s = example();
        let a = draw_pivotal_t(&s, 5_000, &RngStream::new(1, 0)).unwrap();
        let b = draw_pivotal_t(&s, 5_000, &RngStream::new(1, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.m(), 5_000);
        assert!(a.draws.iter().all(|t| *t > 0.0 && t.is_finite()));
        assert_ne!(a.draws, draw_pivotal_t(&s, 5_000, &RngStream::new(2, 0)).unwrap().draws);
    }

    #[test]
    fn too_few_draws() {
        assert!(matches!(
            draw_pivotal_t(&example(), 999, &RngStream::new(1, 0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn resolution_error() {
        let set = draw_pivotal_t(&example(), 1_000, &RngStream::new(1, 0)).unwrap();
        assert!(generalized_ci_scale(&set, 0.95).is_ok());
        assert!(matches!(generalized_ci_scale(&set, 0.9995), Err(Error::Resolution(_))));
    }

    #[test]
    fn nested_levels() {
        let set = draw_pivotal_t(&example(), 10_000, &RngStream::new(3, 0)).unwrap();
        let wide = generalized_ci_scale(&set, 0.95).unwrap();
        let narrow = generalized_ci_scale(&set, 0.5).unwrap();
        assert!(wide.lower < narrow.lower && narrow.upper < wide.upper);
    }

    #[test]
    fn equal_statistics_equal_draws() {
        // Same (n, r_n, C) from different records: 1.25 * 1.6 = 1 * 2.
        let a = RecordSample::new(vec![1.0, 2.0, 8.0]).unwrap();
        let b = RecordSample::new(vec![1.25, 1.6, 8.0]).unwrap();
        assert!((a.log_ratio_sum() - b.log_ratio_sum()).abs() < 1e-14);
        let rng = RngStream::new(4, 4);
        let da = draw_pivotal_t(&a, 2_000, &rng).unwrap();
        let db = draw_pivotal_t(&b, 2_000, &rng).unwrap();
        for (x, y) in da.draws.iter().zip(&db.draws) {
            assert!((x - y).abs() <= 1e-12 * x);
        }
        assert_ne!(da.sample_digest, db.sample_digest);
    }

    #[test]
    fn gpv_edge_cases() {
        let set = draw_pivotal_t(&example(), 10_000, &RngStream::new(3, 0)).unwrap();
        let p = gpv_scale(&set, 1e-9, Hypotheses::OneSidedUpper).unwrap();
        assert_eq!(p.p_value, 0.0);
        let median = percentile_sorted(&set.sorted(), 0.5);
        let p = gpv_scale(&set, median, Hypotheses::TwoSided).unwrap();
        assert_eq!(p.p_value, 1.0);
        assert_eq!(p.mc_se, 0.0);
        assert!(gpv_scale(&set, 0.0, Hypotheses::TwoSided).is_err());
        let p = gpv_scale(&set, 5.0, Hypotheses::OneSidedUpper).unwrap();
        assert!((p.mc_se - (p.p_value * (1.0 - p.p_value) / 1e4).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cache_reuses_sets() {
        let mut cache = DrawSetCache::new();
        let s = example();
        let rng = RngStream::new(8, 0);
        let a = cache.get_or_draw(&s, 2_000, &rng).unwrap();
        let b = cache.get_or_draw(&s, 2_000, &rng).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.get_or_draw(&s, 3_000, &rng).unwrap();
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn csv_export_one_per_line() {
        let set = draw_pivotal_t(&example(), 1_000, &RngStream::new(1, 0)).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(parsed, set.draws);
    }

    #[test]
    fn study_configuration_errors() {
        let study = GpvStudy {
            alpha: 1.0,
            alpha0: 1.0,
            beta: 1.0,
            n: 7,
            significance: 0.05,
            hypotheses: Hypotheses::OneSidedUpper,
            reps: 0,
            m: 10_000,
            budget: DEFAULT_BUDGET,
        };
        let rng = RngStream::new(0, 0);
        assert!(matches!(gpv_test_properties(&study, &rng), Err(Error::Config(_))));
        let over = GpvStudy { reps: 1_000, budget: 1_000, ..study };
        assert!(matches!(gpv_test_properties(&over, &rng), Err(Error::Config(_))));
    }
}

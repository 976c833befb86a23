//! Upper record values: the sample type, extraction from raw sequences,
//! simulators, the Weibull record likelihood, MLEs and the pivotal
//! quantities `U` and `V`.

use serde::{Deserialize, Serialize};

use crate::dist::unit_exponential;
use crate::error::{check_positive, Error, Result};
use crate::rng::RngStream;

/// Default draw budget for [`simulate_records_naive`]. The expected record
/// time of the n-th record grows roughly like `e^n`, so raw streams for more
/// than about a dozen records are impractical.
pub const DEFAULT_MAX_DRAWS: u64 = 1_000_000;

/// Strictly increasing positive record values `r_0 < r_1 < ... < r_n`, with
/// `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordSample {
    values: Vec<f64>,
    #[serde(skip)]
    stats: SufficientStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SufficientStats {
    pub r_n: f64,
    /// `S = sum_i log(r_n / r_i)`.
    pub log_ratio_sum: f64,
    pub log_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleEstimate {
    pub beta_hat: f64,
    pub alpha_hat: f64,
}

impl RecordSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientRecords { found: values.len() });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain(format!(
                    "record {i} must be positive and finite, got {v}"
                )));
            }
        }
        if let Some(i) = values.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Domain(format!(
                "records must be strictly increasing: r[{}] = {} >= r[{}] = {}",
                i,
                values[i],
                i + 1,
                values[i + 1]
            )));
        }
        let r_n = *values.last().unwrap();
        let log_ratio_sum = values.iter().map(|&r| (r_n / r).ln()).sum();
        let log_sum = values.iter().map(|r| r.ln()).sum();
        Ok(Self {
            values,
            stats: SufficientStats {
                r_n,
                log_ratio_sum,
                log_sum,
            },
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the last record; the sample holds `n + 1` values.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn last(&self) -> f64 {
        self.stats.r_n
    }

    pub fn log_ratio_sum(&self) -> f64 {
        self.stats.log_ratio_sum
    }

    /// Every record multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        check_positive("scale factor", c)?;
        Self::new(self.values.iter().map(|r| r * c).collect())
    }
}

impl<'de> Deserialize<'de> for RecordSample {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            values: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        RecordSample::new(raw.values).map_err(serde::de::Error::custom)
    }
}

/// Running strict maxima of `raw`, starting with `raw[0]`. Ties are not
/// records.
pub fn running_maxima(raw: &[f64]) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::new();
    for (i, &x) in raw.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::Domain(format!("value {i} is not finite: {x}")));
        }
        match out.last() {
            Some(&m) if x <= m => {}
            _ => out.push(x),
        }
    }
    Ok(out)
}

/// Upper records of a raw positive sequence.
pub fn extract_records(raw: &[f64]) -> Result<RecordSample> {
    if let Some((i, &x)) = raw.iter().enumerate().find(|(_, x)| **x <= 0.0) {
        return Err(Error::Domain(format!(
            "Weibull data must be positive; value {i} is {x}"
        )));
    }
    let records = running_maxima(raw)?;
    if records.len() < 2 {
        return Err(Error::InsufficientRecords { found: records.len() });
    }
    RecordSample::new(records)
}

fn check_sim_args(alpha: f64, beta: f64, n: usize) -> Result<()> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    if n == 0 {
        return Err(Error::InsufficientRecords { found: 1 });
    }
    Ok(())
}

/// First `n + 1` Weibull records via `R_i = alpha * T_i^(1/beta)`, where
/// `T_i` are partial sums of unit exponentials.
pub fn simulate_records_direct(alpha: f64, beta: f64, n: usize, rng: &mut RngStream) -> Result<RecordSample> {
    check_sim_args(alpha, beta, n)?;
    let inv_beta = 1.0 / beta;
    let mut t = 0.0;
    let values = (0..=n)
        .map(|_| {
            t += unit_exponential(rng);
            alpha * t.powf(inv_beta)
        })
        .collect();
    RecordSample::new(values)
}

/// Brute-force record simulation: streams iid Weibull draws and keeps the
/// running strict maxima until `n + 1` records are seen.
pub fn simulate_records_naive(
    alpha: f64,
    beta: f64,
    n: usize,
    rng: &mut RngStream,
    max_draws: u64,
) -> Result<RecordSample> {
    simulate_raw_stream(alpha, beta, n, rng, max_draws).map(|(_, s)| s)
}

/// Like [`simulate_records_naive`] but also returns the raw draws consumed.
pub fn simulate_raw_stream(
    alpha: f64,
    beta: f64,
    n: usize,
    rng: &mut RngStream,
    max_draws: u64,
) -> Result<(Vec<f64>, RecordSample)> {
    check_sim_args(alpha, beta, n)?;
    if max_draws == 0 {
        return Err(Error::Config("max_draws must be positive".into()));
    }
    let inv_beta = 1.0 / beta;
    let mut raw = Vec::new();
    let mut records: Vec<f64> = Vec::with_capacity(n + 1);
    for _ in 0..max_draws {
        let x = alpha * unit_exponential(rng).powf(inv_beta);
        raw.push(x);
        if records.last().is_none_or(|&m| x > m) {
            records.push(x);
            if records.len() == n + 1 {
                return Ok((raw, RecordSample::new(records)?));
            }
        }
    }
    Err(Error::BudgetExceeded {
        max_draws,
        found: records.len(),
        wanted: n + 1,
    })
}

/// Log of the Weibull record joint density at `(alpha, beta)`.
pub fn log_joint_density(sample: &RecordSample, alpha: f64, beta: f64) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    let k = (sample.n() + 1) as f64;
    let s = sample.stats();
    Ok(k * beta.ln() - beta * k * alpha.ln() - (s.r_n / alpha).powf(beta) + (beta - 1.0) * s.log_sum)
}

/// Log joint density of records for an arbitrary continuous parent:
/// `log f(r_n) + sum_{i<n} [log f(r_i) - log(1 - F(r_i))]`.
pub fn log_joint_density_general<P, S>(sample: &RecordSample, log_pdf: P, log_sf: S) -> f64
where
    P: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let v = sample.values();
    let (last, head) = v.split_last().unwrap();
    log_pdf(*last) + head.iter().map(|&r| log_pdf(r) - log_sf(r)).sum::<f64>()
}

pub fn mle(sample: &RecordSample) -> Result<MleEstimate> {
    let s = sample.log_ratio_sum();
    if !(s > 0.0) {
        return Err(Error::Internal(format!("log-ratio sum is {s}")));
    }
    let k = (sample.n() + 1) as f64;
    let beta_hat = k / s;
    let alpha_hat = sample.last() * k.powf(-1.0 / beta_hat);
    Ok(MleEstimate { beta_hat, alpha_hat })
}

/// `U = 2 beta S`, chi-square with `2n` degrees of freedom at the true beta.
pub fn pivotal_u(sample: &RecordSample, beta: f64) -> f64 {
    2.0 * beta * sample.log_ratio_sum()
}

/// `V = 2 (r_n / alpha)^beta`, chi-square with `2n + 2` degrees of freedom.
pub fn pivotal_v(sample: &RecordSample, alpha: f64, beta: f64) -> f64 {
    2.0 * (sample.last() / alpha).powf(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistSpec;

    const EXAMPLE: [f64; 4] = [26.0, 27.0, 40.0, 41.0];

    #[test]
    fn extract_skips_ties() {
        let s = extract_records(&[5.0, 2.0, 7.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.values(), &[5.0, 7.0, 9.0]);
        let s = extract_records(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.values(), &[1.0, 2.0, 3.0, 4.0]);
        let s = extract_records(&EXAMPLE).unwrap();
        assert_eq!(s.values(), &EXAMPLE);
    }

    #[test]
    fn extract_errors() {
        assert!(matches!(
            extract_records(&[3.0, 2.0, 1.0]),
            Err(Error::InsufficientRecords { found: 1 })
        ));
        assert!(matches!(extract_records(&[]), Err(Error::InsufficientRecords { found: 0 })));
        assert!(matches!(extract_records(&[1.0, -2.0, 3.0]), Err(Error::Domain(_))));
        assert!(matches!(extract_records(&[1.0, f64::NAN, 3.0]), Err(Error::Domain(_))));
        assert!(matches!(extract_records(&[1.0, f64::INFINITY]), Err(Error::Domain(_))));
    }

    #[test]
    fn sample_validation() {
        assert!(RecordSample::new(vec![1.0]).is_err());
        assert!(RecordSample::new(vec![1.0, 1.0]).is_err());
        assert!(RecordSample::new(vec![2.0, 1.0]).is_err());
        assert!(RecordSample::new(vec![0.0, 1.0]).is_err());
        assert!(RecordSample::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn sufficient_stats_of_example() {
        let s = RecordSample::new(EXAMPLE.to_vec()).unwrap();
        let direct: f64 = EXAMPLE.iter().map(|r| (41.0f64 / r).ln()).sum();
        assert!((s.log_ratio_sum() - direct).abs() < 1e-14);
        assert!((s.log_ratio_sum() - 0.8980).abs() < 1e-3);
        assert_eq!(s.n(), 3);
    }

    #[test]
    fn mle_example_and_hand_case() {
        let s = RecordSample::new(EXAMPLE.to_vec()).unwrap();
        let m = mle(&s).unwrap();
        assert!((m.beta_hat - 4.4548).abs() < 1e-3, "{m:?}");
        assert!((m.alpha_hat - 30.03).abs() < 0.01, "{m:?}");

        let e = std::f64::consts::E;
        let m = mle(&RecordSample::new(vec![1.0, e]).unwrap()).unwrap();
        assert!((m.beta_hat - 2.0).abs() < 1e-14);
        assert!((m.alpha_hat - e / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn pivotal_u_example() {
        let s = RecordSample::new(EXAMPLE.to_vec()).unwrap();
        assert!((pivotal_u(&s, 1.0) - 1.7960).abs() < 1e-3);
        assert_eq!(pivotal_u(&s, 2.0), 2.0 * pivotal_u(&s, 1.0));
    }

    #[test]
    fn pivotal_v_at_last_record() {
        let s = RecordSample::new(EXAMPLE.to_vec()).unwrap();
        for beta in [0.3, 1.0, 7.0] {
            assert_eq!(pivotal_v(&s, 41.0, beta), 2.0);
        }
    }

    #[test]
    fn log_density_hand_case() {
        let s = RecordSample::new(vec![1.0, 2.0]).unwrap();
        assert!((log_joint_density(&s, 1.0, 1.0).unwrap() + 2.0).abs() < 1e-15);
        assert!(log_joint_density(&s, 0.0, 1.0).is_err());
        assert!(log_joint_density(&s, 1.0, -1.0).is_err());
    }

    #[test]
    fn log_density_matches_general_form() {
        let s = RecordSample::new(EXAMPLE.to_vec()).unwrap();
        for (alpha, beta) in [(30.0, 4.5), (10.0, 0.7), (55.0, 2.0)] {
            let d = DistSpec::weibull(alpha, beta).unwrap();
            let general = log_joint_density_general(
                &s,
                |x| d.pdf(x).unwrap().ln(),
                |x| -(x / alpha).powf(beta),
            );
            let closed = log_joint_density(&s, alpha, beta).unwrap();
            assert!((general - closed).abs() < 1e-10, "{general} vs {closed}");
        }
    }

    #[test]
    fn mle_maximizes_example_likelihood() {
        let s = RecordSample::new(EXAMPLE.to_vec()).unwrap();
        let m = mle(&s).unwrap();
        let best = log_joint_density(&s, m.alpha_hat, m.beta_hat).unwrap();
        for i in -20..=20 {
            for j in -20..=20 {
                let a = m.alpha_hat * (1.0 + 0.02 * i as f64);
                let b = m.beta_hat * (1.0 + 0.02 * j as f64);
                assert!(log_joint_density(&s, a, b).unwrap() <= best + 1e-12);
            }
        }
    }

    #[test]
    fn direct_simulation_scale_equivariant() {
        let a = simulate_records_direct(1.0, 1.7, 6, &mut RngStream::new(5, 0)).unwrap();
        let b = simulate_records_direct(3.5, 1.7, 6, &mut RngStream::new(5, 0)).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(3.5 * x, *y);
        }
    }

    #[test]
    fn naive_budget() {
        let r = simulate_records_naive(1.0, 1.0, 40, &mut RngStream::new(1, 1), 1000);
        assert!(matches!(r, Err(Error::BudgetExceeded { max_draws: 1000, .. })));
        assert!(simulate_records_naive(1.0, 1.0, 2, &mut RngStream::new(1, 1), 0).is_err());
    }

    #[test]
    fn raw_stream_extracts_to_same_records() {
        for seed in 0..50 {
            let (raw, recs) = simulate_raw_stream(2.0, 0.8, 4, &mut RngStream::new(seed, 0), DEFAULT_MAX_DRAWS).unwrap();
            assert_eq!(extract_records(&raw).unwrap(), recs);
        }
    }

    #[test]
    fn scaled_sample_stats() {
        let s = RecordSample::new(EXAMPLE.to_vec()).unwrap();
        let c = s.scaled(4.0).unwrap();
        assert_eq!(c.log_ratio_sum(), s.log_ratio_sum());
        assert_eq!(mle(&c).unwrap().beta_hat, mle(&s).unwrap().beta_hat);
        assert_eq!(mle(&c).unwrap().alpha_hat, 4.0 * mle(&s).unwrap().alpha_hat);
    }

    #[test]
    fn serde_validates() {
        let s: RecordSample = serde_json::from_str(r#"{"values":[1,2,3]}"#).unwrap();
        assert_eq!(s.n(), 2);
        assert!(serde_json::from_str::<RecordSample>(r#"{"values":[3,2]}"#).is_err());
    }
}

//! Joint confidence regions for `(alpha, beta)`.
//!
//! Both region families are a beta-interval crossed with a beta-dependent
//! alpha band `r_n * m_lo^(1/beta) < alpha < r_n * m_hi^(1/beta)`, where
//! `m_lo = 2 / chi2_{2n+2, (1+q)/2}`, `m_hi = 2 / chi2_{2n+2, (1-q)/2}` and
//! `q = sqrt(level)`. They differ only in how the beta-interval is built:
//!
//! * `B` uses `U = 2 beta S ~ chi2(2n)` at levels `(1 -+ q)/2`, so it draws
//!   on every record.
//! * `A_j` uses an F quantile ratio built from `r_{j-1}` and `r_n` only.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dist::DistSpec;
use crate::error::{check_level, check_positive, Error, Result};
use crate::numeric::adaptive_simpson;
use crate::records::RecordSample;

pub const AREA_TOL: f64 = 1e-4;
pub const AREA_MAX_EVALS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionMethod {
    Aj { j: usize },
    B,
}

impl fmt::Display for RegionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionMethod::Aj { j } => write!(f, "A{j}"),
            RegionMethod::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointRegion {
    pub beta_lower: f64,
    pub beta_upper: f64,
    pub m_lo: f64,
    pub m_hi: f64,
    pub r_n: f64,
    pub method: RegionMethod,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionArea {
    pub value: f64,
    pub abs_tolerance: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub beta: f64,
    pub alpha_lower: f64,
    pub alpha_upper: f64,
}

/// Split-level probabilities `((1 - q)/2, (1 + q)/2)` with `q = sqrt(level)`.
fn split_levels(level: f64) -> (f64, f64) {
    let q = level.sqrt();
    ((1.0 - q) / 2.0, (1.0 + q) / 2.0)
}

/// Alpha-band multipliers `(m_lo, m_hi)` shared by every region family.
pub fn alpha_multipliers(n: usize, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    let (p_lo, p_hi) = split_levels(level);
    let chi = DistSpec::chi_square(2 * n as u32 + 2)?;
    Ok((2.0 / chi.quantile(p_hi)?, 2.0 / chi.quantile(p_lo)?))
}

fn build(sample: &RecordSample, beta_lower: f64, beta_upper: f64, method: RegionMethod, level: f64) -> Result<JointRegion> {
    let (m_lo, m_hi) = alpha_multipliers(sample.n(), level)?;
    let region = JointRegion {
        beta_lower,
        beta_upper,
        m_lo,
        m_hi,
        r_n: sample.last(),
        method,
        level,
    };
    region.validate()?;
    Ok(region)
}

pub fn region_b(sample: &RecordSample, level: f64) -> Result<JointRegion> {
    check_level(level)?;
    let (p_lo, p_hi) = split_levels(level);
    let chi = DistSpec::chi_square(2 * sample.n() as u32)?;
    let two_s = 2.0 * sample.log_ratio_sum();
    build(
        sample,
        chi.quantile(p_lo)? / two_s,
        chi.quantile(p_hi)? / two_s,
        RegionMethod::B,
        level,
    )
}

pub fn region_aj(sample: &RecordSample, j: usize, level: f64) -> Result<JointRegion> {
    check_level(level)?;
    let n = sample.n();
    if j < 1 || j > n {
        return Err(Error::Domain(format!("region index j = {j} not in 1..={n}")));
    }
    let (p_lo, p_hi) = split_levels(level);
    let f = DistSpec::f((2 * n - 2 * j + 2) as u32, (2 * j) as u32)?;
    let (k1, k2) = (f.quantile(p_lo)?, f.quantile(p_hi)?);
    let ratio = (n - j + 1) as f64 / j as f64;
    let log_span = (sample.last() / sample.values()[j - 1]).ln();
    build(
        sample,
        (ratio * k1).ln_1p() / log_span,
        (ratio * k2).ln_1p() / log_span,
        RegionMethod::Aj { j },
        level,
    )
}

/// The two `A_j` indices that usually give the smallest areas:
/// `floor((n+1)/5)` and one more, clamped to `1..=n` and deduplicated.
pub fn default_aj_indices(n: usize) -> Vec<usize> {
    let base = (n + 1) / 5;
    let mut js: Vec<usize> = [base, base + 1].iter().map(|&j| j.clamp(1, n.max(1))).collect();
    js.dedup();
    js
}

impl JointRegion {
    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v > 0.0 && v.is_finite();
        if !(finite_pos(self.beta_lower) && finite_pos(self.beta_upper) && self.beta_lower < self.beta_upper) {
            return Err(Error::Numeric(format!(
                "invalid beta interval ({}, {})",
                self.beta_lower, self.beta_upper
            )));
        }
        if !(finite_pos(self.m_lo) && finite_pos(self.m_hi) && self.m_lo <= self.m_hi) {
            return Err(Error::Numeric(format!(
                "invalid alpha multipliers ({}, {})",
                self.m_lo, self.m_hi
            )));
        }
        check_positive("r_n", self.r_n)?;
        Ok(())
    }

    pub fn alpha_lower_at(&self, beta: f64) -> f64 {
        self.r_n * self.m_lo.powf(1.0 / beta)
    }

    pub fn alpha_upper_at(&self, beta: f64) -> f64 {
        self.r_n * self.m_hi.powf(1.0 / beta)
    }

    /// Membership in the open region.
    pub fn contains(&self, alpha: f64, beta: f64) -> bool {
        self.beta_lower < beta
            && beta < self.beta_upper
            && self.alpha_lower_at(beta) < alpha
            && alpha < self.alpha_upper_at(beta)
    }

    fn band_width(&self, beta: f64) -> f64 {
        self.alpha_upper_at(beta) - self.alpha_lower_at(beta)
    }

    pub fn area(&self, abs_tolerance: f64) -> Result<RegionArea> {
        check_positive("abs_tolerance", abs_tolerance)?;
        let q = adaptive_simpson(
            |b| self.band_width(b),
            self.beta_lower,
            self.beta_upper,
            abs_tolerance,
            AREA_MAX_EVALS,
        )?;
        Ok(RegionArea {
            value: q.value.max(0.0),
            abs_tolerance,
            evaluations: q.evaluations,
        })
    }

    /// Boundary curves on a geometric beta grid spanning the beta-interval.
    pub fn boundary_polyline(&self, points: usize) -> Result<Vec<BoundaryPoint>> {
        if points < 2 {
            return Err(Error::Domain(format!("need at least 2 boundary points, got {points}")));
        }
        let ratio = (self.beta_upper / self.beta_lower).ln();
        Ok((0..points)
            .map(|i| {
                let beta = match i {
                    0 => self.beta_lower,
                    _ if i == points - 1 => self.beta_upper,
                    _ => self.beta_lower * (ratio * i as f64 / (points - 1) as f64).exp(),
                };
                BoundaryPoint {
                    beta,
                    alpha_lower: self.alpha_lower_at(beta),
                    alpha_upper: self.alpha_upper_at(beta),
                }
            })
            .collect())
    }
}

pub fn contains(region: &JointRegion, alpha: f64, beta: f64) -> bool {
    region.contains(alpha, beta)
}

pub fn area(region: &JointRegion, abs_tolerance: f64) -> Result<RegionArea> {
    region.area(abs_tolerance)
}

pub fn boundary_polyline(region: &JointRegion, points: usize) -> Result<Vec<BoundaryPoint>> {
    region.boundary_polyline(points)
}

/// CSV with header `beta,alpha_lower,alpha_upper`.
pub fn write_boundary_csv<W: Write>(rows: &[BoundaryPoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "beta,alpha_lower,alpha_upper")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.beta, r.alpha_lower, r.alpha_upper)?;
    }
    Ok(())
}

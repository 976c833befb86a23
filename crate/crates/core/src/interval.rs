use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_level, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    ExactChiSquare,
    WuTseng,
    GeneralizedPivotal,
}

impl fmt::Display for IntervalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalMethod::ExactChiSquare => "exact",
            IntervalMethod::WuTseng => "wu",
            IntervalMethod::GeneralizedPivotal => "generalized",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl ConfidenceInterval {
    pub fn new(lower: f64, upper: f64, level: f64, method: IntervalMethod) -> Result<Self> {
        check_level(level)?;
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::Numeric(format!("degenerate interval ({lower}, {upper})")));
        }
        Ok(Self {
            lower,
            upper,
            level,
            method,
        })
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Open-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }
}

/// Alternative hypothesis shape for a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypotheses {
    /// `H0: theta <= theta0` against `H1: theta > theta0`.
    OneSidedUpper,
    /// `H0: theta = theta0` against `H1: theta != theta0`.
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub reject: bool,
    pub level: f64,
    pub hypotheses: Hypotheses,
}

//! The handful of continuous distributions the inference layer needs:
//! chi-square, F, exponential, Weibull and gamma.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Absolute step tolerance for quantile inversion.
pub const QUANTILE_TOL: f64 = 1e-10;
pub const QUANTILE_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    ChiSquare { df: u32 },
    F { df1: u32, df2: u32 },
    Exponential { rate: f64 },
    Weibull { scale: f64, shape: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl DistSpec {
    pub fn chi_square(df: u32) -> Result<Self> {
        let d = DistSpec::ChiSquare { df };
        d.validate()?;
        Ok(d)
    }

    pub fn f(df1: u32, df2: u32) -> Result<Self> {
        let d = DistSpec::F { df1, df2 };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let d = DistSpec::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn weibull(scale: f64, shape: f64) -> Result<Self> {
        let d = DistSpec::Weibull { scale, shape };
        d.validate()?;
        Ok(d)
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        let d = DistSpec::Gamma { shape, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        let valid = match *self {
            DistSpec::ChiSquare { df } => df > 0,
            DistSpec::F { df1, df2 } => df1 > 0 && df2 > 0,
            DistSpec::Exponential { rate } => ok(rate),
            DistSpec::Weibull { scale, shape } => ok(scale) && ok(shape),
            DistSpec::Gamma { shape, scale } => ok(shape) && ok(scale),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid distribution parameters: {self:?}")))
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::Domain("cdf argument is NaN".into()));
        }
        Ok(self.cdf_unchecked(x))
    }

    /// Upper tail `1 - cdf(x)`, computed without cancellation where possible.
    pub fn sf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if x.is_nan() {
            return Err(Error::Domain("sf argument is NaN".into()));
        }
        Ok(self.sf_unchecked(x))
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(self.pdf_unchecked(x))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("probability {p} not in (0, 1)")));
        }
        match *self {
            DistSpec::Exponential { rate } => Ok(-(-p).ln_1p() / rate),
            DistSpec::Weibull { scale, shape } => Ok(scale * (-(-p).ln_1p()).powf(1.0 / shape)),
            DistSpec::ChiSquare { df: 2 } => Ok(-2.0 * (-p).ln_1p()),
            _ => self.invert(p),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<f64> {
        Ok(self.sampler()?.sample(rng))
    }

    /// Pre-built sampler for repeated draws from this distribution.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        let gamma = |shape: f64, scale: f64| {
            Gamma::new(shape, scale).map_err(|e| Error::Domain(format!("gamma sampler: {e}")))
        };
        Ok(match *self {
            DistSpec::ChiSquare { df } => Sampler::Gamma(gamma(df as f64 / 2.0, 2.0)?),
            DistSpec::F { df1, df2 } => Sampler::F {
                num: gamma(df1 as f64 / 2.0, 2.0)?,
                den: gamma(df2 as f64 / 2.0, 2.0)?,
                df1: df1 as f64,
                df2: df2 as f64,
            },
            DistSpec::Exponential { rate } => Sampler::Weibull {
                scale: 1.0 / rate,
                shape: 1.0,
            },
            DistSpec::Weibull { scale, shape } => Sampler::Weibull { scale, shape },
            DistSpec::Gamma { shape, scale } => Sampler::Gamma(gamma(shape, scale)?),
        })
    }

    fn cdf_unchecked(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        match *self {
            DistSpec::ChiSquare { df } => gamma_lr(df as f64 / 2.0, x / 2.0),
            DistSpec::F { df1, df2 } => {
                let (a, b) = (df1 as f64, df2 as f64);
                beta_reg(a / 2.0, b / 2.0, a * x / (a * x + b))
            }
            DistSpec::Exponential { rate } => -(-rate * x).exp_m1(),
            DistSpec::Weibull { scale, shape } => -(-(x / scale).powf(shape)).exp_m1(),
            DistSpec::Gamma { shape, scale } => gamma_lr(shape, x / scale),
        }
    }

    fn sf_unchecked(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x == f64::INFINITY {
            return 0.0;
        }
        match *self {
            DistSpec::ChiSquare { df } => gamma_ur(df as f64 / 2.0, x / 2.0),
            DistSpec::F { df1, df2 } => {
                let (a, b) = (df1 as f64, df2 as f64);
                beta_reg(b / 2.0, a / 2.0, b / (a * x + b))
            }
            DistSpec::Exponential { rate } => (-rate * x).exp(),
            DistSpec::Weibull { scale, shape } => (-(x / scale).powf(shape)).exp(),
            DistSpec::Gamma { shape, scale } => gamma_ur(shape, x / scale),
        }
    }

    fn pdf_unchecked(&self, x: f64) -> f64 {
        if x <= 0.0 || !x.is_finite() {
            return 0.0;
        }
        match *self {
            DistSpec::ChiSquare { df } => gamma_ln_pdf(df as f64 / 2.0, 2.0, x).exp(),
            DistSpec::F { df1, df2 } => {
                let (a, b) = (df1 as f64, df2 as f64);
                let ln = 0.5 * (a * (a * x).ln() + b * b.ln() - (a + b) * (a * x + b).ln())
                    - x.ln()
                    - ln_beta(a / 2.0, b / 2.0);
                ln.exp()
            }
            DistSpec::Exponential { rate } => rate * (-rate * x).exp(),
            DistSpec::Weibull { scale, shape } => {
                let z = x / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
            }
            DistSpec::Gamma { shape, scale } => gamma_ln_pdf(shape, scale, x).exp(),
        }
    }

    fn start_point(&self) -> f64 {
        match *self {
            DistSpec::ChiSquare { df } => df as f64,
            DistSpec::F { df2, .. } if df2 > 2 => df2 as f64 / (df2 as f64 - 2.0),
            DistSpec::Gamma { shape, scale } => shape * scale,
            _ => 1.0,
        }
    }

    /// Bracketed Newton on the cdf, falling back to bisection whenever the
    /// Newton step leaves the current bracket.
    fn invert(&self, p: f64) -> Result<f64> {
        let mut lo = 0.0_f64;
        let mut hi = self.start_point().max(f64::MIN_POSITIVE);
        while self.cdf_unchecked(hi) < p {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Numeric(format!("cannot bracket quantile {p} of {self:?}")));
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..QUANTILE_MAX_ITER {
            let resid = self.cdf_unchecked(x) - p;
            if resid == 0.0 {
                return Ok(x);
            }
            if resid < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.pdf_unchecked(x);
            let newton = x - resid / d;
            let next = if d > 0.0 && newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= QUANTILE_TOL * 1e-3 || hi - lo <= f64::EPSILON * hi {
                return Ok(next);
            }
            x = next;
        }
        // The bracket still holds the root; report the midpoint if Newton stalled.
        if hi - lo <= QUANTILE_TOL {
            Ok(0.5 * (lo + hi))
        } else {
            Err(Error::Numeric(format!(
                "quantile {p} of {self:?} did not converge in {QUANTILE_MAX_ITER} iterations"
            )))
        }
    }
}

fn gamma_ln_pdf(shape: f64, scale: f64, x: f64) -> f64 {
    (shape - 1.0) * x.ln() - x / scale - shape * scale.ln() - ln_gamma(shape)
}

/// Distribution with its sampling constants prepared once.
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Gamma(Gamma<f64>),
    F {
        num: Gamma<f64>,
        den: Gamma<f64>,
        df1: f64,
        df2: f64,
    },
    /// Inverse-cdf sampling; exponential is the `shape = 1` case.
    Weibull { scale: f64, shape: f64 },
}

impl Sampler {
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            Sampler::Gamma(g) => g.sample(rng),
            Sampler::F { num, den, df1, df2 } => {
                let x = num.sample(rng) / df1;
                let y = den.sample(rng) / df2;
                x / y
            }
            Sampler::Weibull { scale, shape } => {
                let e = -rng.open01().ln();
                if *shape == 1.0 {
                    scale * e
                } else {
                    scale * e.powf(1.0 / shape)
                }
            }
        }
    }
}

/// Unit-rate exponential by inversion; always strictly positive.
pub fn unit_exponential(rng: &mut RngStream) -> f64 {
    -rng.open01().ln()
}

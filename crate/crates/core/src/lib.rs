//! Inference on the Weibull shape and scale parameters from upper record
//! values.
//!
//! * [`shape`]: exact chi-square and Wu–Tseng intervals and tests for beta
//! * [`scale`]: generalized pivotal interval and generalized p-values for alpha
//! * [`region`]: joint confidence regions `B` and `A_j` for (alpha, beta)
//! * [`sim`]: reproducible coverage / length / area studies
//!
//! ```
//! use weibrec::{shape, RecordSample};
//!
//! let sample = RecordSample::new(vec![26.0, 27.0, 40.0, 41.0]).unwrap();
//! let ci = shape::exact_ci_shape(&sample, 0.95).unwrap();
//! assert!((ci.lower - 0.689).abs() < 1e-3);
//! ```

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod interval;
pub mod numeric;
mod par;
pub mod records;
pub mod region;
pub mod rng;
pub mod scale;
pub mod shape;
pub mod sim;

pub use dist::DistSpec;
pub use error::{Error, Result};
pub use interval::{ConfidenceInterval, Hypotheses, IntervalMethod, TestResult};
pub use records::{extract_records, mle, MleEstimate, RecordSample, SufficientStats};
pub use region::{JointRegion, RegionArea, RegionMethod};
pub use rng::RngStream;
pub use scale::{GpvResult, PivotalDrawSet};
pub use shape::WStarTable;
pub use sim::{Method, SimulationConfig, SimulationReport, Study};

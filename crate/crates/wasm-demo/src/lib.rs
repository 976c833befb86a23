//! Browser bindings for the demo page in `www/`. Every export takes the
//! record data as text and returns a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use weibrec::numeric::{percentile_sorted, sort_floats};
use weibrec::region::{region_aj, region_b, BoundaryPoint};
use weibrec::scale::{draw_pivotal_t, generalized_ci_scale, gpv_scale};
use weibrec::shape::{exact_ci_shape, ln_w_statistic, wu_ci_shape};
use weibrec::{
    extract_records, mle, ConfidenceInterval, Error, GpvResult, Hypotheses, MleEstimate, RecordSample, RngStream,
    WStarTable,
};

const BOUNDARY_POINTS: usize = 160;
const AREA_REL_TOL: f64 = 1e-7;
const W_CURVE_POINTS: usize = 120;
const HIST_BINS: usize = 60;

fn parse_sample(data: &str, raw: bool) -> Result<RecordSample, Error> {
    let values = data
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Domain(format!("`{t}` is not a number"))))
        .collect::<Result<Vec<_>, _>>()?;
    if raw {
        extract_records(&values)
    } else {
        RecordSample::new(values)
    }
}

#[derive(Serialize)]
struct RegionView {
    label: String,
    beta_lower: f64,
    beta_upper: f64,
    m_lo: f64,
    m_hi: f64,
    area: f64,
    boundary: Vec<BoundaryPoint>,
}

#[derive(Serialize)]
struct RegionsView {
    records: Vec<f64>,
    mle: MleEstimate,
    regions: Vec<RegionView>,
}

/// Region B and every `A_j` for the sample.
pub fn regions_json(data: &str, raw: bool, level: f64) -> Result<String, Error> {
    let s = parse_sample(data, raw)?;
    let mut list = vec![region_b(&s, level)?];
    for j in 1..=s.n() {
        list.push(region_aj(&s, j, level)?);
    }
    let regions = list
        .into_iter()
        .map(|r| {
            let boundary = r.boundary_polyline(BOUNDARY_POINTS)?;
            // Tolerance relative to a trapezoid estimate, since areas span many decades.
            let rough: f64 = boundary
                .windows(2)
                .map(|w| 0.5 * (w[1].beta - w[0].beta) * (w[0].alpha_upper - w[0].alpha_lower + w[1].alpha_upper - w[1].alpha_lower))
                .sum();
            Ok(RegionView {
                label: r.method.to_string(),
                beta_lower: r.beta_lower,
                beta_upper: r.beta_upper,
                m_lo: r.m_lo,
                m_hi: r.m_hi,
                area: r.area(AREA_REL_TOL * rough.max(1.0))?.value,
                boundary,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    to_json(&RegionsView {
        records: s.values().to_vec(),
        mle: mle(&s)?,
        regions,
    })
}

#[derive(Serialize)]
struct ShapeView {
    exact: ConfidenceInterval,
    wu: ConfidenceInterval,
    /// `(beta, ln W(beta))` on a geometric grid around both intervals.
    ln_w_curve: Vec<(f64, f64)>,
    ln_w_targets: (f64, f64),
}

/// Exact and Wu-Tseng intervals for beta, plus the `ln W` curve.
pub fn shape_json(data: &str, raw: bool, level: f64, wstar_reps: usize, seed: u64) -> Result<String, Error> {
    let s = parse_sample(data, raw)?;
    let exact = exact_ci_shape(&s, level)?;
    let table = WStarTable::for_levels(s.n(), &[level], wstar_reps, seed)?;
    let wu = wu_ci_shape(&s, level, &table)?;
    let g = 1.0 - level;
    let targets = (
        table.percentile(g / 2.0).unwrap_or(f64::NAN).ln(),
        table.percentile(1.0 - g / 2.0).unwrap_or(f64::NAN).ln(),
    );
    let lo = 0.5 * exact.lower.min(wu.lower);
    let hi = 1.5 * exact.upper.max(wu.upper);
    let ln_w_curve = (0..W_CURVE_POINTS)
        .map(|i| {
            let b = lo * (hi / lo).powf(i as f64 / (W_CURVE_POINTS - 1) as f64);
            Ok((b, ln_w_statistic(&s, b)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    to_json(&ShapeView {
        exact,
        wu,
        ln_w_curve,
        ln_w_targets: targets,
    })
}

#[derive(Serialize)]
struct ScaleView {
    interval: ConfidenceInterval,
    one_sided: GpvResult,
    two_sided: GpvResult,
    /// Histogram of `log10 T` over the central 99% of draws.
    bin_edges: Vec<f64>,
    counts: Vec<u32>,
}

/// Generalized interval and p-values for alpha with a histogram of the draws.
pub fn scale_json(data: &str, raw: bool, level: f64, m: usize, seed: u64, alpha0: f64) -> Result<String, Error> {
    let s = parse_sample(data, raw)?;
    let draws = draw_pivotal_t(&s, m, &RngStream::new(seed, 0))?;
    let interval = generalized_ci_scale(&draws, level)?;
    let one_sided = gpv_scale(&draws, alpha0, Hypotheses::OneSidedUpper)?;
    let two_sided = gpv_scale(&draws, alpha0, Hypotheses::TwoSided)?;
    let mut logs: Vec<f64> = draws.draws.iter().map(|t| t.log10()).collect();
    sort_floats(&mut logs);
    let (lo, hi) = (percentile_sorted(&logs, 0.005), percentile_sorted(&logs, 0.995));
    let width = (hi - lo) / HIST_BINS as f64;
    let bin_edges: Vec<f64> = (0..=HIST_BINS).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0u32; HIST_BINS];
    for &x in logs.iter().filter(|&&x| x >= lo && x <= hi) {
        let k = (((x - lo) / width) as usize).min(HIST_BINS - 1);
        counts[k] += 1;
    }
    to_json(&ScaleView {
        interval,
        one_sided,
        two_sided,
        bin_edges,
        counts,
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String, Error> {
    serde_json::to_string(v).map_err(|e| Error::Internal(e.to_string()))
}

fn js(r: Result<String, Error>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn regions(data: &str, raw: bool, level: f64) -> Result<String, JsError> {
    js(regions_json(data, raw, level))
}

#[wasm_bindgen]
pub fn shape_intervals(data: &str, raw: bool, level: f64, wstar_reps: usize, seed: u32) -> Result<String, JsError> {
    js(shape_json(data, raw, level, wstar_reps, u64::from(seed)))
}

#[wasm_bindgen]
pub fn scale_pivotal(data: &str, raw: bool, level: f64, m: usize, seed: u32, alpha0: f64) -> Result<String, JsError> {
    js(scale_json(data, raw, level, m, u64::from(seed), alpha0))
}

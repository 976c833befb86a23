//! Coverage / expected-length / expected-area simulation studies.
//!
//! Three studies are available:
//!
//! * [`run_table1`]: generalized interval for alpha
//! * [`run_table2`]: exact and Wu–Tseng intervals for beta, on paired samples
//! * [`run_table3`]: joint regions `B` and `A_j`, on paired samples
//!
//! Every cell `(alpha, beta, n)` owns a stream keyed on its parameter values,
//! and replication `r` of the cell draws from substream `r`. A cell's result
//! therefore depends only on the seed and the cell itself, never on the
//! rest of the grid or on the thread count.
//!
//! `n` is the index of the last record: a cell with `n = 3` simulates four
//! records. The default `A_j` pair for the joint-region study is
//! `j = floor((n+1)/5)` and `j + 1`.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_level, check_positive, Error, Result};
use crate::par::{map_indexed, with_threads};
use crate::records::{simulate_records_direct, RecordSample};
use crate::region::{default_aj_indices, region_aj, region_b, JointRegion};
use crate::rng::{splitmix64, RngStream};
use crate::scale::{ci_from_sorted, draw_pivotal_values, DEFAULT_BUDGET, DEFAULT_M, MIN_M};
use crate::shape::{exact_ci_shape, wu_ci_shape, WStarTable, DEFAULT_WSTAR_REPS};
use crate::numeric::sort_floats;

pub const MIN_REPS: usize = 100;
pub const DEFAULT_REPS: usize = 2_000;
/// Quadrature tolerance for per-replication region areas.
pub const SIM_AREA_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Generalized,
    Exact,
    WuTseng,
    RegionB,
    RegionA(usize),
    /// Expands to the default `A_j` pair for each `n`.
    RegionADefault,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Generalized => f.write_str("generalized"),
            Method::Exact => f.write_str("exact"),
            Method::WuTseng => f.write_str("wu"),
            Method::RegionB => f.write_str("B"),
            Method::RegionA(j) => write!(f, "A{j}"),
            Method::RegionADefault => f.write_str("A*"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "generalized" | "G" => Ok(Method::Generalized),
            "exact" | "E" => Ok(Method::Exact),
            "wu" | "W" => Ok(Method::WuTseng),
            "B" | "b" => Ok(Method::RegionB),
            "A*" | "a*" | "aj" => Ok(Method::RegionADefault),
            other => other
                .strip_prefix(['A', 'a'])
                .and_then(|j| j.parse::<usize>().ok())
                .filter(|&j| j >= 1)
                .map(Method::RegionA)
                .ok_or_else(|| Error::Config(format!("unknown method tag `{other}`"))),
        }
    }
}

impl TryFrom<String> for Method {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Study {
    Table1,
    Table2,
    Table3,
}

impl FromStr for Study {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "table1" => Ok(Study::Table1),
            "2" | "table2" => Ok(Study::Table2),
            "3" | "table3" => Ok(Study::Table3),
            _ => Err(Error::Config(format!("unknown study `{s}` (expected 1, 2 or 3)"))),
        }
    }
}

fn default_wstar_reps() -> usize {
    DEFAULT_WSTAR_REPS
}
fn default_budget() -> u64 {
    DEFAULT_BUDGET
}
fn default_area_tol() -> f64 {
    SIM_AREA_TOL
}
fn default_level() -> f64 {
    0.95
}
fn default_m() -> usize {
    DEFAULT_M
}
fn default_reps() -> usize {
    DEFAULT_REPS
}

/// Study configuration. Serializes to a flat TOML table, e.g.
///
/// ```toml
/// alphas = [1.0, 2.0]
/// betas = [0.5, 1.0, 5.0]
/// ns = [3, 7]
/// methods = ["generalized"]
/// reps = 2000
/// level = 0.95
/// M = 10000
/// seed = 1
/// parallelism = 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub ns: Vec<usize>,
    pub methods: Vec<Method>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses the global pool.
    #[serde(default)]
    pub parallelism: usize,
    #[serde(default = "default_wstar_reps")]
    pub wstar_reps: usize,
    /// Ceiling on `reps * M` per cell.
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_area_tol")]
    pub area_tol: f64,
}

impl SimulationConfig {
    pub fn new(alphas: Vec<f64>, betas: Vec<f64>, ns: Vec<usize>, methods: Vec<Method>) -> Self {
        Self {
            alphas,
            betas,
            ns,
            methods,
            reps: DEFAULT_REPS,
            level: 0.95,
            m: DEFAULT_M,
            seed: 0,
            parallelism: 0,
            wstar_reps: DEFAULT_WSTAR_REPS,
            budget: DEFAULT_BUDGET,
            area_tol: SIM_AREA_TOL,
        }
    }

    /// Full parameter grid for the study, at desk scale.
    pub fn default_grid(study: Study) -> Self {
        let betas = vec![0.5, 1.0, 1.2, 1.5, 2.0, 3.0, 5.0];
        match study {
            Study::Table1 => Self::new(vec![1.0, 2.0], betas, vec![3, 7, 9, 14], vec![Method::Generalized]),
            Study::Table2 => Self::new(vec![1.0, 2.0], betas, vec![3, 7, 9, 14], vec![Method::WuTseng, Method::Exact]),
            Study::Table3 => Self::new(
                vec![1.0],
                betas,
                vec![4, 6, 9, 14, 29],
                vec![Method::RegionADefault, Method::RegionB],
            ),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    pub fn validate(&self, study: Study) -> Result<()> {
        if self.reps < MIN_REPS {
            return Err(Error::Config(format!("reps must be at least {MIN_REPS}, got {}", self.reps)));
        }
        check_level(self.level)?;
        if self.alphas.is_empty() || self.betas.is_empty() || self.ns.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("alphas, betas, ns and methods must be nonempty".into()));
        }
        for &a in &self.alphas {
            check_positive("alpha", a)?;
        }
        for &b in &self.betas {
            check_positive("beta", b)?;
        }
        if self.ns.contains(&0) {
            return Err(Error::Config("every n must be at least 1".into()));
        }
        let allowed: &[fn(&Method) -> bool] = match study {
            Study::Table1 => &[|m| matches!(m, Method::Generalized)],
            Study::Table2 => &[|m| matches!(m, Method::Exact | Method::WuTseng)],
            Study::Table3 => &[|m| matches!(m, Method::RegionB | Method::RegionA(_) | Method::RegionADefault)],
        };
        if let Some(bad) = self.methods.iter().find(|m| !allowed.iter().any(|ok| ok(m))) {
            return Err(Error::Config(format!("method {bad} not valid for {study:?}")));
        }
        for m in &self.methods {
            if let Method::RegionA(j) = m {
                if let Some(n) = self.ns.iter().find(|&&n| *j > n) {
                    return Err(Error::Config(format!("A{j} undefined for n = {n}")));
                }
            }
        }
        let inner = match study {
            Study::Table1 => {
                if self.m < MIN_M {
                    return Err(Error::Config(format!("M must be at least {MIN_M}")));
                }
                self.m as u64
            }
            _ => 1,
        };
        if (self.reps as u64).saturating_mul(inner) > self.budget {
            return Err(Error::Config(format!(
                "per-cell work reps * M = {} exceeds budget {}",
                self.reps as u128 * inner as u128,
                self.budget
            )));
        }
        if study == Study::Table2 && self.methods.contains(&Method::WuTseng) && self.wstar_reps < 2 {
            return Err(Error::Config("wstar_reps must be at least 2".into()));
        }
        check_positive("area_tol", self.area_tol)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub method: Method,
    pub coverage: f64,
    pub coverage_se: f64,
    /// Mean interval length, or mean region area for joint regions.
    pub expected_size: f64,
    pub expected_size_se: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub study: Study,
    pub level: f64,
    pub seed: u64,
    pub reps: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub cells: Vec<CellResult>,
}

pub const REPORT_CSV_HEADER: &str =
    "alpha,beta,n,method,coverage,coverage_se,expected_length_or_area,its_se,reps";

impl SimulationReport {
    pub fn cell(&self, alpha: f64, beta: f64, n: usize, method: Method) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.alpha == alpha && c.beta == beta && c.n == n && c.method == method)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{REPORT_CSV_HEADER}")?;
        for c in &self.cells {
            write_cell_csv(c, &mut out)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn write_cell_csv<W: Write>(c: &CellResult, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        c.alpha, c.beta, c.n, c.method, c.coverage, c.coverage_se, c.expected_size, c.expected_size_se, c.reps
    )
}

/// Stream owned by cell `(alpha, beta, n)`.
pub fn cell_stream(seed: u64, alpha: f64, beta: f64, n: usize) -> RngStream {
    let key = splitmix64(alpha.to_bits() ^ splitmix64(beta.to_bits() ^ splitmix64(n as u64)));
    RngStream::new(seed, key)
}

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    let k = count as f64;
    let mean = xs.clone().sum::<f64>() / k;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Per-replication outcome of one method: covered flag and length/area.
type Outcome = (bool, f64);

fn summarize(alpha: f64, beta: f64, n: usize, method: Method, outcomes: &[Outcome]) -> CellResult {
    let reps = outcomes.len();
    let (coverage, coverage_se) = mean_and_se(outcomes.iter().map(|o| o.0 as u8 as f64), reps);
    let (expected_size, expected_size_se) = mean_and_se(outcomes.iter().map(|o| o.1), reps);
    CellResult {
        alpha,
        beta,
        n,
        method,
        coverage,
        coverage_se,
        expected_size,
        expected_size_se,
        reps,
    }
}

fn grid(cfg: &SimulationConfig) -> Vec<(f64, f64, usize)> {
    let mut cells = Vec::new();
    for &alpha in &cfg.alphas {
        for &n in &cfg.ns {
            for &beta in &cfg.betas {
                cells.push((alpha, beta, n));
            }
        }
    }
    cells
}

/// Runs replications `0..reps` of one cell; `per_rep` returns one outcome
/// per method in a fixed order.
fn run_cell<F>(cfg: &SimulationConfig, alpha: f64, beta: f64, n: usize, per_rep: F) -> Result<Vec<Vec<Outcome>>>
where
    F: Fn(&RecordSample, &RngStream) -> Result<Vec<Outcome>> + Sync + Send,
{
    let cell = cell_stream(cfg.seed, alpha, beta, n);
    let rows = map_indexed(cfg.reps as u64, |r| {
        let mut rep = cell.substream(r);
        let sample = simulate_records_direct(alpha, beta, n, &mut rep)?;
        per_rep(&sample, &rep)
    });
    rows.into_iter().collect()
}

fn transpose(rows: Vec<Vec<Outcome>>, methods: usize) -> Vec<Vec<Outcome>> {
    let mut cols = vec![Vec::with_capacity(rows.len()); methods];
    for row in rows {
        for (k, o) in row.into_iter().enumerate() {
            cols[k].push(o);
        }
    }
    cols
}

fn finish(study: Study, cfg: &SimulationConfig, cells: Vec<CellResult>) -> SimulationReport {
    SimulationReport {
        study,
        level: cfg.level,
        seed: cfg.seed,
        reps: cfg.reps,
        m: cfg.m,
        cells,
    }
}

pub fn run_table1(cfg: &SimulationConfig) -> Result<SimulationReport> {
    run_table1_with(cfg, &mut |_| {})
}

/// Generalized-interval study; `progress` sees each cell as it completes.
pub fn run_table1_with(cfg: &SimulationConfig, progress: &mut dyn FnMut(&CellResult)) -> Result<SimulationReport> {
    cfg.validate(Study::Table1)?;
    let mut cells = Vec::new();
    for (alpha, beta, n) in grid(cfg) {
        let rows = with_threads(cfg.parallelism, || {
            run_cell(cfg, alpha, beta, n, |sample, rep| {
                let mut draws = draw_pivotal_values(n, sample.last(), sample.log_ratio_sum(), cfg.m, rep)?;
                sort_floats(&mut draws);
                let ci = ci_from_sorted(&draws, cfg.level)?;
                Ok(vec![(ci.contains(alpha), ci.length())])
            })
        })??;
        let cell = summarize(alpha, beta, n, Method::Generalized, &transpose(rows, 1)[0]);
        progress(&cell);
        cells.push(cell);
    }
    Ok(finish(Study::Table1, cfg, cells))
}

pub fn run_table2(cfg: &SimulationConfig) -> Result<SimulationReport> {
    run_table2_with(cfg, &mut |_| {})
}

/// Shape-interval study. Both methods see the same record samples.
pub fn run_table2_with(cfg: &SimulationConfig, progress: &mut dyn FnMut(&CellResult)) -> Result<SimulationReport> {
    cfg.validate(Study::Table2)?;
    let mut methods = cfg.methods.clone();
    methods.dedup();
    let mut tables = std::collections::HashMap::new();
    if methods.contains(&Method::WuTseng) {
        for &n in &cfg.ns {
            if let std::collections::hash_map::Entry::Vacant(e) = tables.entry(n) {
                let t = with_threads(cfg.parallelism, || {
                    WStarTable::for_levels(n, &[cfg.level], cfg.wstar_reps, wstar_seed(cfg.seed))
                })??;
                e.insert(t);
            }
        }
    }
    let mut cells = Vec::new();
    for (alpha, beta, n) in grid(cfg) {
        let table = tables.get(&n);
        let rows = with_threads(cfg.parallelism, || {
            run_cell(cfg, alpha, beta, n, |sample, _| {
                methods
                    .iter()
                    .map(|m| {
                        let ci = match m {
                            Method::Exact => exact_ci_shape(sample, cfg.level)?,
                            Method::WuTseng => wu_ci_shape(sample, cfg.level, table.expect("table built"))?,
                            _ => unreachable!("validated"),
                        };
                        Ok((ci.contains(beta), ci.length()))
                    })
                    .collect()
            })
        })??;
        for (m, col) in methods.iter().zip(transpose(rows, methods.len())) {
            let cell = summarize(alpha, beta, n, *m, &col);
            progress(&cell);
            cells.push(cell);
        }
    }
    Ok(finish(Study::Table2, cfg, cells))
}

/// Seed of the shared W* tables of a shape study.
pub fn wstar_seed(seed: u64) -> u64 {
    splitmix64(seed ^ 0x5757_5757)
}

fn concrete_regions(methods: &[Method], n: usize) -> Vec<Method> {
    let mut out = Vec::new();
    for m in methods {
        match m {
            Method::RegionADefault => out.extend(default_aj_indices(n).into_iter().map(Method::RegionA)),
            other => out.push(*other),
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|m| seen.insert(*m));
    out
}

fn build_region(sample: &RecordSample, m: Method, level: f64) -> Result<JointRegion> {
    match m {
        Method::RegionB => region_b(sample, level),
        Method::RegionA(j) => region_aj(sample, j, level),
        _ => unreachable!("validated"),
    }
}

pub fn run_table3(cfg: &SimulationConfig) -> Result<SimulationReport> {
    run_table3_with(cfg, &mut |_| {})
}

/// Joint-region study. All regions see the same record samples.
pub fn run_table3_with(cfg: &SimulationConfig, progress: &mut dyn FnMut(&CellResult)) -> Result<SimulationReport> {
    cfg.validate(Study::Table3)?;
    let mut cells = Vec::new();
    for (alpha, beta, n) in grid(cfg) {
        let methods = concrete_regions(&cfg.methods, n);
        let rows = with_threads(cfg.parallelism, || {
            run_cell(cfg, alpha, beta, n, |sample, _| {
                methods
                    .iter()
                    .map(|&m| {
                        let region = build_region(sample, m, cfg.level)?;
                        let area = region.area(cfg.area_tol)?;
                        Ok((region.contains(alpha, beta), area.value))
                    })
                    .collect()
            })
        })??;
        for (m, col) in methods.iter().zip(transpose(rows, methods.len())) {
            let cell = summarize(alpha, beta, n, *m, &col);
            progress(&cell);
            cells.push(cell);
        }
    }
    Ok(finish(Study::Table3, cfg, cells))
}

pub fn run_study(study: Study, cfg: &SimulationConfig, progress: &mut dyn FnMut(&CellResult)) -> Result<SimulationReport> {
    match study {
        Study::Table1 => run_table1_with(cfg, progress),
        Study::Table2 => run_table2_with(cfg, progress),
        Study::Table3 => run_table3_with(cfg, progress),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_tags_round_trip() {
        for m in [
            Method::Generalized,
            Method::Exact,
            Method::WuTseng,
            Method::RegionB,
            Method::RegionA(3),
            Method::RegionADefault,
        ] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("A0".parse::<Method>().is_err());
        assert!("xyz".parse::<Method>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimulationConfig::new(vec![1.0], vec![1.0], vec![3], vec![Method::Generalized]);
        cfg.reps = 0;
        assert!(matches!(run_table1(&cfg), Err(Error::Config(_))));
        cfg.reps = 200;
        cfg.budget = 1_000;
        assert!(matches!(run_table1(&cfg), Err(Error::Config(_))));
        cfg.budget = DEFAULT_BUDGET;
        assert!(cfg.validate(Study::Table1).is_ok());
        assert!(cfg.validate(Study::Table2).is_err());
        let mut t3 = SimulationConfig::new(vec![1.0], vec![1.0], vec![3], vec![Method::RegionA(4)]);
        t3.reps = 200;
        assert!(t3.validate(Study::Table3).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SimulationConfig::default_grid(Study::Table3);
        let text = cfg.to_toml_string();
        assert!(text.contains("M = 10000"));
        assert_eq!(SimulationConfig::from_toml_str(&text).unwrap(), cfg);
        let minimal = "alphas = [1.0]\nbetas = [2.0]\nns = [3]\nmethods = [\"exact\", \"wu\"]\n";
        let c = SimulationConfig::from_toml_str(minimal).unwrap();
        assert_eq!(c.reps, DEFAULT_REPS);
        assert_eq!(c.methods, vec![Method::Exact, Method::WuTseng]);
        assert!(SimulationConfig::from_toml_str("alphas = [1.0]\nbogus = 1\n").is_err());
    }

    #[test]
    fn default_pair_expansion() {
        assert_eq!(
            concrete_regions(&[Method::RegionADefault, Method::RegionB], 14),
            vec![Method::RegionA(3), Method::RegionA(4), Method::RegionB]
        );
        assert_eq!(
            concrete_regions(&[Method::RegionA(1), Method::RegionADefault], 4),
            vec![Method::RegionA(1), Method::RegionA(2)]
        );
    }

    #[test]
    fn small_table3_runs_and_is_deterministic() {
        let mut cfg = SimulationConfig::new(vec![1.0], vec![1.0], vec![4], vec![Method::RegionB, Method::RegionADefault]);
        cfg.reps = 200;
        cfg.seed = 3;
        let mut seen = 0;
        let a = run_table3_with(&cfg, &mut |_| seen += 1).unwrap();
        assert_eq!(seen, 3);
        assert_eq!(a, run_table3(&cfg).unwrap());
        let mut csv = Vec::new();
        a.write_csv(&mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert_eq!(csv.lines().next(), Some(REPORT_CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
        let back: SimulationReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
    }
}

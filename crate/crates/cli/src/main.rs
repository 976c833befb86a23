//! `weibrec`: inference for Weibull parameters from upper record values.
//!
//! Exit status: 0 on success, 1 on data or numerical errors, 2 on usage and
//! configuration errors.

mod input;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use weibrec::region::{region_aj, region_b, write_boundary_csv, AREA_TOL};
use weibrec::scale::{draw_pivotal_t, generalized_ci_scale, gpv_scale, DEFAULT_M, MIN_M};
use weibrec::shape::{exact_ci_shape, exact_test_shape, wu_ci_shape, DEFAULT_WSTAR_REPS};
use weibrec::sim::{run_study, write_cell_csv, REPORT_CSV_HEADER};
use weibrec::{
    mle, Hypotheses, JointRegion, Method, RecordSample, RngStream, SimulationConfig, Study, WStarTable,
};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "weibrec", version, about = "Weibull inference from upper record values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract upper records from a raw sequence.
    Extract(DataArgs),
    /// Maximum likelihood estimates of (alpha, beta).
    Fit(RecordArgs),
    /// Confidence interval for the shape beta.
    CiShape(CiShapeArgs),
    /// Exact test on the shape beta.
    TestShape(TestShapeArgs),
    /// Generalized confidence interval for the scale alpha.
    CiScale(CiScaleArgs),
    /// Generalized p-value for the scale alpha.
    TestScale(TestScaleArgs),
    /// Joint confidence region bounds for (alpha, beta).
    Region(RegionArgs),
    /// Area of a joint confidence region.
    Area(AreaArgs),
    /// Boundary curves of a joint confidence region as CSV.
    Boundary(BoundaryArgs),
    /// Run a coverage simulation study.
    Simulate(SimulateArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Inline values, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    data: Option<String>,
    /// File of values separated by commas or newlines.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct DataArgs {
    #[command(flatten)]
    source: Source,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

impl DataArgs {
    fn numbers(&self) -> Result<Vec<f64>> {
        input::read_numbers(self.source.data.as_deref(), self.source.input.as_deref())
    }
}

#[derive(Args)]
struct RecordArgs {
    #[command(flatten)]
    src: DataArgs,
    /// Treat the input as a raw sequence and extract its records first.
    #[arg(long)]
    raw: bool,
}

impl RecordArgs {
    fn sample(&self) -> Result<RecordSample> {
        input::read_sample(self.src.source.data.as_deref(), self.src.source.input.as_deref(), self.raw)
    }
}

fn parse_level(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive and finite"))
    }
}

fn parse_draws(s: &str) -> std::result::Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("`{s}` is not an integer"))?;
    if v >= MIN_M {
        Ok(v)
    } else {
        Err(format!("M must be at least {MIN_M}"))
    }
}

#[derive(Args)]
#[group(multiple = false)]
struct Sidedness {
    /// H1: parameter > null value.
    #[arg(long)]
    one_sided: bool,
    /// H1: parameter != null value (default).
    #[arg(long)]
    two_sided: bool,
}

impl Sidedness {
    fn hypotheses(&self) -> Hypotheses {
        if self.one_sided {
            Hypotheses::OneSidedUpper
        } else {
            Hypotheses::TwoSided
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeMethod {
    Exact,
    Wu,
}

#[derive(Args)]
struct CiShapeArgs {
    #[command(flatten)]
    rec: RecordArgs,
    #[arg(long, default_value = "0.95", value_parser = parse_level)]
    level: f64,
    #[arg(long, value_enum, default_value = "exact")]
    method: ShapeMethod,
    /// Replications for the W* table (wu method).
    #[arg(long, default_value_t = DEFAULT_WSTAR_REPS)]
    reps: usize,
    /// Precomputed W* table in JSON (wu method).
    #[arg(long)]
    wstar_table: Option<PathBuf>,
    #[arg(long, env = "WEIBREC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct TestShapeArgs {
    #[command(flatten)]
    rec: RecordArgs,
    #[arg(long, value_parser = parse_positive)]
    beta0: f64,
    /// Nominal size of the test.
    #[arg(long, default_value = "0.05", value_parser = parse_level)]
    level: f64,
    #[command(flatten)]
    side: Sidedness,
}

#[derive(Args)]
struct CiScaleArgs {
    #[command(flatten)]
    rec: RecordArgs,
    #[arg(long, default_value = "0.95", value_parser = parse_level)]
    level: f64,
    #[arg(long = "M", default_value_t = DEFAULT_M, value_parser = parse_draws)]
    m: usize,
    #[arg(long, env = "WEIBREC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write the pivotal draws, one per line.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TestScaleArgs {
    #[command(flatten)]
    rec: RecordArgs,
    #[arg(long, value_parser = parse_positive)]
    alpha0: f64,
    /// Nominal size used for the reject decision.
    #[arg(long, default_value = "0.05", value_parser = parse_level)]
    level: f64,
    #[command(flatten)]
    side: Sidedness,
    #[arg(long = "M", default_value_t = DEFAULT_M, value_parser = parse_draws)]
    m: usize,
    #[arg(long, env = "WEIBREC_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionKind {
    B,
    Aj,
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    rec: RecordArgs,
    #[arg(long, default_value = "0.95", value_parser = parse_level)]
    level: f64,
    #[arg(long, value_enum, default_value = "b")]
    method: RegionKind,
    /// Record index for the A_j family.
    #[arg(long, required_if_eq("method", "aj"))]
    j: Option<usize>,
}

impl RegionArgs {
    fn region(&self) -> Result<JointRegion> {
        let s = self.rec.sample()?;
        Ok(match self.method {
            RegionKind::B => region_b(&s, self.level)?,
            RegionKind::Aj => region_aj(&s, self.j.expect("required by clap"), self.level)?,
        })
    }
}

#[derive(Args)]
struct AreaArgs {
    #[command(flatten)]
    region: RegionArgs,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = AREA_TOL, value_parser = parse_positive)]
    tol: f64,
}

#[derive(Args)]
struct BoundaryArgs {
    #[command(flatten)]
    region: RegionArgs,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(2..))]
    points: u32,
    /// Output path (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Study layout: 1 (generalized CI for alpha), 2 (exact and Wu-Tseng CI
    /// for beta) or 3 (joint regions).
    #[arg(long, value_parser = parse_study)]
    study: Study,
    /// TOML configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    /// Method tags: generalized, exact, wu, B, A<j>, A*.
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_parser = parse_level)]
    level: Option<f64>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long, env = "WEIBREC_SEED")]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    wstar_reps: Option<usize>,
    /// Ceiling on reps * M per cell.
    #[arg(long, env = "WEIBREC_BUDGET")]
    budget: Option<u64>,
    /// CSV report path, written cell by cell (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the full report as JSON on stdout.
    #[arg(long)]
    json: bool,
    /// Suppress per-cell progress on stderr.
    #[arg(long)]
    quiet: bool,
}

fn parse_study(s: &str) -> std::result::Result<Study, String> {
    s.parse().map_err(|e: weibrec::Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: weibrec::Error| e.to_string())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn fmt_values(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(a) => {
            let raw = a.numbers()?;
            let s = weibrec::extract_records(&raw)?;
            if a.json {
                print_json(&s)?;
            } else {
                println!("{}", fmt_values(s.values()));
            }
        }
        Command::Fit(a) => {
            let s = a.sample()?;
            let est = mle(&s)?;
            if a.src.json {
                print_json(&est)?;
            } else {
                println!("n = {} ({} records)", s.n(), s.n() + 1);
                println!("beta_hat  = {:.6}", est.beta_hat);
                println!("alpha_hat = {:.6}", est.alpha_hat);
            }
        }
        Command::CiShape(a) => {
            let s = a.rec.sample()?;
            let ci = match a.method {
                ShapeMethod::Exact => exact_ci_shape(&s, a.level)?,
                ShapeMethod::Wu => {
                    let table = match &a.wstar_table {
                        Some(p) => WStarTable::load(p)?,
                        None => WStarTable::for_levels(s.n(), &[a.level], a.reps, a.seed)?,
                    };
                    wu_ci_shape(&s, a.level, &table)?
                }
            };
            if a.rec.src.json {
                print_json(&ci)?;
            } else {
                println!("{} {}% CI for beta: ({:.4}, {:.4})", ci.method, 100.0 * ci.level, ci.lower, ci.upper);
            }
        }
        Command::TestShape(a) => {
            let s = a.rec.sample()?;
            let t = exact_test_shape(&s, a.beta0, a.level, a.side.hypotheses())?;
            if a.rec.src.json {
                print_json(&t)?;
            } else {
                println!("U0 = {:.6}", t.statistic);
                println!("p-value = {:.6}", t.p_value.unwrap_or(f64::NAN));
                println!("{} H0: beta = {} at size {}", if t.reject { "reject" } else { "do not reject" }, a.beta0, a.level);
            }
        }
        Command::CiScale(a) => {
            let s = a.rec.sample()?;
            let draws = draw_pivotal_t(&s, a.m, &RngStream::new(a.seed, 0))?;
            let ci = generalized_ci_scale(&draws, a.level)?;
            if let Some(p) = &a.out {
                let mut w = output(Some(p))?;
                draws.write_csv(&mut w)?;
                w.flush()?;
            }
            if a.rec.src.json {
                print_json(&ci)?;
            } else {
                println!(
                    "generalized {}% CI for alpha: ({:.4}, {:.4})  [M = {}, seed = {}]",
                    100.0 * ci.level,
                    ci.lower,
                    ci.upper,
                    a.m,
                    a.seed
                );
            }
        }
        Command::TestScale(a) => {
            let s = a.rec.sample()?;
            let draws = draw_pivotal_t(&s, a.m, &RngStream::new(a.seed, 0))?;
            let g = gpv_scale(&draws, a.alpha0, a.side.hypotheses())?;
            if a.rec.src.json {
                print_json(&g)?;
            } else {
                println!("generalized p-value = {:.4} (MC se {:.4}, M = {}, seed = {})", g.p_value, g.mc_se, g.m, a.seed);
                let reject = g.p_value < a.level;
                println!("{} H0: alpha = {} at size {}", if reject { "reject" } else { "do not reject" }, a.alpha0, a.level);
            }
        }
        Command::Region(a) => {
            let r = a.region()?;
            if a.rec.src.json {
                print_json(&r)?;
            } else {
                println!("region {} at level {}", r.method, r.level);
                println!("beta  in ({:.4}, {:.4})", r.beta_lower, r.beta_upper);
                println!(
                    "alpha in (r_n * m_lo^(1/beta), r_n * m_hi^(1/beta)), r_n = {}, m_lo = {:.4}, m_hi = {:.4}",
                    r.r_n, r.m_lo, r.m_hi
                );
            }
        }
        Command::Area(a) => {
            let r = a.region.region()?;
            let area = r.area(a.tol)?;
            if a.region.rec.src.json {
                print_json(&area)?;
            } else {
                println!(
                    "area of {} = {:.4} (abs tolerance {}, {} evaluations)",
                    r.method, area.value, area.abs_tolerance, area.evaluations
                );
            }
        }
        Command::Boundary(a) => {
            let r = a.region.region()?;
            let rows = r.boundary_polyline(a.points as usize)?;
            let mut w = output(a.out.as_deref())?;
            if a.region.rec.src.json {
                writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?;
            } else {
                write_boundary_csv(&rows, &mut w)?;
            }
            w.flush()?;
        }
        Command::Simulate(a) => simulate(a)?,
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => SimulationConfig::load(p)?,
        None => SimulationConfig::default_grid(a.study),
    };
    if a.config.is_none() {
        cfg.seed = DEFAULT_SEED;
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = a.$field.clone() { cfg.$field = v; } )* };
    }
    set!(alphas, betas, ns, methods, reps, level, m, seed, parallelism, wstar_reps, budget);
    cfg.validate(a.study)?;

    let mut csv = match (&a.out, a.json) {
        (None, true) => None,
        (path, _) => Some(output(path.as_deref())?),
    };
    if let Some(w) = csv.as_mut() {
        writeln!(w, "{REPORT_CSV_HEADER}")?;
        w.flush()?;
    }
    let mut io_err = None;
    let report = run_study(a.study, &cfg, &mut |cell| {
        if !a.quiet {
            eprintln!(
                "done: alpha={} beta={} n={} {} coverage={:.4} size={:.4}",
                cell.alpha, cell.beta, cell.n, cell.method, cell.coverage, cell.expected_size
            );
        }
        if let Some(w) = csv.as_mut() {
            if let Err(e) = write_cell_csv(cell, &mut *w).and_then(|_| w.flush()) {
                io_err.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = io_err {
        return Err(e).context("writing report");
    }
    if a.json {
        println!("{}", report.to_json());
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<weibrec::Error>() {
        Some(weibrec::Error::Config(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

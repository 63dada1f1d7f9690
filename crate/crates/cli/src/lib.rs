//! Front end for the `coupon` binary: argument parsing, dispatch, and
//! emission of CSV rows plus a JSON sidecar.

pub mod error;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use coupon_core::coupling::SimConfig;
use coupon_core::error::CouponError;
use coupon_core::params::CollectorParams;

use crate::error::{CliError, CliResult};
use crate::experiments::{Engine, Lemma, MRule, Target};
use crate::output::{write_rows, write_sidecar, Row, Sidecar};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "COUPON_THREADS";

#[derive(Debug, Parser, Serialize)]
#[command(name = "coupon", version, about = "Coupon collector waiting-time laboratory")]
pub struct Cli {
    /// CSV destination; a `<out>.json` sidecar is written next to it.
    /// Without it the CSV goes to stdout and no sidecar is written.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Fill the `runtime_ms` column. Makes the CSV non-reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Worker threads; defaults to $COUPON_THREADS, then to the core count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Mean, variance and the cumulant sums.
    Moments(MomentsArgs),
    /// Exact probability mass function of W.
    Pmf(PmfArgs),
    /// Measured distance to an approximating law, with its bound.
    Distance(DistanceArgs),
    /// Every bound and structural inequality at one (n, m).
    Bounds(BoundsArgs),
    /// Monte Carlo coupling experiments.
    Couple(CoupleArgs),
    /// Distances over a grid of n with m derived by a rule.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct NmArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub m: u64,
}

impl NmArgs {
    fn params(&self) -> CliResult<CollectorParams> {
        Ok(CollectorParams::new(self.n, self.m)?)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub nm: NmArgs,
    /// Highest j for a_{n,j} and lambda_{n,j}.
    #[arg(long, default_value_t = 4)]
    pub j: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PmfArgs {
    #[command(flatten)]
    pub nm: NmArgs,
    #[arg(long, value_enum, default_value_t = Engine::Convolution)]
    pub engine: Engine,
    /// Last value of W to emit.
    #[arg(long)]
    pub t_max: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = SimConfig::DEFAULT_TRIALS)]
    pub trials: u64,
}

impl SimArgs {
    fn config(&self) -> CliResult<SimConfig> {
        Ok(SimConfig::new(self.seed, self.trials)?)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub nm: NmArgs,
    #[arg(long, value_enum)]
    pub target: Target,
    /// Expansion order R for the Poisson–Charlier target.
    #[arg(long = "order", default_value_t = 3)]
    pub order: usize,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub nm: NmArgs,
    #[arg(long = "order", default_value_t = 3)]
    pub order: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CoupleArgs {
    #[arg(long, value_enum)]
    pub lemma: Lemma,
    /// Half-width: uniforms live on 1..=2l.
    #[arg(long)]
    pub l: Option<u64>,
    /// Number of steps.
    #[arg(long)]
    pub r: Option<u64>,
    #[arg(long, requires = "m")]
    pub n: Option<u64>,
    #[arg(long, requires = "n")]
    pub m: Option<u64>,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Comma-separated values of n.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub n_values: Vec<u64>,
    /// fixed:M, ratio:R, poisson:L or offset:C.
    #[arg(long)]
    pub m_rule: MRule,
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub targets: Vec<Target>,
    /// Keep only rows whose metric is listed.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    #[arg(long = "order", default_value_t = 3)]
    pub order: usize,
    #[command(flatten)]
    pub sim: SimArgs,
}

fn configure_threads(requested: Option<usize>) -> usize {
    let from_env = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok());
    if let Some(threads) = requested.or(from_env).filter(|&t| t > 0) {
        // A second build in the same process is refused; the first one wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    rayon::current_num_threads()
}

/// Runs `f`, stamping its rows with the elapsed time when timing is on.
fn timed<F: FnOnce() -> coupon_core::error::Result<Vec<Row>>>(timing: bool, f: F) -> coupon_core::error::Result<Vec<Row>> {
    let start = Instant::now();
    let mut rows = f()?;
    if timing {
        let ms = start.elapsed().as_secs_f64() * 1e3;
        rows.iter_mut().for_each(|r| r.runtime_ms = Some(ms));
    }
    Ok(rows)
}

fn sweep_rows(args: &SweepArgs, timing: bool) -> CliResult<Vec<Row>> {
    if args.n_values.is_empty() {
        return Err(CliError::Args("--n-values must list at least one n".into()));
    }
    let grid = args
        .n_values
        .iter()
        .map(|&n| args.m_rule.apply(n))
        .collect::<coupon_core::error::Result<Vec<_>>>()?;
    let sim = args.sim.config()?;
    let jobs: Vec<(CollectorParams, Target)> =
        grid.iter().flat_map(|&p| args.targets.iter().map(move |&t| (p, t))).collect();
    let results: Vec<CliResult<Vec<Row>>> = jobs
        .par_iter()
        .map(|&(p, target)| {
            match timed(timing, || experiments::distance_rows(p, target, args.order, sim)) {
                Ok(rows) => Ok(rows),
                Err(e @ (CouponError::Precondition(_) | CouponError::RegimeBoundary(_))) => {
                    let mut row = Row::new(Some(p.n()), Some(p.m()), target.as_str(), p.regime().as_str(), "refused", f64::NAN);
                    row.preconditions_met = false;
                    row.reasons = e.to_string();
                    Ok(vec![row])
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    if !args.metrics.is_empty() {
        rows.retain(|r| args.metrics.contains(&r.metric) || !r.preconditions_met && r.value.is_nan());
    }
    Ok(rows)
}

fn rows_for(cli: &Cli) -> CliResult<(Vec<Row>, Option<u64>)> {
    let timing = cli.timing;
    let rows = match &cli.command {
        Command::Moments(a) => {
            let p = a.nm.params()?;
            (timed(timing, || experiments::moment_rows(p, a.j))?, None)
        }
        Command::Pmf(a) => {
            let p = a.nm.params()?;
            (timed(timing, || experiments::pmf_rows(p, a.engine, a.t_max))?, None)
        }
        Command::Distance(a) => {
            let p = a.nm.params()?;
            let sim = a.sim.config()?;
            let seed = (a.target == Target::Embedding).then_some(a.sim.seed);
            (timed(timing, || experiments::distance_rows(p, a.target, a.order, sim))?, seed)
        }
        Command::Bounds(a) => {
            let p = a.nm.params()?;
            (timed(timing, || experiments::bound_rows(p, a.order))?, None)
        }
        Command::Couple(a) => {
            let params = match (a.n, a.m) {
                (Some(n), Some(m)) => Some(CollectorParams::new(n, m)?),
                _ => None,
            };
            let sim = a.sim.config()?;
            (timed(timing, || experiments::couple_rows(a.lemma, a.l, a.r, params, sim))?, Some(a.sim.seed))
        }
        Command::Sweep(a) => (sweep_rows(a, timing)?, Some(a.sim.seed)),
    };
    Ok(rows)
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Moments(_) => "moments",
        Command::Pmf(_) => "pmf",
        Command::Distance(_) => "distance",
        Command::Bounds(_) => "bounds",
        Command::Couple(_) => "couple",
        Command::Sweep(_) => "sweep",
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Exit status 2 is reserved for rows measured against a bound whose
/// preconditions fail, and for rows standing in for refused inputs.
fn violated(rows: &[Row]) -> usize {
    rows.iter()
        .filter(|r| !r.preconditions_met && (r.bound.is_some() && r.target != "structural" || r.value.is_nan()))
        .count()
}

pub fn execute(cli: &Cli) -> CliResult<i32> {
    let start = Instant::now();
    let threads = configure_threads(cli.threads);
    let (rows, seed) = rows_for(cli)?;
    match &cli.out {
        Some(path) => {
            write_rows(std::fs::File::create(path)?, &rows)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_rows(&mut lock, &rows)?;
            lock.flush()?;
        }
    }
    let violations = violated(&rows);
    if let Some(path) = &cli.out {
        let sidecar = Sidecar {
            tool: "coupon",
            version: env!("CARGO_PKG_VERSION"),
            command: command_name(&cli.command),
            config: cli,
            seed,
            threads,
            rows: rows.len(),
            preconditions_violated: violations,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        write_sidecar(&sidecar_path(path), &sidecar)?;
    }
    if violations > 0 {
        eprintln!("coupon: {violations} row(s) violate the bound's preconditions");
        return Ok(2);
    }
    Ok(0)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("coupon: {e}");
            e.exit_code()
        }
    }
}

//! Command-line front end: argument parsing, batch orchestration, CSV and
//! summary output.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

use crate::packet_set::MAX_PACKETS;
use crate::scenario_file;
use crate::sim::{run_batch, BatchRow, ScenarioTemplate, SimOptions, Strategy};

pub const SEED_ENV: &str = "O2ONC_SEED";
pub const DEFAULT_MASTER_SEED: u64 = 1;
pub const CSV_HEADER: [&str; 8] = [
    "scheduler",
    "seed",
    "M",
    "N",
    "eps_mean",
    "completion_time",
    "beneficial_total",
    "oracle_divergences",
];

#[derive(Debug)]
pub enum CliError {
    /// `--help` or `--version`; the text goes to stdout with exit 0.
    Info(String),
    Usage(String),
    Validation {
        field: &'static str,
        message: String,
    },
    Io(String),
    Run(crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Info(_) => 0,
            Self::Run(_) => 1,
            Self::Usage(_) => 2,
            Self::Validation { .. } => 3,
            Self::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Info(s) | Self::Usage(s) => f.write_str(s.trim_end()),
            Self::Validation { field, message } => write!(f, "invalid --{field}: {message}"),
            Self::Io(s) => write!(f, "I/O error: {s}"),
            Self::Run(e) => write!(f, "simulation failed: {e}"),
        }
    }
}

fn validation(field: &'static str, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field,
        message: message.into(),
    }
}

/// Completion-time experiments for order-2 opportunistic network coding
/// and instantly decodable network coding over broadcast erasure channels.
#[derive(Parser, Debug)]
#[command(name = "o2onc", version)]
struct Args {
    /// Receiver counts M; a list sweeps over each value.
    #[arg(long, value_delimiter = ',', default_value = "60")]
    receivers: Vec<usize>,
    /// Frame size N.
    #[arg(long, default_value_t = 30)]
    packets: usize,
    /// Mean erasure probabilities; a list sweeps over each value.
    #[arg(long = "eps-mean", value_delimiter = ',', default_value = "0.15")]
    eps_mean: Vec<f64>,
    /// Per-receiver erasure probabilities are uniform within mean ± spread.
    #[arg(long = "eps-spread", default_value_t = 0.1)]
    eps_spread: f64,
    /// Probability that a receiver initially holds a given packet.
    #[arg(long = "has-prob", default_value_t = 0.5)]
    has_prob: f64,
    /// Number of seeds, counted up from the master seed.
    #[arg(long, default_value_t = 100, conflicts_with = "seed_list")]
    seeds: usize,
    /// Explicit seed list.
    #[arg(long = "seed-list", value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Master seed; overrides the O2ONC_SEED environment variable.
    #[arg(long)]
    seed: Option<u64>,
    /// Strategies: idnc-exact, idnc-greedy, o2onc-exact, o2onc-greedy, optimal-lb.
    #[arg(long, value_delimiter = ',')]
    schedulers: Option<Vec<Strategy>>,
    /// Scenario file with fixed Has sets and erasure probabilities.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// CSV destination; without it the CSV goes to stdout and summaries to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Audit every reception with GF(2^8) equations.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub receivers: Vec<usize>,
    pub packets: usize,
    pub eps_mean: Vec<f64>,
    pub eps_spread: f64,
    pub has_prob: f64,
    pub seeds: Vec<u64>,
    pub schedulers: Vec<Strategy>,
    pub scenario_path: Option<PathBuf>,
    pub out_path: Option<PathBuf>,
    pub oracle: bool,
}

/// Parses `argv` (including the program name). `env_seed` is the value of
/// [`SEED_ENV`], if set.
pub fn parse_args<I, T>(argv: I, env_seed: Option<&str>) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    })?;

    let master = match (args.seed, env_seed) {
        (Some(s), _) => s,
        (None, Some(v)) => v.trim().parse().map_err(|_| {
            validation(
                "seed",
                format!("{SEED_ENV}='{v}' is not an unsigned integer"),
            )
        })?,
        (None, None) => DEFAULT_MASTER_SEED,
    };
    let seeds = match args.seed_list {
        Some(list) => list,
        None => (0..args.seeds as u64)
            .map(|k| master.wrapping_add(k))
            .collect(),
    };

    let mut receivers = args.receivers;
    receivers.sort_unstable();
    receivers.dedup();
    let mut eps_mean = args.eps_mean;
    eps_mean.sort_by(f64::total_cmp);
    eps_mean.dedup();

    let cfg = RunConfig {
        receivers,
        packets: args.packets,
        eps_mean,
        eps_spread: args.eps_spread,
        has_prob: args.has_prob,
        seeds,
        schedulers: args.schedulers.unwrap_or_else(|| Strategy::ALL.to_vec()),
        scenario_path: args.scenario,
        out_path: args.out,
        oracle: args.oracle,
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.receivers.is_empty() || self.receivers.contains(&0) {
            return Err(validation(
                "receivers",
                "every receiver count must be at least 1",
            ));
        }
        if !(1..=MAX_PACKETS).contains(&self.packets) {
            return Err(validation(
                "packets",
                format!("must be between 1 and {MAX_PACKETS}"),
            ));
        }
        if let Some(e) = self.eps_mean.iter().find(|e| !(0.0..1.0).contains(*e)) {
            return Err(validation("eps-mean", format!("{e} is outside [0, 1)")));
        }
        if !(self.eps_spread >= 0.0 && self.eps_spread.is_finite()) {
            return Err(validation("eps-spread", "must be a nonnegative number"));
        }
        if !(0.0..=1.0).contains(&self.has_prob) {
            return Err(validation(
                "has-prob",
                format!("{} is outside [0, 1]", self.has_prob),
            ));
        }
        if self.seeds.is_empty() {
            return Err(validation("seeds", "at least one seed is required"));
        }
        if self.schedulers.is_empty() {
            return Err(validation(
                "schedulers",
                "at least one scheduler is required",
            ));
        }
        Ok(())
    }

    fn templates(&self) -> Result<Vec<ScenarioTemplate>, CliError> {
        if let Some(path) = &self.scenario_path {
            let scenario = scenario_file::load(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
                .map_err(|e| validation("scenario", e.to_string()))?;
            return Ok(vec![ScenarioTemplate::from_scenario(&scenario)]);
        }
        let mut out = Vec::new();
        for &m in &self.receivers {
            for &eps in &self.eps_mean {
                out.push(ScenarioTemplate {
                    eps_spread: self.eps_spread,
                    has_prob: self.has_prob,
                    ..ScenarioTemplate::new(m, self.packets, eps)
                });
            }
        }
        Ok(out)
    }

    /// Runs every sweep point, ordered by M, then mean erasure probability.
    pub fn execute(&self) -> Result<Vec<BatchRow>, CliError> {
        let opts = SimOptions {
            oracle: self.oracle,
            ..SimOptions::default()
        };
        let mut rows = Vec::new();
        for t in self.templates()? {
            rows.extend(
                run_batch(&t, &self.seeds, &self.schedulers, &opts).map_err(CliError::Run)?,
            );
        }
        Ok(rows)
    }
}

/// Writes the CSV rows.
pub fn write_csv<W: Write>(rows: &[BatchRow], out: W) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.strategy.name().to_string(),
            r.seed.to_string(),
            r.receivers.to_string(),
            r.packets.to_string(),
            r.eps_mean.to_string(),
            r.completion_time.to_string(),
            r.beneficial_total.to_string(),
            r.oracle_divergences.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub strategy: Strategy,
    pub receivers: usize,
    pub packets: usize,
    pub eps_mean: f64,
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub ci95: f64,
}

/// Per-(M, N, eps_mean, scheduler) statistics over completion times, in
/// first-appearance order.
pub fn summarize(rows: &[BatchRow]) -> Vec<Summary> {
    type Key = (Strategy, usize, usize, f64);
    let mut groups: Vec<(Key, Vec<f64>)> = Vec::new();
    for r in rows {
        let key = (r.strategy, r.receivers, r.packets, r.eps_mean);
        let x = f64::from(r.completion_time);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(x),
            None => groups.push((key, vec![x])),
        }
    }
    groups
        .into_iter()
        .map(|((strategy, receivers, packets, eps_mean), v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = if v.len() > 1 {
                v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let stddev = var.sqrt();
            Summary {
                strategy,
                receivers,
                packets,
                eps_mean,
                count: v.len(),
                mean,
                stddev,
                ci95: 1.96 * stddev / n.sqrt(),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(rows: &[BatchRow], mut out: W) -> std::io::Result<()> {
    let mut last = None;
    for s in summarize(rows) {
        let group = (s.receivers, s.packets, s.eps_mean);
        if last != Some(group) {
            writeln!(
                out,
                "M={} N={} eps_mean={}",
                s.receivers, s.packets, s.eps_mean
            )?;
            last = Some(group);
        }
        writeln!(
            out,
            "  {:<13} n={:<4} mean={:.3} stddev={:.3} ci95=[{:.3}, {:.3}]",
            s.strategy.name(),
            s.count,
            s.mean,
            s.stddev,
            s.mean - s.ci95,
            s.mean + s.ci95
        )?;
    }
    Ok(())
}

/// Writes the CSV to `out_path` (or `stdout` when absent) and summaries to
/// `stdout` (or `stderr` when the CSV took stdout).
pub fn emit_results<O: Write, E: Write>(
    rows: &[BatchRow],
    out_path: Option<&Path>,
    stdout: O,
    stderr: E,
) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::Run(crate::Error::Precondition(
            "no rows to emit".into(),
        )));
    }
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match out_path {
        Some(p) => {
            let f = std::fs::File::create(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            write_csv(rows, std::io::BufWriter::new(f))?;
            write_summary(rows, stdout).map_err(io)
        }
        None => {
            write_csv(rows, stdout)?;
            write_summary(rows, stderr).map_err(io)
        }
    }
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T, O, E>(argv: I, env_seed: Option<&str>, mut stdout: O, mut stderr: E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    O: Write,
    E: Write,
{
    let result = parse_args(argv, env_seed).and_then(|cfg| {
        let rows = cfg.execute()?;
        emit_results(&rows, cfg.out_path.as_deref(), &mut stdout, &mut stderr)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = match &e {
                CliError::Info(_) => writeln!(stdout, "{e}"),
                _ => writeln!(stderr, "o2onc: {e}"),
            };
            e.exit_code()
        }
    }
}

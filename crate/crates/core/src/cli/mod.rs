//! Command-line front end. [`run`] takes the argument vector and output
//! streams so it can be driven in-process.

mod serialize;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

pub use serialize::{serialize_graph, GraphFormat};

use crate::error::{Error, Result};
use crate::events::detect_all_events;
use crate::geometry::TrajectorySet;
use crate::ingest::{self, FileFormat};
use crate::metrics::{
    self, compare_cohorts, compute_metrics, read_reports_csv, write_reports_csv, MetricsReport,
};
use crate::reeb::build_reeb;

#[derive(Debug, Parser)]
#[command(
    name = "tractreeb",
    version,
    about = "Reeb graphs of epsilon-grouping structure for 3D trajectories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the Reeb graph (JSON unless --graphml or --dot).
    Build(BuildArgs),
    /// Compute graph metrics for one epsilon.
    Metrics(MetricsArgs),
    /// Metrics over a range of epsilon values, as CSV.
    Sweep(SweepArgs),
    /// Compare two cohorts of report CSVs, per epsilon.
    Compare(CompareArgs),
    /// Dump the event schedule as JSON lines.
    ExportSchedule(ScheduleArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Trajectory file (.tck, .csv or .json).
    #[arg(long)]
    input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<FileFormat>,
    /// Resample every trajectory to this arc-length spacing.
    #[arg(long, value_name = "DELTA")]
    resample: Option<f64>,
    /// Flip trajectories to agree in direction with the first one.
    #[arg(long)]
    orient_align: bool,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, conflicts_with = "dot")]
    graphml: bool,
    #[arg(long)]
    dot: bool,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write a one-row report CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Inclusive range `start:stop:step`.
    #[arg(long, value_name = "A:B:STEP")]
    epsilon_range: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Report CSV of the first cohort.
    cohort_a: PathBuf,
    /// Report CSV of the second cohort.
    cohort_b: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Run one command. Returns the process exit code: 0 on success, 1 on an
/// input error, 2 on an internal contract violation.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "tractreeb: {}", line.trim_start_matches("error: "));
            return 1;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "tractreeb: {}", e.to_string().replace('\n', " "));
            match e {
                Error::Contract(_) => 2,
                _ => 1,
            }
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Build(a) => {
            let set = load(&a.input)?;
            let graph = build_reeb(&set, a.epsilon)?;
            let format = if a.graphml {
                GraphFormat::GraphMl
            } else if a.dot {
                GraphFormat::Dot
            } else {
                GraphFormat::Json
            };
            emit(
                a.output.as_deref(),
                &serialize_graph(&graph, format)?,
                stdout,
            )
        }
        Command::Metrics(a) => {
            let set = load(&a.input)?;
            let graph = build_reeb(&set, a.epsilon)?;
            let mut report = compute_metrics(&graph)?;
            report.metadata.extend(graph.metadata);
            let bytes = if a.csv {
                let mut buf = Vec::new();
                write_reports_csv(&mut buf, &[report])?;
                buf
            } else {
                let mut s = serde_json::to_string_pretty(&report)?;
                s.push('\n');
                s.into_bytes()
            };
            emit(a.output.as_deref(), &bytes, stdout)
        }
        Command::Sweep(a) => {
            let epsilons = parse_range(&a.epsilon_range)?;
            let set = load(&a.input)?;
            let reports = metrics::sweep(&set, &epsilons)?;
            let mut buf = Vec::new();
            write_reports_csv(&mut buf, &reports)?;
            emit(a.output.as_deref(), &buf, stdout)
        }
        Command::Compare(a) => {
            let ca = read_reports_csv(read(&a.cohort_a)?.as_slice())?;
            let cb = read_reports_csv(read(&a.cohort_b)?.as_slice())?;
            let comparisons = compare_by_epsilon(&ca, &cb)?;
            let mut s = serde_json::to_string_pretty(&comparisons)?;
            s.push('\n');
            emit(a.output.as_deref(), s.as_bytes(), stdout)
        }
        Command::ExportSchedule(a) => {
            let set = load(&a.input)?;
            let schedule = detect_all_events(&set, a.epsilon)?;
            emit(
                a.output.as_deref(),
                schedule.to_json_lines().as_bytes(),
                stdout,
            )
        }
    }
}

fn load(a: &InputArgs) -> Result<TrajectorySet> {
    let bytes = read(&a.input)?;
    let format = match a.format {
        Some(f) => f,
        None => FileFormat::from_path(&a.input).ok_or_else(|| {
            Error::Unsupported(format!(
                "cannot infer format of {}; pass --format",
                a.input.display()
            ))
        })?,
    };
    let mut set = ingest::parse(&bytes, format)?;
    if let Some(delta) = a.resample {
        set = ingest::resample_set(&set, delta)?;
    }
    if a.orient_align {
        set = ingest::orient_align(&set)?;
    }
    set.metadata.insert(
        "input_sha256".into(),
        format!("{:x}", Sha256::digest(&bytes)),
    );
    Ok(set)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn emit(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

/// Values `a, a + step, …` up to and including `b`.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("epsilon range `{spec}` is not start:stop:step"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [a, b, step] = parts[..] else {
        return Err(bad());
    };
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

/// One comparison per ε present in both cohorts; the ε sets must agree.
fn compare_by_epsilon(
    a: &[MetricsReport],
    b: &[MetricsReport],
) -> Result<Vec<metrics::CohortComparison>> {
    let epsilons = |c: &[MetricsReport]| {
        let mut e: Vec<f64> = c.iter().map(|r| r.epsilon).collect();
        e.sort_by(f64::total_cmp);
        e.dedup();
        e
    };
    let (ea, eb) = (epsilons(a), epsilons(b));
    if ea != eb {
        let missing = ea
            .iter()
            .zip(&eb)
            .find(|(x, y)| x != y)
            .map(|(x, y)| (*x, *y))
            .unwrap_or((
                ea.last().copied().unwrap_or(f64::NAN),
                eb.last().copied().unwrap_or(f64::NAN),
            ));
        return Err(Error::EpsilonMismatch(missing.0, missing.1));
    }
    ea.iter()
        .map(|&e| {
            let pick = |c: &[MetricsReport]| {
                c.iter()
                    .filter(|r| r.epsilon == e)
                    .cloned()
                    .collect::<Vec<_>>()
            };
            compare_cohorts(&pick(a), &pick(b))
        })
        .collect()
}

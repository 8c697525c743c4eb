//! `measure-bench`: generate reference partitions, transform and score
//! them, run the full parameter sweep and analyse its scores.

mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use measure_bench_core::regression::Parameter;
use measure_bench_core::{MeasureKind, TransformKind};

use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "measure-bench",
    version,
    about = "Parametric benchmark for partition-comparison measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the reference partition for (n, k, h).
    Generate(PointArgs),
    /// Apply a transformation to the reference partition and print it.
    Transform(PointArgs),
    /// Score one (reference, transformed) pair with every measure.
    Score(PointArgs),
    /// Evaluate the whole grid and write the score table.
    Sweep(SweepArgs),
    /// Fit the regression and write importance, trend and significance tables.
    Analyze(AnalyzeArgs),
    /// Cluster the importance profiles of the (measure, transformation) cells.
    Typology(TypologyArgs),
    /// Render charts from the tables in a directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct PointArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    t: Option<TransformKind>,
    #[arg(long)]
    q: Option<f64>,
    /// Comma-separated measure names (RI, ARI, JI, FMI, F, NMI).
    #[arg(long, value_delimiter = ',')]
    measures: Vec<MeasureKind>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Use the built-in default grid, ignoring any configuration file.
    #[arg(long, conflicts_with_all = ["config", "n", "k", "h", "q", "t", "measures"])]
    default: bool,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    h: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    t: Vec<TransformKind>,
    #[arg(long, value_delimiter = ',')]
    measures: Vec<MeasureKind>,
    /// Worker threads; 0 uses all available cores.
    #[arg(long, env = "MEASURE_BENCH_WORKERS")]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Score table written by `sweep`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TypologyArgs {
    /// Importance table written by `analyze`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Pick the smallest k whose silhouette is within this margin of the best.
    #[arg(long)]
    parsimony_margin: Option<f64>,
    /// Export the solution with this many clusters instead of the selected one.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory holding the CSV tables.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Transformation of the score line plot; the plot is drawn only when given.
    #[arg(long)]
    t: Option<TransformKind>,
    /// Horizontal axis of the score line plot.
    #[arg(long, default_value = "q")]
    x: Parameter,
    /// Draw one line per value of this parameter.
    #[arg(long)]
    series: Option<Parameter>,
    #[arg(long, value_delimiter = ',')]
    measures: Vec<MeasureKind>,
    /// Pinned parameter values of the score line plot, e.g. `n=3240`.
    #[arg(long, value_parser = parse_fixed)]
    fixed: Vec<(Parameter, f64)>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_fixed(s: &str) -> Result<(Parameter, f64), String> {
    let (p, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected param=value, got {s:?}"))?;
    let p: Parameter = p.parse().map_err(|e| format!("{e}"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse value {v:?}"))?;
    Ok((p, v))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Transform(a) => commands::transform(&a),
        Command::Score(a) => commands::score(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Typology(a) => commands::typology(&a),
        Command::Report(a) => commands::report(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

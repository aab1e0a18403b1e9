//! The `gmopg` command-line tool: fitting, evaluation, sampling, simulation
//! studies and TTT summaries with JSON reports.

pub mod commands;
pub mod data;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] gmopg::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "gmopg",
    version,
    about = "GMOP-G lifetime distributions: fit, evaluate, sample, simulate"
)]
pub struct Cli {
    /// Seed for every random choice (starts, samples, replicates).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit models to a lifetime data file and rank them by AIC.
    Fit(FitArgs),
    /// Evaluate pdf, cdf, survival and hazard on a grid.
    Eval(EvalArgs),
    /// Draw a random sample, one value per line.
    Sample(SampleArgs),
    /// Monte Carlo bias/MSE study of the maximum-likelihood estimators.
    Simulate(SimulateArgs),
    /// Scaled TTT curve and five-number summary of a data file.
    Ttt(TttArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Baseline rate.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Weibull shape; omit for the exponential baseline.
    #[arg(long)]
    pub shape: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the plot-data blocks as CSV sections.
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    pub data: PathBuf,
    /// Comma-separated model tags.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "exp,me,p-e,mo-e,gmo-e,mop-e,gmop-e"
    )]
    pub models: Vec<String>,
    /// Latin-hypercube starts per model.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    /// Check the data against the guinea-pig summary before fitting.
    #[arg(long)]
    pub expect_table3: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// start:end:points; defaults to 0 up to the 0.999 quantile with 201 points.
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 8.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long)]
    pub shape: Option<f64>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', conflicts_with = "full_grid")]
    pub ns: Option<Vec<usize>>,
    /// Use n = 5, 10, ..., 80.
    #[arg(long)]
    pub full_grid: bool,
    #[arg(long, default_value_t = gmopg::simulation::DEFAULT_REPLICATES)]
    pub replicates: usize,
    /// Replace every estimate by the truth (checks the aggregation).
    #[arg(long)]
    pub diagnostic_truth: bool,
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TttArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses arguments and runs one command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let echo: Vec<String> = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match commands::dispatch(&cli, &echo) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

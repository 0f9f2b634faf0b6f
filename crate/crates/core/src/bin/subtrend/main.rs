//! Command-line front end: trend test, simulation studies and the exact
//! count distribution diagnostic.

mod commands;
mod manifest;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use subtrend::{Error, LocationFamily, ShiftConstruction, TieMode, TieScope};

use crate::commands::Run;
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(
    name = "subtrend",
    version,
    about = "Compare sequential trends of two groups across ordered sub-samples"
)]
struct Cli {
    /// Worker threads for replicate evaluation (default: one per core)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write a run manifest (JSON) for later `replay`
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bootstrap test on a measurement CSV or a frequency table
    Test(TestArgs),
    /// Type-I error study under a shared trend
    Type1(SimArgs),
    /// Power study, or a single fixed-table test with `--table`
    Power(PowerArgs),
    /// Distribution of one pairwise count from the deletion recurrence
    Exact(ExactArgs),
    /// Re-run a manifest and check the report is unchanged
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TableInput {
    /// Frequency table CSV: one row per group, alternating O and total − O
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Sub-sample sizes of group x behind the table, comma-separated
    #[arg(long, value_delimiter = ',', requires = "table")]
    pub sizes_x: Vec<usize>,
    /// Sub-sample sizes of group y behind the table, comma-separated
    #[arg(long, value_delimiter = ',', requires = "table")]
    pub sizes_y: Vec<usize>,
    /// Same size at every level of both groups (shorthand for the two above)
    #[arg(long, requires = "table", conflicts_with_all = ["sizes_x", "sizes_y"])]
    pub size: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TieArgs {
    /// Tie scoring: expected_half or random_coin
    #[arg(long, default_value_t = TieMode::default())]
    pub ties: TieMode,
    /// Ties the scoring applies to: all_exact_ties or zero_zero_pairs
    #[arg(long, default_value_t = TieScope::default())]
    pub tie_scope: TieScope,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SampleArgs {
    /// Write the sorted bootstrap statistics with their empirical CDF
    #[arg(long)]
    pub dump_boot: Option<PathBuf>,
    /// Keep every bootstrap statistic in the JSON report
    #[arg(long)]
    pub include_sample: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BootArgs {
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bootstrap replicates
    #[arg(long, default_value_t = 10_000)]
    pub nboot: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Level-mean construction: cumulative or per_level
    #[arg(long, default_value_t = ShiftConstruction::default())]
    pub shift: ShiftConstruction,
    #[command(flatten)]
    pub ties: TieArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TestArgs {
    /// Measurement CSV with columns group, level, value
    #[arg(long, conflicts_with = "table", required_unless_present = "table")]
    pub data: Option<PathBuf>,
    /// Number of levels, when trailing levels have no measurements
    #[arg(long, requires = "data")]
    pub levels: Option<usize>,
    #[command(flatten)]
    pub table: TableInput,
    #[command(flatten)]
    pub boot: BootArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimArgs {
    /// Simulation config (JSON, or TOML by extension); flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exceedance probabilities per adjacent pair (group x, and y under H0)
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Same size at every level of both groups
    #[arg(long, conflicts_with_all = ["sizes_x", "sizes_y"])]
    pub size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sizes_x: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sizes_y: Vec<usize>,
    /// Outer replications
    #[arg(long)]
    pub nrep: Option<usize>,
    /// Bootstrap replicates per outer replication
    #[arg(long)]
    pub nboot: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Data-generating location family: normal or logistic
    #[arg(long)]
    pub family: Option<LocationFamily>,
    /// Level-mean construction: cumulative or per_level
    #[arg(long)]
    pub shift: Option<ShiftConstruction>,
    /// Keep the p-value of every replication in the report
    #[arg(long)]
    pub keep_pvalues: bool,
    /// Report replication throughput on stderr
    #[arg(long)]
    pub progress: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PowerArgs {
    #[command(flatten)]
    pub sim: SimArgs,
    /// Exceedance probabilities of group y
    #[arg(long, value_delimiter = ',')]
    pub p_y: Vec<f64>,
    /// Test one frequency table instead of simulating; sizes, nboot, alpha,
    /// seed and shift are taken from the flags above
    #[arg(long, conflicts_with_all = ["config", "p", "p_y", "nrep", "family", "keep_pvalues"])]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub ties: TieArgs,
    #[command(flatten)]
    pub sample: SampleArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExactArgs {
    #[arg(long)]
    pub n1: usize,
    #[arg(long)]
    pub n2: usize,
    #[arg(long)]
    pub p: f64,
    /// Append an oracle column: permutation or mc
    #[arg(long, value_parser = ["permutation", "mc"])]
    pub compare: Option<String>,
    /// Monte Carlo simulations for `--compare mc`
    #[arg(long, default_value_t = 100_000)]
    pub nsims: usize,
    /// Location shift for `--compare mc` (default: the one matching `--p`)
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
struct ReplayArgs {
    /// Manifest written by an earlier `--manifest` run
    manifest_file: PathBuf,
}

/// Exit codes: 0 success, 1 operational failure, 2 malformed input,
/// 3 no comparable pairs.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NoComparablePairs => 3,
        Error::Io(_) => 1,
        Error::TooFewLevels
        | Error::LevelCountMismatch { .. }
        | Error::NonFinite { .. }
        | Error::GroupCount { .. }
        | Error::LevelOutOfRange { .. }
        | Error::EmptySubsample
        | Error::UnequalSizes { .. }
        | Error::InvalidProbability(_)
        | Error::InvalidSize { .. }
        | Error::SizeCapExceeded { .. }
        | Error::InconsistentTable(_)
        | Error::InvalidConfig(_)
        | Error::Malformed(_)
        | Error::Csv(_)
        | Error::Json(_) => 2,
    }
}

fn execute(command: &Command) -> subtrend::Result<Run> {
    match command {
        Command::Test(args) => commands::test(args),
        Command::Type1(args) => commands::type1(args),
        Command::Power(args) => commands::power(args),
        Command::Exact(args) => commands::exact(args),
        Command::Replay(_) => unreachable!("replay is dispatched separately"),
    }
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), (u8, String)> {
    let fail = |e: Error| (exit_code(&e), e.to_string());
    if let Command::Replay(args) = &cli.command {
        return replay(&args.manifest_file, cli.out.as_ref());
    }
    let started = chrono::Utc::now();
    let run = execute(&cli.command).map_err(fail)?;
    let finished = chrono::Utc::now();
    for (path, bytes) in &run.side_files {
        fs::write(path, bytes).map_err(|e| fail(e.into()))?;
    }
    emit(cli.out.as_ref(), &run.report).map_err(|e| fail(e.into()))?;
    if let Some(summary) = &run.summary {
        eprintln!("{summary}");
    }
    if let Some(path) = &cli.manifest {
        let manifest = RunManifest::new(argv, &run, started, finished);
        manifest.write(path).map_err(fail)?;
    }
    Ok(())
}

fn replay(path: &Path, out: Option<&PathBuf>) -> Result<(), (u8, String)> {
    let fail = |e: Error| (exit_code(&e), e.to_string());
    let manifest = RunManifest::read(path).map_err(fail)?;
    manifest.check_inputs().map_err(fail)?;
    let mut argv = vec!["subtrend".to_string()];
    argv.extend(manifest.args.iter().cloned());
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| (2, format!("manifest arguments do not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err((2, "a manifest cannot replay another manifest".into()));
    }
    let run = execute(&cli.command).map_err(fail)?;
    emit(out, &run.report).map_err(|e| fail(e.into()))?;
    let digest = manifest::sha256_hex(&run.report);
    if digest != manifest.report_sha256 {
        return Err((
            1,
            format!(
                "replay differs: report sha256 {digest}, manifest recorded {}",
                manifest.report_sha256
            ),
        ));
    }
    eprintln!("replay matches manifest (report sha256 {digest})");
    Ok(())
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> subtrend::Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidConfig("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let threads = cli.threads;
    let outcome = match with_threads(threads, || run(cli, argv)) {
        Ok(r) => r,
        Err(e) => Err((exit_code(&e), e.to_string())),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

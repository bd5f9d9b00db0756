//! Command-line front end. Every run writes its files into `--out`, each one
//! starting with the [`RunManifest`] that reproduces it.

mod commands;
mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use manifest::RunManifest;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "retroloop",
    version,
    about = "Weak measurements, causal loops and sealed prophecies"
)]
pub struct Cli {
    /// Seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "retroloop-out")]
    pub out: PathBuf,
    /// Output format; defaults to csv for `fisher` and json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the entangled-pair experiment and report post-selected slices.
    Epr(EprArgs),
    /// Slice an existing record file.
    Slice(SliceArgs),
    /// Try to single out the true slicing of a record file.
    Predict(PredictArgs),
    /// Two-machine loops, stationary distributions and consistent histories.
    Loops(LoopsArgs),
    /// Fisher information across scale parameters.
    Fisher(FisherArgs),
    /// BB84 key exchange.
    Bb84(Bb84Args),
    /// Commit, choose and reveal an encrypted prophecy.
    Prophecy(ProphecyArgs),
    /// Re-run the command recorded in an output file's manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictArg {
    None,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EprArgs {
    #[arg(long, value_parser = positive)]
    pub pairs: usize,
    /// Pointer coupling λ.
    #[arg(long, default_value_t = 0.1)]
    pub coupling: f64,
    /// Pointer noise δ.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Fixed choice cycle such as `0:1,2:2`; uniform random choices if absent.
    #[arg(long)]
    pub pattern: Option<String>,
    /// Side whose strong outcomes define the slices.
    #[arg(long, value_enum, default_value = "b")]
    pub slice_side: SideArg,
    #[arg(long, value_enum, default_value = "none")]
    pub predict: PredictArg,
    /// Random balanced slicings for `--predict sampled`.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SliceArgs {
    /// Record file written by `epr`.
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub orientation: usize,
    #[arg(long, value_enum, default_value = "b")]
    pub side: SideArg,
    /// Strong outcome to condition on: 1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub outcome: i8,
    /// Orientation of the averaged readings; defaults to `--orientation`.
    #[arg(long)]
    pub reading: Option<usize>,
    /// Also require the reading side's own choice and outcome, e.g. `2:-1`.
    #[arg(long, allow_hyphen_values = true)]
    pub co_condition: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub search: SearchArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "b")]
    pub side: SideArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetArg {
    Paradox,
    Cooperative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentArg {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LoopsArgs {
    /// Truth table of machine A (`01` identity, `10` NOT, `00`, `11`).
    #[arg(long, default_value = "01")]
    pub a: String,
    #[arg(long, default_value = "10")]
    pub b: String,
    /// Flip noise applied to each machine's output for the stationary distribution.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Starting bit, used when the chain is reducible.
    #[arg(long, default_value_t = 0)]
    pub initial: u8,
    #[arg(long, value_enum, default_value = "paradox")]
    pub policy: PresetArg,
    /// Probability that an observation is a statistical fluctuation.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Agent whose lab sets the stable time direction.
    #[arg(long, value_enum, default_value = "alice")]
    pub reference: AgentArg,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FisherArgs {
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.01,1,100")]
    pub deltas: Vec<f64>,
    /// Also estimate each value by Monte Carlo with this many samples.
    #[arg(long)]
    pub mc_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Bb84Args {
    #[arg(long, default_value_t = 10_000)]
    pub qubits: usize,
    /// Put an intercept-resend eavesdropper on the channel.
    #[arg(long)]
    pub eve: bool,
    /// Fraction of sifted bits sacrificed to estimate the QBER.
    #[arg(long, default_value_t = 0.5)]
    pub sacrifice: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ProphecyArgs {
    /// Bits in the prophesied choice.
    #[arg(long, default_value_t = 8)]
    pub bits: usize,
    #[arg(long, default_value_t = 1000)]
    pub qubits: usize,
    /// Protocol runs used to measure ciphertext-only guessing advantage.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long)]
    pub eve: bool,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    /// Any file written by a previous run.
    pub file: PathBuf,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command line, returning the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    if let Command::Replay(r) = &cli.command {
        let manifest = RunManifest::from_output_file(&r.file)?;
        return replay(&manifest, &cli.out);
    }
    let manifest = manifest_for(&cli.command, cli.seed, cli.format)?;
    commands::run_manifest(&manifest, &cli.out)
}

/// Re-runs a recorded command, writing into `out`.
pub fn replay(manifest: &RunManifest, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    commands::run_manifest(manifest, out)
}

fn manifest_for(cmd: &Command, seed: u64, format: Option<Format>) -> Result<RunManifest, CliError> {
    let (name, params, default_format) = match cmd {
        Command::Epr(a) => ("epr", to_value(a), Format::Json),
        Command::Slice(a) => ("slice", to_value(a), Format::Json),
        Command::Predict(a) => ("predict", to_value(a), Format::Json),
        Command::Loops(a) => ("loops", to_value(a), Format::Json),
        Command::Fisher(a) => ("fisher", to_value(a), Format::Csv),
        Command::Bb84(a) => ("bb84", to_value(a), Format::Json),
        Command::Prophecy(a) => ("prophecy", to_value(a), Format::Json),
        Command::Replay(_) => return Err(CliError::Usage("replay has no manifest of its own".into())),
    };
    Ok(RunManifest {
        subcommand: name.to_string(),
        params: params?,
        seed,
        format: format.unwrap_or(default_format),
        version: RunManifest::version_string(),
        outputs: Vec::new(),
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Runtime(e.to_string()))
}

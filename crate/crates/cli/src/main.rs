//! `coherlab` command-line interface.
//!
//! Exit codes: 0 success, 2 parse or usage error, 3 invariant violation,
//! 4 a reported check failed. Nothing is written to disk unless `--out` is
//! given.

mod commands;
mod io;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Options;
use report::Format;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input; exit 2.
    Parse(String),
    /// Input parsed but violates a mathematical invariant; exit 3.
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
        }
    }
}

impl From<coherlab::Error> for CliError {
    fn from(e: coherlab::Error) -> Self {
        CliError::Invariant(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "coherlab", version, about = "Coherence measures, incoherent operations and protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// State file (JSON: dims, kind, matrix)
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "builtin")]
    state: Option<PathBuf>,
    /// Built-in state: bell, merging, psi2 or domino:K (K = 1..9)
    #[arg(long, global = true, value_name = "NAME")]
    builtin: Option<String>,
    /// Bipartition such as "A=0;B=1,2"; B is the dephased side
    #[arg(long, global = true)]
    split: Option<String>,
    /// Channel file (JSON, kind kraus or product)
    #[arg(long, global = true, value_name = "PATH")]
    channel: Option<PathBuf>,
    /// Number of random trials (for `assistance` and `distill-pure`: optimizer restarts)
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Override the tolerance of every check
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the output here instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a measure: cr, qire, discord, mutual-info, assistance, entropy
    Measure { name: String },
    /// Run a protocol: teleport, distill-pure, distill-mc, steer, discriminate,
    /// merge-witness, sqi-to-si, ancilla-reduce
    Protocol {
        name: String,
        /// Input for teleport: `random` (default without a state) or `state`
        #[arg(long)]
        input: Option<String>,
    },
    /// Classify a channel file
    Classify { path: Option<PathBuf> },
    /// Recompute every closed-form value and report pass/fail
    Reproduce,
    /// Run a seeded property suite: teleport, steer, monotonicity, sqi-to-si,
    /// ancilla-reduce, continuity, closed-form, all
    Suite { name: String },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    if let Some(t) = cli.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Parse(format!("--tol must be a finite non-negative number, got {t}")));
        }
    }
    if cli.trials == Some(0) {
        return Err(CliError::Parse("--trials must be at least 1".into()));
    }
    let state = match (&cli.state, &cli.builtin) {
        (Some(path), _) => Some(io::parse_state(&read(path)?)?),
        (None, Some(name)) => Some(commands::builtin(name)?),
        (None, None) => None,
    };
    let channel_path = match &cli.command {
        Command::Classify { path: Some(p) } => Some(p.clone()),
        _ => cli.channel.clone(),
    };
    let channel = channel_path.map(|p| read(&p).and_then(|t| io::parse_channel(&t))).transpose()?;
    let opts = Options {
        state,
        builtin: cli.builtin.clone(),
        split: cli.split.clone(),
        channel,
        trials: cli.trials,
        seed: cli.seed,
        tol: cli.tol,
    };
    let (report, default_format) = match &cli.command {
        Command::Measure { name } => (commands::measure(name, &opts)?, Format::Json),
        Command::Protocol { name, input } => {
            match input.as_deref() {
                None | Some("state") => {}
                Some("random") if opts.state.is_none() => {}
                Some("random") => {
                    return Err(CliError::Parse("--input random conflicts with --state/--builtin".into()))
                }
                Some(other) => return Err(CliError::Parse(format!("unknown --input {other:?}"))),
            }
            (commands::protocol(name, &opts)?, Format::Json)
        }
        Command::Classify { .. } => {
            let ch = opts
                .channel
                .as_ref()
                .ok_or_else(|| CliError::Parse("classify needs a channel file".into()))?;
            (commands::classify(ch)?, Format::Json)
        }
        Command::Reproduce => (commands::reproduce(&opts)?, Format::Pretty),
        Command::Suite { name } => (commands::suite(name, &opts)?, Format::Pretty),
    };
    let text = report.render(cli.format.unwrap_or(default_format));
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    if report.failed() > 0 {
        eprintln!("{} check(s) failed", report.failed());
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("coherlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

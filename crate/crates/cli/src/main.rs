//! `hawking`: config-driven experiments with Hawking-type functionals.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 numerical
//! failure (outputs are still written, marked as failed), 5 I/O error.

mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hawking_core::moments::{exact_monomial_integral, parse_moment_key};

use config::{CommandName, Overrides};

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hawking",
    version,
    about = "Evaluate and minimize Hawking-type functionals on small spheres"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `command.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Clone)]
struct MomentsArgs {
    #[arg(long, required_unless_present = "key")]
    config: Option<PathBuf>,
    /// Print the exact `∫ν^{i₁}⋯ν^{iₙ}` for a 1-based key such as `1,1,2,2`.
    #[arg(long)]
    key: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Functionals of one surface.
    Eval(Common),
    /// Area-constrained minimizer.
    Minimize(Common),
    /// Minimizers over decreasing areas.
    Scan(Common),
    /// Small-sphere expansion of E and H_L.
    Expand(Common),
    /// Moment identity table.
    Moments(MomentsArgs),
    /// Concentration of minimizers at critical points.
    Concentrate(Common),
    /// First variations against finite differences.
    CheckVariation(Common),
}

fn experiment(name: CommandName, args: Common) -> Result<(), CliError> {
    let raw = config::load(&args.config)?;
    let base = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let cfg = config::resolve(
        raw,
        name,
        &Overrides {
            seed: args.seed,
            out: args.out,
        },
        &base,
    )?;
    let outcome = run::run(&cfg, name)?;
    let written = output::write_outcome(&cfg, name.as_str(), &outcome)?;
    if !args.quiet {
        for line in &outcome.summary {
            println!("{line}");
        }
        for p in &written {
            println!("wrote {}", p.display());
        }
    }
    match outcome.failure {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

fn moment_key(key: &str) -> Result<(), CliError> {
    let axes = parse_moment_key(key).map_err(run::classify)?;
    let v = exact_monomial_integral(&axes).map_err(run::classify)?;
    println!("{key}\t{v}\t{}", v.value());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval(a) => experiment(CommandName::Eval, a),
        Command::Minimize(a) => experiment(CommandName::Minimize, a),
        Command::Scan(a) => experiment(CommandName::Scan, a),
        Command::Expand(a) => experiment(CommandName::Expand, a),
        Command::Concentrate(a) => experiment(CommandName::Concentrate, a),
        Command::CheckVariation(a) => experiment(CommandName::CheckVariation, a),
        Command::Moments(a) => match (a.key, a.config) {
            (Some(key), _) => moment_key(&key),
            (None, Some(config)) => experiment(
                CommandName::Moments,
                Common {
                    config,
                    seed: a.seed,
                    out: a.out,
                    quiet: a.quiet,
                },
            ),
            (None, None) => unreachable!("clap requires --config without --key"),
        },
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
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hawking: {e}");
            ExitCode::from(e.code())
        }
    }
}

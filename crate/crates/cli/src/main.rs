//! `oseen-tp` command-line tool.

mod claims;
mod commands;
mod io;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Outcome;

#[derive(Parser, Debug)]
#[command(name = "oseen-tp", version, about = "Time-periodic Oseen kernels, representations and decay checks")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file, or directory for the command's default file name.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "OSEEN_TP_THREADS")]
    threads: Option<usize>,
    /// Seed for randomly sampled points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fundamental solutions.
    Fundsol {
        #[command(subcommand)]
        cmd: FundsolCmd,
    },
    /// Manufactured scenarios.
    Scenario {
        #[command(subcommand)]
        cmd: ScenarioCmd,
    },
    /// Representation formulas.
    Repr {
        #[command(subcommand)]
        cmd: ReprCmd,
    },
    /// Far-field decay fits.
    Decay {
        #[command(subcommand)]
        cmd: DecayCmd,
    },
    /// Verification suites; exit code 1 when a tolerance is exceeded.
    Check {
        #[arg(value_enum)]
        suite: commands::check::Suite,
    },
    /// Markdown and SVG summary of earlier CSV outputs.
    Report {
        /// CSV files written by the other commands.
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum FundsolCmd {
    Eval(commands::fundsol::EvalArgs),
}

#[derive(Subcommand, Debug)]
enum ScenarioCmd {
    Eval(commands::scenario::EvalArgs),
}

#[derive(Subcommand, Debug)]
enum ReprCmd {
    Check(commands::repr::CheckArgs),
}

#[derive(Subcommand, Debug)]
enum DecayCmd {
    Fit(commands::decay::FitArgs),
}

/// Settings shared by every command.
pub struct Global {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(io::input_err("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let g = Global {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
    };
    match cli.command {
        Command::Fundsol { cmd: FundsolCmd::Eval(a) } => commands::fundsol::eval(&g, &a),
        Command::Scenario { cmd: ScenarioCmd::Eval(a) } => commands::scenario::eval(&g, &a),
        Command::Repr { cmd: ReprCmd::Check(a) } => commands::repr::check(&g, &a),
        Command::Decay { cmd: DecayCmd::Fit(a) } => commands::decay::fit(&g, &a),
        Command::Check { suite } => commands::check::run(&g, suite),
        Command::Report { inputs } => commands::report::run(&g, &inputs),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! `crowdsim`: run episodes, evaluate logs, export plot data.
//!
//! Exit codes: 0 success, 2 usage / configuration / malformed input, 3 I/O.

mod eval;
mod failure;
mod plotdata;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::failure::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "crowdsim",
    version,
    about = "Deterministic crowd-navigation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run seeded episodes and write one JSONL log per episode.
    Run(run::RunArgs),
    /// Aggregate episode logs into the metric table.
    Eval {
        /// Glob of JSONL logs, e.g. 'logs/*.jsonl'. A directory means every
        /// `.jsonl` file inside it.
        logs: String,
        /// Aggregate CSV destination.
        #[arg(long)]
        out: PathBuf,
        /// Per-episode CSV destination.
        #[arg(long)]
        episodes_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = GroupBy::None)]
        group_by: GroupBy,
    },
    /// Per-agent trajectory CSV with proxemic radii and events.
    Plotdata {
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GroupBy {
    None,
    Kind,
    Policy,
    Mode,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::default().filter_or("CROWDSIM_LOG_LEVEL", "warn"),
    )
    .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => run::run(args),
        Command::Eval {
            logs,
            out,
            episodes_out,
            group_by,
        } => eval::eval(&logs, &out, episodes_out.as_deref(), group_by),
        Command::Plotdata { log, out } => plotdata::plotdata(&log, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("crowdsim: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

impl From<crowdsim_core::Error> for Failure {
    fn from(e: crowdsim_core::Error) -> Self {
        match e {
            crowdsim_core::Error::Io(io) => Failure::Io(io.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

//! `evopoc` — knowledge-graph-driven exploit-feasibility engine.
//!
//! Exit codes are a stable contract:
//! - `hkg`: 0 success, 1 store errors, 2 malformed input
//! - `analyze`: 0 success, 2 input errors, 3 not profitable,
//!   4 path infeasible, 5 iteration budget exhausted
//! - `validate`: 0 both stages pass, 2 input errors, 3 stage-2 fail,
//!   4 stage-1 fail

mod analyze;
mod hkg;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evopoc::config::Config;

#[derive(Parser)]
#[command(name = "evopoc", version, about = "Exploit-feasibility engine for DeFi contracts")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Machine-readable JSON output is the default; this switches to tables.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Knowledge-graph store operations.
    Hkg {
        #[command(subcommand)]
        sub: hkg::HkgCommand,
    },
    /// Full analysis: preprocess, build working memory, synthesize.
    Analyze(analyze::AnalyzeArgs),
    /// Run only the two validation stages on a user-supplied plan.
    Validate(validate::ValidateArgs),
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, String> {
    match path {
        Some(p) => Config::load(p).map_err(|e| e.to_string()),
        None => Ok(Config::default()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let code = match cli.command {
        Command::Hkg { sub } => hkg::run(sub, &config, cli.human),
        Command::Analyze(args) => analyze::run(args, &config, cli.human),
        Command::Validate(args) => validate::run(args, &config, cli.human),
    };
    ExitCode::from(code)
}

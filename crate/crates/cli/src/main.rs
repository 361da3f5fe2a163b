//! `zar`: command-line front end for zero-adjusted regression.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 non-convergence.

mod args;
mod commands;
mod config;
mod error;
mod table;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => commands::cmd_fit(a),
        Command::Diagnose(a) => commands::cmd_diagnose(a),
        Command::Envelope(a) => commands::cmd_envelope(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Synth(a) => commands::cmd_synth(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

//! `engagemap` command-line front end.
//!
//! Exit codes are listed in `engagemap_core::pipeline::exit_code`.

mod args;
mod commands;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let config = cli.config.as_ref();
    let result = match &cli.command {
        Command::Fetch(a) => commands::fetch(config, a),
        Command::Code(a) => commands::code(config, a),
        Command::Pipeline(f) => commands::pipeline(config, f),
        Command::Stats(f) => commands::stats(config, f),
        Command::Map(f) => commands::map(config, f),
        Command::Synth(a) => commands::synth(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

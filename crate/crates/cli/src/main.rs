use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::init();
    ExitCode::from(matsync_cli::run(matsync_cli::Cli::parse()))
}

use std::process::ExitCode;

use clap::Parser;
use westervelt::cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WESTERVELT_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("westervelt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

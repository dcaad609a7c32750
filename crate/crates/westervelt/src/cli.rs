//! Argument parsing and dispatch.

use std::num::NonZeroUsize;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use westervelt_core::Complex64;

use crate::commands::{self, Context};
use crate::error::CliError;
use crate::output::to_json;

#[derive(Debug, Parser)]
#[command(
    name = "westervelt",
    version,
    about = "Spectra, resolvents and decay runs for the Westervelt equation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for `sweep`.
    #[arg(long, global = true)]
    pub jobs: Option<NonZeroUsize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// λ₁, λ₀ and the eigenvalue pairs of the block operator.
    Spectrum,
    /// Solve (λ − 𝒜_h)v = f for a seeded random f and report the residual.
    Resolvent {
        /// Spectral parameter as `re,im`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
    },
    /// Integrate the initial data and write the trajectory CSV.
    Simulate,
    /// Simulate, then fit the decay rate.
    Decay,
    /// Simulate and fit over the configured amplitude list.
    Sweep,
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `re,im`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let z = Complex64::new(num(re)?, num(im)?);
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Runs the parsed command and prints its main report to stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let ctx = Context::load(config, cli.out.as_deref())?;
    let text = match &cli.command {
        Command::Spectrum => to_json(&commands::spectrum(&ctx)?),
        Command::Resolvent { lambda } => to_json(&commands::resolvent(&ctx, *lambda)?),
        Command::Simulate => to_json(&commands::simulate_cmd(&ctx)?.1),
        Command::Decay => to_json(&commands::decay(&ctx)?),
        Command::Sweep => to_json(&commands::sweep(&ctx, cli.jobs)?),
    };
    print!("{text}");
    Ok(())
}

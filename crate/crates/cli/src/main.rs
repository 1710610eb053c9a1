mod cli;
mod commands;
mod config;
mod error;
mod output;
mod svg;
mod validate;

use clap::Parser;

use crate::cli::{resolve_common, Cli, Command};
use crate::error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let r = resolve_common(&cli.common, &cli.command)?;
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(&r, a),
        Command::PhaseDiagram(a) => commands::phase_diagram_cmd(&r, a),
        Command::SpectrumSweep(a) => commands::spectrum_sweep_cmd(&r, a),
        Command::Winding(a) => commands::winding_cmd(&r, a),
        Command::Lyapunov(a) => commands::lyapunov_cmd(&r, a),
        Command::DualityCheck => commands::duality_check(&r),
        Command::Evolve(a) => commands::evolve_cmd(&r, a),
        Command::Validate(a) => validate::validate(&r, a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("puamo {}: {e}", cli.command.name());
        std::process::exit(e.exit_code());
    }
}

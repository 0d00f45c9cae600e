//! `carleson`: build taming outer functions for atomic measures and run the
//! verification, sharpness, Wolff and Volterra experiments.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use carleson_core::Error;

/// Exit status for a run whose construction finished but failed one of its
/// own certificates.
pub const EXIT_CERTIFICATE: u8 = 2;
/// Exit status when the measure is too light for the requested split.
pub const EXIT_RADII: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "carleson",
    version,
    about = "Taming outer functions for Carleson measures on the unit disc"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the outer function E for a measure and write log|E| with its certificates.
    Construct(config::ConstructArgs),
    /// Profile |E| mu for a measure and a stored log|E|.
    Verify(config::VerifyArgs),
    /// Ratio scan over the blow-up measure for a modulus of continuity.
    Sharpness(config::SharpnessArgs),
    /// Tame the gradient measure of a bounded boundary function.
    Wolff(config::WolffArgs),
    /// Carleson seminorms of T_G(E H z^n) for a symbol G.
    Volterra(config::VolterraArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors exit with 1 so that 2 stays reserved for certificates.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Construct(a) => commands::construct(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sharpness(a) => commands::sharpness(a),
        Command::Wolff(a) => commands::wolff(a),
        Command::Volterra(a) => commands::volterra(a),
    };
    match result {
        Ok(commands::Outcome::Certified) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Violated(what)) => {
            eprintln!("certificate violated: {what}");
            ExitCode::from(EXIT_CERTIFICATE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::RadiiExhausted { .. }) => ExitCode::from(EXIT_RADII),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use cqed_core::{Error, RunConfig, FORMAT_VERSION};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "cqed", about = "Cavity-QED modelling and parameter extraction")]
struct Cli {
    /// Run configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override a config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Figures of merit from measured lifetimes, couplings and cavity data.
    Derive {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Transmission spectrum T(ν).
    Spectrum,
    /// Emitter decay trace, optionally as Poisson counts.
    Decay,
    /// Relative PL intensity of the four lines versus cavity position.
    TuningMap,
    /// Fit a model to a data file.
    Fit {
        /// lorentzian, exp_decay, dit or power_broadening.
        #[arg(long)]
        model: String,
        /// Series CSV (omit for power_broadening with `powers`/`linewidths` keys).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Steady-state g²(τ) of the driven cavity field.
    G2,
    /// Sum a wavelength window of a streak image into a decay trace.
    StreakBin {
        #[arg(long)]
        data: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DegenerateFit { .. } => 3,
        Error::Stiff { .. }
        | Error::Solver(_)
        | Error::Degenerate(_)
        | Error::UndefinedCorrelation { .. } => 4,
        _ => 2,
    }
}

fn load_config(cli: &Cli) -> cqed_core::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::read(p)?,
        None => RunConfig::empty("<flags>"),
    };
    for pair in &cli.overrides {
        cfg.set_pair(pair)?;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> cqed_core::Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), (u8, String)> {
    let fail = |e: Error| (exit_code(&e), e.to_string());
    let cfg = load_config(cli).map_err(fail)?;
    let out = match &cli.command {
        Command::Derive { format } => commands::derive(&cfg, *format),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Decay => commands::decay(&cfg, cli.seed),
        Command::TuningMap => commands::tuning_map(&cfg),
        Command::G2 => commands::g2(&cfg),
        Command::StreakBin { data } => commands::streak_bin(&cfg, data),
        Command::Fit { model, data, format } => {
            let fit = commands::fit(&cfg, model, data.as_deref()).map_err(fail)?;
            let text = match format {
                Format::Table => fit.report(),
                Format::Csv => fit.to_csv(),
            };
            emit(cli.out.as_deref(), &text).map_err(fail)?;
            if !fit.converged {
                return Err((3, format!("fit did not converge after {} iterations", fit.n_iterations)));
            }
            return Ok(());
        }
    }
    .map_err(fail)?;
    emit(cli.out.as_deref(), &out).map_err(fail)
}

fn main() -> ExitCode {
    let version: &'static str =
        Box::leak(format!("{} (file format {FORMAT_VERSION})", env!("CARGO_PKG_VERSION")).into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::InvalidParams("x".into())), 2);
        assert_eq!(exit_code(&Error::DegenerateFit { direction: "a".into() }), 3);
        assert_eq!(exit_code(&Error::Stiff { t: 1.0, step: 1e-20 }), 4);
        assert_eq!(exit_code(&Error::UndefinedCorrelation { photons: 0.0 }), 4);
    }

    #[test]
    fn flags_are_global() {
        let cli = Cli::try_parse_from(["cqed", "spectrum", "--set", "g=1", "--seed", "3"]).unwrap();
        assert_eq!(cli.seed, 3);
        assert_eq!(cli.overrides, vec!["g=1".to_string()]);
    }
}

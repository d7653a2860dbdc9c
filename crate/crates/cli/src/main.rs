//! `levyturb`: scaling predictions, solver and random-walk runs, spectrum fits.
//!
//! Exit codes: 0 success, 1 replay mismatch, 2 configuration error,
//! 3 numerical failure, 4 fit-domain error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levyturb::analysis::DEFAULT_Z_THRESHOLD;
use levyturb::Error;

use config::Preset;

#[derive(Debug)]
pub enum CliError {
    /// `{}` was given; carries the full default config.
    EmptyConfig(String),
    Config(String),
    Numerical(String),
    FitDomain(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::EmptyConfig(_) | CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::FitDomain(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::StepSize { .. } | Error::NonFinite { .. } => CliError::Numerical(e.to_string()),
            Error::FitDomain(_) => CliError::FitDomain(e.to_string()),
            Error::Domain(_) | Error::Usage(_) | Error::Config(_) => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "levyturb", version, about = "Fractional Navier-Stokes turbulence laboratory")]
struct Cli {
    /// Overrides the seed in the run config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for particle ensembles (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for CSV outputs and the manifest.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the predicted spectrum exponent, flux power and MSD exponent.
    Predict {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run the pseudo-spectral solver from a JSON config.
    NsRun {
        config: PathBuf,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
    },
    /// Simulate a random-walk ensemble from a JSON config and fit its width exponent.
    CtrwRun {
        config: PathBuf,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
    },
    /// Fit a spectrum CSV and compare the slope with the prediction for (beta, mu).
    SpectrumFit {
        csv: PathBuf,
        #[arg(long)]
        k_min: f64,
        #[arg(long)]
        k_max: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        json: bool,
    },
    /// Re-run the config embedded in a manifest and compare output digests.
    Replay { manifest: PathBuf },
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Predict { beta, mu, json } => commands::predict_cmd(beta, mu, json)?,
        Command::NsRun { config, preset } => {
            let cfg = config::ns_config(config::read_json(&config)?, preset, cli.seed)?;
            commands::ns_run(&cfg, &cli.output_dir)?;
        }
        Command::CtrwRun { config, preset } => {
            let cfg = config::ctrw_config(config::read_json(&config)?, preset, cli.seed)?;
            commands::ctrw_run(&cfg, &cli.output_dir)?;
        }
        Command::SpectrumFit {
            csv,
            k_min,
            k_max,
            beta,
            mu,
            threshold,
            json,
        } => commands::spectrum_fit(&csv, k_min, k_max, beta, mu, threshold, json)?,
        Command::Replay { manifest } => {
            let m = output::read_manifest(&manifest)?;
            return commands::replay(&m, &cli.output_dir);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("replay: output digests differ from the manifest");
            ExitCode::from(1)
        }
        Err(CliError::EmptyConfig(defaults)) => {
            println!("{defaults}");
            eprintln!("error: empty config; the defaults are listed above. Set at least one key to run.");
            ExitCode::from(2)
        }
        Err(e) => {
            let msg = match &e {
                CliError::Config(m) | CliError::Numerical(m) | CliError::FitDomain(m) => m,
                CliError::EmptyConfig(_) => unreachable!(),
            };
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code())
        }
    }
}

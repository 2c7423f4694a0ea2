//! `aural`: acoustic bearing diagnosis from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use aural_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "aural", version, about = "Acoustic bearing fault diagnosis with adaptive wavelet denoising")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct GlobalArgs {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Recording manifest (TOML) for `run`.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    /// Seed for synthesis, initialization and shuffling.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Skip wavelet denoising where it is optional.
    #[arg(long, global = true)]
    no_denoise: bool,
    /// Use the envelope spectrum for the spectral features.
    #[arg(long, global = true)]
    envelope: bool,
    /// Decomposition depth.
    #[arg(long, global = true, value_name = "N")]
    level: Option<usize>,
    /// Candidate wavelets, comma-separated globs such as "db*,sym8".
    #[arg(long, global = true, value_name = "GLOB")]
    bank: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect the wavelet registry.
    Bank {
        #[command(subcommand)]
        action: BankAction,
    },
    /// Denoise a recording with the highest-KE wavelet of the bank.
    Denoise { input: PathBuf },
    /// Print kurtosis, spectral entropy and KE index of a recording.
    Ke { input: PathBuf },
    /// Window a recording and write its feature table.
    Features {
        input: PathBuf,
        /// Class label written with every row.
        #[arg(long)]
        label: Option<String>,
        #[arg(long, value_name = "HZ")]
        shaft_hz: Option<f64>,
    },
    /// Synthesize a recording, or a whole labeled feature dataset.
    Synth {
        /// Class of the single recording.
        #[arg(long, default_value = "normal")]
        condition: String,
        #[arg(long, default_value_t = -5.0, allow_hyphen_values = true, value_name = "DB")]
        snr: f64,
        #[arg(long, default_value_t = 10.0, value_name = "S")]
        duration: f64,
        /// Build the train/test feature tables from the config's dataset section instead.
        #[arg(long)]
        dataset: bool,
    },
    /// Train the classifier on a feature table.
    Train {
        #[arg(long, value_name = "CSV")]
        train: PathBuf,
        #[arg(long, value_name = "CSV")]
        val: Option<PathBuf>,
    },
    /// Evaluate a saved model on a labeled feature table.
    Eval {
        #[arg(long, value_name = "JSON")]
        model: PathBuf,
        #[arg(long, value_name = "CSV")]
        data: PathBuf,
    },
    /// Write the log-Mel spectrogram of a recording as CSV and PGM.
    Spectrogram { input: PathBuf },
    /// Compare raw and feature inputs with and without denoising.
    Run,
}

#[derive(Debug, Subcommand)]
enum BankAction {
    /// List registry wavelets, filtered by --bank.
    List,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Io { .. }) => 3,
        Some(
            Error::Format(_)
            | Error::UnsupportedVersion(_)
            | Error::UnsupportedAudio(_)
            | Error::BadSpec(_)
            | Error::BadCounts(_)
            | Error::BadGeometry(_)
            | Error::BadRegistry(_)
            | Error::UnknownWavelet(_)
            | Error::UnknownLabel(_)
            | Error::EmptyBank,
        ) => 2,
        Some(_) => 4,
        None => 2,
    }
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("AURAL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::BadSpec(format!("AURAL_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::BadSpec(e.to_string()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| commands::dispatch(&cli.global, &cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! `qutrit-noise`: relaxation and dephasing sweeps, depth fits and Monte
//! Carlo verification for spin-1 defects near a surface.

mod commands;
mod config;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qutrit_noise::par::{set_global_threads, Execution};

use commands::{CliError, Context};
use config::RunConfig;
use output::{sha256_hex, OutDir};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "qutrit-noise", version, about = "Noise-induced relaxation and dephasing of spin-1 defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration (built-in defaults when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// RNG seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (1 runs everything on the main thread).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Integrate with a fixed RK4 step instead of adaptive Dormand-Prince.
    #[arg(long, global = true)]
    fixed_step: bool,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Analytic and integrated population dynamics, plus a T1 sidecar.
    Populations,
    /// Channel rates, 1/T1 and 1/T2 over a static-field sweep.
    RatesSweep,
    /// Electric noise amplitude of each source versus depth.
    NoiseVsDepth,
    /// Power-law fit of T2 versus depth and n=2 / n=4 model selection.
    FitDepth {
        /// CSV with columns z_nm,T2_us[,sigma_us].
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Monte Carlo and quadrature cross-checks of the analytic model.
    McVerify,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let name = match &cli.command {
        Command::Populations => "populations",
        Command::RatesSweep => "rates-sweep",
        Command::NoiseVsDepth => "noise-vs-depth",
        Command::FitDepth { .. } => "fit-depth",
        Command::McVerify => "mc-verify",
    };
    let (cfg, config_sha256) = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let cfg = RunConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            (cfg, sha256_hex(text.as_bytes()))
        }
        None => (RunConfig::empty(), sha256_hex(format!("builtin:{name}").as_bytes())),
    };
    let exec = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(1) => Execution::Sequential,
        Some(n) => {
            set_global_threads(n);
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let ctx = Context {
        seed: cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
        cfg,
        config_sha256,
        fixed_step: cli.fixed_step,
        exec,
        out: OutDir::create(&cli.out)?,
        input: match &cli.command {
            Command::FitDepth { input } => input.clone(),
            _ => None,
        },
    };
    match cli.command {
        Command::Populations => commands::populations(&ctx),
        Command::RatesSweep => commands::rates_sweep_cmd(&ctx),
        Command::NoiseVsDepth => commands::noise_vs_depth_cmd(&ctx),
        Command::FitDepth { .. } => commands::fit_depth(&ctx),
        Command::McVerify => commands::mc_verify(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qutrit-noise: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

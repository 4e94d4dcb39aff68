//! `cokern` — covariant quantum kernel experiment orchestrator.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, malformed or
//! mismatched files), 2 numerical failure (solver non-convergence,
//! reconstruction beyond tolerance).

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cokern_core::{Error, Result};
use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "cokern", version, about = "Covariant quantum kernel workbench")]
struct Cli {
    /// JSON config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override every seed in the config (data, shot, and SPSA).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for kernel assembly (0 = rayon default).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory for generated artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an LCE problem with train/test datasets.
    GenLce,
    /// Build a kernel matrix between two dataset files.
    Kernel {
        /// Dataset CSV providing the matrix rows.
        #[arg(long)]
        rows: PathBuf,
        /// Dataset CSV providing the matrix columns.
        #[arg(long)]
        cols: PathBuf,
        /// Basename of the emitted CSV + sidecar.
        #[arg(long, default_value = "kernel")]
        name: String,
        /// Fiducial parameter override.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// SPSA kernel alignment over a training dataset.
    Align {
        #[arg(long)]
        train: PathBuf,
        /// Also score each step's λ against this test set
        /// (writes accuracy_vs_step.csv).
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Train the SVM dual on a training kernel.
    Train {
        /// Kernel CSV (its .meta.json sidecar must sit next to it).
        #[arg(long)]
        kernel: PathBuf,
        /// Training dataset CSV the kernel was built from.
        #[arg(long)]
        data: PathBuf,
    },
    /// Classify the rows of a test kernel with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        kernel: PathBuf,
    },
    /// Accuracy, decision values, and feature-space geometry.
    Diagnose {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        train_kernel: PathBuf,
        #[arg(long)]
        test_kernel: PathBuf,
        #[arg(long)]
        train_data: PathBuf,
        #[arg(long)]
        test_data: PathBuf,
        /// Emit the Hamming-weight comparison for one training pair.
        #[arg(long, num_args = 2, value_names = ["I", "J"])]
        hamming: Option<Vec<usize>>,
    },
    /// Discrete-log labeling benchmark on Z*_p.
    DlogDemo {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        g: u64,
        /// Subset exponent of the fiducial state (2^k elements).
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Label-window offset, an exponent in 0..p-1.
        #[arg(long, default_value_t = 0)]
        s: u64,
        /// Training points drawn without replacement; 0 = full dataset.
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
    /// Verify the non-Abelian Fourier inversion round trip.
    FourierCheck {
        /// Group spec: zN or zstar:P[:G].
        #[arg(long)]
        group: String,
        /// Fiducial spec: uniform, basis:IDX, or subset:K.
        #[arg(long, default_value = "uniform")]
        fiducial: String,
    },
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.data_seed = seed;
        cfg.shot_seed = seed;
        cfg.spsa_seed = seed;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli, cfg: &ExperimentConfig) -> Result<()> {
    match &cli.command {
        Command::GenLce => commands::gen_lce(cfg),
        Command::Kernel { rows, cols, name, lambda } => {
            commands::kernel(cfg, rows, cols, name, *lambda)
        }
        Command::Align { train, test } => commands::cmd_align(cfg, train, test.as_deref()),
        Command::Train { kernel, data } => commands::train(cfg, kernel, data),
        Command::Predict { model, kernel } => commands::predict_cmd(cfg, model, kernel),
        Command::Diagnose { model, train_kernel, test_kernel, train_data, test_data, hamming } => {
            let pair = hamming.as_ref().map(|v| (v[0], v[1]));
            commands::diagnose(cfg, model, train_kernel, test_kernel, train_data, test_data, pair)
        }
        Command::DlogDemo { p, g, k, s, m } => commands::dlog_demo(cfg, *p, *g, *k, *s, *m),
        Command::FourierCheck { group, fiducial } => commands::fourier_check(group, fiducial),
    }
}

fn run() -> Result<()> {
    let cli = Cli::try_parse().map_err(|e| {
        // clap already renders the message; keep it verbatim
        Error::validation(e.to_string())
    })?;
    let cfg = effective_config(&cli)?;
    if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::validation(format!("thread pool: {e}")))?;
        pool.install(|| dispatch(&cli, &cfg))
    } else {
        dispatch(&cli, &cfg)
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

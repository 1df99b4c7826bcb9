//! Thin batch front end over the `doa_lab` library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use doa_lab::harness::{
    run_beta_trace, run_mc_sweep, run_noise_validate, run_spectrum, ExperimentConfig,
    NoiseValidateSpec,
};

#[derive(Parser)]
#[command(name = "doa-lab", version, about = "DOA estimation laboratory under impulsive noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spatial spectra for one scenario point, one CSV per method.
    Spectrum(ScenarioArgs),
    /// Monte Carlo resolution/RMSE sweep over (method, alpha, GSNR).
    McSweep(ScenarioArgs),
    /// Validate the SαS sampler: ECF error table plus a sample dump.
    NoiseValidate(NoiseArgs),
    /// Trace the relaxation parameter across look directions.
    BetaTrace(ScenarioArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct NoiseArgs {
    /// Characteristic exponent in (0, 2].
    #[arg(long)]
    alpha: f64,
    /// Scale parameter, positive.
    #[arg(long)]
    gamma: f64,
    /// Sample count.
    #[arg(long)]
    n: usize,
    /// Stream seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load_config(args: &ScenarioArgs) -> doa_lab::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.run.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not configure {n} worker threads: {e}");
        }
    }
}

fn run() -> doa_lab::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum(args) => {
            set_threads(args.threads);
            let cfg = load_config(&args)?;
            let out = run_spectrum(&cfg, &args.out)?;
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::McSweep(args) => {
            set_threads(args.threads);
            let cfg = load_config(&args)?;
            let out = run_mc_sweep(&cfg, &args.out)?;
            println!("{} sweep points", out.rows.len());
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::NoiseValidate(args) => {
            let spec = NoiseValidateSpec {
                alpha: args.alpha,
                gamma: args.gamma,
                n: args.n,
                seed: args.seed,
            };
            let out = run_noise_validate(&spec, &args.out)?;
            match out.passed {
                Some(true) => println!("ECF check: pass (band {:.4})", out.band),
                Some(false) => println!("ECF check: FAIL (band {:.4})", out.band),
                None => println!("ECF check: skipped ({} samples)", args.n),
            }
            println!("max |sample| = {:.4}", out.max_abs_sample);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::BetaTrace(args) => {
            set_threads(args.threads);
            let cfg = load_config(&args)?;
            let out = run_beta_trace(&cfg, &args.out)?;
            println!(
                "beta_min = {:.6}, beta_max = {:.6}, beta_fixed = {:.6}{}",
                out.bounds.beta_min(),
                out.bounds.beta_max(),
                out.beta_fixed,
                if out.bounds.collapsed() { " (collapsed bounds fallback)" } else { "" }
            );
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

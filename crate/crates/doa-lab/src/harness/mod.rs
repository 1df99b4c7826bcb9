//! Experiment harness: deterministic Monte Carlo execution and file
//! emission for the four batch commands (`spectrum`, `mc-sweep`,
//! `noise-validate`, `beta-trace`).

pub mod config;
pub mod io;
pub mod seed;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::array::{synthesize_snapshots, SnapshotMatrix};
use crate::error::Result;
use crate::estimators::{flom_matrix, sample_covariance, sscm, ScatterEstimate, ScatterKind};
use crate::metrics::{evaluate_trial, TrialOutcome};
use crate::noise::{
    empirical_cf, gamma_for_gsnr, sample_complex_isotropic_sas, theoretical_cf, NoiseParams,
};
use crate::spectral::{
    beta_bounds, bound_scan, capon_spectrum, directional_beta, fixed_beta, music_like_spectrum,
    music_spectrum, BetaBounds, BetaMode, Spectrum,
};

pub use config::{
    EstimatorConfig, ExperimentConfig, GeometryConfig, Method, NoiseConfig, RunConfig, SceneConfig,
};
pub use io::{RunManifest, SCHEMA_LINE, SCHEMA_VERSION};
pub use seed::{derive_rng, derive_seed, tag_f64, DOMAIN_BETA, DOMAIN_NOISE, DOMAIN_SPECTRUM, DOMAIN_TRIAL};

use io::{fmt_alpha, fmt_angle, fmt_beta, fmt_db, fmt_gsnr, fmt_prob, CsvWriter};

/// Reference power used to calibrate the noise scale when the scene is
/// empty (no sources to average over).
const EMPTY_SCENE_REFERENCE_POWER: f64 = 1.0;

/// ECF evaluation points for the sampler validation command.
pub const ECF_T_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Below this sample count the ECF confidence band is too wide to be
/// meaningful and the check is skipped.
pub const ECF_MIN_SAMPLES: usize = 1_000;

/// How many leading real-part samples the validation command dumps.
const SAMPLE_DUMP_LEN: usize = 200;

fn signal_power(cfg: &ExperimentConfig) -> f64 {
    let scene_power = cfg.scene_model().map(|s| s.mean_power()).unwrap_or(0.0);
    if scene_power > 0.0 {
        scene_power
    } else {
        EMPTY_SCENE_REFERENCE_POWER
    }
}

fn scatter_for(
    method: Method,
    est: &EstimatorConfig,
    x: &SnapshotMatrix,
) -> Result<ScatterEstimate> {
    match method.scatter_kind(est) {
        ScatterKind::Sample => sample_covariance(x),
        ScatterKind::Flom => flom_matrix(x, est.flom_p),
        ScatterKind::Sscm => sscm(x),
    }
}

fn spectrum_for(
    method: Method,
    cfg: &ExperimentConfig,
    r: &ScatterEstimate,
) -> Result<Spectrum> {
    let geom = cfg.geometry_model()?;
    let grid = cfg.grid()?;
    let k = cfg.assumed_k();
    match method {
        Method::Capon => capon_spectrum(&geom, r, &grid),
        Method::Music | Method::FlomMusic | Method::SscmMusic => {
            music_spectrum(&geom, r, &grid, k)
        }
        Method::MusicLikeFixed => music_like_spectrum(&geom, r, &grid, BetaMode::Fixed, k),
        Method::MusicLikeAdaptive => {
            music_like_spectrum(&geom, r, &grid, BetaMode::Directional, k)
        }
    }
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

/// Output of [`run_spectrum`]: the per-method spectra and the files written.
#[derive(Debug)]
pub struct SpectrumRun {
    pub spectra: Vec<(Method, Spectrum)>,
    pub files: Vec<PathBuf>,
}

/// Computes every configured method's spatial spectrum for a single
/// `(alpha, gsnr)` scenario point and writes one CSV per method.
///
/// All methods see the same synthesized snapshot block, so the spectra are
/// directly comparable; the block is a pure function of
/// `(master_seed, alpha, gsnr)`.
pub fn run_spectrum(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SpectrumRun> {
    let started = Instant::now();
    cfg.validate()?;
    let (alpha, gsnr_db) = cfg.single_point()?;

    let geom = cfg.geometry_model()?;
    let scene = cfg.scene_model()?;
    let gamma = gamma_for_gsnr(signal_power(cfg), gsnr_db, alpha)?;
    let noise = NoiseParams::new(alpha, gamma)?;
    let mut rng = derive_rng(
        cfg.run.master_seed,
        &[DOMAIN_SPECTRUM, tag_f64(alpha), tag_f64(gsnr_db)],
    );
    let x = synthesize_snapshots(&geom, &scene, cfg.run.snapshots, Some(&noise), &mut rng)?;

    let mut spectra = Vec::new();
    let mut files = Vec::new();
    for &method in &cfg.run.methods {
        let r = scatter_for(method, &cfg.estimator, &x)?;
        let s = spectrum_for(method, cfg, &r)?;

        let path = out_dir.join(format!("spectrum_{method}.csv"));
        let mut w = CsvWriter::create(&path, &["angle_deg", "value_db", "beta"])?;
        for (i, (&angle, &val)) in s.grid().iter().zip(s.values_db()).enumerate() {
            let beta = s
                .beta_trace()
                .map(|t| fmt_beta(t[i]))
                .unwrap_or_default();
            w.row(&[fmt_angle(angle), fmt_db(val), beta])?;
        }
        files.push(w.finish()?);
        spectra.push((method, s));
    }

    let mut manifest = RunManifest::new("spectrum", cfg.run.master_seed, config_json(cfg));
    manifest.outputs = file_names(&files);
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    files.push(manifest.write(out_dir)?);

    Ok(SpectrumRun { spectra, files })
}

// ---------------------------------------------------------------------------
// mc-sweep
// ---------------------------------------------------------------------------

/// One aggregated sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub method: Method,
    pub alpha: f64,
    pub gsnr_db: f64,
    pub trials: usize,
    pub prob_resolution: f64,
    /// Mean of per-trial RMSE over resolved trials; absent when no trial
    /// resolved.
    pub mean_rmse_deg: Option<f64>,
    pub resolved_count: usize,
}

/// Output of [`run_mc_sweep`].
#[derive(Debug)]
pub struct SweepRun {
    pub rows: Vec<ResultRow>,
    pub files: Vec<PathBuf>,
}

fn run_one_trial(
    cfg: &ExperimentConfig,
    method: Method,
    alpha: f64,
    gsnr_db: f64,
    gamma: f64,
    trial: usize,
) -> Result<TrialOutcome> {
    let geom = cfg.geometry_model()?;
    let scene = cfg.scene_model()?;
    let noise = NoiseParams::new(alpha, gamma)?;
    let mut rng = derive_rng(
        cfg.run.master_seed,
        &[
            DOMAIN_TRIAL,
            method.seed_tag(),
            tag_f64(alpha),
            tag_f64(gsnr_db),
            trial as u64,
        ],
    );
    let x = synthesize_snapshots(&geom, &scene, cfg.run.snapshots, Some(&noise), &mut rng)?;
    let r = scatter_for(method, &cfg.estimator, &x)?;
    let s = spectrum_for(method, cfg, &r)?;
    Ok(evaluate_trial(&s, scene.doas_deg(), cfg.run.tol_deg))
}

/// Runs the sweep and returns the aggregated rows without touching the
/// filesystem. Row order follows the config: methods, then alphas, then
/// GSNR points.
///
/// Trials run in parallel; per-trial streams are derived from
/// `(master_seed, method, alpha, gsnr, trial)`, so results are independent
/// of scheduling and any sub-sweep reproduces the full run's rows.
pub fn mc_sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let trials = cfg.run.trials;
    let mut rows = Vec::new();
    for &method in &cfg.run.methods {
        for &alpha in &cfg.noise.alphas {
            for &gsnr_db in &cfg.noise.gsnr_db {
                let gamma = gamma_for_gsnr(signal_power(cfg), gsnr_db, alpha)?;
                let outcomes: Vec<TrialOutcome> = (0..trials)
                    .into_par_iter()
                    .map(|t| run_one_trial(cfg, method, alpha, gsnr_db, gamma, t))
                    .collect::<Result<_>>()?;
                let resolved_count = outcomes.iter().filter(|o| o.resolved).count();
                let rmse_sum: f64 = outcomes.iter().filter_map(|o| o.rmse_deg).sum();
                rows.push(ResultRow {
                    method,
                    alpha,
                    gsnr_db,
                    trials,
                    prob_resolution: resolved_count as f64 / trials as f64,
                    mean_rmse_deg: (resolved_count > 0)
                        .then(|| rmse_sum / resolved_count as f64),
                    resolved_count,
                });
            }
        }
    }
    Ok(rows)
}

/// Monte Carlo resolution/RMSE sweep over `(method, alpha, gsnr)`; writes
/// the row table as CSV and JSON plus the run manifest.
pub fn run_mc_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SweepRun> {
    let started = Instant::now();
    let rows = mc_sweep_rows(cfg)?;

    let csv_path = out_dir.join("mc_sweep.csv");
    let mut w = CsvWriter::create(
        &csv_path,
        &[
            "method",
            "alpha",
            "gsnr_db",
            "trials",
            "prob_resolution",
            "mean_rmse_deg",
            "resolved_count",
        ],
    )?;
    for row in &rows {
        w.row(&[
            row.method.to_string(),
            fmt_alpha(row.alpha),
            fmt_gsnr(row.gsnr_db),
            row.trials.to_string(),
            fmt_prob(row.prob_resolution),
            row.mean_rmse_deg.map(fmt_db).unwrap_or_default(),
            row.resolved_count.to_string(),
        ])?;
    }
    let mut files = vec![w.finish()?];

    let json_path = out_dir.join("mc_sweep.json");
    let table = serde_json::json!({
        "schema": SCHEMA_VERSION,
        "rmse_convention": "per-trial RMSE averaged over resolved trials only",
        "rows": rows,
    });
    std::fs::write(&json_path, format!("{}\n", serde_json::to_string_pretty(&table).expect("serializable rows")))?;
    files.push(json_path);

    let mut manifest = RunManifest::new("mc-sweep", cfg.run.master_seed, config_json(cfg));
    manifest.outputs = file_names(&files);
    manifest.notes = serde_json::json!({
        "rmse_convention": "per-trial RMSE averaged over resolved trials only",
    });
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    files.push(manifest.write(out_dir)?);

    Ok(SweepRun { rows, files })
}

// ---------------------------------------------------------------------------
// noise-validate
// ---------------------------------------------------------------------------

/// Inputs of the sampler validation command.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NoiseValidateSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub n: usize,
    pub seed: u64,
}

/// One ECF table entry.
#[derive(Debug, Clone, Serialize)]
pub struct EcfRow {
    pub t: f64,
    pub ecf_abs: f64,
    pub theory: f64,
    pub abs_error: f64,
}

/// Output of [`run_noise_validate`].
#[derive(Debug)]
pub struct NoiseValidation {
    pub rows: Vec<EcfRow>,
    /// Hoeffding-style band `4/sqrt(n)` the errors are checked against.
    pub band: f64,
    /// Whether the band check ran (requires `n >= ECF_MIN_SAMPLES`).
    pub checked: bool,
    /// Band-check verdict; `None` when skipped.
    pub passed: Option<bool>,
    pub max_abs_sample: f64,
    pub files: Vec<PathBuf>,
}

/// Draws complex isotropic SαS samples, tabulates the empirical
/// characteristic function of the real marginal against
/// `exp(-gamma·|t|^alpha)`, and dumps the leading real-part samples.
pub fn run_noise_validate(spec: &NoiseValidateSpec, out_dir: &Path) -> Result<NoiseValidation> {
    let started = Instant::now();
    let params = NoiseParams::new(spec.alpha, spec.gamma)?;
    let mut rng = derive_rng(spec.seed, &[DOMAIN_NOISE, tag_f64(spec.alpha), tag_f64(spec.gamma)]);
    let samples = sample_complex_isotropic_sas(&params, spec.n, &mut rng);
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();

    let band = 4.0 / (spec.n.max(1) as f64).sqrt();
    let rows: Vec<EcfRow> = ECF_T_GRID
        .iter()
        .map(|&t| {
            let ecf = empirical_cf(&re, t);
            let theory = theoretical_cf(&params, t);
            EcfRow {
                t,
                ecf_abs: ecf.norm(),
                theory,
                abs_error: (ecf - theory).norm(),
            }
        })
        .collect();

    let checked = spec.n >= ECF_MIN_SAMPLES;
    let passed = checked.then(|| rows.iter().all(|r| r.abs_error < band));
    if !checked {
        log::warn!(
            "noise-validate: {} samples are too few for the {band:.3} ECF band; check skipped",
            spec.n
        );
    }
    let max_abs_sample = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let ecf_path = out_dir.join("ecf.csv");
    let mut w = CsvWriter::create(&ecf_path, &["t", "ecf_abs", "theory", "abs_error"])?;
    for r in &rows {
        w.row(&[
            fmt_angle(r.t),
            format!("{:.8}", r.ecf_abs),
            format!("{:.8}", r.theory),
            format!("{:.8}", r.abs_error),
        ])?;
    }
    let mut files = vec![w.finish()?];

    let samples_path = out_dir.join("noise_samples.csv");
    let mut w = CsvWriter::create(&samples_path, &["index", "real_part"])?;
    for (i, v) in re.iter().take(SAMPLE_DUMP_LEN).enumerate() {
        w.row(&[i.to_string(), format!("{v:.8}")])?;
    }
    files.push(w.finish()?);

    let mut manifest = RunManifest::new(
        "noise-validate",
        spec.seed,
        serde_json::to_value(spec).expect("serializable spec"),
    );
    manifest.outputs = file_names(&files);
    manifest.notes = serde_json::json!({
        "band": band,
        "band_checked": checked,
        "passed": passed,
        "max_abs_sample": max_abs_sample,
    });
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    files.push(manifest.write(out_dir)?);

    Ok(NoiseValidation { rows, band, checked, passed, max_abs_sample, files })
}

// ---------------------------------------------------------------------------
// beta-trace
// ---------------------------------------------------------------------------

/// Output of [`run_beta_trace`].
#[derive(Debug)]
pub struct BetaTraceRun {
    pub bounds: BetaBounds,
    pub beta_fixed: f64,
    pub angles: Vec<f64>,
    pub beta_theta: Vec<f64>,
    pub g: Vec<f64>,
    pub files: Vec<PathBuf>,
}

/// Emits the directional relaxation-parameter curve `beta_theta`, the fixed
/// reference value, and the bound scan `g(θ)` for a single scenario point.
pub fn run_beta_trace(cfg: &ExperimentConfig, out_dir: &Path) -> Result<BetaTraceRun> {
    let started = Instant::now();
    cfg.validate()?;
    let (alpha, gsnr_db) = cfg.single_point()?;

    let geom = cfg.geometry_model()?;
    let scene = cfg.scene_model()?;
    let grid = cfg.grid()?;
    let gamma = gamma_for_gsnr(signal_power(cfg), gsnr_db, alpha)?;
    let noise = NoiseParams::new(alpha, gamma)?;
    let mut rng = derive_rng(
        cfg.run.master_seed,
        &[DOMAIN_BETA, tag_f64(alpha), tag_f64(gsnr_db)],
    );
    let x = synthesize_snapshots(&geom, &scene, cfg.run.snapshots, Some(&noise), &mut rng)?;

    let r = match cfg.estimator.kind {
        ScatterKind::Sample => sample_covariance(&x)?,
        ScatterKind::Flom => flom_matrix(&x, cfg.estimator.flom_p)?,
        ScatterKind::Sscm => sscm(&x)?,
    };
    let bounds = beta_bounds(&geom, &r, &grid, cfg.assumed_k())?;
    let beta_fixed = fixed_beta(&bounds);
    let beta_theta = directional_beta(&geom, &r, &bounds, &grid)?;
    let g = bound_scan(&geom, &r, &grid)?;

    let path = out_dir.join("beta_trace.csv");
    let mut w = CsvWriter::create(&path, &["angle_deg", "beta_theta", "beta_fixed", "g_theta"])?;
    for (i, &angle) in grid.angles().iter().enumerate() {
        w.row(&[
            fmt_angle(angle),
            fmt_beta(beta_theta[i]),
            fmt_beta(beta_fixed),
            fmt_beta(g[i]),
        ])?;
    }
    let mut files = vec![w.finish()?];

    let mut manifest = RunManifest::new("beta-trace", cfg.run.master_seed, config_json(cfg));
    manifest.outputs = file_names(&files);
    manifest.notes = serde_json::json!({
        "beta_min": bounds.beta_min(),
        "beta_max": bounds.beta_max(),
        "xi": bounds.xi(),
        "beta_fixed": beta_fixed,
        "collapsed": bounds.collapsed(),
        "source_set_estimate": bounds.source_set_estimate(),
    });
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    files.push(manifest.write(out_dir)?);

    Ok(BetaTraceRun {
        bounds,
        beta_fixed,
        angles: grid.angles().to_vec(),
        beta_theta,
        g,
        files,
    })
}

fn config_json(cfg: &ExperimentConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config is serializable")
}

fn file_names(files: &[PathBuf]) -> Vec<String> {
    files
        .iter()
        .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
        .collect()
}

//! Experiment configuration: one TOML document drives every subcommand.
//!
//! The full schema with defaults and commentary ships in `configs/` at the
//! repository root.

use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, SourceScene};
use crate::error::{Error, Result};
use crate::estimators::ScatterKind;
use crate::spectral::ScanGrid;

/// An estimation method as named in result tables. The four core algorithms
/// run on the configured estimator; `flom_music` and `sscm_music` are MUSIC
/// paired with their namesake scatter estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Capon,
    Music,
    MusicLikeFixed,
    MusicLikeAdaptive,
    FlomMusic,
    SscmMusic,
}

impl Method {
    /// All methods compared in the resolution studies.
    pub fn standard_set() -> Vec<Method> {
        vec![
            Method::MusicLikeAdaptive,
            Method::MusicLikeFixed,
            Method::Music,
            Method::FlomMusic,
            Method::SscmMusic,
        ]
    }

    /// Stable tag for seed derivation; never reorder.
    pub fn seed_tag(&self) -> u64 {
        match self {
            Method::Capon => 1,
            Method::Music => 2,
            Method::MusicLikeFixed => 3,
            Method::MusicLikeAdaptive => 4,
            Method::FlomMusic => 5,
            Method::SscmMusic => 6,
        }
    }

    /// Scatter estimator this method runs on, honoring the config for the
    /// non-aliased methods.
    pub fn scatter_kind(&self, cfg: &EstimatorConfig) -> ScatterKind {
        match self {
            Method::FlomMusic => ScatterKind::Flom,
            Method::SscmMusic => ScatterKind::Sscm,
            _ => cfg.kind,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Method::Capon => "capon",
            Method::Music => "music",
            Method::MusicLikeFixed => "music_like_fixed",
            Method::MusicLikeAdaptive => "music_like_adaptive",
            Method::FlomMusic => "flom_music",
            Method::SscmMusic => "sscm_music",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Sensor count M.
    pub sensors: usize,
    /// Scan-grid step in degrees.
    #[serde(default = "default_grid_step")]
    pub grid_step_deg: f64,
    /// Element spacing in half-wavelengths.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// True source directions in degrees, strictly inside (0, 180).
    pub doas_deg: Vec<f64>,
    /// Per-source powers; defaults to 1.0 each.
    #[serde(default)]
    pub powers: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Characteristic exponents to sweep.
    pub alphas: Vec<f64>,
    /// Generalized SNR points in dB.
    pub gsnr_db: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Estimator for the non-aliased methods.
    #[serde(default = "default_estimator_kind")]
    pub kind: ScatterKind,
    /// FLOM order p.
    #[serde(default = "default_flom_p")]
    pub flom_p: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { kind: default_estimator_kind(), flom_p: default_flom_p() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Methods to evaluate.
    #[serde(default = "Method::standard_set")]
    pub methods: Vec<Method>,
    /// Snapshots per trial.
    pub snapshots: usize,
    /// Assumed source count for subspace splits and bound estimation;
    /// defaults to the true scene size.
    #[serde(default)]
    pub assumed_k: Option<usize>,
    /// Monte Carlo trials per sweep point.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Resolution tolerance in degrees.
    #[serde(default = "default_tol")]
    pub tol_deg: f64,
    /// Master seed; every derived stream is a pure function of it.
    pub master_seed: u64,
}

fn default_grid_step() -> f64 {
    0.5
}

fn default_spacing() -> f64 {
    1.0
}

fn default_estimator_kind() -> ScatterKind {
    ScatterKind::Sample
}

fn default_flom_p() -> f64 {
    1.1
}

fn default_trials() -> usize {
    200
}

fn default_tol() -> f64 {
    2.0
}

/// Top-level experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub scene: SceneConfig,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    pub run: RunConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.geometry.sensors < 2 {
            return Err(Error::config(
                "geometry.sensors",
                format!("need at least 2 sensors, got {}", self.geometry.sensors),
            ));
        }
        ScanGrid::with_step(self.geometry.grid_step_deg)
            .map_err(|e| Error::config("geometry.grid_step_deg", e.to_string()))?;
        ArrayGeometry::with_spacing(self.geometry.sensors, self.geometry.spacing)
            .map_err(|e| Error::config("geometry.spacing", e.to_string()))?;
        self.scene_model()
            .map_err(|e| Error::config("scene.doas_deg", e.to_string()))?;
        if self.noise.alphas.is_empty() {
            return Err(Error::config("noise.alphas", "at least one alpha is required"));
        }
        for &alpha in &self.noise.alphas {
            if !(alpha > 0.0 && alpha <= 2.0) {
                return Err(Error::config(
                    "noise.alphas",
                    format!("alpha must lie in (0, 2], got {alpha}"),
                ));
            }
        }
        if self.noise.gsnr_db.is_empty() {
            return Err(Error::config("noise.gsnr_db", "at least one GSNR point is required"));
        }
        if self.run.methods.is_empty() {
            return Err(Error::config("run.methods", "at least one method is required"));
        }
        if self.run.snapshots == 0 {
            return Err(Error::config("run.snapshots", "at least one snapshot is required"));
        }
        if self.run.trials == 0 {
            return Err(Error::config("run.trials", "at least one trial is required"));
        }
        if !(self.run.tol_deg > 0.0) {
            return Err(Error::config(
                "run.tol_deg",
                format!("tolerance must be positive, got {}", self.run.tol_deg),
            ));
        }
        let k = self.assumed_k();
        if k >= self.geometry.sensors {
            return Err(Error::config(
                "run.assumed_k",
                format!(
                    "assumed source count {k} must be below the sensor count {}",
                    self.geometry.sensors
                ),
            ));
        }
        if !(self.estimator.flom_p > 1.0 && self.estimator.flom_p <= 2.0) {
            return Err(Error::config(
                "estimator.flom_p",
                format!("FLOM order must lie in (1, 2], got {}", self.estimator.flom_p),
            ));
        }
        Ok(())
    }

    pub fn assumed_k(&self) -> usize {
        self.run.assumed_k.unwrap_or(self.scene.doas_deg.len())
    }

    pub fn geometry_model(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::with_spacing(self.geometry.sensors, self.geometry.spacing)
    }

    pub fn scene_model(&self) -> Result<SourceScene> {
        match &self.scene.powers {
            Some(p) => SourceScene::with_powers(self.scene.doas_deg.clone(), p.clone()),
            None => SourceScene::new(self.scene.doas_deg.clone()),
        }
    }

    pub fn grid(&self) -> Result<ScanGrid> {
        ScanGrid::with_step(self.geometry.grid_step_deg)
    }

    /// Requires exactly one (alpha, gsnr) point; used by the single-scenario
    /// commands.
    pub fn single_point(&self) -> Result<(f64, f64)> {
        if self.noise.alphas.len() != 1 || self.noise.gsnr_db.len() != 1 {
            return Err(Error::config(
                "noise",
                format!(
                    "this command needs exactly one (alpha, gsnr) point, got {} alphas and {} GSNRs",
                    self.noise.alphas.len(),
                    self.noise.gsnr_db.len()
                ),
            ));
        }
        Ok((self.noise.alphas[0], self.noise.gsnr_db[0]))
    }
}

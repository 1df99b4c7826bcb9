//! Uniform linear array geometry, steering vectors, and snapshot synthesis.
//!
//! Angles are measured in degrees from the array axis, so a source sweep
//! spans (0°, 180°) with 90° broadside. With spacing expressed in
//! half-wavelengths the phase of sensor `m` (zero-based, first sensor at the
//! origin as phase reference) is `π·spacing·m·cos(θ)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::noise::{sample_complex_isotropic_sas, NoiseParams};

/// Uniform linear array: sensor count and element spacing in half-wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    m: usize,
    spacing: f64,
}

impl ArrayGeometry {
    /// Half-wavelength ULA with `m >= 2` sensors.
    pub fn new(m: usize) -> Result<Self> {
        Self::with_spacing(m, 1.0)
    }

    /// ULA with explicit spacing (in half-wavelengths).
    pub fn with_spacing(m: usize, spacing: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("m", format!("need at least 2 sensors, got {m}")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid(
                "spacing",
                format!("spacing must be positive and finite, got {spacing}"),
            ));
        }
        Ok(Self { m, spacing })
    }

    pub fn sensors(&self) -> usize {
        self.m
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// Unit-norm steering vector for direction `theta_deg` in [0, 180].
///
/// Entry `m` equals `(1/√M)·exp(j·π·spacing·m·cos θ)`.
pub fn steering_vector(geom: &ArrayGeometry, theta_deg: f64) -> Result<DVector<Complex64>> {
    if !(0.0..=180.0).contains(&theta_deg) {
        return Err(Error::invalid(
            "theta",
            format!("direction must lie in [0, 180] degrees, got {theta_deg}"),
        ));
    }
    let cos_theta = theta_deg.to_radians().cos();
    let norm = 1.0 / (geom.m as f64).sqrt();
    let phase_step = std::f64::consts::PI * geom.spacing * cos_theta;
    Ok(DVector::from_iterator(
        geom.m,
        (0..geom.m).map(|i| Complex64::from_polar(norm, phase_step * i as f64)),
    ))
}

/// Far-field sources: directions in degrees and per-source mean-square powers.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceScene {
    doas_deg: Vec<f64>,
    powers: Vec<f64>,
}

impl SourceScene {
    /// Unit-power sources at the given directions.
    pub fn new(doas_deg: Vec<f64>) -> Result<Self> {
        let powers = vec![1.0; doas_deg.len()];
        Self::with_powers(doas_deg, powers)
    }

    /// Sources with explicit powers; directions must be strictly inside
    /// (0°, 180°) and pairwise distinct.
    pub fn with_powers(doas_deg: Vec<f64>, powers: Vec<f64>) -> Result<Self> {
        if powers.len() != doas_deg.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} powers for {} sources",
                powers.len(),
                doas_deg.len()
            )));
        }
        for &theta in &doas_deg {
            if !(theta > 0.0 && theta < 180.0) {
                return Err(Error::invalid(
                    "doas",
                    format!("source direction must lie strictly inside (0, 180), got {theta}"),
                ));
            }
        }
        for (i, &a) in doas_deg.iter().enumerate() {
            if doas_deg[i + 1..].iter().any(|&b| a == b) {
                return Err(Error::invalid("doas", format!("duplicate direction {a}")));
            }
        }
        for &p in &powers {
            if !(p > 0.0) {
                return Err(Error::invalid("powers", format!("source power must be positive, got {p}")));
            }
        }
        Ok(Self { doas_deg, powers })
    }

    pub fn empty() -> Self {
        Self { doas_deg: Vec::new(), powers: Vec::new() }
    }

    pub fn doas_deg(&self) -> &[f64] {
        &self.doas_deg
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn source_count(&self) -> usize {
        self.doas_deg.len()
    }

    /// Mean of the per-source powers; 0 for an empty scene.
    pub fn mean_power(&self) -> f64 {
        if self.powers.is_empty() {
            0.0
        } else {
            self.powers.iter().sum::<f64>() / self.powers.len() as f64
        }
    }
}

/// Complex sensor data block: `sensors x snapshots`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: DMatrix<Complex64>,
}

impl SnapshotMatrix {
    pub fn from_matrix(data: DMatrix<Complex64>) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Sensor count (rows).
    pub fn sensors(&self) -> usize {
        self.data.nrows()
    }

    /// Snapshot count (columns).
    pub fn snapshots(&self) -> usize {
        self.data.ncols()
    }
}

/// Synthesizes `X = A(Θ)·S + V` with circular complex Gaussian source symbols
/// and (optionally) complex isotropic SαS sensor noise.
///
/// `noise = None` disables the noise term. Deterministic given the `rng`
/// state: source symbols are drawn first (per snapshot, source-major), then
/// the noise block.
pub fn synthesize_snapshots<R: Rng + ?Sized>(
    geom: &ArrayGeometry,
    scene: &SourceScene,
    n: usize,
    noise: Option<&NoiseParams>,
    rng: &mut R,
) -> Result<SnapshotMatrix> {
    if n == 0 {
        return Err(Error::invalid("n", "snapshot count must be at least 1"));
    }
    let k = scene.source_count();
    let m = geom.sensors();
    if k >= m {
        return Err(Error::DimensionMismatch(format!(
            "{k} sources with {m} sensors; subspace methods need K < M"
        )));
    }

    let mut data = DMatrix::<Complex64>::zeros(m, n);

    if k > 0 {
        let manifold: Vec<DVector<Complex64>> = scene
            .doas_deg
            .iter()
            .map(|&theta| steering_vector(geom, theta))
            .collect::<Result<_>>()?;
        let amp: Vec<f64> = scene.powers.iter().map(|p| (p / 2.0).sqrt()).collect();
        for t in 0..n {
            for (src, a) in manifold.iter().enumerate() {
                let s = Complex64::new(gaussian(rng), gaussian(rng)) * amp[src];
                for i in 0..m {
                    data[(i, t)] += a[i] * s;
                }
            }
        }
    }

    if let Some(params) = noise {
        let v = sample_complex_isotropic_sas(params, m * n, rng);
        // Column-major fill: sensor index varies fastest, matching storage.
        for (slot, z) in data.iter_mut().zip(v) {
            *slot += z;
        }
    }

    Ok(SnapshotMatrix { data })
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    use rand_distr::StandardNormal;
    rng.sample(StandardNormal)
}

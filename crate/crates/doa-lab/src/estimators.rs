//! Scatter-matrix estimators: sample covariance, fractional lower-order
//! moment (FLOM) matrix, and spatial sign covariance matrix (SSCM).
//!
//! All three share the same elementwise accumulation order, so the FLOM
//! matrix at order `p = 2` reproduces the sample covariance bit for bit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::SnapshotMatrix;
use crate::error::{Error, Result};

/// Which statistic produced a scatter estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatterKind {
    Sample,
    Flom,
    Sscm,
}

impl std::fmt::Display for ScatterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScatterKind::Sample => write!(f, "sample"),
            ScatterKind::Flom => write!(f, "flom"),
            ScatterKind::Sscm => write!(f, "sscm"),
        }
    }
}

/// An M×M scatter matrix with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterEstimate {
    matrix: DMatrix<Complex64>,
    kind: ScatterKind,
    flom_order: Option<f64>,
}

impl ScatterEstimate {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> ScatterKind {
        self.kind
    }

    /// FLOM order `p`; present iff `kind == Flom`.
    pub fn flom_order(&self) -> Option<f64> {
        self.flom_order
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Wraps an externally built Hermitian matrix as a sample-kind estimate.
    /// Intended for constructed-covariance scenarios.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "scatter matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, kind: ScatterKind::Sample, flom_order: None })
    }
}

/// Weighted elementwise accumulation shared by all estimators:
/// `C_ik = (1/divisor)·Σ_t col_w(t)·x_i(t)·w(t,k)·conj(x_k(t))`.
///
/// `weight(t, k)` multiplies the conjugated factor; `col_scale(t)` rescales a
/// whole snapshot (used by SSCM). Snapshots with `col_scale = None` are
/// skipped.
fn accumulate<FW, FS>(
    x: &SnapshotMatrix,
    weight: FW,
    col_scale: FS,
    divisor: f64,
) -> DMatrix<Complex64>
where
    FW: Fn(usize, usize) -> f64,
    FS: Fn(usize) -> Option<f64>,
{
    let m = x.sensors();
    let n = x.snapshots();
    let data = x.data();
    let mut c = DMatrix::<Complex64>::zeros(m, m);
    for t in 0..n {
        let Some(s) = col_scale(t) else { continue };
        for k in 0..m {
            let wk = weight(t, k) * s;
            if wk == 0.0 {
                continue;
            }
            let xk = data[(k, t)].conj() * wk;
            for i in 0..m {
                c[(i, k)] += data[(i, t)] * xk;
            }
        }
    }
    c /= Complex64::new(divisor, 0.0);
    c
}

/// Sample covariance `(1/n)·X·X^H`.
pub fn sample_covariance(x: &SnapshotMatrix) -> Result<ScatterEstimate> {
    if x.snapshots() == 0 {
        return Err(Error::DegenerateInput("empty snapshot set".into()));
    }
    let c = accumulate(x, |_, _| 1.0, |_| Some(1.0), x.snapshots() as f64);
    Ok(ScatterEstimate { matrix: c, kind: ScatterKind::Sample, flom_order: None })
}

/// FLOM matrix: elementwise mean of `x_i(t)·|x_k(t)|^(p-2)·conj(x_k(t))`,
/// Hermitian-symmetrized. Requires `1 < p <= 2`.
///
/// Entries with `x_k(t) = 0` contribute nothing: `|x|^(p-2)` diverges there
/// for `p < 2`, but the full term `x·|x|^(p-2)` has magnitude `|x|^(p-1) -> 0`.
pub fn flom_matrix(x: &SnapshotMatrix, p: f64) -> Result<ScatterEstimate> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::invalid("p", format!("FLOM order must lie in (1, 2], got {p}")));
    }
    if x.snapshots() == 0 {
        return Err(Error::DegenerateInput("empty snapshot set".into()));
    }
    let data = x.data();
    let c = accumulate(
        x,
        |t, k| {
            let mag = data[(k, t)].norm();
            if mag == 0.0 {
                0.0
            } else {
                mag.powf(p - 2.0)
            }
        },
        |_| Some(1.0),
        x.snapshots() as f64,
    );
    // Finite-sample FLOM is not exactly Hermitian; store (C + C^H)/2 so the
    // eigendecomposition downstream sees a Hermitian operator.
    let herm = (&c + c.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(ScatterEstimate { matrix: herm, kind: ScatterKind::Flom, flom_order: Some(p) })
}

/// Spatial sign covariance: mean outer product of unit-normalized snapshots.
/// All-zero snapshots are skipped with the divisor reduced accordingly.
pub fn sscm(x: &SnapshotMatrix) -> Result<ScatterEstimate> {
    if x.snapshots() == 0 {
        return Err(Error::DegenerateInput("empty snapshot set".into()));
    }
    let data = x.data();
    let norms: Vec<f64> = (0..x.snapshots()).map(|t| data.column(t).norm()).collect();
    let live = norms.iter().filter(|&&v| v > 0.0).count();
    if live == 0 {
        return Err(Error::DegenerateInput("all snapshots are zero; SSCM undefined".into()));
    }
    let c = accumulate(
        x,
        |_, _| 1.0,
        |t| {
            let v = norms[t];
            (v > 0.0).then(|| 1.0 / (v * v))
        },
        live as f64,
    );
    Ok(ScatterEstimate { matrix: c, kind: ScatterKind::Sscm, flom_order: None })
}

//! Symmetric alpha-stable (SαS) noise generation and GSNR calibration.
//!
//! Real samples come from the Chambers–Mallows–Stuck transform; complex
//! isotropic samples use the sub-Gaussian representation `X = √A·(G₁ + jG₂)`
//! with `A` a totally-skewed positive (α/2)-stable variate drawn by Kanter's
//! method.
//!
//! Scale convention: a real sample stream with parameters `(alpha, gamma)` has
//! characteristic function `E[exp(jtX)] = exp(-gamma·|t|^alpha)`. For the
//! complex isotropic stream the same expression holds with `|t|` the modulus
//! of a complex test point, and the real and imaginary marginals are each
//! real SαS with the *same* scale `gamma` (the isotropic-to-marginal scale
//! mapping is the identity under this convention). At `alpha = 2` each
//! marginal is Gaussian with variance `2·gamma`.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

/// Parameters of a symmetric alpha-stable law.
///
/// Location and skewness are fixed at zero; the law is fully described by the
/// characteristic exponent `alpha` and the scale `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    alpha: f64,
    gamma: f64,
}

impl NoiseParams {
    /// Validates `0 < alpha <= 2` and `gamma > 0`.
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::invalid(
                "alpha",
                format!("characteristic exponent must lie in (0, 2], got {alpha}"),
            ));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(
                "gamma",
                format!("scale must be positive and finite, got {gamma}"),
            ));
        }
        Ok(Self { alpha, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Location parameter (always 0).
    pub fn mu(&self) -> f64 {
        0.0
    }

    /// Skewness parameter (always 0).
    pub fn skew(&self) -> f64 {
        0.0
    }
}

/// One standard symmetric alpha-stable variate, cf `exp(-|t|^alpha)`.
///
/// Chambers–Mallows–Stuck for the symmetric case:
/// `X = sin(αV)/cos(V)^{1/α} · (cos((1-α)V)/W)^{(1-α)/α}`
/// with `V ~ U(-π/2, π/2)` and `W ~ Exp(1)`. The formula is continuous in
/// alpha on (0, 2]; at alpha = 2 it reduces to `2·sin(V)·√W ~ N(0, 2)` and at
/// alpha = 1 to `tan(V)` (Cauchy).
fn standard_sas<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = (rng.gen::<f64>() - 0.5) * PI;
    let w = exp1(rng);
    if alpha == 1.0 {
        return v.tan();
    }
    let inv_alpha = 1.0 / alpha;
    let x = (alpha * v).sin() / v.cos().powf(inv_alpha);
    x * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) * inv_alpha)
}

/// One positive stable variate with Laplace transform `E[exp(-sA)] = exp(-s^a)`
/// for `0 < a < 1` (Kanter's representation).
fn standard_positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    debug_assert!(a > 0.0 && a < 1.0);
    // Keep u strictly interior: the closed-form has removable 0/0 endpoints.
    let u = rng.gen::<f64>().clamp(1e-12, 1.0 - 1e-12);
    let w = exp1(rng);
    let pu = PI * u;
    let ratio = (a * pu).sin().powf(a / (1.0 - a)) * ((1.0 - a) * pu).sin()
        / pu.sin().powf(1.0 / (1.0 - a));
    (ratio / w).powf((1.0 - a) / a)
}

/// Unit-rate exponential, clamped away from zero so downstream negative
/// powers cannot produce infinities.
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen(); // [0, 1)
    (-(1.0 - u).ln()).max(f64::MIN_POSITIVE)
}

/// Draws `n` i.i.d. real SαS samples with cf `exp(-gamma·|t|^alpha)`.
///
/// Deterministic given the state of `rng`.
pub fn sample_real_sas<R: Rng + ?Sized>(params: &NoiseParams, n: usize, rng: &mut R) -> Vec<f64> {
    let scale = params.gamma.powf(1.0 / params.alpha);
    (0..n).map(|_| scale * standard_sas(params.alpha, rng)).collect()
}

/// Draws `n` i.i.d. complex isotropic SαS samples.
///
/// The modulus characteristic function is `exp(-gamma·|t|^alpha)`; both
/// marginals are real SαS with scale `gamma` (see the module docs for the
/// convention).
pub fn sample_complex_isotropic_sas<R: Rng + ?Sized>(
    params: &NoiseParams,
    n: usize,
    rng: &mut R,
) -> Vec<num_complex::Complex64> {
    use num_complex::Complex64;
    let alpha = params.alpha;
    // sqrt(2)·gamma^{1/alpha} makes the conditional Gaussian mixture close to
    // exp(-gamma·|t|^alpha); see module docs.
    let scale = std::f64::consts::SQRT_2 * params.gamma.powf(1.0 / alpha);
    (0..n)
        .map(|_| {
            let radial = if alpha == 2.0 {
                1.0
            } else {
                standard_positive_stable(alpha / 2.0, rng).sqrt()
            };
            let g1 = gaussian(rng);
            let g2 = gaussian(rng);
            Complex64::new(scale * radial * g1, scale * radial * g2)
        })
        .collect()
}

/// Standard normal via `rand_distr` (ziggurat).
fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    use rand_distr::StandardNormal;
    rng.sample(StandardNormal)
}

/// Scale `gamma` that realizes a target generalized SNR
/// `GSNR(dB) = 10·log10(signal_power / gamma^alpha)`.
pub fn gamma_for_gsnr(signal_power: f64, gsnr_db: f64, alpha: f64) -> Result<f64> {
    if !(signal_power > 0.0) {
        return Err(Error::invalid(
            "signal_power",
            format!("must be positive, got {signal_power}"),
        ));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::invalid(
            "alpha",
            format!("characteristic exponent must lie in (0, 2], got {alpha}"),
        ));
    }
    Ok((signal_power / 10f64.powf(gsnr_db / 10.0)).powf(1.0 / alpha))
}

/// Generalized SNR in dB realized by a given scale; inverse of
/// [`gamma_for_gsnr`].
pub fn gsnr_of_gamma(signal_power: f64, gamma: f64, alpha: f64) -> Result<f64> {
    if !(signal_power > 0.0) {
        return Err(Error::invalid(
            "signal_power",
            format!("must be positive, got {signal_power}"),
        ));
    }
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
    }
    Ok(10.0 * (signal_power / gamma.powf(alpha)).log10())
}

/// Empirical characteristic function `(1/n)·Σ exp(jtx_i)` of a real sample.
pub fn empirical_cf(samples: &[f64], t: f64) -> num_complex::Complex64 {
    use num_complex::Complex64;
    if samples.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let sum: Complex64 = samples
        .iter()
        .map(|&x| Complex64::new((t * x).cos(), (t * x).sin()))
        .sum();
    sum / samples.len() as f64
}

/// Theoretical SαS characteristic function `exp(-gamma·|t|^alpha)`.
pub fn theoretical_cf(params: &NoiseParams, t: f64) -> f64 {
    (-params.gamma * t.abs().powf(params.alpha)).exp()
}

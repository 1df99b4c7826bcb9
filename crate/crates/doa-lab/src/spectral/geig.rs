//! Smallest generalized eigenpair of the pencil `(R, a·a^H + β·I)`.
//!
//! With `R = U·Λ·U^H` (precomputed once per scatter matrix) and the
//! substitution `w = U·Λ^{-1/2}·z`, the pencil problem
//! `R·w = λ·(a·a^H + β·I)·w` becomes the standard Hermitian problem
//! `(β·Λ^{-1} + b·b^H)·z = (1/λ)·z` with `b = Λ^{-1/2}·U^H·a`: diagonal plus
//! rank one, courtesy of the rank-1 structure of the constraint matrix. The
//! largest eigenvalue of that update is the root of a one-dimensional secular
//! equation, so each look direction costs O(M²) after the O(M³)
//! eigendecomposition.
//!
//! Near-singular `R` falls back to a dense reduction through the analytic
//! inverse square root of `B = a·a^H + β·I`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{phase_normalize, EigenDecomposition};

/// Relative eigenvalue ratio below which `R` is treated as singular and the
/// dense fallback is used.
pub(crate) const SINGULAR_RATIO: f64 = 1e-12;

/// Solves for the smallest generalized eigenpair given the eigendecomposition
/// of `R` and the already-transformed steering vector `a_tilde = U^H·a`.
///
/// Returns `(lambda_min, w)` with `‖w‖ = 1` and `w` phase-normalized.
pub(crate) fn min_eigpair_core(
    eig: &EigenDecomposition,
    a: &DVector<Complex64>,
    a_tilde: &DVector<Complex64>,
    beta: f64,
) -> (f64, DVector<Complex64>) {
    let lambdas = eig.eigenvalues();
    let m = lambdas.len();

    if eig.condition_ratio() <= SINGULAR_RATIO {
        return dense_fallback(eig, a, beta);
    }

    // Diagonal d_i = beta/lambda_i (ascending, since lambdas are descending)
    // and rank-one load b_i = a_tilde_i / sqrt(lambda_i).
    let mut d = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for i in 0..m {
        d.push(beta / lambdas[i]);
        b.push(a_tilde[i] / Complex64::new(lambdas[i].sqrt(), 0.0));
    }
    let b_sq: Vec<f64> = b.iter().map(|z| z.norm_sqr()).collect();

    let (mu, z) = largest_rank_one_update_eigenpair(&d, &b, &b_sq);

    // Back-substitute w = U·Λ^{-1/2}·z and normalize.
    let mut w = DVector::<Complex64>::zeros(m);
    for (col, zi) in z.iter().enumerate() {
        if zi.norm_sqr() == 0.0 {
            continue;
        }
        let scaled = zi / Complex64::new(lambdas[col].sqrt(), 0.0);
        w.axpy(scaled, &eig.eigenvectors().column(col).clone_owned(), Complex64::new(1.0, 0.0));
    }
    let norm = w.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return dense_fallback(eig, a, beta);
    }
    w /= Complex64::new(norm, 0.0);
    phase_normalize(&mut w);
    (1.0 / mu, w)
}

/// Largest eigenpair of `diag(d) + b·b^H` for real ascending-ish `d`.
///
/// Indices with `b_i = 0` decouple: their `d_i` stay eigenvalues with basis
/// eigenvectors. The coupled block's largest eigenvalue is the unique root of
/// `f(mu) = 1 + Σ |b_i|²/(d_i - mu)` in `(max d_i, max d_i + Σ|b_i|²]`.
fn largest_rank_one_update_eigenpair(
    d: &[f64],
    b: &[Complex64],
    b_sq: &[f64],
) -> (f64, DVector<Complex64>) {
    let m = d.len();
    let active: Vec<usize> = (0..m).filter(|&i| b_sq[i] > 0.0).collect();

    // Best decoupled eigenvalue, if any coordinate is inactive.
    let passive_best = (0..m)
        .filter(|i| !active.contains(i))
        .max_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());

    if active.is_empty() {
        let j = passive_best.expect("nonempty matrix");
        let mut z = DVector::zeros(m);
        z[j] = Complex64::new(1.0, 0.0);
        return (d[j], z);
    }

    let d_top = active.iter().map(|&i| d[i]).fold(f64::NEG_INFINITY, f64::max);
    let j_top = active
        .iter()
        .copied()
        .max_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap())
        .unwrap();
    let load: f64 = active.iter().map(|&i| b_sq[i]).sum();

    let mu = if active.len() == 1 {
        // Single coupled coordinate: exact root.
        d_top + load
    } else {
        secular_root(d, b_sq, &active, d_top, b_sq[j_top], load)
    };

    // A decoupled diagonal entry can still dominate the coupled root.
    if let Some(j) = passive_best {
        if d[j] > mu {
            let mut z = DVector::zeros(m);
            z[j] = Complex64::new(1.0, 0.0);
            return (d[j], z);
        }
    }

    // Eigenvector of the coupled block: z_i = b_i / (d_i - mu).
    let mut z = DVector::<Complex64>::zeros(m);
    let mut finite = true;
    for &i in &active {
        let denom = d[i] - mu;
        let zi = b[i] / Complex64::new(denom, 0.0);
        if !zi.re.is_finite() || !zi.im.is_finite() {
            finite = false;
            break;
        }
        z[i] = zi;
    }
    let norm = z.norm();
    if !finite || !(norm > 0.0) || !norm.is_finite() {
        // Root collided with d_top to machine precision: the eigenvector is
        // the corresponding basis vector to working accuracy.
        let mut z = DVector::zeros(m);
        z[j_top] = Complex64::new(1.0, 0.0);
        return (mu, z);
    }
    (mu, z / Complex64::new(norm, 0.0))
}

/// Root of `f(mu) = 1 + Σ_{i active} b_sq[i]/(d[i] - mu)` above `d_top`.
///
/// `f` is increasing and concave on `(d_top, ∞)`, negative at
/// `d_top + b_top` and non-negative at `d_top + load`, so Newton from the
/// left bracket edge converges monotonically; bisection guards each step.
fn secular_root(
    d: &[f64],
    b_sq: &[f64],
    active: &[usize],
    d_top: f64,
    b_top: f64,
    load: f64,
) -> f64 {
    let eval = |mu: f64| -> (f64, f64) {
        let mut f = 1.0;
        let mut df = 0.0;
        for &i in active {
            let denom = d[i] - mu;
            let term = b_sq[i] / denom;
            f += term;
            df += term / denom;
        }
        (f, df)
    };

    let mut lo = d_top + b_top;
    let mut hi = d_top + load;
    if hi <= lo {
        return hi;
    }
    let (flo, _) = eval(lo);
    if flo >= 0.0 {
        return lo;
    }

    let mut mu = lo;
    for _ in 0..128 {
        let (f, df) = eval(mu);
        if f == 0.0 {
            return mu;
        }
        if f < 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let newton = mu - f / df;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == mu || (hi - lo) <= f64::EPSILON * hi.abs() {
            return mu;
        }
        mu = next;
    }
    mu
}

/// Dense path for (near-)singular `R`: reduce through the analytic
/// `B^{-1/2} = p·I + q·a·a^H` and solve the standard Hermitian problem
/// `B^{-1/2}·R·B^{-1/2}·y = λ·y`.
fn dense_fallback(
    eig: &EigenDecomposition,
    a: &DVector<Complex64>,
    beta: f64,
) -> (f64, DVector<Complex64>) {
    let m = a.len();
    let s = a.norm_squared();
    let p = 1.0 / beta.sqrt();
    let q = if s > 0.0 { (1.0 / (beta + s).sqrt() - p) / s } else { 0.0 };
    let outer = a * a.adjoint();
    let b_inv_half = DMatrix::identity(m, m) * Complex64::new(p, 0.0)
        + outer * Complex64::new(q, 0.0);

    let r = eig.reconstruct();
    let reduced = &b_inv_half * r * &b_inv_half;
    let sym = (&reduced + reduced.adjoint()) * Complex64::new(0.5, 0.0);
    let se = sym.symmetric_eigen();

    let mut min_idx = 0;
    for i in 1..m {
        if se.eigenvalues[i] < se.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let lambda = se.eigenvalues[min_idx];
    let mut w = &b_inv_half * se.eigenvectors.column(min_idx).clone_owned();
    let norm = w.norm();
    w /= Complex64::new(norm, 0.0);
    phase_normalize(&mut w);
    (lambda, w)
}

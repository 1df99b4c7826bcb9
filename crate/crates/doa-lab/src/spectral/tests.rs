use super::*;
use crate::array::{synthesize_snapshots, SourceScene};
use crate::estimators::sample_covariance;
use crate::metrics::find_peaks;
use crate::noise::{gamma_for_gsnr, NoiseParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_hermitian(m: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(m, m, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    (&x + x.adjoint()) * c(0.5, 0.0)
}

fn random_psd(m: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(m, 2 * m, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let g = &x * x.adjoint();
    &g / c(2.0 * m as f64, 0.0)
}

fn estimate(m: DMatrix<Complex64>) -> ScatterEstimate {
    ScatterEstimate::from_matrix(m).unwrap()
}

fn frob(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Independent dense reference for the smallest generalized eigenpair:
/// builds `B` explicitly, forms `B^{-1/2}` through its own eigendecomposition
/// (not the analytic rank-1 identity used internally), and solves the reduced
/// standard problem.
fn dense_min_geig_oracle(
    r: &DMatrix<Complex64>,
    a: &DVector<Complex64>,
    beta: f64,
) -> (f64, DVector<Complex64>) {
    let m = r.nrows();
    let b = a * a.adjoint() + DMatrix::identity(m, m) * c(beta, 0.0);
    let be = b.clone().symmetric_eigen();
    let mut inv_half = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        let col = be.eigenvectors.column(i);
        let scale = c(1.0 / be.eigenvalues[i].sqrt(), 0.0);
        inv_half += col * col.adjoint() * scale;
    }
    let reduced = &inv_half * r * &inv_half;
    let sym = (&reduced + reduced.adjoint()) * c(0.5, 0.0);
    let se = sym.symmetric_eigen();
    let mut min_idx = 0;
    for i in 1..m {
        if se.eigenvalues[i] < se.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    let w = &inv_half * se.eigenvectors.column(min_idx).clone_owned();
    let norm = w.norm();
    (se.eigenvalues[min_idx], w / c(norm, 0.0))
}

fn geig_residual(
    r: &DMatrix<Complex64>,
    a: &DVector<Complex64>,
    beta: f64,
    lambda: f64,
    w: &DVector<Complex64>,
) -> f64 {
    let m = r.nrows();
    let b = a * a.adjoint() + DMatrix::identity(m, m) * c(beta, 0.0);
    (r * w - b * w * c(lambda, 0.0)).norm()
}

// ---- eigendecomposition -------------------------------------------------

#[test]
fn identity_eigenvalues_are_all_one() {
    let eig = hermitian_eig(&estimate(DMatrix::identity(3, 3))).unwrap();
    for &v in eig.eigenvalues() {
        assert!((v - 1.0).abs() < 1e-14);
    }
}

#[test]
fn diagonal_matrix_sorted_descending_with_basis_vectors() {
    let r = DMatrix::from_diagonal(&DVector::from_column_slice(&[c(1.0, 0.0), c(3.0, 0.0)]));
    let eig = hermitian_eig(&estimate(r)).unwrap();
    assert!((eig.eigenvalues()[0] - 3.0).abs() < 1e-14);
    assert!((eig.eigenvalues()[1] - 1.0).abs() < 1e-14);
    // Up to phase (pinned real-positive), columns are e2 and e1.
    assert!((eig.eigenvectors()[(1, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    assert!((eig.eigenvectors()[(0, 1)] - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn random_hermitian_reconstructs() {
    let r = random_hermitian(8, 5);
    let eig = hermitian_eig(&estimate(r.clone())).unwrap();
    let diff = eig.reconstruct() - &r;
    assert!(frob(&diff) <= 1e-10 * frob(&r));

    // Orthonormal columns.
    let gram = eig.eigenvectors().adjoint() * eig.eigenvectors();
    let eye = DMatrix::<Complex64>::identity(8, 8);
    assert!(frob(&(gram - eye)) <= 1e-10);

    // Per-pair residual against the spectral norm.
    let spec_norm = eig.eigenvalues().iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    for i in 0..8 {
        let u = eig.eigenvectors().column(i).clone_owned();
        let resid = (&r * &u - &u * c(eig.eigenvalues()[i], 0.0)).norm();
        assert!(resid <= 1e-10 * spec_norm.max(1e-300));
    }
}

#[test]
fn non_hermitian_input_rejected() {
    let mut m = random_hermitian(4, 9);
    m[(0, 1)] += c(0.1, 0.0);
    assert!(matches!(
        hermitian_eig(&estimate(m)),
        Err(Error::NonHermitian { .. })
    ));
}

#[test]
fn eigenvector_phase_is_pinned() {
    let r = random_hermitian(6, 11);
    let eig = hermitian_eig(&estimate(r)).unwrap();
    for i in 0..6 {
        let col = eig.eigenvectors().column(i);
        let (idx, _) = col
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
            .unwrap();
        assert!(col[idx].im.abs() < 1e-12);
        assert!(col[idx].re > 0.0);
    }
}

// ---- Capon ---------------------------------------------------------------

#[test]
fn capon_identity_is_flat_zero_db() {
    let geom = ArrayGeometry::new(4).unwrap();
    let s = capon_spectrum(&geom, &estimate(DMatrix::identity(4, 4)), &ScanGrid::default()).unwrap();
    for &v in s.values_db() {
        assert!(v.abs() < 1e-10, "value {v}");
    }
    assert_eq!(s.method(), SpectrumMethod::Capon);
    assert!(s.beta_trace().is_none());
}

#[test]
fn capon_scaled_identity_is_flat_three_db() {
    let geom = ArrayGeometry::new(4).unwrap();
    let r = DMatrix::identity(4, 4) * c(2.0, 0.0);
    let s = capon_spectrum(&geom, &estimate(r), &ScanGrid::default()).unwrap();
    let expected = 10.0 * 2f64.log10();
    for &v in s.values_db() {
        assert!((v - expected).abs() < 1e-10);
    }
}

#[test]
fn capon_two_source_scene_peaks_near_truth() {
    let geom = ArrayGeometry::new(10).unwrap();
    let scene = SourceScene::new(vec![50.0, 110.0]).unwrap();
    let gamma = gamma_for_gsnr(1.0, 10.0, 2.0).unwrap();
    let noise = NoiseParams::new(2.0, gamma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let x = synthesize_snapshots(&geom, &scene, 200, Some(&noise), &mut rng).unwrap();
    let r = sample_covariance(&x).unwrap();
    let s = capon_spectrum(&geom, &r, &ScanGrid::default()).unwrap();
    let peaks = find_peaks(&s, 2);
    assert_eq!(peaks.len(), 2);
    assert!((peaks[0] - 50.0).abs() <= 1.0, "peak at {}", peaks[0]);
    assert!((peaks[1] - 110.0).abs() <= 1.0, "peak at {}", peaks[1]);
}

#[test]
fn capon_rejects_singular_matrix() {
    let geom = ArrayGeometry::new(3).unwrap();
    let a = steering_vector(&geom, 70.0).unwrap();
    let r = &a * a.adjoint(); // rank one
    assert!(matches!(
        capon_spectrum(&geom, &estimate(r), &ScanGrid::default()),
        Err(Error::SingularMatrix { .. })
    ));
}

// ---- MUSIC ---------------------------------------------------------------

#[test]
fn music_with_zero_assumed_sources_is_exactly_flat() {
    let geom = ArrayGeometry::new(5).unwrap();
    let r = random_psd(5, 13);
    let s = music_spectrum(&geom, &estimate(r), &ScanGrid::default(), 0).unwrap();
    assert!(s.values_db().iter().all(|&v| v == 0.0));
}

#[test]
fn music_constructed_covariance_peaks_at_source() {
    let geom = ArrayGeometry::new(6).unwrap();
    let a = steering_vector(&geom, 70.0).unwrap();
    let r = &a * a.adjoint() + DMatrix::identity(6, 6) * c(0.01, 0.0);
    let grid = ScanGrid::default();
    let s = music_spectrum(&geom, &estimate(r), &grid, 1).unwrap();
    // 70° lies on the grid; the projection onto the noise subspace vanishes
    // there, so the capped maximum must sit at 70°.
    let (imax, vmax) = s
        .values_db()
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
        .unwrap();
    assert_eq!(s.grid()[imax], 70.0);
    assert!(*vmax >= 100.0, "null depth {vmax} dB");
    assert!(s.values_db().iter().all(|v| v.is_finite()));
}

#[test]
fn music_rejects_k_at_or_above_sensor_count() {
    let geom = ArrayGeometry::new(4).unwrap();
    let r = estimate(random_psd(4, 15));
    assert!(music_spectrum(&geom, &r, &ScanGrid::default(), 4).is_err());
    assert!(music_spectrum(&geom, &r, &ScanGrid::default(), 3).is_ok());
}

#[test]
fn music_invariant_to_positive_scaling() {
    let geom = ArrayGeometry::new(5).unwrap();
    let r = random_psd(5, 17);
    let grid = ScanGrid::with_step(1.0).unwrap();
    let s1 = music_spectrum(&geom, &estimate(r.clone()), &grid, 2).unwrap();
    let s2 = music_spectrum(&geom, &estimate(&r * c(7.5, 0.0)), &grid, 2).unwrap();
    for (a, b) in s1.values_db().iter().zip(s2.values_db()) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

// ---- generalized eigenpair -----------------------------------------------

#[test]
fn analytic_two_by_two_pencil() {
    // R = diag(3,1), a = e1, beta = 1: generalized eigenvalues {3/2, 1};
    // the smallest is 1 with eigenvector e2, orthogonal to a.
    let r = DMatrix::from_diagonal(&DVector::from_column_slice(&[c(3.0, 0.0), c(1.0, 0.0)]));
    let a = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
    let (lambda, w) = min_generalized_eigpair(&estimate(r), &a, 1.0).unwrap();
    assert!((lambda - 1.0).abs() < 1e-12);
    assert!(w.dotc(&a).norm() < 1e-12, "w must be orthogonal to a");
    assert!((w[1].norm() - 1.0).abs() < 1e-12);
    assert!((w.norm() - 1.0).abs() < 1e-10);
}

#[test]
fn identity_pencil_gives_unit_eigenvalue() {
    // R = a·a^H + beta·I: every vector is a generalized eigenvector with
    // eigenvalue 1; check the residual only.
    let geom = ArrayGeometry::new(5).unwrap();
    let a = steering_vector(&geom, 42.0).unwrap();
    let beta = 0.7;
    let r = &a * a.adjoint() + DMatrix::identity(5, 5) * c(beta, 0.0);
    let (lambda, w) = min_generalized_eigpair(&estimate(r.clone()), &a, beta).unwrap();
    assert!((lambda - 1.0).abs() < 1e-10);
    assert!(geig_residual(&r, &a, beta, lambda, &w) <= 1e-9 * frob(&r));
}

#[test]
fn random_instances_match_dense_oracle() {
    let geom = ArrayGeometry::new(10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..25 {
        let r = random_psd(10, 1000 + trial);
        let theta = rng.gen_range(1.0..179.0);
        let a = steering_vector(&geom, theta).unwrap();
        let beta = rng.gen_range(0.05..2.0);
        let (lambda, w) = min_generalized_eigpair(&estimate(r.clone()), &a, beta).unwrap();
        let (lambda_ref, _) = dense_min_geig_oracle(&r, &a, beta);
        assert!(
            (lambda - lambda_ref).abs() <= 1e-9 * lambda_ref.abs().max(1e-300),
            "trial {trial}: {lambda} vs oracle {lambda_ref}"
        );
        assert!((w.norm() - 1.0).abs() < 1e-10);
        assert!(geig_residual(&r, &a, beta, lambda, &w) <= 1e-9 * frob(&r));
    }
}

#[test]
fn singular_scatter_uses_dense_path() {
    // Rank-deficient R: the smallest generalized eigenvalue is 0 with the
    // eigenvector in the null space.
    let geom = ArrayGeometry::new(4).unwrap();
    let a1 = steering_vector(&geom, 60.0).unwrap();
    let r = &a1 * a1.adjoint() * c(5.0, 0.0);
    let a = steering_vector(&geom, 100.0).unwrap();
    let (lambda, w) = min_generalized_eigpair(&estimate(r.clone()), &a, 0.5).unwrap();
    assert!(lambda.abs() < 1e-10);
    assert!(geig_residual(&r, &a, 0.5, lambda, &w) <= 1e-9 * frob(&r).max(1.0));
}

#[test]
fn geig_rejects_nonpositive_beta() {
    let r = estimate(random_psd(3, 21));
    let a = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    assert!(min_generalized_eigpair(&r, &a, 0.0).is_err());
    assert!(min_generalized_eigpair(&r, &a, -1.0).is_err());
}

// ---- relaxation bounds ---------------------------------------------------

#[test]
fn flat_bound_scan_triggers_fallback() {
    let geom = ArrayGeometry::new(6).unwrap();
    let r = DMatrix::identity(6, 6) * c(3.0, 0.0);
    let b = beta_bounds(&geom, &estimate(r), &ScanGrid::default(), 2).unwrap();
    assert!(b.collapsed());
    // g ≡ 1 for any scaled identity.
    assert!((b.beta_max() - 1.0).abs() < 1e-9);
    assert!((b.beta_min() - 0.9).abs() < 1e-9);
    assert!(b.beta_min() <= b.beta_max());
}

#[test]
fn two_source_scene_bounds_bracket_sources() {
    let geom = ArrayGeometry::new(10).unwrap();
    let scene = SourceScene::new(vec![50.0, 110.0]).unwrap();
    let gamma = gamma_for_gsnr(1.0, 0.0, 2.0).unwrap();
    let noise = NoiseParams::new(2.0, gamma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let x = synthesize_snapshots(&geom, &scene, 200, Some(&noise), &mut rng).unwrap();
    let r = sample_covariance(&x).unwrap();
    let b = beta_bounds(&geom, &r, &ScanGrid::default(), 2).unwrap();
    assert!(!b.collapsed());
    assert!(b.beta_min() < b.beta_max());
    assert_eq!(b.source_set_estimate().len(), 2);
    assert!((b.source_set_estimate()[0] - 50.0).abs() <= 1.0);
    assert!((b.source_set_estimate()[1] - 110.0).abs() <= 1.0);
    assert!((b.xi() - b.beta_min() / b.beta_max()).abs() < 1e-15);
}

#[test]
fn fixed_beta_arithmetic() {
    let b = BetaBounds::from_raw(1.0, 2.0, vec![]).unwrap();
    assert!((fixed_beta(&b) - 1.5).abs() < 1e-15);
    let b = BetaBounds::from_raw(1.0, 1.0, vec![]).unwrap();
    assert!((fixed_beta(&b) - 1.0).abs() < 1e-15);
    let b = BetaBounds::from_raw(0.1, 10.0, vec![]).unwrap();
    assert!((fixed_beta(&b) - 0.199).abs() < 1e-15);
    // Strictly interior when the bounds are separated.
    let b = BetaBounds::from_raw(0.3, 0.9, vec![]).unwrap();
    let f = fixed_beta(&b);
    assert!(f > 0.3 && f < 0.9);
}

#[test]
fn directional_beta_endpoints_and_range() {
    // Anchor aligned with e1; steering the identity-geometry broadside makes
    // the coupling span (0, 1] across the grid.
    let geom = ArrayGeometry::new(8).unwrap();
    let scene = SourceScene::new(vec![60.0, 120.0]).unwrap();
    let noise = NoiseParams::new(2.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let x = synthesize_snapshots(&geom, &scene, 150, Some(&noise), &mut rng).unwrap();
    let r = sample_covariance(&x).unwrap();
    let grid = ScanGrid::default();
    let b = beta_bounds(&geom, &r, &grid, 2).unwrap();
    let betas = directional_beta(&geom, &r, &b, &grid).unwrap();
    assert_eq!(betas.len(), grid.len());
    for &v in &betas {
        assert!(v >= b.beta_min() - 1e-12 && v <= b.beta_max() + 1e-12);
    }
}

#[test]
fn directional_beta_formula_matches_coupling() {
    // Hand-built decomposition: R diagonal with known anchor e3.
    let geom = ArrayGeometry::new(3).unwrap();
    let r = DMatrix::from_diagonal(&DVector::from_column_slice(&[
        c(3.0, 0.0),
        c(2.0, 0.0),
        c(1.0, 0.0),
    ]));
    let est = estimate(r);
    let grid = ScanGrid::with_step(1.0).unwrap();
    let b = BetaBounds::from_raw(0.2, 0.8, vec![]).unwrap();
    let betas = directional_beta(&geom, &est, &b, &grid).unwrap();
    let eig = hermitian_eig(&est).unwrap();
    let anchor = eig.anchor_eigenvector();
    for (i, &theta) in grid.angles().iter().enumerate() {
        let a = steering_vector(&geom, theta).unwrap();
        let coupling = anchor.dotc(&a).norm().min(1.0);
        let expected = 0.8 - 0.6 * coupling;
        assert!((betas[i] - expected).abs() < 1e-12);
    }
}

// ---- MUSIC-like spectrum ---------------------------------------------------

#[test]
fn music_like_constructed_covariance_peaks_at_source() {
    let geom = ArrayGeometry::new(6).unwrap();
    let a = steering_vector(&geom, 70.0).unwrap();
    let r = &a * a.adjoint() + DMatrix::identity(6, 6) * c(1e-4, 0.0);
    let grid = ScanGrid::default();
    for mode in [BetaMode::Fixed, BetaMode::Directional] {
        let s = music_like_spectrum(&geom, &estimate(r.clone()), &grid, mode, 1).unwrap();
        let (imax, _) = s
            .values_db()
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.partial_cmp(y).unwrap())
            .unwrap();
        assert_eq!(s.grid()[imax], 70.0, "mode {mode:?}");
        assert!(s.beta_trace().is_some());
        assert!(s.values_db().iter().all(|v| v.is_finite() && *v <= SPECTRUM_DB_CAP));
    }
}

#[test]
fn music_like_beta_trace_respects_bounds() {
    let geom = ArrayGeometry::new(10).unwrap();
    let scene = SourceScene::new(vec![50.0, 110.0]).unwrap();
    let gamma = gamma_for_gsnr(1.0, -5.0, 2.0).unwrap();
    let noise = NoiseParams::new(2.0, gamma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let x = synthesize_snapshots(&geom, &scene, 200, Some(&noise), &mut rng).unwrap();
    let r = sample_covariance(&x).unwrap();
    let grid = ScanGrid::default();
    let b = beta_bounds(&geom, &r, &grid, 2).unwrap();

    let fixed = music_like_spectrum(&geom, &r, &grid, BetaMode::Fixed, 2).unwrap();
    let trace = fixed.beta_trace().unwrap();
    assert!(trace.windows(2).all(|w| w[0] == w[1]), "fixed beta must be constant");
    let expected = fixed_beta(&b);
    assert!((trace[0] - expected).abs() < 1e-12);

    let adaptive = music_like_spectrum(&geom, &r, &grid, BetaMode::Directional, 2).unwrap();
    for &v in adaptive.beta_trace().unwrap() {
        assert!(v >= b.beta_min() - 1e-12 && v <= b.beta_max() + 1e-12);
    }
    assert_eq!(adaptive.method(), SpectrumMethod::MusicLikeAdaptive);
    assert_eq!(fixed.method(), SpectrumMethod::MusicLikeFixed);
}

#[test]
fn grid_excludes_endpoints_by_one_step() {
    let g = ScanGrid::with_step(0.5).unwrap();
    assert_eq!(g.len(), 359);
    assert_eq!(g.angles()[0], 0.5);
    assert_eq!(*g.angles().last().unwrap(), 179.5);
    let g = ScanGrid::with_step(1.0).unwrap();
    assert_eq!(g.len(), 179);
    assert!(ScanGrid::with_step(0.0).is_err());
    assert!(ScanGrid::with_step(90.0).is_err());
}

#[test]
fn spectrum_from_parts_enforces_invariants() {
    let grid = vec![1.0, 2.0, 3.0];
    let vals = vec![0.0, 1.0, 0.0];
    assert!(Spectrum::from_parts(grid.clone(), vals.clone(), SpectrumMethod::Music, None).is_ok());
    assert!(Spectrum::from_parts(grid.clone(), vec![0.0], SpectrumMethod::Music, None).is_err());
    assert!(Spectrum::from_parts(
        grid.clone(),
        vals.clone(),
        SpectrumMethod::Music,
        Some(vec![1.0, 1.0, 1.0])
    )
    .is_err());
    assert!(Spectrum::from_parts(
        grid.clone(),
        vals.clone(),
        SpectrumMethod::MusicLikeFixed,
        None
    )
    .is_err());
    assert!(Spectrum::from_parts(
        grid,
        vals,
        SpectrumMethod::MusicLikeAdaptive,
        Some(vec![1.0, 1.0, 1.0])
    )
    .is_ok());
}

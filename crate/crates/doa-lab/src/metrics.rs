//! Peak extraction and Monte Carlo scoring: resolution success and RMSE.

use crate::error::{Error, Result};
use crate::spectral::Spectrum;

/// Indices of strict local maxima, restricted to the open interior.
///
/// Runs of equal values count as one candidate reported at the leftmost
/// index; a run touching either boundary is not a peak.
pub(crate) fn strict_local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    let mut peaks = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[end + 1] == values[start] {
            end += 1;
        }
        if start > 0
            && end + 1 < n
            && values[start] > values[start - 1]
            && values[end] > values[end + 1]
        {
            peaks.push(start);
        }
        start = end + 1;
    }
    peaks
}

/// Up to `k` spectrum peaks, strongest first by value, returned in ascending
/// angle order.
pub fn find_peaks(spectrum: &Spectrum, k: usize) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let values = spectrum.values_db();
    let mut idx = strict_local_maxima(values);
    idx.sort_by(|&i, &j| {
        values[j]
            .partial_cmp(&values[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    idx.truncate(k);
    let mut angles: Vec<f64> = idx.iter().map(|&i| spectrum.grid()[i]).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles
}

/// True iff the peak list matches the truth one-to-one in order, every pair
/// within `tol_deg`.
pub fn resolution_success(peaks: &[f64], truth: &[f64], tol_deg: f64) -> bool {
    if peaks.len() != truth.len() {
        return false;
    }
    let mut p = peaks.to_vec();
    let mut t = truth.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.iter().zip(&t).all(|(a, b)| (a - b).abs() <= tol_deg)
}

/// Root-mean-square angular error over the order-preserving matching.
///
/// Only meaningful for resolved trials; a length mismatch (no one-to-one
/// matching exists) is rejected.
pub fn rmse_deg(peaks: &[f64], truth: &[f64]) -> Result<f64> {
    if peaks.len() != truth.len() || truth.is_empty() {
        return Err(Error::ContractViolation(format!(
            "RMSE needs a one-to-one peak/truth matching, got {} peaks for {} sources",
            peaks.len(),
            truth.len()
        )));
    }
    let mut p = peaks.to_vec();
    let mut t = truth.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mse = p
        .iter()
        .zip(&t)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / truth.len() as f64;
    Ok(mse.sqrt())
}

/// Outcome of scoring one Monte Carlo trial.
///
/// `rmse_deg` is present exactly when the trial resolved; unresolved trials
/// have no well-defined matching.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub estimated_doas: Vec<f64>,
    pub resolved: bool,
    pub rmse_deg: Option<f64>,
}

/// Extracts peaks from a spectrum and scores them against the true
/// directions.
pub fn evaluate_trial(spectrum: &Spectrum, truth: &[f64], tol_deg: f64) -> TrialOutcome {
    let peaks = find_peaks(spectrum, truth.len());
    let resolved = resolution_success(&peaks, truth, tol_deg);
    let rmse = if resolved {
        Some(rmse_deg(&peaks, truth).expect("resolved trials always match one-to-one"))
    } else {
        None
    };
    TrialOutcome { estimated_doas: peaks, resolved, rmse_deg: rmse }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::ArrayGeometry;
    use crate::estimators::ScatterEstimate;
    use crate::spectral::{music_spectrum, ScanGrid};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    // Grid is 1°-spaced starting at 1°, so index i sits at angle (i+1)°.
    fn spectrum_from_values(values: Vec<f64>) -> Spectrum {
        let grid: Vec<f64> = (1..=values.len()).map(|i| i as f64).collect();
        Spectrum::from_parts(grid, values, crate::spectral::SpectrumMethod::Music, None).unwrap()
    }

    #[test]
    fn monotone_spectrum_has_no_peaks() {
        let s = spectrum_from_values((0..20).map(|i| i as f64).collect());
        assert!(find_peaks(&s, 3).is_empty());
    }

    #[test]
    fn triangular_bump_is_single_peak() {
        let mut v = vec![0.0; 21];
        for (i, val) in v.iter_mut().enumerate() {
            *val = 10.0 - (i as f64 - 10.0).abs();
        }
        let s = spectrum_from_values(v);
        let peaks = find_peaks(&s, 3);
        assert_eq!(peaks.len(), 1);
        // Grid starts at 1° with 1° steps -> index 10 is angle 11°.
        assert_eq!(peaks[0], 11.0);
    }

    #[test]
    fn plateau_takes_leftmost_index() {
        let v = vec![0.0, 1.0, 5.0, 5.0, 5.0, 1.0, 0.0];
        let s = spectrum_from_values(v);
        let peaks = find_peaks(&s, 2);
        assert_eq!(peaks, vec![3.0]); // index 2 -> angle 3°
    }

    #[test]
    fn boundary_runs_are_not_peaks() {
        let v = vec![5.0, 5.0, 1.0, 0.0, 1.0, 7.0];
        let s = spectrum_from_values(v);
        assert!(find_peaks(&s, 3).is_empty());
    }

    #[test]
    fn peaks_ranked_by_value_then_returned_ascending() {
        let v = vec![0.0, 3.0, 0.0, 9.0, 0.0, 6.0, 0.0];
        let s = spectrum_from_values(v);
        assert_eq!(find_peaks(&s, 2), vec![4.0, 6.0]); // indices 3 and 5
        assert_eq!(find_peaks(&s, 1), vec![4.0]);
        assert_eq!(find_peaks(&s, 10), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn peak_search_invariant_to_constant_offset() {
        let v = vec![0.0, 3.0, 0.0, 9.0, 0.0, 6.0, 0.0];
        let shifted: Vec<f64> = v.iter().map(|x| x + 42.0).collect();
        let a = find_peaks(&spectrum_from_values(v), 3);
        let b = find_peaks(&spectrum_from_values(shifted), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn resolution_examples() {
        assert!(resolution_success(&[50.5, 60.2, 109.8], &[50.0, 60.0, 110.0], 2.0));
        assert!(!resolution_success(&[55.0, 110.1], &[50.0, 60.0, 110.0], 2.0));
        assert!(!resolution_success(&[50.0, 60.0, 115.0], &[50.0, 60.0, 110.0], 2.0));
    }

    #[test]
    fn resolution_monotone_in_tolerance() {
        let peaks = [49.0, 61.5, 110.4];
        let truth = [50.0, 60.0, 110.0];
        let mut prev = false;
        for tol in [0.5, 1.0, 1.5, 2.0, 5.0] {
            let ok = resolution_success(&peaks, &truth, tol);
            assert!(!prev || ok, "success must be monotone in tolerance");
            prev = ok;
        }
        assert!(prev);
    }

    #[test]
    fn rmse_examples() {
        assert!((rmse_deg(&[51.0, 61.0, 111.0], &[50.0, 60.0, 110.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(rmse_deg(&[50.0, 60.0], &[50.0, 60.0]).unwrap(), 0.0);
        let r = rmse_deg(&[50.5, 59.5, 110.0], &[50.0, 60.0, 110.0]).unwrap();
        assert!((r - (0.5f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((r - 0.4082).abs() < 1e-4);
    }

    #[test]
    fn rmse_rejects_count_mismatch() {
        assert!(matches!(
            rmse_deg(&[55.0, 110.0], &[50.0, 60.0, 110.0]),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn rmse_zero_iff_exact() {
        let truth = [50.0, 60.0, 110.0];
        assert_eq!(rmse_deg(&truth, &truth).unwrap(), 0.0);
        assert!(rmse_deg(&[50.0, 60.0, 110.1], &truth).unwrap() > 0.0);
    }

    #[test]
    fn evaluate_trial_populates_rmse_only_when_resolved() {
        let v = vec![0.0, 3.0, 0.0, 9.0, 0.0, 6.0, 0.0];
        let s = spectrum_from_values(v);
        let hit = evaluate_trial(&s, &[2.0, 4.0, 6.0], 1.0);
        assert!(hit.resolved);
        assert!(hit.rmse_deg.is_some());
        let miss = evaluate_trial(&s, &[2.0, 4.0, 20.0], 1.0);
        assert!(!miss.resolved);
        assert!(miss.rmse_deg.is_none());
    }

    #[test]
    fn flat_music_spectrum_yields_no_peaks() {
        // End-to-end sanity: k = 0 MUSIC is flat, so no spurious peaks.
        let geom = ArrayGeometry::new(3).unwrap();
        let r = ScatterEstimate::from_matrix(DMatrix::from_diagonal_element(
            3,
            3,
            Complex64::new(1.0, 0.0),
        ))
        .unwrap();
        let s = music_spectrum(&geom, &r, &ScanGrid::with_step(1.0).unwrap(), 0).unwrap();
        assert!(find_peaks(&s, 3).is_empty());
    }
}

//! Left correlation models for the design matrix `A = S^(1/2) H`.
//!
//! The theory side only ever consumes the eigenvalues of the correlation
//! matrix; the simulation side also needs its symmetric square root to
//! synthesize correlated designs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Eigenvalues under this are treated as floating-point noise and clamped
/// to zero; anything below is a genuinely non-PSD model.
const PSD_TOLERANCE: f64 = 1e-12;
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Spectral data of a correlation matrix: the eigenvalues feeding the
/// scalar analysis and the symmetric square root feeding the sampler.
#[derive(Debug, Clone)]
pub struct CorrelationSpectrum {
    /// Eigenvalues sorted ascending, all nonnegative.
    pub eigenvalues: Vec<f64>,
    /// Symmetric square root `U * sqrt(G) * U^T`.
    pub sqrt_factor: DMatrix<f64>,
    /// Dimension m.
    pub m: usize,
}

impl CorrelationSpectrum {
    /// `max_j gamma_j`; the mu fixed point lives strictly below `1/gamma_max`.
    pub fn gamma_max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// `(1/m) * sum_j gamma_j`.
    pub fn normalized_trace(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.m as f64
    }
}

/// How to build the correlation matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationModel {
    /// Entries `rho^(|i-j|^2)` with unit diagonal.
    Exponential { rho: f64 },
    /// The uncorrelated case.
    Identity,
    /// A caller-supplied symmetric PSD matrix, row-major.
    Explicit { rows: Vec<Vec<f64>> },
}

impl CorrelationModel {
    /// Materialize the m-by-m correlation matrix.
    pub fn build(&self, m: usize) -> Result<DMatrix<f64>> {
        if m == 0 {
            return Err(Error::invalid("correlation dimension m must be positive"));
        }
        match self {
            CorrelationModel::Exponential { rho } => build_exponential(*rho, m),
            CorrelationModel::Identity => Ok(DMatrix::identity(m, m)),
            CorrelationModel::Explicit { rows } => {
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(Error::invalid(format!(
                        "explicit correlation matrix must be {m}x{m}"
                    )));
                }
                Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
            }
        }
    }

    /// Build and decompose in one step.
    pub fn spectrum(&self, m: usize) -> Result<CorrelationSpectrum> {
        spectral_decompose(&self.build(m)?)
    }
}

/// Exponential correlation matrix with entries `rho^(|i-j|^2)`.
///
/// Note the squared distance in the exponent; this decays much faster off
/// the diagonal than the more common `rho^|i-j|` model.
pub fn build_exponential(rho: f64, m: usize) -> Result<DMatrix<f64>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid(format!(
            "exponential correlation requires 0 <= rho < 1, got {rho}"
        )));
    }
    if m == 0 {
        return Err(Error::invalid("correlation dimension m must be positive"));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let d = i.abs_diff(j) as f64;
        if i == j {
            1.0
        } else {
            rho.powf(d * d)
        }
    }))
}

/// Eigendecompose a symmetric PSD matrix into a [`CorrelationSpectrum`].
///
/// Eigenvalues in `[-1e-12, 0)` are clamped to zero; anything below that
/// rejects the model as non-PSD. The square root is `U * sqrt(G) * U^T`,
/// which stays well defined for rank-deficient inputs.
pub fn spectral_decompose(sigma: &DMatrix<f64>) -> Result<CorrelationSpectrum> {
    let m = sigma.nrows();
    if m == 0 || sigma.ncols() != m {
        return Err(Error::invalid(
            "correlation matrix must be square and nonempty",
        ));
    }
    let mut max_asym = 0.0f64;
    for i in 0..m {
        for j in (i + 1)..m {
            max_asym = max_asym.max((sigma[(i, j)] - sigma[(j, i)]).abs());
        }
    }
    if max_asym > SYMMETRY_TOLERANCE {
        return Err(Error::AsymmetricMatrix { max_asym });
    }

    let eig = sigma.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(m);
    for &idx in &order {
        let ev = eig.eigenvalues[idx];
        if ev < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: ev });
        }
        eigenvalues.push(ev.max(0.0));
    }

    // sqrt_factor = U * diag(sqrt(gamma)) * U^T, with the clamped values
    let mut scaled = eig.eigenvectors.clone();
    for c in 0..m {
        let s = eig.eigenvalues[c].max(0.0).sqrt();
        for r in 0..m {
            scaled[(r, c)] *= s;
        }
    }
    let sqrt_factor = &scaled * eig.eigenvectors.transpose();

    Ok(CorrelationSpectrum {
        eigenvalues,
        sqrt_factor,
        m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn frob(m: &DMatrix<f64>) -> f64 {
        m.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn exponential_rho_zero_is_identity() {
        let s = build_exponential(0.0, 3).unwrap();
        assert_eq!(s, DMatrix::identity(3, 3));
    }

    #[test]
    fn exponential_two_by_two() {
        let s = build_exponential(0.7, 2).unwrap();
        assert_abs_diff_eq!(s[(0, 0)], 1.0);
        assert_abs_diff_eq!(s[(0, 1)], 0.7);
        assert_abs_diff_eq!(s[(1, 0)], 0.7);
    }

    #[test]
    fn exponential_squared_distance_exponent() {
        let s = build_exponential(0.5, 3).unwrap();
        // |i-j| = 2 -> rho^4
        assert_abs_diff_eq!(s[(0, 2)], 0.0625, epsilon = 1e-15);
    }

    #[test]
    fn exponential_rejects_bad_inputs() {
        assert!(build_exponential(1.0, 3).is_err());
        assert!(build_exponential(-0.1, 3).is_err());
        assert!(build_exponential(0.5, 0).is_err());
    }

    #[test]
    fn exponential_entries_nondecreasing_in_rho() {
        let lo = build_exponential(0.3, 5).unwrap();
        let hi = build_exponential(0.6, 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(hi[(i, j)] >= lo[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn decompose_identity() {
        let spec = spectral_decompose(&DMatrix::identity(4, 4)).unwrap();
        for &ev in &spec.eigenvalues {
            assert_abs_diff_eq!(ev, 1.0, epsilon = 1e-12);
        }
        let diff = &spec.sqrt_factor - DMatrix::identity(4, 4);
        assert!(frob(&diff) < 1e-10);
    }

    #[test]
    fn decompose_two_by_two_eigenvalues() {
        let s = build_exponential(0.7, 2).unwrap();
        let spec = spectral_decompose(&s).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[1], 1.7, epsilon = 1e-12);
    }

    #[test]
    fn decompose_rejects_asymmetric() {
        let mut s = DMatrix::identity(3, 3);
        s[(0, 1)] = 0.5;
        assert!(matches!(
            spectral_decompose(&s),
            Err(Error::AsymmetricMatrix { .. })
        ));
    }

    #[test]
    fn decompose_rejects_indefinite() {
        let mut s = DMatrix::identity(2, 2);
        s[(0, 1)] = 2.0;
        s[(1, 0)] = 2.0;
        assert!(matches!(
            spectral_decompose(&s),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn sqrt_factor_reconstructs_sigma() {
        for &(rho, m) in &[(0.0, 4), (0.5, 16), (0.7, 64), (0.95, 32)] {
            let s = build_exponential(rho, m).unwrap();
            let spec = spectral_decompose(&s).unwrap();
            let rec = &spec.sqrt_factor * &spec.sqrt_factor;
            let rel = frob(&(&rec - &s)) / frob(&s);
            assert!(rel < 1e-10, "rho={rho}, m={m}: rel err {rel:e}");
        }
    }

    #[test]
    fn trace_preserved_and_normalized() {
        let s = build_exponential(0.7, 280).unwrap();
        let spec = spectral_decompose(&s).unwrap();
        let sum: f64 = spec.eigenvalues.iter().sum();
        let rel = (sum - s.trace()).abs() / s.trace();
        assert!(rel < 1e-10);
        assert_abs_diff_eq!(spec.normalized_trace(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rank_deficient_input_is_accepted() {
        // rank-1 PSD matrix
        let v = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let s = &v * v.transpose();
        let spec = spectral_decompose(&s).unwrap();
        assert!(spec.eigenvalues[0].abs() < 1e-10);
        let rec = &spec.sqrt_factor * &spec.sqrt_factor;
        assert!(frob(&(&rec - &s)) / frob(&s) < 1e-10);
    }

    #[test]
    fn model_enum_builds() {
        let spec = CorrelationModel::Exponential { rho: 0.7 }
            .spectrum(8)
            .unwrap();
        assert_eq!(spec.m, 8);
        let id = CorrelationModel::Identity.spectrum(5).unwrap();
        assert_abs_diff_eq!(id.gamma_max(), 1.0, epsilon = 1e-12);
        let ex = CorrelationModel::Explicit {
            rows: vec![vec![1.0, 0.7], vec![0.7, 1.0]],
        }
        .spectrum(2)
        .unwrap();
        assert_abs_diff_eq!(ex.eigenvalues[1], 1.7, epsilon = 1e-12);
    }
}

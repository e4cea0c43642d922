//! Spatial correlation across the ports of a linear fluid antenna.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use super::{bessel::j0, AntennaConfig};
use crate::error::{Error, Result};

/// Jitter ladder tried, in order, when the Cholesky factorization fails.
pub const JITTER_LADDER: [f64; 6] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4];

const SYMMETRY_TOL: f64 = 1e-9;
const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Jakes-type correlation `J0(2π |n-k| W / (N-1))` between ports `n` and `k`.
pub fn build_correlation_matrix(antenna: &AntennaConfig) -> Result<DMatrix<f64>> {
    antenna.validate()?;
    let n = antenna.n_ports;
    let step = antenna.aperture / (n - 1) as f64;
    // Toeplitz: one Bessel evaluation per lag.
    let lags: Vec<f64> = (0..n).map(|d| j0(2.0 * PI * d as f64 * step)).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| lags[i.abs_diff(j)]))
}

/// Lower-triangular factor of a correlation matrix.
#[derive(Debug, Clone)]
pub struct CorrelationFactor {
    pub matrix: DMatrix<f64>,
    pub factor: DMatrix<f64>,
    pub jitter_applied: f64,
}

impl CorrelationFactor {
    pub fn n_ports(&self) -> usize {
        self.matrix.nrows()
    }

    /// Max-abs entry of `L Lᵀ - (R + jitter I)`.
    pub fn reconstruction_error(&self) -> f64 {
        reconstruction_error(&self.matrix, &self.factor, self.jitter_applied)
    }
}

fn reconstruction_error(matrix: &DMatrix<f64>, factor: &DMatrix<f64>, jitter: f64) -> f64 {
    let mut target = matrix.clone();
    for i in 0..target.nrows() {
        target[(i, i)] += jitter;
    }
    (factor * factor.transpose() - target).amax()
}

/// Cholesky factorization with the smallest jitter from [`JITTER_LADDER`]
/// that succeeds.
pub fn factorize_correlation(matrix: &DMatrix<f64>) -> Result<CorrelationFactor> {
    let n = matrix.nrows();
    if n == 0 || matrix.ncols() != n {
        return Err(Error::shape(format!(
            "correlation matrix must be square and non-empty, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let asym = (matrix - matrix.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::numeric(format!(
            "correlation matrix is asymmetric (max deviation {asym:e})"
        )));
    }
    for &jitter in &JITTER_LADDER {
        let mut shifted = matrix.clone();
        for i in 0..n {
            shifted[(i, i)] += jitter;
        }
        let Some(chol) = shifted.cholesky() else {
            continue;
        };
        let factor = chol.l();
        if !factor.iter().all(|v| v.is_finite()) {
            continue;
        }
        if reconstruction_error(matrix, &factor, jitter) <= RECONSTRUCTION_TOL {
            return Ok(CorrelationFactor {
                matrix: matrix.clone(),
                factor,
                jitter_applied: jitter,
            });
        }
    }
    Err(Error::numeric(format!(
        "cholesky factorization failed up to jitter {:e}",
        JITTER_LADDER[JITTER_LADDER.len() - 1]
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn antenna(n: usize, w: f64) -> AntennaConfig {
        AntennaConfig {
            n_ports: n,
            aperture: w,
        }
    }

    #[test]
    fn three_port_entries() {
        let r = build_correlation_matrix(&antenna(3, 1.0)).unwrap();
        for i in 0..3 {
            assert_eq!(r[(i, i)], 1.0);
        }
        assert!((r[(0, 1)] - (-0.304_242)).abs() < 1e-6);
        // quadrature oracle value of J0(2π)
        assert!((r[(0, 2)] - 0.220_277).abs() < 1e-6);
        assert_eq!(r[(0, 1)], r[(1, 0)]);
        assert_eq!(r[(0, 1)], r[(1, 2)]);
    }

    #[test]
    fn rejects_bad_antenna() {
        assert!(build_correlation_matrix(&antenna(1, 1.0)).is_err());
        assert!(build_correlation_matrix(&antenna(4, 0.0)).is_err());
        assert!(build_correlation_matrix(&antenna(4, -2.0)).is_err());
    }

    #[test]
    fn identity_factor() {
        let f = factorize_correlation(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(f.jitter_applied, 0.0);
        assert_eq!(f.factor, DMatrix::identity(4, 4));
    }

    #[test]
    fn closed_form_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let f = factorize_correlation(&m).unwrap();
        assert_eq!(f.jitter_applied, 0.0);
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.75f64.sqrt()]);
        assert!((f.factor - expect).amax() < 1e-15);
    }

    #[test]
    fn large_aperture_reconstructs() {
        let r = build_correlation_matrix(&antenna(100, 5.0)).unwrap();
        let f = factorize_correlation(&r).unwrap();
        assert!(f.reconstruction_error() <= 1e-8);
        assert!(r.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(factorize_correlation(&m), Err(Error::Numeric(_))));
    }

    #[test]
    fn rejects_unfactorizable() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(factorize_correlation(&m).is_err());
    }
}

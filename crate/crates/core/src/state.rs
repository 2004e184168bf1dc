use std::ops::Deref;

use crate::algebra::{hermitian_eigenvalues, is_positive_semidefinite, OperatorMatrix};
use crate::error::{Error, Result};

/// Default tolerance for trace, Hermiticity and positivity checks on a state.
pub const STATE_TOL: f64 = 1e-10;

/// Above this dimension positivity is certified by Cholesky instead of Jacobi.
const JACOBI_POSITIVITY_MAX_DIM: usize = 64;

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(OperatorMatrix);

impl DensityMatrix {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        Self::with_tolerance(op, STATE_TOL)
    }

    pub fn with_tolerance(op: OperatorMatrix, tol: f64) -> Result<Self> {
        check_state(&op, tol)?;
        Ok(Self(op))
    }

    pub(crate) fn new_unchecked(op: OperatorMatrix) -> Self {
        Self(op)
    }

    pub fn as_operator(&self) -> &OperatorMatrix {
        &self.0
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.0
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        purity(&self.0)
    }
}

impl Deref for DensityMatrix {
    type Target = OperatorMatrix;

    fn deref(&self) -> &OperatorMatrix {
        &self.0
    }
}

pub(crate) fn purity(rho: &OperatorMatrix) -> f64 {
    // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    rho.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// Checks trace, Hermiticity and positivity of `op`, each to `tol`.
pub fn check_state(op: &OperatorMatrix, tol: f64) -> Result<()> {
    let trace = op.trace();
    if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
    }
    let herm = op.hermiticity_error();
    if herm > tol {
        return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
    }
    let mut h = op.clone();
    h.hermitize();
    if !min_eigenvalue_at_least(&h, -tol)? {
        return Err(Error::InvalidState(format!("eigenvalue below -{tol:e}")));
    }
    Ok(())
}

/// Whether the smallest eigenvalue of Hermitian `h` is at least `bound` (`bound <= 0`).
pub(crate) fn min_eigenvalue_at_least(h: &OperatorMatrix, bound: f64) -> Result<bool> {
    if h.dim() <= JACOBI_POSITIVITY_MAX_DIM {
        Ok(hermitian_eigenvalues(h)?[0] >= bound)
    } else {
        Ok(is_positive_semidefinite(h, -bound))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Complex, ONE};

    #[test]
    fn accepts_mixture() {
        let rho = OperatorMatrix::from_diagonal(&[0.5, 0.5]);
        let dm = DensityMatrix::new(rho).unwrap();
        assert!((dm.purity() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_states() {
        assert!(DensityMatrix::new(OperatorMatrix::from_diagonal(&[0.6, 0.6])).is_err());
        assert!(DensityMatrix::new(OperatorMatrix::from_diagonal(&[1.5, -0.5])).is_err());
        let mut nonherm = OperatorMatrix::from_diagonal(&[0.5, 0.5]);
        nonherm[(0, 1)] = Complex::new(0.1, 0.0);
        assert!(DensityMatrix::new(nonherm).is_err());
        // Large dimension goes through the Cholesky route.
        let mut big = OperatorMatrix::zeros(80);
        big[(0, 0)] = Complex::new(1.1, 0.0);
        big[(1, 1)] = Complex::new(-0.1, 0.0);
        assert!(DensityMatrix::new(big).is_err());
        let mut ok = OperatorMatrix::zeros(80);
        ok[(79, 79)] = ONE;
        assert!(DensityMatrix::new(ok).is_ok());
    }
}

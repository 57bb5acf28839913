use serde::{Deserialize, Serialize};

use super::eigen::eigensystem_unchecked;
use crate::error::{QslError, Result};
use crate::linalg::{
    hermitian_deviation, hermitian_part, max_abs, outer, sandwich, trace, trace_of_product,
    CMatrix, CVector, C64,
};

/// Deviations up to this size are repaired by `validate_state`; larger ones are errors.
pub const REPAIR_TOL: f64 = 1e-6;
/// Eigenvalues above `-CLAMP_TOL` are considered nonnegative as they are.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

/// A pure state vector or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(CVector),
    Mixed(CMatrix),
}

impl QuantumState {
    /// Validated pure state.
    pub fn pure(amplitudes: CVector) -> Result<Self> {
        validate_state(QuantumState::Pure(amplitudes))
    }

    /// Validated density matrix.
    pub fn mixed(matrix: CMatrix) -> Result<Self> {
        validate_state(QuantumState::Mixed(matrix))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        QuantumState::Mixed(CMatrix::identity(dim, dim).scale(1.0 / dim as f64))
    }

    pub fn kind(&self) -> StateKind {
        match self {
            QuantumState::Pure(_) => StateKind::Pure,
            QuantumState::Mixed(_) => StateKind::Mixed,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QuantumState::Pure(_))
    }

    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(v) => v.len(),
            QuantumState::Mixed(m) => m.nrows(),
        }
    }

    pub fn density(&self) -> CMatrix {
        match self {
            QuantumState::Pure(v) => outer(v),
            QuantumState::Mixed(m) => m.clone(),
        }
    }

    pub fn as_vector(&self) -> Option<&CVector> {
        match self {
            QuantumState::Pure(v) => Some(v),
            QuantumState::Mixed(_) => None,
        }
    }

    /// `tr(ρ²)`
    pub fn purity(&self) -> f64 {
        match self {
            QuantumState::Pure(v) => v.norm_squared().powi(2),
            QuantumState::Mixed(m) => trace_of_product(m, m).re,
        }
    }

    /// Eigenvalues of the density matrix, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure(v) => {
                let mut p = vec![0.0; v.len()];
                *p.last_mut().unwrap() = v.norm_squared();
                p
            }
            QuantumState::Mixed(m) => eigensystem_unchecked(m).eigenvalues,
        }
    }

    /// `U ψ` or `U ρ U†`.
    pub fn evolve(&self, u: &CMatrix) -> QuantumState {
        match self {
            QuantumState::Pure(v) => QuantumState::Pure(u * v),
            QuantumState::Mixed(m) => QuantumState::Mixed(u * m * u.adjoint()),
        }
    }

    /// `tr(ρ O)`, complex in general.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        check_dim(self.dim(), op.nrows())?;
        Ok(match self {
            QuantumState::Pure(v) => sandwich(v, op, v),
            QuantumState::Mixed(m) => trace_of_product(m, op),
        })
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QslError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Checks the state invariants, repairing small deviations.
///
/// Pure states are renormalized. Density matrices are replaced by their
/// Hermitian part, eigenvalues in `[-1e-6, -1e-10)` are clamped to zero and
/// the trace is renormalized.
pub fn validate_state(s: QuantumState) -> Result<QuantumState> {
    match s {
        QuantumState::Pure(v) => {
            if v.is_empty() {
                return Err(QslError::DimensionMismatch {
                    expected: 1,
                    found: 0,
                });
            }
            let norm = v.norm();
            let deviation = (norm - 1.0).abs();
            if !norm.is_finite() || deviation > REPAIR_TOL {
                return Err(QslError::NotNormalized { deviation });
            }
            Ok(QuantumState::Pure(v.unscale(norm)))
        }
        QuantumState::Mixed(m) => {
            if !m.is_square() || m.nrows() == 0 {
                return Err(QslError::DimensionMismatch {
                    expected: m.nrows(),
                    found: m.ncols(),
                });
            }
            let deviation = hermitian_deviation(&m);
            if deviation > REPAIR_TOL {
                return Err(QslError::NotHermitian { deviation });
            }
            let mut m = hermitian_part(&m);
            let tr = trace(&m).re;
            let deviation = (tr - 1.0).abs();
            if !tr.is_finite() || deviation > REPAIR_TOL {
                return Err(QslError::NotNormalized { deviation });
            }
            let es = eigensystem_unchecked(&m);
            let min_eigenvalue = es.ground_energy();
            if min_eigenvalue < -REPAIR_TOL {
                return Err(QslError::NotPositive { min_eigenvalue });
            }
            if min_eigenvalue < -CLAMP_TOL {
                m = es.map_spectrum(|p| C64::new(p.max(0.0), 0.0));
            }
            let tr = trace(&m).re;
            Ok(QuantumState::Mixed(m.unscale(tr)))
        }
    }
}

/// `⟨H⟩ = tr(ρ H)`.
pub fn mean_energy(s: &QuantumState, h: &CMatrix) -> Result<f64> {
    Ok(s.expectation(h)?.re)
}

/// `⟨H²⟩ − ⟨H⟩²`, computed as `⟨(H − ⟨H⟩)²⟩` and clamped at zero.
pub fn energy_variance(s: &QuantumState, h: &CMatrix) -> Result<f64> {
    let mean = mean_energy(s, h)?;
    let mut shifted = h.clone();
    for k in 0..shifted.nrows() {
        shifted[(k, k)] -= mean;
    }
    let var = match s {
        QuantumState::Pure(v) => (&shifted * v).norm_squared(),
        QuantumState::Mixed(m) => trace_of_product(&(&shifted * m), &shifted).re,
    };
    Ok(var.max(0.0))
}

/// Largest elementwise difference between the two density matrices.
pub fn state_distance_max(a: &QuantumState, b: &QuantumState) -> f64 {
    max_abs(&(a.density() - b.density()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis, c, diag, pauli_x, real};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus() -> QuantumState {
        QuantumState::pure(CVector::from_vec(vec![
            real(FRAC_1_SQRT_2),
            real(FRAC_1_SQRT_2),
        ]))
        .unwrap()
    }

    #[test]
    fn maximally_mixed_is_valid() {
        let s = QuantumState::mixed(CMatrix::identity(2, 2).scale(0.5)).unwrap();
        let p = s.spectrum();
        assert!((p[0] - 0.5).abs() < 1e-14 && (p[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn basis_state_is_pure() {
        let s = QuantumState::pure(basis(2, 0)).unwrap();
        assert!((s.purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_violation_is_rejected() {
        let err = QuantumState::mixed(diag(&[0.7, 0.4])).unwrap_err();
        assert!(matches!(err, QslError::NotNormalized { .. }));
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        let err = QuantumState::mixed(diag(&[1.2, -0.2])).unwrap_err();
        assert!(matches!(err, QslError::NotPositive { .. }));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = diag(&[0.5, 0.5]);
        m[(0, 1)] = c(0.1, 0.0);
        let err = QuantumState::mixed(m).unwrap_err();
        assert!(matches!(err, QslError::NotHermitian { .. }));
    }

    #[test]
    fn small_deviations_are_repaired() {
        let s = QuantumState::pure(CVector::from_vec(vec![real(1.0 + 1e-8), real(0.0)])).unwrap();
        assert!((s.as_vector().unwrap().norm() - 1.0).abs() < 1e-15);
        let s = QuantumState::mixed(diag(&[1.0 + 1e-8, -1e-8])).unwrap();
        assert!(s.spectrum()[0] >= 0.0);
    }

    #[test]
    fn mean_energy_examples() {
        let e = 3.0;
        let h = diag(&[0.0, e]);
        assert!(
            (mean_energy(&QuantumState::maximally_mixed(2), &h).unwrap() - e / 2.0).abs() < 1e-14
        );
        let one = QuantumState::pure(basis(2, 1)).unwrap();
        assert!((mean_energy(&one, &h).unwrap() - e).abs() < 1e-14);
        assert!((mean_energy(&plus(), &pauli_x()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn energy_variance_examples() {
        let e = 3.0;
        let h = diag(&[0.0, e]);
        let one = QuantumState::pure(basis(2, 1)).unwrap();
        assert_eq!(energy_variance(&one, &h).unwrap(), 0.0);
        assert!((energy_variance(&plus(), &h).unwrap() - e * e / 4.0).abs() < 1e-13);
        let mm = QuantumState::maximally_mixed(2);
        assert!((energy_variance(&mm, &h).unwrap() - e * e / 4.0).abs() < 1e-13);
    }

    #[test]
    fn dimension_mismatch() {
        let err = mean_energy(&plus(), &CMatrix::identity(3, 3)).unwrap_err();
        assert!(matches!(err, QslError::DimensionMismatch { .. }));
    }
}

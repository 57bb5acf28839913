use crate::error::{QslError, Result};
use crate::linalg::{hermitian_deviation, hermitian_part, max_abs, CMatrix, C64};

/// Absolute Hermiticity tolerance, relative to `max(1, ‖H‖_max)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Spectral decomposition `H = V diag(E) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `V diag(f(E)) V†`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            let w = f(e);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
        }
        scaled * v.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|e| C64::new(e, 0.0))
    }
}

pub fn check_hermitian(h: &CMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(QslError::DimensionMismatch {
            expected: h.nrows(),
            found: h.ncols(),
        });
    }
    let deviation = hermitian_deviation(h);
    if deviation > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(QslError::NotHermitian { deviation });
    }
    Ok(())
}

/// Diagonalizes a Hermitian matrix.
pub fn eigensystem(h: &CMatrix) -> Result<EigenSystem> {
    check_hermitian(h)?;
    Ok(eigensystem_unchecked(h))
}

/// Diagonalizes the Hermitian part of `h` without validating it.
pub(crate) fn eigensystem_unchecked(h: &CMatrix) -> EigenSystem {
    let eig = hermitian_part(h).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    EigenSystem {
        eigenvalues,
        eigenvectors,
    }
}

/// Lowest eigenvalue of the Hermitian part of `h`.
pub(crate) fn lowest_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_part(h)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

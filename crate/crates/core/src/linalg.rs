//! Small dense complex linear-algebra helpers shared by the other modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest elementwise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest elementwise deviation `|m_jk - conj(m_kj)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for k in j..n {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

/// `(m + m†) / 2`
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            acc += a[(j, k)] * b[(k, j)];
        }
    }
    acc
}

/// `⟨u|m|v⟩`
pub fn sandwich(u: &CVector, m: &CMatrix, v: &CVector) -> C64 {
    u.dotc(&(m * v))
}

pub fn outer(u: &CVector) -> CMatrix {
    u * u.adjoint()
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[real(0.0), c(0.0, -1.0), c(0.0, 1.0), real(0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(-1.0)])
}

pub fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| real(v)),
    ))
}

pub fn basis(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = real(1.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let x = pauli_x();
        let y = pauli_y();
        let z = pauli_z();
        let xy = &x * &y;
        assert!(max_abs(&(xy - z.scale(1.0) * c(0.0, 1.0))) < 1e-15);
        assert_eq!(hermitian_deviation(&y), 0.0);
    }

    #[test]
    fn trace_of_product_matches_product_trace() {
        let a = CMatrix::from_fn(3, 3, |j, k| c(j as f64 + 0.5, k as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |j, k| c((j * k) as f64, 1.0));
        assert!((trace_of_product(&a, &b) - trace(&(&a * &b))).norm() < 1e-12);
    }
}

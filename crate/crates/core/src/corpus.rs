//! Seeded random states, unitaries and smooth driving protocols.
//!
//! Used to build the property-test corpora; the same seed always produces
//! the same cases.

use std::f64::consts::PI;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{hermitian_part, CMatrix, CVector, C64};
use crate::qdyn::{eigensystem, HamiltonianProtocol, QuantumState};

/// Standard normal sample (Box-Muller).
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

/// Hermitian matrix with Gaussian entries of typical size `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    hermitian_part(&g).scale(scale)
}

/// Haar-distributed pure state.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> QuantumState {
    let v = CVector::from_fn(dim, |_, _| complex_normal(rng));
    let norm = v.norm();
    QuantumState::Pure(v.unscale(norm))
}

/// Full-rank density matrix: a Wishart sample mixed with the identity.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> QuantumState {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let eta = rng.random_range(0.05..0.3);
    let rho = w.scale((1.0 - eta) / tr) + CMatrix::identity(dim, dim).scale(eta / dim as f64);
    QuantumState::mixed(rho).expect("Wishart mixture is a valid state")
}

/// `exp(i H)` for a random Hermitian `H`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let h = random_hermitian(rng, dim, PI);
    eigensystem(&h)
        .expect("Hermitian by construction")
        .map_spectrum(|e| C64::from_polar(1.0, e))
}

/// Smooth drive `H(t) = A + sin(ω₁t + φ₁) B + cos(ω₂t + φ₂) C` with random
/// Hermitian `A, B, C`.
pub fn random_smooth_protocol<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    duration: f64,
    hbar: f64,
) -> HamiltonianProtocol {
    let a = random_hermitian(rng, dim, 1.0);
    let b = random_hermitian(rng, dim, 1.0);
    let c = random_hermitian(rng, dim, 1.0);
    let (w1, w2) = (rng.random_range(0.3..3.0), rng.random_range(0.3..3.0));
    let (p1, p2) = (
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    );
    HamiltonianProtocol::new(format!("random-d{dim}"), duration, hbar, move |t| {
        &a + b.scale((w1 * t + p1).sin()) + c.scale((w2 * t + p2).cos())
    })
    .expect("random protocol is Hermitian")
}

/// One randomly drawn evolution problem.
#[derive(Debug, Clone)]
pub struct CorpusCase {
    pub index: usize,
    pub protocol: HamiltonianProtocol,
    pub initial: QuantumState,
}

/// `count` cases with dimensions in `dims`, alternating pure and mixed
/// initial states, durations uniform in `[0.5, 3]` and `ħ = 1`.
pub fn random_corpus(
    seed: u64,
    count: usize,
    dims: std::ops::RangeInclusive<usize>,
) -> Vec<CorpusCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|index| {
            let dim = rng.random_range(dims.clone());
            let duration = rng.random_range(0.5..3.0);
            let protocol = random_smooth_protocol(&mut rng, dim, duration, 1.0)
                .with_label(format!("random-{index}-d{dim}"));
            let initial = if index % 2 == 0 {
                random_pure(&mut rng, dim)
            } else {
                random_density(&mut rng, dim)
            };
            CorpusCase {
                index,
                protocol,
                initial,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn corpus_is_reproducible() {
        let a = random_corpus(5, 6, 2..=6);
        let b = random_corpus(5, 6, 2..=6);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.initial, y.initial);
            assert_eq!(max_abs(&(x.protocol.at(0.4) - y.protocol.at(0.4))), 0.0);
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng, 4);
        assert!(max_abs(&(u.adjoint() * &u - CMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn random_density_is_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 2..=6 {
            let p = random_density(&mut rng, d).spectrum();
            assert!(p[0] > 0.04 / d as f64);
        }
    }
}

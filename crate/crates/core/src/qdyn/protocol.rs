use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::eigen::{check_hermitian, lowest_eigenvalue};
use crate::error::{QslError, Result};
use crate::linalg::CMatrix;

pub type Evaluator = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// How the ground energy is removed before Margolus-Levitin type averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroundShiftMode {
    /// Subtract the instantaneous ground energy `E_g(t)` at every time.
    #[default]
    Instantaneous,
    /// Subtract one constant: the minimum of `E_g(t)` over a sample grid.
    Global,
}

/// A time-dependent Hamiltonian `t ↦ H(t)` on `[0, duration]`.
#[derive(Clone)]
pub struct HamiltonianProtocol {
    evaluator: Evaluator,
    dim: usize,
    duration: f64,
    hbar: f64,
    label: String,
}

impl fmt::Debug for HamiltonianProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianProtocol")
            .field("dim", &self.dim)
            .field("duration", &self.duration)
            .field("hbar", &self.hbar)
            .field("label", &self.label)
            .finish()
    }
}

impl HamiltonianProtocol {
    /// Wraps an evaluator, checking its shape and Hermiticity at both ends of the interval.
    pub fn new<F>(label: impl Into<String>, duration: f64, hbar: f64, evaluator: F) -> Result<Self>
    where
        F: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(QslError::InvalidProtocol(format!(
                "duration must be positive, got {duration}"
            )));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(QslError::InvalidProtocol(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let h0 = evaluator(0.0);
        let dim = h0.nrows();
        if dim == 0 {
            return Err(QslError::InvalidProtocol("empty Hamiltonian".into()));
        }
        for t in [0.0, 0.5 * duration, duration] {
            let h = evaluator(t);
            if h.nrows() != dim || h.ncols() != dim {
                return Err(QslError::DimensionMismatch {
                    expected: dim,
                    found: h.nrows().max(h.ncols()),
                });
            }
            check_hermitian(&h)?;
        }
        Ok(Self {
            evaluator: Arc::new(evaluator),
            dim,
            duration,
            hbar,
            label: label.into(),
        })
    }

    pub fn constant(
        label: impl Into<String>,
        h: CMatrix,
        duration: f64,
        hbar: f64,
    ) -> Result<Self> {
        Self::new(label, duration, hbar, move |_| h.clone())
    }

    pub fn at(&self, t: f64) -> CMatrix {
        (self.evaluator)(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_duration(self, duration: f64) -> Result<Self> {
        let evaluator = self.evaluator.clone();
        Self::new(self.label, duration, self.hbar, move |t| evaluator(t))
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        let evaluator = self.evaluator.clone();
        Self::new(self.label, self.duration, hbar, move |t| evaluator(t))
    }

    /// Same state path under a different `ħ`: duration and time argument are
    /// stretched by `hbar / self.hbar`, so every `H Δt / ħ` is unchanged.
    pub fn rescaled_hbar(&self, hbar: f64) -> Result<Self> {
        let stretch = hbar / self.hbar;
        let evaluator = self.evaluator.clone();
        Self::new(
            self.label.clone(),
            self.duration * stretch,
            hbar,
            move |t| evaluator(t / stretch),
        )
    }

    /// Same Hamiltonian with every energy multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let evaluator = self.evaluator.clone();
        Self::new(self.label.clone(), self.duration, self.hbar, move |t| {
            evaluator(t).scale(factor)
        })
    }
}

/// `t ↦ H(t) − E_g(t)·1` with `E_g(t)` the instantaneous ground energy.
///
/// Every state then has `⟨H_t⟩ ≥ 0` at every time.
pub fn ground_shift(p: &HamiltonianProtocol) -> Result<HamiltonianProtocol> {
    check_hermitian(&p.at(0.0))?;
    let evaluator = p.evaluator.clone();
    HamiltonianProtocol::new(p.label.clone(), p.duration, p.hbar, move |t| {
        let h = evaluator(t);
        let eg = lowest_eigenvalue(&h);
        subtract_identity(h, eg)
    })
}

/// `t ↦ H(t) − min_k E_g(t_k)·1`, the minimum taken over `samples + 1` uniform times.
pub fn ground_shift_global(p: &HamiltonianProtocol, samples: usize) -> Result<HamiltonianProtocol> {
    let samples = samples.max(1);
    let dt = p.duration / samples as f64;
    let mut eg = f64::INFINITY;
    for k in 0..=samples {
        let h = p.at(k as f64 * dt);
        check_hermitian(&h)?;
        eg = eg.min(lowest_eigenvalue(&h));
    }
    let evaluator = p.evaluator.clone();
    HamiltonianProtocol::new(p.label.clone(), p.duration, p.hbar, move |t| {
        subtract_identity(evaluator(t), eg)
    })
}

/// Dispatches on `mode`; `samples` is only used by the global variant.
pub fn ground_shift_with(
    p: &HamiltonianProtocol,
    mode: GroundShiftMode,
    samples: usize,
) -> Result<HamiltonianProtocol> {
    match mode {
        GroundShiftMode::Instantaneous => ground_shift(p),
        GroundShiftMode::Global => ground_shift_global(p, samples),
    }
}

fn subtract_identity(mut h: CMatrix, shift: f64) -> CMatrix {
    for k in 0..h.nrows() {
        h[(k, k)] -= shift;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, max_abs, pauli_x, pauli_z};

    #[test]
    fn rejects_bad_metadata() {
        assert!(HamiltonianProtocol::constant("h", diag(&[0.0, 1.0]), 0.0, 1.0).is_err());
        assert!(HamiltonianProtocol::constant("h", diag(&[0.0, 1.0]), 1.0, -1.0).is_err());
    }

    #[test]
    fn constant_shift() {
        let p = HamiltonianProtocol::constant("h", diag(&[-3.0, 1.0]), 1.0, 1.0).unwrap();
        let s = ground_shift(&p).unwrap();
        assert!(max_abs(&(s.at(0.3) - diag(&[0.0, 4.0]))) < 1e-14);
    }

    #[test]
    fn shift_is_idempotent() {
        let p = HamiltonianProtocol::new("lz", 2.0, 1.0, |t| {
            pauli_z().scale(0.5 * (t - 1.0)) + pauli_x().scale(0.25)
        })
        .unwrap();
        let once = ground_shift(&p).unwrap();
        let twice = ground_shift(&once).unwrap();
        for k in 0..=20 {
            let t = 0.1 * k as f64;
            assert!(max_abs(&(once.at(t) - twice.at(t))) < 1e-12);
        }
    }

    #[test]
    fn global_shift_uses_lowest_ground_energy() {
        let p = HamiltonianProtocol::new("ramp", 1.0, 1.0, |t| diag(&[-t, 1.0])).unwrap();
        let s = ground_shift_global(&p, 10).unwrap();
        assert!(max_abs(&(s.at(0.0) - diag(&[1.0, 2.0]))) < 1e-14);
        assert!(max_abs(&(s.at(1.0) - diag(&[0.0, 2.0]))) < 1e-14);
    }

    #[test]
    fn non_hermitian_evaluator_rejected() {
        let err = HamiltonianProtocol::new("bad", 1.0, 1.0, |_| {
            let mut m = diag(&[0.0, 1.0]);
            m[(0, 1)] = crate::linalg::real(1.0);
            m
        })
        .unwrap_err();
        assert!(matches!(err, QslError::NotHermitian { .. }));
    }
}

//! States, time-dependent Hamiltonians and unitary propagation.

mod eigen;
mod protocol;
mod state;

pub use eigen::{check_hermitian, eigensystem, EigenSystem, HERMITIAN_TOL};
pub use protocol::{
    ground_shift, ground_shift_global, ground_shift_with, Evaluator, GroundShiftMode,
    HamiltonianProtocol,
};
pub use state::{
    energy_variance, mean_energy, state_distance_max, validate_state, QuantumState, StateKind,
    CLAMP_TOL, REPAIR_TOL,
};

use crate::error::{QslError, Result};
use crate::geometry::bures_length;
use crate::linalg::{max_abs, sandwich, trace_of_product, CMatrix, CVector, C64};

/// Smallest accepted number of propagation steps.
pub const MIN_STEPS: usize = 2;

/// Time-sampled evolution with the instantaneous observables used by the bounds.
///
/// All per-sample vectors have `steps + 1` entries aligned with `times`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub label: String,
    pub hbar: f64,
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    /// `⟨H_t⟩ = tr(ρ_t H_t)`
    pub mean_energy: Vec<f64>,
    /// `⟨H_t²⟩ − ⟨H_t⟩²`
    pub energy_variance: Vec<f64>,
    /// `⟨ψ₀|ψ_t⟩`, pure runs only.
    pub overlap_with_initial: Option<Vec<C64>>,
    /// `⟨ψ₀|H_t|ψ_t⟩`, pure runs only.
    pub transition_energy: Option<Vec<C64>>,
    /// `tr(ρ₀ H_t)`: the energy of the initial state measured with the current Hamiltonian.
    pub initial_state_energy: Vec<f64>,
    /// `L(ρ₀, ρ_t)`
    pub bures_from_initial: Vec<f64>,
    /// Lowest eigenvalue of `H_t`.
    pub ground_energy: Vec<f64>,
    /// Per-step observables of the midpoint Hamiltonian (`steps` entries).
    pub step: StepObservables,
    /// Largest `‖U†U − 1‖_max` over all step propagators.
    pub unitarity_error: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Uniform sample spacing.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.duration() / self.steps() as f64
        }
    }

    pub fn is_pure(&self) -> bool {
        self.states.first().is_some_and(QuantumState::is_pure)
    }

    pub fn initial_state(&self) -> &QuantumState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectory has samples")
    }

    pub fn purities(&self) -> Vec<f64> {
        self.states.iter().map(QuantumState::purity).collect()
    }
}

/// Observables of the Hamiltonian `H_m = H(t_k + Δt/2)` that drives step `k`.
///
/// Within a step the state evolves exactly under the constant `H_m`, so
/// `⟨H_m⟩` and its variance are conserved across the step. These are the
/// values that bound the discrete motion exactly, and the audit uses them for
/// every derivative and integral check.
#[derive(Debug, Clone, Default)]
pub struct StepObservables {
    /// `⟨H_m⟩`
    pub mean_energy: Vec<f64>,
    /// `⟨H_m²⟩ − ⟨H_m⟩²`
    pub energy_variance: Vec<f64>,
    /// `tr(ρ₀ H_m)`
    pub initial_state_energy: Vec<f64>,
    /// `(1/Δt) ∫ |⟨ψ₀|H_m|ψ_t⟩| dt` over the step (three-point Gauss-Legendre), pure runs only.
    pub transition_energy_abs: Option<Vec<f64>>,
}

/// Exact propagator of a constant Hamiltonian over `dt`: `exp(−i H dt / ħ)`.
pub fn step_propagator(h: &CMatrix, dt: f64, hbar: f64) -> Result<CMatrix> {
    let es = eigensystem(h)?;
    Ok(es.map_spectrum(|e| C64::from_polar(1.0, -e * dt / hbar)))
}

/// `(1/Δt) ∫₀^Δt |⟨ψ₀|H_m e^{−i H_m s/ħ}|ψ⟩| ds` by three-point Gauss-Legendre.
fn mean_abs_transition_energy(
    es: &EigenSystem,
    psi0: &CVector,
    psi: &CVector,
    dt: f64,
    hbar: f64,
) -> f64 {
    const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let v = &es.eigenvectors;
    let a = v.adjoint() * psi;
    let b = v.adjoint() * psi0;
    NODES
        .iter()
        .zip(WEIGHTS)
        .map(|(&x, w)| {
            let s = 0.5 * dt * (1.0 + x);
            let z: C64 = (0..es.dim())
                .map(|n| {
                    let e = es.eigenvalues[n];
                    b[n].conj() * e * C64::from_polar(1.0, -e * s / hbar) * a[n]
                })
                .sum();
            w * z.norm()
        })
        .sum()
}

/// Propagates `s0` under `p` with `steps` exponential-midpoint steps.
///
/// Step `k` applies `exp(−i H(t_k + Δt/2) Δt / ħ)`. Observables at sample `k`
/// use `H(t_k)`; [`StepObservables`] use the midpoint Hamiltonian of each step.
pub fn propagate(p: &HamiltonianProtocol, s0: &QuantumState, steps: usize) -> Result<Trajectory> {
    if s0.dim() != p.dim() {
        return Err(QslError::DimensionMismatch {
            expected: p.dim(),
            found: s0.dim(),
        });
    }
    if steps < MIN_STEPS {
        return Err(QslError::StepCountTooSmall {
            min: MIN_STEPS,
            found: steps,
        });
    }
    let s0 = validate_state(s0.clone())?;
    let n = steps + 1;
    let dim = p.dim();
    let hbar = p.hbar();
    let dt = p.duration() / steps as f64;
    let identity = CMatrix::identity(dim, dim);
    let rho0 = s0.density();

    let mut traj = Trajectory {
        label: p.label().to_string(),
        hbar,
        times: Vec::with_capacity(n),
        states: Vec::with_capacity(n),
        mean_energy: Vec::with_capacity(n),
        energy_variance: Vec::with_capacity(n),
        overlap_with_initial: s0.is_pure().then(|| Vec::with_capacity(n)),
        transition_energy: s0.is_pure().then(|| Vec::with_capacity(n)),
        initial_state_energy: Vec::with_capacity(n),
        bures_from_initial: Vec::with_capacity(n),
        ground_energy: Vec::with_capacity(n),
        step: StepObservables {
            mean_energy: Vec::with_capacity(steps),
            energy_variance: Vec::with_capacity(steps),
            initial_state_energy: Vec::with_capacity(steps),
            transition_energy_abs: s0.is_pure().then(|| Vec::with_capacity(steps)),
        },
        unitarity_error: 0.0,
    };

    let mut state = s0.clone();
    for k in 0..n {
        let t = if k == steps {
            p.duration()
        } else {
            k as f64 * dt
        };
        let h = p.at(t);
        let es = eigensystem(&h)?;
        traj.times.push(t);
        traj.ground_energy.push(es.ground_energy());
        traj.mean_energy.push(mean_energy(&state, &h)?);
        traj.energy_variance.push(energy_variance(&state, &h)?);
        traj.initial_state_energy
            .push(trace_of_product(&rho0, &h).re);
        if let (Some(psi0), Some(psi)) = (s0.as_vector(), state.as_vector()) {
            if let Some(o) = traj.overlap_with_initial.as_mut() {
                o.push(if k == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    psi0.dotc(psi)
                });
            }
            if let Some(te) = traj.transition_energy.as_mut() {
                te.push(sandwich(psi0, &h, psi));
            }
        }
        let l = if k == 0 {
            0.0
        } else {
            bures_length(&s0, &state)?
        };
        traj.bures_from_initial.push(l);
        traj.states.push(state.clone());

        if k < steps {
            let hm = p.at(t + 0.5 * dt);
            let es = eigensystem(&hm)?;
            traj.step.mean_energy.push(mean_energy(&state, &hm)?);
            traj.step
                .energy_variance
                .push(energy_variance(&state, &hm)?);
            traj.step
                .initial_state_energy
                .push(trace_of_product(&rho0, &hm).re);
            if let (Some(psi0), Some(psi), Some(te)) = (
                s0.as_vector(),
                state.as_vector(),
                traj.step.transition_energy_abs.as_mut(),
            ) {
                te.push(mean_abs_transition_energy(&es, psi0, psi, dt, hbar));
            }
            let u = es.map_spectrum(|e| C64::from_polar(1.0, -e * dt / hbar));
            let err = max_abs(&(u.adjoint() * &u - &identity));
            traj.unitarity_error = traj.unitarity_error.max(err);
            state = state.evolve(&u);
        }
    }
    Ok(traj)
}

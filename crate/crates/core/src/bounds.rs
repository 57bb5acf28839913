//! Time-averaged energies and the quantum speed limit times built from them.
//!
//! With `L = L(ρ₀, ρ_τ)`, `E_τ` the time-averaged mean energy above the
//! ground state and `ΔE_τ` the time-averaged energy spread:
//!
//! * Mandelstam-Tamm: `τ ≥ ħ L / ΔE_τ`
//! * Margolus-Levitin, quadratic: `τ ≥ 4 ħ L² / (π² E_τ)`
//! * Margolus-Levitin, linear: `τ ≥ ħ L / E_τ`
//!
//! A vanishing energy with `L > 0` gives an infinite bound; `L = 0` gives 0.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::qdyn::Trajectory;

/// Slack allowed on `L` above `π/2` and on negative averaged energies.
const ENERGY_TOL: f64 = 1e-9;

/// Which Margolus-Levitin form enters the unified speed limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MlMode {
    /// `max(ħL/E_τ, ħL/ΔE_τ)`
    #[default]
    Linear,
    /// `max(4ħL²/(π²E_τ), ħL/ΔE_τ)`
    Quadratic,
}

/// Trapezoid rule on uniformly spaced samples, divided by the interval length.
pub fn trapezoid_average(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            (inner + 0.5 * (values[0] + values[n - 1])) / (n - 1) as f64
        }
    }
}

/// Running trapezoid integral `∫₀^{t_k} f dt` for every sample `k`.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * dt * (values[k - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// `E_τ = (1/τ) ∫ tr(ρ_t H_t) dt`; the trajectory must come from a ground-shifted protocol.
pub fn time_avg_mean_energy(traj: &Trajectory) -> Result<f64> {
    let e = trapezoid_average(&traj.mean_energy);
    if e < -ENERGY_TOL {
        return Err(QslError::NegativeEnergy { energy: e });
    }
    Ok(e.max(0.0))
}

/// `ΔE_τ = (1/τ) ∫ (⟨H_t²⟩ − ⟨H_t⟩²)^{1/2} dt`
pub fn time_avg_energy_variance(traj: &Trajectory) -> f64 {
    let spread: Vec<f64> = traj
        .energy_variance
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    trapezoid_average(&spread)
}

fn check_length(l: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2 + ENERGY_TOL).contains(&l) {
        return Err(QslError::DomainError(format!(
            "Bures length {l} outside [0, pi/2]"
        )));
    }
    Ok(())
}

fn check_energy(e: f64) -> Result<()> {
    if e.is_nan() || e < -ENERGY_TOL {
        return Err(QslError::NegativeEnergy { energy: e });
    }
    Ok(())
}

fn ratio(numerator: f64, energy: f64) -> f64 {
    if numerator == 0.0 {
        0.0
    } else if energy <= 0.0 {
        f64::INFINITY
    } else {
        numerator / energy
    }
}

/// Mandelstam-Tamm time `ħ L / ΔE_τ`.
pub fn tau_mt(l: f64, de_avg: f64, hbar: f64) -> Result<f64> {
    check_length(l)?;
    if de_avg.is_nan() || de_avg < 0.0 {
        return Err(QslError::DomainError(format!(
            "energy spread must be nonnegative, got {de_avg}"
        )));
    }
    Ok(ratio(hbar * l, de_avg))
}

/// Quadratic Margolus-Levitin time `4 ħ L² / (π² E_τ)`.
pub fn tau_ml_quadratic(l: f64, e_avg: f64, hbar: f64) -> Result<f64> {
    check_length(l)?;
    check_energy(e_avg)?;
    Ok(ratio(4.0 * hbar * l * l / (PI * PI), e_avg))
}

/// Linear Margolus-Levitin time `ħ L / E_τ`.
pub fn tau_ml_linear(l: f64, e_avg: f64, hbar: f64) -> Result<f64> {
    check_length(l)?;
    check_energy(e_avg)?;
    Ok(ratio(hbar * l, e_avg))
}

/// Unified speed limit: the larger of the Margolus-Levitin branch selected by
/// `mode` and the Mandelstam-Tamm time.
pub fn qsl_time(l: f64, e_avg: f64, de_avg: f64, hbar: f64, mode: MlMode) -> Result<f64> {
    let ml = match mode {
        MlMode::Linear => tau_ml_linear(l, e_avg, hbar)?,
        MlMode::Quadratic => tau_ml_quadratic(l, e_avg, hbar)?,
    };
    Ok(ml.max(tau_mt(l, de_avg, hbar)?))
}

/// `τ / bound`, infinite when the bound vanishes.
pub fn slack(tau: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        tau / bound
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slacks {
    pub mt: f64,
    pub ml_quad: f64,
    pub ml_lin: f64,
}

impl Slacks {
    pub fn min(&self) -> f64 {
        self.mt.min(self.ml_quad).min(self.ml_lin)
    }
}

/// Every bound for one run next to the actual duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QslReport {
    pub tau: f64,
    pub bures: f64,
    pub e_avg: f64,
    pub de_avg: f64,
    pub tau_mt: f64,
    pub tau_ml_quad: f64,
    pub tau_ml_lin: f64,
    pub tau_qsl: f64,
    pub slacks: Slacks,
    pub hbar: f64,
    pub ml_mode: MlMode,
}

/// A bound that the actual duration falls short of.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation {
    pub bound: &'static str,
    pub value: f64,
    pub tau: f64,
}

impl QslReport {
    /// Bounds exceeding `τ` by more than `rel_tol · τ`.
    pub fn violations(&self, rel_tol: f64) -> Vec<BoundViolation> {
        let eps = rel_tol * self.tau;
        [
            ("tau_mt", self.tau_mt),
            ("tau_ml_quad", self.tau_ml_quad),
            ("tau_ml_lin", self.tau_ml_lin),
            ("tau_qsl", self.tau_qsl),
        ]
        .into_iter()
        .filter(|(_, v)| self.tau < v - eps)
        .map(|(bound, value)| BoundViolation {
            bound,
            value,
            tau: self.tau,
        })
        .collect()
    }
}

/// Assembles the report from the trajectory end points and time averages.
pub fn build_report(traj: &Trajectory, mode: MlMode) -> Result<QslReport> {
    if traj.len() < 2 {
        return Err(QslError::TooFewSamples {
            min: 2,
            found: traj.len(),
        });
    }
    let hbar = traj.hbar;
    let tau = traj.duration();
    let bures = traj.bures_from_initial[traj.len() - 1].min(FRAC_PI_2);
    let e_avg = time_avg_mean_energy(traj)?;
    let de_avg = time_avg_energy_variance(traj);
    let tau_mt = tau_mt(bures, de_avg, hbar)?;
    let tau_ml_quad = tau_ml_quadratic(bures, e_avg, hbar)?;
    let tau_ml_lin = tau_ml_linear(bures, e_avg, hbar)?;
    let tau_qsl = qsl_time(bures, e_avg, de_avg, hbar, mode)?;
    debug_assert!(tau_ml_quad <= tau_ml_lin + 1e-12 || tau_ml_lin.is_infinite());
    Ok(QslReport {
        tau,
        bures,
        e_avg,
        de_avg,
        tau_mt,
        tau_ml_quad,
        tau_ml_lin,
        tau_qsl,
        slacks: Slacks {
            mt: slack(tau, tau_mt),
            ml_quad: slack(tau, tau_ml_quad),
            ml_lin: slack(tau, tau_ml_lin),
        },
        hbar,
        ml_mode: mode,
    })
}

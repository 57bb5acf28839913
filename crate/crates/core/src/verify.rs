//! Pointwise audit of the inequality chain behind the speed limits.
//!
//! Each check compares a left-hand side that the derivation bounds from
//! above by a right-hand side. The margin at one sample is
//! `(rhs − lhs) / max(1, |lhs|, |rhs|)`, so a negative margin is a violation
//! scaled by the magnitude of the dominating side. Violations are never
//! clipped: the worst sample, its time and both side values are recorded.
//!
//! Derivatives at sample `k` are central differences over `[t_{k−1}, t_{k+1}]`.
//! Their energy sides are averaged over the two propagation steps in that
//! window ([`crate::qdyn::StepObservables`]), and running integrals are sums
//! over steps. Both sides thus see the same discretization, so an inequality
//! that holds for the exact dynamics cannot be broken by truncation error.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QslError, Result};
use crate::geometry::local_bures_speed;
use crate::qdyn::Trajectory;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const MIN_AUDIT_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// Local Bures speed `≤ √⟨ΔH_t²⟩ / ħ`.
    VelocityVariance,
    /// `|d_t|⟨ψ₀|ψ_t⟩|| ≤ |d_t⟨ψ₀|ψ_t⟩|`
    OverlapDerivative,
    /// `sin L · |d_t L| ≤ |⟨ψ₀|H_t|ψ_t⟩| / ħ`
    SinVelocity,
    /// `|⟨ψ₀|H_t|ψ_t⟩| ≤ ⟨ψ_t|H_t|ψ_t⟩`
    PhaseMeanEnergy,
    /// `L(ρ₀, ρ_t) ≤ (1/ħ) ∫₀ᵗ √⟨ΔH²⟩ dt'`
    MtIntegrated,
    /// `1 − cos L(ρ₀, ρ_t) ≤ (1/ħ) ∫₀ᵗ ⟨H⟩ dt'`
    MlIntegrated,
    /// `|cos((1/ħ) ∫₀ᵗ ⟨ψ₀|H|ψ₀⟩ dt')| ≤ |⟨ψ₀|ψ_t⟩|`
    OverlapCosine,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::VelocityVariance,
        Check::OverlapDerivative,
        Check::SinVelocity,
        Check::PhaseMeanEnergy,
        Check::MtIntegrated,
        Check::MlIntegrated,
        Check::OverlapCosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::VelocityVariance => "velocity_variance",
            Check::OverlapDerivative => "overlap_derivative",
            Check::SinVelocity => "sin_velocity",
            Check::PhaseMeanEnergy => "phase_mean_energy",
            Check::MtIntegrated => "mt_integrated",
            Check::MlIntegrated => "ml_integrated",
            Check::OverlapCosine => "overlap_cosine",
        }
    }

    pub fn requires_pure(self) -> bool {
        matches!(
            self,
            Check::OverlapDerivative
                | Check::SinVelocity
                | Check::PhaseMeanEnergy
                | Check::OverlapCosine
        )
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub worst_margin: f64,
    pub worst_time: f64,
    /// Side values at the worst sample.
    pub lhs: f64,
    pub rhs: f64,
    /// Largest margin seen; close to zero when the inequality is saturated throughout.
    pub max_margin: f64,
    pub passed: bool,
    pub samples_checked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<CheckResult>,
    pub tolerance: f64,
    pub trajectory_label: String,
    /// Checks not run, e.g. pure-state checks on a mixed run.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, check: Check) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == check.name())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Scaled margin `(rhs − lhs) / max(1, |lhs|, |rhs|)`.
pub fn scaled_margin(lhs: f64, rhs: f64) -> f64 {
    (rhs - lhs) / 1f64.max(lhs.abs()).max(rhs.abs())
}

struct Accumulator {
    worst: Option<(f64, f64, f64, f64)>,
    max_margin: f64,
    count: usize,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            worst: None,
            max_margin: f64::NEG_INFINITY,
            count: 0,
        }
    }

    fn push(&mut self, t: f64, lhs: f64, rhs: f64) {
        let m = scaled_margin(lhs, rhs);
        // NaN margins count as the worst possible outcome.
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        self.count += 1;
        self.max_margin = self.max_margin.max(m);
        if self.worst.is_none_or(|w| m < w.0) {
            self.worst = Some((m, t, lhs, rhs));
        }
    }

    fn finish(self, check: Check, tol: f64) -> CheckResult {
        let (worst_margin, worst_time, lhs, rhs) = self.worst.unwrap_or((0.0, 0.0, 0.0, 0.0));
        CheckResult {
            name: check.name().to_string(),
            worst_margin,
            worst_time,
            lhs,
            rhs,
            max_margin: if self.count == 0 {
                0.0
            } else {
                self.max_margin
            },
            passed: worst_margin >= -tol,
            samples_checked: self.count,
        }
    }
}

/// Runs every check that applies to the trajectory. Pure-state checks on a
/// mixed run are listed in `skipped` instead of failing.
pub fn audit_trajectory(traj: &Trajectory, tol: f64) -> Result<AuditReport> {
    let (run, skipped): (Vec<Check>, Vec<Check>) = Check::ALL
        .into_iter()
        .partition(|c| traj.is_pure() || !c.requires_pure());
    let mut report = audit_checks(traj, tol, &run)?;
    report.skipped = skipped.iter().map(|c| c.name().to_string()).collect();
    Ok(report)
}

/// Runs exactly the requested checks; a pure-state check on a mixed run is an error.
pub fn audit_checks(traj: &Trajectory, tol: f64, checks: &[Check]) -> Result<AuditReport> {
    if traj.len() < MIN_AUDIT_SAMPLES {
        return Err(QslError::TooFewSamples {
            min: MIN_AUDIT_SAMPLES,
            found: traj.len(),
        });
    }
    if let Some(c) = checks.iter().find(|c| c.requires_pure() && !traj.is_pure()) {
        return Err(QslError::PureCheckOnMixedRun(c.name().to_string()));
    }
    let mut out = Vec::with_capacity(checks.len());
    for &check in checks {
        if out.iter().any(|r: &CheckResult| r.name == check.name()) {
            continue;
        }
        out.push(run_check(traj, check)?.finish(check, tol));
    }
    Ok(AuditReport {
        checks: out,
        tolerance: tol,
        trajectory_label: traj.label.clone(),
        skipped: Vec::new(),
    })
}

fn run_check(traj: &Trajectory, check: Check) -> Result<Accumulator> {
    let n = traj.len();
    let hbar = traj.hbar;
    let dt = traj.dt();
    let t = &traj.times;
    let l = &traj.bures_from_initial;
    let mut acc = Accumulator::new();
    match check {
        Check::VelocityVariance => {
            let spread = step_spread(traj);
            for k in 1..n - 1 {
                let speed = local_bures_speed(traj, k)?;
                acc.push(t[k], speed, 0.5 * (spread[k - 1] + spread[k]) / hbar);
            }
        }
        Check::OverlapDerivative => {
            let o = pure_series(&traj.overlap_with_initial, check)?;
            for k in 1..n - 1 {
                let d_abs = (o[k + 1].norm() - o[k - 1].norm()).abs() / (2.0 * dt);
                let abs_d = (o[k + 1] - o[k - 1]).norm() / (2.0 * dt);
                acc.push(t[k], d_abs, abs_d);
            }
        }
        Check::SinVelocity => {
            // sin L · |d_t L| = |d_t cos L|
            let te = pure_series(&traj.step.transition_energy_abs, check)?;
            for k in 1..n - 1 {
                let lhs = (l[k + 1].cos() - l[k - 1].cos()).abs() / (2.0 * dt);
                acc.push(t[k], lhs, 0.5 * (te[k - 1] + te[k]) / hbar);
            }
        }
        Check::PhaseMeanEnergy => {
            let te = pure_series(&traj.transition_energy, check)?;
            for k in 0..n {
                acc.push(t[k], te[k].norm(), traj.mean_energy[k]);
            }
        }
        Check::MtIntegrated => {
            let integral = step_integral(&step_spread(traj), dt);
            for k in 1..n {
                acc.push(t[k], l[k], integral[k] / hbar);
            }
        }
        Check::MlIntegrated => {
            let integral = step_integral(&traj.step.mean_energy, dt);
            for k in 1..n {
                acc.push(t[k], 1.0 - l[k].cos(), integral[k] / hbar);
            }
        }
        Check::OverlapCosine => {
            let o = pure_series(&traj.overlap_with_initial, check)?;
            let phase = step_integral(&traj.step.initial_state_energy, dt);
            for k in 1..n {
                acc.push(t[k], (phase[k] / hbar).cos().abs(), o[k].norm());
            }
        }
    }
    Ok(acc)
}

fn step_spread(traj: &Trajectory) -> Vec<f64> {
    traj.step.energy_variance.iter().map(|v| v.sqrt()).collect()
}

/// `∫₀^{t_k}` of a per-step constant, for every sample `k`.
fn step_integral(per_step: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(per_step.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for v in per_step {
        acc += v * dt;
        out.push(acc);
    }
    out
}

fn pure_series<T>(series: &Option<Vec<T>>, check: Check) -> Result<&[T]> {
    series
        .as_deref()
        .ok_or_else(|| QslError::PureCheckOnMixedRun(check.name().to_string()))
}

/// `|cos x − 1| − (4/π²) x²`, nonnegative on `[0, π/2]`.
pub fn check_trig_bound(x: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2 + 1e-12).contains(&x) {
        return Err(QslError::DomainError(format!("x = {x} outside [0, pi/2]")));
    }
    Ok((x.cos() - 1.0).abs() - 4.0 / (PI * PI) * x * x)
}

/// Worst value of `⟨ΔH_t²⟩/ħ² − (d_t L)²` over interior samples, with `d_t L`
/// the local Bures speed and the spread averaged over the two adjacent steps. Zero for pure states, where the bound is tight.
pub fn fisher_variance_bound(traj: &Trajectory) -> Result<f64> {
    if traj.len() < 3 {
        return Err(QslError::TooFewSamples {
            min: 3,
            found: traj.len(),
        });
    }
    let spread = step_spread(traj);
    let mut worst = f64::INFINITY;
    for k in 1..traj.len() - 1 {
        let speed = local_bures_speed(traj, k)?;
        let bound = 0.5 * (spread[k - 1] + spread[k]) / traj.hbar;
        worst = worst.min(bound * bound - speed * speed);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_bound_endpoints_are_equalities() {
        assert_eq!(check_trig_bound(0.0).unwrap(), 0.0);
        assert!(check_trig_bound(FRAC_PI_2).unwrap().abs() < 1e-15);
        assert!(check_trig_bound(-0.1).is_err());
        assert!(check_trig_bound(2.0).is_err());
    }

    #[test]
    fn trig_bound_dense_scan() {
        let mut worst = f64::INFINITY;
        let mut x = 1e-4;
        while x < FRAC_PI_2 {
            worst = worst.min(check_trig_bound(x).unwrap());
            x += 1e-4;
        }
        assert!(worst >= 0.0, "minimum {worst}");
    }

    #[test]
    fn scaled_margin_uses_dominating_side() {
        assert_eq!(scaled_margin(1.0, 3.0), 2.0 / 3.0);
        assert_eq!(scaled_margin(0.1, 0.2), 0.1);
        assert!(scaled_margin(2.0, 1.0) < 0.0);
    }

    #[test]
    fn check_names_are_unique() {
        let mut names: Vec<_> = Check::ALL.iter().map(|c| c.name()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 7);
    }
}

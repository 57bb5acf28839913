//! Fidelity, Bures length, the Bures metric increment and the classical
//! statistical distance between probability densities.
//!
//! All matrix square roots go through Hermitian eigendecompositions with
//! eigenvalues clamped at zero. Every `arccos` argument is clamped into
//! `[0, 1]` first, since rounding near `F = 1` would otherwise produce NaN.

use std::f64::consts::FRAC_PI_2;

use crate::error::{QslError, Result};
use crate::linalg::{hermitian_deviation, max_abs, trace, CMatrix, C64};
use crate::qdyn::{eigensystem, EigenSystem, QuantumState, Trajectory, REPAIR_TOL};

/// Default cutoff on `p_j + p_k` in the Bures increment sum.
pub const DEFAULT_TOL_P: f64 = 1e-12;
/// Densities below this value are excluded from the Fisher information sum.
pub const FISHER_SUPPORT_CUTOFF: f64 = 1e-14;

/// Square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues below `-1e-6` are an error; the rest are clamped at zero, as
/// are positive eigenvalues at rounding level (relative to the largest).
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let es = eigensystem(m)?;
    let top = es.eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
    let floor = 64.0 * f64::EPSILON * top;
    if es.eigenvalues[0] < -REPAIR_TOL {
        return Err(QslError::NotPositive {
            min_eigenvalue: es.eigenvalues[0],
        });
    }
    Ok(es.map_spectrum(|p| C64::new(if p > floor { p.sqrt() } else { 0.0 }, 0.0)))
}

/// Uhlmann fidelity `F = [tr √(√a b √a)]²` of two density matrices.
///
/// `tr √(√a b √a)` equals the sum of singular values of `√a √b`, which is how
/// it is evaluated: it avoids squaring small eigenvalues into the rounding floor.
pub fn fidelity_uhlmann(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(QslError::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let product = sqrt_psd(a)? * sqrt_psd(b)?;
    let nuclear: f64 = product.singular_values().iter().sum();
    Ok((nuclear * nuclear).clamp(0.0, 1.0))
}

/// Bures distance `D = √(2 − 2√F)` of two density matrices.
///
/// Evaluated as `min_V ‖√a − √b V‖` over unitaries `V`, attained at the polar
/// factor of `√a √b`. As a plain sum of squares this keeps full relative
/// accuracy for nearby states, where `1 − √F` cancels.
pub fn bures_distance_uhlmann(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(QslError::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let (x, y) = (sqrt_psd(a)?, sqrt_psd(b)?);
    let svd = (&x * &y).svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(QslError::DomainError(
                "singular value decomposition failed".into(),
            ))
        }
    };
    let polar = v_t.adjoint() * u.adjoint();
    Ok((x - y * polar).norm())
}

/// Fidelity between two states. Reduces to `|⟨a|b⟩|²` for two pure states and
/// to `⟨ψ|ρ|ψ⟩` when one of them is pure.
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    check_same_dim(a, b)?;
    let f = match (a, b) {
        (QuantumState::Pure(u), QuantumState::Pure(v)) => u.dotc(v).norm_sqr(),
        (QuantumState::Pure(u), QuantumState::Mixed(m))
        | (QuantumState::Mixed(m), QuantumState::Pure(u)) => u.dotc(&(m * u)).re,
        (QuantumState::Mixed(m), QuantumState::Mixed(n)) => fidelity_uhlmann(m, n)?,
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `arccos √F`, with the argument clamped into `[0, 1]`.
pub fn bures_angle_from_fidelity(f: f64) -> f64 {
    f.clamp(0.0, 1.0).sqrt().acos()
}

/// Bures length `L = arccos √F ∈ [0, π/2]`.
///
/// For two pure states the angle is evaluated as `atan2(‖b − ⟨a|b⟩a‖, |⟨a|b⟩|)`,
/// otherwise as `2 asin(D/2)` from the Bures distance. Both keep full relative
/// accuracy for nearby states.
pub fn bures_length(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    check_same_dim(a, b)?;
    let angle = match (a, b) {
        (QuantumState::Pure(u), QuantumState::Pure(v)) => {
            let o = u.dotc(v);
            let perp = (v - u * o).norm();
            perp.atan2(o.norm())
        }
        _ => {
            let d = bures_distance_uhlmann(&a.density(), &b.density())?;
            2.0 * (0.5 * d).min(1.0).asin()
        }
    };
    Ok(angle.clamp(0.0, FRAC_PI_2))
}

fn check_same_dim(a: &QuantumState, b: &QuantumState) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(QslError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Squared Bures length between `ρ` and `ρ + dρ` to second order, with the
/// eigenbasis of `ρ` used to evaluate it.
#[derive(Debug, Clone)]
pub struct BuresIncrement {
    pub value: f64,
    pub eigen_basis: EigenSystem,
}

/// `dL² = ½ Σ_{jk} |⟨j|dρ|k⟩|² / (p_j + p_k)` in the eigenbasis `{p_j, |j⟩}` of `ρ`.
///
/// Terms with `p_j + p_k ≤ tol_p` are skipped; for rank-deficient `ρ` under
/// unitary dynamics these are exactly the terms whose numerator vanishes.
pub fn bures_increment(rho: &QuantumState, drho: &CMatrix, tol_p: f64) -> Result<BuresIncrement> {
    let dim = rho.dim();
    if drho.nrows() != dim || drho.ncols() != dim {
        return Err(QslError::DimensionMismatch {
            expected: dim,
            found: drho.nrows(),
        });
    }
    let scale = max_abs(drho).max(1.0);
    let deviation = hermitian_deviation(drho);
    if deviation > 1e-10 * scale {
        return Err(QslError::NotHermitian { deviation });
    }
    let tr = trace(drho);
    if tr.norm() > 1e-9 * scale {
        return Err(QslError::NotTraceless { trace: tr.norm() });
    }
    let eigen_basis = eigensystem(&rho.density())?;
    let v = &eigen_basis.eigenvectors;
    let rotated = v.adjoint() * drho * v;
    let p = &eigen_basis.eigenvalues;
    let mut value = 0.0;
    for j in 0..dim {
        for k in 0..dim {
            let denom = p[j] + p[k];
            if denom > tol_p {
                value += rotated[(j, k)].norm_sqr() / denom;
            }
        }
    }
    Ok(BuresIncrement {
        value: 0.5 * value,
        eigen_basis,
    })
}

/// Rate of change of `L(ρ₀, ρ_t)` at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalVelocity {
    /// Signed central-difference estimate of `d_t L`.
    pub rate: f64,
}

impl DynamicalVelocity {
    pub fn magnitude(&self) -> f64 {
        self.rate.abs()
    }

    /// `-1`, `0` or `1`. `L` grows at first but may shrink later.
    pub fn sign(&self) -> i8 {
        if self.rate > 0.0 {
            1
        } else if self.rate < 0.0 {
            -1
        } else {
            0
        }
    }
}

fn check_interior(index: usize, len: usize) -> Result<()> {
    if index == 0 || index + 1 >= len {
        return Err(QslError::IndexOutOfRange { index, len });
    }
    Ok(())
}

/// `d_t L(ρ₀, ρ_t)` at an interior sample, by central difference.
pub fn dynamical_velocity(traj: &Trajectory, index: usize) -> Result<DynamicalVelocity> {
    check_interior(index, traj.len())?;
    let l = &traj.bures_from_initial;
    let rate = (l[index + 1] - l[index - 1]) / (traj.times[index + 1] - traj.times[index - 1]);
    Ok(DynamicalVelocity { rate })
}

/// Local Bures speed `L(ρ_{k−1}, ρ_{k+1}) / (t_{k+1} − t_{k−1})`.
///
/// This is the square root of the Bures metric `tr(ρ̇ R⁻¹(ρ̇))` along the path,
/// to second order in the step. By the triangle inequality it dominates
/// `|d_t L(ρ₀, ρ_t)|` sample by sample.
pub fn local_bures_speed(traj: &Trajectory, index: usize) -> Result<f64> {
    check_interior(index, traj.len())?;
    let chord = bures_length(&traj.states[index - 1], &traj.states[index + 1])?;
    Ok(chord / (traj.times[index + 1] - traj.times[index - 1]))
}

/// Second-order derivative of uniformly sampled data: central differences in
/// the interior, one-sided three-point stencils at the ends.
pub fn derivative_series(values: &[f64], dt: f64) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dt));
    for k in 1..n - 1 {
        out.push((values[k + 1] - values[k - 1]) / (2.0 * dt));
    }
    out.push((3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dt));
    out
}

/// One-parameter family of probability densities on a uniform grid.
#[derive(Debug, Clone)]
pub struct DistributionTrack {
    pub grid: Vec<f64>,
    pub spacing: f64,
    pub parameter_values: Vec<f64>,
    /// `densities[i]` is sampled at `parameter_values[i]`.
    pub densities: Vec<Vec<f64>>,
}

impl DistributionTrack {
    /// Samples `density(t, x)` and renormalizes each slice so that `Σ P h = 1`.
    pub fn from_fn(
        grid: Vec<f64>,
        parameter_values: Vec<f64>,
        density: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if grid.len() < 2 {
            return Err(QslError::GridMismatch(
                "grid needs at least two points".into(),
            ));
        }
        let spacing = grid[1] - grid[0];
        let uniform = grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing.abs().max(1.0));
        if !(spacing > 0.0) || !uniform {
            return Err(QslError::GridMismatch(
                "grid must be uniform and increasing".into(),
            ));
        }
        let mut densities = Vec::with_capacity(parameter_values.len());
        for &t in &parameter_values {
            let mut p: Vec<f64> = grid.iter().map(|&x| density(t, x)).collect();
            if let Some(&bad) = p.iter().find(|v| !(**v >= 0.0)) {
                return Err(QslError::DomainError(format!(
                    "density value {bad} at t = {t} is not a nonnegative number"
                )));
            }
            let mass: f64 = p.iter().sum::<f64>() * spacing;
            if !(mass > 0.0) {
                return Err(QslError::NotNormalized { deviation: 1.0 });
            }
            p.iter_mut().for_each(|v| *v /= mass);
            densities.push(p);
        }
        Ok(Self {
            grid,
            spacing,
            parameter_values,
            densities,
        })
    }

    /// Gaussians of width `sigma` whose mean equals the parameter, `P_t(x) ∝ exp(−(x−t)²/2σ²)`.
    pub fn gaussian_shift(sigma: f64, grid: Vec<f64>, parameter_values: Vec<f64>) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(QslError::DomainError(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Self::from_fn(grid, parameter_values, move |t, x| {
            (-(x - t).powi(2) / (2.0 * sigma * sigma)).exp()
        })
    }

    /// Index of the interior parameter sample equal to `t`.
    fn interior_index(&self, t: f64) -> Result<usize> {
        let n = self.parameter_values.len();
        let found = self
            .parameter_values
            .iter()
            .position(|&v| (v - t).abs() <= 1e-9 * (1.0 + t.abs()));
        match found {
            Some(i) if i > 0 && i + 1 < n => Ok(i),
            _ => Err(QslError::ParameterOutOfRange { value: t }),
        }
    }

    /// Statistical length accumulated between consecutive samples, in the
    /// convention of [`statistical_velocity_sq`] (twice the Wootters angle).
    pub fn accumulated_length(&self) -> Result<f64> {
        let mut total = 0.0;
        for w in self.densities.windows(2) {
            total += 2.0 * wootters_angle(&w[0], &w[1], self.spacing)?;
        }
        Ok(total)
    }
}

/// Angle `arccos(Σ √(p₀ p₁) h)` between two densities on the same grid.
pub fn wootters_angle(p0: &[f64], p1: &[f64], h: f64) -> Result<f64> {
    if p0.len() != p1.len() {
        return Err(QslError::GridMismatch(format!(
            "{} vs {} points",
            p0.len(),
            p1.len()
        )));
    }
    for p in [p0, p1] {
        let mass: f64 = p.iter().sum::<f64>() * h;
        let deviation = (mass - 1.0).abs();
        if !(deviation <= REPAIR_TOL) {
            return Err(QslError::NotNormalized { deviation });
        }
    }
    let overlap: f64 = p0
        .iter()
        .zip(p1)
        .map(|(a, b)| (a.max(0.0) * b.max(0.0)).sqrt())
        .sum::<f64>()
        * h;
    Ok(overlap.clamp(0.0, 1.0).acos())
}

/// Fisher information `J_t = Σ (d_t P)² / P · h`, with `d_t P` by central difference.
pub fn fisher_information_1d(track: &DistributionTrack, t: f64) -> Result<f64> {
    let i = track.interior_index(t)?;
    let span = track.parameter_values[i + 1] - track.parameter_values[i - 1];
    let (before, here, after) = (
        &track.densities[i - 1],
        &track.densities[i],
        &track.densities[i + 1],
    );
    let mut j = 0.0;
    for x in 0..here.len() {
        let p = here[x];
        if p < FISHER_SUPPORT_CUTOFF {
            continue;
        }
        let dp = (after[x] - before[x]) / span;
        j += dp * dp / p;
    }
    Ok(j * track.spacing)
}

/// Squared statistical velocity from finite differences of the Wootters angle.
///
/// The statistical length is taken as twice the angle returned by
/// [`wootters_angle`], the normalization under which `(d_t ℓ)² = J_t` holds
/// with `J_t` as computed by [`fisher_information_1d`] (no factor 1/4).
pub fn statistical_velocity_sq(track: &DistributionTrack, t: f64) -> Result<f64> {
    let i = track.interior_index(t)?;
    let span = track.parameter_values[i + 1] - track.parameter_values[i - 1];
    let angle = wootters_angle(
        &track.densities[i - 1],
        &track.densities[i + 1],
        track.spacing,
    )?;
    let v = 2.0 * angle / span;
    Ok(v * v)
}

//! Hamiltonian protocols and initial states built from a [`ProtocolConfig`].

use qsl_core::linalg::{pauli_x, pauli_z};
use qsl_core::qdyn::{check_hermitian, eigensystem, HamiltonianProtocol, QuantumState, Trajectory};
use qsl_core::{CMatrix, CVector, C64};

use crate::config::{
    build_matrix, Entry, InitialState, MatrixSample, ProtocolConfig, ProtocolKind, StateLabel,
};
use crate::error::CliError;

/// Leakage into the top two oscillator levels above which a run is rejected.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

pub fn build_protocol(cfg: &ProtocolConfig) -> Result<HamiltonianProtocol, CliError> {
    let hbar = if cfg.natural_time { 1.0 } else { cfg.hbar };
    let (tau, d) = (cfg.duration, cfg.dim);
    let label = cfg.display_label();
    let protocol = match cfg.kind {
        ProtocolKind::Constant => {
            let spec = cfg
                .matrix
                .as_ref()
                .ok_or_else(|| CliError::field("matrix", "is required"))?;
            let h = hermitian(build_matrix(spec, d, "matrix")?, "matrix")?;
            HamiltonianProtocol::constant(label, h, tau, hbar)
        }
        ProtocolKind::PiecewiseConst => piecewise(cfg, label, hbar)?,
        ProtocolKind::RabiQubit => {
            require_dim(cfg, 2)?;
            let (w0, amp, wd) = (
                cfg.param("omega0")?,
                cfg.param("amplitude")?,
                cfg.param("omega_d")?,
            );
            HamiltonianProtocol::new(label, tau, hbar, move |t| {
                pauli_z().scale(0.5 * w0) + pauli_x().scale(amp * (wd * t).cos())
            })
        }
        ProtocolKind::LandauZener => {
            require_dim(cfg, 2)?;
            let (v, gap) = (cfg.param("v")?, cfg.param("delta")?);
            HamiltonianProtocol::new(label, tau, hbar, move |t| {
                pauli_z().scale(0.5 * v * (t - 0.5 * tau)) + pauli_x().scale(0.5 * gap)
            })
        }
        ProtocolKind::ModulatedOscillator => {
            if d < 3 {
                return Err(CliError::field(
                    "dim",
                    "must be at least 3 for modulated_oscillator",
                ));
            }
            let (w0, gamma) = (cfg.param("omega0")?, cfg.param("gamma")?);
            let lambda = cfg.param_or("lambda", 0.0)?;
            let number = CMatrix::from_fn(d, d, |i, j| {
                C64::new(if i == j { i as f64 } else { 0.0 }, 0.0)
            });
            let squeeze = squeezing(d);
            HamiltonianProtocol::new(label, tau, hbar, move |t| {
                number.scale(hbar * w0 * (gamma * t).exp()) + squeeze.scale(lambda)
            })
        }
        ProtocolKind::MatrixSamples => interpolated(cfg, label, hbar)?,
    };
    let protocol = protocol.map_err(|e| CliError::Config(format!("protocol: {e}")))?;
    if protocol.dim() != d {
        return Err(CliError::field(
            "dim",
            &format!(
                "is {d} but the Hamiltonian is {}x{}",
                protocol.dim(),
                protocol.dim()
            ),
        ));
    }
    if cfg.natural_time && cfg.hbar != 1.0 {
        return Ok(protocol.rescaled_hbar(cfg.hbar)?);
    }
    Ok(protocol)
}

fn require_dim(cfg: &ProtocolConfig, d: usize) -> Result<(), CliError> {
    if cfg.dim != d {
        return Err(CliError::field(
            "dim",
            &format!("must be {d} for this kind"),
        ));
    }
    Ok(())
}

fn hermitian(m: CMatrix, field: &str) -> Result<CMatrix, CliError> {
    check_hermitian(&m).map_err(|e| CliError::field(field, &e.to_string()))?;
    Ok(m)
}

/// `a² + a†²` on the lowest `d` ladder states.
fn squeezing(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a2 = &a * &a;
    &a2 + a2.adjoint()
}

fn piecewise(
    cfg: &ProtocolConfig,
    label: String,
    hbar: f64,
) -> Result<qsl_core::Result<HamiltonianProtocol>, CliError> {
    let segments = cfg
        .segments
        .as_ref()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CliError::field("segments", "must be a non-empty list"))?;
    let mut ends = Vec::with_capacity(segments.len());
    let mut matrices = Vec::with_capacity(segments.len());
    let mut end = 0.0;
    for (i, s) in segments.iter().enumerate() {
        let field = format!("segments[{i}]");
        if !(s.duration.is_finite() && s.duration > 0.0) {
            return Err(CliError::field(
                &format!("{field}.duration"),
                "must be positive",
            ));
        }
        end += s.duration;
        ends.push(end);
        matrices.push(hermitian(
            build_matrix(&s.matrix, cfg.dim, &format!("{field}.matrix"))?,
            &field,
        )?);
    }
    if (end - cfg.duration).abs() > 1e-9 * cfg.duration {
        return Err(CliError::field(
            "segments",
            &format!("durations sum to {end}, not {}", cfg.duration),
        ));
    }
    Ok(HamiltonianProtocol::new(
        label,
        cfg.duration,
        hbar,
        move |t| {
            let i = ends.partition_point(|&e| e <= t).min(matrices.len() - 1);
            matrices[i].clone()
        },
    ))
}

fn load_samples(cfg: &ProtocolConfig) -> Result<Vec<MatrixSample>, CliError> {
    match (&cfg.samples, &cfg.samples_file) {
        (Some(s), None) => Ok(s.clone()),
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::field("samples_file", &format!("is not a sample list: {e}")))
        }
        (Some(_), Some(_)) => Err(CliError::field(
            "samples",
            "and samples_file are mutually exclusive",
        )),
        (None, None) => Err(CliError::field("samples", "or samples_file is required")),
    }
}

fn interpolated(
    cfg: &ProtocolConfig,
    label: String,
    hbar: f64,
) -> Result<qsl_core::Result<HamiltonianProtocol>, CliError> {
    let samples = load_samples(cfg)?;
    if samples.len() < 2 {
        return Err(CliError::field("samples", "needs at least two entries"));
    }
    let mut times = Vec::with_capacity(samples.len());
    let mut matrices = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let field = format!("samples[{i}].matrix");
        if let Some(&prev) = times.last() {
            if !(s.t > prev) {
                return Err(CliError::field(
                    "samples",
                    "times must be strictly increasing",
                ));
            }
        }
        times.push(s.t);
        matrices.push(hermitian(
            build_matrix(&s.matrix, cfg.dim, &field)?,
            &field,
        )?);
    }
    let span = 1e-12 * cfg.duration;
    if times[0] > span || *times.last().unwrap() < cfg.duration - span {
        return Err(CliError::field(
            "samples",
            &format!("must cover [0, {}]", cfg.duration),
        ));
    }
    Ok(HamiltonianProtocol::new(
        label,
        cfg.duration,
        hbar,
        move |t| {
            let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
            let (t0, t1) = (times[i - 1], times[i]);
            let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            matrices[i - 1].scale(1.0 - w) + matrices[i].scale(w)
        },
    ))
}

pub fn initial_state(
    cfg: &ProtocolConfig,
    protocol: &HamiltonianProtocol,
) -> Result<QuantumState, CliError> {
    let d = cfg.dim;
    let bad = |e: qsl_core::QslError| CliError::field("initial_state", &e.to_string());
    match &cfg.initial_state {
        InitialState::Label(StateLabel::Ground) => {
            let es = eigensystem(&protocol.at(0.0))?;
            QuantumState::pure(es.eigenvectors.column(0).into_owned()).map_err(bad)
        }
        InitialState::Label(StateLabel::EqualSuperposition) => QuantumState::pure(
            CVector::from_element(d, C64::new(1.0 / (d as f64).sqrt(), 0.0)),
        )
        .map_err(bad),
        InitialState::Pure { pure } => {
            if pure.len() != d {
                return Err(CliError::field(
                    "initial_state.pure",
                    &format!("must have {d} amplitudes"),
                ));
            }
            QuantumState::pure(CVector::from_iterator(
                d,
                pure.iter().map(|e: &Entry| e.value()),
            ))
            .map_err(bad)
        }
        InitialState::Density { density } => {
            QuantumState::mixed(build_matrix(density, d, "initial_state.density")?).map_err(bad)
        }
    }
}

/// Largest population of the two highest levels along the trajectory.
pub fn top_level_leakage(traj: &Trajectory) -> f64 {
    traj.states
        .iter()
        .map(|s| {
            let rho = s.density();
            let d = rho.nrows();
            rho[(d - 1, d - 1)].re + rho[(d - 2, d - 2)].re
        })
        .fold(0.0, f64::max)
}

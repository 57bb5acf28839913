//! The `run`, `sweep`, `audit` and `fisher` verbs.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use qsl_core::bounds::{build_report, QslReport};
use qsl_core::geometry::{fisher_information_1d, statistical_velocity_sq, DistributionTrack};
use qsl_core::qdyn::{ground_shift_with, propagate};
use qsl_core::verify::{audit_trajectory, AuditReport};
use qsl_core::QslError;
use rayon::prelude::*;

use crate::config::{override_path, ProtocolConfig, ProtocolKind};
use crate::error::CliError;
use crate::protocols::{build_protocol, initial_state, top_level_leakage, LEAKAGE_LIMIT};
use crate::report::{csv_number, AuditSection, Meta, QslSection, RunDocument, VERSION};

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub steps: usize,
    pub report: QslReport,
    pub audit: AuditReport,
    pub leakage: Option<f64>,
}

/// ground shift → propagate → bounds → audit.
pub fn execute(cfg: &ProtocolConfig, tol: f64) -> Result<RunOutcome, CliError> {
    let protocol = build_protocol(cfg)?;
    let s0 = initial_state(cfg, &protocol)?;
    let shifted = ground_shift_with(&protocol, cfg.ground_shift_mode, cfg.steps)?;
    let traj = propagate(&shifted, &s0, cfg.steps)?;
    let leakage = (cfg.kind == ProtocolKind::ModulatedOscillator).then(|| top_level_leakage(&traj));
    if let Some(l) = leakage.filter(|&l| l > LEAKAGE_LIMIT) {
        return Err(QslError::DomainError(format!(
            "population {l:.3e} reached the top two oscillator levels; increase dim"
        ))
        .into());
    }
    Ok(RunOutcome {
        label: cfg.display_label(),
        steps: cfg.steps,
        report: build_report(&traj, cfg.ml_mode)?,
        audit: audit_trajectory(&traj, tol)?,
        leakage,
    })
}

pub fn document(cfg: &ProtocolConfig, outcome: &RunOutcome, wall_ms: Option<f64>) -> RunDocument {
    RunDocument {
        meta: Meta {
            version: VERSION,
            label: outcome.label.clone(),
            grid: outcome.steps,
            wall_ms,
            ground_shift_mode: cfg.ground_shift_mode,
            ml_mode: cfg.ml_mode,
            leakage: outcome.leakage.map(crate::report::Num),
        },
        qsl: QslSection::from(&outcome.report),
        audit: AuditSection::from(&outcome.audit),
    }
}

fn write_output(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path.display(), e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("stdout", e)),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
    bytes.push(b'\n');
    bytes
}

fn audit_verdict(audit: &AuditReport) -> Result<(), CliError> {
    let failed: Vec<_> = audit.failures().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::AuditFailed(failed.join(", ")))
    }
}

/// Writes the full report. Wall time is recorded only with `timing`, so that
/// the document is otherwise byte-for-byte reproducible.
pub fn run_command(
    config: &Path,
    output: Option<&Path>,
    timing: bool,
    tol: f64,
) -> Result<RunOutcome, CliError> {
    let cfg = ProtocolConfig::load(config)?;
    let start = Instant::now();
    let outcome = execute(&cfg, tol)?;
    let wall_ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    write_output(output, &to_json(&document(&cfg, &outcome, wall_ms)))?;
    audit_verdict(&outcome.audit)?;
    Ok(outcome)
}

pub fn audit_command(
    config: &Path,
    output: Option<&Path>,
    tol: f64,
) -> Result<RunOutcome, CliError> {
    let cfg = ProtocolConfig::load(config)?;
    let outcome = execute(&cfg, tol)?;
    write_output(output, &to_json(&AuditSection::from(&outcome.audit)))?;
    audit_verdict(&outcome.audit)?;
    Ok(outcome)
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "param_value",
    "tau",
    "bures",
    "e_avg",
    "de_avg",
    "tau_mt",
    "tau_ml_quad",
    "tau_ml_lin",
    "tau_qsl",
    "slack_min",
    "audit_passed",
];

/// Runs the base config once per value of `param` and returns the outcomes
/// in input order. Runs are independent and evaluated in parallel.
pub fn sweep(
    base: &serde_json::Value,
    config_dir: Option<&Path>,
    param: &str,
    values: &[f64],
    tol: f64,
) -> Vec<Result<RunOutcome, CliError>> {
    values
        .par_iter()
        .map(|&v| {
            let mut value = base.clone();
            override_path(&mut value, param, v)?;
            let mut cfg = ProtocolConfig::from_value(value)?;
            if let Some(dir) = config_dir {
                cfg.resolve_paths(dir);
            }
            execute(&cfg, tol)
        })
        .collect()
}

/// Writes one CSV row per completed run. A failed run leaves no row and its
/// error is returned after the file is written.
pub fn sweep_command(
    config: &Path,
    param: &str,
    values: &[f64],
    output: &Path,
    tol: f64,
) -> Result<Vec<RunOutcome>, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let text = std::fs::read_to_string(config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
    let base: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    // Fail fast on a path that does not resolve.
    override_path(&mut base.clone(), param, values[0])?;
    let results = sweep(&base, config.parent(), param, values, tol);

    let mut writer = csv::Writer::from_path(output).map_err(|e| csv_error(output, e))?;
    writer
        .write_record(SWEEP_COLUMNS)
        .map_err(|e| csv_error(output, e))?;
    let mut done = Vec::new();
    let mut first_error = None;
    for (v, result) in values.iter().zip(results) {
        match result {
            Ok(o) => {
                writer
                    .write_record(sweep_row(*v, &o))
                    .map_err(|e| csv_error(output, e))?;
                done.push(o);
            }
            Err(e) => {
                eprintln!("sweep value {v}: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    writer
        .flush()
        .map_err(|e| CliError::io(output.display(), e))?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(done),
    }
}

pub fn sweep_row(value: f64, o: &RunOutcome) -> Vec<String> {
    let r = &o.report;
    let mut row: Vec<String> = [
        value,
        r.tau,
        r.bures,
        r.e_avg,
        r.de_avg,
        r.tau_mt,
        r.tau_ml_quad,
        r.tau_ml_lin,
        r.tau_qsl,
        r.slacks.min(),
    ]
    .into_iter()
    .map(csv_number)
    .collect();
    row.push(o.audit.passed().to_string());
    row
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path.display(), std::io::Error::other(e))
}

/// One row of the translated-Gaussian demo.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherRow {
    pub t: f64,
    pub fisher: f64,
    pub inverse_variance: f64,
    pub velocity_sq: f64,
}

/// Fisher information and squared statistical velocity of
/// `P_t(x) ∝ exp(−(x−t)²/2σ²)` at `points` parameter values in `[0, 1]`.
pub fn fisher_demo(sigma: f64, points: usize) -> Result<Vec<FisherRow>, CliError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(CliError::field("sigma", "must be a positive number"));
    }
    let points = points.max(2);
    let h = sigma / 50.0;
    let (lo, hi) = (-12.0 * sigma, 1.0 + 12.0 * sigma);
    let n = ((hi - lo) / h).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
    let delta = 1e-3 * sigma;
    (0..points)
        .map(|k| {
            let t = k as f64 / (points - 1) as f64;
            let track = DistributionTrack::gaussian_shift(
                sigma,
                grid.clone(),
                vec![t - delta, t, t + delta],
            )?;
            Ok(FisherRow {
                t,
                fisher: fisher_information_1d(&track, t)?,
                inverse_variance: 1.0 / (sigma * sigma),
                velocity_sq: statistical_velocity_sq(&track, t)?,
            })
        })
        .collect()
}

pub fn fisher_command(
    sigma: f64,
    points: usize,
    output: &Path,
) -> Result<Vec<FisherRow>, CliError> {
    let rows = fisher_demo(sigma, points)?;
    let mut writer = csv::Writer::from_path(output).map_err(|e| csv_error(output, e))?;
    writer
        .write_record(["t", "fisher_information", "inverse_variance", "velocity_sq"])
        .map_err(|e| csv_error(output, e))?;
    for r in &rows {
        writer
            .write_record([r.t, r.fisher, r.inverse_variance, r.velocity_sq].map(csv_number))
            .map_err(|e| csv_error(output, e))?;
    }
    writer
        .flush()
        .map_err(|e| CliError::io(output.display(), e))?;
    Ok(rows)
}

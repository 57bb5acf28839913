//! JSON report document and CSV number formatting.

use qsl_core::bounds::{MlMode, QslReport};
use qsl_core::qdyn::GroundShiftMode;
use qsl_core::verify::AuditReport;
use serde::{Serialize, Serializer};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A float that serializes as a JSON number when finite and as `"inf"`,
/// `"-inf"` or `"nan"` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&non_finite(self.0))
        }
    }
}

fn non_finite(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        non_finite(x)
    }
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub version: &'static str,
    pub label: String,
    pub grid: usize,
    pub wall_ms: Option<f64>,
    pub ground_shift_mode: GroundShiftMode,
    pub ml_mode: MlMode,
    pub leakage: Option<Num>,
}

#[derive(Debug, Serialize)]
pub struct SlackSection {
    pub mt: Num,
    pub ml_quad: Num,
    pub ml_lin: Num,
    pub min: Num,
}

#[derive(Debug, Serialize)]
pub struct QslSection {
    pub tau: Num,
    pub bures: Num,
    pub e_avg: Num,
    pub de_avg: Num,
    pub tau_mt: Num,
    pub tau_ml_quad: Num,
    pub tau_ml_lin: Num,
    pub tau_qsl: Num,
    pub slacks: SlackSection,
    pub hbar: Num,
}

impl From<&QslReport> for QslSection {
    fn from(r: &QslReport) -> Self {
        Self {
            tau: Num(r.tau),
            bures: Num(r.bures),
            e_avg: Num(r.e_avg),
            de_avg: Num(r.de_avg),
            tau_mt: Num(r.tau_mt),
            tau_ml_quad: Num(r.tau_ml_quad),
            tau_ml_lin: Num(r.tau_ml_lin),
            tau_qsl: Num(r.tau_qsl),
            slacks: SlackSection {
                mt: Num(r.slacks.mt),
                ml_quad: Num(r.slacks.ml_quad),
                ml_lin: Num(r.slacks.ml_lin),
                min: Num(r.slacks.min()),
            },
            hbar: Num(r.hbar),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub worst_margin: Num,
    pub worst_time: Num,
    pub lhs: Num,
    pub rhs: Num,
    pub passed: bool,
    pub samples_checked: usize,
}

#[derive(Debug, Serialize)]
pub struct AuditSection {
    pub checks: Vec<CheckRow>,
    pub tolerance: Num,
    pub passed: bool,
    pub skipped: Vec<String>,
}

impl From<&AuditReport> for AuditSection {
    fn from(a: &AuditReport) -> Self {
        Self {
            checks: a
                .checks
                .iter()
                .map(|c| CheckRow {
                    name: c.name.clone(),
                    worst_margin: Num(c.worst_margin),
                    worst_time: Num(c.worst_time),
                    lhs: Num(c.lhs),
                    rhs: Num(c.rhs),
                    passed: c.passed,
                    samples_checked: c.samples_checked,
                })
                .collect(),
            tolerance: Num(a.tolerance),
            passed: a.passed(),
            skipped: a.skipped.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunDocument {
    pub meta: Meta,
    pub qsl: QslSection,
    pub audit: AuditSection,
}

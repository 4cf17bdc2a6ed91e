//! Machine-readable run reports. Schema-versioned; serialization is
//! deterministic for fixed inputs and seeds apart from the timing fields.

use serde::Serialize;

use crate::metrics::BoundReport;
use crate::mvee::MveeSolution;
use crate::pipeline::StageTimings;
use crate::sweep::{SweepConfig, SweepTable};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: Option<String>,
    pub rows: usize,
    pub cols: usize,
    pub digest: String,
}

/// Wall-clock per pipeline stage, milliseconds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TimingReport {
    pub svd_ms: f64,
    pub mvee_ms: f64,
    pub spa_ms: f64,
    pub total_ms: f64,
}

impl TimingReport {
    pub fn from_stages(stages: &StageTimings, total_ms: f64) -> Self {
        Self {
            svd_ms: stages.svd.as_secs_f64() * 1e3,
            mvee_ms: stages.mvee.as_secs_f64() * 1e3,
            spa_ms: stages.spa.as_secs_f64() * 1e3,
            total_ms,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MveeSummary {
    pub gap: f64,
    pub iterations: usize,
    pub certified: bool,
    pub regularized: bool,
}

impl From<&MveeSolution> for MveeSummary {
    fn from(sol: &MveeSolution) -> Self {
        Self {
            gap: sol.gap,
            iterations: sol.iterations,
            certified: sol.certified,
            regularized: sol.regularized,
        }
    }
}

/// Report of one extraction run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    /// Echo of the invoking command line.
    pub command: String,
    pub input: InputDigest,
    pub r: usize,
    pub algorithm: String,
    /// Selected column indices, 0-based, in pick order.
    pub indices: Vec<usize>,
    pub step_norms: Vec<f64>,
    pub residual_final: f64,
    pub timing: TimingReport,
    /// Discarded spectral mass of the reduction (preconditioned runs only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_tail: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mvee: Option<MveeSummary>,
    /// Order-free match with the sidecar's true indices, when one was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_recovery: Option<bool>,
    /// Bound evaluation against the sidecar ground truth, when the basis
    /// matrix was available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundReport>,
}

/// Report of a standalone ellipsoid solve.
#[derive(Debug, Clone, Serialize)]
pub struct MveeRunReport {
    pub schema_version: u32,
    pub command: String,
    pub input: InputDigest,
    /// The ellipsoid matrix, row-major nested.
    pub l_star: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub certified: bool,
    pub regularized: bool,
    pub total_ms: f64,
}

/// Sweep output bundle written by the bench command.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub command: String,
    pub config: SweepConfig,
    pub tables: Vec<SweepTable>,
}

/// CSV view of sweep tables. Columns: algorithm, epsilon, recovery_fraction,
/// mean_matched_error, max_matched_error, bound_satisfied.
pub fn sweep_tables_to_csv(tables: &[SweepTable]) -> String {
    let mut out = String::from(
        "algorithm,epsilon,recovery_fraction,mean_matched_error,max_matched_error,bound_satisfied\n",
    );
    for table in tables {
        for row in &table.rows {
            out.push_str(&format!(
                "{},{:.16e},{},{:.16e},{:.16e},{}\n",
                row.algorithm,
                row.epsilon,
                row.recovery_fraction,
                row.mean_matched_error,
                row.max_matched_error,
                row.bound_satisfied
            ));
        }
    }
    out
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

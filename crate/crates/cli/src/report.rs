//! JSON report and manifest documents. The shapes here are mirrored by the
//! schemas shipped under `schemas/`.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use trefree_core::gradcheck::FamilyReport;
use trefree_core::tabular::{BoundReport, MdpRepr};
use trefree_core::trainer::{IterationMetrics, TrainConfig};

pub fn version() -> String {
    format!("trefree-{}", env!("CARGO_PKG_VERSION"))
}

pub fn write_json<T: Serialize>(doc: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
pub struct VerifyParams {
    pub count: usize,
    pub seed: u64,
    pub gamma: f64,
    pub max_states: usize,
    pub max_actions: usize,
}

#[derive(Serialize)]
pub struct CheckSummary {
    pub checked: usize,
    pub violations: usize,
    /// Worst slack of the inequality (negative means violated), or the
    /// largest |lhs - rhs| gap for the identity check.
    pub worst: f64,
}

#[derive(Serialize)]
pub struct Violation {
    pub kind: String,
    pub instance: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_gap: Option<f64>,
    /// Full instance for replay.
    pub mdp: MdpRepr,
    pub pi_old: Vec<Vec<f64>>,
    pub pi_new: Vec<Vec<f64>>,
    pub f: Vec<f64>,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub command: String,
    pub version: String,
    pub params: VerifyParams,
    pub theorem1: CheckSummary,
    pub theorem2: CheckSummary,
    pub proposition1: CheckSummary,
    pub violations: Vec<Violation>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct GradCheckReport {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub nets: usize,
    pub families: Vec<FamilyReport>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct TrainResultSummary {
    pub iterations: usize,
    pub total_episodes: usize,
    pub final_return_mean_last10: f64,
    pub max_abs_log_ratio: f64,
    pub max_policy_term: f64,
    /// Set when the run aborted; the log rows before the abort are kept.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
}

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: TrainConfig,
    pub artifacts: Vec<String>,
    pub result: TrainResultSummary,
}

/// `metrics.csv`: one row per iteration.
pub fn write_metrics_csv(rows: &[IterationMetrics], path: &Path) -> Result<()> {
    let mut out = String::from(
        "step,return_mean,return_std,objective,min_log_ratio,max_log_ratio,mean_log_ratio,kl,lr,episodes,max_policy_term\n",
    );
    for m in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            m.steps,
            m.return_mean,
            m.return_std,
            m.objective,
            m.ratio.min_log_ratio,
            m.ratio.max_log_ratio,
            m.ratio.mean_log_ratio,
            m.kl,
            m.lr,
            m.episodes,
            m.max_policy_term,
        ));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

//! Metric reports over run directories.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;
use turnbench_core::metrics::{self, Annotator, MetricsError, MetricsReport, RunResults};
use turnbench_core::{Category, Registry, TaskOptions};

use crate::store::{self, StoreError};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Table,
}

/// Loads a run directory. The model id comes from `run.json`, falling back
/// to the directory name.
pub fn load_run(dir: &Path) -> Result<RunResults, ReportError> {
    let transcripts = store::read_transcripts(dir)?;
    let model_id = match store::read_run_header(dir)? {
        Some(h) => h.model_id,
        None => dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into()),
    };
    Ok(RunResults::from_transcripts(model_id, transcripts)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    #[serde(flatten)]
    pub report: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<MetricsReport>,
}

pub fn evaluate(results: &Path, baseline: Option<&Path>, annotator: &dyn Annotator) -> Result<Evaluation, ReportError> {
    let run = load_run(results)?;
    let base = match baseline {
        Some(dir) => {
            let mut b = load_run(dir)?;
            if b.model_id == run.model_id {
                b.model_id = format!("{} (baseline)", b.model_id);
            }
            Some(b)
        }
        None => None,
    };
    let report = metrics::report(&run, base.as_ref(), annotator)?;
    let baseline = match &base {
        Some(b) => Some(metrics::report(b, Some(&run), annotator)?),
        None => None,
    };
    Ok(Evaluation { report, baseline })
}

fn category_of(task: &str) -> Option<Category> {
    thread_local! {
        static REGISTRY: Registry = Registry::standard(&TaskOptions::default()).expect("bundled tasks register");
    }
    REGISTRY.with(|r| r.lookup(task).ok().map(|t| t.category()))
}

pub fn render(evaluation: &Evaluation, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(evaluation).expect("report serializes") + "\n",
        ReportFormat::Table => {
            let mut rows = vec![evaluation.report.clone()];
            if let Some(b) = &evaluation.baseline {
                // Efficiency is shown once, on the primary row.
                let mut b = b.clone();
                b.efficiency = None;
                rows.push(b);
            }
            metrics::render_table(&rows, category_of)
        }
    }
}

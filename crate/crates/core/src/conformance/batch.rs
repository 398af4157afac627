use std::path::Path;

use futures::stream::{self, StreamExt};
use serde::Serialize;
use thiserror::Error;
use url::Url;

use super::{ProbeReport, Prober, EXIT_FAIL, EXIT_PASS};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("cannot read questions file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("questions file {0} has no questions")]
    Empty(String),
}

/// Reads one question per line, skipping blank lines.
pub fn load_questions(path: impl AsRef<Path>) -> Result<Vec<String>, BatchError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| BatchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let questions: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect();
    if questions.is_empty() {
        return Err(BatchError::Empty(path.display().to_string()));
    }
    Ok(questions)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Emitted line by line in JSON mode, so left out of the summary object.
    #[serde(skip)]
    pub reports: Vec<ProbeReport>,
}

impl BatchSummary {
    fn from_reports(reports: Vec<ProbeReport>) -> Self {
        let passed = reports.iter().filter(|r| r.verdict.is_pass()).count();
        Self {
            total: reports.len(),
            passed,
            failed: reports.len() - passed,
            reports,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed == 0 {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Probes every question, at most `concurrency` at a time.
///
/// `on_report` sees reports in input order whatever the concurrency.
pub async fn batch_run(
    prober: &Prober,
    endpoint: &Url,
    questions: &[String],
    concurrency: usize,
    mut on_report: impl FnMut(&ProbeReport),
) -> BatchSummary {
    let mut reports = Vec::with_capacity(questions.len());
    let mut in_order = stream::iter(questions)
        .map(|q| prober.probe(endpoint, q))
        .buffered(concurrency.max(1));
    while let Some(report) = in_order.next().await {
        on_report(&report);
        reports.push(report);
    }
    BatchSummary::from_reports(reports)
}

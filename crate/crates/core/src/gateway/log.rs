use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::Mutex;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

/// One line of the ask log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub ts: String,
    /// `None` when the request was rejected before a question was read.
    pub question: Option<String>,
    pub provider: String,
    pub latency_ms: u64,
    pub answered: bool,
}

impl LogRecord {
    pub fn now(question: Option<String>, provider: impl Into<String>, latency_ms: u64, answered: bool) -> Self {
        Self {
            ts: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            question,
            provider: provider.into(),
            latency_ms,
            answered,
        }
    }
}

/// Append-only JSON-lines log of ask requests. Writes are serialized.
#[derive(Debug)]
pub struct RequestLog {
    file: Option<Mutex<File>>,
}

impl RequestLog {
    pub fn disabled() -> Self {
        Self { file: None }
    }

    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            file: Some(Mutex::new(file)),
        })
    }

    pub fn append(&self, record: &LogRecord) {
        tracing::info!(
            provider = %record.provider,
            latency_ms = record.latency_ms,
            answered = record.answered,
            "ask"
        );
        let Some(file) = &self.file else { return };
        let mut line = serde_json::to_vec(record).expect("log records always serialize");
        line.push(b'\n');
        let mut file = file.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
        if let Err(e) = file.write_all(&line) {
            tracing::error!(error = %e, "failed to append request log");
        }
    }
}

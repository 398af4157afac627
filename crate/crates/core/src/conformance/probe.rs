use std::time::Instant;

use axum::http::header::CONTENT_TYPE;
use serde::Serialize;
use url::Url;

use super::{client_for, FailReason, Verdict};
use crate::protocol::{encode_request, validate_response_contract, ContractReport, KeyConfig, TimeoutBudget, FORM_MEDIA_TYPE};

/// Result of one question round-trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub endpoint: String,
    pub question: String,
    /// `None` when no response arrived.
    pub http_status: Option<u16>,
    pub latency_ms: u64,
    pub contract: ContractReport,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl ProbeReport {
    /// One human-readable line.
    pub fn summary_line(&self) -> String {
        let status = self.http_status.map_or_else(|| "---".to_owned(), |s| s.to_string());
        let mut line = format!(
            "{:<24} {status} {:>5} ms  {:?}",
            self.verdict.to_string(),
            self.latency_ms,
            self.question
        );
        if let Some(v) = self.contract.violations.first() {
            line.push_str(&format!("  [{}]", v.detail));
        }
        line
    }
}

fn verdict_for(http_status: Option<u16>, latency_ms: u64, contract: &ContractReport, budget: TimeoutBudget) -> Verdict {
    match http_status {
        None => Verdict::Fail(FailReason::Unreachable),
        Some(_) if latency_ms > budget.as_millis() => Verdict::Fail(FailReason::Timeout),
        Some(200) => match contract.first_code() {
            Some(code) => Verdict::Fail(code.into()),
            None => Verdict::Pass,
        },
        Some(_) => Verdict::Fail(FailReason::HttpStatus),
    }
}

/// Reusable prober holding one HTTP client, key config and budget.
#[derive(Debug, Clone)]
pub struct Prober {
    client: reqwest::Client,
    keys: KeyConfig,
    budget: TimeoutBudget,
}

impl Prober {
    pub fn new(client: reqwest::Client, keys: KeyConfig, budget: TimeoutBudget) -> Self {
        Self { client, keys, budget }
    }

    pub fn for_endpoint(endpoint: &Url, keys: KeyConfig, budget: TimeoutBudget) -> Self {
        Self::new(client_for(endpoint), keys, budget)
    }

    pub fn budget(&self) -> TimeoutBudget {
        self.budget
    }

    /// POSTs `question` form-encoded and judges the reply.
    pub async fn probe(&self, endpoint: &Url, question: &str) -> ProbeReport {
        let started = Instant::now();
        let result = async {
            let response = self
                .client
                .post(endpoint.clone())
                .header(CONTENT_TYPE, FORM_MEDIA_TYPE)
                .body(encode_request(question, &self.keys))
                .timeout(self.budget.as_duration())
                .send()
                .await?;
            let status = response.status().as_u16();
            let body = response.bytes().await?;
            Ok::<_, reqwest::Error>((status, body))
        }
        .await;
        let latency_ms = started.elapsed().as_millis() as u64;

        let (http_status, contract, verdict) = match result {
            Ok((status, body)) => {
                let contract = validate_response_contract(&body, &self.keys);
                let verdict = verdict_for(Some(status), latency_ms, &contract, self.budget);
                (Some(status), contract, verdict)
            }
            Err(e) => {
                let reason = if e.is_timeout() {
                    FailReason::Timeout
                } else {
                    FailReason::Unreachable
                };
                (e.status().map(|s| s.as_u16()), ContractReport::default(), Verdict::Fail(reason))
            }
        };
        ProbeReport {
            endpoint: endpoint.to_string(),
            question: question.to_owned(),
            http_status,
            latency_ms,
            contract,
            verdict,
        }
    }
}

/// One-shot probe with a fresh client.
pub async fn probe(endpoint: &Url, question: &str, keys: &KeyConfig, budget: TimeoutBudget) -> ProbeReport {
    Prober::for_endpoint(endpoint, keys.clone(), budget)
        .probe(endpoint, question)
        .await
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Violation, ViolationCode};

    fn report(code: Option<ViolationCode>) -> ContractReport {
        ContractReport {
            violations: code
                .map(|code| Violation {
                    code,
                    detail: String::new(),
                })
                .into_iter()
                .collect(),
        }
    }

    #[test]
    fn verdict_precedence() {
        let budget = TimeoutBudget::default();
        assert_eq!(verdict_for(Some(200), 10, &report(None), budget), Verdict::Pass);
        assert_eq!(verdict_for(Some(200), 2000, &report(None), budget), Verdict::Pass);
        assert_eq!(
            verdict_for(Some(200), 2001, &report(None), budget),
            Verdict::Fail(FailReason::Timeout)
        );
        assert_eq!(
            verdict_for(Some(500), 10, &report(None), budget),
            Verdict::Fail(FailReason::HttpStatus)
        );
        assert_eq!(
            verdict_for(Some(200), 10, &report(Some(ViolationCode::MissingAnswerKey)), budget),
            Verdict::Fail(FailReason::MissingAnswerKey)
        );
        assert_eq!(verdict_for(None, 1, &report(None), budget), Verdict::Fail(FailReason::Unreachable));
    }

    #[test]
    fn report_serializes_flat() {
        let r = ProbeReport {
            endpoint: "http://127.0.0.1:1/ask".into(),
            question: "q".into(),
            http_status: None,
            latency_ms: 3,
            contract: ContractReport::default(),
            verdict: Verdict::Fail(FailReason::Unreachable),
        };
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["verdict"], "FAIL");
        assert_eq!(v["reason"], "Unreachable");
        assert_eq!(v["http_status"], serde_json::Value::Null);
        assert_eq!(v["contract"]["violations"], serde_json::json!([]));
    }
}

use std::time::Duration;

use axum::http::{header, Method};
use serde::Serialize;
use url::Url;

use super::{client_for, FailReason, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreflightReport {
    pub endpoint: String,
    pub origin: String,
    pub http_status: Option<u16>,
    pub allow_origin: Option<String>,
    pub allow_methods: Option<String>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl PreflightReport {
    pub fn summary_line(&self) -> String {
        let status = self.http_status.map_or_else(|| "---".to_owned(), |s| s.to_string());
        format!(
            "{:<20} {status}  origin={}  allow-origin={}  allow-methods={}",
            self.verdict.to_string(),
            self.origin,
            self.allow_origin.as_deref().unwrap_or("-"),
            self.allow_methods.as_deref().unwrap_or("-"),
        )
    }
}

fn methods_allow_post(list: &str) -> bool {
    list.split(',').map(str::trim).any(|m| m == "*" || m.eq_ignore_ascii_case("POST"))
}

fn judge(status: u16, origin: &str, allow_origin: Option<&str>, allow_methods: Option<&str>) -> Verdict {
    if status == 403 {
        return Verdict::Fail(FailReason::OriginDenied);
    }
    if !(200..300).contains(&status) {
        return Verdict::Fail(FailReason::HttpStatus);
    }
    match allow_origin {
        Some(o) if o == "*" || o == origin => {}
        _ => return Verdict::Fail(FailReason::OriginDenied),
    }
    if !allow_methods.is_some_and(methods_allow_post) {
        return Verdict::Fail(FailReason::MethodDenied);
    }
    Verdict::Pass
}

/// Sends a CORS preflight for a cross-origin `POST` from `origin`.
pub async fn preflight_check(endpoint: &Url, origin: &str, timeout: Duration) -> PreflightReport {
    let client = client_for(endpoint);
    let result = client
        .request(Method::OPTIONS, endpoint.clone())
        .header(header::ORIGIN, origin)
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .header(header::ACCESS_CONTROL_REQUEST_HEADERS, "content-type")
        .timeout(timeout)
        .send()
        .await;
    let mut report = PreflightReport {
        endpoint: endpoint.to_string(),
        origin: origin.to_owned(),
        http_status: None,
        allow_origin: None,
        allow_methods: None,
        verdict: Verdict::Fail(FailReason::Unreachable),
    };
    let response = match result {
        Ok(r) => r,
        Err(e) => {
            if e.is_timeout() {
                report.verdict = Verdict::Fail(FailReason::Timeout);
            }
            return report;
        }
    };
    let header_str = |name| {
        response
            .headers()
            .get(name)
            .and_then(|v| v.to_str().ok())
            .map(str::to_owned)
    };
    report.http_status = Some(response.status().as_u16());
    report.allow_origin = header_str(header::ACCESS_CONTROL_ALLOW_ORIGIN);
    report.allow_methods = header_str(header::ACCESS_CONTROL_ALLOW_METHODS);
    report.verdict = judge(
        response.status().as_u16(),
        origin,
        report.allow_origin.as_deref(),
        report.allow_methods.as_deref(),
    );
    report
}

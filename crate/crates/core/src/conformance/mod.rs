//! Certifies an engine endpoint against the webhook contract.
//!
//! A probe POSTs one question the way the browser component does, times the
//! round-trip against the client budget, and checks the response shape. A
//! preflight check asks whether a browser on a given origin may call the
//! engine at all.
//!
//! The 2 s budget is a client-side abort in the component. This tool treats
//! it as a hard limit: an answer that arrives after the budget is a failure,
//! because the component would already have shown its timeout message.

mod batch;
mod preflight;
mod probe;

use std::fmt;

use serde::Serialize;

pub use batch::{batch_run, load_questions, BatchError, BatchSummary};
pub use preflight::{preflight_check, PreflightReport};
pub use probe::{probe, ProbeReport, Prober};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FailReason {
    Unreachable,
    Timeout,
    HttpStatus,
    NotJson,
    MissingAnswerKey,
    NonStringAnswer,
    EmptyAnswer,
    OriginDenied,
    MethodDenied,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<crate::protocol::ViolationCode> for FailReason {
    fn from(code: crate::protocol::ViolationCode) -> Self {
        use crate::protocol::ViolationCode;
        match code {
            ViolationCode::NotJson => FailReason::NotJson,
            ViolationCode::MissingAnswerKey => FailReason::MissingAnswerKey,
            ViolationCode::NonStringAnswer => FailReason::NonStringAnswer,
            ViolationCode::EmptyAnswer => FailReason::EmptyAnswer,
        }
    }
}

/// Serialized as `"verdict": "PASS"` or `"verdict": "FAIL", "reason": "<code>"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "reason")]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail(FailReason),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn reason(&self) -> Option<FailReason> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail(r) => Some(*r),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_pass() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail(reason) => write!(f, "FAIL({reason})"),
        }
    }
}

fn is_loopback(url: &url::Url) -> bool {
    match url.host() {
        Some(url::Host::Domain(d)) => d.eq_ignore_ascii_case("localhost"),
        Some(url::Host::Ipv4(ip)) => ip.is_loopback(),
        Some(url::Host::Ipv6(ip)) => ip.is_loopback(),
        None => false,
    }
}

/// HTTP client for probing; proxies are bypassed for loopback engines.
pub fn client_for(endpoint: &url::Url) -> reqwest::Client {
    let builder = reqwest::Client::builder();
    let builder = if is_loopback(endpoint) { builder.no_proxy() } else { builder };
    builder.build().expect("default TLS backend initializes")
}

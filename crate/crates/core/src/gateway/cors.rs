//! Cross-origin policy for the gateway.
//!
//! Allowed origins get `Access-Control-Allow-*` headers on every response and
//! a `204` preflight. Disallowed origins get `403` on preflight and never see
//! an allow header; their simple requests are still served, and the browser
//! withholds the response from the calling page.

use axum::body::Body;
use axum::extract::{Request, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::middleware::Next;
use axum::response::{IntoResponse, Response};

use super::config::AllowedOrigins;

pub const ALLOW_METHODS: &str = "POST, GET, OPTIONS";
pub const ALLOW_HEADERS: &str = "Content-Type";
pub const MAX_AGE_SECS: u32 = 600;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorsDecision {
    /// No `Origin` header: not a cross-origin request.
    NotCors,
    /// Origin is allowed; carries the `Access-Control-Allow-Origin` value.
    Allowed(HeaderValue),
    Denied,
}

#[derive(Debug, Clone)]
pub struct CorsPolicy {
    origins: AllowedOrigins,
}

impl CorsPolicy {
    pub fn new(origins: AllowedOrigins) -> Self {
        Self { origins }
    }

    pub fn decide(&self, origin: Option<&HeaderValue>) -> CorsDecision {
        let Some(origin) = origin else {
            return CorsDecision::NotCors;
        };
        match (&self.origins, origin.to_str()) {
            (AllowedOrigins::Any, _) => CorsDecision::Allowed(HeaderValue::from_static("*")),
            (list, Ok(o)) if list.allows(o) => CorsDecision::Allowed(origin.clone()),
            _ => CorsDecision::Denied,
        }
    }

    fn vary_on_origin(&self) -> bool {
        matches!(self.origins, AllowedOrigins::List(_))
    }

    /// Headers granted to an allowed origin.
    pub fn allow_headers(&self, allow_origin: HeaderValue) -> HeaderMap {
        let mut headers = HeaderMap::new();
        headers.insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, allow_origin);
        headers.insert(header::ACCESS_CONTROL_ALLOW_METHODS, HeaderValue::from_static(ALLOW_METHODS));
        headers.insert(header::ACCESS_CONTROL_ALLOW_HEADERS, HeaderValue::from_static(ALLOW_HEADERS));
        headers.insert(header::ACCESS_CONTROL_MAX_AGE, HeaderValue::from(MAX_AGE_SECS));
        if self.vary_on_origin() {
            headers.insert(header::VARY, HeaderValue::from_static("Origin"));
        }
        headers
    }

    /// Response to an `OPTIONS` request.
    pub fn preflight(&self, origin: Option<&HeaderValue>) -> Response {
        match self.decide(origin) {
            CorsDecision::Allowed(allow_origin) => {
                (StatusCode::NO_CONTENT, self.allow_headers(allow_origin)).into_response()
            }
            CorsDecision::Denied => {
                let mut response = StatusCode::FORBIDDEN.into_response();
                if self.vary_on_origin() {
                    response.headers_mut().insert(header::VARY, HeaderValue::from_static("Origin"));
                }
                response
            }
            CorsDecision::NotCors => {
                let mut response = Response::new(Body::empty());
                *response.status_mut() = StatusCode::NO_CONTENT;
                response
                    .headers_mut()
                    .insert(header::ALLOW, HeaderValue::from_static(ALLOW_METHODS));
                response
            }
        }
    }
}

/// Answers preflights and decorates every other response.
pub async fn cors_middleware(State(policy): State<CorsPolicy>, request: Request, next: Next) -> Response {
    let origin = request.headers().get(header::ORIGIN).cloned();
    if request.method() == Method::OPTIONS {
        return policy.preflight(origin.as_ref());
    }
    let decision = policy.decide(origin.as_ref());
    let mut response = next.run(request).await;
    let headers = response.headers_mut();
    // Only the policy decides Allow-Origin.
    headers.remove(header::ACCESS_CONTROL_ALLOW_ORIGIN);
    match decision {
        CorsDecision::Allowed(allow_origin) => headers.extend(policy.allow_headers(allow_origin)),
        CorsDecision::Denied if policy.vary_on_origin() => {
            headers.insert(header::VARY, HeaderValue::from_static("Origin"));
        }
        _ => {}
    }
    response
}

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{middleware, Router};
use serde_json::json;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use super::config::{ConfigError, GatewayConfig};
use super::cors::{cors_middleware, CorsPolicy};
use super::log::{LogRecord, RequestLog};
use super::provider::{AnswerProvider, KnowledgeProvider, ProviderChain, UpstreamProvider, BUILTIN_FALLBACK};
use crate::knowledge::{catalog, KbError, KnowledgeBase};
use crate::protocol::{parse_request, render_response, AnswerText, KeyConfig, RESPONSE_CONTENT_TYPE};

pub const ASK_PATH: &str = "/ask";
pub const QUESTIONS_PATH: &str = "/questions";
pub const HEALTH_PATH: &str = "/health";

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid config: {}", join(.0))]
    Config(Vec<ConfigError>),
    #[error("invalid knowledge base: {}", join(.0))]
    Knowledge(Vec<KbError>),
    #[error("cannot open request log: {0}")]
    Log(#[source] io::Error),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: io::Error,
    },
}

fn join<E: ToString>(errors: &[E]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Clone)]
struct AppState {
    keys: KeyConfig,
    kb: Option<Arc<KnowledgeBase>>,
    chain: Arc<ProviderChain>,
    log: Arc<RequestLog>,
}

/// The reference engine: knowledge base first, then an optional upstream.
pub struct Gateway {
    config: GatewayConfig,
    state: AppState,
}

impl Gateway {
    /// Loads the knowledge base and opens the log named in `config`.
    pub fn from_config(config: GatewayConfig) -> Result<Self, GatewayError> {
        config.validate().map_err(GatewayError::Config)?;
        let kb = match &config.kb_path {
            Some(path) => Some(Arc::new(KnowledgeBase::from_path(path).map_err(GatewayError::Knowledge)?)),
            None => None,
        };
        let mut providers: Vec<Arc<dyn AnswerProvider>> = Vec::new();
        if let Some(kb) = &kb {
            providers.push(Arc::new(KnowledgeProvider::new(kb.clone())));
        }
        if let Some(upstream) = &config.upstream {
            providers.push(Arc::new(UpstreamProvider::new(reqwest::Client::new(), upstream.clone())));
        }
        Self::with_providers(config, kb, providers)
    }

    /// Builds a gateway around a caller-supplied provider chain.
    ///
    /// `kb` backs the catalog and health endpoints and supplies the fallback
    /// answer; it is not added to `providers` automatically.
    pub fn with_providers(
        config: GatewayConfig,
        kb: Option<Arc<KnowledgeBase>>,
        providers: Vec<Arc<dyn AnswerProvider>>,
    ) -> Result<Self, GatewayError> {
        let log = match &config.log_path {
            Some(path) => RequestLog::open(path).map_err(GatewayError::Log)?,
            None => RequestLog::disabled(),
        };
        let fallback = match &kb {
            Some(kb) => kb.fallback_answer().clone(),
            None => AnswerText::new(BUILTIN_FALLBACK).expect("non-empty"),
        };
        let chain = ProviderChain::new(providers, fallback, Duration::from_millis(config.deadline_ms));
        let state = AppState {
            keys: config.keys.clone(),
            kb,
            chain: Arc::new(chain),
            log: Arc::new(log),
        };
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn router(&self) -> Router {
        let policy = CorsPolicy::new(self.config.allowed_origins.clone());
        Router::new()
            .route(ASK_PATH, post(handle_ask))
            .route(QUESTIONS_PATH, get(handle_questions))
            .route(HEALTH_PATH, get(handle_health))
            .with_state(self.state.clone())
            .layer(middleware::from_fn_with_state(policy, cors_middleware))
    }

    /// Serves on `listener` until `shutdown` resolves.
    pub async fn serve(self, listener: TcpListener, shutdown: impl Future<Output = ()> + Send + 'static) -> io::Result<()> {
        axum::serve(listener, self.router()).with_graceful_shutdown(shutdown).await
    }

    /// Binds `bind_address` and serves in a background task.
    pub async fn spawn(self) -> Result<RunningGateway, GatewayError> {
        let addr = self.config.bind_address.clone();
        let listener = TcpListener::bind(&addr)
            .await
            .map_err(|source| GatewayError::Bind { addr: addr.clone(), source })?;
        let local_addr = listener
            .local_addr()
            .map_err(|source| GatewayError::Bind { addr, source })?;
        let (tx, rx) = oneshot::channel::<()>();
        let task = tokio::spawn(self.serve(listener, async {
            let _ = rx.await;
        }));
        Ok(RunningGateway {
            addr: local_addr,
            shutdown: Some(tx),
            task,
        })
    }
}

/// Handle on a gateway serving in the background.
pub struct RunningGateway {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<io::Result<()>>,
}

impl RunningGateway {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self, path: &str) -> url::Url {
        url::Url::parse(&format!("http://{}{}", self.addr, path)).expect("socket address forms a valid URL")
    }

    pub fn ask_url(&self) -> url::Url {
        self.url(ASK_PATH)
    }

    pub async fn shutdown(mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.task.await.map_err(io::Error::other)?
    }
}

fn json_response(status: StatusCode, body: Vec<u8>) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, HeaderValue::from_static(RESPONSE_CONTENT_TYPE))],
        body,
    )
        .into_response()
}

fn error_body(code: &str) -> Vec<u8> {
    serde_json::to_vec(&json!({ "error": code })).expect("static JSON")
}

async fn handle_ask(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Response {
    let started = Instant::now();
    let content_type = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .unwrap_or_default();
    let question = match parse_request(&body, content_type, &state.keys) {
        Ok(q) => q,
        Err(e) => {
            let latency_ms = started.elapsed().as_millis() as u64;
            state.log.append(&LogRecord::now(None, "rejected", latency_ms, false));
            return json_response(StatusCode::BAD_REQUEST, error_body(e.code()));
        }
    };
    let outcome = state.chain.ask(&question).await;
    let body = render_response(&outcome.answer, &state.keys);
    let latency_ms = started.elapsed().as_millis() as u64;
    state.log.append(&LogRecord::now(
        Some(question.as_str().to_owned()),
        outcome.provider,
        latency_ms,
        outcome.answered,
    ));
    json_response(StatusCode::OK, body)
}

async fn handle_questions(State(state): State<AppState>) -> Response {
    match &state.kb {
        Some(kb) => json_response(
            StatusCode::OK,
            serde_json::to_vec(&catalog(kb)).expect("catalog items serialize"),
        ),
        None => json_response(StatusCode::NOT_FOUND, error_body("NoKnowledgeBase")),
    }
}

async fn handle_health(State(state): State<AppState>) -> Response {
    let kb_entries = state.kb.as_ref().map_or(0, |kb| kb.len());
    json_response(
        StatusCode::OK,
        serde_json::to_vec(&json!({ "status": "ok", "kb_entries": kb_entries })).expect("static JSON"),
    )
}

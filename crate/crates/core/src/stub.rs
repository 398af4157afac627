//! Scriptable fake engine for tests, demos and conformance drills.
//!
//! Every request, on any path and with any method, gets the same canned
//! response after an optional delay.

use std::io;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

#[derive(Debug, Clone)]
pub struct StubBehavior {
    status: StatusCode,
    content_type: String,
    body: Vec<u8>,
    delay: Duration,
}

impl StubBehavior {
    /// `{"<key>": "<text>"}` with status 200.
    pub fn answer(key: &str, text: &str) -> Self {
        Self::json(serde_json::json!({ key: text }))
    }

    pub fn json(value: serde_json::Value) -> Self {
        Self {
            status: StatusCode::OK,
            content_type: "application/json".into(),
            body: serde_json::to_vec(&value).expect("JSON values serialize"),
            delay: Duration::ZERO,
        }
    }

    pub fn raw(content_type: &str, body: impl Into<Vec<u8>>) -> Self {
        Self {
            status: StatusCode::OK,
            content_type: content_type.into(),
            body: body.into(),
            delay: Duration::ZERO,
        }
    }

    pub fn with_status(mut self, status: u16) -> Self {
        self.status = StatusCode::from_u16(status).expect("valid status code");
        self
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }
}

#[derive(Clone)]
struct StubState {
    behavior: Arc<StubBehavior>,
    hits: Arc<AtomicUsize>,
}

async fn respond(State(state): State<StubState>) -> Response {
    state.hits.fetch_add(1, Ordering::SeqCst);
    let b = &state.behavior;
    tokio::time::sleep(b.delay).await;
    (b.status, [(header::CONTENT_TYPE, b.content_type.clone())], b.body.clone()).into_response()
}

/// A running stub engine on an ephemeral loopback port.
pub struct StubEngine {
    addr: SocketAddr,
    hits: Arc<AtomicUsize>,
    _shutdown: oneshot::Sender<()>,
}

impl StubEngine {
    pub async fn spawn(behavior: StubBehavior) -> io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0").await?;
        let addr = listener.local_addr()?;
        let hits = Arc::new(AtomicUsize::new(0));
        let state = StubState {
            behavior: Arc::new(behavior),
            hits: hits.clone(),
        };
        let app = Router::new().fallback(respond).with_state(state);
        let (tx, rx) = oneshot::channel::<()>();
        tokio::spawn(async move {
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
        Ok(Self {
            addr,
            hits,
            _shutdown: tx,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> url::Url {
        url::Url::parse(&format!("http://{}/ask", self.addr)).expect("socket address forms a valid URL")
    }

    /// Requests received so far.
    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

//! HTTP engine service.
//!
//! `POST /ask` implements the webhook contract, `GET /questions` serves the
//! categorized question list and `GET /health` reports liveness. Answers come
//! from a provider chain (local knowledge base, then an optional upstream
//! engine) bounded by a deadline that stays inside the client's 2 s budget.

pub mod config;
pub mod cors;
pub mod log;
pub mod provider;
mod server;

pub use config::{load_config, AllowedOrigins, ConfigError, GatewayConfig, UpstreamConfig, CONFIG_ENV_VAR};
pub use cors::{CorsDecision, CorsPolicy};
pub use log::{LogRecord, RequestLog};
pub use provider::{
    proxy_provider, AnswerProvider, ChainAnswer, KnowledgeProvider, ProviderChain, ProviderOutcome, UpstreamProvider,
    BUILTIN_FALLBACK,
};
pub use server::{Gateway, GatewayError, RunningGateway, ASK_PATH, HEALTH_PATH, QUESTIONS_PATH};

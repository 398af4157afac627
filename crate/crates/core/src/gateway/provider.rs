//! Answer providers and the chain that consults them in order.

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use axum::http::header::CONTENT_TYPE;

use super::config::UpstreamConfig;
use crate::knowledge::{self, KnowledgeBase};
use crate::protocol::{
    encode_request, parse_response, AnswerText, KeyConfig, QuestionText, ResponseError, FORM_MEDIA_TYPE,
};

/// Answer used when nothing in the chain answered and no knowledge base
/// supplies its own fallback.
pub const BUILTIN_FALLBACK: &str = "Sorry, I don't have an answer to that right now.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderOutcome {
    Answered(AnswerText),
    NoAnswer,
    Failed(String),
}

/// A source of answers. Providers never error; failures are outcomes.
#[async_trait]
pub trait AnswerProvider: Send + Sync {
    /// Short name recorded in the request log.
    fn name(&self) -> &str;

    async fn answer(&self, question: &QuestionText) -> ProviderOutcome;
}

/// Answers from a local knowledge base; no match means `NoAnswer`.
#[derive(Debug, Clone)]
pub struct KnowledgeProvider {
    kb: Arc<KnowledgeBase>,
}

impl KnowledgeProvider {
    pub fn new(kb: Arc<KnowledgeBase>) -> Self {
        Self { kb }
    }
}

#[async_trait]
impl AnswerProvider for KnowledgeProvider {
    fn name(&self) -> &str {
        "knowledge"
    }

    async fn answer(&self, question: &QuestionText) -> ProviderOutcome {
        match knowledge::matched_answer(&self.kb, question) {
            Some((_, answer)) => ProviderOutcome::Answered(answer),
            None => ProviderOutcome::NoAnswer,
        }
    }
}

/// Forwards questions to another engine speaking the same webhook contract.
#[derive(Debug, Clone)]
pub struct UpstreamProvider {
    client: reqwest::Client,
    config: UpstreamConfig,
}

impl UpstreamProvider {
    pub fn new(client: reqwest::Client, config: UpstreamConfig) -> Self {
        Self { client, config }
    }
}

#[async_trait]
impl AnswerProvider for UpstreamProvider {
    fn name(&self) -> &str {
        "upstream"
    }

    async fn answer(&self, question: &QuestionText) -> ProviderOutcome {
        proxy_provider(&self.client, question, &self.config).await
    }
}

fn classify_transport_error(e: &reqwest::Error) -> String {
    if e.is_timeout() {
        "timeout".into()
    } else if e.is_connect() {
        "connect".into()
    } else {
        format!("request: {e}")
    }
}

/// Asks an upstream engine, bounded by `upstream.timeout_ms`.
///
/// A missing or empty answer is `NoAnswer`; transport errors, timeouts,
/// non-2xx statuses and malformed bodies are `Failed`.
pub async fn proxy_provider(client: &reqwest::Client, question: &QuestionText, upstream: &UpstreamConfig) -> ProviderOutcome {
    let keys = match KeyConfig::new(upstream.data_key.clone(), upstream.response_key.clone()) {
        Ok(k) => k,
        Err(e) => return ProviderOutcome::Failed(format!("config: {e}")),
    };
    let timeout = Duration::from_millis(upstream.timeout_ms);
    let call = async {
        let response = client
            .post(upstream.url.clone())
            .header(CONTENT_TYPE, FORM_MEDIA_TYPE)
            .body(encode_request(question.as_str(), &keys))
            .timeout(timeout)
            .send()
            .await
            .map_err(|e| classify_transport_error(&e))?;
        let status = response.status();
        if !status.is_success() {
            return Err(format!("status {}", status.as_u16()));
        }
        response.bytes().await.map_err(|e| classify_transport_error(&e))
    };
    let body = match tokio::time::timeout(timeout, call).await {
        Err(_) => return ProviderOutcome::Failed("timeout".into()),
        Ok(Err(reason)) => return ProviderOutcome::Failed(reason),
        Ok(Ok(body)) => body,
    };
    match parse_response(&body, &keys) {
        Ok(answer) => ProviderOutcome::Answered(answer),
        Err(ResponseError::MissingAnswerKey(_) | ResponseError::EmptyAnswer) => ProviderOutcome::NoAnswer,
        Err(e) => ProviderOutcome::Failed(format!("contract: {}", e.code())),
    }
}

/// What the chain settled on for one question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainAnswer {
    pub answer: AnswerText,
    /// Answering provider, or `"fallback"` / `"deadline"`.
    pub provider: String,
    pub answered: bool,
}

/// Ordered providers with a fallback answer and an overall deadline.
pub struct ProviderChain {
    providers: Vec<Arc<dyn AnswerProvider>>,
    fallback: AnswerText,
    deadline: Duration,
}

impl ProviderChain {
    pub fn new(providers: Vec<Arc<dyn AnswerProvider>>, fallback: AnswerText, deadline: Duration) -> Self {
        Self {
            providers,
            fallback,
            deadline,
        }
    }

    pub fn deadline(&self) -> Duration {
        self.deadline
    }

    pub fn fallback(&self) -> &AnswerText {
        &self.fallback
    }

    fn fallback_answer(&self, provider: &str) -> ChainAnswer {
        ChainAnswer {
            answer: self.fallback.clone(),
            provider: provider.to_owned(),
            answered: false,
        }
    }

    async fn run(&self, question: &QuestionText) -> ChainAnswer {
        for provider in &self.providers {
            match provider.answer(question).await {
                ProviderOutcome::Answered(answer) => {
                    return ChainAnswer {
                        answer,
                        provider: provider.name().to_owned(),
                        answered: true,
                    }
                }
                ProviderOutcome::NoAnswer => {}
                ProviderOutcome::Failed(reason) => {
                    tracing::warn!(provider = provider.name(), %reason, "provider failed");
                }
            }
        }
        self.fallback_answer("fallback")
    }

    /// Consults providers in order; always returns within the deadline.
    pub async fn ask(&self, question: &QuestionText) -> ChainAnswer {
        match tokio::time::timeout(self.deadline, self.run(question)).await {
            Ok(answer) => answer,
            Err(_) => {
                tracing::warn!(deadline_ms = self.deadline.as_millis() as u64, "provider chain hit the deadline");
                self.fallback_answer("deadline")
            }
        }
    }
}

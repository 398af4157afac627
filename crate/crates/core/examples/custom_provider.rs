//! Plug your own answer source into the gateway's provider chain.

use std::sync::Arc;

use async_trait::async_trait;
use instant_assist::gateway::{AnswerProvider, Gateway, GatewayConfig, KnowledgeProvider, ProviderOutcome};
use instant_assist::protocol::{AnswerText, QuestionText};
use instant_assist::KnowledgeBase;

/// Answers anything that mentions a gauge with a fixed reading.
struct GaugeReadings;

#[async_trait]
impl AnswerProvider for GaugeReadings {
    fn name(&self) -> &str {
        "gauges"
    }

    async fn answer(&self, question: &QuestionText) -> ProviderOutcome {
        if question.as_str().to_lowercase().contains("gauge") {
            ProviderOutcome::Answered(AnswerText::new("Gauge 07 reads 3.1 m and is falling.").unwrap())
        } else {
            ProviderOutcome::NoAnswer
        }
    }
}

#[tokio::main]
async fn main() {
    let kb = Arc::new(KnowledgeBase::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_kb.json")).unwrap());
    let providers: Vec<Arc<dyn AnswerProvider>> = vec![Arc::new(KnowledgeProvider::new(kb.clone())), Arc::new(GaugeReadings)];
    let gateway = Gateway::with_providers(GatewayConfig::new("127.0.0.1:0"), Some(kb), providers)
        .unwrap()
        .spawn()
        .await
        .unwrap();

    let client = reqwest::Client::builder().no_proxy().build().unwrap();
    for q in ["what is flood stage", "what does gauge 07 say", "tell me a joke"] {
        let reply = client
            .post(gateway.ask_url())
            .header("content-type", "application/json")
            .body(serde_json::json!({ "question": q }).to_string())
            .send()
            .await
            .unwrap();
        println!("{q:?} -> {}", reply.text().await.unwrap());
    }
    gateway.shutdown().await.unwrap();
}

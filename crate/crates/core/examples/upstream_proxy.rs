//! Put the gateway in front of another engine: local answers first, then the upstream.

use std::path::Path;
use std::time::Duration;

use instant_assist::gateway::{Gateway, GatewayConfig, UpstreamConfig};
use instant_assist::stub::{StubBehavior, StubEngine};

async fn ask(client: &reqwest::Client, url: &url::Url, question: &str) -> String {
    let body = instant_assist::protocol::encode_request(question, &Default::default());
    let reply = client
        .post(url.clone())
        .header("content-type", "application/x-www-form-urlencoded")
        .body(body)
        .send()
        .await
        .unwrap();
    reply.text().await.unwrap()
}

#[tokio::main]
async fn main() {
    // Stands in for a remote engine that uses its own keys.
    let upstream = StubEngine::spawn(StubBehavior::answer("reply", "The upstream says: no idea, but politely.")).await.unwrap();
    let slow = StubEngine::spawn(StubBehavior::answer("reply", "late").with_delay(Duration::from_secs(5))).await.unwrap();

    let client = reqwest::Client::builder().no_proxy().build().unwrap();
    for (label, engine) in [("fast upstream", &upstream), ("slow upstream", &slow)] {
        let mut config = GatewayConfig::new("127.0.0.1:0");
        config.kb_path = Some(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_kb.json"));
        config.upstream = Some(UpstreamConfig {
            url: engine.url(),
            data_key: "text".into(),
            response_key: "reply".into(),
            timeout_ms: 800,
        });
        let gateway = Gateway::from_config(config).unwrap().spawn().await.unwrap();

        println!("-- {label}");
        for q in ["what is a flash flood", "what is the capital of peru"] {
            let started = std::time::Instant::now();
            let answer = ask(&client, &gateway.ask_url(), q).await;
            println!("{q:?} -> {answer} ({} ms)", started.elapsed().as_millis());
        }
        gateway.shutdown().await.unwrap();
    }
    println!("upstream hits: fast {}, slow {}", upstream.hits(), slow.hits());
}

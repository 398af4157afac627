//! Start the gateway on the sample knowledge base and ask it a question.
//!
//! Pass `--forever` to keep serving until Ctrl-C.

use instant_assist::gateway::{AllowedOrigins, Gateway, GatewayConfig};
use std::path::Path;

#[tokio::main]
async fn main() {
    let mut config = GatewayConfig::new("127.0.0.1:0");
    config.kb_path = Some(Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_kb.json"));
    config.allowed_origins = AllowedOrigins::List(vec!["http://localhost:8000".into()]);

    let gateway = Gateway::from_config(config).unwrap().spawn().await.unwrap();
    println!("serving on http://{}", gateway.addr());

    let client = reqwest::Client::builder().no_proxy().build().unwrap();
    let reply = client
        .post(gateway.ask_url())
        .header("content-type", "application/x-www-form-urlencoded")
        .body("question=how+high+is+the+river")
        .send()
        .await
        .unwrap();
    println!("POST /ask -> {} {}", reply.status(), reply.text().await.unwrap());

    let catalog = client.get(gateway.url("/questions")).send().await.unwrap().text().await.unwrap();
    println!("GET /questions -> {catalog}");

    if std::env::args().any(|a| a == "--forever") {
        tokio::signal::ctrl_c().await.unwrap();
    }
    gateway.shutdown().await.unwrap();
}

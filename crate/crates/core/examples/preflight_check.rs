//! Ask a gateway whether a page on a given origin may POST to it.

use std::time::Duration;

use instant_assist::conformance::preflight_check;
use instant_assist::gateway::{AllowedOrigins, Gateway, GatewayConfig};

#[tokio::main]
async fn main() {
    let mut config = GatewayConfig::new("127.0.0.1:0");
    config.kb_path = Some(concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample_kb.json").into());
    config.allowed_origins = AllowedOrigins::List(vec!["https://portal.example".into()]);
    let gateway = Gateway::from_config(config).unwrap().spawn().await.unwrap();

    for origin in ["https://portal.example", "https://elsewhere.example"] {
        let report = preflight_check(&gateway.ask_url(), origin, Duration::from_secs(2)).await;
        println!("{}", report.summary_line());
    }
    gateway.shutdown().await.unwrap();
}

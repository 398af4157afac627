//! Probe a gateway with every question in a file, four at a time.

use instant_assist::conformance::{batch_run, load_questions, Prober};
use instant_assist::gateway::{Gateway, GatewayConfig};
use instant_assist::protocol::{KeyConfig, TimeoutBudget};

#[tokio::main]
async fn main() {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let mut config = GatewayConfig::new("127.0.0.1:0");
    config.kb_path = Some(format!("{data}/sample_kb.json").into());
    let gateway = Gateway::from_config(config).unwrap().spawn().await.unwrap();

    let path = std::env::args().nth(1).unwrap_or_else(|| format!("{data}/questions.txt"));
    let questions = load_questions(&path).unwrap();
    let prober = Prober::for_endpoint(&gateway.ask_url(), KeyConfig::default(), TimeoutBudget::default());
    let summary = batch_run(&prober, &gateway.ask_url(), &questions, 4, |r| println!("{}", r.summary_line())).await;
    println!("{}", serde_json::to_string(&summary).unwrap());

    gateway.shutdown().await.unwrap();
    std::process::exit(summary.exit_code());
}

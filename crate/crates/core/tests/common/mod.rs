#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

use instant_assist::gateway::{Gateway, GatewayConfig, RunningGateway};

pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn sample_kb_path() -> PathBuf {
    data_path("sample_kb.json")
}

pub fn loopback_config() -> GatewayConfig {
    GatewayConfig::new("127.0.0.1:0")
}

pub fn sample_config() -> GatewayConfig {
    let mut config = loopback_config();
    config.kb_path = Some(sample_kb_path());
    config
}

pub async fn spawn(config: GatewayConfig) -> RunningGateway {
    Gateway::from_config(config)
        .expect("valid gateway config")
        .spawn()
        .await
        .expect("gateway binds")
}

pub fn client() -> reqwest::Client {
    reqwest::Client::builder().no_proxy().build().unwrap()
}

pub async fn post_form(url: &url::Url, body: &str) -> reqwest::Response {
    client()
        .post(url.clone())
        .header("content-type", "application/x-www-form-urlencoded")
        .body(body.to_owned())
        .send()
        .await
        .unwrap()
}

/// Runs the CLI binary off the async runtime.
pub async fn run_cli(args: Vec<String>) -> Output {
    tokio::task::spawn_blocking(move || {
        std::process::Command::new(env!("CARGO_BIN_EXE_instant-assist"))
            .args(&args)
            .env("RUST_LOG", "off")
            .output()
            .expect("binary runs")
    })
    .await
    .unwrap()
}

pub fn args(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| (*s).to_owned()).collect()
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

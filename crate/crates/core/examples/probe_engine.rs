//! Probe engines for webhook-contract conformance.
//!
//! With a URL argument, probes that engine; otherwise probes a few local stubs.

use std::time::Duration;

use instant_assist::conformance::Prober;
use instant_assist::protocol::{KeyConfig, TimeoutBudget};
use instant_assist::stub::{StubBehavior, StubEngine};

#[tokio::main]
async fn main() {
    let keys = KeyConfig::default();
    let budget = TimeoutBudget::default();

    if let Some(url) = std::env::args().nth(1) {
        let url: url::Url = url.parse().expect("engine URL");
        let report = Prober::for_endpoint(&url, keys, budget).probe(&url, "what is flood stage").await;
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        std::process::exit(report.verdict.exit_code());
    }

    let cases = [
        ("good", StubBehavior::answer("resultText", "42")),
        ("wrong key", StubBehavior::answer("answer", "42")),
        ("html", StubBehavior::raw("text/html", "<h1>hello</h1>")),
        ("number", StubBehavior::json(serde_json::json!({ "resultText": 42 }))),
        ("500", StubBehavior::answer("resultText", "oops").with_status(500)),
        ("slow", StubBehavior::answer("resultText", "42").with_delay(Duration::from_millis(2500))),
    ];
    for (label, behavior) in cases {
        let stub = StubEngine::spawn(behavior).await.unwrap();
        let prober = Prober::for_endpoint(&stub.url(), keys.clone(), budget);
        let report = prober.probe(&stub.url(), "is it going to flood").await;
        println!("{label:>10}: {}", report.summary_line());
    }
}

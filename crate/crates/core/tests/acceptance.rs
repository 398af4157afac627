//! Acceptance criteria. Each test prints one `[PASS]`/`[FAIL]` line.
//!
//! Run with `cargo test -p instant-assist --test acceptance -- --nocapture`.

mod common;

use std::cell::Cell;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use instant_assist::gateway::{AllowedOrigins, UpstreamConfig, BUILTIN_FALLBACK};
use instant_assist::knowledge::{best_match, catalog, normalize, KnowledgeBase, KnowledgeEntry};
use instant_assist::protocol::{parse_response, render_response, validate_response_contract, AnswerText, KeyConfig};
use instant_assist::stub::{StubBehavior, StubEngine};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::Value;

fn report(id: &str, title: &str, ok: bool, detail: &str) {
    let mark = if ok { "PASS" } else { "FAIL" };
    println!("[{mark}] {id} {title}: {detail}");
    assert!(ok, "{id} {title}: {detail}");
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

#[test]
fn ac1_protocol_round_trip() {
    let key = "[^\\s\\p{C}]{1,16}";
    let strategy = (key, key, "\\PC{1,64}");
    let mut runner = runner(1000);
    let checked = Cell::new(0u32);
    let result = runner.run(&strategy, |(question_key, answer_key, text)| {
        let keys = KeyConfig::new(question_key, answer_key).expect("generated keys are valid");
        let answer = AnswerText::new(text).expect("generated answers are non-empty");
        let body = render_response(&answer, &keys);
        prop_assert_eq!(parse_response(&body, &keys), Ok(answer));
        checked.set(checked.get() + 1);
        Ok(())
    });
    let detail = match &result {
        Ok(()) => format!("{} randomized (answer, keys) pairs, 0 failures", checked.get()),
        Err(e) => e.to_string(),
    };
    report("AC-1", "protocol round-trip", result.is_ok() && checked.get() == 1000, &detail);
}

/// Exhaustive-scan matcher written against the documented rules only.
mod oracle {
    pub fn tokens(text: &str) -> Vec<String> {
        let lowered = text.to_lowercase();
        let mut out = Vec::new();
        let mut current = String::new();
        for c in lowered.chars() {
            if c.is_alphanumeric() {
                current.push(c);
            } else if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
        out
    }

    fn distinct(tokens: &[String]) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for t in tokens {
            if !seen.contains(&t.as_str()) {
                seen.push(t);
            }
        }
        seen
    }

    /// Score as an exact fraction (shared, combined).
    pub fn score(a: &[String], b: &[String]) -> (usize, usize) {
        let a = distinct(a);
        let b = distinct(b);
        let shared = a.iter().filter(|t| b.contains(t)).count();
        (shared, a.len() + b.len() - shared)
    }

    fn greater(x: (usize, usize), y: (usize, usize)) -> bool {
        let as_ratio = |(n, d): (usize, usize)| if d == 0 { (0, 1) } else { (n, d) };
        let (xn, xd) = as_ratio(x);
        let (yn, yd) = as_ratio(y);
        xn * yd > yn * xd
    }

    /// Index and exact score of the winning entry, if any clears `threshold`.
    pub fn best(entries: &[Vec<Vec<String>>], query: &[String], threshold: f64) -> Option<(usize, (usize, usize))> {
        let scores: Vec<(usize, usize)> = entries
            .iter()
            .map(|patterns| {
                patterns
                    .iter()
                    .map(|p| score(query, p))
                    .fold((0, 1), |best, s| if greater(s, best) { s } else { best })
            })
            .collect();
        let mut winner: Option<usize> = None;
        for (i, s) in scores.iter().enumerate() {
            match winner {
                None => winner = Some(i),
                Some(w) if greater(*s, scores[w]) => winner = Some(i),
                _ => {}
            }
        }
        let w = winner?;
        let (n, d) = scores[w];
        let value = if d == 0 { 0.0 } else { n as f64 / d as f64 };
        (value >= threshold).then_some((w, scores[w]))
    }
}

const VOCAB: [&str; 14] = [
    "flood", "river", "stage", "what", "is", "the", "rain", "gauge", "level", "warning", "watch", "how", "high", "42",
];

fn phrase(max_tokens: usize) -> impl Strategy<Value = String> {
    let word = prop::sample::select(VOCAB.to_vec()).prop_flat_map(|w| {
        prop_oneof![Just(w.to_owned()), Just(w.to_uppercase()), Just(format!("{w}?")), Just(format!("{w},"))]
    });
    prop::collection::vec(word, 0..=max_tokens).prop_map(|words| words.join(" "))
}

fn kb_and_queries() -> impl Strategy<Value = (Vec<Vec<String>>, f64, Vec<String>)> {
    let entries = prop::collection::vec(prop::collection::vec(phrase(8), 1..4), 0..=50);
    let threshold = prop_oneof![Just(0.35), Just(0.0), Just(1.0), (0u32..=20).prop_map(|t| f64::from(t) / 20.0)];
    (entries, threshold).prop_flat_map(|(entries, threshold)| {
        let pattern_pool: Vec<String> = entries.iter().flatten().cloned().collect();
        let from_patterns = if pattern_pool.is_empty() {
            phrase(8).boxed()
        } else {
            prop::sample::select(pattern_pool).boxed()
        };
        let query = prop_oneof![phrase(8), from_patterns];
        (Just(entries), Just(threshold), prop::collection::vec(query, 20))
    })
}

#[test]
fn ac2_matcher_oracle_equivalence() {
    let mut runner = runner(500);
    let kbs = Cell::new(0u32);
    let comparisons = Cell::new(0u32);
    let matched = Cell::new(0u32);
    let result = runner.run(&kb_and_queries(), |(entry_patterns, threshold, queries)| {
        let entries: Vec<KnowledgeEntry> = entry_patterns
            .iter()
            .enumerate()
            .map(|(i, patterns)| KnowledgeEntry {
                id: format!("e{i}"),
                display_question: format!("entry {i}"),
                category: "c".into(),
                patterns: patterns.clone(),
                answer_template: "a".into(),
                listed: true,
            })
            .collect();
        let kb = KnowledgeBase::new(entries, "fallback", threshold).expect("generated KB is valid");
        let oracle_entries: Vec<Vec<Vec<String>>> = entry_patterns
            .iter()
            .map(|ps| ps.iter().map(|p| oracle::tokens(p)).collect())
            .collect();
        for query in &queries {
            let got = best_match(&kb, &normalize(query));
            let want = oracle::best(&oracle_entries, &oracle::tokens(query), threshold);
            match (&got, want) {
                (None, None) => {}
                (Some(g), Some((index, (n, d)))) => {
                    prop_assert_eq!(&g.entry_id, &format!("e{index}"), "query {:?}", query);
                    prop_assert_eq!(g.score, n as f64 / d as f64);
                    matched.set(matched.get() + 1);
                }
                _ => prop_assert!(false, "query {:?}: implementation {:?} vs oracle {:?}", query, got, want),
            }
            comparisons.set(comparisons.get() + 1);
        }
        kbs.set(kbs.get() + 1);
        Ok(())
    });
    let detail = match &result {
        Ok(()) => format!(
            "{} KBs x 20 queries = {} comparisons ({} matches), 100% agreement",
            kbs.get(),
            comparisons.get(),
            matched.get()
        ),
        Err(e) => e.to_string(),
    };
    report(
        "AC-2",
        "matcher oracle equivalence",
        result.is_ok() && kbs.get() == 500 && comparisons.get() == 10_000,
        &detail,
    );
}

#[tokio::test]
async fn ac3_contract_conformance_over_the_catalog() {
    let gw = spawn(sample_config()).await;
    let kb = KnowledgeBase::from_path(sample_kb_path()).unwrap();
    let keys = KeyConfig::default();
    let c = client();
    let mut worst = Duration::ZERO;
    let mut total = Duration::ZERO;
    let mut failures = Vec::new();
    let items = catalog(&kb);
    for item in &items {
        let started = Instant::now();
        let response = c
            .post(gw.ask_url())
            .header("content-type", "application/x-www-form-urlencoded")
            .body(instant_assist::protocol::encode_request(&item.question, &keys))
            .send()
            .await
            .unwrap();
        let status = response.status();
        let body = response.bytes().await.unwrap();
        let elapsed = started.elapsed();
        worst = worst.max(elapsed);
        total += elapsed;
        let conformant = validate_response_contract(&body, &keys).is_conformant();
        if status != 200 || !conformant || elapsed >= Duration::from_millis(2000) {
            failures.push(format!("{:?}: status {status}, conformant {conformant}, {elapsed:?}", item.question));
        }
    }
    let detail = if failures.is_empty() {
        format!(
            "{} catalog questions, all 200 + conformant; mean {:.1} ms, max {:.1} ms (< 2000 ms)",
            items.len(),
            total.as_secs_f64() * 1000.0 / items.len() as f64,
            worst.as_secs_f64() * 1000.0
        )
    } else {
        failures.join("; ")
    };
    report("AC-3", "contract conformance", failures.is_empty() && !items.is_empty(), &detail);
}

#[tokio::test]
async fn ac4_deadline_enforcement() {
    let stub = StubEngine::spawn(StubBehavior::answer("resultText", "too late").with_delay(Duration::from_secs(5)))
        .await
        .unwrap();
    let mut config = loopback_config();
    config.upstream = Some(UpstreamConfig {
        url: stub.url(),
        data_key: "question".into(),
        response_key: "resultText".into(),
        timeout_ms: 1000,
    });
    let limit = Duration::from_millis(config.deadline_ms + 300);
    let gw = spawn(config).await;
    let mut within = 0;
    let mut worst = Duration::ZERO;
    for trial in 0..10 {
        let started = Instant::now();
        let response = post_form(&gw.ask_url(), &format!("question=trial {trial}")).await;
        let status = response.status();
        let body: Value = response.json().await.unwrap();
        let elapsed = started.elapsed();
        worst = worst.max(elapsed);
        if status == 200 && body["resultText"] == BUILTIN_FALLBACK && elapsed <= limit {
            within += 1;
        }
    }
    report(
        "AC-4",
        "deadline enforcement",
        within == 10,
        &format!("{within}/10 trials answered with fallback within {limit:?}; slowest {worst:?}"),
    );
}

struct CorsCase {
    name: &'static str,
    policy: AllowedOrigins,
    origin: &'static str,
    preflight: bool,
}

async fn run_cors_case(case: &CorsCase) -> Result<(), String> {
    let mut config = sample_config();
    config.allowed_origins = case.policy.clone();
    let gw = spawn(config).await;
    let c = client();
    let response = if case.preflight {
        c.request(reqwest::Method::OPTIONS, gw.ask_url())
            .header("origin", case.origin)
            .header("access-control-request-method", "POST")
            .header("access-control-request-headers", "content-type")
            .send()
            .await
    } else {
        c.post(gw.ask_url())
            .header("origin", case.origin)
            .header("content-type", "application/x-www-form-urlencoded")
            .body("question=what is a flood")
            .send()
            .await
    }
    .map_err(|e| e.to_string())?;
    let status = response.status().as_u16();
    let header = |name: &str| response.headers().get(name).map(|v| v.to_str().unwrap().to_owned());
    let allow_origin = header("access-control-allow-origin");

    let expected_origin = match &case.policy {
        AllowedOrigins::Any => Some("*".to_owned()),
        list if list.allows(case.origin) => Some(case.origin.to_owned()),
        _ => None,
    };
    let allowed = expected_origin.is_some();
    let expected_status = match (case.preflight, allowed) {
        (true, true) => 204,
        (true, false) => 403,
        (false, _) => 200,
    };
    if status != expected_status {
        return Err(format!("status {status}, expected {expected_status}"));
    }
    if allow_origin != expected_origin {
        return Err(format!("allow-origin {allow_origin:?}, expected {expected_origin:?}"));
    }
    if allowed {
        let grants = [
            ("access-control-allow-methods", "POST, GET, OPTIONS"),
            ("access-control-allow-headers", "Content-Type"),
            ("access-control-max-age", "600"),
        ];
        for (name, value) in grants {
            if header(name).as_deref() != Some(value) {
                return Err(format!("{name} = {:?}, expected {value:?}", header(name)));
            }
        }
    } else if header("access-control-allow-methods").is_some() {
        return Err("denied origin received allow-methods".into());
    }
    Ok(())
}

#[tokio::test]
async fn ac5_cors_matrix() {
    let listed = || AllowedOrigins::List(vec!["https://a.example".into()]);
    let cases = [
        CorsCase { name: "allowed/preflight", policy: listed(), origin: "https://a.example", preflight: true },
        CorsCase { name: "allowed/POST", policy: listed(), origin: "https://a.example", preflight: false },
        CorsCase { name: "disallowed/preflight", policy: listed(), origin: "https://evil.example", preflight: true },
        CorsCase { name: "disallowed/POST", policy: listed(), origin: "https://evil.example", preflight: false },
        CorsCase { name: "wildcard/preflight", policy: AllowedOrigins::Any, origin: "https://any.example", preflight: true },
        CorsCase { name: "wildcard/POST", policy: AllowedOrigins::Any, origin: "https://any.example", preflight: false },
    ];
    let mut outcomes = Vec::new();
    let mut passed = 0;
    for case in &cases {
        match run_cors_case(case).await {
            Ok(()) => {
                passed += 1;
                outcomes.push(format!("{} ok", case.name));
            }
            Err(e) => outcomes.push(format!("{} FAILED ({e})", case.name)),
        }
    }
    report("AC-5", "CORS matrix", passed == cases.len(), &format!("{passed}/6: {}", outcomes.join(", ")));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn ac6_conformance_cli_self_test() {
    let mut config = sample_config();
    config.allowed_origins = AllowedOrigins::List(vec!["https://host.example".into()]);
    let gw = spawn(config).await;
    let engine = gw.ask_url().to_string();
    let mut failures = Vec::new();
    let mut check = |name: &str, code: Option<i32>, want: i32, reason: Option<&str>, want_reason: Option<&str>| {
        if code != Some(want) || reason != want_reason {
            failures.push(format!("{name}: exit {code:?} reason {reason:?}, expected {want} {want_reason:?}"));
        }
    };

    let out = run_cli(args(&["probe", "--engine", &engine, "--question", "what is flood stage"])).await;
    check("probe", out.status.code(), 0, None, None);
    let out = run_cli(args(&["preflight", "--engine", &engine, "--origin", "https://host.example"])).await;
    check("preflight", out.status.code(), 0, None, None);
    let out = run_cli(args(&["batch", "--engine", &engine, "--file", data_path("questions.txt").to_str().unwrap()])).await;
    check("batch", out.status.code(), 0, None, None);

    let broken = [
        ("wrong key", StubBehavior::answer("answer", "42"), "MissingAnswerKey"),
        ("non-JSON", StubBehavior::raw("text/html", "<p>42</p>"), "NotJson"),
        (
            "3 s delay",
            StubBehavior::answer("resultText", "42").with_delay(Duration::from_secs(3)),
            "Timeout",
        ),
    ];
    for (name, behavior, want) in broken {
        let stub = StubEngine::spawn(behavior).await.unwrap();
        let out = run_cli(args(&["probe", "--engine", stub.url().as_str(), "--question", "q", "--json"])).await;
        let report: Value = serde_json::from_str(stdout(&out).trim()).unwrap_or(Value::Null);
        check(name, out.status.code(), 1, report["reason"].as_str(), Some(want));
    }

    let seen: BTreeSet<&str> = ["probe", "preflight", "batch"].into_iter().collect();
    report(
        "AC-6",
        "conformance CLI self-test",
        failures.is_empty(),
        &if failures.is_empty() {
            format!("{seen:?} exit 0 against the gateway; wrong key / non-JSON / 3 s delay exit 1 with MissingAnswerKey / NotJson / Timeout")
        } else {
            failures.join("; ")
        },
    );
}

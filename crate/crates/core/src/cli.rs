//! Command-line front end: `serve`, `probe`, `preflight` and `batch`.
//!
//! Exit codes: 0 success, 1 a probe failed, 2 usage or config error.

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use url::Url;

use crate::conformance::{batch_run, load_questions, preflight_check, Prober, EXIT_PASS, EXIT_USAGE};
use crate::gateway::{Gateway, GatewayConfig, CONFIG_ENV_VAR};
use crate::protocol::{KeyConfig, TimeoutBudget, DEFAULT_ANSWER_KEY, DEFAULT_CLIENT_TIMEOUT_MS, DEFAULT_QUESTION_KEY};

#[derive(Debug, Parser)]
#[command(name = "instant-assist", version, about = "Question-answering webhook engine and conformance prober")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the reference engine gateway.
    Serve {
        /// Gateway config file (JSON).
        #[arg(long, env = CONFIG_ENV_VAR)]
        config: PathBuf,
    },
    /// Ask an engine one question and judge the reply.
    Probe {
        #[command(flatten)]
        target: ProbeTarget,
        #[arg(long)]
        question: String,
    },
    /// Check that an engine accepts cross-origin POSTs from ORIGIN.
    Preflight {
        #[arg(long)]
        engine: Url,
        #[arg(long)]
        origin: String,
        #[arg(long)]
        json: bool,
    },
    /// Probe every question in a file (one per line).
    Batch {
        #[command(flatten)]
        target: ProbeTarget,
        #[arg(long)]
        file: PathBuf,
        /// Probes in flight at once. Latencies are contended above 1.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        concurrency: u16,
    },
}

#[derive(Debug, Args)]
pub struct ProbeTarget {
    #[arg(long)]
    pub engine: Url,
    #[arg(long, default_value = DEFAULT_QUESTION_KEY)]
    pub data_key: String,
    #[arg(long, default_value = DEFAULT_ANSWER_KEY)]
    pub response_key: String,
    #[arg(long, default_value_t = DEFAULT_CLIENT_TIMEOUT_MS, value_parser = clap::value_parser!(u64).range(1..))]
    pub timeout_ms: u64,
    /// One JSON object per line instead of text.
    #[arg(long)]
    pub json: bool,
}

impl ProbeTarget {
    fn prober(&self) -> Result<Prober, String> {
        let keys = KeyConfig::new(self.data_key.clone(), self.response_key.clone()).map_err(|e| e.to_string())?;
        let budget = TimeoutBudget::from_millis(self.timeout_ms).ok_or("--timeout-ms must be positive")?;
        Ok(Prober::for_endpoint(&self.engine, keys, budget))
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("reports serialize"));
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}

async fn serve(config_path: PathBuf) -> i32 {
    let config = match GatewayConfig::from_path(&config_path) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                eprintln!("config error: {e}");
            }
            return EXIT_USAGE;
        }
    };
    let gateway = match Gateway::from_config(config) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_USAGE;
        }
    };
    let addr = gateway.config().bind_address.clone();
    let listener = match tokio::net::TcpListener::bind(&addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("cannot bind {addr}: {e}");
            return EXIT_USAGE;
        }
    };
    match listener.local_addr() {
        Ok(local) => println!("listening on http://{local}"),
        Err(_) => println!("listening on {addr}"),
    }
    match gateway.serve(listener, shutdown_signal()).await {
        Ok(()) => EXIT_PASS,
        Err(e) => {
            eprintln!("server error: {e}");
            1
        }
    }
}

/// Runs a parsed command and returns the process exit code.
pub async fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Serve { config } => serve(config).await,
        Command::Probe { target, question } => {
            let prober = match target.prober() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            };
            let report = prober.probe(&target.engine, &question).await;
            if target.json {
                print_json(&report);
            } else {
                println!("{}", report.summary_line());
            }
            report.verdict.exit_code()
        }
        Command::Preflight { engine, origin, json } => {
            let report = preflight_check(&engine, &origin, Duration::from_millis(DEFAULT_CLIENT_TIMEOUT_MS)).await;
            if json {
                print_json(&report);
            } else {
                println!("{}", report.summary_line());
            }
            report.verdict.exit_code()
        }
        Command::Batch {
            target,
            file,
            concurrency,
        } => {
            let prober = match target.prober() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            };
            let questions = match load_questions(&file) {
                Ok(q) => q,
                Err(e) => {
                    eprintln!("error: {e}");
                    eprintln!("usage: instant-assist batch --engine URL --file PATH (one question per line)");
                    return EXIT_USAGE;
                }
            };
            let json = target.json;
            let summary = batch_run(&prober, &target.engine, &questions, concurrency.into(), |report| {
                if json {
                    print_json(report);
                } else {
                    println!("{}", report.summary_line());
                }
            })
            .await;
            if json {
                print_json(&summary);
            } else {
                println!("{}/{} passed, {} failed", summary.passed, summary.total, summary.failed);
            }
            summary.exit_code()
        }
    }
}

/// Entry point for the `instant-assist` binary.
pub fn main() -> i32 {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn,instant_assist=info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("cannot start runtime: {e}");
            return EXIT_USAGE;
        }
    };
    runtime.block_on(run(cli))
}

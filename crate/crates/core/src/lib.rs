//! Question-answering webhook tooling for embeddable smart-assistant widgets.
//!
//! - [`protocol`]: the engine webhook codec and contract checks.
//! - [`knowledge`]: a token-overlap matcher over a curated knowledge base.
//! - [`gateway`]: the HTTP engine service with CORS and a deadline-bounded
//!   provider chain.
//! - [`conformance`]: probes any engine endpoint against the contract.
//! - [`stub`]: a scriptable fake engine.
//!
//! See `examples/` for one runnable program per capability.

pub mod cli;
pub mod conformance;
pub mod gateway;
pub mod knowledge;
pub mod protocol;
pub mod stub;

pub use knowledge::{answer_for, best_match, catalog, normalize, KnowledgeBase};
pub use protocol::{parse_request, parse_response, render_response, validate_response_contract, KeyConfig};

use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use thiserror::Error;
use url::Url;

use crate::protocol::{validate_key, KeyConfig, DEFAULT_CLIENT_TIMEOUT_MS, DEFAULT_QUESTION_KEY};

pub const DEFAULT_DEADLINE_MS: u64 = 1500;
pub const DEFAULT_UPSTREAM_TIMEOUT_MS: u64 = 1000;
/// Environment variable naming the config file; `--config` takes precedence.
pub const CONFIG_ENV_VAR: &str = "INSTANT_ASSIST_CONFIG";

const KNOWN_FIELDS: [&str; 7] = [
    "bind_address",
    "keys",
    "allowed_origins",
    "deadline_ms",
    "kb_path",
    "upstream",
    "log_path",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{field}: {message}")]
    Schema { field: String, message: String },
    #[error("{0}")]
    InvariantViolation(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

fn schema(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        field: field.to_owned(),
        message: message.into(),
    }
}

/// Which browser origins may call the gateway.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AllowedOrigins {
    Any,
    List(Vec<String>),
}

impl AllowedOrigins {
    pub fn allows(&self, origin: &str) -> bool {
        match self {
            AllowedOrigins::Any => true,
            AllowedOrigins::List(origins) => origins.iter().any(|o| o == origin),
        }
    }
}

impl Default for AllowedOrigins {
    fn default() -> Self {
        AllowedOrigins::List(Vec::new())
    }
}

/// A second engine consulted when the knowledge base has no answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpstreamConfig {
    pub url: Url,
    /// Key the question is sent under.
    pub data_key: String,
    /// Key the answer is read from.
    pub response_key: String,
    pub timeout_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GatewayConfig {
    pub bind_address: String,
    pub keys: KeyConfig,
    pub allowed_origins: AllowedOrigins,
    pub deadline_ms: u64,
    pub kb_path: Option<PathBuf>,
    pub upstream: Option<UpstreamConfig>,
    pub log_path: Option<PathBuf>,
}

impl GatewayConfig {
    pub fn new(bind_address: impl Into<String>) -> Self {
        Self {
            bind_address: bind_address.into(),
            keys: KeyConfig::default(),
            allowed_origins: AllowedOrigins::default(),
            deadline_ms: DEFAULT_DEADLINE_MS,
            kb_path: None,
            upstream: None,
            log_path: None,
        }
    }

    /// Reads and validates a JSON config file.
    ///
    /// Relative `kb_path`/`log_path` values are resolved against the config
    /// file's directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, Vec<ConfigError>> {
        let path = path.as_ref();
        let io_err = |message: String| {
            vec![ConfigError::Io {
                path: path.display().to_string(),
                message,
            }]
        };
        let text = std::fs::read_to_string(path).map_err(|e| io_err(e.to_string()))?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| io_err(format!("invalid JSON: {e}")))?;
        let mut config = load_config(&doc)?;
        if let Some(base) = path.parent() {
            for p in [&mut config.kb_path, &mut config.log_path].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(config)
    }

    /// Checks cross-field invariants.
    pub fn validate(&self) -> Result<(), Vec<ConfigError>> {
        let mut errors = Vec::new();
        if !is_host_port(&self.bind_address) {
            errors.push(ConfigError::InvariantViolation(format!(
                "bind_address {:?} must be host:port",
                self.bind_address
            )));
        }
        if self.deadline_ms == 0 || self.deadline_ms > DEFAULT_CLIENT_TIMEOUT_MS {
            errors.push(ConfigError::InvariantViolation(format!(
                "deadline_ms must be in 1..={DEFAULT_CLIENT_TIMEOUT_MS}, got {}",
                self.deadline_ms
            )));
        }
        if self.kb_path.is_none() && self.upstream.is_none() {
            errors.push(ConfigError::InvariantViolation(
                "at least one of kb_path or upstream must be configured".into(),
            ));
        }
        if let Some(upstream) = &self.upstream {
            if upstream.timeout_ms == 0 || upstream.timeout_ms > self.deadline_ms {
                errors.push(ConfigError::InvariantViolation(format!(
                    "upstream.timeout_ms must be in 1..={} (deadline_ms), got {}",
                    self.deadline_ms, upstream.timeout_ms
                )));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

fn is_host_port(addr: &str) -> bool {
    match addr.rsplit_once(':') {
        Some((host, port)) => !host.is_empty() && port.parse::<u16>().is_ok(),
        None => false,
    }
}

/// Top-level members this version does not understand.
pub fn unknown_fields(document: &Value) -> Vec<String> {
    document
        .as_object()
        .map(|root| {
            root.keys()
                .filter(|k| !KNOWN_FIELDS.contains(&k.as_str()))
                .cloned()
                .collect()
        })
        .unwrap_or_default()
}

fn positive_ms(root: &Map<String, Value>, field: &str, default: u64, errors: &mut Vec<ConfigError>) -> u64 {
    match root.get(field) {
        None => default,
        Some(v) => match v.as_u64() {
            Some(0) => {
                errors.push(ConfigError::InvariantViolation(format!("{field} must be positive")));
                default
            }
            Some(n) => n,
            None => {
                errors.push(schema(field, "expected a positive integer"));
                default
            }
        },
    }
}

fn optional_path(root: &Map<String, Value>, field: &str, errors: &mut Vec<ConfigError>) -> Option<PathBuf> {
    match root.get(field) {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
        Some(_) => {
            errors.push(schema(field, "expected a non-empty path string"));
            None
        }
    }
}

fn parse_origins(value: Option<&Value>, errors: &mut Vec<ConfigError>) -> AllowedOrigins {
    let origins: Vec<String> = match value {
        None => return AllowedOrigins::default(),
        Some(Value::String(s)) => vec![s.clone()],
        Some(Value::Array(items)) => {
            let strings: Option<Vec<String>> = items.iter().map(|v| v.as_str().map(str::to_owned)).collect();
            match strings {
                Some(s) => s,
                None => {
                    errors.push(schema("allowed_origins", "expected \"*\" or an array of origin strings"));
                    return AllowedOrigins::default();
                }
            }
        }
        Some(_) => {
            errors.push(schema("allowed_origins", "expected \"*\" or an array of origin strings"));
            return AllowedOrigins::default();
        }
    };
    if origins.iter().any(|o| o == "*") {
        if origins.len() > 1 {
            errors.push(ConfigError::InvariantViolation(
                "allowed_origins: \"*\" cannot be combined with explicit origins".into(),
            ));
        }
        return AllowedOrigins::Any;
    }
    for origin in &origins {
        let valid = Url::parse(origin)
            .map(|u| u.origin().is_tuple() && u.origin().ascii_serialization() == *origin)
            .unwrap_or(false);
        if !valid {
            errors.push(schema(
                "allowed_origins",
                format!("{origin:?} is not a serialized origin like \"https://example.org\""),
            ));
        }
    }
    AllowedOrigins::List(origins)
}

fn parse_upstream(value: &Value, errors: &mut Vec<ConfigError>) -> Option<UpstreamConfig> {
    let Value::Object(obj) = value else {
        errors.push(schema("upstream", "expected an object"));
        return None;
    };
    let url = match obj.get("url").and_then(Value::as_str) {
        Some(raw) => match Url::parse(raw) {
            Ok(u) if matches!(u.scheme(), "http" | "https") => Some(u),
            _ => {
                errors.push(schema("upstream.url", format!("{raw:?} is not an absolute http(s) URL")));
                None
            }
        },
        None => {
            errors.push(schema("upstream.url", "required string is missing"));
            None
        }
    };
    let mut key = |field: &str, default: &str| -> Option<String> {
        let key = match obj.get(field) {
            None => default.to_owned(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                errors.push(schema(&format!("upstream.{field}"), "expected a string"));
                return None;
            }
        };
        match validate_key(&key) {
            Ok(()) => Some(key),
            Err(e) => {
                errors.push(schema(&format!("upstream.{field}"), e.to_string()));
                None
            }
        }
    };
    let data_key = key("data_key", DEFAULT_QUESTION_KEY);
    let response_key = key("response_key", crate::protocol::DEFAULT_ANSWER_KEY);
    let timeout_ms = positive_ms(obj, "timeout_ms", DEFAULT_UPSTREAM_TIMEOUT_MS, errors);
    Some(UpstreamConfig {
        url: url?,
        data_key: data_key?,
        response_key: response_key?,
        timeout_ms,
    })
}

/// Validates a parsed config document and applies defaults.
///
/// Unknown top-level members are accepted and reported with a warning.
pub fn load_config(document: &Value) -> Result<GatewayConfig, Vec<ConfigError>> {
    let Value::Object(root) = document else {
        return Err(vec![schema("$", "expected a JSON object")]);
    };
    let mut errors = Vec::new();
    for field in unknown_fields(document) {
        tracing::warn!(field = %field, "ignoring unknown config field");
    }

    let bind_address = match root.get("bind_address") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            errors.push(schema("bind_address", "expected a host:port string"));
            String::new()
        }
        None => {
            errors.push(schema("bind_address", "required field is missing"));
            String::new()
        }
    };
    let keys = match root.get("keys") {
        None => KeyConfig::default(),
        Some(v) => serde_json::from_value::<KeyConfig>(v.clone()).unwrap_or_else(|e| {
            errors.push(schema("keys", e.to_string()));
            KeyConfig::default()
        }),
    };
    let allowed_origins = parse_origins(root.get("allowed_origins"), &mut errors);
    let deadline_ms = positive_ms(root, "deadline_ms", DEFAULT_DEADLINE_MS, &mut errors);
    let kb_path = optional_path(root, "kb_path", &mut errors);
    let log_path = optional_path(root, "log_path", &mut errors);
    let upstream = match root.get("upstream") {
        None | Some(Value::Null) => None,
        Some(v) => parse_upstream(v, &mut errors),
    };
    if !errors.is_empty() {
        return Err(errors);
    }

    let config = GatewayConfig {
        bind_address,
        keys,
        allowed_origins,
        deadline_ms,
        kb_path,
        upstream,
        log_path,
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = load_config(&json!({"bind_address": "127.0.0.1:8080", "kb_path": "kb.json"})).unwrap();
        assert_eq!(cfg.keys.question_key(), "question");
        assert_eq!(cfg.keys.answer_key(), "resultText");
        assert_eq!(cfg.deadline_ms, 1500);
        assert_eq!(cfg.allowed_origins, AllowedOrigins::List(vec![]));
        assert!(cfg.upstream.is_none());
    }

    #[test]
    fn zero_deadline_is_an_invariant_violation() {
        let errors = load_config(&json!({"bind_address": "0.0.0.0:1", "kb_path": "k", "deadline_ms": 0})).unwrap_err();
        assert!(matches!(errors.as_slice(), [ConfigError::InvariantViolation(_)]));
        let errors =
            load_config(&json!({"bind_address": "0.0.0.0:1", "kb_path": "k", "deadline_ms": 2001})).unwrap_err();
        assert!(matches!(errors.as_slice(), [ConfigError::InvariantViolation(_)]));
        assert!(load_config(&json!({"bind_address": "0.0.0.0:1", "kb_path": "k", "deadline_ms": 2000})).is_ok());
    }

    #[test]
    fn unknown_fields_are_tolerated() {
        let doc = json!({"bind_address": "localhost:9000", "kb_path": "k", "theme": "dark"});
        assert!(load_config(&doc).is_ok());
        assert_eq!(unknown_fields(&doc), ["theme"]);
    }

    #[test]
    fn needs_a_provider() {
        let errors = load_config(&json!({"bind_address": "localhost:9000"})).unwrap_err();
        assert!(errors[0].to_string().contains("kb_path or upstream"));
    }

    #[test]
    fn upstream_defaults_and_limits() {
        let cfg = load_config(&json!({
            "bind_address": "localhost:9000",
            "upstream": {"url": "http://127.0.0.1:9/ask"}
        }))
        .unwrap();
        let up = cfg.upstream.unwrap();
        assert_eq!((up.timeout_ms, up.data_key.as_str(), up.response_key.as_str()), (1000, "question", "resultText"));

        let errors = load_config(&json!({
            "bind_address": "localhost:9000",
            "deadline_ms": 800,
            "upstream": {"url": "http://127.0.0.1:9/ask"}
        }))
        .unwrap_err();
        assert!(matches!(errors.as_slice(), [ConfigError::InvariantViolation(m)] if m.contains("upstream.timeout_ms")));

        let errors = load_config(&json!({
            "bind_address": "localhost:9000",
            "upstream": {"url": "ftp://x", "response_key": "a b"}
        }))
        .unwrap_err();
        assert_eq!(errors.len(), 2);
    }

    #[test]
    fn origin_policies() {
        let base = |origins: Value| json!({"bind_address": "h:1", "kb_path": "k", "allowed_origins": origins});
        assert_eq!(load_config(&base(json!("*"))).unwrap().allowed_origins, AllowedOrigins::Any);
        assert_eq!(load_config(&base(json!(["*"]))).unwrap().allowed_origins, AllowedOrigins::Any);
        let list = load_config(&base(json!(["https://a.example"]))).unwrap().allowed_origins;
        assert!(list.allows("https://a.example"));
        assert!(!list.allows("https://evil.example"));
        assert!(load_config(&base(json!(["*", "https://a.example"]))).is_err());
        assert!(load_config(&base(json!(["https://a.example/path"]))).is_err());
        assert!(load_config(&base(json!(42))).is_err());
    }

    #[test]
    fn schema_errors_are_collected() {
        let errors = load_config(&json!({
            "bind_address": 5,
            "keys": {"question_key": ""},
            "deadline_ms": "soon",
            "kb_path": ""
        }))
        .unwrap_err();
        let fields: Vec<String> = errors
            .iter()
            .filter_map(|e| match e {
                ConfigError::Schema { field, .. } => Some(field.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(fields, ["bind_address", "keys", "deadline_ms", "kb_path"]);
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gateway.json");
        std::fs::write(&path, r#"{"bind_address": "127.0.0.1:0", "kb_path": "kb.json"}"#).unwrap();
        let cfg = GatewayConfig::from_path(&path).unwrap();
        assert_eq!(cfg.kb_path.unwrap(), dir.path().join("kb.json"));
        assert!(matches!(
            GatewayConfig::from_path(dir.path().join("missing.json")).unwrap_err().as_slice(),
            [ConfigError::Io { .. }]
        ));
    }
}

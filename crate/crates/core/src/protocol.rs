//! Engine webhook codec.
//!
//! An engine receives a `POST` whose body carries the question under a
//! configurable key (`question` by default) and replies with a JSON object
//! holding the answer under another configurable key (`resultText` by
//! default). Everything here is pure and allocation-light so it can be shared
//! by the gateway, the upstream proxy and the conformance prober.

use std::fmt;

use percent_encoding::percent_decode;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

/// Default request key carrying the question.
pub const DEFAULT_QUESTION_KEY: &str = "question";
/// Default response key carrying the answer.
pub const DEFAULT_ANSWER_KEY: &str = "resultText";
/// Default client-side budget for one round-trip, in milliseconds.
pub const DEFAULT_CLIENT_TIMEOUT_MS: u64 = 2000;

pub const FORM_MEDIA_TYPE: &str = "application/x-www-form-urlencoded";
pub const JSON_MEDIA_TYPE: &str = "application/json";
/// `Content-Type` sent with every rendered answer.
pub const RESPONSE_CONTENT_TYPE: &str = "application/json; charset=utf-8";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("key must not be empty")]
    Empty,
    #[error("key {0:?} contains whitespace or control characters")]
    InvalidCharacter(String),
}

/// Validates a single request/response parameter name.
pub fn validate_key(key: &str) -> Result<(), KeyError> {
    if key.is_empty() {
        return Err(KeyError::Empty);
    }
    if key.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(KeyError::InvalidCharacter(key.to_owned()));
    }
    Ok(())
}

/// Parameter names used on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyConfig {
    question_key: String,
    answer_key: String,
}

impl KeyConfig {
    pub fn new(question_key: impl Into<String>, answer_key: impl Into<String>) -> Result<Self, KeyError> {
        let question_key = question_key.into();
        let answer_key = answer_key.into();
        validate_key(&question_key)?;
        validate_key(&answer_key)?;
        Ok(Self {
            question_key,
            answer_key,
        })
    }

    pub fn question_key(&self) -> &str {
        &self.question_key
    }

    pub fn answer_key(&self) -> &str {
        &self.answer_key
    }
}

impl Default for KeyConfig {
    fn default() -> Self {
        Self {
            question_key: DEFAULT_QUESTION_KEY.to_owned(),
            answer_key: DEFAULT_ANSWER_KEY.to_owned(),
        }
    }
}

impl<'de> Deserialize<'de> for KeyConfig {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default = "default_question_key")]
            question_key: String,
            #[serde(default = "default_answer_key")]
            answer_key: String,
        }
        fn default_question_key() -> String {
            DEFAULT_QUESTION_KEY.to_owned()
        }
        fn default_answer_key() -> String {
            DEFAULT_ANSWER_KEY.to_owned()
        }

        let raw = Raw::deserialize(deserializer)?;
        KeyConfig::new(raw.question_key, raw.answer_key).map_err(serde::de::Error::custom)
    }
}

/// A user question, trimmed and guaranteed non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuestionText(String);

impl QuestionText {
    /// Trims `text`; returns `None` when nothing is left.
    pub fn new(text: &str) -> Option<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            None
        } else {
            Some(Self(trimmed.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for QuestionText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A natural-language answer. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnswerText(String);

impl AnswerText {
    pub fn new(text: impl Into<String>) -> Result<Self, ResponseError> {
        let text = text.into();
        if text.is_empty() {
            Err(ResponseError::EmptyAnswer)
        } else {
            Ok(Self(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for AnswerText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Total time a client waits for one answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeoutBudget {
    total_ms: u64,
}

impl TimeoutBudget {
    pub fn from_millis(total_ms: u64) -> Option<Self> {
        (total_ms > 0).then_some(Self { total_ms })
    }

    pub fn as_millis(&self) -> u64 {
        self.total_ms
    }

    pub fn as_duration(&self) -> std::time::Duration {
        std::time::Duration::from_millis(self.total_ms)
    }
}

impl Default for TimeoutBudget {
    fn default() -> Self {
        Self {
            total_ms: DEFAULT_CLIENT_TIMEOUT_MS,
        }
    }
}

/// Reasons an incoming question request is rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RequestError {
    #[error("unsupported media type {0:?}")]
    UnsupportedMediaType(String),
    #[error("malformed body: {0}")]
    MalformedBody(String),
    #[error("missing question key {0:?}")]
    MissingQuestionKey(String),
    #[error("question is empty")]
    EmptyQuestion,
}

impl RequestError {
    /// Stable machine-readable code, used in `{"error": code}` bodies.
    pub fn code(&self) -> &'static str {
        match self {
            RequestError::UnsupportedMediaType(_) => "UnsupportedMediaType",
            RequestError::MalformedBody(_) => "MalformedBody",
            RequestError::MissingQuestionKey(_) => "MissingQuestionKey",
            RequestError::EmptyQuestion => "EmptyQuestion",
        }
    }
}

/// Reasons an engine response does not honour the contract.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResponseError {
    #[error("response is not a JSON document: {0}")]
    NotJson(String),
    #[error("answer key {0:?} is missing")]
    MissingAnswerKey(String),
    #[error("answer at {key:?} is a {found}, not a string")]
    NonStringAnswer { key: String, found: &'static str },
    #[error("answer is empty")]
    EmptyAnswer,
}

impl ResponseError {
    pub fn code(&self) -> ViolationCode {
        match self {
            ResponseError::NotJson(_) => ViolationCode::NotJson,
            ResponseError::MissingAnswerKey(_) => ViolationCode::MissingAnswerKey,
            ResponseError::NonStringAnswer { .. } => ViolationCode::NonStringAnswer,
            ResponseError::EmptyAnswer => ViolationCode::EmptyAnswer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    NotJson,
    MissingAnswerKey,
    NonStringAnswer,
    EmptyAnswer,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationCode::NotJson => "NotJson",
            ViolationCode::MissingAnswerKey => "MissingAnswerKey",
            ViolationCode::NonStringAnswer => "NonStringAnswer",
            ViolationCode::EmptyAnswer => "EmptyAnswer",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

/// Outcome of checking a response body against the webhook contract.
///
/// Holds at most one violation: checks run in the order
/// `NotJson`, `MissingAnswerKey`, `NonStringAnswer`, `EmptyAnswer` and stop at
/// the first that applies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractReport {
    pub violations: Vec<Violation>,
}

impl ContractReport {
    pub fn is_conformant(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_code(&self) -> Option<ViolationCode> {
        self.violations.first().map(|v| v.code)
    }
}

/// Media type without parameters, lowercased. `"Application/JSON; charset=utf-8"` -> `"application/json"`.
fn essence(content_type: &str) -> String {
    content_type
        .split(';')
        .next()
        .unwrap_or_default()
        .trim()
        .to_ascii_lowercase()
}

fn is_json_media_type(essence: &str) -> bool {
    essence == JSON_MEDIA_TYPE || (essence.starts_with("application/") && essence.ends_with("+json"))
}

fn decode_form_component(raw: &[u8]) -> Result<String, RequestError> {
    let plus_as_space: Vec<u8> = raw.iter().map(|&b| if b == b'+' { b' ' } else { b }).collect();
    percent_decode(&plus_as_space)
        .decode_utf8()
        .map(|s| s.into_owned())
        .map_err(|e| RequestError::MalformedBody(format!("invalid UTF-8 after percent-decoding: {e}")))
}

/// Finds the first value for `key` in an `application/x-www-form-urlencoded` body.
fn form_value(body: &[u8], key: &str) -> Result<Option<String>, RequestError> {
    std::str::from_utf8(body).map_err(|e| RequestError::MalformedBody(format!("body is not UTF-8: {e}")))?;
    for pair in body.split(|&b| b == b'&').filter(|p| !p.is_empty()) {
        let (name, value) = match pair.iter().position(|&b| b == b'=') {
            Some(i) => (&pair[..i], &pair[i + 1..]),
            None => (pair, &[][..]),
        };
        if decode_form_component(name)? == key {
            return decode_form_component(value).map(Some);
        }
    }
    Ok(None)
}

fn json_value(body: &[u8], key: &str) -> Result<Option<String>, RequestError> {
    let doc: Value = serde_json::from_slice(body).map_err(|e| RequestError::MalformedBody(e.to_string()))?;
    let Value::Object(members) = doc else {
        return Err(RequestError::MalformedBody(format!(
            "expected a JSON object, found {}",
            json_kind(&doc)
        )));
    };
    match members.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(RequestError::MalformedBody(format!(
            "question at {key:?} is a {}, not a string",
            json_kind(other)
        ))),
    }
}

/// Extracts the question from a raw `POST` body.
///
/// Both form-urlencoded and JSON bodies are accepted; every member other than
/// the configured question key is ignored.
pub fn parse_request(body: &[u8], content_type: &str, keys: &KeyConfig) -> Result<QuestionText, RequestError> {
    let media = essence(content_type);
    let value = if media == FORM_MEDIA_TYPE {
        form_value(body, keys.question_key())?
    } else if is_json_media_type(&media) {
        json_value(body, keys.question_key())?
    } else {
        return Err(RequestError::UnsupportedMediaType(content_type.to_owned()));
    };
    let value = value.ok_or_else(|| RequestError::MissingQuestionKey(keys.question_key().to_owned()))?;
    QuestionText::new(&value).ok_or(RequestError::EmptyQuestion)
}

/// Encodes a question the way a browser form would, for talking to engines.
pub fn encode_request(question: &str, keys: &KeyConfig) -> String {
    url::form_urlencoded::Serializer::new(String::new())
        .append_pair(keys.question_key(), question)
        .finish()
}

/// Renders `{"<answer_key>": "<answer>"}` as compact UTF-8 JSON.
pub fn render_response(answer: &AnswerText, keys: &KeyConfig) -> Vec<u8> {
    let mut object = Map::with_capacity(1);
    object.insert(keys.answer_key().to_owned(), Value::String(answer.as_str().to_owned()));
    serde_json::to_vec(&Value::Object(object)).expect("a string map always serializes")
}

fn json_kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Reads the answer out of an engine response. Extra members are ignored.
pub fn parse_response(body: &[u8], keys: &KeyConfig) -> Result<AnswerText, ResponseError> {
    let doc: Value = serde_json::from_slice(body).map_err(|e| ResponseError::NotJson(e.to_string()))?;
    let missing = || ResponseError::MissingAnswerKey(keys.answer_key().to_owned());
    let value = match &doc {
        Value::Object(members) => members.get(keys.answer_key()).ok_or_else(missing)?,
        _ => return Err(missing()),
    };
    match value {
        Value::String(s) => AnswerText::new(s.as_str()),
        other => Err(ResponseError::NonStringAnswer {
            key: keys.answer_key().to_owned(),
            found: json_kind(other),
        }),
    }
}

/// Checks a candidate engine response and reports the first violated rule.
pub fn validate_response_contract(body: &[u8], keys: &KeyConfig) -> ContractReport {
    match parse_response(body, keys) {
        Ok(_) => ContractReport::default(),
        Err(err) => ContractReport {
            violations: vec![Violation {
                code: err.code(),
                detail: err.to_string(),
            }],
        },
    }
}

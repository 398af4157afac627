//! Reference question-answering engine backed by a curated knowledge base.
//!
//! Questions are normalized into lowercase word tokens and compared against
//! every entry pattern with Jaccard similarity over token sets. The best
//! entry wins if it clears the knowledge base threshold; earlier entries win
//! ties, so knowledge base authors control precedence by file order.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::protocol::{AnswerText, QuestionText};

pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.35;
/// Placeholder in answer templates replaced by the asked question.
pub const QUESTION_PLACEHOLDER: &str = "{{question}}";

/// Lowercase word tokens of a question or pattern.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NormalizedQuery {
    tokens: Vec<String>,
}

impl NormalizedQuery {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn token_set(&self) -> BTreeSet<&str> {
        self.tokens.iter().map(String::as_str).collect()
    }
}

impl fmt::Display for NormalizedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

/// Lowercases, turns every non-alphanumeric character into a separator and
/// splits. No stopwords are removed.
pub fn normalize(text: &str) -> NormalizedQuery {
    let lowered: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    NormalizedQuery {
        tokens: lowered.split_whitespace().map(str::to_owned).collect(),
    }
}

fn jaccard_of_sets(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// `|A ∩ B| / |A ∪ B|` over token sets; 0 when both are empty.
pub fn jaccard_score(a: &NormalizedQuery, b: &NormalizedQuery) -> f64 {
    jaccard_of_sets(&a.token_set(), &b.token_set())
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeEntry {
    pub id: String,
    pub display_question: String,
    pub category: String,
    pub patterns: Vec<String>,
    pub answer_template: String,
    pub listed: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct CompiledEntry {
    entry: KnowledgeEntry,
    patterns: Vec<NormalizedQuery>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("duplicate entry id {id:?} at entries[{index}] (first defined at entries[{first_index}])")]
    DuplicateId {
        id: String,
        first_index: usize,
        index: usize,
    },
    #[error("cannot read knowledge base {path}: {message}")]
    Io { path: String, message: String },
}

impl KbError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        KbError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Immutable, validated set of knowledge entries.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    entries: Vec<CompiledEntry>,
    fallback_answer: AnswerText,
    match_threshold: f64,
}

impl KnowledgeBase {
    /// Validates entries and precomputes normalized patterns.
    pub fn new(
        entries: Vec<KnowledgeEntry>,
        fallback_answer: impl Into<String>,
        match_threshold: f64,
    ) -> Result<Self, Vec<KbError>> {
        let mut errors = Vec::new();
        let fallback_answer = match AnswerText::new(fallback_answer) {
            Ok(a) => Some(a),
            Err(_) => {
                errors.push(KbError::schema("fallback_answer", "must be a non-empty string"));
                None
            }
        };
        if !(0.0..=1.0).contains(&match_threshold) {
            errors.push(KbError::schema("match_threshold", "must be a number in [0, 1]"));
        }
        for (index, entry) in entries.iter().enumerate() {
            let path = format!("entries[{index}]");
            let required = [
                ("id", &entry.id),
                ("question", &entry.display_question),
                ("category", &entry.category),
                ("answer", &entry.answer_template),
            ];
            for (field, value) in required {
                if value.is_empty() {
                    errors.push(KbError::schema(format!("{path}.{field}"), "must be a non-empty string"));
                }
            }
            if entry.patterns.is_empty() {
                errors.push(KbError::schema(format!("{path}.patterns"), "must contain at least one pattern"));
            }
            if let Some(first_index) = entries[..index].iter().position(|e| e.id == entry.id) {
                errors.push(KbError::DuplicateId {
                    id: entry.id.clone(),
                    first_index,
                    index,
                });
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }

        let entries = entries
            .into_iter()
            .map(|entry| CompiledEntry {
                patterns: entry.patterns.iter().map(|p| normalize(p)).collect(),
                entry,
            })
            .collect();
        Ok(Self {
            entries,
            fallback_answer: fallback_answer.expect("checked above"),
            match_threshold,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, Vec<KbError>> {
        let path = path.as_ref();
        let io_err = |message: String| {
            vec![KbError::Io {
                path: path.display().to_string(),
                message,
            }]
        };
        let text = std::fs::read_to_string(path).map_err(|e| io_err(e.to_string()))?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| io_err(format!("invalid JSON: {e}")))?;
        load_knowledge_base(&doc)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl ExactSizeIterator<Item = &KnowledgeEntry> {
        self.entries.iter().map(|c| &c.entry)
    }

    pub fn entry(&self, id: &str) -> Option<&KnowledgeEntry> {
        self.entries().find(|e| e.id == id)
    }

    pub fn fallback_answer(&self) -> &AnswerText {
        &self.fallback_answer
    }

    pub fn match_threshold(&self) -> f64 {
        self.match_threshold
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchResult {
    pub entry_id: String,
    pub score: f64,
}

/// Best-scoring entry for `query`, if it reaches the threshold.
///
/// An entry scores the maximum Jaccard similarity over its patterns.
pub fn best_match(kb: &KnowledgeBase, query: &NormalizedQuery) -> Option<MatchResult> {
    let query_set = query.token_set();
    let mut best: Option<(usize, f64)> = None;
    for (index, compiled) in kb.entries.iter().enumerate() {
        let score = compiled
            .patterns
            .iter()
            .map(|p| jaccard_of_sets(&query_set, &p.token_set()))
            .fold(0.0_f64, f64::max);
        // Strictly greater: earlier entries keep ties.
        if best.is_none_or(|(_, top)| score > top) {
            best = Some((index, score));
        }
    }
    let (index, score) = best?;
    (score >= kb.match_threshold).then(|| MatchResult {
        entry_id: kb.entries[index].entry.id.clone(),
        score,
    })
}

fn render_template(template: &str, question: &QuestionText) -> AnswerText {
    AnswerText::new(template.replace(QUESTION_PLACEHOLDER, question.as_str()))
        .expect("non-empty template with non-empty substitution")
}

/// Answer from the matching entry, without falling back.
pub fn matched_answer(kb: &KnowledgeBase, question: &QuestionText) -> Option<(MatchResult, AnswerText)> {
    let found = best_match(kb, &normalize(question.as_str()))?;
    let entry = kb.entry(&found.entry_id).expect("match refers to a known entry");
    let answer = render_template(&entry.answer_template, question);
    Some((found, answer))
}

/// Matching entry's answer, or the knowledge base fallback.
pub fn answer_for(kb: &KnowledgeBase, question: &QuestionText) -> AnswerText {
    matched_answer(kb, question)
        .map(|(_, answer)| answer)
        .unwrap_or_else(|| kb.fallback_answer.clone())
}

/// One `(question, category)` pair for a question-list UI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogItem {
    pub question: String,
    pub category: String,
}

/// Listed entries grouped by category, groups in order of first appearance.
pub fn catalog(kb: &KnowledgeBase) -> Vec<CatalogItem> {
    let listed: Vec<&KnowledgeEntry> = kb.entries().filter(|e| e.listed).collect();
    let mut categories: Vec<&str> = Vec::new();
    for entry in &listed {
        if !categories.contains(&entry.category.as_str()) {
            categories.push(&entry.category);
        }
    }
    categories
        .into_iter()
        .flat_map(|category| {
            listed
                .iter()
                .filter(move |e| e.category == category)
                .map(|e| CatalogItem {
                    question: e.display_question.clone(),
                    category: e.category.clone(),
                })
        })
        .collect()
}

struct FieldReader<'a> {
    object: &'a Map<String, Value>,
    path: String,
    errors: &'a mut Vec<KbError>,
}

impl FieldReader<'_> {
    fn field_path(&self, field: &str) -> String {
        if self.path.is_empty() {
            field.to_owned()
        } else {
            format!("{}.{field}", self.path)
        }
    }

    fn missing(&mut self, field: &str) {
        let path = self.field_path(field);
        self.errors.push(KbError::schema(path, "required field is missing"));
    }

    fn ill_typed(&mut self, field: &str, expected: &str) {
        let path = self.field_path(field);
        self.errors.push(KbError::schema(path, format!("expected {expected}")));
    }

    fn string(&mut self, field: &str) -> Option<String> {
        match self.object.get(field) {
            None => {
                self.missing(field);
                None
            }
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            Some(_) => {
                self.ill_typed(field, "a non-empty string");
                None
            }
        }
    }

    fn patterns(&mut self, field: &str) -> Option<Vec<String>> {
        match self.object.get(field) {
            None => {
                self.missing(field);
                None
            }
            Some(Value::Array(items)) if !items.is_empty() => {
                let strings: Option<Vec<String>> = items.iter().map(|v| v.as_str().map(str::to_owned)).collect();
                if strings.is_none() {
                    self.ill_typed(field, "an array of strings");
                }
                strings
            }
            Some(_) => {
                self.ill_typed(field, "a non-empty array of strings");
                None
            }
        }
    }

    fn optional_bool(&mut self, field: &str, default: bool) -> Option<bool> {
        match self.object.get(field) {
            None => Some(default),
            Some(Value::Bool(b)) => Some(*b),
            Some(_) => {
                self.ill_typed(field, "a boolean");
                None
            }
        }
    }
}

/// Validates a parsed knowledge base document, collecting every schema error.
///
/// ```json
/// { "fallback_answer": "...", "match_threshold": 0.35,
///   "entries": [ { "id": "...", "question": "...", "category": "...",
///                  "patterns": ["..."], "answer": "...", "listed": true } ] }
/// ```
pub fn load_knowledge_base(document: &Value) -> Result<KnowledgeBase, Vec<KbError>> {
    let mut errors = Vec::new();
    let Value::Object(root) = document else {
        return Err(vec![KbError::schema("$", "expected a JSON object")]);
    };
    let mut top = FieldReader {
        object: root,
        path: String::new(),
        errors: &mut errors,
    };
    let fallback = top.string("fallback_answer");
    let threshold = match root.get("match_threshold") {
        None => Some(DEFAULT_MATCH_THRESHOLD),
        Some(Value::Number(n)) => match n.as_f64() {
            Some(t) if (0.0..=1.0).contains(&t) => Some(t),
            _ => {
                top.ill_typed("match_threshold", "a number in [0, 1]");
                None
            }
        },
        Some(_) => {
            top.ill_typed("match_threshold", "a number in [0, 1]");
            None
        }
    };

    let mut entries = Vec::new();
    match root.get("entries") {
        None => top.missing("entries"),
        Some(Value::Array(items)) => {
            for (index, item) in items.iter().enumerate() {
                let path = format!("entries[{index}]");
                let Value::Object(object) = item else {
                    errors.push(KbError::schema(path, "expected an object"));
                    continue;
                };
                let mut reader = FieldReader {
                    object,
                    path,
                    errors: &mut errors,
                };
                let id = reader.string("id");
                let question = reader.string("question");
                let category = reader.string("category");
                let patterns = reader.patterns("patterns");
                let answer = reader.string("answer");
                let listed = reader.optional_bool("listed", true);
                if let (Some(id), Some(display_question), Some(category), Some(patterns), Some(answer_template), Some(listed)) =
                    (id, question, category, patterns, answer, listed)
                {
                    entries.push((
                        index,
                        KnowledgeEntry {
                            id,
                            display_question,
                            category,
                            patterns,
                            answer_template,
                            listed,
                        },
                    ));
                }
            }
        }
        Some(_) => top.ill_typed("entries", "an array"),
    }

    // Duplicate ids are reported against file positions, including entries
    // that failed other checks.
    if let Some(Value::Array(items)) = root.get("entries") {
        let ids: Vec<Option<&str>> = items.iter().map(|i| i.get("id").and_then(Value::as_str)).collect();
        for (index, id) in ids.iter().enumerate() {
            let Some(id) = id else { continue };
            if let Some(first_index) = ids[..index].iter().position(|other| other == &Some(*id)) {
                errors.push(KbError::DuplicateId {
                    id: (*id).to_owned(),
                    first_index,
                    index,
                });
            }
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    KnowledgeBase::new(
        entries.into_iter().map(|(_, e)| e).collect(),
        fallback.expect("checked above"),
        threshold.expect("checked above"),
    )
}

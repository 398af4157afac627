//! Load the sample knowledge base, list its catalog and match a few questions.
//!
//! `cargo run --example match_questions -- "when is it a flood?"`

use std::path::Path;

use instant_assist::knowledge::{best_match, catalog, normalize, KnowledgeBase};
use instant_assist::protocol::QuestionText;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/sample_kb.json");
    let kb = KnowledgeBase::from_path(&path).unwrap_or_else(|errors| {
        for e in errors {
            eprintln!("{e}");
        }
        std::process::exit(2);
    });

    println!("{} entries, threshold {}", kb.len(), kb.match_threshold());
    for item in catalog(&kb) {
        println!("  [{}] {}", item.category, item.question);
    }

    let mut questions: Vec<String> = std::env::args().skip(1).collect();
    if questions.is_empty() {
        questions = vec![
            "What's the FLOOD STAGE?".into(),
            "should i drive through water".into(),
            "please repeat my question".into(),
            "who won the match".into(),
        ];
    }
    for q in &questions {
        let Some(question) = QuestionText::new(q) else { continue };
        let normalized = normalize(q);
        match best_match(&kb, &normalized) {
            Some(m) => println!("{q:?} -> {} (score {:.2})", m.entry_id, m.score),
            None => println!("{q:?} -> no match"),
        }
        println!("    {}", instant_assist::answer_for(&kb, &question).as_str());
    }
}

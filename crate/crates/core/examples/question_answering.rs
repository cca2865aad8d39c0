//! Answers the fixture questions against two stores and their union.
//!
//! `cargo run --example question_answering`

use std::path::Path;

use encyclogen::qa::{load_questions, report, Okapi};
use encyclogen::store::{EncyclopediaStore, KnowledgeBase};
use encyclogen::tokenizer::UnicodeTokenizer;

fn main() -> encyclogen::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let questions = load_questions(&dir.join("questions.jsonl"))?;
    let mut resources = Vec::new();
    for name in ["encyclopedia", "dictionary"] {
        let store = EncyclopediaStore::new(dir.join(format!("{name}.jsonl")));
        resources.push((name.to_string(), KnowledgeBase::from_stores(&[store])?));
    }
    let table = report(
        &questions,
        &resources,
        None,
        7,
        Okapi::default(),
        &UnicodeTokenizer,
    )?;
    print!("{}", table.render());
    Ok(())
}

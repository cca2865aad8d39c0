//! Trains the trigram description model and compares description-like and
//! non-description text.
//!
//! `cargo run --example description_model`

use std::path::Path;

use encyclogen::langmodel::{ReferenceCorpus, TrigramModel};
use encyclogen::tokenizer::UnicodeTokenizer;

fn main() -> encyclogen::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference.jsonl");
    let model = TrigramModel::train(&ReferenceCorpus::load(&path)?, &UnicodeTokenizer)?;
    println!(
        "{} symbols, {} trigram types",
        model.vocab_size(),
        model.trigram_table().len()
    );

    for text in [
        "A router is a device that connects two networks.",
        "A router is a tool used for cutting wood.",
        "Click here to buy cheap routers today!",
        "Welcome to my home page.",
    ] {
        let score = model.score_description(text, "router", &UnicodeTokenizer)?;
        println!("{score:>8.4}  {text}");
    }
    Ok(())
}

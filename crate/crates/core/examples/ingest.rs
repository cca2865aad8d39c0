//! Loads the pages of a term from the fixture corpus.
//!
//! `cargo run --example ingest -- [term]`

use std::path::Path;

use encyclogen::corpus::{ingest, IngestOptions};

fn main() -> encyclogen::Result<()> {
    let term = std::env::args().nth(1).unwrap_or_else(|| "router".into());
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus.jsonl");
    let report = ingest(&corpus, &term, &IngestOptions::default())?;
    println!("{} pages mention `{term}`", report.pages.len());
    for page in &report.pages {
        println!("  #{:<4} {}", page.rank, page.url);
    }
    println!("{} pages without the term", report.dropped);
    for e in &report.errors {
        println!("skipped: {e}");
    }
    Ok(())
}

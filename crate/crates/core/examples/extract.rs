//! Cuts candidate descriptions out of pages, showing which layout rule fired.
//!
//! `cargo run --example extract -- [term]`

use std::path::Path;

use encyclogen::corpus::{ingest, IngestOptions, Page};
use encyclogen::extractor::{extract_all_with_stats, ExtractorConfig, PatternSet};
use encyclogen::tokenizer::UnicodeTokenizer;

fn main() -> encyclogen::Result<()> {
    let term = std::env::args().nth(1).unwrap_or_else(|| "router".into());
    let patterns = PatternSet::default_english();
    let config = ExtractorConfig::default();

    // One page where every rule could apply.
    let page = Page::new(
        "inline",
        1,
        "<dl><dt>router</dt><dd>Forwards packets between networks.</dd></dl>\
         <p>A router is a box with blinking lights.</p>",
    );
    let (found, _) =
        extract_all_with_stats(&[page], "router", &patterns, &config, &UnicodeTokenizer);
    for c in &found {
        println!("{:?} via {:?}: {}", c.rule, c.trigger, c.text);
    }

    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus.jsonl");
    let pages = ingest(&corpus, &term, &IngestOptions::default())?.pages;
    let (candidates, stats) =
        extract_all_with_stats(&pages, &term, &patterns, &config, &UnicodeTokenizer);
    println!(
        "\n{} candidates for `{term}` ({} regions, {} duplicates)",
        candidates.len(),
        stats.regions,
        stats.duplicates
    );
    for c in &candidates {
        println!("  #{:<4} {:?}: {}", c.source_rank, c.rule, c.text);
    }
    Ok(())
}

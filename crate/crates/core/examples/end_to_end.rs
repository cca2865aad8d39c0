//! Builds a small encyclopedia from the fixture corpus, prints it with its
//! statistics, and queries it.
//!
//! `cargo run --example end_to_end -- [out.jsonl]`

use std::path::{Path, PathBuf};

use encyclogen::config::PipelineConfig;
use encyclogen::pipeline::Pipeline;
use encyclogen::store::{stats, EncyclopediaStore};

fn main() -> encyclogen::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("encyclogen-example.jsonl"));

    let mut config = PipelineConfig::default();
    config.paths.corpus = Some(dir.join("corpus.jsonl"));
    config.paths.lexicon = Some(dir.join("lexicon.tsv"));
    config.paths.reference = Some(dir.join("reference.jsonl"));
    let pipeline = Pipeline::from_config(&config)?;

    let store = EncyclopediaStore::new(&out);
    let corpus = dir.join("corpus.jsonl");
    let mut entries = Vec::new();
    for term in ["router", "modem", "firewall", "switch", "gateway"] {
        let run = pipeline.run_term(&corpus, term)?;
        println!(
            "{term}: {} pages, {} candidates, {:?}",
            run.counts.pages, run.counts.candidates, run.organized.status
        );
        entries.push(run.organized.entry);
    }
    store.save_entries(&entries)?;

    print!("\n{}", stats(&store.entries()?).render());
    print!(
        "\n{}",
        encyclogen::cli::render_entry(&store.load_entry("router")?)
    );
    println!("\nstore written to {}", out.display());
    Ok(())
}

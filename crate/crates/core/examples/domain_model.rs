//! Trains the domain model on the fixture lexicon and scores a few texts.
//!
//! `cargo run --example domain_model`

use std::path::Path;

use encyclogen::domainmodel::{DomainLexicon, DomainModel};
use encyclogen::tokenizer::UnicodeTokenizer;

fn main() -> encyclogen::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let lexicon = DomainLexicon::load(&dir.join("lexicon.tsv"))?;
    let model = DomainModel::train(&lexicon, &UnicodeTokenizer)?;
    println!("domains: {:?}", model.domains());

    for text in [
        "A device that forwards data packets between networks.",
        "A power tool for cutting grooves in a wood board.",
        "The interest rate on a bank account.",
        "Completely unrelated words here.",
    ] {
        let posterior = model.domain_posterior(text, &UnicodeTokenizer);
        if posterior.unscorable {
            println!("{text}\n  unscorable");
            continue;
        }
        println!("{text}");
        for (domain, score) in &posterior.scores {
            println!("  {domain:<12} {score:.4}");
        }
    }
    Ok(())
}

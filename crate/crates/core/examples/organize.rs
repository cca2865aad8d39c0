//! Organizes hand-written candidates of an ambiguous term into domains.
//!
//! `cargo run --example organize`

use std::path::Path;

use encyclogen::domainmodel::{DomainLexicon, DomainModel};
use encyclogen::extractor::{Candidate, Rule, Trigger};
use encyclogen::langmodel::{ReferenceCorpus, TrigramModel};
use encyclogen::organizer::{organize, OrganizeParams};
use encyclogen::tokenizer::UnicodeTokenizer;

fn main() -> encyclogen::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let tok = UnicodeTokenizer;
    let dm = DomainModel::train(&DomainLexicon::load(&dir.join("lexicon.tsv"))?, &tok)?;
    let lm = TrigramModel::train(&ReferenceCorpus::load(&dir.join("reference.jsonl"))?, &tok)?;

    let texts = [
        "A router is a network device that forwards data packets.",
        "A router is a power tool that cuts grooves in wood.",
        "A router connects a local area network to the internet.",
        "Buy a router online.",
        "Our shop opens at nine.",
    ];
    let candidates: Vec<Candidate> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| Candidate {
            term: "router".into(),
            text: t.to_string(),
            source_url: format!("http://example.org/{i}"),
            source_rank: i as u32 + 1,
            rule: Rule::Paragraph,
            trigger: Trigger::Pattern,
        })
        .collect();

    let out = organize(
        "router",
        &candidates,
        &dm,
        &lm,
        &tok,
        &OrganizeParams::default(),
    );
    for group in &out.entry.domains {
        println!("[{}]", group.domain);
        for d in &group.descriptions {
            println!("  {:>8.4}  {}", d.log_combined, d.text);
        }
    }
    println!("\ndropped:");
    for a in &out.audit.dropped {
        println!("  {:?} {:?} #{}", a.reason, a.domain, a.rank);
    }
    Ok(())
}

//! The per-term chain: ingest, extract, organize.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::corpus::{ingest, IngestOptions, Page};
use crate::domainmodel::{DomainLexicon, DomainModel};
use crate::error::Result;
use crate::extractor::{extract_all_with_stats, ExtractionStats, ExtractorConfig, PatternSet};
use crate::langmodel::{ReferenceCorpus, TrigramModel};
use crate::organizer::{organize, OrganizeParams, Organized};
use crate::tokenizer::Tokenizer;

/// Models and settings shared by every term of a run.
pub struct Pipeline {
    pub tokenizer: Arc<dyn Tokenizer>,
    pub patterns: PatternSet,
    pub extractor: ExtractorConfig,
    pub ingest: IngestOptions,
    pub domain_model: DomainModel,
    pub description_model: TrigramModel,
    pub params: OrganizeParams,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TermCounts {
    pub pages: usize,
    pub pages_without_term: usize,
    pub page_errors: usize,
    pub regions: usize,
    pub empty_regions: usize,
    pub duplicates: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone)]
pub struct TermRun {
    pub organized: Organized,
    pub counts: TermCounts,
}

/// The configured tokenizer, patterns (bundled set when unset) and models.
/// A model path, when set, is loaded; otherwise the model is trained from
/// the lexicon or reference corpus.
pub fn load_models(
    config: &PipelineConfig,
    tokenizer: &dyn Tokenizer,
) -> Result<(DomainModel, TrigramModel)> {
    let paths = &config.paths;
    let dm = match &paths.domain_model {
        Some(p) => DomainModel::load(p, tokenizer)?,
        None => {
            let lex = DomainLexicon::load(config.require("lexicon", &paths.lexicon)?)?;
            DomainModel::train(&lex, tokenizer)?
        }
    };
    let lm = match &paths.description_model {
        Some(p) => TrigramModel::load(p, tokenizer)?,
        None => {
            let refs = ReferenceCorpus::load(config.require("reference", &paths.reference)?)?;
            TrigramModel::train(&refs, tokenizer)?
        }
    };
    Ok((dm, lm))
}

pub fn load_patterns(config: &PipelineConfig) -> Result<PatternSet> {
    match &config.paths.patterns {
        Some(p) => PatternSet::load(p),
        None => Ok(PatternSet::default_english()),
    }
}

impl Pipeline {
    pub fn from_config(config: &PipelineConfig) -> Result<Self> {
        config.validate()?;
        let tokenizer = config.tokenizer_spec()?.build()?;
        let (domain_model, description_model) = load_models(config, tokenizer.as_ref())?;
        Ok(Pipeline {
            patterns: load_patterns(config)?,
            extractor: ExtractorConfig {
                n_sentences: config.n_sentences,
                ..ExtractorConfig::default()
            },
            ingest: IngestOptions {
                max_pages: config.max_pages,
                ..IngestOptions::default()
            },
            domain_model,
            description_model,
            params: config.organize_params(),
            tokenizer,
        })
    }

    /// Extracts and organizes descriptions from already ingested pages.
    pub fn run_pages(&self, term: &str, pages: &[Page]) -> TermRun {
        let tok = self.tokenizer.as_ref();
        let (candidates, stats) =
            extract_all_with_stats(pages, term, &self.patterns, &self.extractor, tok);
        let organized = organize(
            term,
            &candidates,
            &self.domain_model,
            &self.description_model,
            tok,
            &self.params,
        );
        let ExtractionStats {
            regions,
            empty_regions,
            duplicates,
        } = stats;
        TermRun {
            organized,
            counts: TermCounts {
                pages: pages.len(),
                regions,
                empty_regions,
                duplicates,
                candidates: candidates.len(),
                ..TermCounts::default()
            },
        }
    }

    pub fn run_term(&self, corpus: &Path, term: &str) -> Result<TermRun> {
        let report = ingest(corpus, term, &self.ingest)?;
        let mut run = self.run_pages(term, &report.pages);
        run.counts.pages_without_term = report.dropped;
        run.counts.page_errors = report.errors.len();
        Ok(run)
    }
}

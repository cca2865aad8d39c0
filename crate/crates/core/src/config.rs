//! Pipeline configuration.
//!
//! Read from a TOML file; the command line layers environment variables
//! (`ENCYCLOGEN_*`) and then flags on top.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::DEFAULT_MAX_PAGES;
use crate::error::{Error, Result};
use crate::extractor::DEFAULT_N_SENTENCES;
use crate::organizer::{OrganizeParams, DEFAULT_THRESHOLD, DEFAULT_TOP_K};
use crate::qa::Okapi;
use crate::tokenizer::TokenizerSpec;

pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Page corpus file or directory of `*.jsonl` files.
    pub corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub domain_model: Option<PathBuf>,
    pub description_model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub max_pages: usize,
    pub n_sentences: usize,
    pub threshold: f64,
    pub top_k: usize,
    pub k1: f64,
    pub b: f64,
    pub seed: u64,
    pub tokenizer: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let okapi = Okapi::default();
        PipelineConfig {
            paths: Paths::default(),
            max_pages: DEFAULT_MAX_PAGES,
            n_sentences: DEFAULT_N_SENTENCES,
            threshold: DEFAULT_THRESHOLD,
            top_k: DEFAULT_TOP_K,
            k1: okapi.k1,
            b: okapi.b,
            seed: DEFAULT_SEED,
            tokenizer: TokenizerSpec::UnicodeDefault.to_string(),
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn tokenizer_spec(&self) -> Result<TokenizerSpec> {
        self.tokenizer.parse()
    }

    pub fn organize_params(&self) -> OrganizeParams {
        OrganizeParams {
            threshold: self.threshold,
            top_k: self.top_k,
        }
    }

    pub fn okapi(&self) -> Okapi {
        Okapi {
            k1: self.k1,
            b: self.b,
        }
    }

    /// Checks parameter ranges and that every configured input path exists.
    /// Output paths (store, model files) may be absent.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.max_pages == 0 {
            return bad("max_pages must be >= 1".into());
        }
        if self.n_sentences == 0 {
            return bad("n_sentences must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} outside [0, 1]", self.threshold));
        }
        if self.top_k == 0 {
            return bad("top_k must be >= 1".into());
        }
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return bad(format!("k1 {} must be finite and >= 0", self.k1));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return bad(format!("b {} outside [0, 1]", self.b));
        }
        self.tokenizer_spec()?;
        let inputs = [
            ("corpus", &self.paths.corpus),
            ("lexicon", &self.paths.lexicon),
            ("reference", &self.paths.reference),
            ("patterns", &self.paths.patterns),
        ];
        for (name, path) in inputs {
            if let Some(p) = path {
                if !p.exists() {
                    return bad(format!("{name} path {} does not exist", p.display()));
                }
            }
        }
        Ok(())
    }

    /// The named path, or a configuration error naming the missing key.
    pub fn require<'a>(&self, name: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| Error::Config(format!("no {name} path configured")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = PipelineConfig::default();
        assert_eq!(c.max_pages, 1000);
        assert_eq!(c.n_sentences, 3);
        assert_eq!(c.threshold, 0.05);
        assert_eq!(c.top_k, 3);
        assert_eq!((c.k1, c.b), (1.2, 0.75));
        assert_eq!(c.tokenizer, "unicode-default");
        c.validate().unwrap();
    }

    #[test]
    fn partial_file_keeps_other_defaults() {
        let c = PipelineConfig::parse(
            "threshold = 0.1\ntokenizer = \"external:cat\"\n[paths]\nstore = \"out.jsonl\"\n",
        )
        .unwrap();
        assert_eq!(c.threshold, 0.1);
        assert_eq!(c.top_k, 3);
        assert_eq!(c.paths.store.as_deref(), Some(Path::new("out.jsonl")));
        assert!(matches!(
            c.tokenizer_spec().unwrap(),
            TokenizerSpec::External(_)
        ));
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = PipelineConfig::default();
        c.paths.lexicon = Some("lex.tsv".into());
        assert_eq!(PipelineConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_ranges() {
        assert!(PipelineConfig::parse("treshold = 0.1").is_err());
        for text in [
            "threshold = 1.5",
            "top_k = 0",
            "b = 2.0",
            "max_pages = 0",
            "tokenizer = \"nope\"",
        ] {
            let c = PipelineConfig::parse(text).unwrap();
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn missing_input_path_fails_validation() {
        let mut c = PipelineConfig::default();
        c.paths.corpus = Some("/nonexistent/corpus.jsonl".into());
        assert!(c.validate().is_err());
        c.paths.corpus = None;
        c.paths.store = Some("/nonexistent/store.jsonl".into());
        c.validate().unwrap();
    }
}

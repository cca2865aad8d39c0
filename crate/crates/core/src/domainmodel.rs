//! Domain model: how strongly a description belongs to each technical field.
//!
//! Word statistics come from a lexicon whose entries are tagged with a domain.
//! For a description `d` and domain `c`,
//!
//! ```text
//! score(c) = prior · Σ_t P(t|c) · P(t|d) / P(t)
//! ```
//!
//! where `P(t|c)` and `P(t)` are relative frequencies of word `t` in the
//! entries of `c` and of all domains, `P(t|d)` is the relative frequency of
//! `t` among the description's tokens, and `prior` stands in for the constant
//! `P(c)`. Words unknown to the lexicon contribute nothing.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::{check_fingerprint, Tokenizer};

pub const DEFAULT_PRIOR: f64 = 1.0;

const MODEL_FORMAT: &str = "encyclogen.domain-model";
const MODEL_VERSION: u32 = 1;

/// Domain-tagged lexicon entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainLexicon {
    domains: Vec<String>,
    entries: Vec<(String, String)>,
}

impl DomainLexicon {
    /// Every entry's domain must be listed, and every listed domain must have
    /// at least one entry.
    pub fn new(domains: Vec<String>, entries: Vec<(String, String)>) -> Result<Self> {
        let declared: BTreeSet<&str> = domains.iter().map(String::as_str).collect();
        if declared.len() != domains.len() {
            return Err(Error::Lexicon("duplicate domain names".into()));
        }
        if let Some((term, domain)) = entries.iter().find(|(_, d)| !declared.contains(d.as_str())) {
            return Err(Error::Lexicon(format!(
                "entry `{term}` uses undeclared domain `{domain}`"
            )));
        }
        let used: BTreeSet<&str> = entries.iter().map(|(_, d)| d.as_str()).collect();
        if let Some(missing) = declared.difference(&used).next() {
            return Err(Error::Lexicon(format!("domain `{missing}` has no entries")));
        }
        Ok(DomainLexicon { domains, entries })
    }

    /// Builds a lexicon whose domains are the distinct entry domains, sorted.
    pub fn from_entries(entries: Vec<(String, String)>) -> Result<Self> {
        let domains: BTreeSet<String> = entries.iter().map(|(_, d)| d.clone()).collect();
        DomainLexicon::new(domains.into_iter().collect(), entries)
    }

    /// Parses `term<TAB>domain` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next(), parts.next()) {
                (Some(term), Some(domain), None)
                    if !term.trim().is_empty() && !domain.trim().is_empty() =>
                {
                    entries.push((term.trim().to_string(), domain.trim().to_string()));
                }
                _ => {
                    return Err(Error::Lexicon(format!(
                        "line {}: expected `term<TAB>domain`",
                        idx + 1
                    )))
                }
            }
        }
        DomainLexicon::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DomainLexicon::parse(&text)
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

/// Word frequency tables per domain and overall.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainModel {
    domains: Vec<String>,
    /// count(t, c), indexed like `domains`.
    word_domain: BTreeMap<String, Vec<u64>>,
    /// count(t) = Σ_c count(t, c).
    word: BTreeMap<String, u64>,
    domain_totals: Vec<u64>,
    total: u64,
    pub prior_constant: f64,
    tokenizer: String,
}

/// Per-domain scores for one description.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPosterior {
    /// Scores in the model's domain order.
    pub scores: Vec<(String, f64)>,
    /// No token of the description is known to the model; all scores are 0.
    pub unscorable: bool,
}

impl DomainPosterior {
    pub fn score(&self, domain: &str) -> Option<f64> {
        self.scores
            .iter()
            .find(|(d, _)| d == domain)
            .map(|(_, s)| *s)
    }

    /// Highest-scoring domain; the earliest domain wins ties.
    pub fn argmax(&self) -> Option<&str> {
        if self.unscorable {
            return None;
        }
        self.scores
            .iter()
            .fold(None::<&(String, f64)>, |best, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
            .map(|(d, _)| d.as_str())
    }
}

impl DomainModel {
    pub fn train(lexicon: &DomainLexicon, tokenizer: &dyn Tokenizer) -> Result<Self> {
        if lexicon.entries.is_empty() {
            return Err(Error::EmptyTraining("lexicon"));
        }
        let index: BTreeMap<&str, usize> = lexicon
            .domains
            .iter()
            .enumerate()
            .map(|(i, d)| (d.as_str(), i))
            .collect();
        let n = lexicon.domains.len();
        let mut word_domain: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        let mut word: BTreeMap<String, u64> = BTreeMap::new();
        let mut domain_totals = vec![0u64; n];
        for (term, domain) in &lexicon.entries {
            let c = index[domain.as_str()];
            for token in tokenizer.tokenize(term) {
                word_domain
                    .entry(token.clone())
                    .or_insert_with(|| vec![0; n])[c] += 1;
                *word.entry(token).or_insert(0) += 1;
                domain_totals[c] += 1;
            }
        }
        let total: u64 = domain_totals.iter().sum();
        if total == 0 {
            return Err(Error::EmptyTraining("lexicon (no tokens)"));
        }
        Ok(DomainModel {
            domains: lexicon.domains.clone(),
            word_domain,
            word,
            domain_totals,
            total,
            prior_constant: DEFAULT_PRIOR,
            tokenizer: tokenizer.fingerprint(),
        })
    }

    pub fn with_prior(mut self, prior: f64) -> Self {
        self.prior_constant = prior;
        self
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    fn domain_index(&self, domain: &str) -> Option<usize> {
        self.domains.iter().position(|d| d == domain)
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.word.keys().map(String::as_str)
    }

    pub fn count(&self, word: &str, domain: &str) -> u64 {
        match (self.word_domain.get(word), self.domain_index(domain)) {
            (Some(row), Some(c)) => row[c],
            _ => 0,
        }
    }

    pub fn word_count(&self, word: &str) -> u64 {
        self.word.get(word).copied().unwrap_or(0)
    }

    pub fn domain_total(&self, domain: &str) -> u64 {
        self.domain_index(domain)
            .map_or(0, |c| self.domain_totals[c])
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn tokenizer_fingerprint(&self) -> &str {
        &self.tokenizer
    }

    /// P(t|c); zero for domains without tokens.
    pub fn p_word_given_domain(&self, word: &str, domain: &str) -> f64 {
        let total = self.domain_total(domain);
        if total == 0 {
            0.0
        } else {
            self.count(word, domain) as f64 / total as f64
        }
    }

    /// P(t).
    pub fn p_word(&self, word: &str) -> f64 {
        self.word_count(word) as f64 / self.total as f64
    }

    pub fn domain_posterior(&self, text: &str, tokenizer: &dyn Tokenizer) -> DomainPosterior {
        self.posterior_from_tokens(&tokenizer.tokenize(text))
    }

    pub fn posterior_from_tokens(&self, tokens: &[String]) -> DomainPosterior {
        let mut sums = vec![0.0f64; self.domains.len()];
        let mut matched = false;
        if !tokens.is_empty() {
            let mut tf: BTreeMap<&str, u64> = BTreeMap::new();
            for t in tokens {
                *tf.entry(t.as_str()).or_insert(0) += 1;
            }
            let n = tokens.len() as f64;
            for (t, f) in tf {
                let (Some(row), Some(&count)) = (self.word_domain.get(t), self.word.get(t)) else {
                    continue;
                };
                matched = true;
                let p_t = count as f64 / self.total as f64;
                let p_t_d = f as f64 / n;
                for (c, sum) in sums.iter_mut().enumerate() {
                    if self.domain_totals[c] > 0 {
                        let p_t_c = row[c] as f64 / self.domain_totals[c] as f64;
                        *sum += p_t_c * p_t_d / p_t;
                    }
                }
            }
        }
        DomainPosterior {
            scores: self
                .domains
                .iter()
                .zip(sums)
                .map(|(d, s)| {
                    (
                        d.clone(),
                        if matched {
                            self.prior_constant * s
                        } else {
                            0.0
                        },
                    )
                })
                .collect(),
            unscorable: !matched,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = DomainModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            tokenizer: self.tokenizer.clone(),
            prior_constant: self.prior_constant,
            domains: self.domains.clone(),
            word_domain_counts: self
                .word_domain
                .iter()
                .map(|(w, row)| {
                    let sparse = row
                        .iter()
                        .enumerate()
                        .filter(|(_, &n)| n > 0)
                        .map(|(c, &n)| (self.domains[c].clone(), n))
                        .collect();
                    (w.clone(), sparse)
                })
                .collect(),
            word_counts: self.word.clone(),
            domain_totals: self
                .domains
                .iter()
                .cloned()
                .zip(self.domain_totals.iter().copied())
                .collect(),
            total: self.total,
        };
        let json = serde_json::to_string_pretty(&file).expect("model serializes");
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads a saved model, refusing one built with a different tokenizer.
    pub fn load(path: &Path, tokenizer: &dyn Tokenizer) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bad = |message: String| Error::ModelFormat {
            path: path.to_path_buf(),
            message,
        };
        let file: DomainModelFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(bad(format!("expected {MODEL_FORMAT} v{MODEL_VERSION}")));
        }
        check_fingerprint(path, tokenizer, &file.tokenizer)?;
        let index: BTreeMap<&str, usize> = file
            .domains
            .iter()
            .enumerate()
            .map(|(i, d)| (d.as_str(), i))
            .collect();
        let n = file.domains.len();
        let mut word_domain = BTreeMap::new();
        for (w, sparse) in &file.word_domain_counts {
            let mut row = vec![0u64; n];
            for (d, &count) in sparse {
                let c = *index
                    .get(d.as_str())
                    .ok_or_else(|| bad(format!("unknown domain `{d}`")))?;
                row[c] = count;
            }
            word_domain.insert(w.clone(), row);
        }
        let domain_totals = file
            .domains
            .iter()
            .map(|d| file.domain_totals.get(d).copied().unwrap_or(0))
            .collect();
        let model = DomainModel {
            domains: file.domains,
            word_domain,
            word: file.word_counts,
            domain_totals,
            total: file.total,
            prior_constant: file.prior_constant,
            tokenizer: file.tokenizer,
        };
        model.check_tables().map_err(bad)?;
        Ok(model)
    }

    /// Verifies the marginal identities between the four tables.
    pub fn check_tables(&self) -> std::result::Result<(), String> {
        for (w, row) in &self.word_domain {
            if row.iter().sum::<u64>() != self.word_count(w) {
                return Err(format!("count({w}) differs from its domain sum"));
            }
        }
        if self.word.len() != self.word_domain.len() {
            return Err("word tables disagree on vocabulary".into());
        }
        for (c, &t) in self.domain_totals.iter().enumerate() {
            let s: u64 = self.word_domain.values().map(|row| row[c]).sum();
            if s != t {
                return Err(format!(
                    "total({}) differs from its word sum",
                    self.domains[c]
                ));
            }
        }
        if self.domain_totals.iter().sum::<u64>() != self.total {
            return Err("grand total differs from domain totals".into());
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DomainModelFile {
    format: String,
    version: u32,
    tokenizer: String,
    prior_constant: f64,
    domains: Vec<String>,
    word_domain_counts: BTreeMap<String, BTreeMap<String, u64>>,
    word_counts: BTreeMap<String, u64>,
    domain_totals: BTreeMap<String, u64>,
    total: u64,
}

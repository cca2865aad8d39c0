//! Description model: a word-trigram language model trained on encyclopedia
//! articles, with each article's headword replaced by [`TERM_SYMBOL`].
//!
//! Scores are per-word log probabilities, so descriptions of different
//! lengths compete on equal terms. Smoothing is interpolated Witten-Bell
//! backoff, trigram to bigram to unigram to a uniform floor over the
//! vocabulary plus [`UNK`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenizer::{check_fingerprint, Tokenizer};

pub const TERM_SYMBOL: &str = "<term>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

const MODEL_FORMAT: &str = "encyclogen.trigram-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub headword: String,
    pub body: String,
}

/// Encyclopedia articles the description model learns from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceCorpus {
    articles: Vec<Article>,
}

impl ReferenceCorpus {
    pub fn new(articles: Vec<Article>) -> Result<Self> {
        if let Some(a) = articles
            .iter()
            .find(|a| a.headword.trim().is_empty() || a.body.trim().is_empty())
        {
            return Err(Error::Config(format!(
                "reference article `{}` has an empty headword or body",
                a.headword
            )));
        }
        Ok(ReferenceCorpus { articles })
    }

    /// Reads JSON lines of `{"headword": .., "body": ..}`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut articles = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let article: Article = serde_json::from_str(line).map_err(|e| Error::Record {
                path: path.to_path_buf(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            articles.push(article);
        }
        ReferenceCorpus::new(articles)
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }
}

/// Replaces every non-overlapping occurrence of `term` with [`TERM_SYMBOL`].
pub fn mask_term(tokens: Vec<String>, term: &[String]) -> Vec<String> {
    if term.is_empty() {
        return tokens;
    }
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i..].starts_with(term) {
            out.push(TERM_SYMBOL.to_string());
            i += term.len();
        } else {
            out.push(tokens[i].clone());
            i += 1;
        }
    }
    out
}

/// Masked, padded token streams (`BOS BOS w.. EOS`), one per sentence.
pub fn padded_sentences(text: &str, term: &str, tokenizer: &dyn Tokenizer) -> Vec<Vec<String>> {
    let term_tokens = tokenizer.tokenize(term);
    tokenizer
        .segment(text)
        .iter()
        .map(|s| mask_term(tokenizer.tokenize(s), &term_tokens))
        .filter(|t| !t.is_empty())
        .map(|tokens| {
            let mut padded = Vec::with_capacity(tokens.len() + 3);
            padded.push(BOS.to_string());
            padded.push(BOS.to_string());
            padded.extend(tokens);
            padded.push(EOS.to_string());
            padded
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    #[default]
    WittenBell,
    /// Raw relative frequencies; unseen events get probability 0.
    MaximumLikelihood,
}

/// Event count and number of distinct continuations of a context.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct ContextStats {
    count: u64,
    types: u64,
}

type Bigram = (String, String);
type Trigram = (String, String, String);

#[derive(Debug, Clone, PartialEq)]
pub struct TrigramModel {
    /// Symbols that can be predicted, always including [`TERM_SYMBOL`] and [`EOS`].
    vocab: BTreeSet<String>,
    unigrams: HashMap<String, u64>,
    bigrams: HashMap<Bigram, u64>,
    trigrams: HashMap<Trigram, u64>,
    unigram_total: u64,
    bigram_contexts: HashMap<String, ContextStats>,
    trigram_contexts: HashMap<Bigram, ContextStats>,
    pub smoothing: Smoothing,
    /// Multiplies P(d); a constant quality estimate.
    pub quality_factor: f64,
    tokenizer: String,
}

impl TrigramModel {
    pub fn train(corpus: &ReferenceCorpus, tokenizer: &dyn Tokenizer) -> Result<Self> {
        let mut model = TrigramModel::empty(tokenizer.fingerprint());
        for article in &corpus.articles {
            for sentence in padded_sentences(&article.body, &article.headword, tokenizer) {
                model.add_sentence(&sentence);
            }
        }
        if model.unigram_total == 0 {
            return Err(Error::EmptyTraining("reference corpus"));
        }
        model.fit();
        Ok(model)
    }

    fn empty(tokenizer: String) -> Self {
        TrigramModel {
            vocab: [TERM_SYMBOL, EOS].iter().map(|s| s.to_string()).collect(),
            unigrams: HashMap::new(),
            bigrams: HashMap::new(),
            trigrams: HashMap::new(),
            unigram_total: 0,
            bigram_contexts: HashMap::new(),
            trigram_contexts: HashMap::new(),
            smoothing: Smoothing::WittenBell,
            quality_factor: 1.0,
            tokenizer,
        }
    }

    fn add_sentence(&mut self, padded: &[String]) {
        for w in padded.windows(3) {
            let (u, v, x) = (&w[0], &w[1], &w[2]);
            self.vocab.insert(x.clone());
            *self.unigrams.entry(x.clone()).or_insert(0) += 1;
            *self.bigrams.entry((v.clone(), x.clone())).or_insert(0) += 1;
            *self
                .trigrams
                .entry((u.clone(), v.clone(), x.clone()))
                .or_insert(0) += 1;
            self.unigram_total += 1;
        }
    }

    /// Derives the context statistics the smoothing needs from the count tables.
    fn fit(&mut self) {
        self.bigram_contexts.clear();
        for ((v, _), &n) in &self.bigrams {
            let s = self.bigram_contexts.entry(v.clone()).or_default();
            s.count += n;
            s.types += 1;
        }
        self.trigram_contexts.clear();
        for ((u, v, _), &n) in &self.trigrams {
            let s = self
                .trigram_contexts
                .entry((u.clone(), v.clone()))
                .or_default();
            s.count += n;
            s.types += 1;
        }
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str)
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn tokenizer_fingerprint(&self) -> &str {
        &self.tokenizer
    }

    pub fn unigram_count(&self, w: &str) -> u64 {
        self.unigrams.get(w).copied().unwrap_or(0)
    }

    pub fn bigram_count(&self, v: &str, w: &str) -> u64 {
        self.bigrams
            .get(&(v.to_string(), w.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn trigram_count(&self, u: &str, v: &str, w: &str) -> u64 {
        self.trigrams
            .get(&(u.to_string(), v.to_string(), w.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Total count of trigrams starting with `u v`.
    pub fn context_count(&self, u: &str, v: &str) -> u64 {
        self.trigram_contexts
            .get(&(u.to_string(), v.to_string()))
            .map_or(0, |s| s.count)
    }

    /// Maps out-of-vocabulary words to [`UNK`]; context symbols pass through.
    fn known(&self, w: &str) -> bool {
        self.vocab.contains(w) || w == BOS
    }

    fn p_uniform(&self) -> f64 {
        1.0 / (self.vocab.len() as f64 + 1.0)
    }

    fn p_unigram(&self, w: &str) -> f64 {
        let types = self.unigrams.len() as f64;
        let n = self.unigram_total as f64;
        (self.unigram_count(w) as f64 + types * self.p_uniform()) / (n + types)
    }

    fn p_bigram(&self, v: &str, w: &str) -> f64 {
        let lower = self.p_unigram(w);
        match self.bigram_contexts.get(v) {
            Some(ctx) if ctx.count > 0 => {
                (self.bigram_count(v, w) as f64 + ctx.types as f64 * lower)
                    / (ctx.count + ctx.types) as f64
            }
            _ => lower,
        }
    }

    fn p_trigram(&self, u: &str, v: &str, w: &str) -> f64 {
        let lower = self.p_bigram(v, w);
        match self.trigram_contexts.get(&(u.to_string(), v.to_string())) {
            Some(ctx) if ctx.count > 0 => {
                (self.trigram_count(u, v, w) as f64 + ctx.types as f64 * lower)
                    / (ctx.count + ctx.types) as f64
            }
            _ => lower,
        }
    }

    /// Unsmoothed `c(u v w) / c(u v)`; `None` for an unseen context.
    pub fn ml_probability(&self, u: &str, v: &str, w: &str) -> Option<f64> {
        let ctx = self.context_count(u, v);
        (ctx > 0).then(|| self.trigram_count(u, v, w) as f64 / ctx as f64)
    }

    /// P(w | u v) under the model's smoothing. Unknown `w` is scored as [`UNK`].
    pub fn probability(&self, u: &str, v: &str, w: &str) -> f64 {
        let w = if self.vocab.contains(w) { w } else { UNK };
        match self.smoothing {
            Smoothing::WittenBell => self.p_trigram(u, v, w),
            Smoothing::MaximumLikelihood => self.ml_probability(u, v, w).unwrap_or(0.0),
        }
    }

    /// Per-word log probability of `text` with `term` masked. Each sentence is
    /// padded like the training data and every word plus the end symbol counts
    /// as one scored token.
    pub fn score_description(
        &self,
        text: &str,
        term: &str,
        tokenizer: &dyn Tokenizer,
    ) -> Result<f64> {
        let mut log_prob = 0.0;
        let mut n = 0usize;
        for sentence in padded_sentences(text, term, tokenizer) {
            let sentence: Vec<&str> = sentence
                .iter()
                .map(|w| if self.known(w) { w.as_str() } else { UNK })
                .collect();
            for w in sentence.windows(3) {
                log_prob += self.probability(w[0], w[1], w[2]).ln();
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::Unscorable("description model"));
        }
        Ok(log_prob / n as f64 + self.quality_factor.ln())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut unigrams: Vec<(String, u64)> =
            self.unigrams.iter().map(|(w, &n)| (w.clone(), n)).collect();
        unigrams.sort();
        let mut bigrams: Vec<(String, String, u64)> = self
            .bigrams
            .iter()
            .map(|((v, w), &n)| (v.clone(), w.clone(), n))
            .collect();
        bigrams.sort();
        let mut trigrams: Vec<(String, String, String, u64)> = self
            .trigrams
            .iter()
            .map(|((u, v, w), &n)| (u.clone(), v.clone(), w.clone(), n))
            .collect();
        trigrams.sort();
        let file = TrigramModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            tokenizer: self.tokenizer.clone(),
            smoothing: self.smoothing,
            quality_factor: self.quality_factor,
            vocabulary: self.vocab.iter().cloned().collect(),
            unigrams,
            bigrams,
            trigrams,
        };
        let json = serde_json::to_string(&file).expect("model serializes");
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, tokenizer: &dyn Tokenizer) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let bad = |message: String| Error::ModelFormat {
            path: path.to_path_buf(),
            message,
        };
        let file: TrigramModelFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(bad(format!("expected {MODEL_FORMAT} v{MODEL_VERSION}")));
        }
        check_fingerprint(path, tokenizer, &file.tokenizer)?;
        let mut model = TrigramModel::empty(file.tokenizer);
        model.smoothing = file.smoothing;
        model.quality_factor = file.quality_factor;
        model.vocab.extend(file.vocabulary);
        for (w, n) in file.unigrams {
            model.unigram_total += n;
            model.unigrams.insert(w, n);
        }
        for (v, w, n) in file.bigrams {
            model.bigrams.insert((v, w), n);
        }
        for (u, v, w, n) in file.trigrams {
            model.trigrams.insert((u, v, w), n);
        }
        model.fit();
        Ok(model)
    }

    /// Sorted count tables, for inspection and reproducible output.
    pub fn trigram_table(&self) -> BTreeMap<(String, String, String), u64> {
        self.trigrams.iter().map(|(k, &v)| (k.clone(), v)).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct TrigramModelFile {
    format: String,
    version: u32,
    tokenizer: String,
    smoothing: Smoothing,
    quality_factor: f64,
    vocabulary: Vec<String>,
    unigrams: Vec<(String, u64)>,
    bigrams: Vec<(String, String, u64)>,
    trigrams: Vec<(String, String, String, u64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::UnicodeTokenizer;
    use proptest::prelude::*;

    fn corpus(articles: &[(&str, &str)]) -> ReferenceCorpus {
        ReferenceCorpus::new(
            articles
                .iter()
                .map(|(h, b)| Article {
                    headword: h.to_string(),
                    body: b.to_string(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn toy() -> TrigramModel {
        TrigramModel::train(
            &corpus(&[
                (
                    "router",
                    "A router forwards packets. The router reads headers.",
                ),
                ("modem", "A modem converts signals. The modem is a device."),
                ("switch", "A switch forwards frames."),
            ]),
            &UnicodeTokenizer,
        )
        .unwrap()
    }

    #[test]
    fn headword_is_masked_in_training_stream() {
        let stream = padded_sentences("a router forwards packets", "router", &UnicodeTokenizer);
        assert_eq!(
            stream,
            vec![vec![BOS, BOS, "a", TERM_SYMBOL, "forwards", "packets", EOS]]
        );
        let m = TrigramModel::train(
            &corpus(&[("router", "a router forwards packets")]),
            &UnicodeTokenizer,
        )
        .unwrap();
        assert_eq!(m.trigram_count("a", TERM_SYMBOL, "forwards"), 1);
        assert_eq!(m.unigram_count("router"), 0);
    }

    #[test]
    fn multi_token_headwords_collapse_to_one_symbol() {
        let stream = padded_sentences(
            "Memory interleave speeds memory access.",
            "memory interleave",
            &UnicodeTokenizer,
        );
        assert_eq!(stream[0][2], TERM_SYMBOL);
        assert_eq!(stream[0][3], "speeds");
        assert_eq!(stream[0][4], "memory");
    }

    #[test]
    fn doubling_the_corpus_doubles_counts() {
        let one = toy();
        let two = TrigramModel::train(
            &corpus(&[
                (
                    "router",
                    "A router forwards packets. The router reads headers.",
                ),
                ("modem", "A modem converts signals. The modem is a device."),
                ("switch", "A switch forwards frames."),
                (
                    "router",
                    "A router forwards packets. The router reads headers.",
                ),
                ("modem", "A modem converts signals. The modem is a device."),
                ("switch", "A switch forwards frames."),
            ]),
            &UnicodeTokenizer,
        )
        .unwrap();
        for ((u, v, w), n) in one.trigram_table() {
            assert_eq!(two.trigram_count(&u, &v, &w), 2 * n);
            assert_eq!(
                two.ml_probability(&u, &v, &w),
                one.ml_probability(&u, &v, &w)
            );
        }
    }

    #[test]
    fn deterministic_chain_scores_zero_unsmoothed() {
        let m = TrigramModel::train(
            &corpus(&[("router", "a router forwards packets")]),
            &UnicodeTokenizer,
        )
        .unwrap()
        .with_smoothing(Smoothing::MaximumLikelihood);
        let s = m
            .score_description("A router forwards packets.", "router", &UnicodeTokenizer)
            .unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn repeated_sentence_keeps_normalized_score() {
        let m = toy();
        let d = "A modem forwards packets.";
        let one = m.score_description(d, "modem", &UnicodeTokenizer).unwrap();
        let two = m
            .score_description(&format!("{d} {d}"), "modem", &UnicodeTokenizer)
            .unwrap();
        assert!((one - two).abs() < 1e-9);
    }

    #[test]
    fn no_tokens_is_unscorable() {
        assert!(matches!(
            toy().score_description("!!! ...", "x", &UnicodeTokenizer),
            Err(Error::Unscorable(_))
        ));
    }

    /// Independent Witten-Bell evaluation straight from the padded token
    /// streams, without the model's tables.
    fn oracle_wb(streams: &[Vec<String>], vocab_size: usize, u: &str, v: &str, w: &str) -> f64 {
        let events: Vec<(&str, &str, &str)> = streams
            .iter()
            .flat_map(|s| {
                s.windows(3)
                    .map(|x| (x[0].as_str(), x[1].as_str(), x[2].as_str()))
            })
            .collect();
        let p0 = 1.0 / (vocab_size as f64 + 1.0);
        let distinct = |it: Vec<&str>| {
            let mut it = it;
            it.sort();
            it.dedup();
            it.len() as f64
        };
        let n = events.len() as f64;
        let c1 = events.iter().filter(|e| e.2 == w).count() as f64;
        let t1 = distinct(events.iter().map(|e| e.2).collect());
        let p1 = (c1 + t1 * p0) / (n + t1);
        let ctx2: Vec<_> = events.iter().filter(|e| e.1 == v).collect();
        let p2 = if ctx2.is_empty() {
            p1
        } else {
            let t = distinct(ctx2.iter().map(|e| e.2).collect());
            let c = ctx2.iter().filter(|e| e.2 == w).count() as f64;
            (c + t * p1) / (ctx2.len() as f64 + t)
        };
        let ctx3: Vec<_> = events.iter().filter(|e| e.0 == u && e.1 == v).collect();
        if ctx3.is_empty() {
            p2
        } else {
            let t = distinct(ctx3.iter().map(|e| e.2).collect());
            let c = ctx3.iter().filter(|e| e.2 == w).count() as f64;
            (c + t * p2) / (ctx3.len() as f64 + t)
        }
    }

    #[test]
    fn smoothed_scores_match_oracle() {
        let m = toy();
        let articles = [
            (
                "router",
                "A router forwards packets. The router reads headers.",
            ),
            ("modem", "A modem converts signals. The modem is a device."),
            ("switch", "A switch forwards frames."),
        ];
        let streams: Vec<Vec<String>> = articles
            .iter()
            .flat_map(|(h, b)| padded_sentences(b, h, &UnicodeTokenizer))
            .collect();
        let desc = "The hub forwards packets";
        let padded = &padded_sentences(desc, "hub", &UnicodeTokenizer)[0];
        let mut sum = 0.0;
        for w in padded.windows(3) {
            let x = if m.vocabulary().any(|v| v == w[2]) {
                w[2].as_str()
            } else {
                UNK
            };
            sum += oracle_wb(&streams, m.vocab_size(), &w[0], &w[1], x).ln();
        }
        let expected = sum / 5.0;
        let got = m.score_description(desc, "hub", &UnicodeTokenizer).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn seen_text_beats_unseen_words() {
        let m = toy();
        let seen = m
            .score_description("A router forwards packets.", "router", &UnicodeTokenizer)
            .unwrap();
        let unseen = m
            .score_description("Qux blorp zint wug.", "router", &UnicodeTokenizer)
            .unwrap();
        assert!(seen > unseen);
    }

    #[test]
    fn save_load_round_trip() {
        let m = toy();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lm.json");
        m.save(&path).unwrap();
        let loaded = TrigramModel::load(&path, &UnicodeTokenizer).unwrap();
        assert_eq!(loaded, m);
        assert!(loaded.vocabulary().any(|w| w == TERM_SYMBOL));
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let empty = ReferenceCorpus::new(vec![]).unwrap();
        assert!(matches!(
            TrigramModel::train(&empty, &UnicodeTokenizer),
            Err(Error::EmptyTraining(_))
        ));
        assert!(ReferenceCorpus::new(vec![Article {
            headword: "x".into(),
            body: " ".into()
        }])
        .is_err());
    }

    proptest! {
        #[test]
        fn conditionals_sum_to_one(u in 0usize..40, v in 0usize..40) {
            let m = toy();
            let symbols: Vec<String> = std::iter::once(BOS.to_string())
                .chain(m.vocabulary().map(str::to_string))
                .chain(["zzz".to_string(), UNK.to_string()])
                .collect();
            let (u, v) = (&symbols[u % symbols.len()], &symbols[v % symbols.len()]);
            let total: f64 = m
                .vocabulary()
                .chain(std::iter::once(UNK))
                .map(|w| m.probability(u, v, w))
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}

//! Multiple-choice question answering over encyclopedia stores.
//!
//! Type 1 questions give a term and ask for its description: each stored
//! description of the term is a query against the four choices. Type 2
//! questions give a description and ask for the term: the stem is a query
//! against the stored descriptions of each choice. Scores are Okapi BM25 and
//! the best description decides a choice's score.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::KnowledgeBase;
use crate::tokenizer::Tokenizer;

pub const CHOICES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuestionType {
    /// Term given, pick the description.
    #[serde(rename = "type1")]
    TermToDescription,
    /// Description given, pick the term.
    #[serde(rename = "type2")]
    DescriptionToTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub qtype: QuestionType,
    pub stem: String,
    pub choices: Vec<String>,
    pub gold: usize,
}

impl Question {
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| {
            Err(Error::Question {
                id: self.id.clone(),
                message,
            })
        };
        if self.choices.len() != CHOICES {
            return fail(format!(
                "expected {CHOICES} choices, found {}",
                self.choices.len()
            ));
        }
        if self.gold >= CHOICES {
            return fail(format!("gold index {} out of range", self.gold));
        }
        if self.stem.trim().is_empty() || self.choices.iter().any(|c| c.trim().is_empty()) {
            return fail("empty stem or choice".into());
        }
        Ok(())
    }
}

/// Reads and validates a question file, one JSON object per line.
pub fn load_questions(path: &Path) -> Result<Vec<Question>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let q: Question = serde_json::from_str(line).map_err(|e| Error::Record {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        q.validate()?;
        out.push(q);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Okapi {
    pub k1: f64,
    pub b: f64,
}

impl Default for Okapi {
    fn default() -> Self {
        Okapi { k1: 1.2, b: 0.75 }
    }
}

/// Tokenized documents with the statistics BM25 needs.
#[derive(Debug, Clone)]
pub struct Collection {
    docs: Vec<Vec<String>>,
    avg_len: f64,
}

impl Collection {
    pub fn new(docs: Vec<Vec<String>>) -> Self {
        let total: usize = docs.iter().map(Vec::len).sum();
        let avg_len = if docs.is_empty() {
            0.0
        } else {
            total as f64 / docs.len() as f64
        };
        Collection { docs, avg_len }
    }

    pub fn from_texts(texts: &[&str], tokenizer: &dyn Tokenizer) -> Self {
        Self::new(texts.iter().map(|t| tokenizer.tokenize(t)).collect())
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.docs
            .iter()
            .filter(|d| d.iter().any(|t| t == term))
            .count()
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, positive for every df.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.docs.len() as f64;
        let df = self.document_frequency(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// BM25 of `query` against `doc`, with collection statistics.
    pub fn score(&self, query: &[String], doc: &[String], okapi: Okapi) -> f64 {
        let len_ratio = if self.avg_len > 0.0 {
            doc.len() as f64 / self.avg_len
        } else {
            1.0
        };
        let norm = okapi.k1 * (1.0 - okapi.b + okapi.b * len_ratio);
        let mut seen: Vec<&str> = Vec::new();
        let mut total = 0.0;
        for t in query {
            if seen.contains(&t.as_str()) {
                continue;
            }
            seen.push(t);
            let tf = doc.iter().filter(|d| *d == t).count() as f64;
            if tf > 0.0 {
                total += self.idf(t) * tf * (okapi.k1 + 1.0) / (tf + norm);
            }
        }
        total
    }

    pub fn score_doc(&self, query: &[String], index: usize, okapi: Okapi) -> f64 {
        self.score(query, &self.docs[index], okapi)
    }
}

/// BM25 similarity of two texts, statistics taken from `collection`.
pub fn similarity(
    query: &str,
    doc: &str,
    collection: &[&str],
    tokenizer: &dyn Tokenizer,
    okapi: Okapi,
) -> f64 {
    let c = Collection::from_texts(collection, tokenizer);
    c.score(&tokenizer.tokenize(query), &tokenizer.tokenize(doc), okapi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Fallback {
    #[default]
    None,
    Random {
        seed: u64,
    },
}

#[derive(Debug, Clone, Default)]
pub struct AnswerOptions {
    pub domains: Option<Vec<String>>,
    pub fallback: Fallback,
    pub okapi: Okapi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Answer {
    Chosen { index: usize, fallback: bool },
    Abstain,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Index of the highest score; the first one wins ties.
fn argmax(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Per-choice scores; `None` marks a choice without knowledge.
pub fn choice_scores(
    q: &Question,
    kb: &KnowledgeBase,
    options: &AnswerOptions,
    tokenizer: &dyn Tokenizer,
) -> Vec<Option<f64>> {
    let domains = options.domains.as_deref();
    match q.qtype {
        QuestionType::TermToDescription => {
            let stored = kb.descriptions(&q.stem, domains);
            if stored.is_empty() {
                return vec![None; q.choices.len()];
            }
            let texts: Vec<&str> = q.choices.iter().map(String::as_str).collect();
            let coll = Collection::from_texts(&texts, tokenizer);
            let queries: Vec<Vec<String>> = stored.iter().map(|d| tokenizer.tokenize(d)).collect();
            (0..coll.len())
                .map(|i| {
                    queries
                        .iter()
                        .map(|qt| coll.score_doc(qt, i, options.okapi))
                        .reduce(f64::max)
                })
                .collect()
        }
        QuestionType::DescriptionToTerm => {
            let per_choice: Vec<Vec<&str>> = q
                .choices
                .iter()
                .map(|c| kb.descriptions(c, domains))
                .collect();
            let all: Vec<&str> = per_choice.iter().flatten().copied().collect();
            let coll = Collection::from_texts(&all, tokenizer);
            let query = tokenizer.tokenize(&q.stem);
            let mut next = 0;
            per_choice
                .iter()
                .map(|descs| {
                    let range = next..next + descs.len();
                    next = range.end;
                    range
                        .map(|i| coll.score_doc(&query, i, options.okapi))
                        .reduce(f64::max)
                })
                .collect()
        }
    }
}

/// Answers one question. Deterministic for fixed inputs and seed.
pub fn answer(
    q: &Question,
    kb: &KnowledgeBase,
    options: &AnswerOptions,
    tokenizer: &dyn Tokenizer,
) -> Result<Answer> {
    q.validate()?;
    if let Some(index) = argmax(&choice_scores(q, kb, options, tokenizer)) {
        return Ok(Answer::Chosen {
            index,
            fallback: false,
        });
    }
    Ok(match options.fallback {
        Fallback::None => Answer::Abstain,
        Fallback::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&q.id));
            Answer::Chosen {
                index: rng.random_range(0..q.choices.len()),
                fallback: true,
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: String,
    pub answered: bool,
    pub chosen: Option<usize>,
    pub correct: bool,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaResult {
    pub total: usize,
    pub answered: usize,
    pub correct: usize,
    pub outcomes: Vec<Outcome>,
}

impl QaResult {
    pub fn coverage(&self) -> f64 {
        self.answered as f64 / self.total as f64
    }

    /// Undefined when nothing was answered.
    pub fn accuracy(&self) -> Option<f64> {
        (self.answered > 0).then(|| self.correct as f64 / self.answered as f64)
    }
}

pub fn evaluate(
    questions: &[Question],
    kb: &KnowledgeBase,
    options: &AnswerOptions,
    tokenizer: &dyn Tokenizer,
) -> Result<QaResult> {
    if questions.is_empty() {
        return Err(Error::Config("question list is empty".into()));
    }
    let outcomes: Vec<Outcome> = questions
        .par_iter()
        .map(|q| {
            let a = answer(q, kb, options, tokenizer)?;
            Ok(match a {
                Answer::Chosen { index, fallback } => Outcome {
                    id: q.id.clone(),
                    answered: true,
                    chosen: Some(index),
                    correct: index == q.gold,
                    fallback,
                },
                Answer::Abstain => Outcome {
                    id: q.id.clone(),
                    answered: false,
                    chosen: None,
                    correct: false,
                    fallback: false,
                },
            })
        })
        .collect::<Result<_>>()?;
    Ok(QaResult {
        total: outcomes.len(),
        answered: outcomes.iter().filter(|o| o.answered).count(),
        correct: outcomes.iter().filter(|o| o.correct).count(),
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub coverage: f64,
    pub accuracy: Option<f64>,
}

impl From<&QaResult> for Cell {
    fn from(r: &QaResult) -> Self {
        Cell {
            coverage: r.coverage(),
            accuracy: r.accuracy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub resource: String,
    pub without_random: Cell,
    pub with_random: Cell,
}

/// Coverage and accuracy per resource, with and without random fallback.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QaReport {
    pub questions: usize,
    pub rows: Vec<ReportRow>,
}

/// One row per named knowledge base, plus their union when there are several.
pub fn report(
    questions: &[Question],
    resources: &[(String, KnowledgeBase)],
    domains: Option<Vec<String>>,
    seed: u64,
    okapi: Okapi,
    tokenizer: &dyn Tokenizer,
) -> Result<QaReport> {
    let mut rows_in: Vec<(String, KnowledgeBase)> = resources.to_vec();
    if resources.len() > 1 {
        let names: Vec<&str> = resources.iter().map(|(n, _)| n.as_str()).collect();
        let union = resources
            .iter()
            .fold(KnowledgeBase::default(), |acc, (_, kb)| acc.merged(kb));
        rows_in.push((names.join(" + "), union));
    }
    let mut rows = Vec::new();
    for (name, kb) in rows_in {
        let plain = AnswerOptions {
            domains: domains.clone(),
            fallback: Fallback::None,
            okapi,
        };
        let random = AnswerOptions {
            fallback: Fallback::Random { seed },
            ..plain.clone()
        };
        rows.push(ReportRow {
            resource: name,
            without_random: (&evaluate(questions, &kb, &plain, tokenizer)?).into(),
            with_random: (&evaluate(questions, &kb, &random, tokenizer)?).into(),
        });
    }
    Ok(QaReport {
        questions: questions.len(),
        rows,
    })
}

impl QaReport {
    /// Percentages with one decimal; undefined accuracy prints as `-`.
    pub fn render(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.resource.len())
            .max()
            .unwrap_or(0)
            .max("resource".len());
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.1}", v * 100.0));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:width$}  {:^13}  {:^13}",
            "resource", "w/o random", "w/ random"
        );
        let _ = writeln!(
            s,
            "{:width$}  {:>6} {:>6}  {:>6} {:>6}",
            "", "C", "A", "C", "A"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:width$}  {:>6} {:>6}  {:>6} {:>6}",
                r.resource,
                pct(Some(r.without_random.coverage)),
                pct(r.without_random.accuracy),
                pct(Some(r.with_random.coverage)),
                pct(r.with_random.accuracy),
            );
        }
        let _ = writeln!(s, "({} questions)", self.questions);
        s.lines().map(|l| format!("{}\n", l.trim_end())).collect()
    }
}

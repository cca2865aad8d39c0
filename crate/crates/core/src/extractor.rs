//! Description extraction.
//!
//! A region describing the term is located either by a definitional pattern
//! matching a sentence or by the term being highlighted in layout markup
//! (`<dt>`, `<b>`, `<h1>`..`<h9>`, `<a>`). One fragment is then cut per region
//! by the first rule that yields text, in this order:
//!
//! 1. the `<dd>` right after the `<dt>` holding the term,
//! 2. the enclosing or immediately following `<p>`,
//! 3. the enclosing or immediately following `<ul>`,
//! 4. the next `n_sentences` sentences.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Page;
use crate::error::{Error, Result};
use crate::html::{is_block, Document};
use crate::tokenizer::Tokenizer;

pub const TERM_PLACEHOLDER: &str = "TERM";
pub const DEFAULT_N_SENTENCES: usize = 3;
pub const DEFAULT_PATTERNS: &str = include_str!("../data/patterns.en.txt");

/// A definitional template such as `TERM is a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    before: Vec<String>,
    after: Vec<String>,
}

impl Pattern {
    pub fn parse(line: &str) -> std::result::Result<Self, String> {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let holes: Vec<usize> = tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == TERM_PLACEHOLDER)
            .map(|(i, _)| i)
            .collect();
        match holes.as_slice() {
            [i] => Ok(Pattern {
                before: tokens[..*i].iter().map(|s| s.to_string()).collect(),
                after: tokens[i + 1..].iter().map(|s| s.to_string()).collect(),
            }),
            [] => Err(format!("`{line}` has no {TERM_PLACEHOLDER} placeholder")),
            _ => Err(format!(
                "`{line}` has more than one {TERM_PLACEHOLDER} placeholder"
            )),
        }
    }

    fn compile(&self, term: &[String], tokenizer: &dyn Tokenizer) -> Vec<String> {
        let lit = |parts: &[String]| -> Vec<String> {
            parts.iter().flat_map(|p| tokenizer.tokenize(p)).collect()
        };
        let mut seq = lit(&self.before);
        seq.extend_from_slice(term);
        seq.extend(lit(&self.after));
        seq
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<&str> = self
            .before
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(TERM_PLACEHOLDER))
            .chain(self.after.iter().map(String::as_str))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Ordered, non-empty list of patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    patterns: Vec<Pattern>,
    language: String,
}

impl PatternSet {
    pub fn new(patterns: Vec<Pattern>, language: impl Into<String>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::Pattern {
                line: 0,
                message: "pattern set is empty".into(),
            });
        }
        Ok(PatternSet {
            patterns,
            language: language.into(),
        })
    }

    /// Parses the pattern-file format: one pattern per line, space separated
    /// tokens, literal `TERM` placeholder, `#` comments. A `# language: xx`
    /// comment sets the language tag.
    pub fn parse(text: &str) -> Result<Self> {
        let mut patterns = Vec::new();
        let mut language = String::from("und");
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(lang) = comment.trim().strip_prefix("language:") {
                    language = lang.trim().to_string();
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let line = line.split('#').next().unwrap_or("").trim();
            let pattern = Pattern::parse(line).map_err(|message| Error::Pattern {
                line: idx + 1,
                message,
            })?;
            patterns.push(pattern);
        }
        PatternSet::new(patterns, language)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PatternSet::parse(&text)
    }

    /// The bundled English set, a reconstruction of typical definitional
    /// phrases.
    pub fn default_english() -> Self {
        PatternSet::parse(DEFAULT_PATTERNS).expect("bundled patterns parse")
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn language(&self) -> &str {
        &self.language
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    DdAfterDt,
    Paragraph,
    Itemization,
    NSentences,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Trigger {
    Pattern,
    Heading,
    Anchor,
}

/// An extracted fragment with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub term: String,
    pub text: String,
    pub source_url: String,
    pub source_rank: u32,
    pub rule: Rule,
    pub trigger: Trigger,
}

/// Where a term is described on a page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub trigger: Trigger,
    /// The matched sentence or the highlighting element, in tag-stripped text.
    pub span: Range<usize>,
    /// Index of the highlighting element for layout triggers.
    pub element: Option<usize>,
    /// Index of the matched sentence for pattern triggers.
    pub sentence: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ExtractorConfig {
    pub heading_tags: BTreeSet<String>,
    pub anchor_tags: BTreeSet<String>,
    pub n_sentences: usize,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        let mut heading_tags: BTreeSet<String> =
            ["dt", "b"].iter().map(|s| s.to_string()).collect();
        heading_tags.extend((1..=9).map(|i| format!("h{i}")));
        ExtractorConfig {
            heading_tags,
            anchor_tags: std::iter::once("a".to_string()).collect(),
            n_sentences: DEFAULT_N_SENTENCES,
        }
    }
}

fn contains_seq(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// A page parsed for extraction.
pub struct PageView<'a> {
    page: &'a Page,
    doc: Document,
    sentences: Vec<Range<usize>>,
    tokenizer: &'a dyn Tokenizer,
}

impl<'a> PageView<'a> {
    pub fn new(page: &'a Page, tokenizer: &'a dyn Tokenizer) -> Self {
        let doc = Document::parse(page.markup());
        let sentences = doc
            .chunks
            .iter()
            .flat_map(|chunk| {
                tokenizer
                    .sentence_spans(&doc.text[chunk.clone()])
                    .into_iter()
                    .map(move |s| chunk.start + s.start..chunk.start + s.end)
            })
            .collect();
        PageView {
            page,
            doc,
            sentences,
            tokenizer,
        }
    }

    /// Tag-stripped text every fragment is cut from.
    pub fn text(&self) -> &str {
        &self.doc.text
    }

    pub fn sentences(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().map(|s| &self.doc.text[s.clone()])
    }

    pub fn find_regions(
        &self,
        term: &str,
        patterns: &PatternSet,
        config: &ExtractorConfig,
    ) -> Vec<Region> {
        let term_tokens = self.tokenizer.tokenize(term);
        if term_tokens.is_empty() {
            return Vec::new();
        }
        let compiled: Vec<Vec<String>> = patterns
            .patterns
            .iter()
            .map(|p| p.compile(&term_tokens, self.tokenizer))
            .collect();

        let mut regions = Vec::new();
        for (i, span) in self.sentences.iter().enumerate() {
            let tokens = self.tokenizer.tokenize(&self.doc.text[span.clone()]);
            if compiled.iter().any(|seq| contains_seq(&tokens, seq)) {
                regions.push(Region {
                    trigger: Trigger::Pattern,
                    span: span.clone(),
                    element: None,
                    sentence: Some(i),
                });
            }
        }
        for (id, element) in self.doc.elements.iter().enumerate() {
            let trigger = if config.heading_tags.contains(&element.tag) {
                Trigger::Heading
            } else if config.anchor_tags.contains(&element.tag) {
                Trigger::Anchor
            } else {
                continue;
            };
            let tokens = self.tokenizer.tokenize(self.doc.element_text(id));
            if contains_seq(&tokens, &term_tokens) {
                regions.push(Region {
                    trigger,
                    span: self.doc.trim_range(element.span()),
                    element: Some(id),
                    sentence: None,
                });
            }
        }
        regions.sort_by_key(|r| r.span.start);
        regions
    }

    fn fragment(&self, range: Range<usize>) -> Option<String> {
        let range = self.doc.trim_range(range);
        (!range.is_empty()).then(|| self.doc.text[range].to_string())
    }

    fn chunk_end(&self, pos: usize) -> usize {
        self.doc
            .chunks
            .iter()
            .find(|c| c.start <= pos && pos < c.end)
            .map_or(pos, |c| c.end)
    }

    /// Cuts one fragment for `region` by the first rule that yields text.
    pub fn extract_fragment(
        &self,
        term: &str,
        region: &Region,
        n_sentences: usize,
    ) -> Result<Candidate> {
        let (rule, text) = self
            .select_fragment(region, n_sentences)
            .ok_or(Error::EmptyFragment)?;
        Ok(Candidate {
            term: term.to_string(),
            text,
            source_url: self.page.url.clone(),
            source_rank: self.page.rank,
            rule,
            trigger: region.trigger,
        })
    }

    fn select_fragment(&self, region: &Region, n_sentences: usize) -> Option<(Rule, String)> {
        let doc = &self.doc;
        let anchor = region
            .element
            .or_else(|| doc.innermost_covering(&region.span));
        let ancestors: Vec<usize> = anchor
            .map(|a| doc.ancestors(a).collect())
            .unwrap_or_default();
        let enclosing = |tag: &str| {
            ancestors
                .iter()
                .copied()
                .find(|&i| doc.elements[i].tag == tag)
        };
        let following = |pos: usize, tag: &str| {
            doc.block_immediately_after(pos)
                .filter(|&i| doc.elements[i].tag == tag)
        };

        if let Some(dt) = enclosing("dt") {
            if let Some(text) = following(doc.elements[dt].end, "dd")
                .and_then(|dd| self.fragment(doc.elements[dd].span()))
            {
                return Some((Rule::DdAfterDt, text));
            }
        }

        let region_end = match region.element {
            Some(id) if is_block(&doc.elements[id].tag) => doc.elements[id].end,
            _ => self.chunk_end(region.span.start),
        };

        for (tag, rule) in [("p", Rule::Paragraph), ("ul", Rule::Itemization)] {
            let block = enclosing(tag).or_else(|| following(region_end, tag));
            if let Some(text) = block.and_then(|b| self.fragment(doc.elements[b].span())) {
                return Some((rule, text));
            }
        }

        let first = match (region.sentence, region.element) {
            (Some(i), _) => Some(i),
            (None, Some(id)) if is_block(&doc.elements[id].tag) => {
                let end = doc.elements[id].end;
                self.sentences.iter().position(|s| s.start >= end)
            }
            (None, Some(id)) => {
                let start = doc.elements[id].start;
                self.sentences.iter().position(|s| s.end > start)
            }
            (None, None) => self
                .sentences
                .iter()
                .position(|s| s.end > region.span.start),
        }?;
        let last = (first + n_sentences.max(1)).min(self.sentences.len()) - 1;
        let text = self.fragment(self.sentences[first].start..self.sentences[last].end)?;
        Some((Rule::NSentences, text))
    }
}

pub fn find_regions(
    page: &Page,
    term: &str,
    patterns: &PatternSet,
    config: &ExtractorConfig,
    tokenizer: &dyn Tokenizer,
) -> Vec<Region> {
    PageView::new(page, tokenizer).find_regions(term, patterns, config)
}

/// `region` must come from [`find_regions`] on the same page.
pub fn extract_fragment(
    page: &Page,
    term: &str,
    region: &Region,
    n_sentences: usize,
    tokenizer: &dyn Tokenizer,
) -> Result<Candidate> {
    PageView::new(page, tokenizer).extract_fragment(term, region, n_sentences)
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ExtractionStats {
    pub regions: usize,
    pub empty_regions: usize,
    pub duplicates: usize,
}

fn extract_page(
    page: &Page,
    term: &str,
    patterns: &PatternSet,
    config: &ExtractorConfig,
    tokenizer: &dyn Tokenizer,
) -> (Vec<Candidate>, usize, usize) {
    let view = PageView::new(page, tokenizer);
    let regions = view.find_regions(term, patterns, config);
    let mut out = Vec::new();
    let mut empty = 0;
    for region in &regions {
        match view.extract_fragment(term, region, config.n_sentences) {
            Ok(c) => out.push(c),
            Err(_) => empty += 1,
        }
    }
    (out, regions.len(), empty)
}

/// Extracts from every page, keeping rank order and dropping repeated texts
/// (the lowest-ranked occurrence wins).
pub fn extract_all_with_stats(
    pages: &[Page],
    term: &str,
    patterns: &PatternSet,
    config: &ExtractorConfig,
    tokenizer: &dyn Tokenizer,
) -> (Vec<Candidate>, ExtractionStats) {
    let mut ordered: Vec<&Page> = pages.iter().collect();
    ordered.sort_by_key(|p| p.rank);
    let per_page: Vec<_> = ordered
        .par_iter()
        .map(|p| extract_page(p, term, patterns, config, tokenizer))
        .collect();

    let mut stats = ExtractionStats::default();
    let mut seen = HashSet::new();
    let mut candidates = Vec::new();
    for (found, regions, empty) in per_page {
        stats.regions += regions;
        stats.empty_regions += empty;
        for mut c in found {
            c.text = c.text.split_whitespace().collect::<Vec<_>>().join(" ");
            if seen.insert(c.text.clone()) {
                candidates.push(c);
            } else {
                stats.duplicates += 1;
            }
        }
    }
    (candidates, stats)
}

pub fn extract_all(
    pages: &[Page],
    term: &str,
    patterns: &PatternSet,
    config: &ExtractorConfig,
    tokenizer: &dyn Tokenizer,
) -> Vec<Candidate> {
    extract_all_with_stats(pages, term, patterns, config, tokenizer).0
}

//! Page ingestion.
//!
//! Pages come from a [`SearchClient`]. The only client shipped here reads a
//! stored page corpus: JSON lines of `{"url": .., "rank": .., "html": ..}`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::html::{default_discardable, normalize_html, strip_tags};

pub const DEFAULT_MAX_PAGES: usize = 1000;

/// One retrieved web page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    pub url: String,
    /// 1-based result position.
    pub rank: u32,
    pub raw_html: String,
    /// Normalized markup; empty until [`normalize`] runs.
    pub normalized_text: String,
}

impl Page {
    pub fn new(url: impl Into<String>, rank: u32, raw_html: impl Into<String>) -> Self {
        Page {
            url: url.into(),
            rank,
            raw_html: raw_html.into(),
            normalized_text: String::new(),
        }
    }

    /// Markup to analyse: normalized when available, raw otherwise.
    pub fn markup(&self) -> &str {
        if self.normalized_text.is_empty() {
            &self.raw_html
        } else {
            &self.normalized_text
        }
    }
}

/// Standardizes the page format. Tags outside `discardable` are preserved.
pub fn normalize(page: &Page, discardable: &BTreeSet<String>) -> Result<Page> {
    if page.raw_html.trim().is_empty() {
        return Err(Error::EmptyPage {
            url: page.url.clone(),
        });
    }
    let source = page.markup();
    Ok(Page {
        normalized_text: normalize_html(source, discardable),
        ..page.clone()
    })
}

/// Case-folded substring test against the tag-stripped text of `html`.
pub fn contains_term(html: &str, term: &str) -> bool {
    strip_tags(html)
        .to_lowercase()
        .contains(&term.trim().to_lowercase())
}

/// Search result before fetching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageStub {
    pub url: String,
    pub rank: u32,
}

/// A source of pages for a query term.
pub trait SearchClient {
    /// Results in rank order, at most `max_results` of them. No query expansion.
    fn search(&self, term: &str, max_results: usize) -> Result<Vec<PageStub>>;

    fn fetch(&self, stub: &PageStub) -> Result<String>;
}

/// Line of the page-corpus format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub url: String,
    pub rank: u32,
    pub html: String,
}

/// Serves pages from stored corpus files.
#[derive(Debug, Default)]
pub struct FileSearchClient {
    records: Vec<CorpusRecord>,
    record_errors: Vec<Error>,
}

impl FileSearchClient {
    /// Reads a corpus file, or every `*.jsonl` file of a directory in name
    /// order. Malformed lines are collected, not fatal.
    pub fn open(source: &Path) -> Result<Self> {
        let files = corpus_files(source)?;
        let mut client = FileSearchClient::default();
        for file in files {
            let content = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            for (idx, line) in content.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match parse_record(line) {
                    Ok(record) => client.records.push(record),
                    Err(message) => client.record_errors.push(Error::Record {
                        path: file.clone(),
                        line: idx + 1,
                        message,
                    }),
                }
            }
        }
        // Stable: equal ranks keep file order.
        client.records.sort_by_key(|r| r.rank);
        Ok(client)
    }

    pub fn from_records(mut records: Vec<CorpusRecord>) -> Self {
        records.sort_by_key(|r| r.rank);
        FileSearchClient {
            records,
            record_errors: Vec::new(),
        }
    }

    pub fn records(&self) -> &[CorpusRecord] {
        &self.records
    }

    pub fn take_record_errors(&mut self) -> Vec<Error> {
        std::mem::take(&mut self.record_errors)
    }
}

fn parse_record(line: &str) -> std::result::Result<CorpusRecord, String> {
    let record: CorpusRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if record.rank == 0 {
        return Err("rank must be >= 1".into());
    }
    Ok(record)
}

fn corpus_files(source: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(source).map_err(|e| Error::io(source, e))?;
    if !meta.is_dir() {
        return Ok(vec![source.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(source)
        .map_err(|e| Error::io(source, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

impl SearchClient for FileSearchClient {
    fn search(&self, _term: &str, max_results: usize) -> Result<Vec<PageStub>> {
        Ok(self
            .records
            .iter()
            .take(max_results)
            .map(|r| PageStub {
                url: r.url.clone(),
                rank: r.rank,
            })
            .collect())
    }

    fn fetch(&self, stub: &PageStub) -> Result<String> {
        self.records
            .iter()
            .find(|r| r.rank == stub.rank && r.url == stub.url)
            .map(|r| r.html.clone())
            .ok_or_else(|| Error::NotFound(stub.url.clone()))
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub max_pages: usize,
    pub discardable: BTreeSet<String>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            max_pages: DEFAULT_MAX_PAGES,
            discardable: default_discardable(),
        }
    }
}

#[derive(Debug, Default)]
pub struct IngestReport {
    /// Normalized pages containing the term, rank ascending.
    pub pages: Vec<Page>,
    /// Pages whose text lacks the term.
    pub dropped: usize,
    /// Per-record problems; ingestion continued past each of them.
    pub errors: Vec<Error>,
}

/// Fetches, normalizes and filters the pages a client returns for `term`.
pub fn retrieve(
    client: &dyn SearchClient,
    term: &str,
    options: &IngestOptions,
) -> Result<IngestReport> {
    let mut report = IngestReport::default();
    for stub in client.search(term, options.max_pages)? {
        let html = match client.fetch(&stub) {
            Ok(html) => html,
            Err(e) => {
                report.errors.push(e);
                continue;
            }
        };
        let page = match normalize(&Page::new(stub.url, stub.rank, html), &options.discardable) {
            Ok(page) => page,
            Err(e) => {
                report.errors.push(e);
                continue;
            }
        };
        if contains_term(&page.normalized_text, term) {
            report.pages.push(page);
        } else {
            report.dropped += 1;
        }
    }
    report.pages.sort_by_key(|p| p.rank);
    Ok(report)
}

/// Loads pages for `term` from a stored corpus file or directory.
pub fn ingest(source: &Path, term: &str, options: &IngestOptions) -> Result<IngestReport> {
    let mut client = FileSearchClient::open(source)?;
    let record_errors = client.take_record_errors();
    let mut report = retrieve(&client, term, options)?;
    let mut errors = record_errors;
    errors.append(&mut report.errors);
    report.errors = errors;
    Ok(report)
}

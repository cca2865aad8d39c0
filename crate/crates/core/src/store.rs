//! Encyclopedia store: one JSON record per line, one line per term, sorted by
//! term. Writes rewrite the whole file through a temporary sibling and a
//! rename, so readers never see a partial store.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{ErrorKind, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::organizer::{EncyclopediaEntry, EntryItem};

pub const FORMAT: &str = "encyclogen.entry";
pub const RANK_BUCKET: u32 = 50;

#[derive(Serialize, Deserialize)]
struct Record {
    format: String,
    version: u32,
    #[serde(flatten)]
    entry: EncyclopediaEntry,
}

#[derive(Debug, Clone)]
pub struct EncyclopediaStore {
    path: PathBuf,
}

impl EncyclopediaStore {
    /// No I/O happens until the store is read or written.
    pub fn new(path: impl Into<PathBuf>) -> Self {
        EncyclopediaStore { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// All entries in term order. A missing file is an error.
    pub fn entries(&self) -> Result<Vec<EncyclopediaEntry>> {
        let text = fs::read_to_string(&self.path).map_err(|e| Error::io(&self.path, e))?;
        parse_entries(&self.path, &text)
    }

    fn entries_or_empty(&self) -> Result<Vec<EncyclopediaEntry>> {
        match fs::read_to_string(&self.path) {
            Ok(text) => parse_entries(&self.path, &text),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(Vec::new()),
            Err(e) => Err(Error::io(&self.path, e)),
        }
    }

    pub fn terms(&self) -> Result<Vec<String>> {
        Ok(self.entries()?.into_iter().map(|e| e.term).collect())
    }

    pub fn load_entry(&self, term: &str) -> Result<EncyclopediaEntry> {
        self.entries()?
            .into_iter()
            .find(|e| e.term == term)
            .ok_or_else(|| Error::NotFound(term.to_string()))
    }

    /// Inserts or replaces the entry for its term.
    pub fn save_entry(&self, entry: &EncyclopediaEntry) -> Result<()> {
        self.save_entries(std::slice::from_ref(entry))
    }

    pub fn save_entries(&self, entries: &[EncyclopediaEntry]) -> Result<()> {
        let mut all: BTreeMap<String, EncyclopediaEntry> = self
            .entries_or_empty()?
            .into_iter()
            .map(|e| (e.term.clone(), e))
            .collect();
        for e in entries {
            all.insert(e.term.clone(), e.clone());
        }
        let mut out = String::new();
        for entry in all.into_values() {
            let record = Record {
                format: FORMAT.into(),
                version: 1,
                entry,
            };
            out.push_str(&serde_json::to_string(&record).expect("entry serializes"));
            out.push('\n');
        }
        write_atomically(&self.path, out.as_bytes())
    }
}

fn parse_entries(path: &Path, text: &str) -> Result<Vec<EncyclopediaEntry>> {
    let mut entries = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(line).map_err(|e| Error::Record {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        if record.format != FORMAT || record.version != 1 {
            return Err(Error::Record {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("unsupported record {} v{}", record.format, record.version),
            });
        }
        entries.push(record.entry);
    }
    Ok(entries)
}

pub(crate) fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Descriptions of several stores, merged per term. Lookup ignores case.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    terms: BTreeMap<String, Vec<(String, String)>>,
}

impl KnowledgeBase {
    pub fn from_entries<'a>(entries: impl IntoIterator<Item = &'a EncyclopediaEntry>) -> Self {
        let mut kb = KnowledgeBase::default();
        for entry in entries {
            let slot = kb.terms.entry(entry.term.to_lowercase()).or_default();
            for (domain, item) in entry.items() {
                let pair = (domain.to_string(), item.text.clone());
                if !slot.contains(&pair) {
                    slot.push(pair);
                }
            }
        }
        kb
    }

    pub fn from_stores(stores: &[EncyclopediaStore]) -> Result<Self> {
        let mut entries = Vec::new();
        for s in stores {
            entries.extend(s.entries()?);
        }
        Ok(Self::from_entries(&entries))
    }

    /// Union of both bases; descriptions of `self` come first.
    pub fn merged(&self, other: &KnowledgeBase) -> KnowledgeBase {
        let mut out = self.clone();
        for (term, pairs) in &other.terms {
            let slot = out.terms.entry(term.clone()).or_default();
            for p in pairs {
                if !slot.contains(p) {
                    slot.push(p.clone());
                }
            }
        }
        out
    }

    /// Description texts for `term`, optionally restricted to `domains`.
    pub fn descriptions(&self, term: &str, domains: Option<&[String]>) -> Vec<&str> {
        self.terms
            .get(&term.trim().to_lowercase())
            .map(|v| {
                v.iter()
                    .filter(|(d, _)| domains.is_none_or(|ds| ds.contains(d)))
                    .map(|(_, t)| t.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankBucket {
    /// Inclusive rank range.
    pub from: u32,
    pub to: u32,
    /// Distinct source pages in this range that contributed a description.
    pub pages: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainCount {
    pub domain: String,
    pub descriptions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoreStats {
    pub terms: usize,
    pub terms_with_descriptions: usize,
    pub descriptions: usize,
    pub rank_histogram: Vec<RankBucket>,
    /// Sorted by count, descending; ties by name.
    pub domains: Vec<DomainCount>,
}

impl StoreStats {
    pub fn mean_per_described_term(&self) -> f64 {
        if self.terms_with_descriptions == 0 {
            0.0
        } else {
            self.descriptions as f64 / self.terms_with_descriptions as f64
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "terms: {} ({} with descriptions)",
            self.terms, self.terms_with_descriptions
        );
        let _ = writeln!(
            s,
            "descriptions: {} ({:.2} per described term)",
            self.descriptions,
            self.mean_per_described_term()
        );
        let _ = writeln!(s, "source ranks (buckets of {RANK_BUCKET}):");
        for b in &self.rank_histogram {
            let _ = writeln!(
                s,
                "  {:>5}-{:<5} {:>5} {}",
                b.from,
                b.to,
                b.pages,
                "#".repeat(b.pages.min(60))
            );
        }
        let _ = writeln!(s, "domains:");
        for d in &self.domains {
            let _ = writeln!(s, "  {:<24} {:>5}", d.domain, d.descriptions);
        }
        s
    }
}

/// Rank and domain distributions over a set of entries.
pub fn stats(entries: &[EncyclopediaEntry]) -> StoreStats {
    let mut pages: BTreeMap<u32, std::collections::BTreeSet<(&str, &str)>> = BTreeMap::new();
    let mut domains: BTreeMap<&str, usize> = BTreeMap::new();
    let mut descriptions = 0;
    for entry in entries {
        for (domain, EntryItem { url, rank, .. }) in entry.items() {
            descriptions += 1;
            *domains.entry(domain).or_default() += 1;
            pages
                .entry((rank.max(&1) - 1) / RANK_BUCKET)
                .or_default()
                .insert((entry.term.as_str(), url.as_str()));
        }
    }
    let last = pages.keys().next_back().copied();
    let rank_histogram = match last {
        None => Vec::new(),
        Some(last) => (0..=last)
            .map(|b| RankBucket {
                from: b * RANK_BUCKET + 1,
                to: (b + 1) * RANK_BUCKET,
                pages: pages.get(&b).map_or(0, |s| s.len()),
            })
            .collect(),
    };
    let mut domains: Vec<DomainCount> = domains
        .into_iter()
        .map(|(d, n)| DomainCount {
            domain: d.to_string(),
            descriptions: n,
        })
        .collect();
    domains.sort_by(|a, b| {
        b.descriptions
            .cmp(&a.descriptions)
            .then(a.domain.cmp(&b.domain))
    });
    StoreStats {
        terms: entries.len(),
        terms_with_descriptions: entries.iter().filter(|e| !e.is_empty()).count(),
        descriptions,
        rank_histogram,
        domains,
    }
}

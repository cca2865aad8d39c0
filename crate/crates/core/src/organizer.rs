//! Organization of extracted descriptions by domain.
//!
//! Each (description, domain) pair gets the combined log score
//! `ln score(c|d) + ln P(d)`; the constant domain prior is left out because it
//! does not change any comparison. A description's scores are then normalized
//! across domains into weights. The best `k` descriptions per domain are
//! taken and those whose weight falls below the threshold are discarded.
//! Related domains and their descriptions come out of one pass, so the
//! domains of a term need not be known beforehand.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domainmodel::DomainModel;
use crate::extractor::Candidate;
use crate::langmodel::TrigramModel;
use crate::tokenizer::Tokenizer;

pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrganizeParams {
    pub threshold: f64,
    pub top_k: usize,
}

impl Default for OrganizeParams {
    fn default() -> Self {
        OrganizeParams {
            threshold: DEFAULT_THRESHOLD,
            top_k: DEFAULT_TOP_K,
        }
    }
}

/// Model outputs for one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScores {
    pub candidate: Candidate,
    /// Domain-model score per domain, in model order.
    pub domain_scores: Vec<(String, f64)>,
    /// Length-normalized log description score.
    pub description_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDescription {
    pub candidate: Candidate,
    pub domain: String,
    pub log_combined: f64,
    /// Share of this domain in the candidate's combined scores, in [0, 1].
    pub domain_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryItem {
    pub text: String,
    pub log_combined: f64,
    pub url: String,
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGroup {
    pub domain: String,
    /// Best first; never empty.
    pub descriptions: Vec<EntryItem>,
}

/// The organized descriptions of one term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncyclopediaEntry {
    pub term: String,
    pub domains: Vec<DomainGroup>,
}

impl EncyclopediaEntry {
    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn description_count(&self) -> usize {
        self.domains.iter().map(|g| g.descriptions.len()).sum()
    }

    /// `(domain, item)` pairs in group order.
    pub fn items(&self) -> impl Iterator<Item = (&str, &EntryItem)> {
        self.domains
            .iter()
            .flat_map(|g| g.descriptions.iter().map(move |d| (g.domain.as_str(), d)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrganizeStatus {
    Organized,
    /// Every candidate or pair was discarded.
    NoSurvivors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    UnscorableDomain,
    UnscorableDescription,
    ZeroDomainScore,
    BelowThreshold,
    BeyondTopK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub url: String,
    pub rank: u32,
    pub text: String,
    /// Absent for candidates dropped before domain scoring.
    pub domain: Option<String>,
    pub domain_weight: Option<f64>,
    pub reason: DropReason,
}

/// What was discarded for one term, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditLog {
    pub term: String,
    pub status: OrganizeStatus,
    pub candidates: usize,
    pub dropped: Vec<AuditRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Organized {
    pub entry: EncyclopediaEntry,
    pub status: OrganizeStatus,
    /// Every retained (description, domain) pair, entry order.
    pub retained: Vec<ScoredDescription>,
    pub audit: AuditLog,
}

fn audit_for(
    c: &Candidate,
    domain: Option<&str>,
    weight: Option<f64>,
    reason: DropReason,
) -> AuditRecord {
    AuditRecord {
        url: c.source_url.clone(),
        rank: c.source_rank,
        text: c.text.clone(),
        domain: domain.map(str::to_string),
        domain_weight: weight,
        reason,
    }
}

/// Runs both models over the candidates. Candidates either model cannot
/// score are returned as audit records.
pub fn score_candidates(
    term: &str,
    candidates: &[Candidate],
    domain_model: &DomainModel,
    description_model: &TrigramModel,
    tokenizer: &dyn Tokenizer,
) -> (Vec<CandidateScores>, Vec<AuditRecord>) {
    let results: Vec<Result<CandidateScores, AuditRecord>> = candidates
        .par_iter()
        .map(|c| {
            let posterior = domain_model.domain_posterior(&c.text, tokenizer);
            if posterior.unscorable {
                return Err(audit_for(c, None, None, DropReason::UnscorableDomain));
            }
            match description_model.score_description(&c.text, term, tokenizer) {
                Ok(s) if s.is_finite() => Ok(CandidateScores {
                    candidate: c.clone(),
                    domain_scores: posterior.scores,
                    description_score: s,
                }),
                _ => Err(audit_for(c, None, None, DropReason::UnscorableDescription)),
            }
        })
        .collect();
    let mut scored = Vec::new();
    let mut dropped = Vec::new();
    for r in results {
        match r {
            Ok(s) => scored.push(s),
            Err(a) => dropped.push(a),
        }
    }
    (scored, dropped)
}

/// Combined log scores and across-domain weights for one candidate. Domains
/// with a zero domain-model score are left out.
pub fn combine(scores: &CandidateScores) -> Vec<ScoredDescription> {
    let logs: Vec<(&str, f64)> = scores
        .domain_scores
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .map(|(d, s)| (d.as_str(), s.ln() + scores.description_score))
        .collect();
    let max = logs
        .iter()
        .map(|(_, l)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = logs.iter().map(|(_, l)| (l - max).exp()).sum();
    logs.into_iter()
        .map(|(d, l)| ScoredDescription {
            candidate: scores.candidate.clone(),
            domain: d.to_string(),
            log_combined: l,
            domain_weight: ((l - max).exp() / norm).clamp(0.0, 1.0),
        })
        .collect()
}

/// Descending score; ties by source rank, then url, then text.
fn rank_order(a: &ScoredDescription, b: &ScoredDescription) -> Ordering {
    b.log_combined
        .total_cmp(&a.log_combined)
        .then(a.candidate.source_rank.cmp(&b.candidate.source_rank))
        .then_with(|| a.candidate.source_url.cmp(&b.candidate.source_url))
        .then_with(|| a.candidate.text.cmp(&b.candidate.text))
}

/// Keeps the top `k` descriptions per domain, then discards those whose
/// domain weight is below the threshold.
pub fn select(
    term: &str,
    scored: &[CandidateScores],
    params: &OrganizeParams,
    mut dropped: Vec<AuditRecord>,
) -> Organized {
    let candidates = scored.len() + dropped.len();
    let mut domain_order: Vec<String> = Vec::new();
    let mut per_domain: Vec<Vec<ScoredDescription>> = Vec::new();
    for s in scored {
        for (d, score) in &s.domain_scores {
            if !domain_order.contains(d) {
                domain_order.push(d.clone());
                per_domain.push(Vec::new());
            }
            if *score <= 0.0 {
                dropped.push(audit_for(
                    &s.candidate,
                    Some(d),
                    Some(0.0),
                    DropReason::ZeroDomainScore,
                ));
            }
        }
        for pair in combine(s) {
            let slot = domain_order
                .iter()
                .position(|d| *d == pair.domain)
                .expect("domain registered");
            per_domain[slot].push(pair);
        }
    }

    let mut groups = Vec::new();
    let mut retained = Vec::new();
    for (domain, mut pairs) in domain_order.into_iter().zip(per_domain) {
        pairs.sort_by(rank_order);
        for extra in pairs.drain(params.top_k.min(pairs.len())..) {
            dropped.push(audit_for(
                &extra.candidate,
                Some(&extra.domain),
                Some(extra.domain_weight),
                DropReason::BeyondTopK,
            ));
        }
        // Thresholding after the cut keeps the output monotone in the
        // threshold: a discarded pair never frees a slot for another.
        let (kept, weak): (Vec<_>, Vec<_>) = pairs
            .into_iter()
            .partition(|p| p.domain_weight >= params.threshold);
        let pairs = kept;
        for w in weak {
            dropped.push(audit_for(
                &w.candidate,
                Some(&w.domain),
                Some(w.domain_weight),
                DropReason::BelowThreshold,
            ));
        }
        if pairs.is_empty() {
            continue;
        }
        groups.push(DomainGroup {
            domain,
            descriptions: pairs
                .iter()
                .map(|p| EntryItem {
                    text: p.candidate.text.clone(),
                    log_combined: p.log_combined,
                    url: p.candidate.source_url.clone(),
                    rank: p.candidate.source_rank,
                })
                .collect(),
        });
        retained.extend(pairs);
    }

    dropped.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then_with(|| a.url.cmp(&b.url))
            .then_with(|| a.text.cmp(&b.text))
            .then_with(|| a.domain.cmp(&b.domain))
    });
    let status = if groups.is_empty() {
        OrganizeStatus::NoSurvivors
    } else {
        OrganizeStatus::Organized
    };
    Organized {
        entry: EncyclopediaEntry {
            term: term.to_string(),
            domains: groups,
        },
        status,
        retained,
        audit: AuditLog {
            term: term.to_string(),
            status,
            candidates,
            dropped,
        },
    }
}

/// Scores, thresholds and selects descriptions for `term`.
pub fn organize(
    term: &str,
    candidates: &[Candidate],
    domain_model: &DomainModel,
    description_model: &TrigramModel,
    tokenizer: &dyn Tokenizer,
    params: &OrganizeParams,
) -> Organized {
    let (scored, dropped) =
        score_candidates(term, candidates, domain_model, description_model, tokenizer);
    select(term, &scored, params, dropped)
}

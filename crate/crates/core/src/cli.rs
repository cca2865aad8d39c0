//! Command-line front end.
//!
//! Settings resolve in order: defaults, `--config` file, `ENCYCLOGEN_*`
//! environment variables, flags. Exit status: 0 success, 2 configuration
//! error, 3 data error, 4 empty result, 5 term not found.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::corpus::{ingest, IngestOptions};
use crate::domainmodel::{DomainLexicon, DomainModel};
use crate::error::{Error, Result};
use crate::extractor::{extract_all_with_stats, ExtractorConfig};
use crate::langmodel::{ReferenceCorpus, TrigramModel};
use crate::organizer::{EncyclopediaEntry, OrganizeStatus};
use crate::pipeline::{load_patterns, Pipeline};
use crate::qa::{self, AnswerOptions, Fallback};
use crate::store::{self, EncyclopediaStore, KnowledgeBase};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_EMPTY: i32 = 4;
pub const EXIT_NOT_FOUND: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "encyclogen",
    version,
    about = "Build and query an encyclopedia of term descriptions mined from web pages"
)]
pub struct Cli {
    #[command(flatten)]
    pub settings: Settings,
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for the configuration file; each also reads `ENCYCLOGEN_<NAME>`.
#[derive(Debug, Args)]
pub struct Settings {
    /// TOML configuration file
    #[arg(long, global = true, env = "ENCYCLOGEN_CONFIG")]
    pub config: Option<PathBuf>,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
    /// Page corpus: JSONL file or directory of *.jsonl files
    #[arg(long, global = true, env = "ENCYCLOGEN_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Domain lexicon, one `term<TAB>domain` per line
    #[arg(long, global = true, env = "ENCYCLOGEN_LEXICON")]
    pub lexicon: Option<PathBuf>,
    /// Reference corpus of headword/body articles (JSONL)
    #[arg(long, global = true, env = "ENCYCLOGEN_REFERENCE")]
    pub reference: Option<PathBuf>,
    /// Pattern file [default: bundled English reconstruction]
    #[arg(long, global = true, env = "ENCYCLOGEN_PATTERNS")]
    pub patterns: Option<PathBuf>,
    /// Encyclopedia store; repeat for `qa`
    #[arg(long, global = true, env = "ENCYCLOGEN_STORE")]
    pub store: Vec<PathBuf>,
    /// Saved domain model [default: train from --lexicon]
    #[arg(long, global = true, env = "ENCYCLOGEN_DOMAIN_MODEL")]
    pub domain_model: Option<PathBuf>,
    /// Saved description model [default: train from --reference]
    #[arg(long, global = true, env = "ENCYCLOGEN_DESCRIPTION_MODEL")]
    pub description_model: Option<PathBuf>,
    /// Pages kept per term, best ranks first [default: 1000]
    #[arg(long, global = true, env = "ENCYCLOGEN_MAX_PAGES")]
    pub max_pages: Option<usize>,
    /// Sentences taken when no layout rule applies [default: 3]
    #[arg(long, global = true, env = "ENCYCLOGEN_N_SENTENCES")]
    pub n_sentences: Option<usize>,
    /// Minimum domain weight of a kept description [default: 0.05]
    #[arg(long, global = true, env = "ENCYCLOGEN_THRESHOLD")]
    pub threshold: Option<f64>,
    /// Descriptions kept per domain [default: 3]
    #[arg(long, global = true, env = "ENCYCLOGEN_TOP_K")]
    pub top_k: Option<usize>,
    /// BM25 term-frequency saturation [default: 1.2]
    #[arg(long, global = true, env = "ENCYCLOGEN_K1")]
    pub k1: Option<f64>,
    /// BM25 length normalization [default: 0.75]
    #[arg(long, global = true, env = "ENCYCLOGEN_B")]
    pub b: Option<f64>,
    /// Seed of the random answer fallback [default: 7]
    #[arg(long, global = true, env = "ENCYCLOGEN_SEED")]
    pub seed: Option<u64>,
    /// `unicode-default` or `external:<command>` [default: unicode-default]
    #[arg(long, global = true, env = "ENCYCLOGEN_TOKENIZER")]
    pub tokenizer: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, normalize and filter the pages of a term
    Ingest {
        #[arg(long)]
        term: String,
        /// Write the normalized pages here as JSONL
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the domain model from the lexicon and save it
    TrainDomain {
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the description model from the reference corpus and save it
    TrainLm {
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the candidate descriptions of a term
    Extract {
        #[arg(long)]
        term: String,
    },
    /// Ingest, extract, organize and store entries for terms
    Generate {
        /// Repeatable
        #[arg(long, required_unless_present = "terms_file")]
        term: Vec<String>,
        /// One term per line
        #[arg(long)]
        terms_file: Option<PathBuf>,
        /// Write dropped candidates and pairs here as JSONL
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Source-rank and domain distributions of a store
    Stats,
    /// Answer a question file against one or more stores
    Qa {
        #[arg(long)]
        questions: PathBuf,
        /// Use only descriptions of these domains (comma separated)
        #[arg(long, value_delimiter = ',')]
        domains: Vec<String>,
        /// Which run the per-question answers come from
        #[arg(long, value_enum, default_value_t = FallbackArg::None)]
        fallback: FallbackArg,
        /// Also print per-question answers for the union of all stores
        #[arg(long)]
        answers: bool,
    },
    /// Print the stored entry of a term
    Query { term: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FallbackArg {
    None,
    Random,
}

impl Settings {
    /// Config file, then every override that was given.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = PipelineConfig::load(self.config.as_deref())?;
        let p = &mut c.paths;
        let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
            if v.is_some() {
                slot.clone_from(v);
            }
        };
        set(&mut p.corpus, &self.corpus);
        set(&mut p.lexicon, &self.lexicon);
        set(&mut p.reference, &self.reference);
        set(&mut p.patterns, &self.patterns);
        set(&mut p.domain_model, &self.domain_model);
        set(&mut p.description_model, &self.description_model);
        if let Some(s) = self.store.last() {
            p.store = Some(s.clone());
        }
        c.max_pages = self.max_pages.unwrap_or(c.max_pages);
        c.n_sentences = self.n_sentences.unwrap_or(c.n_sentences);
        c.threshold = self.threshold.unwrap_or(c.threshold);
        c.top_k = self.top_k.unwrap_or(c.top_k);
        c.k1 = self.k1.unwrap_or(c.k1);
        c.b = self.b.unwrap_or(c.b);
        c.seed = self.seed.unwrap_or(c.seed);
        if let Some(t) = &self.tokenizer {
            c.tokenizer = t.clone();
        }
        c.validate()?;
        Ok(c)
    }

    /// Stores named on the command line, else the configured one.
    fn stores(&self, config: &PipelineConfig) -> Result<Vec<PathBuf>> {
        if !self.store.is_empty() {
            return Ok(self.store.clone());
        }
        Ok(vec![config
            .require("store", &config.paths.store)?
            .to_path_buf()])
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::TokenizerMismatch { .. } | Error::Tokenizer(_) => EXIT_CONFIG,
        Error::NotFound(_) => EXIT_NOT_FOUND,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_CONFIG
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(out: &mut dyn Write, json: bool, value: &impl Serialize, text: &str) -> Result<()> {
    let res = if json {
        writeln!(
            out,
            "{}",
            serde_json::to_string(value).expect("report serializes")
        )
    } else {
        out.write_all(text.as_bytes())
    };
    res.map_err(|e| Error::io("<stdout>", e))
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let s = &cli.settings;
    let config = s.resolve()?;
    let json = s.json;
    match &cli.command {
        Command::Ingest { term, out: dest } => {
            let corpus = config.require("corpus", &config.paths.corpus)?;
            let opts = IngestOptions {
                max_pages: config.max_pages,
                ..IngestOptions::default()
            };
            let report = ingest(corpus, term, &opts)?;
            if let Some(dest) = dest {
                let mut body = String::new();
                for p in &report.pages {
                    body.push_str(&serde_json::to_string(p).expect("page serializes"));
                    body.push('\n');
                }
                store::write_atomically(dest, body.as_bytes())?;
            }
            #[derive(Serialize)]
            struct Summary<'a> {
                term: &'a str,
                pages: Vec<(u32, &'a str)>,
                without_term: usize,
                errors: Vec<String>,
            }
            let summary = Summary {
                term,
                pages: report
                    .pages
                    .iter()
                    .map(|p| (p.rank, p.url.as_str()))
                    .collect(),
                without_term: report.dropped,
                errors: report.errors.iter().map(ToString::to_string).collect(),
            };
            let mut text = format!(
                "{term}: {} pages kept, {} without the term, {} errors\n",
                report.pages.len(),
                report.dropped,
                report.errors.len()
            );
            for (rank, url) in &summary.pages {
                let _ = writeln!(text, "  {rank:>4}  {url}");
            }
            for e in &summary.errors {
                let _ = writeln!(text, "  error: {e}");
            }
            emit(out, json, &summary, &text)?;
            Ok(if report.pages.is_empty() {
                EXIT_EMPTY
            } else {
                EXIT_OK
            })
        }
        Command::TrainDomain { out: dest } => {
            let tok = config.tokenizer_spec()?.build()?;
            let lex = DomainLexicon::load(config.require("lexicon", &config.paths.lexicon)?)?;
            let model = DomainModel::train(&lex, tok.as_ref())?;
            model.save(dest)?;
            #[derive(Serialize)]
            struct Summary<'a> {
                domains: &'a [String],
                entries: usize,
                vocabulary: usize,
            }
            let summary = Summary {
                domains: model.domains(),
                entries: lex.entries().len(),
                vocabulary: model.vocabulary().count(),
            };
            let text = format!(
                "domain model: {} domains, {} lexicon entries, {} words -> {}\n",
                summary.domains.len(),
                summary.entries,
                summary.vocabulary,
                dest.display()
            );
            emit(out, json, &summary, &text)?;
            Ok(EXIT_OK)
        }
        Command::TrainLm { out: dest } => {
            let tok = config.tokenizer_spec()?.build()?;
            let refs =
                ReferenceCorpus::load(config.require("reference", &config.paths.reference)?)?;
            let model = TrigramModel::train(&refs, tok.as_ref())?;
            model.save(dest)?;
            #[derive(Serialize)]
            struct Summary {
                articles: usize,
                vocabulary: usize,
                trigrams: usize,
            }
            let summary = Summary {
                articles: refs.articles().len(),
                vocabulary: model.vocab_size(),
                trigrams: model.trigram_table().len(),
            };
            let text = format!(
                "description model: {} articles, {} symbols, {} trigram types -> {}\n",
                summary.articles,
                summary.vocabulary,
                summary.trigrams,
                dest.display()
            );
            emit(out, json, &summary, &text)?;
            Ok(EXIT_OK)
        }
        Command::Extract { term } => {
            let tok = config.tokenizer_spec()?.build()?;
            let corpus = config.require("corpus", &config.paths.corpus)?;
            let opts = IngestOptions {
                max_pages: config.max_pages,
                ..IngestOptions::default()
            };
            let report = ingest(corpus, term, &opts)?;
            let patterns = load_patterns(&config)?;
            let ext = ExtractorConfig {
                n_sentences: config.n_sentences,
                ..ExtractorConfig::default()
            };
            let (candidates, stats) =
                extract_all_with_stats(&report.pages, term, &patterns, &ext, tok.as_ref());
            let mut text = String::new();
            for c in &candidates {
                let _ = writeln!(
                    text,
                    "#{} {} [{:?}/{:?}]\n  {}",
                    c.source_rank, c.source_url, c.rule, c.trigger, c.text
                );
            }
            let _ = writeln!(
                text,
                "{} candidates from {} regions ({} empty, {} duplicates)",
                candidates.len(),
                stats.regions,
                stats.empty_regions,
                stats.duplicates
            );
            emit(out, json, &candidates, &text)?;
            Ok(if candidates.is_empty() {
                EXIT_EMPTY
            } else {
                EXIT_OK
            })
        }
        Command::Generate {
            term,
            terms_file,
            audit,
        } => {
            let store_path = config.require("store", &config.paths.store)?.to_path_buf();
            let corpus = config
                .require("corpus", &config.paths.corpus)?
                .to_path_buf();
            let mut terms = term.clone();
            if let Some(f) = terms_file {
                let text = std::fs::read_to_string(f).map_err(|e| Error::io(f, e))?;
                terms.extend(
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(String::from),
                );
            }
            let pipeline = Pipeline::from_config(&config)?;
            let mut entries = Vec::new();
            let mut audits = String::new();
            let mut any = false;
            for t in &terms {
                let run = pipeline.run_term(&corpus, t)?;
                any |= run.organized.status == OrganizeStatus::Organized;
                audits.push_str(
                    &serde_json::to_string(&run.organized.audit).expect("audit serializes"),
                );
                audits.push('\n');
                #[derive(Serialize)]
                struct Record<'a> {
                    entry: &'a EncyclopediaEntry,
                    status: OrganizeStatus,
                    counts: &'a crate::pipeline::TermCounts,
                }
                let record = Record {
                    entry: &run.organized.entry,
                    status: run.organized.status,
                    counts: &run.counts,
                };
                let c = &run.counts;
                let text = format!(
                    "{}  ({} pages, {} candidates, {} dropped)\n",
                    render_entry(&run.organized.entry).trim_end(),
                    c.pages,
                    c.candidates,
                    run.organized.audit.dropped.len()
                );
                emit(out, json, &record, &text)?;
                entries.push(run.organized.entry);
            }
            EncyclopediaStore::new(&store_path).save_entries(&entries)?;
            if let Some(a) = audit {
                store::write_atomically(a, audits.as_bytes())?;
            }
            Ok(if any { EXIT_OK } else { EXIT_EMPTY })
        }
        Command::Stats => {
            let mut entries = Vec::new();
            for p in s.stores(&config)? {
                entries.extend(EncyclopediaStore::new(p).entries()?);
            }
            let stats = store::stats(&entries);
            emit(out, json, &stats, &stats.render())?;
            Ok(if stats.descriptions == 0 {
                EXIT_EMPTY
            } else {
                EXIT_OK
            })
        }
        Command::Qa {
            questions,
            domains,
            fallback,
            answers,
        } => {
            let tok = config.tokenizer_spec()?.build()?;
            let qs = qa::load_questions(questions)?;
            let mut resources = Vec::new();
            for p in s.stores(&config)? {
                let kb = KnowledgeBase::from_stores(&[EncyclopediaStore::new(&p)])?;
                resources.push((store_label(&p), kb));
            }
            let domains = (!domains.is_empty()).then(|| domains.clone());
            let report = qa::report(
                &qs,
                &resources,
                domains.clone(),
                config.seed,
                config.okapi(),
                tok.as_ref(),
            )?;
            emit(out, json, &report, &report.render())?;
            if *answers {
                let union = resources
                    .iter()
                    .fold(KnowledgeBase::default(), |acc, (_, kb)| acc.merged(kb));
                let opts = AnswerOptions {
                    domains,
                    fallback: match fallback {
                        FallbackArg::None => Fallback::None,
                        FallbackArg::Random => Fallback::Random { seed: config.seed },
                    },
                    okapi: config.okapi(),
                };
                let result = qa::evaluate(&qs, &union, &opts, tok.as_ref())?;
                let mut text = String::new();
                for o in &result.outcomes {
                    let chosen = o.chosen.map_or("-".to_string(), |c| c.to_string());
                    let mark = match (o.answered, o.correct) {
                        (false, _) => "abstain",
                        (true, true) => "correct",
                        (true, false) => "wrong",
                    };
                    let via = if o.fallback { " (random)" } else { "" };
                    let _ = writeln!(text, "{:<12} {chosen:>2} {mark}{via}", o.id);
                }
                emit(out, json, &result, &text)?;
            }
            Ok(EXIT_OK)
        }
        Command::Query { term } => {
            let [path] = s
                .stores(&config)?
                .try_into()
                .map_err(|_| Error::Config("query takes a single --store".into()))?;
            let entry = EncyclopediaStore::new(path).load_entry(term)?;
            emit(out, json, &entry, &render_entry(&entry))?;
            Ok(if entry.is_empty() {
                EXIT_EMPTY
            } else {
                EXIT_OK
            })
        }
    }
}

fn store_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Human-readable entry grouped by domain.
pub fn render_entry(entry: &EncyclopediaEntry) -> String {
    let mut s = format!("{}\n", entry.term);
    if entry.is_empty() {
        s.push_str("  (no descriptions)\n");
    }
    for g in &entry.domains {
        let _ = writeln!(s, "  [{}]", g.domain);
        for (i, d) in g.descriptions.iter().enumerate() {
            let _ = writeln!(s, "    {}. {}", i + 1, d.text);
            let _ = writeln!(
                s,
                "       score {:.4}, rank {}, {}",
                d.log_combined, d.rank, d.url
            );
        }
    }
    s
}

//! Word tokenization and sentence segmentation shared by every statistical
//! component.
//!
//! A single [`Tokenizer`] is configured per pipeline run. Trained models record
//! the tokenizer's [`fingerprint`](Tokenizer::fingerprint) so that statistics
//! built with one tokenizer are never scored with another.

use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

pub trait Tokenizer: Send + Sync {
    /// Ordered word tokens of `text`, punctuation dropped.
    fn tokenize(&self, text: &str) -> Vec<String>;

    /// Byte ranges of the sentences in `text`, trimmed of surrounding whitespace.
    fn sentence_spans(&self, text: &str) -> Vec<Range<usize>> {
        sentence_spans(text)
    }

    fn segment(&self, text: &str) -> Vec<String> {
        self.sentence_spans(text)
            .into_iter()
            .map(|r| text[r].to_string())
            .collect()
    }

    /// Stable identifier written into model files.
    fn fingerprint(&self) -> String;
}

/// Unicode word-boundary tokenizer with lowercase folding.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnicodeTokenizer;

impl Tokenizer for UnicodeTokenizer {
    fn tokenize(&self, text: &str) -> Vec<String> {
        text.unicode_words().map(|w| w.to_lowercase()).collect()
    }

    fn fingerprint(&self) -> String {
        "unicode-default/v1".to_string()
    }
}

fn is_ascii_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

// Ideographic terminators end a sentence even without trailing whitespace.
fn is_wide_terminal(c: char) -> bool {
    matches!(c, '。' | '！' | '？')
}

/// Splits on `.`, `!`, `?` followed by whitespace or end of text, and on
/// `。`, `！`, `？` unconditionally. A trailing fragment without a terminator is
/// its own sentence.
///
/// Abbreviations such as "e.g." end a sentence under this rule.
pub fn sentence_spans(text: &str) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let end = i + c.len_utf8();
        let boundary = if is_wide_terminal(c) {
            true
        } else if is_ascii_terminal(c) {
            chars.peek().is_none_or(|&(_, next)| next.is_whitespace())
        } else {
            false
        };
        if boundary {
            push_trimmed(text, start..end, &mut spans);
            start = end;
        }
    }
    push_trimmed(text, start..text.len(), &mut spans);
    spans
}

fn push_trimmed(text: &str, range: Range<usize>, spans: &mut Vec<Range<usize>>) {
    let slice = &text[range.clone()];
    let lead = slice.len() - slice.trim_start().len();
    let trail = slice.len() - slice.trim_end().len();
    if lead + trail < slice.len() {
        spans.push(range.start + lead..range.end - trail);
    }
}

/// Tokenizer backed by an external process.
///
/// The process receives one line of text per call on stdin and must answer
/// with one line of whitespace-separated tokens on stdout. Sentence
/// segmentation stays rule-based.
pub struct ExternalTokenizer {
    command: String,
    io: Mutex<ExternalIo>,
}

struct ExternalIo {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ExternalTokenizer {
    pub fn spawn(command: &str) -> Result<Self> {
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::Config("empty external tokenizer command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Tokenizer(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let tokenizer = ExternalTokenizer {
            command: command.to_string(),
            io: Mutex::new(ExternalIo {
                child,
                stdin,
                stdout,
            }),
        };
        tokenizer.request("probe")?;
        Ok(tokenizer)
    }

    fn request(&self, text: &str) -> Result<Vec<String>> {
        let mut io = self.io.lock().unwrap_or_else(|p| p.into_inner());
        let line: String = text
            .chars()
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        writeln!(io.stdin, "{line}")
            .and_then(|_| io.stdin.flush())
            .map_err(|e| Error::Tokenizer(format!("write to `{}`: {e}", self.command)))?;
        let mut reply = String::new();
        let n = io
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::Tokenizer(format!("read from `{}`: {e}", self.command)))?;
        if n == 0 {
            return Err(Error::Tokenizer(format!(
                "`{}` closed its output",
                self.command
            )));
        }
        Ok(reply.split_whitespace().map(str::to_string).collect())
    }
}

impl Tokenizer for ExternalTokenizer {
    /// # Panics
    ///
    /// Panics if the external process stops answering after a successful spawn.
    fn tokenize(&self, text: &str) -> Vec<String> {
        match self.request(text) {
            Ok(tokens) => tokens,
            Err(e) => panic!("{e}"),
        }
    }

    fn fingerprint(&self) -> String {
        format!("external:{}", self.command)
    }
}

impl Drop for ExternalTokenizer {
    fn drop(&mut self) {
        if let Ok(io) = self.io.get_mut() {
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}

/// The `tokenizer` configuration value.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TokenizerSpec {
    #[default]
    UnicodeDefault,
    External(String),
}

impl TokenizerSpec {
    pub fn build(&self) -> Result<Arc<dyn Tokenizer>> {
        Ok(match self {
            TokenizerSpec::UnicodeDefault => Arc::new(UnicodeTokenizer),
            TokenizerSpec::External(cmd) => Arc::new(ExternalTokenizer::spawn(cmd)?),
        })
    }
}

impl FromStr for TokenizerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unicode-default" => Ok(TokenizerSpec::UnicodeDefault),
            other => match other.strip_prefix("external:") {
                Some(cmd) if !cmd.trim().is_empty() => {
                    Ok(TokenizerSpec::External(cmd.trim().to_string()))
                }
                _ => Err(Error::Config(format!(
                    "tokenizer must be `unicode-default` or `external:<command>`, got `{other}`"
                ))),
            },
        }
    }
}

impl std::fmt::Display for TokenizerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TokenizerSpec::UnicodeDefault => f.write_str("unicode-default"),
            TokenizerSpec::External(cmd) => write!(f, "external:{cmd}"),
        }
    }
}

/// Returns an error when a model file was built with a different tokenizer.
pub fn check_fingerprint(
    path: &std::path::Path,
    tokenizer: &dyn Tokenizer,
    recorded: &str,
) -> Result<()> {
    let expected = tokenizer.fingerprint();
    if expected == recorded {
        Ok(())
    } else {
        Err(Error::TokenizerMismatch {
            path: path.to_path_buf(),
            expected,
            found: recorded.to_string(),
        })
    }
}

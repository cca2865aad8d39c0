//! Minimal tolerant HTML handling.
//!
//! Two passes live here. [`normalize_html`] standardizes raw markup while
//! keeping the layout tags the extractor needs. [`Document::parse`] flattens
//! markup into tag-stripped text plus the byte span each element covers in
//! that text, so every extracted fragment is a slice of [`Document::text`].

use std::collections::BTreeSet;
use std::ops::Range;

/// Name used in discardable-tag sets for `<!-- ... -->` comments.
pub const COMMENT: &str = "comment";

pub fn default_discardable() -> BTreeSet<String> {
    ["script", "style", COMMENT]
        .into_iter()
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token<'a> {
    Text(&'a str),
    Open {
        name: String,
        raw: &'a str,
        self_closing: bool,
    },
    Close {
        name: String,
        raw: &'a str,
    },
    Comment(&'a str),
    /// Doctype, processing instruction, CDATA.
    Other(&'a str),
}

fn lex(html: &str) -> Vec<Token<'_>> {
    let bytes = html.as_bytes();
    let mut out = Vec::new();
    let mut text_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        let Some((token, end)) = lex_markup(html, i) else {
            i += 1;
            continue;
        };
        if text_start < i {
            out.push(Token::Text(&html[text_start..i]));
        }
        out.push(token);
        i = end;
        text_start = end;
    }
    if text_start < html.len() {
        out.push(Token::Text(&html[text_start..]));
    }
    out
}

/// Lexes the markup starting at `at` (which holds `<`). Returns `None` when
/// the `<` is literal text.
fn lex_markup(html: &str, at: usize) -> Option<(Token<'_>, usize)> {
    let rest = &html[at..];
    if let Some(body) = rest.strip_prefix("<!--") {
        let end = body.find("-->").map_or(html.len(), |p| at + 4 + p + 3);
        return Some((Token::Comment(&html[at..end]), end));
    }
    let b = rest.as_bytes();
    if b.len() < 2 {
        return None;
    }
    if b[1] == b'!' || b[1] == b'?' {
        let end = rest.find('>').map_or(html.len(), |p| at + p + 1);
        return Some((Token::Other(&html[at..end]), end));
    }
    let closing = b[1] == b'/';
    let name_start = if closing { 2 } else { 1 };
    if !b.get(name_start).is_some_and(u8::is_ascii_alphabetic) {
        return None;
    }
    let mut j = name_start;
    while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'-' || b[j] == b':') {
        j += 1;
    }
    let name = rest[name_start..j].to_ascii_lowercase();
    // Skip attributes, honouring quotes.
    let mut quote: Option<u8> = None;
    while j < b.len() {
        match (quote, b[j]) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, b'"') | (None, b'\'') => quote = Some(b[j]),
            (None, b'>') => break,
            _ => {}
        }
        j += 1;
    }
    let end = (j + 1).min(b.len());
    let raw = &html[at..at + end];
    let token = if closing {
        Token::Close { name, raw }
    } else {
        let self_closing = raw.ends_with("/>");
        Token::Open {
            name,
            raw,
            self_closing,
        }
    };
    Some((token, at + end))
}

fn collapse_whitespace(s: &str, out: &mut String) {
    for c in s.chars() {
        if c.is_whitespace() {
            if !out.is_empty() && !out.ends_with(' ') {
                out.push(' ');
            }
        } else {
            out.push(c);
        }
    }
}

/// Removes discardable elements (with their content), newline codes and
/// redundant whitespace. Every other tag is kept verbatim apart from
/// whitespace inside it.
///
/// The result is a fixed point: normalizing it again changes nothing.
pub fn normalize_html(raw: &str, discardable: &BTreeSet<String>) -> String {
    let tokens = lex(raw);
    let mut out = String::with_capacity(raw.len());
    let mut skip_until: Option<String> = None;
    for token in tokens {
        if let Some(name) = &skip_until {
            if matches!(&token, Token::Close { name: n, .. } if n == name) {
                skip_until = None;
            }
            continue;
        }
        match token {
            Token::Text(t) => collapse_whitespace(t, &mut out),
            Token::Comment(c) => {
                if !discardable.contains(COMMENT) {
                    collapse_whitespace(c, &mut out);
                }
            }
            Token::Open {
                name,
                raw,
                self_closing,
            } => {
                if discardable.contains(&name) {
                    if !self_closing {
                        skip_until = Some(name);
                    }
                } else {
                    collapse_whitespace(raw, &mut out);
                }
            }
            Token::Close { name, raw } => {
                if !discardable.contains(&name) {
                    collapse_whitespace(raw, &mut out);
                }
            }
            Token::Other(o) => collapse_whitespace(o, &mut out),
        }
    }
    let trimmed = out.trim_end().len();
    out.truncate(trimmed);
    out
}

/// Tag-stripped text of `html`, as produced by [`Document::parse`].
pub fn strip_tags(html: &str) -> String {
    Document::parse(html).text
}

const BLOCK_TAGS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "body",
    "br",
    "caption",
    "center",
    "dd",
    "div",
    "dl",
    "dt",
    "fieldset",
    "figcaption",
    "figure",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "h7",
    "h8",
    "h9",
    "head",
    "header",
    "hr",
    "html",
    "li",
    "main",
    "nav",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "tbody",
    "td",
    "tfoot",
    "th",
    "thead",
    "title",
    "tr",
    "ul",
];

/// Block elements that only group other blocks; skipped when looking for the
/// block that immediately follows a region.
const CONTAINER_TAGS: &[&str] = &[
    "article", "aside", "body", "center", "div", "dl", "fieldset", "figure", "footer", "form",
    "header", "html", "main", "nav", "section", "table", "tbody", "tfoot", "thead", "tr",
];

const VOID_TAGS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

const RAW_TEXT_TAGS: &[&str] = &["script", "style", "textarea"];

pub fn is_block(tag: &str) -> bool {
    BLOCK_TAGS.contains(&tag)
}

pub fn is_container(tag: &str) -> bool {
    CONTAINER_TAGS.contains(&tag)
}

/// One element of a parsed document. `start..end` is its extent in
/// [`Document::text`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub tag: String,
    pub start: usize,
    pub end: usize,
    pub parent: Option<usize>,
}

impl Element {
    pub fn span(&self) -> Range<usize> {
        self.start..self.end
    }
}

/// Flattened view of an HTML page.
#[derive(Debug, Clone, Default)]
pub struct Document {
    /// Tag-stripped text with whitespace collapsed to single spaces.
    pub text: String,
    /// Elements in opening order; a parent always precedes its children.
    pub elements: Vec<Element>,
    /// Text ranges delimited by block boundaries, in document order.
    pub chunks: Vec<Range<usize>>,
}

struct Builder {
    text: String,
    pending_space: bool,
    elements: Vec<Element>,
    stack: Vec<usize>,
    breaks: Vec<usize>,
}

impl Builder {
    fn push_text(&mut self, s: &str) {
        for c in s.chars() {
            if c.is_whitespace() {
                self.pending_space = true;
            } else {
                if self.pending_space && !self.text.is_empty() {
                    self.text.push(' ');
                }
                self.pending_space = false;
                self.text.push(c);
            }
        }
    }

    fn block_break(&mut self) {
        self.pending_space = true;
        if self.breaks.last() != Some(&self.text.len()) {
            self.breaks.push(self.text.len());
        }
    }

    fn open(&mut self, tag: &str) {
        let block = is_block(tag);
        if block {
            self.block_break();
        }
        let id = self.elements.len();
        self.elements.push(Element {
            tag: tag.to_string(),
            start: self.text.len(),
            end: self.text.len(),
            parent: self.stack.last().copied(),
        });
        self.stack.push(id);
    }

    fn close_top(&mut self) {
        if let Some(id) = self.stack.pop() {
            self.elements[id].end = self.text.len();
            if is_block(&self.elements[id].tag) {
                self.block_break();
            }
        }
    }

    fn close(&mut self, tag: &str) {
        if let Some(pos) = self
            .stack
            .iter()
            .rposition(|&id| self.elements[id].tag == tag)
        {
            while self.stack.len() > pos {
                self.close_top();
            }
        }
    }

    /// Index in the stack of the innermost open `tag`, provided no element
    /// from `barriers` sits between it and the top.
    fn open_within(&self, tag: &str, barriers: &[&str]) -> Option<usize> {
        for (pos, &id) in self.stack.iter().enumerate().rev() {
            let t = self.elements[id].tag.as_str();
            if t == tag {
                return Some(pos);
            }
            if barriers.contains(&t) {
                return None;
            }
        }
        None
    }

    fn implicit_closes(&mut self, tag: &str) {
        let pos = match tag {
            "li" => self.open_within("li", &["ul", "ol"]),
            "dt" | "dd" => self
                .open_within("dt", &["dl"])
                .max(self.open_within("dd", &["dl"])),
            t if is_block(t) && !matches!(t, "br" | "hr") => {
                self.open_within("p", &["div", "li", "td", "th", "dd", "blockquote"])
            }
            _ => None,
        };
        if let Some(pos) = pos {
            while self.stack.len() > pos {
                self.close_top();
            }
        }
    }
}

impl Document {
    pub fn parse(html: &str) -> Document {
        let mut b = Builder {
            text: String::with_capacity(html.len()),
            pending_space: false,
            elements: Vec::new(),
            stack: Vec::new(),
            breaks: vec![0],
        };
        let mut raw_text: Option<String> = None;
        for token in lex(html) {
            if let Some(name) = &raw_text {
                if matches!(&token, Token::Close { name: n, .. } if n == name) {
                    raw_text = None;
                    b.close(&token_name(&token));
                }
                continue;
            }
            match token {
                Token::Text(t) => b.push_text(&decode_entities(t)),
                Token::Open {
                    name, self_closing, ..
                } => {
                    b.implicit_closes(&name);
                    if VOID_TAGS.contains(&name.as_str()) || self_closing {
                        if is_block(&name) {
                            b.block_break();
                        } else {
                            b.pending_space = b.pending_space || name == "img";
                        }
                        continue;
                    }
                    b.open(&name);
                    if RAW_TEXT_TAGS.contains(&name.as_str()) {
                        raw_text = Some(name);
                    }
                }
                Token::Close { name, .. } => b.close(&name),
                Token::Comment(_) | Token::Other(_) => {}
            }
        }
        while !b.stack.is_empty() {
            b.close_top();
        }
        let len = b.text.len();
        b.breaks.push(len);
        let mut chunks = Vec::new();
        for w in b.breaks.windows(2) {
            let (s, e) = (w[0], w[1].min(len));
            if s < e && !b.text[s..e].trim().is_empty() {
                chunks.push(s..e);
            }
        }
        Document {
            text: b.text,
            elements: b.elements,
            chunks,
        }
    }

    /// Text of an element with surrounding whitespace removed.
    pub fn element_text(&self, id: usize) -> &str {
        self.text[self.elements[id].span()].trim()
    }

    /// Trimmed sub-range of `range`.
    pub fn trim_range(&self, range: Range<usize>) -> Range<usize> {
        let s = &self.text[range.clone()];
        let lead = s.len() - s.trim_start().len();
        let trail = s.len() - s.trim_end().len();
        if lead + trail >= s.len() {
            range.start..range.start
        } else {
            range.start + lead..range.end - trail
        }
    }

    pub fn ancestors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(id), move |&i| self.elements[i].parent)
    }

    /// Innermost element whose span covers `range`.
    pub fn innermost_covering(&self, range: &Range<usize>) -> Option<usize> {
        // Later elements in opening order are nested deeper when they cover.
        self.elements
            .iter()
            .enumerate()
            .rev()
            .find(|(_, e)| e.start <= range.start && range.end <= e.end && e.start < e.end)
            .map(|(i, _)| i)
    }

    /// First non-container block element that opens at or after `pos` with
    /// only whitespace between `pos` and its start.
    pub fn block_immediately_after(&self, pos: usize) -> Option<usize> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.start >= pos && is_block(&e.tag) && !is_container(&e.tag))
            .find(|&(i, _)| !self.element_text(i).is_empty())
            .filter(|(_, e)| self.text[pos..e.start].trim().is_empty())
            .map(|(i, _)| i)
    }
}

fn token_name(token: &Token<'_>) -> String {
    match token {
        Token::Open { name, .. } | Token::Close { name, .. } => name.clone(),
        _ => String::new(),
    }
}

/// Decodes the common named entities and numeric character references.
pub fn decode_entities(s: &str) -> std::borrow::Cow<'_, str> {
    if !s.contains('&') {
        return std::borrow::Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let decoded = tail.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let entity = &tail[1..semi];
            let c = match entity {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some(' '),
                _ => entity
                    .strip_prefix("#x")
                    .or_else(|| entity.strip_prefix("#X"))
                    .and_then(|h| u32::from_str_radix(h, 16).ok())
                    .or_else(|| entity.strip_prefix('#').and_then(|d| d.parse().ok()))
                    .and_then(char::from_u32),
            };
            c.map(|c| (c, semi + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &tail[len..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    std::borrow::Cow::Owned(out)
}

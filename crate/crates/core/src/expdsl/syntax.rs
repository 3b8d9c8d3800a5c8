//! Line-level grammar: sections, `key = value` entries and comments.

use std::fmt;

/// Position of a problem in the source; line and column are 1-based and
/// count characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        if !self.snippet.is_empty() {
            write!(f, " (at `{}`)", self.snippet)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

pub const SECTIONS: &[&str] = &["system", "electron", "nucleus", "resonator", "sequence", "noise", "sweep", "output"];
pub const REPEATABLE: &[&str] = &["nucleus", "output"];

/// A piece of source text with the position of its first character.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span<'a> {
    pub text: &'a str,
    pub line: usize,
    pub column: usize,
}

impl<'a> Span<'a> {
    /// Sub-span of byte range `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Span<'a> {
        Span { text: &self.text[start..end], line: self.line, column: self.column + self.text[..start].chars().count() }
    }

    pub fn trim(&self) -> Span<'a> {
        let lead = self.text.len() - self.text.trim_start().len();
        let s = self.slice(lead, self.text.len());
        let len = s.text.trim_end().len();
        s.slice(0, len)
    }

    /// Comma-separated items, trimmed.
    pub fn split(&self, sep: char) -> Vec<Span<'a>> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, c) in self.text.char_indices() {
            if c == sep {
                out.push(self.slice(start, i).trim());
                start = i + c.len_utf8();
            }
        }
        out.push(self.slice(start, self.text.len()).trim());
        out
    }

    /// Split once at the first occurrence of `pat`.
    pub fn split_once(&self, pat: &str) -> Option<(Span<'a>, Span<'a>)> {
        let i = self.text.find(pat)?;
        Some((self.slice(0, i).trim(), self.slice(i + pat.len(), self.text.len()).trim()))
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { line: self.line, column: self.column, message: message.into(), snippet: self.text.to_string() }
    }

    /// Error pointing `offset` characters into the span.
    pub fn error_at(&self, offset: usize, message: impl Into<String>) -> ParseError {
        let snippet: String = self.text.chars().skip(offset).collect();
        ParseError { line: self.line, column: self.column + offset, message: message.into(), snippet }
    }
}

#[derive(Debug, Clone)]
pub struct Entry<'a> {
    pub key: Span<'a>,
    pub value: Span<'a>,
}

#[derive(Debug, Clone)]
pub struct Section<'a> {
    pub name: &'a str,
    pub header: Span<'a>,
    pub entries: Vec<Entry<'a>>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Split the source into sections. Every malformed line yields exactly one
/// error; entries under a rejected header are skipped.
pub fn parse_document(source: &str) -> (Vec<Section<'_>>, Vec<ParseError>) {
    let mut sections: Vec<Section> = Vec::new();
    let mut errors = Vec::new();
    // false while inside a rejected section
    let mut accepting = true;
    for (idx, raw) in source.lines().enumerate() {
        let full = Span { text: raw, line: idx + 1, column: 1 };
        let content = match raw.find('#') {
            Some(i) => full.slice(0, i),
            None => full,
        };
        let line = content.trim();
        if line.text.is_empty() {
            continue;
        }
        if line.text.starts_with('[') {
            if !line.text.ends_with(']') || line.text.len() < 2 {
                errors.push(line.error("section header must be `[name]`"));
                accepting = false;
                continue;
            }
            let name = line.slice(1, line.text.len() - 1).trim();
            if !SECTIONS.contains(&name.text) {
                errors.push(name.error(format!(
                    "unknown section `{}`; valid sections are {}",
                    name.text,
                    SECTIONS.join(", ")
                )));
                accepting = false;
                continue;
            }
            if !REPEATABLE.contains(&name.text) && sections.iter().any(|s| s.name == name.text) {
                errors.push(name.error(format!("section [{}] appears more than once", name.text)));
                accepting = false;
                continue;
            }
            sections.push(Section { name: name.text, header: line, entries: Vec::new() });
            accepting = true;
            continue;
        }
        let Some(eq) = line.text.find('=') else {
            errors.push(line.error("expected `key = value`"));
            continue;
        };
        let key = line.slice(0, eq).trim();
        let value = line.slice(eq + 1, line.text.len()).trim();
        if !is_ident(key.text) {
            errors.push(key.error(format!("invalid key `{}`", key.text)));
            continue;
        }
        if value.text.is_empty() {
            errors.push(line.error_at(eq + 1, format!("missing value for `{}`", key.text)));
            continue;
        }
        if !accepting {
            continue;
        }
        let Some(section) = sections.last_mut() else {
            errors.push(key.error("entry before the first section header"));
            continue;
        };
        if section.entries.iter().any(|e| e.key.text == key.text) {
            errors.push(key.error(format!("duplicate key `{}` in [{}]", key.text, section.name)));
            continue;
        }
        section.entries.push(Entry { key, value });
    }
    (sections, errors)
}

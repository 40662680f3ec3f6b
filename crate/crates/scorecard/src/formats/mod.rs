//! Plain-text artifact formats.
//!
//! Characteristic and model files are `key = value` lines grouped under
//! `[section]` headers, `#` starting a comment line. Floats are written
//! with 17 significant digits so every value reads back bit-identically.

pub mod characteristics;
pub mod model;
pub mod series;
pub mod tables;

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    pub fn new(line: usize, message: impl fmt::Display) -> Self {
        Self { line, message: message.to_string() }
    }
}

pub type FormatResult<T> = Result<T, FormatError>;

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> FormatResult<&Entry> {
        self.entries
            .iter()
            .find(|e| e.key == key)
            .ok_or_else(|| FormatError::new(self.line, format!("[{}] lacks `{key}`", self.name)))
    }

    pub fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }
}

/// Splits `text` into the entries before the first header (named "") and
/// the `[section]` blocks.
pub fn parse_sections(text: &str) -> FormatResult<Vec<Section>> {
    let mut out = vec![Section::default()];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            out.push(Section { name: name.trim().to_string(), line, entries: Vec::new() });
            continue;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| FormatError::new(line, "expected `key = value`"))?;
        out.last_mut().expect("non-empty").entries.push(Entry {
            line,
            key: k.trim().to_string(),
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

/// Exact decimal form of `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_f64(s: &str, line: usize) -> FormatResult<f64> {
    s.parse::<f64>().map_err(|_| FormatError::new(line, format!("not a number: `{s}`")))
}

pub fn parse_u64(s: &str, line: usize) -> FormatResult<u64> {
    s.parse::<u64>().map_err(|_| FormatError::new(line, format!("not a count: `{s}`")))
}

/// Percent-escapes bytes outside a conservative token alphabet.
pub fn escape_token(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"._-|*+/:()'".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

pub fn unescape_token(s: &str, line: usize) -> FormatResult<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s.get(i + 1..i + 3).ok_or_else(|| FormatError::new(line, format!("bad escape in `{s}`")))?;
            out.push(u8::from_str_radix(hex, 16).map_err(|_| FormatError::new(line, format!("bad escape in `{s}`")))?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| FormatError::new(line, format!("escape in `{s}` is not UTF-8")))
}

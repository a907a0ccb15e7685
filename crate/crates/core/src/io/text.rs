//! Line-oriented `key = value` documents with `[section]` headers.
//!
//! Blank lines and lines starting with `#` are skipped. Keys appearing
//! before the first header belong to the unnamed root section. Keys and
//! section names may repeat only across different sections.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::FormatError;

/// Where a value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(k) => write!(f, "override {k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub origin: Origin,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub sections: Vec<Section>,
}

fn parse_err(origin: &Origin, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { at: origin.to_string(), msg: msg.into() }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-')
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut doc = Document::default();
        let mut current = String::new();
        for (n, raw) in text.lines().enumerate() {
            let origin = Origin::Line(n + 1);
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|s| valid_name(s))
                    .ok_or_else(|| parse_err(&origin, format!("malformed section header {line:?}")))?;
                if doc.section(name).is_some() {
                    return Err(parse_err(&origin, format!("duplicate section [{name}]")));
                }
                doc.sections.push(Section { name: name.into(), origin, entries: Vec::new() });
                current = name.into();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(&origin, format!("expected `key = value`, found {line:?}")))?;
            let key = key.trim();
            if !valid_name(key) {
                return Err(parse_err(&origin, format!("invalid key {key:?}")));
            }
            let section = doc.section_mut_or_insert(&current, &origin);
            if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
                return Err(parse_err(&origin, format!("duplicate key {key:?} (first set on {})", prev.origin)));
            }
            section.entries.push(Entry { key: key.into(), value: value.trim().into(), origin });
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    fn section_mut_or_insert(&mut self, name: &str, origin: &Origin) -> &mut Section {
        let pos = match self.sections.iter().position(|s| s.name == name) {
            Some(p) => p,
            None => {
                self.sections.push(Section { name: name.into(), origin: origin.clone(), entries: Vec::new() });
                self.sections.len() - 1
            }
        };
        &mut self.sections[pos]
    }

    /// Sets `section.key` (split at the last dot) to `value`, replacing
    /// any value read from the file.
    pub fn set_override(&mut self, path: &str, value: &str) -> Result<(), FormatError> {
        let origin = Origin::Override(path.into());
        let (section, key) = path
            .rsplit_once('.')
            .filter(|(s, k)| valid_name(s) && valid_name(k))
            .ok_or_else(|| parse_err(&origin, "expected section.key"))?;
        let s = self.section_mut_or_insert(section, &origin);
        match s.entries.iter_mut().find(|e| e.key == key) {
            Some(e) => {
                e.value = value.trim().into();
                e.origin = origin;
            }
            None => s.entries.push(Entry { key: key.into(), value: value.trim().into(), origin }),
        }
        Ok(())
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.iter().map(|s| s.name.as_str())
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for s in &self.sections {
            if !first {
                writeln!(f)?;
            }
            first = false;
            if !s.name.is_empty() {
                writeln!(f, "[{}]", s.name)?;
            }
            for e in &s.entries {
                writeln!(f, "{} = {}", e.key, e.value)?;
            }
        }
        Ok(())
    }
}

/// Consumes the keys of one section; [`Fields::finish`] rejects leftovers.
pub struct Fields<'a> {
    section: Option<&'a Section>,
    label: String,
    used: BTreeSet<&'a str>,
}

impl<'a> Fields<'a> {
    pub fn new(doc: &'a Document, name: &str) -> Self {
        let label = if name.is_empty() { "top level".to_string() } else { format!("[{name}]") };
        Self { section: doc.section(name), label, used: BTreeSet::new() }
    }

    pub fn exists(&self) -> bool {
        self.section.is_some()
    }

    fn entry(&mut self, key: &'a str) -> Option<&'a Entry> {
        let e = self.section?.entries.iter().find(|e| e.key == key)?;
        self.used.insert(key);
        Some(e)
    }

    pub fn raw(&mut self, key: &'a str) -> Option<(&'a str, &'a Origin)> {
        self.entry(key).map(|e| (e.value.as_str(), &e.origin))
    }

    pub fn required_raw(&mut self, key: &'a str) -> Result<(&'a str, &'a Origin), FormatError> {
        let label = self.label.clone();
        self.raw(key).ok_or_else(|| FormatError::Missing { section: label, key: key.into() })
    }

    pub fn get<T: FromStr>(&mut self, key: &'a str) -> Result<Option<T>, FormatError> {
        match self.raw(key) {
            Some((v, origin)) => parse_value(v, origin, key).map(Some),
            None => Ok(None),
        }
    }

    pub fn required<T: FromStr>(&mut self, key: &'a str) -> Result<T, FormatError> {
        let (v, origin) = self.required_raw(key)?;
        parse_value(v, origin, key)
    }

    /// Overwrites `slot` if the key is present.
    pub fn update<T: FromStr>(&mut self, key: &'a str, slot: &mut T) -> Result<(), FormatError> {
        if let Some(v) = self.get(key)? {
            *slot = v;
        }
        Ok(())
    }

    pub fn list<T: FromStr>(&mut self, key: &'a str) -> Result<Option<Vec<T>>, FormatError> {
        match self.raw(key) {
            Some((v, origin)) => parse_list(v, origin, key).map(Some),
            None => Ok(None),
        }
    }

    pub fn array<T: FromStr + Copy + Default, const N: usize>(
        &mut self,
        key: &'a str,
    ) -> Result<Option<[T; N]>, FormatError> {
        match self.raw(key) {
            Some((v, origin)) => parse_array(v, origin, key).map(Some),
            None => Ok(None),
        }
    }

    /// Errors on the first key that was never read.
    pub fn finish(self) -> Result<(), FormatError> {
        if let Some(s) = self.section {
            if let Some(e) = s.entries.iter().find(|e| !self.used.contains(e.key.as_str())) {
                return Err(parse_err(&e.origin, format!("unknown key {:?} in {}", e.key, self.label)));
            }
        }
        Ok(())
    }
}

pub fn parse_value<T: FromStr>(v: &str, origin: &Origin, key: &str) -> Result<T, FormatError> {
    v.parse().map_err(|_| parse_err(origin, format!("{key}: cannot parse {v:?}")))
}

/// Comma- or whitespace-separated values.
pub fn parse_list<T: FromStr>(v: &str, origin: &Origin, key: &str) -> Result<Vec<T>, FormatError> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(s, origin, key))
        .collect()
}

pub fn parse_array<T: FromStr + Copy + Default, const N: usize>(
    v: &str,
    origin: &Origin,
    key: &str,
) -> Result<[T; N], FormatError> {
    let items: Vec<T> = parse_list(v, origin, key)?;
    if items.len() != N {
        return Err(parse_err(origin, format!("{key}: expected {N} values, found {}", items.len())));
    }
    let mut out = [T::default(); N];
    out.copy_from_slice(&items);
    Ok(out)
}

/// Joins values with `", "` for writing.
pub fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

//! Technology catalog backed by a tab-separated text file.

use std::collections::BTreeSet;
use std::fmt;

use super::{DegreePair, DegreeParseError};

const BUILTIN: &str = include_str!("../../data/technologies.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TechnologyEntry {
    pub name: String,
    pub variant: Option<String>,
    pub degrees: DegreePair,
    pub note: Option<String>,
}

impl fmt::Display for TechnologyEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.variant {
            Some(v) => write!(f, "{} ({})", self.name, v)?,
            None => write!(f, "{}", self.name)?,
        }
        write!(f, ": {}", self.degrees.code())?;
        if let Some(n) = &self.note {
            write!(f, " [{n}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("no technology named `{name}`{}", .variant.as_ref().map(|v| format!(" with variant `{v}`")).unwrap_or_default())]
    NotFound {
        name: String,
        variant: Option<String>,
    },
    #[error("catalog line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    entries: Vec<TechnologyEntry>,
}

impl Catalog {
    /// The catalog shipped with the crate.
    pub fn builtin() -> Catalog {
        Catalog::parse(BUILTIN).expect("bundled technology catalog is well-formed")
    }

    pub fn from_entries(entries: Vec<TechnologyEntry>) -> Result<Catalog, CatalogError> {
        let mut seen = BTreeSet::new();
        for (i, e) in entries.iter().enumerate() {
            let key = (e.name.to_lowercase(), e.variant.clone());
            if !seen.insert(key) {
                return Err(CatalogError::Parse {
                    line: i + 1,
                    message: format!("duplicate entry {}", e),
                });
            }
        }
        Ok(Catalog { entries })
    }

    pub fn parse(text: &str) -> Result<Catalog, CatalogError> {
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let err = |message: String| CatalogError::Parse { line, message };
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() < 4 || cols.len() > 5 {
                return Err(err(format!("expected 4 or 5 tab-separated columns, got {}", cols.len())));
            }
            let name = cols[0].trim();
            if name.is_empty() {
                return Err(err("empty technology name".into()));
            }
            let opt = |s: &str| {
                let s = s.trim();
                (!s.is_empty()).then(|| s.to_string())
            };
            let parse_err = |e: DegreeParseError| err(e.to_string());
            let entry = TechnologyEntry {
                name: name.to_string(),
                variant: opt(cols[1]),
                degrees: DegreePair::new(
                    cols[2].parse().map_err(parse_err)?,
                    cols[3].parse().map_err(parse_err)?,
                ),
                note: cols.get(4).and_then(|s| opt(s)),
            };
            if !seen.insert((entry.name.to_lowercase(), entry.variant.clone())) {
                return Err(err(format!("duplicate entry {entry}")));
            }
            entries.push(entry);
        }
        Ok(Catalog { entries })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                e.name,
                e.variant.as_deref().unwrap_or(""),
                e.degrees.structural.code(),
                e.degrees.behavioral.code(),
                e.note.as_deref().unwrap_or("")
            ));
        }
        out
    }

    pub fn entries(&self) -> &[TechnologyEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Case-insensitive on the name, exact on the variant.
    ///
    /// Without a variant, a name that only exists with variants is not
    /// matched; ask for the variant explicitly.
    pub fn lookup(&self, name: &str, variant: Option<&str>) -> Result<&TechnologyEntry, CatalogError> {
        self.entries
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name.trim()) && e.variant.as_deref() == variant)
            .ok_or_else(|| CatalogError::NotFound {
                name: name.to_string(),
                variant: variant.map(str::to_string),
            })
    }

    /// Entries whose degrees dominate `requirement`, sorted by name then variant.
    pub fn filter(&self, requirement: DegreePair) -> Vec<&TechnologyEntry> {
        let mut out: Vec<&TechnologyEntry> = self
            .entries
            .iter()
            .filter(|e| requirement.is_dominated_by(e.degrees))
            .collect();
        out.sort_by(|a, b| {
            a.name
                .to_lowercase()
                .cmp(&b.name.to_lowercase())
                .then_with(|| a.name.cmp(&b.name))
                .then_with(|| a.variant.cmp(&b.variant))
        });
        out
    }
}

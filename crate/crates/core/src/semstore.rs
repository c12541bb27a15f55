//! Structural knowledge base: controlled terms, glossary, thesaurus,
//! taxonomy and typed triples.
//!
//! All collections are ordered maps/sets so every query answers in
//! lexicographic order. The taxonomy is a DAG (several parents allowed);
//! insertions that would close a cycle are refused.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::{Arc, RwLock};

pub type TermId = String;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Term {
    pub id: TermId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OntologyTriple {
    pub subject: TermId,
    pub relation: TermId,
    pub object: TermId,
}

impl OntologyTriple {
    pub fn new(subject: impl Into<String>, relation: impl Into<String>, object: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            relation: relation.into(),
            object: object.into(),
        }
    }
}

impl fmt::Display for OntologyTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.relation, self.object)
    }
}

/// Triple query; `None` positions are wildcards.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Option<TermId>,
    pub relation: Option<TermId>,
    pub object: Option<TermId>,
}

impl TriplePattern {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn subject(mut self, s: impl Into<String>) -> Self {
        self.subject = Some(s.into());
        self
    }

    pub fn relation(mut self, r: impl Into<String>) -> Self {
        self.relation = Some(r.into());
        self
    }

    pub fn object(mut self, o: impl Into<String>) -> Self {
        self.object = Some(o.into());
        self
    }

    pub fn matches(&self, t: &OntologyTriple) -> bool {
        self.subject.as_ref().is_none_or(|s| *s == t.subject)
            && self.relation.as_ref().is_none_or(|r| *r == t.relation)
            && self.object.as_ref().is_none_or(|o| *o == t.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KbError {
    #[error("term `{0}` is already defined")]
    DuplicateTerm(TermId),
    #[error("unknown term `{0}`")]
    UnknownTerm(TermId),
    #[error("term `{0}` has no description")]
    NoDescription(TermId),
    #[error("term `{0}` already has a description")]
    DuplicateDescription(TermId),
    #[error("taxonomy edge {child} -> {parent} would create a cycle")]
    CycleDetected { child: TermId, parent: TermId },
    #[error("`{alias}` is already an alias of `{existing}`")]
    AliasConflict { alias: TermId, existing: TermId },
    #[error("`{0}` cannot be a synonym of itself")]
    SelfSynonym(TermId),
    #[error("invalid term id `{0}`")]
    InvalidId(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    terms: BTreeMap<TermId, Term>,
    glossary: BTreeMap<TermId, String>,
    // alias -> canonical; canonical terms never appear as keys
    synonyms: BTreeMap<TermId, TermId>,
    taxonomy: BTreeSet<(TermId, TermId)>,
    triples: BTreeSet<OntologyTriple>,
}

fn valid_field(s: &str) -> bool {
    !s.is_empty() && !s.contains(['\t', '\n', '\r'])
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    fn require(&self, id: &str) -> Result<(), KbError> {
        if self.terms.contains_key(id) {
            Ok(())
        } else {
            Err(KbError::UnknownTerm(id.to_string()))
        }
    }

    pub fn define_term(&mut self, id: &str, label: &str) -> Result<(), KbError> {
        if !valid_field(id) || id.trim() != id {
            return Err(KbError::InvalidId(id.to_string()));
        }
        if self.terms.contains_key(id) {
            return Err(KbError::DuplicateTerm(id.to_string()));
        }
        let label = if label.is_empty() { id } else { label };
        self.terms.insert(
            id.to_string(),
            Term {
                id: id.to_string(),
                label: label.to_string(),
            },
        );
        Ok(())
    }

    /// Defines `id` unless it already exists.
    pub fn ensure_term(&mut self, id: &str) -> Result<(), KbError> {
        if self.terms.contains_key(id) {
            return Ok(());
        }
        self.define_term(id, id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.terms.contains_key(id)
    }

    pub fn term(&self, id: &str) -> Option<&Term> {
        self.terms.get(id)
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.terms.values()
    }

    pub fn term_ids(&self) -> Vec<TermId> {
        self.terms.keys().cloned().collect()
    }

    pub fn set_description(&mut self, id: &str, text: &str) -> Result<(), KbError> {
        self.require(id)?;
        if self.glossary.contains_key(id) {
            return Err(KbError::DuplicateDescription(id.to_string()));
        }
        self.glossary.insert(id.to_string(), text.to_string());
        Ok(())
    }

    pub fn describe(&self, id: &str) -> Result<&str, KbError> {
        self.require(id)?;
        self.glossary
            .get(id)
            .map(String::as_str)
            .ok_or_else(|| KbError::NoDescription(id.to_string()))
    }

    /// Records `alias` as a synonym of `canonical`.
    ///
    /// Links are flattened on insertion: a canonical that is itself an alias
    /// is replaced by its own canonical, and aliases that pointed at `alias`
    /// are re-pointed, so lookups never follow chains.
    pub fn add_synonym(&mut self, alias: &str, canonical: &str) -> Result<(), KbError> {
        self.require(alias)?;
        self.require(canonical)?;
        let target = self.canonicalize(canonical)?.to_string();
        if target == alias {
            return Err(KbError::SelfSynonym(alias.to_string()));
        }
        if let Some(existing) = self.synonyms.get(alias) {
            if *existing == target {
                return Ok(());
            }
            return Err(KbError::AliasConflict {
                alias: alias.to_string(),
                existing: existing.clone(),
            });
        }
        for c in self.synonyms.values_mut() {
            if c == alias {
                *c = target.clone();
            }
        }
        self.synonyms.insert(alias.to_string(), target);
        Ok(())
    }

    pub fn canonicalize(&self, id: &str) -> Result<&str, KbError> {
        let (own, _) = self
            .terms
            .get_key_value(id)
            .ok_or_else(|| KbError::UnknownTerm(id.to_string()))?;
        Ok(self.synonyms.get(id).unwrap_or(own))
    }

    pub fn aliases_of(&self, canonical: &str) -> Vec<&str> {
        self.synonyms
            .iter()
            .filter(|(_, c)| c.as_str() == canonical)
            .map(|(a, _)| a.as_str())
            .collect()
    }

    pub fn synonyms(&self) -> impl Iterator<Item = (&str, &str)> {
        self.synonyms.iter().map(|(a, c)| (a.as_str(), c.as_str()))
    }

    pub fn add_taxonomy_edge(&mut self, child: &str, parent: &str) -> Result<(), KbError> {
        self.require(child)?;
        self.require(parent)?;
        if child == parent || self.reaches_taxonomy(parent, child) {
            return Err(KbError::CycleDetected {
                child: child.to_string(),
                parent: parent.to_string(),
            });
        }
        self.taxonomy.insert((child.to_string(), parent.to_string()));
        Ok(())
    }

    pub fn taxonomy_edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.taxonomy.iter().map(|(c, p)| (c.as_str(), p.as_str()))
    }

    pub fn in_taxonomy(&self, id: &str) -> bool {
        self.taxonomy.iter().any(|(c, p)| c == id || p == id)
    }

    pub fn parents(&self, id: &str) -> impl Iterator<Item = &str> {
        let id = id.to_string();
        self.taxonomy
            .range((id.clone(), String::new())..)
            .take_while(move |(c, _)| *c == id)
            .map(|(_, p)| p.as_str())
    }

    fn reaches_taxonomy(&self, from: &str, to: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.parents(n));
            }
        }
        false
    }

    /// Reflexive-transitive is-a test.
    pub fn is_subtype(&self, child: &str, ancestor: &str) -> Result<bool, KbError> {
        self.require(child)?;
        self.require(ancestor)?;
        Ok(self.reaches_taxonomy(child, ancestor))
    }

    pub fn add_triple(&mut self, subject: &str, relation: &str, object: &str) -> Result<(), KbError> {
        self.require(subject)?;
        self.require(relation)?;
        self.require(object)?;
        self.triples.insert(OntologyTriple::new(subject, relation, object));
        Ok(())
    }

    /// Matching triples in (subject, relation, object) order.
    pub fn query_triples(&self, pattern: &TriplePattern) -> Vec<OntologyTriple> {
        self.triples.iter().filter(|t| pattern.matches(t)).cloned().collect()
    }

    /// Transitive closure of the edges labelled `relation`.
    ///
    /// No reflexive pairs are added; `(x, x)` appears only when `x` lies on
    /// a cycle of the relation.
    pub fn transitive_closure(&self, relation: &str) -> Result<BTreeSet<(TermId, TermId)>, KbError> {
        self.require(relation)?;
        let edges = self
            .triples
            .iter()
            .filter(|t| t.relation == relation)
            .map(|t| (t.subject.as_str(), t.object.as_str()));
        Ok(closure_of(edges))
    }

    /// Full scan that every referenced id is a defined term and the
    /// thesaurus and taxonomy invariants hold.
    pub fn check_integrity(&self) -> Result<(), String> {
        let known = |id: &str| -> Result<(), String> {
            if self.terms.contains_key(id) {
                Ok(())
            } else {
                Err(format!("dangling reference `{id}`"))
            }
        };
        for id in self.glossary.keys() {
            known(id)?;
        }
        for (a, c) in &self.synonyms {
            known(a)?;
            known(c)?;
            if self.synonyms.contains_key(c) {
                return Err(format!("alias chain {a} -> {c}"));
            }
        }
        for (c, p) in &self.taxonomy {
            known(c)?;
            known(p)?;
        }
        for t in &self.triples {
            known(&t.subject)?;
            known(&t.relation)?;
            known(&t.object)?;
        }
        for (c, p) in &self.taxonomy {
            if self.reaches_taxonomy(p, c) {
                return Err(format!("taxonomy cycle through {c} -> {p}"));
            }
        }
        Ok(())
    }

    /// Line format: `TERM id label`, `GLOS id text`, `SYN alias canonical`,
    /// `TAX child parent`, `TRIPLE s r o`, tab separated. `#` starts a
    /// comment line.
    pub fn parse(text: &str) -> Result<KnowledgeBase, KbError> {
        let mut kb = KnowledgeBase::new();
        kb.load_lines(text)?;
        Ok(kb)
    }

    pub fn load_lines(&mut self, text: &str) -> Result<(), KbError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            let at = |e: KbError| KbError::Parse {
                line,
                message: e.to_string(),
            };
            let arity = |n: usize| {
                if cols.len() == n {
                    Ok(())
                } else {
                    Err(KbError::Parse {
                        line,
                        message: format!("{} expects {} fields, got {}", cols[0], n - 1, cols.len() - 1),
                    })
                }
            };
            match cols[0] {
                "TERM" => {
                    if cols.len() == 2 {
                        self.define_term(cols[1], cols[1]).map_err(at)?;
                    } else {
                        arity(3)?;
                        self.define_term(cols[1], cols[2]).map_err(at)?;
                    }
                }
                "GLOS" => {
                    arity(3)?;
                    self.set_description(cols[1], cols[2]).map_err(at)?;
                }
                "SYN" => {
                    arity(3)?;
                    self.add_synonym(cols[1], cols[2]).map_err(at)?;
                }
                "TAX" => {
                    arity(3)?;
                    self.add_taxonomy_edge(cols[1], cols[2]).map_err(at)?;
                }
                "TRIPLE" => {
                    arity(4)?;
                    self.add_triple(cols[1], cols[2], cols[3]).map_err(at)?;
                }
                other => {
                    return Err(KbError::Parse {
                        line,
                        message: format!("unknown record kind `{other}`"),
                    })
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in self.terms.values() {
            out.push_str(&format!("TERM\t{}\t{}\n", t.id, t.label));
        }
        for (id, d) in &self.glossary {
            out.push_str(&format!("GLOS\t{id}\t{d}\n"));
        }
        for (a, c) in &self.synonyms {
            out.push_str(&format!("SYN\t{a}\t{c}\n"));
        }
        for (c, p) in &self.taxonomy {
            out.push_str(&format!("TAX\t{c}\t{p}\n"));
        }
        for t in &self.triples {
            out.push_str(&format!("TRIPLE\t{}\t{}\t{}\n", t.subject, t.relation, t.object));
        }
        out
    }

    pub fn snapshot(&self) -> Arc<KnowledgeBase> {
        Arc::new(self.clone())
    }
}

/// Transitive closure of an arbitrary edge list via repeated BFS.
pub fn closure_of<'a>(edges: impl IntoIterator<Item = (&'a str, &'a str)>) -> BTreeSet<(TermId, TermId)> {
    let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (s, o) in edges {
        adj.entry(s).or_default().insert(o);
    }
    let mut out = BTreeSet::new();
    for &start in adj.keys() {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&str> = adj[start].iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            if !seen.insert(n) {
                continue;
            }
            out.insert((start.to_string(), n.to_string()));
            if let Some(next) = adj.get(n) {
                queue.extend(next.iter().copied());
            }
        }
    }
    out
}

/// Reader-writer wrapper handed to concurrent services.
#[derive(Debug, Clone, Default)]
pub struct SharedKnowledgeBase(Arc<RwLock<KnowledgeBase>>);

impl SharedKnowledgeBase {
    pub fn new(kb: KnowledgeBase) -> Self {
        Self(Arc::new(RwLock::new(kb)))
    }

    pub fn read<R>(&self, f: impl FnOnce(&KnowledgeBase) -> R) -> R {
        f(&self.0.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn write<R>(&self, f: impl FnOnce(&mut KnowledgeBase) -> R) -> R {
        f(&mut self.0.write().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn snapshot(&self) -> Arc<KnowledgeBase> {
        self.read(KnowledgeBase::snapshot)
    }
}

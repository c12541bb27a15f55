//! Two-axis semantic-degree lattice.
//!
//! A [`DegreePair`] places a modelling approach on a structural axis
//! (repository up to ontology) and a behavioral axis (plain data up to an
//! integrated simulation model). Pairs are ordered componentwise, which makes
//! the set of all 42 pairs a finite lattice with [`DegreePair::join`] as its
//! least upper bound.

mod catalog;
mod rules;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

pub use catalog::{Catalog, CatalogError, TechnologyEntry};
pub use rules::{advise, rule, rules, Advice, Answer, Answers, Rule, RuleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StructuralDegree {
    Repository,
    Terminology,
    Glossary,
    Thesaurus,
    Taxonomy,
    Ontology,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BehavioralDegree {
    Data,
    Information,
    Constraints,
    FiniteAutomata,
    PetriNets,
    ProgrammingLanguage,
    IntegratedSimulationModel,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid degree code `{0}`")]
pub struct DegreeParseError(pub String);

impl StructuralDegree {
    pub const ALL: [StructuralDegree; 6] = [
        Self::Repository,
        Self::Terminology,
        Self::Glossary,
        Self::Thesaurus,
        Self::Taxonomy,
        Self::Ontology,
    ];

    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn code(self) -> &'static str {
        ["S0", "S1", "S2", "S3", "S4", "S5"][self as usize]
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Repository => "Repository",
            Self::Terminology => "Terminology",
            Self::Glossary => "Glossary",
            Self::Thesaurus => "Thesaurus",
            Self::Taxonomy => "Taxonomy",
            Self::Ontology => "Ontology",
        }
    }
}

impl BehavioralDegree {
    pub const ALL: [BehavioralDegree; 7] = [
        Self::Data,
        Self::Information,
        Self::Constraints,
        Self::FiniteAutomata,
        Self::PetriNets,
        Self::ProgrammingLanguage,
        Self::IntegratedSimulationModel,
    ];

    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn code(self) -> &'static str {
        ["B0", "B1", "B2", "B3", "B4", "B5", "B6"][self as usize]
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Data => "Data",
            Self::Information => "Information",
            Self::Constraints => "Constraints",
            Self::FiniteAutomata => "Finite automata",
            Self::PetriNets => "Petri nets",
            Self::ProgrammingLanguage => "Programming language",
            Self::IntegratedSimulationModel => "Integrated simulation model",
        }
    }
}

impl FromStr for StructuralDegree {
    type Err = DegreeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Self::ALL
            .into_iter()
            .find(|d| d.code().eq_ignore_ascii_case(t) || d.label().eq_ignore_ascii_case(t))
            .ok_or_else(|| DegreeParseError(s.to_string()))
    }
}

impl FromStr for BehavioralDegree {
    type Err = DegreeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Self::ALL
            .into_iter()
            .find(|d| d.code().eq_ignore_ascii_case(t) || d.label().eq_ignore_ascii_case(t))
            .ok_or_else(|| DegreeParseError(s.to_string()))
    }
}

impl fmt::Display for StructuralDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.code(), self.label())
    }
}

impl fmt::Display for BehavioralDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.code(), self.label())
    }
}

/// A point in the structural × behavioral lattice.
///
/// `PartialOrd` is the product order, so two pairs may be incomparable
/// (`partial_cmp` returns `None`). The derived `Ord`-like sort used for
/// display is available through [`DegreePair::sort_key`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DegreePair {
    pub structural: StructuralDegree,
    pub behavioral: BehavioralDegree,
}

impl DegreePair {
    pub const BOTTOM: DegreePair = DegreePair {
        structural: StructuralDegree::Repository,
        behavioral: BehavioralDegree::Data,
    };

    pub const TOP: DegreePair = DegreePair {
        structural: StructuralDegree::Ontology,
        behavioral: BehavioralDegree::IntegratedSimulationModel,
    };

    pub const fn new(structural: StructuralDegree, behavioral: BehavioralDegree) -> Self {
        Self {
            structural,
            behavioral,
        }
    }

    /// Every pair of the lattice, structural-major.
    pub fn all() -> impl Iterator<Item = DegreePair> {
        StructuralDegree::ALL.into_iter().flat_map(|s| {
            BehavioralDegree::ALL
                .into_iter()
                .map(move |b| DegreePair::new(s, b))
        })
    }

    pub fn join(self, other: DegreePair) -> DegreePair {
        DegreePair {
            structural: self.structural.max(other.structural),
            behavioral: self.behavioral.max(other.behavioral),
        }
    }

    pub fn meet(self, other: DegreePair) -> DegreePair {
        DegreePair {
            structural: self.structural.min(other.structural),
            behavioral: self.behavioral.min(other.behavioral),
        }
    }

    /// `self ≤ other` in the product order.
    pub fn is_dominated_by(self, other: DegreePair) -> bool {
        self.structural <= other.structural && self.behavioral <= other.behavioral
    }

    pub fn sort_key(self) -> (u8, u8) {
        (self.structural.level(), self.behavioral.level())
    }

    /// Short form such as `S5/B2`.
    pub fn code(self) -> String {
        format!("{}/{}", self.structural.code(), self.behavioral.code())
    }
}

pub fn join(a: DegreePair, b: DegreePair) -> DegreePair {
    a.join(b)
}

impl Default for DegreePair {
    fn default() -> Self {
        Self::BOTTOM
    }
}

impl PartialOrd for DegreePair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (
            self.structural.cmp(&other.structural),
            self.behavioral.cmp(&other.behavioral),
        ) {
            (a, b) if a == b => Some(a),
            (Ordering::Equal, o) | (o, Ordering::Equal) => Some(o),
            _ => None,
        }
    }
}

impl fmt::Display for DegreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.structural, self.behavioral)
    }
}

impl FromStr for DegreePair {
    type Err = DegreeParseError;

    /// Accepts `S5/B2`, `S5,B2` or `S5 B2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s
            .split(|c: char| c == '/' || c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty());
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(DegreeParseError(s.to_string()));
        };
        Ok(DegreePair::new(a.parse()?, b.parse()?))
    }
}

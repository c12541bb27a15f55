//! Affine unit converters and chain search.
//!
//! Converters form a directed graph over unit terms. A conversion between
//! two units is the shortest chain of converters joining them (fewest
//! steps, ties broken by the lexicographically smallest id sequence).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::semstore::{OntologyTriple, TermId};

/// Unit id used for plain numbers.
pub const DIMENSIONLESS: &str = "1";

pub const REL_CONVERTS_FROM: &str = "convertsFrom";
pub const REL_CONVERTS_TO: &str = "convertsTo";
pub const REL_PRECEDES: &str = "precedes";
pub const REL_STARTS_WITH: &str = "startsWith";
pub const CHAIN_NODE: &str = "chain";
pub const IDENTITY_MARKER: &str = "identity";
/// Version tag of the chain triple vocabulary above.
pub const CHAIN_SCHEMA: &str = "chain-triples/1";

const REL_TOL: f64 = 1e-9;
const ABS_TOL: f64 = 1e-12;

/// Tolerant equality used across the crate: 1e-9 relative, 1e-12 absolute
/// near zero.
pub fn approx_eq(a: f64, b: f64) -> bool {
    let diff = (a - b).abs();
    diff <= ABS_TOL || diff <= REL_TOL * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub magnitude: f64,
    pub unit: TermId,
}

impl Quantity {
    pub fn new(magnitude: f64, unit: impl Into<String>) -> Self {
        Self {
            magnitude,
            unit: unit.into(),
        }
    }

    pub fn dimensionless(magnitude: f64) -> Self {
        Self::new(magnitude, DIMENSIONLESS)
    }

    pub fn is_dimensionless(&self) -> bool {
        self.unit == DIMENSIONLESS
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            write!(f, "{}", self.magnitude)
        } else {
            write!(f, "{} {}", self.magnitude, self.unit)
        }
    }
}

/// `y = scale · x + offset`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub scale: f64,
    pub offset: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        scale: 1.0,
        offset: 0.0,
    };

    pub fn apply(self, x: f64) -> f64 {
        self.scale * x + self.offset
    }

    /// Map that applies `self` first, then `next`.
    pub fn then(self, next: Affine) -> Affine {
        Affine {
            scale: next.scale * self.scale,
            offset: next.scale * self.offset + next.offset,
        }
    }

    pub fn inverse(self) -> Affine {
        Affine {
            scale: 1.0 / self.scale,
            offset: -self.offset / self.scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Converter {
    pub id: TermId,
    pub source: TermId,
    pub target: TermId,
    pub scale: f64,
    pub offset: f64,
}

impl Converter {
    pub fn new(id: &str, source: &str, target: &str, scale: f64, offset: f64) -> Self {
        Self {
            id: id.to_string(),
            source: source.to_string(),
            target: target.to_string(),
            scale,
            offset,
        }
    }

    pub fn affine(&self) -> Affine {
        Affine {
            scale: self.scale,
            offset: self.offset,
        }
    }

    /// `CONV id source target scale offset`, tab separated.
    pub fn to_line(&self) -> String {
        format!(
            "CONV\t{}\t{}\t{}\t{}\t{}",
            self.id,
            self.source,
            self.target,
            format_decimal(self.scale),
            format_decimal(self.offset)
        )
    }
}

/// Decimal literal rounded to 12 significant digits.
pub fn format_decimal(x: f64) -> String {
    let rounded: f64 = format!("{:.11e}", x).parse().unwrap_or(x);
    format!("{}", rounded)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConverterChain {
    pub steps: Vec<Converter>,
    pub composed: Affine,
}

impl ConverterChain {
    pub fn identity() -> Self {
        Self {
            steps: Vec::new(),
            composed: Affine::IDENTITY,
        }
    }

    pub fn from_steps(steps: Vec<Converter>) -> Result<Self, UnitsError> {
        for w in steps.windows(2) {
            if w[0].target != w[1].source {
                return Err(UnitsError::MalformedChain(format!(
                    "{} ends in {} but {} starts in {}",
                    w[0].id, w[0].target, w[1].id, w[1].source
                )));
            }
        }
        let composed = steps
            .iter()
            .fold(Affine::IDENTITY, |acc, c| acc.then(c.affine()));
        Ok(Self { steps, composed })
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn source(&self) -> Option<&str> {
        self.steps.first().map(|c| c.source.as_str())
    }

    pub fn target(&self) -> Option<&str> {
        self.steps.last().map(|c| c.target.as_str())
    }

    pub fn ids(&self) -> Vec<&str> {
        self.steps.iter().map(|c| c.id.as_str()).collect()
    }

    /// Applies each step in turn instead of the composed form.
    pub fn apply_stepwise(&self, x: f64) -> f64 {
        self.steps.iter().fold(x, |v, c| c.affine().apply(v))
    }
}

impl fmt::Display for ConverterChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.ids().join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitsError {
    #[error("degenerate converter `{id}`: {reason}")]
    DegenerateConverter { id: String, reason: String },
    #[error("converter id `{0}` already registered")]
    DuplicateConverter(String),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("no converter path from {from} to {to}")]
    NoConverterPath { from: String, to: String },
    #[error("unit mismatch: chain expects {expected}, got {actual}")]
    UnitMismatch { expected: String, actual: String },
    #[error("malformed chain: {0}")]
    MalformedChain(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConverterRegistry {
    converters: BTreeMap<TermId, Converter>,
    units: BTreeSet<TermId>,
}

impl ConverterRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_unit(&mut self, unit: &str) {
        self.units.insert(unit.to_string());
    }

    pub fn register_converter(&mut self, c: Converter) -> Result<(), UnitsError> {
        let degenerate = |reason: &str| UnitsError::DegenerateConverter {
            id: c.id.clone(),
            reason: reason.to_string(),
        };
        if c.scale == 0.0 || !c.scale.is_finite() {
            return Err(degenerate("scale must be finite and non-zero"));
        }
        if !c.offset.is_finite() {
            return Err(degenerate("offset must be finite"));
        }
        if c.source == c.target {
            return Err(degenerate("source and target are the same unit"));
        }
        if self.converters.contains_key(&c.id) {
            return Err(UnitsError::DuplicateConverter(c.id));
        }
        self.units.insert(c.source.clone());
        self.units.insert(c.target.clone());
        self.converters.insert(c.id.clone(), c);
        Ok(())
    }

    pub fn converter(&self, id: &str) -> Option<&Converter> {
        self.converters.get(id)
    }

    pub fn converters(&self) -> impl Iterator<Item = &Converter> {
        self.converters.values()
    }

    pub fn knows_unit(&self, unit: &str) -> bool {
        self.units.contains(unit)
    }

    pub fn units(&self) -> impl Iterator<Item = &str> {
        self.units.iter().map(String::as_str)
    }

    /// Shortest chain from `source` to `target`.
    pub fn find_chain(&self, source: &str, target: &str) -> Result<ConverterChain, UnitsError> {
        for u in [source, target] {
            if !self.knows_unit(u) {
                return Err(UnitsError::UnknownUnit(u.to_string()));
            }
        }
        if source == target {
            return Ok(ConverterChain::identity());
        }

        let mut outgoing: BTreeMap<&str, Vec<&Converter>> = BTreeMap::new();
        for c in self.converters.values() {
            outgoing.entry(c.source.as_str()).or_default().push(c);
        }

        // Layered BFS. `best` keeps, per reached unit, the smallest id
        // sequence among shortest paths; since all candidates in a layer have
        // equal length, comparing prefix-then-last-id is enough.
        let mut best: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        best.insert(source, Vec::new());
        let mut frontier = vec![source];
        while !frontier.is_empty() && !best.contains_key(target) {
            let mut next: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
            for &u in &frontier {
                for c in outgoing.get(u).into_iter().flatten() {
                    let v = c.target.as_str();
                    if best.contains_key(v) {
                        continue;
                    }
                    let mut cand = best[u].clone();
                    cand.push(c.id.as_str());
                    match next.get(v) {
                        Some(existing) if *existing <= cand => {}
                        _ => {
                            next.insert(v, cand);
                        }
                    }
                }
            }
            frontier = next.keys().copied().collect();
            best.extend(next);
        }

        let ids = best.get(target).ok_or_else(|| UnitsError::NoConverterPath {
            from: source.to_string(),
            to: target.to_string(),
        })?;
        ConverterChain::from_steps(ids.iter().map(|id| self.converters[*id].clone()).collect())
    }

    /// All (from, to) unit pairs joined by some chain of length ≥ 1.
    pub fn reachable_pairs(&self) -> BTreeSet<(TermId, TermId)> {
        crate::semstore::closure_of(
            self.converters
                .values()
                .map(|c| (c.source.as_str(), c.target.as_str())),
        )
    }

    pub fn parse(text: &str) -> Result<ConverterRegistry, UnitsError> {
        let mut reg = ConverterRegistry::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let err = |message: String| UnitsError::Parse { line, message };
            let cols: Vec<&str> = raw.split('\t').collect();
            match cols.as_slice() {
                ["CONV", id, source, target, scale, offset] => {
                    let num = |s: &str| -> Result<f64, UnitsError> {
                        s.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| err(format!("invalid decimal `{s}`")))
                    };
                    reg.register_converter(Converter::new(id, source, target, num(scale)?, num(offset)?))
                        .map_err(|e| err(e.to_string()))?;
                }
                ["UNIT", unit] => reg.register_unit(unit),
                _ => return Err(err(format!("unrecognised record `{raw}`"))),
            }
        }
        Ok(reg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut mentioned = BTreeSet::new();
        for c in self.converters.values() {
            mentioned.insert(c.source.as_str());
            mentioned.insert(c.target.as_str());
        }
        for u in &self.units {
            if !mentioned.contains(u.as_str()) {
                out.push_str(&format!("UNIT\t{u}\n"));
            }
        }
        for c in self.converters.values() {
            out.push_str(&c.to_line());
            out.push('\n');
        }
        out
    }
}

pub fn apply_chain(chain: &ConverterChain, q: &Quantity) -> Result<Quantity, UnitsError> {
    match (chain.source(), chain.target()) {
        (Some(src), Some(dst)) => {
            if q.unit != src {
                return Err(UnitsError::UnitMismatch {
                    expected: src.to_string(),
                    actual: q.unit.clone(),
                });
            }
            Ok(Quantity::new(chain.composed.apply(q.magnitude), dst))
        }
        _ => Ok(q.clone()),
    }
}

/// Serializes a chain as triples: per step `convertsFrom`/`convertsTo`,
/// `precedes` between neighbours, and a `chain startsWith <first>` head
/// marker (`chain startsWith identity` for the empty chain).
pub fn chain_to_triples(chain: &ConverterChain) -> Vec<OntologyTriple> {
    let mut out = Vec::new();
    match chain.steps.first() {
        None => out.push(OntologyTriple::new(CHAIN_NODE, REL_STARTS_WITH, IDENTITY_MARKER)),
        Some(first) => out.push(OntologyTriple::new(CHAIN_NODE, REL_STARTS_WITH, first.id.as_str())),
    }
    for c in &chain.steps {
        out.push(OntologyTriple::new(c.id.as_str(), REL_CONVERTS_FROM, c.source.as_str()));
        out.push(OntologyTriple::new(c.id.as_str(), REL_CONVERTS_TO, c.target.as_str()));
    }
    for w in chain.steps.windows(2) {
        out.push(OntologyTriple::new(w[0].id.as_str(), REL_PRECEDES, w[1].id.as_str()));
    }
    out
}

/// Rebuilds a chain from its triples, taking converter parameters from
/// `registry` and checking the triples agree with them.
pub fn triples_to_chain(
    triples: &[OntologyTriple],
    registry: &ConverterRegistry,
) -> Result<ConverterChain, UnitsError> {
    let bad = |m: String| UnitsError::MalformedChain(m);
    let heads: Vec<&OntologyTriple> = triples
        .iter()
        .filter(|t| t.subject == CHAIN_NODE && t.relation == REL_STARTS_WITH)
        .collect();
    let [head] = heads.as_slice() else {
        return Err(bad(format!("expected one head marker, found {}", heads.len())));
    };
    if head.object == IDENTITY_MARKER {
        if triples.len() != 1 {
            return Err(bad("identity chain carries extra triples".into()));
        }
        return Ok(ConverterChain::identity());
    }

    let mut next: BTreeMap<&str, &str> = BTreeMap::new();
    let mut from: BTreeMap<&str, &str> = BTreeMap::new();
    let mut to: BTreeMap<&str, &str> = BTreeMap::new();
    for t in triples {
        let slot = match t.relation.as_str() {
            REL_PRECEDES => &mut next,
            REL_CONVERTS_FROM => &mut from,
            REL_CONVERTS_TO => &mut to,
            REL_STARTS_WITH if t.subject == CHAIN_NODE => continue,
            other => return Err(bad(format!("unexpected relation `{other}`"))),
        };
        if slot.insert(t.subject.as_str(), t.object.as_str()).is_some() {
            return Err(bad(format!("duplicate {} for {}", t.relation, t.subject)));
        }
    }

    let mut steps = Vec::new();
    let mut seen = BTreeSet::new();
    let mut cur = Some(head.object.as_str());
    while let Some(id) = cur {
        if !seen.insert(id) {
            return Err(bad(format!("precedes cycle at {id}")));
        }
        let conv = registry
            .converter(id)
            .ok_or_else(|| bad(format!("unknown converter `{id}`")))?;
        if from.get(id) != Some(&conv.source.as_str()) || to.get(id) != Some(&conv.target.as_str()) {
            return Err(bad(format!("endpoints of {id} disagree with its definition")));
        }
        steps.push(conv.clone());
        cur = next.get(id).copied();
    }
    if steps.len() != from.len() || steps.len() != to.len() || next.len() + 1 != steps.len() {
        return Err(bad("triples describe converters outside the chain".into()));
    }
    ConverterChain::from_steps(steps)
}

/// Reader-writer wrapper shared between service connections.
#[derive(Debug, Clone, Default)]
pub struct SharedRegistry(Arc<RwLock<ConverterRegistry>>);

impl SharedRegistry {
    pub fn new(reg: ConverterRegistry) -> Self {
        Self(Arc::new(RwLock::new(reg)))
    }

    pub fn read<R>(&self, f: impl FnOnce(&ConverterRegistry) -> R) -> R {
        f(&self.0.read().unwrap_or_else(|e| e.into_inner()))
    }

    pub fn write<R>(&self, f: impl FnOnce(&mut ConverterRegistry) -> R) -> R {
        f(&mut self.0.write().unwrap_or_else(|e| e.into_inner()))
    }
}

/// The three temperature converters used throughout the examples:
/// f1 Fahrenheit→Kelvin, f2 Kelvin→Celsius, f3 Celsius→Fahrenheit.
pub fn temperature_registry() -> ConverterRegistry {
    let mut reg = ConverterRegistry::new();
    for c in [
        Converter::new("f1", "Fahrenheit", "Kelvin", 5.0 / 9.0, 273.15 - 32.0 * 5.0 / 9.0),
        Converter::new("f2", "Kelvin", "Celsius", 1.0, -273.15),
        Converter::new("f3", "Celsius", "Fahrenheit", 9.0 / 5.0, 32.0),
    ] {
        reg.register_converter(c).expect("static converters are valid");
    }
    reg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn register_examples() {
        let reg = temperature_registry();
        let f1 = reg.converter("f1").unwrap();
        // K = (F - 32)·5/9 + 273.15 in affine form
        assert!(approx_eq(f1.scale, 0.5555555555555556));
        assert!(approx_eq(f1.offset, 255.37222222222223));
        let f2 = reg.converter("f2").unwrap();
        assert!(approx_eq(f2.affine().apply(273.15), 0.0));

        let mut reg = ConverterRegistry::new();
        assert!(matches!(
            reg.register_converter(Converter::new("z", "a", "b", 0.0, 1.0)),
            Err(UnitsError::DegenerateConverter { .. })
        ));
        assert!(matches!(
            reg.register_converter(Converter::new("z", "a", "a", 2.0, 1.0)),
            Err(UnitsError::DegenerateConverter { .. })
        ));
        reg.register_converter(Converter::new("z", "a", "b", 2.0, 1.0)).unwrap();
        assert!(matches!(
            reg.register_converter(Converter::new("z", "b", "c", 2.0, 1.0)),
            Err(UnitsError::DuplicateConverter(_))
        ));
        // parallel edges are fine when ids differ
        reg.register_converter(Converter::new("y", "a", "b", 3.0, 0.0)).unwrap();
        assert_eq!(reg.find_chain("a", "b").unwrap().ids(), vec!["y"]);
    }

    #[test]
    fn find_chain_examples() {
        let reg = temperature_registry();
        assert_eq!(reg.find_chain("Fahrenheit", "Celsius").unwrap().ids(), vec!["f1", "f2"]);
        let id = reg.find_chain("Celsius", "Celsius").unwrap();
        assert!(id.is_identity());
        assert_eq!(id.composed, Affine::IDENTITY);
        assert_eq!(reg.find_chain("Kelvin", "Fahrenheit").unwrap().ids(), vec!["f2", "f3"]);
        assert!(matches!(reg.find_chain("Kelvin", "Kilogram"), Err(UnitsError::UnknownUnit(_))));
        let mut reg2 = reg.clone();
        reg2.register_unit("Kilogram");
        assert!(matches!(
            reg2.find_chain("Kelvin", "Kilogram"),
            Err(UnitsError::NoConverterPath { .. })
        ));
    }

    #[test]
    fn apply_examples() {
        let reg = temperature_registry();
        let c = reg.find_chain("Fahrenheit", "Celsius").unwrap();
        let out = apply_chain(&c, &Quantity::new(77.0, "Fahrenheit")).unwrap();
        assert_eq!(out.unit, "Celsius");
        assert!(approx_eq(out.magnitude, 25.0));

        let id = ConverterChain::identity();
        assert_eq!(
            apply_chain(&id, &Quantity::new(33.3, "Celsius")).unwrap(),
            Quantity::new(33.3, "Celsius")
        );

        let c = reg.find_chain("Kelvin", "Fahrenheit").unwrap();
        let out = apply_chain(&c, &Quantity::new(273.15, "Kelvin")).unwrap();
        assert!(approx_eq(out.magnitude, (273.15 - 273.15) * 9.0 / 5.0 + 32.0));

        assert!(matches!(
            apply_chain(&c, &Quantity::new(1.0, "Celsius")),
            Err(UnitsError::UnitMismatch { .. })
        ));
    }

    #[test]
    fn tie_break_is_lexicographic() {
        let mut reg = ConverterRegistry::new();
        reg.register_converter(Converter::new("b1", "x", "m", 1.0, 0.0)).unwrap();
        reg.register_converter(Converter::new("a9", "x", "n", 1.0, 0.0)).unwrap();
        reg.register_converter(Converter::new("c", "m", "y", 1.0, 0.0)).unwrap();
        reg.register_converter(Converter::new("d", "n", "y", 1.0, 0.0)).unwrap();
        reg.register_converter(Converter::new("a0", "n", "y", 1.0, 0.0)).unwrap();
        assert_eq!(reg.find_chain("x", "y").unwrap().ids(), vec!["a9", "a0"]);
    }

    #[test]
    fn chain_triples() {
        let reg = temperature_registry();
        let c = reg.find_chain("Fahrenheit", "Celsius").unwrap();
        let t = chain_to_triples(&c);
        assert_eq!(t.len(), 6);
        assert!(t.contains(&OntologyTriple::new("f1", "convertsFrom", "Fahrenheit")));
        assert!(t.contains(&OntologyTriple::new("f1", "convertsTo", "Kelvin")));
        assert!(t.contains(&OntologyTriple::new("f2", "convertsFrom", "Kelvin")));
        assert!(t.contains(&OntologyTriple::new("f2", "convertsTo", "Celsius")));
        assert!(t.contains(&OntologyTriple::new("f1", "precedes", "f2")));
        assert!(t.contains(&OntologyTriple::new("chain", "startsWith", "f1")));
        assert_eq!(triples_to_chain(&t, &reg).unwrap(), c);

        let id = chain_to_triples(&ConverterChain::identity());
        assert_eq!(id, vec![OntologyTriple::new("chain", "startsWith", "identity")]);
        assert!(triples_to_chain(&id, &reg).unwrap().is_identity());

        let single = reg.find_chain("Celsius", "Fahrenheit").unwrap();
        let t1 = chain_to_triples(&single);
        assert!(!t1.iter().any(|t| t.relation == REL_PRECEDES));
        assert_eq!(triples_to_chain(&t1, &reg).unwrap(), single);
    }

    #[test]
    fn malformed_chain_triples() {
        let reg = temperature_registry();
        let c = reg.find_chain("Fahrenheit", "Celsius").unwrap();
        let mut t = chain_to_triples(&c);
        t.retain(|x| x.relation != REL_STARTS_WITH);
        assert!(triples_to_chain(&t, &reg).is_err());

        let mut t = chain_to_triples(&c);
        t.retain(|x| x.relation != REL_PRECEDES);
        assert!(triples_to_chain(&t, &reg).is_err());

        let mut t = chain_to_triples(&c);
        t[1] = OntologyTriple::new("f1", "convertsFrom", "Celsius");
        assert!(triples_to_chain(&t, &reg).is_err());

        assert!(ConverterChain::from_steps(vec![
            reg.converter("f1").unwrap().clone(),
            reg.converter("f3").unwrap().clone()
        ])
        .is_err());
    }

    #[test]
    fn registry_text() {
        let reg = temperature_registry();
        let text = reg.to_text();
        assert!(text.contains("CONV\tf1\tFahrenheit\tKelvin\t0.555555555556\t255.372222222\n"));
        let back = ConverterRegistry::parse(&text).unwrap();
        let c = back.find_chain("Fahrenheit", "Celsius").unwrap();
        let out = apply_chain(&c, &Quantity::new(77.0, "Fahrenheit")).unwrap();
        assert!(approx_eq(out.magnitude, 25.0));
        assert!(ConverterRegistry::parse("CONV\tx\ta\tb\tzero\t0\n").is_err());
        assert!(ConverterRegistry::parse("CONV\tx\ta\tb\t0\t0\n").is_err());
        let with_unit = ConverterRegistry::parse("UNIT\tKilogram\n").unwrap();
        assert!(with_unit.knows_unit("Kilogram"));
        assert_eq!(with_unit.to_text(), "UNIT\tKilogram\n");
    }

    #[test]
    fn affine_algebra() {
        let a = Affine { scale: 2.0, offset: 1.0 };
        let b = Affine { scale: -3.0, offset: 0.5 };
        for x in [-10.0, 0.0, 3.25] {
            assert!(approx_eq(a.then(b).apply(x), b.apply(a.apply(x))));
            assert!(approx_eq(a.then(a.inverse()).apply(x), x));
        }
    }

    #[test]
    fn decimal_format() {
        assert_eq!(format_decimal(0.06), "0.06");
        assert_eq!(format_decimal(-273.15), "-273.15");
        assert_eq!(format_decimal(5.0 / 9.0), "0.555555555556");
        assert_eq!(format_decimal(1000.0), "1000");
    }
}

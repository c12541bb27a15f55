//! Product parameters to machine configurations, and function-block ports
//! to device signals.
//!
//! Each required machine parameter is resolved by the first strategy that
//! applies, and only by that one:
//!
//! 1. direct: a product path whose last segment (or whole path) equals the
//!    parameter's local name;
//! 2. synonym: a product path whose last segment has the same canonical
//!    term as the parameter;
//! 3. derivation: a formula over product paths.
//!
//! The value is then converted into the machine's expected unit. Anything
//! that fails lands in the report's missing list with a reason.

mod report;
pub mod bundled;
mod signals;

use std::collections::BTreeMap;
use std::fmt;

use crate::constraints::{self, Environment, EvalError, Evaluator, Expr, Value};
use crate::semstore::{KnowledgeBase, TermId};
use crate::units::{ConverterRegistry, Quantity, DIMENSIONLESS};

pub use report::{explain, explain_tsv, ALL_RESOLVED};
pub use signals::{
    match_signals, parse_ports, Ambiguity, Connection, Direction, PortRef, SignalPort, SignalReport, Unmatched,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfParseError {
    pub line: usize,
    pub message: String,
}

/// Product-level quantities keyed by dotted path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterSet {
    params: BTreeMap<String, Quantity>,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: &str, q: Quantity) -> Option<Quantity> {
        self.params.insert(path.to_string(), q)
    }

    pub fn remove(&mut self, path: &str) -> Option<Quantity> {
        self.params.remove(path)
    }

    pub fn get(&self, path: &str) -> Option<&Quantity> {
        self.params.get(path)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Quantity)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn environment(&self) -> Environment {
        let mut env = Environment::new();
        for (p, q) in &self.params {
            env.bind(p, q.clone());
        }
        env
    }

    /// `PARAM<TAB>path<TAB>magnitude<TAB>unit` lines; unit `-` or `1` is
    /// dimensionless.
    pub fn parse(text: &str) -> Result<ParameterSet, ConfParseError> {
        let mut set = ParameterSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let err = |m: String| ConfParseError { line, message: m };
            let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
            let ["PARAM", path, mag, unit] = cols.as_slice() else {
                return Err(err(format!("unrecognised record `{raw}`")));
            };
            let m: f64 = mag
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(format!("invalid magnitude `{mag}`")))?;
            let unit = if *unit == "-" { DIMENSIONLESS } else { unit };
            if set.insert(path, Quantity::new(m, unit)).is_some() {
                return Err(err(format!("duplicate path `{path}`")));
            }
        }
        Ok(set)
    }
}

fn last_segment(path: &str) -> &str {
    path.rsplit('.').next().unwrap_or(path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiredParameter {
    pub local: String,
    pub term: TermId,
    pub unit: TermId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MachineProfile {
    pub id: String,
    pub required: Vec<RequiredParameter>,
    pub derivations: BTreeMap<String, Expr>,
}

impl MachineProfile {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            required: Vec::new(),
            derivations: BTreeMap::new(),
        }
    }

    pub fn require(mut self, local: &str, term: &str, unit: &str) -> Self {
        self.required.push(RequiredParameter {
            local: local.to_string(),
            term: term.to_string(),
            unit: unit.to_string(),
        });
        self
    }

    pub fn derive(mut self, local: &str, expr: Expr) -> Self {
        self.derivations.insert(local.to_string(), expr);
        self
    }
}

/// Machine profiles, tab separated, in file order:
///
/// ```text
/// REQUIRE  machine  local-name  term  unit
/// DERIVE   machine  local-name  expression
/// ```
pub fn parse_profiles(text: &str) -> Result<Vec<MachineProfile>, ConfParseError> {
    let mut out: Vec<MachineProfile> = Vec::new();
    fn slot<'a>(out: &'a mut Vec<MachineProfile>, id: &str) -> &'a mut MachineProfile {
        let i = match out.iter().position(|m| m.id == id) {
            Some(i) => i,
            None => {
                out.push(MachineProfile::new(id));
                out.len() - 1
            }
        };
        &mut out[i]
    }
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let err = |m: String| ConfParseError { line, message: m };
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        match cols.as_slice() {
            ["REQUIRE", machine, local, term, unit] => {
                let p = slot(&mut out, machine);
                if p.required.iter().any(|r| r.local == *local) {
                    return Err(err(format!("{machine}.{local} required twice")));
                }
                p.required.push(RequiredParameter {
                    local: local.to_string(),
                    term: term.to_string(),
                    unit: unit.to_string(),
                });
            }
            ["DERIVE", machine, local, expr] => {
                let e = constraints::parse(expr).map_err(|e| err(e.to_string()))?;
                if slot(&mut out, machine).derivations.insert(local.to_string(), e).is_some() {
                    return Err(err(format!("{machine}.{local} derived twice")));
                }
            }
            _ => return Err(err(format!("unrecognised record `{raw}`"))),
        }
    }
    for p in &out {
        if let Some(d) = p.derivations.keys().find(|d| !p.required.iter().any(|r| &r.local == *d)) {
            return Err(ConfParseError {
                line: 0,
                message: format!("{}.{d} is derived but never required", p.id),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Direct(String),
    Synonym(String),
    Derived(Expr),
}

impl Provenance {
    pub fn kind(&self) -> &'static str {
        match self {
            Provenance::Direct(_) => "direct",
            Provenance::Synonym(_) => "synonym",
            Provenance::Derived(_) => "derived",
        }
    }

    pub fn source(&self) -> String {
        match self {
            Provenance::Direct(p) | Provenance::Synonym(p) => p.clone(),
            Provenance::Derived(e) => e.to_string(),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind(), self.source())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MissingReason {
    NoSource,
    Ambiguous(Vec<String>),
    Eval(EvalError),
    NotAQuantity,
    UnitMismatch { from: String, to: String },
}

impl MissingReason {
    pub fn code(&self) -> &'static str {
        match self {
            MissingReason::NoSource => "NoSource",
            MissingReason::Ambiguous(_) => "Ambiguous",
            MissingReason::Eval(EvalError::UnboundPath(_)) => "UnboundPath",
            MissingReason::Eval(EvalError::UnitMismatch(_)) => "UnitMismatch",
            MissingReason::Eval(EvalError::DivisionByZero) => "DivisionByZero",
            MissingReason::Eval(EvalError::TypeError(_)) => "TypeError",
            MissingReason::NotAQuantity => "TypeError",
            MissingReason::UnitMismatch { .. } => "UnitMismatch",
        }
    }
}

impl fmt::Display for MissingReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MissingReason::NoSource => f.write_str("no direct, synonym or derivation source"),
            MissingReason::Ambiguous(c) => write!(f, "ambiguous between {}", c.join(", ")),
            MissingReason::Eval(e) => write!(f, "{e}"),
            MissingReason::NotAQuantity => f.write_str("derivation yields a boolean"),
            MissingReason::UnitMismatch { from, to } => write!(f, "unit mismatch: cannot convert {from} to {to}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub value: Quantity,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Missing {
    pub machine: String,
    pub local: String,
    pub reason: MissingReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MappingReport {
    /// Keyed by (machine, local name).
    pub resolved: BTreeMap<(String, String), Resolved>,
    pub missing: Vec<Missing>,
}

impl MappingReport {
    pub fn get(&self, machine: &str, local: &str) -> Option<&Resolved> {
        self.resolved.get(&(machine.to_string(), local.to_string()))
    }

    pub fn total(&self) -> usize {
        self.resolved.len() + self.missing.len()
    }
}

struct Resolver<'a> {
    product: &'a ParameterSet,
    kb: &'a KnowledgeBase,
    eval: Evaluator<'a>,
    env: Environment,
}

impl Resolver<'_> {
    fn canonical<'s>(&'s self, term: &'s str) -> Option<&'s str> {
        self.kb.canonicalize(term).ok()
    }

    fn unique(mut hits: Vec<&str>) -> Result<Option<String>, MissingReason> {
        hits.sort_unstable();
        match hits.as_slice() {
            [] => Ok(None),
            [one] => Ok(Some(one.to_string())),
            many => Err(MissingReason::Ambiguous(many.iter().map(|s| s.to_string()).collect())),
        }
    }

    fn resolve(&self, req: &RequiredParameter, derivation: Option<&Expr>) -> Result<Resolved, MissingReason> {
        let direct: Vec<&str> = self
            .product
            .iter()
            .map(|(p, _)| p)
            .filter(|p| *p == req.local || last_segment(p) == req.local)
            .collect();
        let (value, provenance) = if let Some(p) = Self::unique(direct)? {
            (self.product.get(&p).cloned().expect("path exists"), Provenance::Direct(p))
        } else if let Some(p) = self.synonym(req)? {
            (self.product.get(&p).cloned().expect("path exists"), Provenance::Synonym(p))
        } else if let Some(e) = derivation {
            match self.eval.evaluate(e, &self.env).map_err(MissingReason::Eval)? {
                Value::Quantity(q) => (q, Provenance::Derived(e.clone())),
                Value::Bool(_) => return Err(MissingReason::NotAQuantity),
            }
        } else {
            return Err(MissingReason::NoSource);
        };
        let value = self.to_unit(&value, &req.unit)?;
        Ok(Resolved { value, provenance })
    }

    fn synonym(&self, req: &RequiredParameter) -> Result<Option<String>, MissingReason> {
        let Some(want) = self.canonical(&req.term) else {
            return Ok(None);
        };
        let hits: Vec<&str> = self
            .product
            .iter()
            .map(|(p, _)| p)
            .filter(|p| self.canonical(last_segment(p)) == Some(want))
            .collect();
        Self::unique(hits)
    }

    /// Dimensionless values only fit dimensionless slots and vice versa.
    fn to_unit(&self, q: &Quantity, unit: &str) -> Result<Quantity, MissingReason> {
        let unit = self.canonical(unit).unwrap_or(unit);
        let mismatch = || MissingReason::UnitMismatch {
            from: q.unit.clone(),
            to: unit.to_string(),
        };
        if q.is_dimensionless() != (unit == DIMENSIONLESS) {
            return Err(mismatch());
        }
        self.eval.convert(q, unit).map_err(|_| mismatch())
    }
}

/// Resolves every required parameter of every machine against `product`.
pub fn derive_config(
    product: &ParameterSet,
    machines: &[MachineProfile],
    kb: &KnowledgeBase,
    registry: &ConverterRegistry,
) -> MappingReport {
    let r = Resolver {
        product,
        kb,
        eval: Evaluator::new(registry).with_knowledge(kb),
        env: product.environment(),
    };
    let mut report = MappingReport::default();
    for m in machines {
        for req in &m.required {
            match r.resolve(req, m.derivations.get(&req.local)) {
                Ok(res) => {
                    report.resolved.insert((m.id.clone(), req.local.clone()), res);
                }
                Err(reason) => report.missing.push(Missing {
                    machine: m.id.clone(),
                    local: req.local.clone(),
                    reason,
                }),
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{approx_eq, Converter};

    fn kb() -> KnowledgeBase {
        KnowledgeBase::parse(
            "TERM\tWeight\nTERM\tLoad\nTERM\tNoOfParts\nTERM\tCartonWeight\nSYN\tLoad\tWeight\n\
             TERM\tKilogram\nTERM\tGram\nTERM\tkg\nSYN\tkg\tKilogram\n",
        )
        .unwrap()
    }

    fn registry() -> ConverterRegistry {
        let mut r = ConverterRegistry::new();
        r.register_converter(Converter::new("m1", "Kilogram", "Gram", 1000.0, 0.0)).unwrap();
        r.register_unit("Celsius");
        r
    }

    fn product() -> ParameterSet {
        let mut p = ParameterSet::new();
        p.insert("Product.CommonParameter.Weight", Quantity::new(0.05, "Kilogram"));
        p.insert("Product.CommonParameter.NoOfParts", Quantity::dimensionless(20.0));
        p
    }

    fn machines() -> Vec<MachineProfile> {
        vec![
            MachineProfile::new("FFS").require("Weight", "Weight", "Gram"),
            MachineProfile::new("Packaging").require("Load", "Load", "Kilogram"),
            MachineProfile::new("Palletizer")
                .require("CartonWeight", "CartonWeight", "Kilogram")
                .derive(
                    "CartonWeight",
                    constraints::parse("Product.CommonParameter.Weight * Product.CommonParameter.NoOfParts").unwrap(),
                ),
        ]
    }

    #[test]
    fn packaging_line_examples() {
        let r = derive_config(&product(), &machines(), &kb(), &registry());
        assert!(r.missing.is_empty(), "{:?}", r.missing);
        let load = r.get("Packaging", "Load").unwrap();
        assert_eq!(load.provenance, Provenance::Synonym("Product.CommonParameter.Weight".into()));
        assert_eq!(load.value, Quantity::new(0.05, "Kilogram"));
        let w = r.get("FFS", "Weight").unwrap();
        assert_eq!(w.provenance.kind(), "direct");
        assert!(approx_eq(w.value.magnitude, 50.0));
        assert_eq!(w.value.unit, "Gram");
        let c = r.get("Palletizer", "CartonWeight").unwrap();
        assert_eq!(c.provenance.kind(), "derived");
        assert!(approx_eq(c.value.magnitude, 1.0));
        assert_eq!(c.value.unit, "Kilogram");
    }

    #[test]
    fn missing_no_of_parts() {
        let mut p = product();
        p.remove("Product.CommonParameter.NoOfParts");
        let r = derive_config(&p, &machines(), &kb(), &registry());
        assert_eq!(r.missing.len(), 1);
        let m = &r.missing[0];
        assert_eq!((m.machine.as_str(), m.local.as_str()), ("Palletizer", "CartonWeight"));
        assert_eq!(m.reason.to_string(), "unbound path Product.CommonParameter.NoOfParts");
        assert_eq!(m.reason.code(), "UnboundPath");
        assert_eq!(r.total(), 3);
    }

    #[test]
    fn direct_beats_synonym_beats_derivation() {
        let mut p = product();
        p.insert("Product.Extra.Load", Quantity::new(0.07, "Kilogram"));
        let m = MachineProfile::new("Checker")
            .require("Load", "Load", "Kilogram")
            .derive("Load", constraints::parse("Product.CommonParameter.Weight * 3").unwrap());
        let r = derive_config(&p, &[m.clone()], &kb(), &registry());
        assert_eq!(r.get("Checker", "Load").unwrap().provenance, Provenance::Direct("Product.Extra.Load".into()));
        p.remove("Product.Extra.Load");
        let r = derive_config(&p, &[m.clone()], &kb(), &registry());
        assert_eq!(r.get("Checker", "Load").unwrap().provenance.kind(), "synonym");
        let m = MachineProfile::new("Checker")
            .require("Mass", "Mass", "Kilogram")
            .derive("Mass", constraints::parse("Product.CommonParameter.Weight * 3").unwrap());
        let r = derive_config(&p, &[m], &kb(), &registry());
        let v = r.get("Checker", "Mass").unwrap();
        assert_eq!(v.provenance.kind(), "derived");
        assert!(approx_eq(v.value.magnitude, 0.15));
    }

    #[test]
    fn failure_reasons() {
        let p = product();
        let ms = vec![MachineProfile::new("M")
            .require("Colour", "Colour", "1")
            .require("Weight", "Weight", "Celsius")
            .require("NoOfParts", "NoOfParts", "Kilogram")
            .require("Flag", "Flag", "1")
            .require("Ratio", "Ratio", "1")
            .derive("Flag", constraints::parse("Product.CommonParameter.NoOfParts > 3").unwrap())
            .derive("Ratio", constraints::parse("Product.CommonParameter.NoOfParts / 0").unwrap())];
        let r = derive_config(&p, &ms, &kb(), &registry());
        let codes: Vec<&str> = r.missing.iter().map(|m| m.reason.code()).collect();
        assert_eq!(codes, vec!["NoSource", "UnitMismatch", "UnitMismatch", "TypeError", "DivisionByZero"]);
        assert!(r.resolved.is_empty());

        let mut p2 = p.clone();
        p2.insert("Other.Weight", Quantity::new(1.0, "Kilogram"));
        let r = derive_config(&p2, &machines()[..1], &kb(), &registry());
        assert!(matches!(&r.missing[0].reason, MissingReason::Ambiguous(c) if c.len() == 2));
    }

    #[test]
    fn unit_synonyms_convert() {
        let mut p = ParameterSet::new();
        p.insert("P.Weight", Quantity::new(2.0, "kg"));
        let m = MachineProfile::new("FFS").require("Weight", "Weight", "Gram");
        let r = derive_config(&p, &[m], &kb(), &registry());
        assert!(approx_eq(r.get("FFS", "Weight").unwrap().value.magnitude, 2000.0));
    }

    #[test]
    fn parse_files() {
        let p = ParameterSet::parse("# p\nPARAM\tA.B\t0.5\tKilogram\nPARAM\tA.N\t3\t-\n").unwrap();
        assert_eq!(p.get("A.N").unwrap(), &Quantity::dimensionless(3.0));
        assert_eq!(ParameterSet::parse("PARAM\tA\tx\tkg\n").unwrap_err().line, 1);
        assert!(ParameterSet::parse("PARAM\tA\t1\tkg\nPARAM\tA\t2\tkg\n").is_err());

        let m = parse_profiles("REQUIRE\tP\tC\tC\tKilogram\nDERIVE\tP\tC\tA.B * A.N\n").unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].derivations["C"].to_string(), "A.B * A.N");
        assert_eq!(parse_profiles("DERIVE\tP\tC\tA.B *\n").unwrap_err().line, 1);
        assert!(parse_profiles("DERIVE\tP\tC\tA.B\n").is_err());
        assert!(parse_profiles("REQUIRE\tP\tC\tC\tkg\nREQUIRE\tP\tC\tC\tkg\n").is_err());
        assert!(parse_profiles("NEED\tP\n").is_err());
    }
}

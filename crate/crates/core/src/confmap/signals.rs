use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ConfParseError;
use crate::semstore::{KnowledgeBase, TermId};
use crate::units::{ConverterChain, ConverterRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::In => Direction::Out,
            Direction::Out => Direction::In,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::In => "in",
            Direction::Out => "out",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub owner: String,
    pub name: String,
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.owner, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalPort {
    pub owner: String,
    pub name: String,
    pub direction: Direction,
    pub term: TermId,
    pub unit: Option<TermId>,
}

impl SignalPort {
    pub fn new(owner: &str, name: &str, direction: Direction, term: &str, unit: Option<&str>) -> Self {
        Self {
            owner: owner.to_string(),
            name: name.to_string(),
            direction,
            term: term.to_string(),
            unit: unit.map(str::to_string),
        }
    }

    pub fn port_ref(&self) -> PortRef {
        PortRef {
            owner: self.owner.clone(),
            name: self.name.clone(),
        }
    }
}

/// `PORT<TAB>owner<TAB>name<TAB>in|out<TAB>term[<TAB>unit]` lines.
pub fn parse_ports(text: &str) -> Result<Vec<SignalPort>, ConfParseError> {
    let mut out: Vec<SignalPort> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let err = |m: String| ConfParseError { line, message: m };
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        let (owner, name, dir, term, unit) = match cols.as_slice() {
            ["PORT", o, n, d, t] => (o, n, d, t, None),
            ["PORT", o, n, d, t, u] => (o, n, d, t, Some(*u).filter(|u| !u.is_empty())),
            _ => return Err(err(format!("unrecognised record `{raw}`"))),
        };
        let direction = match *dir {
            "in" => Direction::In,
            "out" => Direction::Out,
            d => return Err(err(format!("direction must be in or out, got `{d}`"))),
        };
        if out.iter().any(|p| p.owner == *owner && p.name == *name) {
            return Err(err(format!("duplicate port {owner}.{name}")));
        }
        out.push(SignalPort::new(owner, name, direction, term, unit));
    }
    Ok(out)
}

/// A wire from a driving port to a receiving port, with the chain that
/// translates the driver's unit into the receiver's.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub from: PortRef,
    pub to: PortRef,
    pub chain: ConverterChain,
}

impl Connection {
    pub fn transfer(&self, value: f64) -> f64 {
        self.chain.composed.apply(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ambiguity {
    pub port: PortRef,
    pub candidates: Vec<PortRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unmatched {
    pub port: PortRef,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignalReport {
    pub connections: Vec<Connection>,
    pub ambiguous: Vec<Ambiguity>,
    /// Block ports first, then device ports left without a wire.
    pub unmatched: Vec<Unmatched>,
}

impl SignalReport {
    pub fn connection_to(&self, owner: &str, name: &str) -> Option<&Connection> {
        self.connections.iter().find(|c| c.to.owner == owner && c.to.name == name)
    }

    pub fn connection_from(&self, owner: &str, name: &str) -> Option<&Connection> {
        self.connections.iter().find(|c| c.from.owner == owner && c.from.name == name)
    }
}

/// Wires function-block ports to device ports.
///
/// Block ports are taken in (owner, name) order. A candidate device port
/// has the opposite direction, the same canonical term and, when both
/// sides carry units, a converter chain from driver to receiver. Exactly
/// one candidate is wired; two or more are reported as ambiguous and left
/// unwired. A device input takes at most one driver.
pub fn match_signals(
    block_ports: &[SignalPort],
    device_ports: &[SignalPort],
    kb: &KnowledgeBase,
    registry: &ConverterRegistry,
) -> SignalReport {
    let canonical = |t: &str| kb.canonicalize(t).map(str::to_string).unwrap_or_else(|_| t.to_string());
    let mut blocks: Vec<&SignalPort> = block_ports.iter().collect();
    blocks.sort_by_key(|p| p.port_ref());
    let mut report = SignalReport::default();
    let mut driven: BTreeMap<PortRef, PortRef> = BTreeMap::new();
    let mut used: BTreeSet<PortRef> = BTreeSet::new();

    for b in blocks {
        let term = canonical(&b.term);
        let same_term: Vec<&SignalPort> = device_ports
            .iter()
            .filter(|d| d.direction == b.direction.opposite() && canonical(&d.term) == term)
            .collect();
        let mut candidates = Vec::new();
        let mut unit_problems = Vec::new();
        for d in same_term {
            let (src, dst) = match b.direction {
                Direction::In => (d, b),
                Direction::Out => (b, d),
            };
            let chain = match (&src.unit, &dst.unit) {
                (Some(su), Some(du)) => {
                    let (su, du) = (canonical(su), canonical(du));
                    registry.find_chain(&su, &du)
                }
                _ => Ok(ConverterChain::identity()),
            };
            match chain {
                Ok(c) => candidates.push((d, c)),
                Err(e) => unit_problems.push(format!("{}: {e}", d.port_ref())),
            }
        }
        let bref = b.port_ref();
        match candidates.len() {
            0 => {
                let reason = if unit_problems.is_empty() {
                    format!("no {} device port with term {term}", b.direction.opposite())
                } else {
                    unit_problems.join("; ")
                };
                report.unmatched.push(Unmatched { port: bref, reason });
            }
            1 => {
                let (d, chain) = candidates.pop().expect("one candidate");
                let dref = d.port_ref();
                let (from, to) = match b.direction {
                    Direction::In => (dref.clone(), bref.clone()),
                    Direction::Out => (bref.clone(), dref.clone()),
                };
                if let Some(prev) = driven.get(&to).filter(|_| d.direction == Direction::In) {
                    report.unmatched.push(Unmatched {
                        port: bref,
                        reason: format!("{to} is already driven by {prev}"),
                    });
                    continue;
                }
                if d.direction == Direction::In {
                    driven.insert(to.clone(), from.clone());
                }
                used.insert(dref);
                report.connections.push(Connection { from, to, chain });
            }
            _ => {
                let mut c: Vec<PortRef> = candidates.iter().map(|(d, _)| d.port_ref()).collect();
                c.sort();
                report.ambiguous.push(Ambiguity { port: bref, candidates: c });
            }
        }
    }

    let mut devices: Vec<&SignalPort> = device_ports.iter().collect();
    devices.sort_by_key(|p| p.port_ref());
    for d in devices {
        let r = d.port_ref();
        if used.contains(&r) {
            continue;
        }
        let reason = if report.ambiguous.iter().any(|a| a.candidates.contains(&r)) {
            "candidate of an ambiguous match".to_string()
        } else {
            "no matching block port".to_string()
        };
        report.unmatched.push(Unmatched { port: r, reason });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{approx_eq, Converter};

    fn kb() -> KnowledgeBase {
        KnowledgeBase::parse(
            "TERM\tflow\nTERM\ttemperature\nTERM\tpump-start\nTERM\tpump-stop\nTERM\tStart\nTERM\tStop\n\
             SYN\tStart\tpump-start\nSYN\tStop\tpump-stop\n",
        )
        .unwrap()
    }

    fn reg() -> ConverterRegistry {
        let mut r = ConverterRegistry::new();
        r.register_converter(Converter::new("q1", "LitrePerMinute", "CubicMetrePerHour", 0.06, 0.0))
            .unwrap();
        r.register_unit("Bar");
        r
    }

    use Direction::{In, Out};

    #[test]
    fn flow_with_conversion() {
        let blocks = [SignalPort::new("FQS_1", "PV", In, "flow", Some("CubicMetrePerHour"))];
        let devices = [SignalPort::new("FT", "Out", Out, "flow", Some("LitrePerMinute"))];
        let r = match_signals(&blocks, &devices, &kb(), &reg());
        assert_eq!(r.connections.len(), 1);
        let c = r.connection_to("FQS_1", "PV").unwrap();
        assert_eq!(c.from.to_string(), "FT.Out");
        assert_eq!(c.chain.ids(), vec!["q1"]);
        assert!(approx_eq(c.transfer(60.0), 3.6));
        assert!(r.unmatched.is_empty());
    }

    #[test]
    fn synonyms_and_directions() {
        let blocks = [
            SignalPort::new("FQS_1", "Start", Out, "pump-start", None),
            SignalPort::new("FQS_1", "Stop", Out, "pump-stop", None),
        ];
        let devices = [
            SignalPort::new("P1", "Start", In, "Start", None),
            SignalPort::new("P1", "Stop", In, "Stop", None),
            SignalPort::new("P1", "Running", Out, "pump-start", None),
        ];
        let r = match_signals(&blocks, &devices, &kb(), &reg());
        assert_eq!(r.connections.len(), 2);
        assert_eq!(r.connection_from("FQS_1", "Start").unwrap().to.to_string(), "P1.Start");
        assert!(r.connection_from("FQS_1", "Stop").unwrap().chain.is_identity());
        assert_eq!(r.unmatched.len(), 1);
        assert_eq!(r.unmatched[0].port.to_string(), "P1.Running");
    }

    #[test]
    fn duplicate_outputs_are_ambiguous() {
        let blocks = [SignalPort::new("TC", "PV", In, "temperature", None)];
        let devices = [
            SignalPort::new("TT1", "Out", Out, "temperature", None),
            SignalPort::new("TT2", "Out", Out, "temperature", None),
        ];
        let r = match_signals(&blocks, &devices, &kb(), &reg());
        assert!(r.connections.is_empty());
        assert_eq!(r.ambiguous.len(), 1);
        assert_eq!(r.ambiguous[0].candidates.len(), 2);
    }

    #[test]
    fn unit_incompatibility_and_single_driver() {
        let blocks = [SignalPort::new("F", "PV", In, "flow", Some("Bar"))];
        let devices = [SignalPort::new("FT", "Out", Out, "flow", Some("LitrePerMinute"))];
        let r = match_signals(&blocks, &devices, &kb(), &reg());
        assert!(r.connections.is_empty());
        assert!(r.unmatched[0].reason.contains("FT.Out"), "{:?}", r.unmatched);

        let blocks = [
            SignalPort::new("A", "Cmd", Out, "pump-start", None),
            SignalPort::new("B", "Cmd", Out, "pump-start", None),
        ];
        let devices = [SignalPort::new("P1", "Start", In, "Start", None)];
        let r = match_signals(&blocks, &devices, &kb(), &reg());
        assert_eq!(r.connections.len(), 1);
        assert_eq!(r.connections[0].from.to_string(), "A.Cmd");
        assert!(r.unmatched[0].reason.contains("already driven by A.Cmd"));
    }

    #[test]
    fn port_file() {
        let p = parse_ports("PORT\tFT\tOut\tout\tflow\tLitrePerMinute\nPORT\tP1\tStart\tin\tStart\n").unwrap();
        assert_eq!(p[0].unit.as_deref(), Some("LitrePerMinute"));
        assert_eq!(p[1].unit, None);
        assert!(parse_ports("PORT\tFT\tOut\tsideways\tflow\n").is_err());
        assert!(parse_ports("PORT\tFT\tOut\tout\tflow\nPORT\tFT\tOut\tin\tflow\n").is_err());
        assert!(parse_ports("WIRE\tx\n").is_err());
    }
}

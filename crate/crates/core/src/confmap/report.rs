use super::{MappingReport, SignalReport};
use crate::units::format_decimal;

pub const ALL_RESOLVED: &str = "all parameters resolved";

/// Text rendering for a production manager. Resolved entries are sorted by
/// machine and parameter; missing entries keep resolution order.
pub fn explain(report: &MappingReport, signals: Option<&SignalReport>) -> String {
    let mut out = String::new();
    if report.missing.is_empty() {
        out.push_str(&format!("== {ALL_RESOLVED} ==\n"));
    } else {
        out.push_str(&format!(
            "== {} of {} parameters missing ==\n",
            report.missing.len(),
            report.total()
        ));
    }
    for ((machine, local), r) in &report.resolved {
        out.push_str(&format!(
            "RESOLVED {machine}.{local} = {} {} ({})\n",
            format_decimal(r.value.magnitude),
            r.value.unit,
            r.provenance
        ));
    }
    for m in &report.missing {
        out.push_str(&format!("MISSING {}.{}: {}\n", m.machine, m.local, m.reason));
    }
    if let Some(s) = signals {
        for c in &s.connections {
            let via = if c.chain.is_identity() {
                String::new()
            } else {
                format!(" via {}", c.chain)
            };
            out.push_str(&format!("CONNECT {} -> {}{via}\n", c.from, c.to));
        }
        for a in &s.ambiguous {
            let c: Vec<String> = a.candidates.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("AMBIGUOUS {}: {}\n", a.port, c.join(", ")));
        }
        for u in &s.unmatched {
            out.push_str(&format!("UNMATCHED {}: {}\n", u.port, u.reason));
        }
    }
    out
}

/// Tab-separated records in the same order as [`explain`]:
///
/// ```text
/// RESOLVED   machine  local  magnitude  unit  provenance  source
/// MISSING    machine  local  code       detail
/// CONNECT    from     to     chain-ids (comma separated, may be empty)
/// AMBIGUOUS  port     candidates (comma separated)
/// UNMATCHED  port     reason
/// ```
pub fn explain_tsv(report: &MappingReport, signals: Option<&SignalReport>) -> String {
    let mut out = String::new();
    for ((machine, local), r) in &report.resolved {
        out.push_str(&format!(
            "RESOLVED\t{machine}\t{local}\t{}\t{}\t{}\t{}\n",
            format_decimal(r.value.magnitude),
            r.value.unit,
            r.provenance.kind(),
            r.provenance.source()
        ));
    }
    for m in &report.missing {
        out.push_str(&format!("MISSING\t{}\t{}\t{}\t{}\n", m.machine, m.local, m.reason.code(), m.reason));
    }
    if let Some(s) = signals {
        for c in &s.connections {
            out.push_str(&format!("CONNECT\t{}\t{}\t{}\n", c.from, c.to, c.chain.ids().join(",")));
        }
        for a in &s.ambiguous {
            let c: Vec<String> = a.candidates.iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("AMBIGUOUS\t{}\t{}\n", a.port, c.join(",")));
        }
        for u in &s.unmatched {
            out.push_str(&format!("UNMATCHED\t{}\t{}\n", u.port, u.reason));
        }
    }
    out
}

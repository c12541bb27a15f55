use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use semdeg_core::busnet::{run_plug_and_sense, Mode, ScenarioConfig};
use semdeg_core::confmap::{bundled, explain, explain_tsv, Provenance};
use semdeg_core::linectl::{self, MachineState, SuspendReason};
use semdeg_core::units::approx_eq;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    PlugAndSense,
    PackagingLine,
    Interrupt,
}

/// One failed expectation, printed as a two-line diff.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub what: String,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\n- {}\n+ {}", self.what, self.expected, self.actual)
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    /// (file name, contents)
    pub files: Vec<(String, String)>,
    pub mismatches: Vec<Mismatch>,
}

impl Outcome {
    fn check(&mut self, what: &str, expected: impl fmt::Display, actual: impl fmt::Display) {
        let (e, a) = (expected.to_string(), actual.to_string());
        if e != a {
            self.mismatches.push(Mismatch {
                what: what.to_string(),
                expected: e,
                actual: a,
            });
        }
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, text) in &self.files {
            let p = dir.join(name);
            fs::write(&p, text)?;
            written.push(p);
        }
        Ok(written)
    }
}

pub fn run(s: Scenario, config: Option<&Path>) -> Result<Outcome, CliError> {
    if config.is_some() && s != Scenario::PlugAndSense {
        return Err(CliError::Usage("--config only applies to plug-and-sense".into()));
    }
    match s {
        Scenario::PlugAndSense => plug_and_sense(config),
        Scenario::PackagingLine => Ok(packaging_line()),
        Scenario::Interrupt => Ok(interrupt()),
    }
}

fn plug_and_sense(config: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = match config {
        Some(p) => ScenarioConfig::load(p).map_err(|e| CliError::Usage(e.to_string()))?,
        None => ScenarioConfig::bundled(),
    };
    let report = run_plug_and_sense(&cfg, Mode::Tcp).map_err(|e| CliError::Failed(format!("harness: {e}")))?;
    let mut out = Outcome::default();
    for f in &report.failures {
        out.mismatches.push(Mismatch {
            what: "scenario expectation".into(),
            expected: "as configured".into(),
            actual: f.clone(),
        });
    }
    out.files.push(("plug_and_sense.trace".into(), report.trace_text()));
    Ok(out)
}

fn packaging_line() -> Outcome {
    let mapping = bundled::packaging_line();
    let signals = bundled::charging_station();
    let mut out = Outcome::default();

    out.check("missing parameters", 0, mapping.missing.len());
    match mapping.get("Packaging", "Load") {
        Some(r) => out.check(
            "Packaging.Load provenance",
            Provenance::Synonym("Product.CommonParameter.Weight".into()),
            &r.provenance,
        ),
        None => out.check("Packaging.Load", "resolved", "missing"),
    }
    match mapping.get("Palletizer", "CartonWeight") {
        Some(r) if approx_eq(r.value.magnitude, 1.0) && r.value.unit == "Kilogram" => {}
        Some(r) => out.check("Palletizer.CartonWeight", "1 Kilogram", &r.value),
        None => out.check("Palletizer.CartonWeight", "resolved", "missing"),
    }
    match signals.connection_to("FQS_1", "PV") {
        Some(c) => {
            out.check("FQS_1.PV driver", "FT.Out", &c.from);
            if !approx_eq(c.transfer(60.0), 3.6) {
                out.check("FQS_1.PV at 60 LitrePerMinute", 3.6, c.transfer(60.0));
            }
        }
        None => out.check("FQS_1.PV driver", "FT.Out", "none"),
    }
    out.check("ambiguous ports", 0, signals.ambiguous.len());

    out.files.push(("packaging_line.txt".into(), explain(&mapping, Some(&signals))));
    out.files.push(("packaging_line.tsv".into(), explain_tsv(&mapping, Some(&signals))));
    out
}

fn interrupt() -> Outcome {
    let mut line = linectl::carton_jam();
    let mut out = Outcome::default();
    let mut suspended_at = None;
    let mut resumed_at = None;
    for _ in 0..linectl::CARTON_JAM_TICKS {
        line.step();
        if !line.tokens_conserved() {
            out.check("token conservation", "holds", format!("broken at tick {}", line.clock()));
        }
        match line.state("FFS") {
            Some(MachineState::Suspended(SuspendReason::Blocked)) if suspended_at.is_none() => {
                suspended_at = Some((line.clock(), line.buffer_counts()));
            }
            Some(MachineState::Producing) if suspended_at.is_some() && resumed_at.is_none() => {
                resumed_at = Some(line.clock());
            }
            _ => {}
        }
    }
    match suspended_at {
        Some((tick, counts)) => {
            out.check("FFS self-suspend tick", 5, tick);
            out.check("buffers at self-suspend", "B1=5/5 B2=0/5", counts);
        }
        None => out.check("FFS self-suspend", "tick 5", "never"),
    }
    if resumed_at.is_none() {
        out.check("FFS resumes after ResourceIn", "yes", "no");
    }
    out.files.push(("interrupt.trace".into(), line.trace_text()));
    out
}

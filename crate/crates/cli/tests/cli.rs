use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn semdeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semdeg")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn answers_file(dir: &Path, yes: &[&str], skip: &[&str]) -> String {
    let text: String = (0..9)
        .map(|i| format!("R{i}"))
        .filter(|r| !skip.contains(&r.as_str()))
        .map(|r| format!("{r} {}\n", if yes.contains(&r.as_str()) { "yes" } else { "no" }))
        .collect();
    let p = dir.join("answers.txt");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn advise_reasoning_rule() {
    let dir = tempfile::tempdir().unwrap();
    let o = semdeg(&["advise", "--answers", &answers_file(dir.path(), &["R7"], &[])]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out, include_str!("golden/advise_r7.txt"));
    assert!(out.starts_with("S5 Ontology / B2 Constraints\n"));
    for t in ["OWL", "RDFS", "OPC UA"] {
        assert!(out.contains(t), "{t}");
    }
}

#[test]
fn advise_all_no_lists_whole_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let o = semdeg(&["advise", "--answers", &answers_file(dir.path(), &[], &[])]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("S0 Repository / B0 Data\n"));
    let listed = out.lines().filter(|l| l.starts_with("  ")).count();
    assert_eq!(listed, semdeg_core::degrees::Catalog::builtin().len());
}

#[test]
fn advise_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = semdeg(&["advise", "--answers", &answers_file(dir.path(), &[], &["R8"])]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing answer for R8"));

    let p = dir.path().join("bad.txt");
    fs::write(&p, "R0 no\nR1 perhaps\n").unwrap();
    let o = semdeg(&["advise", "--answers", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));

    let o = semdeg(&["advise", "--answers", dir.path().join("absent").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(semdeg(&["advise", "--bogus"]).status.code(), Some(2));
}

#[test]
fn advise_interactive() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_semdeg"))
        .arg("advise")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"no\nyes\nno\nno\nno\nno\nno\nno\nyes B4\n")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("S1 Terminology / B4 Petri net"), "{}", stdout(&o));
}

#[test]
fn tech_subcommands() {
    let o = semdeg(&["tech", "lookup", "OPC UA"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("OPC UA: S5/B3"));
    let o = semdeg(&["tech", "lookup", "AutomationML", "--variant", "PLCOpen"]);
    assert_eq!(stdout(&o).trim(), "AutomationML (PLCOpen): S5/B3");
    assert_eq!(semdeg(&["tech", "lookup", "AutomationML"]).status.code(), Some(1));

    let o = semdeg(&["tech", "filter", "--structural", "S5", "--behavioral", "B2"]);
    let names: Vec<String> = stdout(&o).lines().map(|l| l.split(':').next().unwrap().to_string()).collect();
    assert_eq!(
        names,
        ["AutomationML (CAEX)", "AutomationML (PLCOpen)", "OPC UA", "OWL", "RDFS"]
    );
    assert_eq!(semdeg(&["tech", "filter", "--structural", "S9", "--behavioral", "B2"]).status.code(), Some(2));
}

#[test]
fn classify_bundled_fixture() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/demonstrators.features");
    let o = semdeg(&["classify", fixture]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out, include_str!("golden/demonstrators.txt"));
    assert!(out.contains("My-jogurt/2 routing from RFID info\tS1/B4\n"));
    assert!(out.contains("AutoPnP/2 recipe remapping\tS5/B2\n"));
}

#[test]
fn classify_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.features");
    fs::write(&empty, "").unwrap();
    let o = semdeg(&["classify", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");

    let bad = dir.path().join("bad.features");
    fs::write(&bad, "FEATURE x\nR1 sure\n").unwrap();
    assert_eq!(semdeg(&["classify", bad.to_str().unwrap()]).status.code(), Some(2));

    let wrong = dir.path().join("wrong.features");
    fs::write(&wrong, "FEATURE x\nR7 yes\nEXPECT S1/B1\n").unwrap();
    let o = semdeg(&["classify", wrong.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("x\tS5/B2\texpected S1/B1"));
}

#[test]
fn scenario_plug_and_sense() {
    let dir = tempfile::tempdir().unwrap();
    let o = semdeg(&["run-scenario", "plug-and-sense", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = fs::read_to_string(dir.path().join("plug_and_sense.trace")).unwrap();
    assert!(trace.contains("ConditionallyAccepted [f1 f2]"));
    assert!(trace.contains("deliver 25 Celsius"));
    assert_eq!(trace, include_str!("../../core/tests/golden/plug_and_sense.trace"));
}

#[test]
fn scenario_plug_and_sense_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    let text = semdeg_core::busnet::ScenarioConfig::bundled_text().replace("expect_value = 25", "expect_value = 26");
    assert!(text.contains("26"));
    fs::write(&cfg, text).unwrap();
    let o = semdeg(&["run-scenario", "plug-and-sense", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("scenario failed") && err.contains("- as configured"), "{err}");

    fs::write(&cfg, "[nonsense]\n").unwrap();
    let o = semdeg(&["run-scenario", "plug-and-sense", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = semdeg(&["run-scenario", "interrupt", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scenario_packaging_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = semdeg(&["run-scenario", "packaging-line", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("packaging_line.txt")).unwrap();
    assert_eq!(text, include_str!("../../core/tests/golden/packaging_line.explain"));
    let tsv = fs::read_to_string(dir.path().join("packaging_line.tsv")).unwrap();
    assert_eq!(tsv, include_str!("golden/packaging_line.tsv"));
}

#[test]
fn scenario_interrupt() {
    let o = semdeg(&["run-scenario", "interrupt"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("5\tFFS\tSuspended(blocked)\tB1=5/5 B2=0/5\n"));
    assert!(out.starts_with(include_str!("../../core/tests/golden/carton_jam.trace")));
    assert!(out.ends_with("scenario passed\n"));
}

#[test]
fn unknown_scenario_is_usage_error() {
    let o = semdeg(&["run-scenario", "conveyor"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("possible values"));
    assert_eq!(semdeg(&[]).status.code(), Some(2));
}

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semdeg_core::degrees::{advise, Answers, BehavioralDegree, Catalog, DegreePair, StructuralDegree};

mod answers;
mod scenarios;

use scenarios::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "semdeg", version, about = "Semantic-degree advisor and scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Answer the nine selection questions and get the minimal degree pair.
    Advise {
        /// File with one `Rn yes|no [Bx]` line per rule. Prompts on stdin when absent.
        #[arg(long)]
        answers: Option<PathBuf>,
    },
    /// Query the technology catalog.
    Tech {
        #[command(subcommand)]
        command: TechCommand,
    },
    /// Run a bundled scenario and check its expected outcome.
    RunScenario {
        #[arg(value_enum)]
        name: Scenario,
        /// Directory for trace and report files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Alternative plug-and-sense configuration (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the degree pair of every feature in a fixture file.
    Classify { fixture: PathBuf },
}

#[derive(Debug, Subcommand)]
enum TechCommand {
    Lookup {
        name: String,
        #[arg(long)]
        variant: Option<String>,
    },
    /// Technologies whose degrees dominate the given pair.
    Filter {
        #[arg(long)]
        structural: StructuralDegree,
        #[arg(long)]
        behavioral: BehavioralDegree,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn print_advice(out: &mut impl Write, answers: &Answers) -> Result<(), CliError> {
    let a = advise(answers);
    writeln!(out, "{}", a.result)?;
    let t: Vec<String> = a.triggered.iter().map(|r| r.to_string()).collect();
    writeln!(out, "triggered: {}", if t.is_empty() { "none".into() } else { t.join(" ") })?;
    for n in &a.notes {
        writeln!(out, "note: {n}")?;
    }
    writeln!(out, "technologies at or above {}:", a.result.code())?;
    for e in Catalog::builtin().filter(a.result) {
        writeln!(out, "  {e}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Advise { answers } => {
            let a = match answers {
                Some(p) => answers::parse_answers(&read(&p)?)?,
                None => answers::prompt_answers(&mut io::stdin().lock(), &mut out)?,
            };
            print_advice(&mut out, &a)?;
        }
        Command::Tech { command } => {
            let cat = Catalog::builtin();
            match command {
                TechCommand::Lookup { name, variant } => {
                    let e = cat
                        .lookup(&name, variant.as_deref())
                        .map_err(|e| CliError::Failed(e.to_string()))?;
                    writeln!(out, "{e}")?;
                }
                TechCommand::Filter { structural, behavioral } => {
                    for e in cat.filter(DegreePair::new(structural, behavioral)) {
                        writeln!(out, "{e}")?;
                    }
                }
            }
        }
        Command::RunScenario { name, out: dir, config } => {
            let outcome = scenarios::run(name, config.as_deref())?;
            match &dir {
                Some(d) => {
                    for p in outcome.write_to(d)? {
                        writeln!(out, "wrote {}", p.display())?;
                    }
                }
                None => {
                    for (_, text) in &outcome.files {
                        out.write_all(text.as_bytes())?;
                    }
                }
            }
            if !outcome.mismatches.is_empty() {
                let diff: Vec<String> = outcome.mismatches.iter().map(|m| m.to_string()).collect();
                return Err(CliError::Failed(format!("scenario failed\n{}", diff.join("\n"))));
            }
            writeln!(out, "scenario passed")?;
        }
        Command::Classify { fixture } => {
            let features = answers::parse_features(&read(&fixture)?)?;
            let mut wrong = Vec::new();
            for f in &features {
                let got = advise(&f.answers).result;
                match f.expected {
                    Some(e) if e != got => {
                        writeln!(out, "{}\t{}\texpected {}", f.name, got.code(), e.code())?;
                        wrong.push(f.name.clone());
                    }
                    _ => writeln!(out, "{}\t{}", f.name, got.code())?,
                }
            }
            if !wrong.is_empty() {
                return Err(CliError::Failed(format!("mismatched features: {}", wrong.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("semdeg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

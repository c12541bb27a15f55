use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{BehavioralDegree as B, DegreePair, DegreeParseError, StructuralDegree as S};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    R0,
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

impl RuleId {
    pub const ALL: [RuleId; 9] = [
        RuleId::R0,
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
        RuleId::R8,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.index())
    }
}

impl FromStr for RuleId {
    type Err = DegreeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        RuleId::ALL
            .into_iter()
            .find(|r| r.to_string().eq_ignore_ascii_case(t))
            .ok_or_else(|| DegreeParseError(s.to_string()))
    }
}

/// One selection guideline: a yes/no question and the minimal degree pair a
/// positive answer demands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub question: &'static str,
    pub minimum: DegreePair,
    /// Upper end of a ranged behavioral minimum. Only the lower bound takes
    /// part in joins.
    pub behavioral_upper: Option<B>,
    pub argument: &'static str,
    pub note: Option<&'static str>,
}

const fn pair(s: S, b: B) -> DegreePair {
    DegreePair::new(s, b)
}

static RULES: [Rule; 9] = [
    Rule {
        id: RuleId::R0,
        question: "Is the system scope very limited (one vendor, few entities, static setup)?",
        minimum: pair(S::Repository, B::Data),
        behavioral_upper: None,
        argument: "hard coding costs less than modelling",
        note: None,
    },
    Rule {
        id: RuleId::R1,
        question: "Do several parties exchange standardized, intuitively understood knowledge such as units?",
        minimum: pair(S::Terminology, B::Information),
        behavioral_upper: None,
        argument: "well defined terms are required",
        note: None,
    },
    Rule {
        id: RuleId::R2,
        question: "Do several parties need to coordinate how terms are used?",
        minimum: pair(S::Glossary, B::Information),
        behavioral_upper: None,
        argument: "human readable descriptions are needed",
        note: None,
    },
    Rule {
        id: RuleId::R3,
        question: "Must term definitions from other parties be integrated?",
        minimum: pair(S::Thesaurus, B::Information),
        behavioral_upper: None,
        argument: "differing definitions are mapped through a thesaurus",
        note: None,
    },
    Rule {
        id: RuleId::R4,
        question: "Is a basic, extensible type system needed for types added later?",
        minimum: pair(S::Taxonomy, B::Information),
        behavioral_upper: None,
        argument: "parent-child relations classify types",
        note: None,
    },
    Rule {
        id: RuleId::R5,
        question: "Must the system be dynamic and extensible, e.g. model new elements at runtime?",
        minimum: pair(S::Ontology, B::Information),
        behavioral_upper: None,
        argument: "relations themselves carry modelled meaning",
        note: None,
    },
    Rule {
        id: RuleId::R6,
        question: "Must evolving configurations be validated at runtime?",
        minimum: pair(S::Terminology, B::Constraints),
        behavioral_upper: None,
        argument: "requirements over a controlled vocabulary must be modelled",
        note: None,
    },
    Rule {
        id: RuleId::R7,
        question: "Shall reasoning be supported?",
        minimum: pair(S::Ontology, B::Constraints),
        behavioral_upper: None,
        argument: "complex, evaluable relationships must be described",
        note: None,
    },
    Rule {
        id: RuleId::R8,
        question: "Must the logic of another system be understood or modified?",
        minimum: pair(S::Terminology, B::FiniteAutomata),
        behavioral_upper: Some(B::ProgrammingLanguage),
        argument: "logic needs a machine interpretable description",
        note: Some("B3 Finite automata, up to B5 Programming language"),
    },
];

pub fn rules() -> &'static [Rule] {
    &RULES
}

pub fn rule(id: RuleId) -> &'static Rule {
    &RULES[id.index()]
}

/// Answer to one guideline question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Answer {
    No,
    Yes,
    /// Positive answer that also names the behavioral level actually needed,
    /// for rules whose minimum is a range.
    YesAt(B),
}

impl Answer {
    pub fn is_yes(self) -> bool {
        !matches!(self, Answer::No)
    }
}

pub type Answers = BTreeMap<RuleId, Answer>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advice {
    pub result: DegreePair,
    pub triggered: Vec<RuleId>,
    pub notes: Vec<String>,
}

/// Joins the minima of all positively answered rules.
///
/// Rules absent from `answers` count as "no" and are listed in the notes.
pub fn advise(answers: &Answers) -> Advice {
    let mut result = DegreePair::BOTTOM;
    let mut triggered = Vec::new();
    let mut notes = Vec::new();

    let missing: Vec<String> = RuleId::ALL
        .into_iter()
        .filter(|id| !answers.contains_key(id))
        .map(|id| id.to_string())
        .collect();
    if !missing.is_empty() {
        notes.push(format!("unanswered, treated as no: {}", missing.join(" ")));
    }

    for r in rules() {
        let answer = answers.get(&r.id).copied().unwrap_or(Answer::No);
        if !answer.is_yes() {
            continue;
        }
        triggered.push(r.id);
        let mut minimum = r.minimum;
        if let Answer::YesAt(level) = answer {
            match r.behavioral_upper {
                Some(upper) if level >= r.minimum.behavioral && level <= upper => {
                    minimum.behavioral = level;
                }
                Some(upper) => {
                    let clamped = level.clamp(r.minimum.behavioral, upper);
                    notes.push(format!(
                        "{}: requested {} outside {}..{}, using {}",
                        r.id,
                        level.code(),
                        r.minimum.behavioral.code(),
                        upper.code(),
                        clamped.code()
                    ));
                    minimum.behavioral = clamped;
                }
                None => notes.push(format!(
                    "{}: level {} ignored, rule has a fixed minimum",
                    r.id,
                    level.code()
                )),
            }
        }
        if let Some(note) = r.note {
            notes.push(format!("{}: {}", r.id, note));
        }
        result = result.join(minimum);
    }

    Advice {
        result,
        triggered,
        notes,
    }
}

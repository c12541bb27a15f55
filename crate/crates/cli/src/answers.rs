use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use semdeg_core::degrees::{rules, Answer, Answers, BehavioralDegree, DegreePair, RuleId};

use crate::CliError;

fn usage(line: usize, message: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("line {line}: {message}"))
}

/// `Rn yes|no [Bx]`; `Rn=yes` is accepted too.
fn parse_answer(line: usize, fields: &[&str]) -> Result<(RuleId, Answer), CliError> {
    let (id, rest) = fields.split_first().ok_or_else(|| usage(line, "empty answer"))?;
    let id: RuleId = id.parse().map_err(|_| usage(line, format!("unknown rule `{id}`")))?;
    let answer = match rest {
        [a] if a.eq_ignore_ascii_case("no") => Answer::No,
        [a] if a.eq_ignore_ascii_case("yes") => Answer::Yes,
        [a, level] if a.eq_ignore_ascii_case("yes") => {
            let b: BehavioralDegree = level
                .parse()
                .map_err(|_| usage(line, format!("unknown behavioral degree `{level}`")))?;
            Answer::YesAt(b)
        }
        _ => return Err(usage(line, format!("expected `{id} yes|no [Bx]`"))),
    };
    Ok((id, answer))
}

fn fields(raw: &str) -> Vec<&str> {
    raw.split(|c: char| c.is_whitespace() || c == '=').filter(|s| !s.is_empty()).collect()
}

fn is_blank(raw: &str) -> bool {
    let t = raw.trim();
    t.is_empty() || t.starts_with('#')
}

/// A complete questionnaire: every rule answered exactly once.
pub fn parse_answers(text: &str) -> Result<Answers, CliError> {
    let mut out = Answers::new();
    for (idx, raw) in text.lines().enumerate() {
        if is_blank(raw) {
            continue;
        }
        let (id, a) = parse_answer(idx + 1, &fields(raw))?;
        if out.insert(id, a).is_some() {
            return Err(usage(idx + 1, format!("{id} answered twice")));
        }
    }
    if let Some(id) = RuleId::ALL.into_iter().find(|id| !out.contains_key(id)) {
        return Err(CliError::Usage(format!("missing answer for {id}")));
    }
    Ok(out)
}

/// Asks each question in turn on `output`, reading replies from `input`.
pub fn prompt_answers(input: &mut impl BufRead, output: &mut impl Write) -> Result<Answers, CliError> {
    let mut out = Answers::new();
    for r in rules() {
        loop {
            write!(output, "{} {} [yes/no]: ", r.id, r.question)?;
            output.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                writeln!(output)?;
                return Err(CliError::Usage(format!("missing answer for {}", r.id)));
            }
            let mut f = vec![r.id.to_string()];
            f.extend(fields(&line).into_iter().map(str::to_string));
            let f: Vec<&str> = f.iter().map(String::as_str).collect();
            match parse_answer(0, &f) {
                Ok((_, a)) => {
                    out.insert(r.id, a);
                    break;
                }
                Err(_) => writeln!(output, "please answer yes or no")?,
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    pub name: String,
    pub answers: Answers,
    pub expected: Option<DegreePair>,
}

/// Feature fixtures:
///
/// ```text
/// FEATURE  name
/// Rn       yes|no  [Bx]
/// EXPECT   Sx/Bx
/// ```
///
/// Rules not listed for a feature count as "no".
pub fn parse_features(text: &str) -> Result<Vec<Feature>, CliError> {
    let mut out: Vec<Feature> = Vec::new();
    let mut names = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if is_blank(raw) {
            continue;
        }
        let f = fields(raw);
        match f.as_slice() {
            ["FEATURE", rest @ ..] if !rest.is_empty() => {
                let name = rest.join(" ");
                if names.insert(name.clone(), line).is_some() {
                    return Err(usage(line, format!("feature `{name}` defined twice")));
                }
                out.push(Feature {
                    name,
                    answers: Answers::new(),
                    expected: None,
                });
            }
            ["EXPECT", p] => {
                let cur = out.last_mut().ok_or_else(|| usage(line, "EXPECT before FEATURE"))?;
                let p: DegreePair = p.parse().map_err(|_| usage(line, format!("invalid degree pair `{p}`")))?;
                cur.expected = Some(p);
            }
            _ => {
                let (id, a) = parse_answer(line, &f)?;
                let cur = out.last_mut().ok_or_else(|| usage(line, "answer before FEATURE"))?;
                for id in RuleId::ALL {
                    cur.answers.entry(id).or_insert(Answer::No);
                }
                cur.answers.insert(id, a);
            }
        }
    }
    for feat in &mut out {
        for id in RuleId::ALL {
            feat.answers.entry(id).or_insert(Answer::No);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(a: &str) -> String {
        RuleId::ALL.iter().map(|id| format!("{id} {a}\n")).collect()
    }

    #[test]
    fn full_file() {
        let a = parse_answers(&all("no").replace("R7 no", "R7=yes")).unwrap();
        assert_eq!(a[&RuleId::R7], Answer::Yes);
        assert_eq!(a.len(), 9);
    }

    #[test]
    fn missing_and_malformed() {
        let text = all("no").replace("R8 no\n", "");
        assert_eq!(parse_answers(&text).unwrap_err().to_string(), "missing answer for R8");
        let err = parse_answers("R0 no\nR1 maybe\n").unwrap_err();
        assert_eq!(err.to_string(), "line 2: expected `R1 yes|no [Bx]`");
        assert!(parse_answers("R0 no\nR0 yes\n").unwrap_err().to_string().contains("twice"));
        assert!(parse_answers("R9 no\n").is_err());
    }

    #[test]
    fn prompts() {
        let mut input = "yes\nperhaps\nno\n".as_bytes();
        let mut out = Vec::new();
        let err = prompt_answers(&mut input, &mut out).unwrap_err();
        assert_eq!(err.to_string(), "missing answer for R2");
        assert!(String::from_utf8(out).unwrap().contains("please answer yes or no"));

        let mut input = "no\n".repeat(9).into_bytes();
        let a = prompt_answers(&mut input.as_slice(), &mut Vec::new()).unwrap();
        assert!(a.values().all(|a| *a == Answer::No));
        input.clear();
    }

    #[test]
    fn features() {
        let f = parse_features("# x\nFEATURE\ta b\nR1\tyes\nR8\tyes\tB4\nEXPECT\tS1/B4\nFEATURE\tc\n").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].name, "a b");
        assert_eq!(f[0].answers[&RuleId::R8], Answer::YesAt(BehavioralDegree::PetriNets));
        assert_eq!(f[0].answers.len(), 9);
        assert_eq!(f[1].expected, None);
        assert!(parse_features("R1 yes\n").is_err());
        assert!(parse_features("FEATURE a\nEXPECT S9/B1\n").is_err());
        assert!(parse_features("FEATURE a\nFEATURE a\n").is_err());
        assert!(parse_features("").unwrap().is_empty());
    }
}

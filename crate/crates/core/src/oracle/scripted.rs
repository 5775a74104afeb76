//! Deterministic rule-based oracle read from a text file.
//!
//! ```text
//! rule rescueSurvivor(?s,?loc)
//!   when: isDrone(?d), atDrone(?d,?from), safeHaven(?sh)
//!   steps: !fly(?d,?from,?loc), !pickUpSurvivor(?d,?s,?loc)
//!   steps: !fly(?d,?loc,?sh), !dropSurvivor(?d,?s,?sh)
//! rule checkSurvivors(?loc)
//!   fault: malformed
//! ```
//!
//! The first rule whose head matches the task and whose `when` literals hold
//! (first binding in canonical order) answers. A `fault` tag turns the
//! answer into a malformed completion, a refusal or a transport error, or
//! corrupts the rule's steps (`inapplicable` drops the first step,
//! `wrong-final-state` drops the last). No matching rule is a refusal.

use std::fmt;

use super::expert::{corrupt_steps, FaultKind};
use super::{parse_steps, render_steps, DecompositionOracle, OracleFailure, OracleRequest, OracleResponse};
use crate::domain::{parse_literals, parse_tasks, DomainError, Task};
use crate::symbolic::{match_terms, satisfy, Literal, Substitution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptFault {
    Malformed,
    Refuse,
    Transport,
    Inapplicable,
    WrongFinalState,
}

impl ScriptFault {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "malformed" => ScriptFault::Malformed,
            "refuse" => ScriptFault::Refuse,
            "transport" => ScriptFault::Transport,
            "inapplicable" => ScriptFault::Inapplicable,
            "wrong-final-state" => ScriptFault::WrongFinalState,
            _ => return None,
        })
    }
}

impl fmt::Display for ScriptFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScriptFault::Malformed => "malformed",
            ScriptFault::Refuse => "refuse",
            ScriptFault::Transport => "transport",
            ScriptFault::Inapplicable => "inapplicable",
            ScriptFault::WrongFinalState => "wrong-final-state",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptRule {
    pub head: Task,
    pub when: Vec<Literal>,
    pub steps: Vec<Task>,
    pub fault: Option<ScriptFault>,
}

pub fn parse_scripted_rules(text: &str) -> Result<Vec<ScriptRule>, DomainError> {
    let perr = |line: usize, message: String| DomainError::Parse { line, message };
    let mut rules: Vec<ScriptRule> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with(' ') || line.starts_with('\t');
        let line = line.trim();
        if !indented {
            let head = line
                .strip_prefix("rule")
                .ok_or_else(|| perr(no, "expected `rule task(...)`".into()))?;
            let head = Task::parse(head.trim()).map_err(|e| perr(no, e.to_string()))?;
            if head.primitive {
                return Err(perr(no, "rule heads must be compound tasks".into()));
            }
            rules.push(ScriptRule {
                head,
                when: vec![],
                steps: vec![],
                fault: None,
            });
            continue;
        }
        let rule = rules
            .last_mut()
            .ok_or_else(|| perr(no, "field outside of a rule".into()))?;
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| perr(no, "expected `key: value`".into()))?;
        let value = value.trim();
        match key.trim() {
            "when" => rule
                .when
                .extend(parse_literals(value).map_err(|e| perr(no, e.to_string()))?),
            "steps" => rule
                .steps
                .extend(parse_tasks(value).map_err(|e| perr(no, e.to_string()))?),
            "fault" => {
                rule.fault = Some(
                    ScriptFault::parse(value).ok_or_else(|| perr(no, format!("unknown fault `{value}`")))?,
                )
            }
            k => return Err(perr(no, format!("unexpected field `{k}`"))),
        }
    }
    Ok(rules)
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedOracle {
    rules: Vec<ScriptRule>,
}

impl ScriptedOracle {
    pub fn new(rules: Vec<ScriptRule>) -> Self {
        ScriptedOracle { rules }
    }

    pub fn from_text(text: &str) -> Result<Self, DomainError> {
        Ok(ScriptedOracle::new(parse_scripted_rules(text)?))
    }

    fn first_match(&self, req: &OracleRequest) -> Option<(&ScriptRule, Substitution)> {
        self.rules.iter().find_map(|r| {
            if r.head.name != req.task.name {
                return None;
            }
            let th = match_terms(&r.head.args, &req.task.args, &Substitution::new())?;
            let b = satisfy(&r.when, &req.state, &th).ok()?.next()?;
            Some((r, b))
        })
    }
}

impl DecompositionOracle for ScriptedOracle {
    fn propose(&self, req: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        let Some((rule, th)) = self.first_match(req) else {
            return Err(OracleFailure::Refused(format!("no rule for {}", req.task)));
        };
        let steps: Vec<Task> = rule.steps.iter().map(|s| s.apply(&th)).collect();
        let raw_text = match rule.fault {
            Some(ScriptFault::Malformed) => format!("I would start by handling {} carefully.", req.task),
            Some(ScriptFault::Refuse) => return Err(OracleFailure::Refused("scripted refusal".into())),
            Some(ScriptFault::Transport) => return Err(OracleFailure::Transport("scripted transport error".into())),
            Some(ScriptFault::Inapplicable) => render_steps(&corrupt_steps(FaultKind::Inapplicable, steps)),
            Some(ScriptFault::WrongFinalState) => render_steps(&corrupt_steps(FaultKind::WrongFinalState, steps)),
            None => render_steps(&steps),
        };
        let steps = parse_steps(&raw_text)?;
        Ok(OracleResponse {
            steps,
            raw_text,
            transcript: Vec::new(),
        })
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{parse_atoms, AnnotatedTask};
    use crate::symbolic::State;

    const RULES: &str = "\
rule rescueSurvivor(?s,?loc)
  when: isDrone(?d), atDrone(?d,?from), not(atDrone(?d,?loc)), safeHaven(?sh)
  steps: !fly(?d,?from,?loc), !pickUpSurvivor(?d,?s,?loc)
  steps: !fly(?d,?loc,?sh), !dropSurvivor(?d,?s,?sh)
rule checkSurvivors(?loc)
  fault: malformed
rule scanLocation(?loc)
  steps: !scanArea(?loc)
  fault: wrong-final-state
";

    fn req(task: &str, state: &str) -> OracleRequest {
        let task = Task::parse(task).unwrap();
        OracleRequest {
            annotated: AnnotatedTask {
                head: task.clone(),
                preconds: vec![],
                effects: vec![],
            },
            task,
            state: State::from_atoms(parse_atoms(state).unwrap()),
            operator_catalog: vec![],
        }
    }

    #[test]
    fn remote_rescue_rule_gives_four_steps() {
        let o = ScriptedOracle::from_text(RULES).unwrap();
        let r = o
            .propose(&req(
                "rescueSurvivor(Maria,Zulu)",
                "isDrone(Drone01), atDrone(Drone01,safeHaven), safeHaven(safeHaven)",
            ))
            .unwrap();
        assert_eq!(
            r.raw_text,
            "!fly(Drone01,safeHaven,Zulu)\n!pickUpSurvivor(Drone01,Maria,Zulu)\n\
             !fly(Drone01,Zulu,safeHaven)\n!dropSurvivor(Drone01,Maria,safeHaven)\n"
        );
        assert_eq!(r.steps.len(), 4);
    }

    #[test]
    fn faults_and_misses() {
        let o = ScriptedOracle::from_text(RULES).unwrap();
        assert!(matches!(
            o.propose(&req("checkSurvivors(Zulu)", "")),
            Err(OracleFailure::Malformed { .. })
        ));
        // the only step is dropped, leaving nothing to parse
        assert!(matches!(
            o.propose(&req("scanLocation(Zulu)", "")),
            Err(OracleFailure::Malformed { .. })
        ));
        assert!(matches!(
            o.propose(&req("rescueSurvivor(Maria,Zulu)", "")),
            Err(OracleFailure::Refused(_))
        ));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_scripted_rules("  steps: !a()").is_err());
        assert!(parse_scripted_rules("rule !a()").is_err());
        assert!(parse_scripted_rules("rule a()\n  fault: explode").is_err());
    }
}

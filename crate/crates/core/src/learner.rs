//! Method learning from verified oracle decompositions.
//!
//! A trace records the ground primitive steps an oracle proposed for a
//! compound task together with the states they produced. Regressing the
//! task's effects back through the steps yields the weakest preconditions
//! under which the same step sequence achieves the effects; lifting the
//! task, those preconditions and the steps with one constant map gives a
//! method that applies to other instances of the task in other states.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    apply_operator, operator_applicable, AnnotatedTask, Method, Operator, Provenance, Task,
};
use crate::symbolic::{match_terms, satisfy, Atom, Lifter, Literal, State, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("regression conflict at step {step}: {literal}")]
    RegressionConflict { step: usize, literal: Literal },
    #[error("step {0} is not ground under its substitution")]
    UngroundedStep(usize),
    #[error("learned head {0} has no variables")]
    LiftingDegenerate(Task),
    #[error("trace step {0} is not applicable in its state")]
    StepInapplicable(usize),
    #[error("trace does not reach the task effects: {0} missing")]
    EffectsUnmet(Atom),
    #[error("trace task must be ground and compound")]
    BadTask,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub task: Task,
    pub operator: Operator,
    pub binding: Substitution,
}

/// Ground record of one verified decomposition.
///
/// `states[0]` is the state at decomposition time and `states[i]` the
/// result of applying step `i-1`. The constructor enforces that every step
/// applies and the final state contains the effects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionTrace {
    pub task: Task,
    pub annotated: AnnotatedTask,
    pub effects: Vec<Atom>,
    pub steps: Vec<TraceStep>,
    pub states: Vec<State>,
}

impl DecompositionTrace {
    pub fn record(
        task: Task,
        annotated: AnnotatedTask,
        effects: Vec<Atom>,
        start: State,
        steps: Vec<TraceStep>,
    ) -> Result<Self, LearnError> {
        if task.primitive || !task.is_ground() {
            return Err(LearnError::BadTask);
        }
        let mut states = Vec::with_capacity(steps.len() + 1);
        states.push(start);
        for (i, step) in steps.iter().enumerate() {
            let s = states.last().expect("nonempty");
            let head = step.binding.apply_terms(&step.operator.head.args);
            if head != step.task.args || step.task.name != step.operator.head.name {
                return Err(LearnError::StepInapplicable(i));
            }
            let holds = satisfy(&step.operator.preconds, s, &step.binding)
                .map(|mut it| it.next().is_some_and(|th| th == step.binding))
                .unwrap_or(false);
            if !holds {
                return Err(LearnError::StepInapplicable(i));
            }
            let next = apply_operator(&step.operator, &step.binding, s);
            states.push(next);
        }
        let last = states.last().expect("nonempty");
        if let Some(e) = effects.iter().find(|e| !last.contains(e)) {
            return Err(LearnError::EffectsUnmet(e.clone()));
        }
        Ok(DecompositionTrace {
            task,
            annotated,
            effects,
            steps,
            states,
        })
    }

    pub fn operator_steps(&self) -> Vec<(Operator, Substitution)> {
        self.steps
            .iter()
            .map(|s| (s.operator.clone(), s.binding.clone()))
            .collect()
    }

    /// Constants that stay unlifted: those written into operator
    /// definitions and into the task's own annotation.
    pub fn domain_constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for s in &self.steps {
            let op = &s.operator;
            let atoms = op
                .preconds
                .iter()
                .map(|l| &l.atom)
                .chain(&op.add)
                .chain(&op.del)
                .cloned()
                .chain(std::iter::once(op.head.as_atom()));
            for a in atoms {
                out.extend(a.constants().map(str::to_string));
            }
        }
        let at = &self.annotated;
        for a in at.effects.iter().chain(std::iter::once(&at.head.as_atom())) {
            out.extend(a.constants().map(str::to_string));
        }
        out
    }
}

/// Goal regression of `goal` back through `steps` (processed last to first).
///
/// At each step with ground add list `a`, delete list `d` and
/// preconditions `p`: positive goals in `a` are dropped (a positive goal in
/// `d` but not `a` is a conflict), negated goals whose atom is in `d` are
/// dropped (in `a` is a conflict), then `p` is added. Output is in
/// canonical order.
pub fn regress(steps: &[(Operator, Substitution)], goal: &[Literal]) -> Result<Vec<Literal>, LearnError> {
    let mut current: BTreeSet<Literal> = goal.iter().cloned().collect();
    for (i, (op, th)) in steps.iter().enumerate().rev() {
        let add: BTreeSet<Atom> = op.add.iter().map(|a| th.apply_atom(a)).collect();
        let del: BTreeSet<Atom> = op.del.iter().map(|a| th.apply_atom(a)).collect();
        let pre: Vec<Literal> = op.preconds.iter().map(|l| th.apply_literal(l)).collect();
        if add.iter().chain(&del).any(|a| !a.is_ground()) || pre.iter().any(|l| !l.atom.is_ground()) {
            return Err(LearnError::UngroundedStep(i));
        }
        let mut next = BTreeSet::new();
        for lit in current {
            let in_add = add.contains(&lit.atom);
            let in_del = del.contains(&lit.atom);
            match (lit.negated, in_add, in_del) {
                (false, true, _) => {}
                (false, false, true) => return Err(LearnError::RegressionConflict { step: i, literal: lit }),
                (true, true, _) => return Err(LearnError::RegressionConflict { step: i, literal: lit }),
                (true, false, true) => {}
                _ => {
                    next.insert(lit);
                }
            }
        }
        next.extend(pre);
        if let Some(l) = next
            .iter()
            .find(|l| !l.negated && next.contains(&Literal::neg(l.atom.clone())))
        {
            return Err(LearnError::RegressionConflict {
                step: i,
                literal: l.clone(),
            });
        }
        current = next;
    }
    Ok(current.into_iter().collect())
}

/// Learns `(t↑, p↑, steps↑)` from a verified trace.
pub fn learn_method(trace: &DecompositionTrace) -> Result<Method, LearnError> {
    let goal: Vec<Literal> = trace.effects.iter().cloned().map(Literal::pos).collect();
    let pre = regress(&trace.operator_steps(), &goal)?;
    let mut lifter = Lifter::keeping(trace.domain_constants());
    let head = Task::new(trace.task.name.clone(), lifter.lift_terms(&trace.task.args), false);
    if !head.args.is_empty() && head.args.iter().all(Term::is_ground) {
        return Err(LearnError::LiftingDegenerate(head));
    }
    let subtasks = trace
        .steps
        .iter()
        .map(|s| Task::new(s.task.name.clone(), lifter.lift_terms(&s.task.args), true))
        .collect();
    let preconds = pre.iter().map(|l| lifter.lift_literal(l)).collect();
    Ok(Method {
        name: format!("{}_learned", trace.task.name),
        head,
        preconds,
        subtasks,
        provenance: Provenance::Learned,
    })
}

fn match_pointwise(patterns: &[Term], grounds: &[Term], th: Substitution) -> Option<Substitution> {
    match_terms(patterns, grounds, &th)
}

/// Checks a learned method against the trace it came from: grounding it
/// back reproduces the trace's head, regressed preconditions and steps
/// under an injective renaming, and replaying the steps from the trace's
/// first state reaches the effects.
pub fn validate_learned(m: &Method, trace: &DecompositionTrace) -> bool {
    if m.provenance != Provenance::Learned || m.head.name != trace.task.name {
        return false;
    }
    if m.subtasks.len() != trace.steps.len() {
        return false;
    }
    let goal: Vec<Literal> = trace.effects.iter().cloned().map(Literal::pos).collect();
    let Ok(ground_pre) = regress(&trace.operator_steps(), &goal) else {
        return false;
    };
    if ground_pre.len() != m.preconds.len() {
        return false;
    }
    let Some(mut th) = match_pointwise(&m.head.args, &trace.task.args, Substitution::new()) else {
        return false;
    };
    for (sub, step) in m.subtasks.iter().zip(&trace.steps) {
        if !sub.primitive || sub.name != step.task.name {
            return false;
        }
        match match_pointwise(&sub.args, &step.task.args, th) {
            Some(t) => th = t,
            None => return false,
        }
    }
    for (lit, g) in m.preconds.iter().zip(&ground_pre) {
        if lit.negated != g.negated || lit.atom.predicate != g.atom.predicate {
            return false;
        }
        match match_pointwise(&lit.atom.args, &g.atom.args, th) {
            Some(t) => th = t,
            None => return false,
        }
    }
    let mut seen: BTreeMap<&Term, &str> = BTreeMap::new();
    for (v, c) in th.iter() {
        if let Some(other) = seen.insert(c, v) {
            if other != v {
                return false;
            }
        }
    }

    let start = &trace.states[0];
    let head_th = match match_terms(&m.head.args, &trace.task.args, &Substitution::new()) {
        Some(t) => t,
        None => return false,
    };
    match satisfy(&m.preconds, start, &head_th) {
        Ok(mut it) => {
            if it.next().is_none() {
                return false;
            }
        }
        Err(_) => return false,
    }

    let mut s = start.clone();
    for (sub, step) in m.subtasks.iter().zip(&trace.steps) {
        let ground = sub.apply(&th);
        let Some(b) = operator_applicable(&step.operator, &s, &ground) else {
            return false;
        };
        s = apply_operator(&step.operator, &b, &s);
    }
    trace.effects.iter().all(|e| s.contains(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{parse_atoms, parse_literals};

    fn op(head: &str, pre: &str, add: &str, del: &str) -> Operator {
        Operator {
            head: Task::parse(head).unwrap(),
            preconds: parse_literals(pre).unwrap(),
            add: parse_atoms(add).unwrap(),
            del: parse_atoms(del).unwrap(),
        }
    }

    fn lits(s: &str) -> Vec<Literal> {
        parse_literals(s).unwrap()
    }

    fn bind(op: &Operator, task: &str) -> (Operator, Substitution) {
        let t = Task::parse(task).unwrap();
        let th = match_terms(&op.head.args, &t.args, &Substitution::new()).unwrap();
        (op.clone(), th)
    }

    fn sar_ops() -> (Operator, Operator, Operator) {
        let pick = op(
            "!pickUpSurvivor(?d,?s,?l)",
            "isDrone(?d), atDrone(?d,?l), at(?s,?l), empty(?d)",
            "carrying(?d,?s)",
            "at(?s,?l), empty(?d)",
        );
        let fly = op(
            "!fly(?d,?from,?to)",
            "isDrone(?d), atDrone(?d,?from)",
            "atDrone(?d,?to)",
            "atDrone(?d,?from)",
        );
        let unload = op(
            "!unload(?d,?s,?l)",
            "atDrone(?d,?l), carrying(?d,?s), safeHaven(?l)",
            "at(?s,?l), empty(?d)",
            "carrying(?d,?s)",
        );
        (pick, fly, unload)
    }

    #[test]
    fn empty_sequence_is_identity() {
        let g = lits("at(Maria,SH1), not(p(a))");
        let mut expected = g.clone();
        expected.sort();
        assert_eq!(regress(&[], &g).unwrap(), expected);
    }

    #[test]
    fn single_step_achieving_goal_yields_its_preconditions() {
        let o = op("!a(?x)", "q(?x), not(r(?x))", "p(?x)", "");
        let steps = vec![bind(&o, "!a(k)")];
        let mut expected = lits("q(k), not(r(k))");
        expected.sort();
        assert_eq!(regress(&steps, &lits("p(k)")).unwrap(), expected);
    }

    #[test]
    fn regression_through_table_method_steps() {
        // pickUp, fly, unload as in the hand-written rescue method
        let (pick, fly, unload) = sar_ops();
        let steps = vec![
            bind(&pick, "!pickUpSurvivor(Drone01,Maria,Zulu)"),
            bind(&fly, "!fly(Drone01,Zulu,SH1)"),
            bind(&unload, "!unload(Drone01,Maria,SH1)"),
        ];
        let got = regress(&steps, &lits("at(Maria,SH1)")).unwrap();
        // hand regression:
        // unload: {} ∪ {atDrone(D,SH1), carrying(D,M), safeHaven(SH1)}
        // fly:    {carrying, safeHaven} ∪ {isDrone(D), atDrone(D,Zulu)}
        // pickUp: {safeHaven, isDrone, atDrone(D,Zulu)} ∪ {isDrone, atDrone(D,Zulu), at(M,Zulu), empty(D)}
        let mut expected = lits(
            "safeHaven(SH1), isDrone(Drone01), atDrone(Drone01,Zulu), at(Maria,Zulu), empty(Drone01)",
        );
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn deleting_a_goal_is_a_conflict() {
        let o = op("!a(?x)", "", "", "p(?x)");
        let err = regress(&[bind(&o, "!a(k)")], &lits("p(k)")).unwrap_err();
        assert!(matches!(err, LearnError::RegressionConflict { step: 0, .. }));
        let o = op("!b(?x)", "", "p(?x)", "");
        let err = regress(&[bind(&o, "!b(k)")], &lits("not(p(k))")).unwrap_err();
        assert!(matches!(err, LearnError::RegressionConflict { .. }));
    }

    #[test]
    fn negated_goal_satisfied_by_delete() {
        let o = op("!clear(?x)", "p(?x)", "", "p(?x)");
        assert_eq!(
            regress(&[bind(&o, "!clear(k)")], &lits("not(p(k))")).unwrap(),
            lits("p(k)")
        );
    }

    #[test]
    fn ungrounded_step_is_reported() {
        let o = op("!a(?x)", "q(?y)", "p(?x)", "");
        let steps = vec![bind(&o, "!a(k)")];
        assert_eq!(regress(&steps, &lits("p(k)")), Err(LearnError::UngroundedStep(0)));
    }

    fn maria_trace() -> DecompositionTrace {
        let (pick, fly, unload) = sar_ops();
        let start = State::from_atoms(parse_atoms(
            "isDrone(D1), atDrone(D1,Zulu), at(Maria,Zulu), at(John,Zulu), empty(D1), safeHaven(SH1)",
        ).unwrap());
        let steps = [
            (&pick, "!pickUpSurvivor(D1,Maria,Zulu)"),
            (&fly, "!fly(D1,Zulu,SH1)"),
            (&unload, "!unload(D1,Maria,SH1)"),
        ]
        .into_iter()
        .map(|(o, t)| {
            let (op, binding) = bind(o, t);
            TraceStep {
                task: Task::parse(t).unwrap(),
                operator: op,
                binding,
            }
        })
        .collect();
        DecompositionTrace::record(
            Task::compound("rescueSurvivor", &["Maria", "Zulu"]),
            AnnotatedTask {
                head: Task::parse("rescueSurvivor(?survivor,?loc)").unwrap(),
                preconds: lits("safeHaven(?SH), at(?survivor,?loc)"),
                effects: parse_atoms("at(?survivor,?SH)").unwrap(),
            },
            parse_atoms("at(Maria,SH1)").unwrap(),
            start,
            steps,
        )
        .unwrap()
    }

    #[test]
    fn learns_lifted_rescue_method() {
        let trace = maria_trace();
        let m = learn_method(&trace).unwrap();
        assert_eq!(m.head.to_string(), "rescueSurvivor(?Maria,?Zulu)");
        assert_eq!(
            m.subtasks.iter().map(ToString::to_string).collect::<Vec<_>>(),
            vec![
                "!pickUpSurvivor(?D1,?Maria,?Zulu)",
                "!fly(?D1,?Zulu,?SH1)",
                "!unload(?D1,?Maria,?SH1)"
            ]
        );
        assert!(m.preconds.contains(&Literal::parse("safeHaven(?SH1)").unwrap()));
        assert!(validate_learned(&m, &trace));

        // applies to John in a later state, with different names
        let later = State::from_atoms(parse_atoms(
            "isDrone(D1), atDrone(D1,Zulu), at(John,Zulu), at(Maria,SH1), empty(D1), safeHaven(SH1)",
        ).unwrap());
        let th = match_terms(&m.head.args, &Task::compound("rescueSurvivor", &["John", "Zulu"]).args, &Substitution::new()).unwrap();
        assert!(satisfy(&m.preconds, &later, &th).unwrap().next().is_some());
    }

    #[test]
    fn validation_rejects_tampered_methods() {
        let trace = maria_trace();
        let mut m = learn_method(&trace).unwrap();
        m.preconds.remove(0);
        assert!(!validate_learned(&m, &trace));
        let mut m = learn_method(&trace).unwrap();
        m.subtasks.swap(0, 1);
        assert!(!validate_learned(&m, &trace));
    }

    #[test]
    fn faulty_trace_never_reaches_learning() {
        let (pick, _, _) = sar_ops();
        let (op, binding) = bind(&pick, "!pickUpSurvivor(D1,Maria,Zulu)");
        let start = State::from_atoms(parse_atoms("isDrone(D1), atDrone(D1,Zulu), at(Maria,Zulu), empty(D1)").unwrap());
        let err = DecompositionTrace::record(
            Task::compound("rescueSurvivor", &["Maria", "Zulu"]),
            maria_trace().annotated,
            parse_atoms("at(Maria,SH1)").unwrap(),
            start.clone(),
            vec![TraceStep { task: Task::parse("!pickUpSurvivor(D1,Maria,Zulu)").unwrap(), operator: op.clone(), binding: binding.clone() }],
        )
        .unwrap_err();
        assert!(matches!(err, LearnError::EffectsUnmet(_)));

        let err = DecompositionTrace::record(
            Task::compound("rescueSurvivor", &["Maria", "Zulu"]),
            maria_trace().annotated,
            vec![],
            State::new(),
            vec![TraceStep { task: Task::parse("!pickUpSurvivor(D1,Maria,Zulu)").unwrap(), operator: op, binding }],
        )
        .unwrap_err();
        assert_eq!(err, LearnError::StepInapplicable(0));
    }

    #[test]
    fn do_nothing_trace_learns_termination_shape() {
        let noop = Operator::do_nothing();
        let start = State::from_atoms(parse_atoms("scanned(Zulu)").unwrap());
        let trace = DecompositionTrace::record(
            Task::compound("scanLocation", &["Zulu"]),
            AnnotatedTask {
                head: Task::parse("scanLocation(?l)").unwrap(),
                preconds: vec![],
                effects: parse_atoms("scanned(?l)").unwrap(),
            },
            parse_atoms("scanned(Zulu)").unwrap(),
            start,
            vec![TraceStep {
                task: Task::primitive("doNothing", &[]),
                operator: noop,
                binding: Substitution::new(),
            }],
        )
        .unwrap();
        let m = learn_method(&trace).unwrap();
        assert_eq!(m.preconds, lits("scanned(?Zulu)"));
        assert_eq!(m.subtasks[0].to_string(), "!doNothing()");
        assert!(validate_learned(&m, &trace));
    }
}

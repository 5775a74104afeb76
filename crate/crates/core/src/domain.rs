//! Tasks, operators, methods, annotated tasks, and the domain/problem/plan
//! containers built from them.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolic::{
    match_terms, satisfy, split_top_level, write_terms, Atom, ConstantMap, Lifter, Literal, State,
    Substitution, SymbolError, Term,
};

/// Name of the reserved no-op operator used by termination methods.
pub const DO_NOTHING: &str = "doNothing";
/// Prefix of synthetic verifier task names.
pub const VERIFY_PREFIX: &str = "verify_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid {construct}: {message}")]
    Validation { construct: String, message: String },
}

impl DomainError {
    pub(crate) fn validation(construct: impl fmt::Display, message: impl Into<String>) -> Self {
        DomainError::Validation {
            construct: construct.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Task {
    pub name: String,
    pub args: Vec<Term>,
    pub primitive: bool,
}

impl Task {
    pub fn new(name: impl Into<String>, args: Vec<Term>, primitive: bool) -> Self {
        Task {
            name: name.into(),
            args,
            primitive,
        }
    }

    pub fn primitive(name: &str, args: &[&str]) -> Self {
        Task::new(name, args.iter().map(|a| Term::constant(*a)).collect(), true)
    }

    pub fn compound(name: &str, args: &[&str]) -> Self {
        Task::new(name, args.iter().map(|a| Term::constant(*a)).collect(), false)
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn is_bookkeeping(&self) -> bool {
        self.primitive && (self.name == DO_NOTHING || self.name.starts_with(VERIFY_PREFIX))
    }

    pub fn apply(&self, th: &Substitution) -> Task {
        Task::new(self.name.clone(), th.apply_terms(&self.args), self.primitive)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    /// Atom view of the task (name as predicate), handy for matching.
    pub fn as_atom(&self) -> Atom {
        Atom::new(self.name.clone(), self.args.clone())
    }

    /// Parses `!name(args)` (primitive) or `name(args)` (compound).
    pub fn parse(text: &str) -> Result<Self, SymbolError> {
        let trimmed = text.trim();
        let (primitive, rest) = match trimmed.strip_prefix('!') {
            Some(r) => (true, r),
            None => (false, trimmed),
        };
        let atom = Atom::parse(rest)?;
        Ok(Task::new(atom.predicate, atom.args, primitive))
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.primitive {
            f.write_str("!")?;
        }
        write!(f, "{}(", self.name)?;
        write_terms(f, &self.args)?;
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operator {
    pub head: Task,
    pub preconds: Vec<Literal>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

impl Operator {
    pub fn do_nothing() -> Self {
        Operator {
            head: Task::new(DO_NOTHING, Vec::new(), true),
            preconds: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.head.name
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Handcrafted,
    Learned,
    Termination,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Handcrafted => "handcrafted",
            Provenance::Learned => "learned",
            Provenance::Termination => "termination",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "handcrafted" => Some(Provenance::Handcrafted),
            "learned" => Some(Provenance::Learned),
            "termination" => Some(Provenance::Termination),
            _ => None,
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Method {
    pub name: String,
    pub head: Task,
    pub preconds: Vec<Literal>,
    pub subtasks: Vec<Task>,
    pub provenance: Provenance,
}

impl Method {
    /// Canonical variable renaming (by first occurrence in head, subtasks,
    /// then preconditions) used to compare methods up to renaming.
    pub fn canonical_form(&self) -> (Task, Vec<Task>, Vec<Literal>) {
        let mut names: BTreeMap<String, String> = BTreeMap::new();
        let mut rename = |t: &Term| -> Term {
            match t {
                Term::Var(v) => {
                    let next = format!("v{}", names.len());
                    Term::Var(names.entry(v.clone()).or_insert(next).clone())
                }
                c => c.clone(),
            }
        };
        let head = Task::new(
            self.head.name.clone(),
            self.head.args.iter().map(&mut rename).collect(),
            false,
        );
        let subtasks = self
            .subtasks
            .iter()
            .map(|s| Task::new(s.name.clone(), s.args.iter().map(&mut rename).collect(), s.primitive))
            .collect();
        let preconds = self
            .preconds
            .iter()
            .map(|l| Literal {
                atom: Atom::new(l.atom.predicate.clone(), l.atom.args.iter().map(&mut rename).collect()),
                negated: l.negated,
            })
            .collect();
        (head, subtasks, preconds)
    }

    pub fn same_up_to_renaming(&self, other: &Method) -> bool {
        self.head.name == other.head.name && self.canonical_form() == other.canonical_form()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedTask {
    pub head: Task,
    pub preconds: Vec<Literal>,
    pub effects: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Domain {
    pub name: String,
    pub operators: Vec<Operator>,
    pub methods: Vec<Method>,
    pub annotated: Vec<AnnotatedTask>,
    pub arities: BTreeMap<String, usize>,
}

impl Domain {
    /// Builds and validates a domain. `doNothing` is injected when absent.
    pub fn new(
        name: impl Into<String>,
        mut operators: Vec<Operator>,
        methods: Vec<Method>,
        annotated: Vec<AnnotatedTask>,
    ) -> Result<Self, DomainError> {
        if !operators.iter().any(|o| o.name() == DO_NOTHING) {
            operators.push(Operator::do_nothing());
        }
        let mut d = Domain {
            name: name.into(),
            operators,
            methods,
            annotated,
            arities: BTreeMap::new(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn operator(&self, name: &str) -> Option<&Operator> {
        self.operators.iter().find(|o| o.name() == name)
    }

    pub fn annotated_task(&self, name: &str) -> Option<&AnnotatedTask> {
        self.annotated.iter().find(|a| a.head.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&Method> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn methods_for<'a>(&'a self, task_name: &'a str) -> impl Iterator<Item = &'a Method> + 'a {
        self.methods.iter().filter(move |m| m.head.name == task_name)
    }

    /// Every compound task name mentioned by a method head, method subtask or annotation.
    pub fn compound_task_names(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for m in &self.methods {
            out.insert(m.head.name.as_str());
            for s in m.subtasks.iter().filter(|s| !s.primitive) {
                out.insert(s.name.as_str());
            }
        }
        for a in &self.annotated {
            out.insert(a.head.name.as_str());
        }
        out
    }

    /// Operator for a plan step, including synthetic verifier operators.
    pub fn operator_for_step(&self, step: &Task) -> Option<Cow<'_, Operator>> {
        if !step.primitive {
            return None;
        }
        if let Some(target) = step.name.strip_prefix(VERIFY_PREFIX) {
            let at = self.annotated_task(target)?;
            let binding = match_terms(&at.head.args, &step.args, &Substitution::new())?;
            let (_, op) = make_verifier(at, &binding);
            return Some(Cow::Owned(op));
        }
        self.operator(&step.name).map(Cow::Borrowed)
    }

    /// A copy of the domain without the named method.
    pub fn without_method(&self, name: &str) -> Option<Domain> {
        let idx = self.methods.iter().position(|m| m.name == name)?;
        let mut d = self.clone();
        d.methods.remove(idx);
        Some(d)
    }

    /// Adds the generated termination method of every annotated task that
    /// has no termination method yet. Running it twice adds nothing.
    pub fn with_generated_termination_methods(mut self) -> Self {
        for at in self.annotated.clone() {
            let exists = self
                .methods
                .iter()
                .any(|m| m.head.name == at.head.name && m.provenance == Provenance::Termination);
            if !exists {
                let mut m = make_termination_method(&at);
                m.name = format!("{}_term", at.head.name);
                self.methods.push(m);
            }
        }
        self
    }

    /// Constants appearing anywhere in operator definitions.
    pub fn operator_constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for o in &self.operators {
            let atoms = o
                .preconds
                .iter()
                .map(|l| &l.atom)
                .chain(&o.add)
                .chain(&o.del);
            for a in atoms {
                out.extend(a.constants().map(str::to_string));
            }
            out.extend(o.head.as_atom().constants().map(str::to_string));
        }
        out
    }

    fn note_arity(&mut self, atom: &Atom, context: &str) -> Result<(), DomainError> {
        match self.arities.get(&atom.predicate) {
            Some(&n) if n != atom.arity() => Err(DomainError::validation(
                context,
                format!(
                    "predicate `{}` used with arity {} but previously with {}",
                    atom.predicate,
                    atom.arity(),
                    n
                ),
            )),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(atom.predicate.clone(), atom.arity());
                Ok(())
            }
        }
    }

    fn validate(&mut self) -> Result<(), DomainError> {
        self.arities.clear();
        let mut op_names = BTreeSet::new();
        for o in self.operators.clone() {
            let ctx = format!("operator {}", o.head);
            if !o.head.primitive {
                return Err(DomainError::validation(&ctx, "operator head must be primitive"));
            }
            if o.head.name.starts_with(VERIFY_PREFIX) {
                return Err(DomainError::validation(&ctx, "the verify_ prefix is reserved"));
            }
            if !op_names.insert(o.head.name.clone()) {
                return Err(DomainError::validation(&ctx, "duplicate operator"));
            }
            let mut bound: BTreeSet<&str> = o.head.variables().collect();
            for l in o.preconds.iter().filter(|l| !l.negated) {
                bound.extend(l.atom.variables());
            }
            for a in o.preconds.iter().map(|l| &l.atom).chain(&o.add).chain(&o.del) {
                self.note_arity(a, &ctx)?;
                if let Some(v) = a.variables().find(|v| !bound.contains(v)) {
                    return Err(DomainError::validation(&ctx, format!("variable ?{v} is never bound")));
                }
            }
            check_safe_negation(&o.preconds, &o.head, &ctx)?;
        }

        let mut names = BTreeSet::new();
        let methods = self.methods.clone();
        for m in &methods {
            let ctx = format!("method {}", m.name);
            if m.head.primitive {
                return Err(DomainError::validation(&ctx, "method head must be compound"));
            }
            if m.subtasks.is_empty() {
                return Err(DomainError::validation(&ctx, "method needs at least one subtask"));
            }
            if !names.insert(m.name.clone()) {
                return Err(DomainError::validation(&ctx, "duplicate method name"));
            }
            let mut bound: BTreeSet<&str> = m.head.variables().collect();
            for l in m.preconds.iter().filter(|l| !l.negated) {
                bound.extend(l.atom.variables());
            }
            for l in &m.preconds {
                self.note_arity(&l.atom, &ctx)?;
            }
            check_safe_negation(&m.preconds, &m.head, &ctx)?;
            for s in &m.subtasks {
                if let Some(v) = s.variables().find(|v| !bound.contains(v)) {
                    return Err(DomainError::validation(
                        &ctx,
                        format!("subtask {s} uses unbound variable ?{v}"),
                    ));
                }
                if s.primitive {
                    self.check_primitive_use(s, &ctx)?;
                }
            }
            if m.provenance == Provenance::Learned && m.subtasks.iter().any(|s| !s.primitive) {
                return Err(DomainError::validation(&ctx, "learned methods must be primitive-only"));
            }
        }

        let mut seen = BTreeSet::new();
        for a in self.annotated.clone() {
            let ctx = format!("annotated task {}", a.head);
            if a.head.primitive {
                return Err(DomainError::validation(&ctx, "annotated task must be compound"));
            }
            if !seen.insert(a.head.name.clone()) {
                return Err(DomainError::validation(&ctx, "duplicate annotated task"));
            }
            let mut bound: BTreeSet<&str> = a.head.variables().collect();
            for l in a.preconds.iter().filter(|l| !l.negated) {
                bound.extend(l.atom.variables());
            }
            for l in &a.preconds {
                self.note_arity(&l.atom, &ctx)?;
            }
            for e in &a.effects {
                self.note_arity(e, &ctx)?;
                if let Some(v) = e.variables().find(|v| !bound.contains(v)) {
                    return Err(DomainError::validation(&ctx, format!("effect variable ?{v} is never bound")));
                }
            }
        }
        Ok(())
    }

    fn check_primitive_use(&self, t: &Task, ctx: &str) -> Result<(), DomainError> {
        match self.operator(&t.name) {
            None => Err(DomainError::validation(ctx, format!("unknown operator `{}`", t.name))),
            Some(o) if o.head.args.len() != t.args.len() => Err(DomainError::validation(
                ctx,
                format!("`{}` expects {} arguments", t.name, o.head.args.len()),
            )),
            Some(_) => Ok(()),
        }
    }

    /// Checks that a problem's tasks and state agree with this domain.
    pub fn check_problem(&self, p: &Problem) -> Result<(), DomainError> {
        let ctx = format!("problem {}", p.id);
        if p.tasks.is_empty() {
            return Err(DomainError::validation(&ctx, "task list is empty"));
        }
        for a in p.state.iter() {
            if let Some(&n) = self.arities.get(&a.predicate) {
                if n != a.arity() {
                    return Err(DomainError::validation(&ctx, format!("atom {a} has wrong arity")));
                }
            }
        }
        let compound = self.compound_task_names();
        for t in &p.tasks {
            if !t.is_ground() {
                return Err(DomainError::validation(&ctx, format!("task {t} is not ground")));
            }
            if t.primitive {
                self.check_primitive_use(t, &ctx)?;
            } else if !compound.contains(t.name.as_str()) {
                return Err(DomainError::validation(&ctx, format!("unknown compound task `{}`", t.name)));
            }
        }
        Ok(())
    }
}

fn check_safe_negation(pre: &[Literal], head: &Task, ctx: &str) -> Result<(), DomainError> {
    let mut th = Substitution::new();
    for v in head.variables() {
        th.bind(v, Term::constant("_"));
    }
    satisfy(pre, &State::new(), &th)
        .map(|_| ())
        .map_err(|e| DomainError::validation(ctx, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    pub seed: u64,
    pub state: State,
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<Task>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Length without verifier and `doNothing` steps.
    pub fn len_excluding_bookkeeping(&self) -> usize {
        self.steps.iter().filter(|s| !s.is_bookkeeping()).count()
    }

    pub fn without_bookkeeping(&self) -> Vec<Task> {
        self.steps.iter().filter(|s| !s.is_bookkeeping()).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("step {index} ({step}): no operator")]
    UnknownStep { index: usize, step: Task },
    #[error("step {index} ({step}): not applicable")]
    NotApplicable { index: usize, step: Task },
}

/// First substitution under which `op` applies to ground task `t` in `s`.
pub fn operator_applicable(op: &Operator, s: &State, t: &Task) -> Option<Substitution> {
    operator_bindings(op, s, t).next()
}

/// All substitutions under which `op` applies to `t` in `s`, in canonical order.
pub fn operator_bindings<'a>(
    op: &'a Operator,
    s: &'a State,
    t: &Task,
) -> Box<dyn Iterator<Item = Substitution> + 'a> {
    if !t.primitive || op.head.name != t.name {
        return Box::new(std::iter::empty());
    }
    let Some(th) = match_terms(&op.head.args, &t.args, &Substitution::new()) else {
        return Box::new(std::iter::empty());
    };
    match satisfy(&op.preconds, s, &th) {
        Ok(it) => Box::new(it),
        Err(_) => Box::new(std::iter::empty()),
    }
}

/// `(s \ del·θ) ∪ add·θ`; the input state is left untouched.
pub fn apply_operator(op: &Operator, th: &Substitution, s: &State) -> State {
    let mut next = s.clone();
    for d in &op.del {
        next.remove(&th.apply_atom(d));
    }
    for a in &op.add {
        next.insert(th.apply_atom(a));
    }
    next
}

/// Builds the verifier task and operator checking `at`'s effects.
///
/// Effect variables left unbound by `binding` stay variables and are
/// checked existentially; annotated preconditions mentioning those
/// variables come along to constrain them (e.g. `safeHaven(?SH)`).
pub fn make_verifier(at: &AnnotatedTask, binding: &Substitution) -> (Task, Operator) {
    let head = Task::new(
        format!("{VERIFY_PREFIX}{}", at.head.name),
        binding.apply_terms(&at.head.args),
        true,
    );
    let mut preconds: Vec<Literal> = at
        .effects
        .iter()
        .map(|e| Literal::pos(binding.apply_atom(e)))
        .collect();
    let free: BTreeSet<String> = preconds
        .iter()
        .flat_map(|l| l.atom.variables().map(str::to_string).collect::<Vec<_>>())
        .collect();
    if !free.is_empty() {
        for l in &at.preconds {
            if l.atom.variables().any(|v| free.contains(v)) {
                preconds.push(binding.apply_literal(l));
            }
        }
    }
    let op = Operator {
        head: head.clone(),
        preconds,
        add: Vec::new(),
        del: Vec::new(),
    };
    (head, op)
}

/// `(t, effects, [!doNothing()])`.
pub fn make_termination_method(at: &AnnotatedTask) -> Method {
    Method {
        name: format!("{}_termination", at.head.name),
        head: at.head.clone(),
        preconds: at.effects.iter().cloned().map(Literal::pos).collect(),
        subtasks: vec![Task::new(DO_NOTHING, Vec::new(), true)],
        provenance: Provenance::Termination,
    }
}

/// Simulates `plan` from `state`; returns the final state.
pub fn replay_plan(domain: &Domain, state: &State, plan: &[Task]) -> Result<State, ReplayError> {
    let mut s = state.clone();
    for (index, step) in plan.iter().enumerate() {
        let op = domain.operator_for_step(step).ok_or_else(|| ReplayError::UnknownStep {
            index,
            step: step.clone(),
        })?;
        let th = operator_applicable(&op, &s, step).ok_or_else(|| ReplayError::NotApplicable {
            index,
            step: step.clone(),
        })?;
        s = apply_operator(&op, &th, &s);
    }
    Ok(s)
}

/// Lifts ground atoms and tasks with one shared constant map.
pub fn lift(atoms: &[Atom], tasks: &[Task]) -> (Vec<Atom>, Vec<Task>, ConstantMap) {
    let mut lifter = Lifter::new();
    let a = atoms.iter().map(|x| lifter.lift_atom(x)).collect();
    let t = tasks
        .iter()
        .map(|x| Task::new(x.name.clone(), lifter.lift_terms(&x.args), x.primitive))
        .collect();
    (a, t, lifter.into_constant_map())
}

pub(crate) fn parse_literals(text: &str) -> Result<Vec<Literal>, SymbolError> {
    split_top_level(text).into_iter().map(Literal::parse).collect()
}

pub(crate) fn parse_atoms(text: &str) -> Result<Vec<Atom>, SymbolError> {
    split_top_level(text).into_iter().map(Atom::parse).collect()
}

pub(crate) fn parse_tasks(text: &str) -> Result<Vec<Task>, SymbolError> {
    split_top_level(text).into_iter().map(Task::parse).collect()
}

//! Depth-first total-order HTN search with verifier tasks, oracle fallback
//! and online method learning.

use std::collections::BTreeMap;
use std::rc::Rc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::domain::{
    apply_operator, make_verifier, operator_applicable, operator_bindings, AnnotatedTask, Domain,
    Method, Operator, Plan, Provenance, Task,
};
use crate::learner::{learn_method, validate_learned, DecompositionTrace, TraceStep};
use crate::oracle::{DecompositionOracle, OracleRequest};
use crate::symbolic::{match_terms, satisfy, State, Substitution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerifierPolicy {
    /// Verify every decomposition of a task that has an annotation.
    AllAnnotated,
    /// Verify oracle decompositions only.
    OracleOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Maximum number of agenda items expanded along one search path.
    pub max_depth: usize,
    pub max_oracle_calls_per_problem: usize,
    pub verifier_policy: VerifierPolicy,
    pub learning_enabled: bool,
    pub oracle_enabled: bool,
    /// Total search nodes allowed per problem before giving up.
    pub max_nodes: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            max_depth: 500,
            max_oracle_calls_per_problem: 100,
            verifier_policy: VerifierPolicy::AllAnnotated,
            learning_enabled: true,
            oracle_enabled: true,
            max_nodes: 200_000,
        }
    }
}

impl PlannerConfig {
    /// Full-knowledge configuration: no oracle, no learning.
    pub fn offline() -> Self {
        PlannerConfig {
            oracle_enabled: false,
            learning_enabled: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub oracle_calls: usize,
    pub oracle_failures: usize,
    pub nodes_expanded: usize,
    pub backtracks: usize,
    pub wall_time_ms: f64,
    pub verifier_failures: usize,
    pub missing_annotations: usize,
    pub learned_methods: usize,
    pub learning_rejections: usize,
    pub duplicates_suppressed: usize,
    pub budget_exhausted: bool,
    /// Oracle failures by kind (`transport`, `malformed`, `refused`, `invalid-step`).
    pub failure_kinds: BTreeMap<String, usize>,
    /// Decompositions on the returned plan's path by source
    /// (`handcrafted`, `termination`, `learned`, `oracle`).
    pub provenance: BTreeMap<String, usize>,
}

impl Metrics {
    /// Equality ignoring wall time.
    pub fn same_counts(&self, other: &Metrics) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.wall_time_ms = 0.0;
        b.wall_time_ms = 0.0;
        a == b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Solved,
    Unsolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionSource {
    Method { name: String, provenance: Provenance },
    Oracle,
}

impl DecompositionSource {
    pub fn label(&self) -> &'static str {
        match self {
            DecompositionSource::Method { provenance, .. } => provenance.as_str(),
            DecompositionSource::Oracle => "oracle",
        }
    }
}

/// One decomposition on the solution path, in plan order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub task: Task,
    pub source: DecompositionSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub outcome: Outcome,
    pub plan: Option<Plan>,
    pub metrics: Metrics,
    pub learned_methods: Vec<Method>,
    pub decompositions: Vec<DecompositionRecord>,
    /// Verified oracle decompositions, in the order they were verified.
    pub traces: Vec<DecompositionTrace>,
}

impl PlanResult {
    pub fn solved(&self) -> bool {
        self.outcome == Outcome::Solved
    }

    /// Equality ignoring wall time.
    pub fn same_as(&self, other: &PlanResult) -> bool {
        self.outcome == other.outcome
            && self.plan == other.plan
            && self.metrics.same_counts(&other.metrics)
            && self.learned_methods == other.learned_methods
            && self.decompositions == other.decompositions
            && self.traces == other.traces
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    Method,
    Oracle,
}

/// Bookkeeping carried by a verifier from decomposition to verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingVerification {
    pub task: Task,
    pub annotated: AnnotatedTask,
    pub origin: Origin,
    pub trace_start_index: usize,
    pub start_state: State,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifierItem {
    pub head: Task,
    pub operator: Operator,
    /// Binding of the annotated task's head variables.
    pub head_binding: Substitution,
    pub pending: Option<Rc<PendingVerification>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgendaItem {
    Task(Task),
    Verify(Rc<VerifierItem>),
}

/// Persistent singly linked list shared between search nodes.
struct Cons<T> {
    head: T,
    tail: List<T>,
}

type List<T> = Option<Rc<Cons<T>>>;

fn cons<T>(head: T, tail: List<T>) -> List<T> {
    Some(Rc::new(Cons { head, tail }))
}

fn prepend<T: Clone>(items: Vec<T>, tail: List<T>) -> List<T> {
    items.into_iter().rev().fold(tail, |acc, x| cons(x, acc))
}

fn to_vec<T: Clone>(mut list: &List<T>) -> Vec<T> {
    let mut out = Vec::new();
    while let Some(node) = list {
        out.push(node.head.clone());
        list = &node.tail;
    }
    out
}

#[derive(Clone)]
struct PlanStep {
    task: Task,
    binding: Substitution,
}

/// Verifier for `t` under annotation `at`, or `None` when the head does not match.
fn verifier_for(t: &Task, at: &AnnotatedTask, pending: Option<Rc<PendingVerification>>) -> Option<AgendaItem> {
    let head_binding = match_terms(&at.head.args, &t.args, &Substitution::new())?;
    let (head, operator) = make_verifier(at, &head_binding);
    Some(AgendaItem::Verify(Rc::new(VerifierItem {
        head,
        operator,
        head_binding,
        pending,
    })))
}

/// Subtasks of `m` under `th`, followed by the verifier for `t` when the
/// policy asks for one and `t` is annotated.
fn method_prefix(domain: &Domain, t: &Task, m: &Method, th: &Substitution, policy: VerifierPolicy) -> Vec<AgendaItem> {
    let mut out: Vec<AgendaItem> = m.subtasks.iter().map(|s| AgendaItem::Task(s.apply(th))).collect();
    if policy == VerifierPolicy::AllAnnotated {
        if let Some(at) = domain.annotated_task(&t.name) {
            out.extend(verifier_for(t, at, None));
        }
    }
    out
}

/// `st_m·θ · [t_ver] · tasks`, where `tasks` are the remaining agenda items
/// after the decomposed head `t`.
pub fn decompose_with_method(
    domain: &Domain,
    t: &Task,
    m: &Method,
    th: &Substitution,
    tasks: &[AgendaItem],
    policy: VerifierPolicy,
) -> Vec<AgendaItem> {
    let mut out = method_prefix(domain, t, m, th, policy);
    out.extend_from_slice(tasks);
    out
}

/// All bindings under which `m` decomposes ground task `t` in `s`, with
/// every subtask ground.
pub fn method_bindings(m: &Method, s: &State, t: &Task) -> Vec<Substitution> {
    if m.head.name != t.name {
        return Vec::new();
    }
    let Some(th) = match_terms(&m.head.args, &t.args, &Substitution::new()) else {
        return Vec::new();
    };
    let Ok(it) = satisfy(&m.preconds, s, &th) else {
        return Vec::new();
    };
    it.filter(|b| m.subtasks.iter().all(|st| st.apply(b).is_ground()))
        .collect()
}

enum Abort {
    NodeBudget,
}

struct Solution {
    plan: List<PlanStep>,
    decomps: List<DecompositionRecord>,
}

/// A planner instance owning its learned-method store and metrics.
pub struct Planner<'a> {
    domain: &'a Domain,
    cfg: PlannerConfig,
    oracle: Option<&'a dyn DecompositionOracle>,
    learned: Vec<Rc<Method>>,
    learned_counter: usize,
    metrics: Metrics,
    traces: Vec<DecompositionTrace>,
}

impl<'a> Planner<'a> {
    pub fn new(domain: &'a Domain, cfg: PlannerConfig, oracle: Option<&'a dyn DecompositionOracle>) -> Self {
        assert!(cfg.max_depth >= 1, "max_depth must be at least 1");
        Planner {
            domain,
            cfg,
            oracle,
            learned: Vec::new(),
            learned_counter: 0,
            metrics: Metrics::default(),
            traces: Vec::new(),
        }
    }

    /// Number of methods in the learned-method store.
    pub fn learned_store_len(&self) -> usize {
        self.learned.len()
    }

    pub fn learned_methods(&self) -> Vec<Method> {
        self.learned.iter().map(|m| (**m).clone()).collect()
    }

    /// Plans `tasks` from `state`. Learned methods persist across calls on
    /// the same instance; metrics are per call.
    pub fn plan(&mut self, state: &State, tasks: &[Task]) -> PlanResult {
        let start = Instant::now();
        self.metrics = Metrics::default();
        self.traces.clear();
        let learned_before = self.learned.len();
        let agenda = prepend(tasks.iter().cloned().map(AgendaItem::Task).collect(), None);
        let found = self.search(agenda, Rc::new(state.clone()), None, 0, None, 0);
        let mut metrics = std::mem::take(&mut self.metrics);
        metrics.learned_methods = self.learned.len() - learned_before;
        let (outcome, plan, decomps) = match found {
            Ok(Some(sol)) => {
                let mut steps: Vec<Task> = to_vec(&sol.plan).into_iter().map(|p| p.task).collect();
                steps.reverse();
                let mut decomps = to_vec(&sol.decomps);
                decomps.reverse();
                (Outcome::Solved, Some(Plan { steps }), decomps)
            }
            Ok(None) => (Outcome::Unsolved, None, Vec::new()),
            Err(Abort::NodeBudget) => {
                metrics.budget_exhausted = true;
                (Outcome::Unsolved, None, Vec::new())
            }
        };
        for d in &decomps {
            *metrics.provenance.entry(d.source.label().to_string()).or_default() += 1;
        }
        metrics.wall_time_ms = start.elapsed().as_secs_f64() * 1000.0;
        PlanResult {
            outcome,
            plan,
            metrics,
            learned_methods: self.learned.iter().skip(learned_before).map(|m| (**m).clone()).collect(),
            decompositions: decomps,
            traces: std::mem::take(&mut self.traces),
        }
    }

    fn search(
        &mut self,
        agenda: List<AgendaItem>,
        state: Rc<State>,
        plan: List<PlanStep>,
        plan_len: usize,
        decomps: List<DecompositionRecord>,
        depth: usize,
    ) -> Result<Option<Solution>, Abort> {
        if self.metrics.nodes_expanded >= self.cfg.max_nodes {
            return Err(Abort::NodeBudget);
        }
        self.metrics.nodes_expanded += 1;
        let Some(node) = agenda else {
            return Ok(Some(Solution { plan, decomps }));
        };
        if depth >= self.cfg.max_depth {
            return Ok(None);
        }
        let rest = node.tail.clone();
        match &node.head {
            AgendaItem::Task(t) if t.primitive => self.expand_primitive(t, rest, state, plan, plan_len, decomps, depth),
            AgendaItem::Task(t) => self.expand_compound(t, rest, state, plan, plan_len, decomps, depth),
            AgendaItem::Verify(v) => self.expand_verifier(v, rest, state, plan, plan_len, decomps, depth),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn expand_primitive(
        &mut self,
        t: &Task,
        rest: List<AgendaItem>,
        state: Rc<State>,
        plan: List<PlanStep>,
        plan_len: usize,
        decomps: List<DecompositionRecord>,
        depth: usize,
    ) -> Result<Option<Solution>, Abort> {
        let domain = self.domain;
        let Some(op) = domain.operator(&t.name) else {
            return Ok(None);
        };
        let bindings: Vec<Substitution> = operator_bindings(op, &state, t).collect();
        for th in bindings {
            let next = Rc::new(apply_operator(op, &th, &state));
            let step = PlanStep {
                task: t.clone(),
                binding: th,
            };
            let found = self.search(rest.clone(), next, cons(step, plan.clone()), plan_len + 1, decomps.clone(), depth + 1)?;
            if found.is_some() {
                return Ok(found);
            }
            self.metrics.backtracks += 1;
        }
        Ok(None)
    }

    #[allow(clippy::too_many_arguments)]
    fn expand_verifier(
        &mut self,
        v: &Rc<VerifierItem>,
        rest: List<AgendaItem>,
        state: Rc<State>,
        plan: List<PlanStep>,
        plan_len: usize,
        decomps: List<DecompositionRecord>,
        depth: usize,
    ) -> Result<Option<Solution>, Abort> {
        let Some(th) = operator_applicable(&v.operator, &state, &v.head) else {
            self.metrics.verifier_failures += 1;
            return Ok(None);
        };
        if let Some(pv) = &v.pending {
            if pv.origin == Origin::Oracle {
                self.on_verifier_success(pv, v, &th, &plan, plan_len);
            }
        }
        let step = PlanStep {
            task: v.head.clone(),
            binding: th,
        };
        let found = self.search(rest, state, cons(step, plan), plan_len + 1, decomps, depth + 1)?;
        if found.is_none() {
            self.metrics.backtracks += 1;
        }
        Ok(found)
    }

    #[allow(clippy::too_many_arguments)]
    fn expand_compound(
        &mut self,
        t: &Task,
        rest: List<AgendaItem>,
        state: Rc<State>,
        plan: List<PlanStep>,
        plan_len: usize,
        decomps: List<DecompositionRecord>,
        depth: usize,
    ) -> Result<Option<Solution>, Abort> {
        let domain = self.domain;
        let candidates: Vec<Rc<Method>> = domain
            .methods_for(&t.name)
            .cloned()
            .map(Rc::new)
            .chain(self.learned.iter().rev().filter(|m| m.head.name == t.name).cloned())
            .collect();
        let mut any_applicable = false;
        for m in candidates {
            for th in method_bindings(&m, &state, t) {
                any_applicable = true;
                let prefix = method_prefix(domain, t, &m, &th, self.cfg.verifier_policy);
                let record = DecompositionRecord {
                    task: t.clone(),
                    source: DecompositionSource::Method {
                        name: m.name.clone(),
                        provenance: m.provenance,
                    },
                };
                let found = self.search(
                    prepend(prefix, rest.clone()),
                    state.clone(),
                    plan.clone(),
                    plan_len,
                    cons(record, decomps.clone()),
                    depth + 1,
                )?;
                if found.is_some() {
                    return Ok(found);
                }
                self.metrics.backtracks += 1;
            }
        }
        if any_applicable {
            return Ok(None);
        }
        let Some(prefix) = self.decompose_with_oracle(t, &state, plan_len) else {
            return Ok(None);
        };
        let record = DecompositionRecord {
            task: t.clone(),
            source: DecompositionSource::Oracle,
        };
        let found = self.search(prepend(prefix, rest), state, plan, plan_len, cons(record, decomps), depth + 1)?;
        if found.is_none() {
            self.metrics.backtracks += 1;
        }
        Ok(found)
    }

    /// Queries the oracle once for `t`; returns the step prefix (steps then
    /// verifier) or `None` after recording why it could not be used.
    fn decompose_with_oracle(
        &mut self,
        t: &Task,
        state: &State,
        plan_len: usize,
    ) -> Option<Vec<AgendaItem>> {
        if !self.cfg.oracle_enabled {
            return None;
        }
        let oracle = self.oracle?;
        if self.metrics.oracle_calls >= self.cfg.max_oracle_calls_per_problem {
            self.metrics.budget_exhausted = true;
            return None;
        }
        let domain = self.domain;
        let Some(at) = domain.annotated_task(&t.name) else {
            self.metrics.missing_annotations += 1;
            return None;
        };
        let req = OracleRequest {
            task: t.clone(),
            annotated: at.clone(),
            state: state.clone(),
            operator_catalog: domain.operators.clone(),
        };
        self.metrics.oracle_calls += 1;
        let response = match oracle.propose(&req) {
            Ok(r) => r,
            Err(f) => {
                self.record_failure(f.kind());
                return None;
            }
        };
        if !steps_well_formed(domain, &response.steps) {
            self.record_failure("invalid-step");
            return None;
        }
        let pv = Rc::new(PendingVerification {
            task: t.clone(),
            annotated: at.clone(),
            origin: Origin::Oracle,
            trace_start_index: plan_len,
            start_state: state.clone(),
        });
        let mut prefix: Vec<AgendaItem> = response.steps.into_iter().map(AgendaItem::Task).collect();
        prefix.extend(verifier_for(t, at, Some(pv)));
        Some(prefix)
    }

    fn record_failure(&mut self, kind: &str) {
        self.metrics.oracle_failures += 1;
        *self.metrics.failure_kinds.entry(kind.to_string()).or_default() += 1;
    }

    /// Builds the trace of a verified oracle decomposition and, when
    /// learning is on, learns, validates and stores a method from it.
    fn on_verifier_success(
        &mut self,
        pv: &PendingVerification,
        v: &VerifierItem,
        verifier_binding: &Substitution,
        plan: &List<PlanStep>,
        plan_len: usize,
    ) -> Option<Rc<Method>> {
        let count = plan_len - pv.trace_start_index;
        let mut recent = Vec::with_capacity(count);
        let mut cursor = plan;
        for _ in 0..count {
            let node = cursor.as_ref()?;
            recent.push(node.head.clone());
            cursor = &node.tail;
        }
        recent.reverse();
        let domain = self.domain;
        let steps: Option<Vec<TraceStep>> = recent
            .into_iter()
            .map(|p| {
                domain.operator(&p.task.name).map(|op| TraceStep {
                    task: p.task,
                    operator: op.clone(),
                    binding: p.binding,
                })
            })
            .collect();
        let effects = pv
            .annotated
            .effects
            .iter()
            .map(|e| verifier_binding.apply_atom(&v.head_binding.apply_atom(e)))
            .collect();
        let trace = match DecompositionTrace::record(
            pv.task.clone(),
            pv.annotated.clone(),
            effects,
            pv.start_state.clone(),
            steps?,
        ) {
            Ok(t) => t,
            Err(_) => {
                self.metrics.learning_rejections += 1;
                return None;
            }
        };
        self.traces.push(trace.clone());
        if !self.cfg.learning_enabled {
            return None;
        }
        let mut m = match learn_method(&trace) {
            Ok(m) if validate_learned(&m, &trace) => m,
            _ => {
                self.metrics.learning_rejections += 1;
                return None;
            }
        };
        let duplicate = self
            .learned
            .iter()
            .map(|x| &**x)
            .chain(domain.methods.iter())
            .any(|x| x.same_up_to_renaming(&m));
        if duplicate {
            self.metrics.duplicates_suppressed += 1;
            return None;
        }
        self.learned_counter += 1;
        m.name = format!("{}_learned{}", m.head.name, self.learned_counter);
        let m = Rc::new(m);
        self.learned.push(m.clone());
        Some(m)
    }
}

/// Oracle steps must be ground primitive tasks naming a domain operator
/// with the right arity. Verifier steps are never accepted from an oracle.
fn steps_well_formed(domain: &Domain, steps: &[Task]) -> bool {
    !steps.is_empty()
        && steps.iter().all(|s| {
            s.primitive
                && s.is_ground()
                && domain
                    .operator(&s.name)
                    .is_some_and(|op| op.head.args.len() == s.args.len())
        })
}

/// Plans with a fresh planner instance.
pub fn seek_plan(
    domain: &Domain,
    state: &State,
    tasks: &[Task],
    cfg: &PlannerConfig,
    oracle: Option<&dyn DecompositionOracle>,
) -> PlanResult {
    Planner::new(domain, cfg.clone(), oracle).plan(state, tasks)
}

use std::sync::Arc;

use htnlearn::benchmarks::{sar_domain, two_survivor_problem};
use htnlearn::domain::{Domain, Task};
use htnlearn::oracle::{
    render_steps, ChatTransport, DecompositionOracle, LlmConfig, LlmOracle, OracleFailure, OracleRequest,
    ReplayCache, ReplayOracle, ScriptedOracle, API_KEY_ENV,
};
use htnlearn::planner::{seek_plan, PlannerConfig};
use htnlearn::symbolic::{Atom, State};

fn rescue_rules() -> ScriptedOracle {
    ScriptedOracle::from_text(
        &std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/rescue.rules")).unwrap(),
    )
    .unwrap()
}

fn ablated() -> Domain {
    sar_domain().without_method("RS1").unwrap().without_method("RS2").unwrap()
}

/// A chat endpoint that reads the task and state back out of the prompt and
/// answers with whatever the scripted rules say, wrapped in prose.
struct ScriptedChat {
    rules: ScriptedOracle,
    domain: Domain,
}

impl ChatTransport for ScriptedChat {
    fn complete(&self, prompt: &str) -> Result<String, String> {
        let task_line = prompt
            .lines()
            .find_map(|l| l.strip_prefix("Task to decompose: "))
            .ok_or("no task line")?;
        let task = Task::parse(task_line).map_err(|e| e.to_string())?;
        let state: State = prompt
            .lines()
            .skip_while(|l| !l.starts_with("Current state"))
            .skip(1)
            .take_while(|l| !l.is_empty())
            .map(|l| Atom::parse(l).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
            .map(State::from_atoms)?;
        let req = OracleRequest {
            annotated: self.domain.annotated_task(&task.name).ok_or("no annotation")?.clone(),
            task,
            state,
            operator_catalog: self.domain.operators.clone(),
        };
        match self.rules.propose(&req) {
            Ok(r) => Ok(format!("Here is the plan.\n```\n{}```\n", render_steps(&r.steps))),
            Err(_) => Ok("NONE".to_string()),
        }
    }
}

#[test]
fn planner_outcome_does_not_depend_on_the_oracle_implementation() {
    let domain = ablated();
    let p = two_survivor_problem();
    let scripted = rescue_rules();
    let llm = LlmOracle::with_transport(
        Box::new(ScriptedChat {
            rules: rescue_rules(),
            domain: domain.clone(),
        }),
        LlmConfig::default(),
        None,
    );
    for learning in [true, false] {
        let cfg = PlannerConfig {
            learning_enabled: learning,
            ..Default::default()
        };
        let a = seek_plan(&domain, &p.state, &p.tasks, &cfg, Some(&scripted));
        let b = seek_plan(&domain, &p.state, &p.tasks, &cfg, Some(&llm));
        assert!(a.solved());
        assert!(a.same_as(&b), "learning {learning}");
        assert_eq!(a.learned_methods, b.learned_methods);
    }
}

#[test]
fn warm_replay_cache_reproduces_a_live_run() {
    let domain = ablated();
    let p = two_survivor_problem();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let cache = Arc::new(ReplayCache::open(&path).unwrap());
    let live = LlmOracle::with_transport(
        Box::new(ScriptedChat {
            rules: rescue_rules(),
            domain: domain.clone(),
        }),
        LlmConfig::default(),
        Some(cache),
    );
    let cfg = PlannerConfig {
        learning_enabled: false,
        ..Default::default()
    };
    let first = seek_plan(&domain, &p.state, &p.tasks, &cfg, Some(&live));
    assert_eq!(first.metrics.oracle_calls, 2);

    let reopened = Arc::new(ReplayCache::open(&path).unwrap());
    assert_eq!(reopened.len(), 2);
    let replay = ReplayOracle::new(reopened);
    assert!(replay.is_deterministic());
    let second = seek_plan(&domain, &p.state, &p.tasks, &cfg, Some(&replay));
    assert!(first.same_as(&second));
}

#[test]
fn cold_replay_cache_reports_transport_failures() {
    let domain = ablated();
    let p = two_survivor_problem();
    let replay = ReplayOracle::new(Arc::new(ReplayCache::in_memory()));
    let r = seek_plan(&domain, &p.state, &p.tasks, &PlannerConfig::default(), Some(&replay));
    assert!(!r.solved());
    assert_eq!(r.metrics.failure_kinds.get("transport"), Some(&1));
}

#[test]
fn llm_oracle_without_key_fails_without_sending() {
    if std::env::var(API_KEY_ENV).is_ok() {
        return;
    }
    let domain = ablated();
    let oracle = LlmOracle::from_env(LlmConfig::default(), None);
    let req = OracleRequest {
        task: Task::compound("rescueSurvivor", &["Maria", "Zulu"]),
        annotated: domain.annotated_task("rescueSurvivor").unwrap().clone(),
        state: two_survivor_problem().state,
        operator_catalog: domain.operators.clone(),
    };
    assert!(matches!(oracle.propose(&req), Err(OracleFailure::Transport(_))));
    assert!(!oracle.is_deterministic());
}

#[test]
fn oversized_requests_fail_fast() {
    let domain = ablated();
    let cfg = LlmConfig {
        token_budget: 50,
        ..Default::default()
    };
    let oracle = LlmOracle::with_transport(
        Box::new(ScriptedChat {
            rules: rescue_rules(),
            domain: domain.clone(),
        }),
        cfg,
        None,
    );
    let req = OracleRequest {
        task: Task::compound("rescueSurvivor", &["Maria", "Zulu"]),
        annotated: domain.annotated_task("rescueSurvivor").unwrap().clone(),
        state: two_survivor_problem().state,
        operator_catalog: domain.operators.clone(),
    };
    assert!(matches!(oracle.propose(&req), Err(OracleFailure::Malformed { .. })));
}

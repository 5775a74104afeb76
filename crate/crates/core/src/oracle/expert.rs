//! An oracle answering from a reference knowledge base, and a wrapper that
//! injects seeded random faults into any oracle.

use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{parse_steps, render_steps, DecompositionOracle, OracleFailure, OracleRequest, OracleResponse};
use crate::domain::{Domain, Task};
use crate::planner::{seek_plan, PlannerConfig};

/// Answers by planning the requested task with a complete domain and no
/// oracle. Verifier steps are removed; `doNothing` steps are removed unless
/// nothing else remains. Deterministic.
#[derive(Debug, Clone)]
pub struct ExpertOracle {
    domain: Domain,
    cfg: PlannerConfig,
}

impl ExpertOracle {
    pub fn new(domain: Domain) -> Self {
        ExpertOracle {
            domain,
            cfg: PlannerConfig::offline(),
        }
    }
}

impl DecompositionOracle for ExpertOracle {
    fn propose(&self, req: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        let result = seek_plan(&self.domain, &req.state, std::slice::from_ref(&req.task), &self.cfg, None);
        let Some(plan) = result.plan else {
            return Err(OracleFailure::Refused(format!("no decomposition for {}", req.task)));
        };
        let mut steps = plan.without_bookkeeping();
        if steps.is_empty() {
            steps.push(Task::primitive(crate::domain::DO_NOTHING, &[]));
        }
        let raw_text = render_steps(&steps);
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    Malformed,
    Inapplicable,
    WrongFinalState,
}

/// `Inapplicable` drops the first step, `WrongFinalState` the last.
pub(crate) fn corrupt_steps(kind: FaultKind, mut steps: Vec<Task>) -> Vec<Task> {
    match kind {
        FaultKind::Inapplicable if !steps.is_empty() => {
            steps.remove(0);
        }
        FaultKind::WrongFinalState => {
            steps.pop();
        }
        _ => {}
    }
    steps
}

/// Wraps an oracle; each query independently becomes a fault with the
/// given probability, the fault kind drawn uniformly. Deterministic for a
/// fixed seed and query sequence.
pub struct FaultInjectingOracle<O> {
    inner: O,
    rate: f64,
    rng: Mutex<ChaCha8Rng>,
}

impl<O: DecompositionOracle> FaultInjectingOracle<O> {
    pub fn new(inner: O, rate: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&rate), "fault rate must be a probability");
        FaultInjectingOracle {
            inner,
            rate,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    fn draw(&self) -> Option<FaultKind> {
        let mut rng = self.rng.lock().expect("fault rng poisoned");
        let hit = rng.gen_bool(self.rate);
        let kind = match rng.gen_range(0..3) {
            0 => FaultKind::Malformed,
            1 => FaultKind::Inapplicable,
            _ => FaultKind::WrongFinalState,
        };
        hit.then_some(kind)
    }
}

impl<O: DecompositionOracle> DecompositionOracle for FaultInjectingOracle<O> {
    fn propose(&self, req: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        let fault = self.draw();
        let response = self.inner.propose(req)?;
        let Some(kind) = fault else {
            return Ok(response);
        };
        let raw_text = match kind {
            FaultKind::Malformed => format!("Here is what I would do: {}", response.raw_text.replace('\n', " then ")),
            k => render_steps(&corrupt_steps(k, response.steps)),
        };
        let steps = parse_steps(&raw_text)?;
        Ok(OracleResponse {
            steps,
            raw_text,
            transcript: response.transcript,
        })
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed;
    impl DecompositionOracle for Fixed {
        fn propose(&self, _: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
            let steps = parse_steps("!a(x)\n!b(x)\n!c(x)").unwrap();
            Ok(OracleResponse {
                raw_text: render_steps(&steps),
                steps,
                transcript: vec![],
            })
        }
        fn is_deterministic(&self) -> bool {
            true
        }
    }

    fn req() -> OracleRequest {
        let task = Task::compound("t", &["x"]);
        OracleRequest {
            annotated: crate::domain::AnnotatedTask {
                head: task.clone(),
                preconds: vec![],
                effects: vec![],
            },
            task,
            state: Default::default(),
            operator_catalog: vec![],
        }
    }

    #[test]
    fn rate_zero_and_one() {
        let clean = FaultInjectingOracle::new(Fixed, 0.0, 1);
        for _ in 0..20 {
            assert_eq!(clean.propose(&req()).unwrap().steps.len(), 3);
        }
        let broken = FaultInjectingOracle::new(Fixed, 1.0, 1);
        for _ in 0..20 {
            match broken.propose(&req()) {
                Ok(r) => assert_eq!(r.steps.len(), 2),
                Err(e) => assert_eq!(e.kind(), "malformed"),
            }
        }
    }

    #[test]
    fn seeded_sequences_repeat() {
        let run = |seed| {
            let o = FaultInjectingOracle::new(Fixed, 0.2, seed);
            (0..200).map(|_| o.propose(&req()).is_ok()).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        let failures = run(9).iter().filter(|ok| !**ok).count();
        // malformed is one third of injected faults at rate 0.2
        assert!(failures > 2 && failures < 30, "{failures}");
    }

    #[test]
    fn corruption_shapes() {
        let steps = parse_steps("!a(x)\n!b(x)").unwrap();
        assert_eq!(corrupt_steps(FaultKind::Inapplicable, steps.clone())[0].name, "b");
        assert_eq!(corrupt_steps(FaultKind::WrongFinalState, steps.clone())[0].name, "a");
        assert_eq!(corrupt_steps(FaultKind::Malformed, steps.clone()).len(), 2);
    }
}

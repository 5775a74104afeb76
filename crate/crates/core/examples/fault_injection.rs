//! Wraps the expert oracle so that a fraction of answers are corrupted and
//! compares solve rates with and without learning.
//!
//! cargo run --example fault_injection -- 0.3

use htnlearn::benchmarks::BenchmarkDomain;
use htnlearn::oracle::{ExpertOracle, FaultInjectingOracle};
use htnlearn::planner::{seek_plan, PlannerConfig};

fn main() {
    let rate: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let b = BenchmarkDomain::Logistics;
    let full = b.domain();
    let ablated = full.without_method("TM2").expect("shipped method");
    for learning in [true, false] {
        let mut solved = 0;
        let mut calls = 0;
        let mut failures = std::collections::BTreeMap::new();
        for seed in 0..10 {
            let p = b.generate(seed);
            let oracle = FaultInjectingOracle::new(ExpertOracle::new(full.clone()), rate, seed);
            let cfg = PlannerConfig {
                learning_enabled: learning,
                ..Default::default()
            };
            let r = seek_plan(&ablated, &p.state, &p.tasks, &cfg, Some(&oracle));
            solved += usize::from(r.solved());
            calls += r.metrics.oracle_calls;
            for (k, v) in r.metrics.failure_kinds {
                *failures.entry(k).or_insert(0) += v;
            }
            *failures.entry("verifier".to_string()).or_insert(0) += r.metrics.verifier_failures;
        }
        println!("learning {learning}: solved {solved}/10, oracle calls {calls}, failures {failures:?}");
    }
}

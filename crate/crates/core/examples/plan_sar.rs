//! Solves a generated search-and-rescue problem with the full method set
//! and replays the plan.
//!
//! cargo run --example plan_sar -- 3

use htnlearn::benchmarks::BenchmarkDomain;
use htnlearn::domain::replay_plan;
use htnlearn::format::save_plan;
use htnlearn::planner::{seek_plan, PlannerConfig};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let b = BenchmarkDomain::Sar;
    let domain = b.domain();
    let problem = b.generate(seed);
    let result = seek_plan(&domain, &problem.state, &problem.tasks, &PlannerConfig::offline(), None);
    let Some(plan) = &result.plan else {
        eprintln!("{} is unsolved", problem.id);
        std::process::exit(2);
    };
    print!("{}", save_plan(plan));
    replay_plan(&domain, &problem.state, &plan.steps).expect("plans replay");
    println!(
        "# {} nodes, {} backtracks, decompositions by kind {:?}",
        result.metrics.nodes_expanded, result.metrics.backtracks, result.metrics.provenance
    );
}

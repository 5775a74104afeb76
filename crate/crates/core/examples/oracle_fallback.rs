//! Removes both rescue methods from the search-and-rescue domain and lets a
//! rule-based oracle fill the gap. The first rescue is answered by the
//! oracle and learned; the second reuses the learned method.

use htnlearn::benchmarks::{sar_domain, two_survivor_problem};
use htnlearn::format::{save_plan, write_method};
use htnlearn::oracle::ScriptedOracle;
use htnlearn::planner::{Planner, PlannerConfig};

const RULES: &str = "\
rule rescueSurvivor(?s,?loc)
  when: isDrone(?d), atDrone(?d,?from), safeHaven(?sh)
  steps: !fly(?d,?from,?loc), !pickUpSurvivor(?d,?s,?loc), !fly(?d,?loc,?sh), !dropSurvivor(?d,?s,?sh)
";

fn main() {
    let domain = sar_domain()
        .without_method("RS1")
        .and_then(|d| d.without_method("RS2"))
        .expect("shipped methods");
    let problem = two_survivor_problem();
    let oracle = ScriptedOracle::from_text(RULES).expect("rules parse");
    let mut planner = Planner::new(&domain, PlannerConfig::default(), Some(&oracle));
    let result = planner.plan(&problem.state, &problem.tasks);

    for d in result.decompositions.iter().filter(|d| d.task.name == "rescueSurvivor") {
        println!("{} <- {}", d.task, d.source.label());
    }
    println!("oracle calls: {}", result.metrics.oracle_calls);
    let mut learned = String::new();
    for m in &result.learned_methods {
        write_method(&mut learned, m);
    }
    print!("{learned}");
    if let Some(plan) = &result.plan {
        print!("{}", save_plan(plan));
    }
}

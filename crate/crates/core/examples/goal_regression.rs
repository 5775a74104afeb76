//! Regresses a goal through a ground operator sequence and learns a lifted
//! method from a recorded decomposition trace.

use htnlearn::benchmarks::{sar_domain, two_survivor_problem};
use htnlearn::domain::{operator_applicable, Task};
use htnlearn::format::{render_literals, write_method};
use htnlearn::learner::{learn_method, regress, validate_learned, DecompositionTrace, TraceStep};
use htnlearn::symbolic::{Atom, Literal};

fn main() {
    let domain = sar_domain();
    let problem = two_survivor_problem();
    // The scan has to happen first; pick up requires a scanned location.
    let mut state = problem.state.clone();
    state.insert(Atom::ground("scanned", &["Zulu"]));

    let tasks = [
        Task::primitive("fly", &["Drone01", "safeHaven", "Zulu"]),
        Task::primitive("pickUpSurvivor", &["Drone01", "Maria", "Zulu"]),
        Task::primitive("fly", &["Drone01", "Zulu", "safeHaven"]),
        Task::primitive("dropSurvivor", &["Drone01", "Maria", "safeHaven"]),
    ];
    let mut steps = Vec::new();
    let mut s = state.clone();
    for t in &tasks {
        let op = domain.operator(&t.name).expect("operator").clone();
        let binding = operator_applicable(&op, &s, t).expect("step applies");
        s = htnlearn::domain::apply_operator(&op, &binding, &s);
        steps.push(TraceStep {
            task: t.clone(),
            operator: op,
            binding,
        });
    }

    let goal = vec![Literal::pos(Atom::ground("at", &["Maria", "safeHaven"]))];
    let ops: Vec<_> = steps.iter().map(|s| (s.operator.clone(), s.binding.clone())).collect();
    let regressed = regress(&ops, &goal).expect("no conflict");
    println!("regressed: {}", render_literals(&regressed));

    let task = Task::compound("rescueSurvivor", &["Maria", "Zulu"]);
    let annotated = domain.annotated_task("rescueSurvivor").expect("annotation").clone();
    let effects = vec![Atom::ground("at", &["Maria", "safeHaven"])];
    let trace = DecompositionTrace::record(task, annotated, effects, state, steps).expect("trace is consistent");
    let method = learn_method(&trace).expect("learnable");
    let mut text = String::new();
    write_method(&mut text, &method);
    print!("{text}");
    println!("valid: {}", validate_learned(&method, &trace));
}

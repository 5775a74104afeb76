//! Runs a method-ablation sweep over generated logistics problems and
//! prints the CSV report.
//!
//! cargo run --example ablation_sweep -- 4

use htnlearn::benchmarks::BenchmarkDomain;
use htnlearn::experiment::{report_csv, run_ablation, AblationSpec};

fn main() {
    let workers = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let b = BenchmarkDomain::Logistics;
    let mut spec = AblationSpec::new(b.domain(), b.generate_many(0, 5), 7);
    spec.runs_per_cell = 2;
    spec.fault_rate = 0.1;
    let results = run_ablation(&spec, workers).expect("sweep");
    print!("{}", report_csv(&results));
}

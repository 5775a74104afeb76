//! Parses a domain file, reports its contents and writes it back out.
//!
//! cargo run --example parse_domain -- crates/core/domains/logistics.htn

use htnlearn::format::{parse_domain, save_domain};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/domains/sar.htn").to_string());
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let domain = match parse_domain(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(1);
        }
    };
    println!(
        "domain {}: {} operators, {} methods, {} annotated tasks",
        domain.name,
        domain.operators.len(),
        domain.methods.len(),
        domain.annotated.len()
    );
    for task in domain.compound_task_names() {
        let names: Vec<_> = domain.methods_for(task).map(|m| m.name.as_str()).collect();
        println!("  {task}: {}", names.join(" "));
    }
    let round_trip = parse_domain(&save_domain(&domain)).expect("saved domain parses");
    assert_eq!(round_trip, domain);
    println!("round trip ok");
}

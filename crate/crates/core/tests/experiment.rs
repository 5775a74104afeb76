use std::collections::BTreeSet;
use std::path::Path;

use htnlearn::benchmarks::{sar_domain, two_survivor_problem, BenchmarkDomain};
use htnlearn::experiment::{
    default_removals, parse_spec, report_csv, report_json, run_ablation, write_reports, AblationSpec, CellResult,
    OracleChoice, CSV_HEADER,
};

fn small_sweep(fault_rate: f64) -> Vec<CellResult> {
    let b = BenchmarkDomain::Logistics;
    let mut spec = AblationSpec::new(b.domain(), b.generate_many(0, 4), 1);
    spec.methods_to_remove = vec!["TM2".into(), "AM2".into()];
    spec.runs_per_cell = 2;
    spec.fault_rate = fault_rate;
    run_ablation(&spec, 2).unwrap()
}

#[test]
fn default_sweeps_cover_every_shipped_method() {
    let names = |b: BenchmarkDomain| default_removals(&b.domain()).into_iter().collect::<BTreeSet<_>>();
    let expect = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    assert_eq!(
        names(BenchmarkDomain::Logistics),
        expect(&["TM1", "TM2", "TM3", "AM1", "AM2", "AM3", "TPM1", "TPM2"])
    );
    assert_eq!(
        names(BenchmarkDomain::Sar),
        expect(&["SCAN1", "SCAN2", "SCAN3", "CS1", "CS2", "RS1", "RS2", "SAR1", "SAR2"])
    );
}

#[test]
fn cell_averages_match_per_problem_records() {
    let results = small_sweep(0.2);
    assert_eq!(results.len(), 4);
    for c in &results {
        assert_eq!(c.n, c.per_problem.len());
        assert_eq!(c.n, 8);
        let calls: f64 = c.per_problem.iter().map(|r| r.oracle_calls as f64).sum::<f64>() / c.n as f64;
        let solved = 100.0 * c.per_problem.iter().filter(|r| r.solved).count() as f64 / c.n as f64;
        assert!((c.avg_oracle_calls - calls).abs() < 1e-9);
        assert!((c.pct_solved - solved).abs() < 1e-9);
        assert!(c.per_problem.iter().all(|r| r.store_size_at_start == 0));
        assert!(c.per_problem.iter().all(|r| r.learned_valid == r.learned_methods));
        if c.learner == "off" {
            assert!(c.per_problem.iter().all(|r| r.learned_methods == 0));
        }
    }
}

#[test]
fn unused_method_costs_nothing() {
    let b = BenchmarkDomain::Sar;
    let problem = two_survivor_problem();
    // A single location means the drone never scans from afar.
    let mut spec = AblationSpec::new(b.domain(), vec![problem], 0);
    spec.methods_to_remove = vec!["SCAN2".into()];
    let results = run_ablation(&spec, 1).unwrap();
    for c in results {
        assert_eq!(c.avg_oracle_calls, 0.0, "{}", c.learner);
        assert_eq!(c.pct_solved, 100.0);
    }
}

#[test]
fn reports_have_fixed_layout() {
    assert_eq!(report_csv(&[]), format!("{CSV_HEADER}\n"));
    let results = small_sweep(0.0);
    let csv = report_csv(&results);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), results.len() + 1);
    assert!(lines[1].starts_with("TM2,on,"));
    let json: serde_json::Value = serde_json::from_str(&report_json(&results)).unwrap();
    assert_eq!(json.as_array().unwrap().len(), results.len());
    assert!(json[0]["per_problem"].as_array().unwrap().len() == 8);

    let dir = tempfile::tempdir().unwrap();
    write_reports(&results, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join("results.csv")).unwrap(), csv);
    assert!(dir.path().join("results.json").exists());
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    assert_eq!(report_csv(&small_sweep(0.3)), report_csv(&small_sweep(0.3)));
    let without_time = |r: &[CellResult]| {
        let mut v: serde_json::Value = serde_json::from_str(&report_json(r)).unwrap();
        for cell in v.as_array_mut().unwrap() {
            for run in cell["per_problem"].as_array_mut().unwrap() {
                run.as_object_mut().unwrap().remove("wall_time_ms");
            }
        }
        v
    };
    assert_eq!(without_time(&small_sweep(0.3)), without_time(&small_sweep(0.3)));
}

#[test]
fn spec_file_resolves_fixtures() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let text = std::fs::read_to_string(dir.join("rescue_ablation.spec")).unwrap();
    let spec = parse_spec(&text, &dir, None).unwrap();
    assert_eq!(spec.methods_to_remove, ["RS1", "RS2", "CS2"]);
    assert_eq!(spec.problems.len(), 1);
    assert_eq!(spec.runs_per_cell, 2);
    assert!(matches!(spec.oracle, OracleChoice::Scripted(_)));
    assert_eq!(spec.domain, sar_domain());
}

#[test]
fn spec_errors_are_reported() {
    let dir = Path::new(".");
    assert!(parse_spec("colour = blue\ndomain = sar", dir, None).is_err());
    assert!(parse_spec("runs = 2", dir, None).is_err());
    assert!(parse_spec("domain = sar\nfault_rate = 1.5", dir, None).is_err());
    let Err(missing) = parse_spec("domain = sar\nproblems = nowhere.problem", dir, None) else {
        panic!("missing problem file accepted");
    };
    assert!(missing.to_string().contains("nowhere.problem"));
}

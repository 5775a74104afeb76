//! Method-ablation sweeps: remove one method at a time, solve a problem
//! set several times with and without learning, and aggregate oracle calls
//! and solve rates.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::benchmarks::BenchmarkDomain;
use crate::domain::{Domain, Problem};
use crate::format::{load_problem, parse_domain};
use crate::learner::validate_learned;
use crate::oracle::{
    DecompositionOracle, ExpertOracle, FaultInjectingOracle, LlmConfig, LlmOracle, ReplayCache, ReplayOracle,
    ScriptedOracle,
};
use crate::planner::{Planner, PlannerConfig, VerifierPolicy};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Which oracle answers during the sweep.
#[derive(Clone)]
pub enum OracleChoice {
    /// Plans with the full domain (before removal); deterministic.
    Expert,
    Scripted(Arc<ScriptedOracle>),
    Replay(Arc<ReplayCache>),
    Llm(Arc<LlmOracle>),
}

impl OracleChoice {
    fn label(&self) -> &'static str {
        match self {
            OracleChoice::Expert => "expert",
            OracleChoice::Scripted(_) => "scripted",
            OracleChoice::Replay(_) => "replay",
            OracleChoice::Llm(_) => "llm",
        }
    }
}

#[derive(Clone)]
pub struct AblationSpec {
    pub domain: Domain,
    pub problems: Vec<Problem>,
    pub methods_to_remove: Vec<String>,
    pub runs_per_cell: usize,
    pub learner_modes: Vec<bool>,
    pub oracle: OracleChoice,
    /// Probability that a query is turned into a fault.
    pub fault_rate: f64,
    pub seed: u64,
    pub planner: PlannerConfig,
}

impl AblationSpec {
    /// Sweep over every method of `domain`, both learner modes, three runs,
    /// the expert oracle and no faults.
    pub fn new(domain: Domain, problems: Vec<Problem>, seed: u64) -> Self {
        let methods_to_remove = default_removals(&domain);
        AblationSpec {
            domain,
            problems,
            methods_to_remove,
            runs_per_cell: 3,
            learner_modes: vec![true, false],
            oracle: OracleChoice::Expert,
            fault_rate: 0.0,
            seed,
            planner: PlannerConfig::default(),
        }
    }
}

/// Every method in declaration order, termination methods included.
pub fn default_removals(domain: &Domain) -> Vec<String> {
    domain.methods.iter().map(|m| m.name.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem_id: String,
    pub run: usize,
    pub oracle_calls: usize,
    pub oracle_failures: usize,
    pub solved: bool,
    pub plan_length: Option<usize>,
    pub wall_time_ms: f64,
    pub learned_methods: usize,
    /// Learned methods that validate against one of the run's traces.
    pub learned_valid: usize,
    pub store_size_at_start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub removed_method: String,
    pub learner: String,
    pub avg_oracle_calls: f64,
    pub pct_solved: f64,
    pub n: usize,
    pub per_problem: Vec<RunRecord>,
}

/// Seed of the fault stream for one run, shared by both learner modes so
/// they face the same fault draws.
pub fn run_seed(seed: u64, method: &str, problem_id: &str, run: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(method.as_bytes());
    h.update([0]);
    h.update(problem_id.as_bytes());
    h.update([0]);
    h.update((run as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

struct Job<'a> {
    method: &'a str,
    learn: bool,
    problem: &'a Problem,
    run: usize,
}

fn run_one(spec: &AblationSpec, reduced: &Domain, base: &dyn DecompositionOracle, job: &Job) -> RunRecord {
    let seed = run_seed(spec.seed, job.method, &job.problem.id, job.run);
    let oracle = FaultInjectingOracle::new(base, spec.fault_rate, seed);
    let cfg = PlannerConfig {
        learning_enabled: job.learn,
        oracle_enabled: true,
        ..spec.planner.clone()
    };
    let mut planner = Planner::new(reduced, cfg, Some(&oracle));
    let store_size_at_start = planner.learned_store_len();
    let result = planner.plan(&job.problem.state, &job.problem.tasks);
    let learned_valid = result
        .learned_methods
        .iter()
        .filter(|m| result.traces.iter().any(|t| validate_learned(m, t)))
        .count();
    RunRecord {
        problem_id: job.problem.id.clone(),
        run: job.run,
        oracle_calls: result.metrics.oracle_calls,
        oracle_failures: result.metrics.oracle_failures,
        solved: result.solved(),
        plan_length: result.plan.as_ref().map(|p| p.len_excluding_bookkeeping()),
        wall_time_ms: result.metrics.wall_time_ms,
        learned_methods: result.learned_methods.len(),
        learned_valid,
        store_size_at_start,
    }
}

fn mode_label(learn: bool) -> &'static str {
    if learn {
        "on"
    } else {
        "off"
    }
}

/// Runs the sweep on `workers` threads. Results are ordered by removed
/// method, then learner mode, as listed in the spec.
pub fn run_ablation(spec: &AblationSpec, workers: usize) -> Result<Vec<CellResult>, ExperimentError> {
    let mut reduced = Vec::new();
    for name in &spec.methods_to_remove {
        let d = spec
            .domain
            .without_method(name)
            .ok_or_else(|| ExperimentError::Config(format!("unknown method `{name}`")))?;
        reduced.push(d);
    }
    if spec.runs_per_cell == 0 || spec.learner_modes.is_empty() {
        return Err(ExperimentError::Config("runs and learner modes must be nonempty".into()));
    }
    let base: Arc<dyn DecompositionOracle> = match &spec.oracle {
        OracleChoice::Expert => Arc::new(ExpertOracle::new(spec.domain.clone())),
        OracleChoice::Scripted(o) => o.clone(),
        OracleChoice::Replay(c) => Arc::new(ReplayOracle::new(c.clone())),
        OracleChoice::Llm(o) => o.clone(),
    };
    let mut jobs = Vec::new();
    for (mi, name) in spec.methods_to_remove.iter().enumerate() {
        for &learn in &spec.learner_modes {
            for problem in &spec.problems {
                for run in 0..spec.runs_per_cell {
                    jobs.push((
                        mi,
                        Job {
                            method: name,
                            learn,
                            problem,
                            run,
                        },
                    ));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ExperimentError::Config(e.to_string()))?;
    let records: Vec<RunRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|(mi, job)| run_one(spec, &reduced[*mi], base.as_ref(), job))
            .collect()
    });
    let per_cell = spec.problems.len() * spec.runs_per_cell;
    let mut cells = Vec::new();
    let mut chunks = records.chunks(per_cell.max(1));
    for name in &spec.methods_to_remove {
        for &learn in &spec.learner_modes {
            let per_problem = if per_cell == 0 {
                Vec::new()
            } else {
                chunks.next().expect("one chunk per cell").to_vec()
            };
            cells.push(aggregate(name, learn, per_problem));
        }
    }
    Ok(cells)
}

fn aggregate(name: &str, learn: bool, per_problem: Vec<RunRecord>) -> CellResult {
    let n = per_problem.len();
    let (avg, pct) = if n == 0 {
        (0.0, 0.0)
    } else {
        let calls: usize = per_problem.iter().map(|r| r.oracle_calls).sum();
        let solved = per_problem.iter().filter(|r| r.solved).count();
        (calls as f64 / n as f64, 100.0 * solved as f64 / n as f64)
    };
    CellResult {
        removed_method: name.to_string(),
        learner: mode_label(learn).to_string(),
        avg_oracle_calls: avg,
        pct_solved: pct,
        n,
        per_problem,
    }
}

/// Formats like C's `%.6g`.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-4..6).contains(&exp) {
        let s = format!("{:.5e}", x);
        let (mantissa, e) = s.split_once('e').expect("scientific format");
        let e: i32 = e.parse().expect("exponent");
        let sign = if e < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), e.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, x))
    }
}

pub const CSV_HEADER: &str = "removed_method,learner,avg_oracle_calls,pct_solved,n";

pub fn report_csv(results: &[CellResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in results {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.removed_method,
            c.learner,
            format_g6(c.avg_oracle_calls),
            format_g6(c.pct_solved),
            c.n
        ));
    }
    out
}

pub fn report_json(results: &[CellResult]) -> String {
    serde_json::to_string_pretty(results).expect("results serialize")
}

/// Writes `results.csv` and `results.json` into `dir`.
pub fn write_reports(results: &[CellResult], dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv = dir.join("results.csv");
    fs::write(&csv, report_csv(results)).map_err(io_err(&csv))?;
    let json = dir.join("results.json");
    fs::write(&json, report_json(results)).map_err(io_err(&json))?;
    Ok(())
}

/// Reads a flat `key = value` sweep description. Relative paths resolve
/// against `base_dir`; `transcripts_dir` receives the LLM cache when the
/// LLM oracle is selected.
///
/// ```text
/// domain = sar                  # sar, logistics or a domain file
/// problems = generate:10        # or comma-separated problem files
/// seed = 1
/// runs = 3
/// learner = on, off
/// oracle = expert               # expert, scripted:FILE, replay:FILE, llm or llm:CONFIG
/// fault_rate = 0.2
/// remove = RS1, RS2             # default: every method
/// max_oracle_calls = 100
/// verifier_policy = all         # all or oracle-only
/// ```
pub fn parse_spec(text: &str, base_dir: &Path, transcripts_dir: Option<&Path>) -> Result<AblationSpec, ExperimentError> {
    let cfg_err = |m: String| ExperimentError::Config(m);
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("line {}: expected key = value", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    let get = |key: &str| pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    for (k, _) in &pairs {
        const KNOWN: [&str; 10] = [
            "domain",
            "problems",
            "seed",
            "runs",
            "learner",
            "oracle",
            "fault_rate",
            "remove",
            "max_oracle_calls",
            "verifier_policy",
        ];
        if !KNOWN.contains(&k.as_str()) {
            return Err(cfg_err(format!("unknown key `{k}`")));
        }
    }
    let resolve = |p: &str| -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base_dir.join(p)
        }
    };
    let read = |p: &Path| fs::read_to_string(p).map_err(io_err(p));
    let list = |v: &str| -> Vec<String> {
        v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
    };
    let num = |key: &str, default: u64| -> Result<u64, ExperimentError> {
        get(key)
            .map(|v| v.parse().map_err(|e| cfg_err(format!("{key}: {e}"))))
            .unwrap_or(Ok(default))
    };

    let domain_value = get("domain").ok_or_else(|| cfg_err("missing `domain`".into()))?;
    let bench = BenchmarkDomain::parse(domain_value);
    let domain = match bench {
        Some(b) => b.domain(),
        None => {
            let path = resolve(domain_value);
            parse_domain(&read(&path)?).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?
        }
    };
    let seed = num("seed", 0)?;
    let problems_value = get("problems").unwrap_or("generate:10");
    let problems = if let Some(n) = problems_value.strip_prefix("generate:") {
        let n: usize = n.trim().parse().map_err(|e| cfg_err(format!("problems: {e}")))?;
        let b = bench.ok_or_else(|| cfg_err("problem generation needs a shipped domain".into()))?;
        b.generate_many(seed, n)
    } else {
        let mut out = Vec::new();
        for f in list(problems_value) {
            let path = resolve(&f);
            out.push(load_problem(&read(&path)?, &domain).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?);
        }
        out
    };
    let mut spec = AblationSpec::new(domain, problems, seed);
    spec.runs_per_cell = num("runs", 3)? as usize;
    if let Some(v) = get("learner") {
        spec.learner_modes = list(v)
            .iter()
            .map(|m| match m.as_str() {
                "on" => Ok(true),
                "off" => Ok(false),
                other => Err(cfg_err(format!("learner: unknown mode `{other}`"))),
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(v) = get("fault_rate") {
        spec.fault_rate = v.parse().map_err(|e| cfg_err(format!("fault_rate: {e}")))?;
        if !(0.0..=1.0).contains(&spec.fault_rate) {
            return Err(cfg_err("fault_rate must be within [0, 1]".into()));
        }
    }
    if let Some(v) = get("remove") {
        spec.methods_to_remove = list(v);
    }
    spec.planner.max_oracle_calls_per_problem = num("max_oracle_calls", 100)? as usize;
    spec.planner.verifier_policy = match get("verifier_policy").unwrap_or("all") {
        "all" => VerifierPolicy::AllAnnotated,
        "oracle-only" => VerifierPolicy::OracleOnly,
        other => return Err(cfg_err(format!("verifier_policy: unknown value `{other}`"))),
    };
    let oracle = get("oracle").unwrap_or("expert");
    spec.oracle = if oracle == "expert" {
        OracleChoice::Expert
    } else if let Some(f) = oracle.strip_prefix("scripted:") {
        let path = resolve(f);
        let o = ScriptedOracle::from_text(&read(&path)?).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        OracleChoice::Scripted(Arc::new(o))
    } else if let Some(f) = oracle.strip_prefix("replay:") {
        let path = resolve(f);
        OracleChoice::Replay(Arc::new(ReplayCache::open(&path).map_err(io_err(&path))?))
    } else if oracle == "llm" || oracle.starts_with("llm:") {
        let cfg = match oracle.strip_prefix("llm:") {
            Some(f) => {
                let path = resolve(f);
                LlmConfig::parse(&read(&path)?).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?
            }
            None => LlmConfig::default(),
        };
        let cache = match transcripts_dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
                let path = dir.join("cache.jsonl");
                Some(Arc::new(ReplayCache::open(&path).map_err(io_err(&path))?))
            }
            None => None,
        };
        OracleChoice::Llm(Arc::new(LlmOracle::from_env(cfg, cache)))
    } else {
        return Err(cfg_err(format!("oracle: unknown value `{oracle}`")));
    };
    Ok(spec)
}

/// Short description of a spec for logs.
pub fn describe(spec: &AblationSpec) -> String {
    format!(
        "domain={} problems={} removals={} runs={} modes={} oracle={} fault_rate={}",
        spec.domain.name,
        spec.problems.len(),
        spec.methods_to_remove.len(),
        spec.runs_per_cell,
        spec.learner_modes.iter().map(|m| mode_label(*m)).collect::<Vec<_>>().join("/"),
        spec.oracle.label(),
        spec.fault_rate
    )
}

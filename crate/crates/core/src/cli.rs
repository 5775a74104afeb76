//! Command-line front end: `plan`, `learn`, `gen` and `ablate`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::benchmarks::BenchmarkDomain;
use crate::domain::{Domain, Plan};
use crate::experiment::{describe, parse_spec, run_ablation, write_reports};
use crate::format::{load_problem, parse_domain, save_plan, save_problem, write_method};
use crate::learner::{learn_method, validate_learned, DecompositionTrace};
use crate::oracle::{
    DecompositionOracle, ExpertOracle, LlmConfig, LlmOracle, ReplayCache, ReplayOracle, ScriptedOracle,
};
use crate::planner::{Planner, PlannerConfig, VerifierPolicy};

#[derive(Parser, Debug)]
#[command(name = "htnlearn", about = "HTN planning with oracle fallback and method learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    All,
    OracleOnly,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one problem.
    Plan {
        /// Domain file, or `sar` / `logistics` for a shipped domain.
        #[arg(long)]
        domain: String,
        #[arg(long)]
        problem: PathBuf,
        /// none, expert, scripted:FILE, replay:FILE, llm or llm:CONFIG
        #[arg(long, default_value = "none")]
        oracle: String,
        #[arg(long, value_enum, default_value = "on")]
        learn: Switch,
        #[arg(long, default_value_t = 100)]
        max_oracle_calls: usize,
        #[arg(long, value_enum, default_value = "all")]
        verifier_policy: PolicyArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Write the plan and verified oracle traces as JSON.
        #[arg(long)]
        dump_traces: Option<PathBuf>,
    },
    /// Learn methods offline from a trace dump.
    Learn {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate seeded benchmark problems.
    Gen {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a method-ablation sweep.
    Ablate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Contents of a `--dump-traces` file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceDump {
    pub problem_id: String,
    pub plan: Option<Plan>,
    pub traces: Vec<DecompositionTrace>,
}

type CliResult<T> = Result<T, String>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// A shipped domain by name, or a domain file.
pub fn load_domain(arg: &str) -> CliResult<Domain> {
    if let Some(b) = BenchmarkDomain::parse(arg) {
        return Ok(b.domain());
    }
    let path = Path::new(arg);
    parse_domain(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

/// Builds the oracle named by `spec`; `None` for `none`.
pub fn make_oracle(spec: &str, domain: &Domain) -> CliResult<Option<Arc<dyn DecompositionOracle>>> {
    if spec == "none" {
        return Ok(None);
    }
    if spec == "expert" {
        return Ok(Some(Arc::new(ExpertOracle::new(domain.clone()))));
    }
    if let Some(f) = spec.strip_prefix("scripted:") {
        let o = ScriptedOracle::from_text(&read(Path::new(f))?).map_err(|e| format!("{f}: {e}"))?;
        return Ok(Some(Arc::new(o)));
    }
    if let Some(f) = spec.strip_prefix("replay:") {
        let cache = ReplayCache::open(f).map_err(|e| format!("{f}: {e}"))?;
        return Ok(Some(Arc::new(ReplayOracle::new(Arc::new(cache)))));
    }
    if spec == "llm" || spec.starts_with("llm:") {
        let cfg = match spec.strip_prefix("llm:") {
            Some(f) => LlmConfig::parse(&read(Path::new(f))?).map_err(|e| format!("{f}: {e}"))?,
            None => LlmConfig::default(),
        };
        return Ok(Some(Arc::new(LlmOracle::from_env(cfg, None))));
    }
    Err(format!("unknown oracle `{spec}`"))
}

#[allow(clippy::too_many_arguments)]
fn cmd_plan(
    domain: &str,
    problem: &Path,
    oracle: &str,
    learn: Switch,
    max_oracle_calls: usize,
    policy: PolicyArg,
    out: Option<&Path>,
    metrics: Option<&Path>,
    dump: Option<&Path>,
) -> CliResult<bool> {
    let domain = load_domain(domain)?;
    let problem = load_problem(&read(problem)?, &domain).map_err(|e| format!("{}: {e}", problem.display()))?;
    let oracle = make_oracle(oracle, &domain)?;
    let cfg = PlannerConfig {
        max_oracle_calls_per_problem: max_oracle_calls,
        verifier_policy: match policy {
            PolicyArg::All => VerifierPolicy::AllAnnotated,
            PolicyArg::OracleOnly => VerifierPolicy::OracleOnly,
        },
        learning_enabled: learn == Switch::On,
        oracle_enabled: oracle.is_some(),
        ..Default::default()
    };
    let oracle_ref: Option<&dyn DecompositionOracle> = oracle.as_deref();
    let result = Planner::new(&domain, cfg, oracle_ref).plan(&problem.state, &problem.tasks);
    match &result.plan {
        Some(plan) => {
            let text = save_plan(plan);
            match out {
                Some(p) => write(p, &text)?,
                None => print!("{text}"),
            }
        }
        None => eprintln!("unsolved: {}", problem.id),
    }
    if let Some(p) = metrics {
        let mut value = serde_json::to_value(&result.metrics).map_err(|e| e.to_string())?;
        value["solved"] = result.solved().into();
        value["learned_method_count"] = result.learned_methods.len().into();
        write(p, &serde_json::to_string_pretty(&value).map_err(|e| e.to_string())?)?;
    }
    if let Some(p) = dump {
        let d = TraceDump {
            problem_id: problem.id.clone(),
            plan: result.plan.clone(),
            traces: result.traces.clone(),
        };
        write(p, &serde_json::to_string_pretty(&d).map_err(|e| e.to_string())?)?;
    }
    Ok(result.solved())
}

/// Learns one method per trace. Traces are re-checked against the domain's
/// operators first, so a hand-edited dump cannot smuggle in a bad method.
pub fn learn_from_dump(domain: &Domain, dump: &TraceDump) -> CliResult<String> {
    let mut out = String::new();
    for (i, t) in dump.traces.iter().enumerate() {
        for s in &t.steps {
            if domain.operator(&s.task.name) != Some(&s.operator) {
                return Err(format!("trace {i}: operator {} differs from the domain", s.task.name));
            }
        }
        let checked = DecompositionTrace::record(
            t.task.clone(),
            t.annotated.clone(),
            t.effects.clone(),
            t.states.first().cloned().unwrap_or_default(),
            t.steps.clone(),
        )
        .map_err(|e| format!("trace {i}: {e}"))?;
        let m = learn_method(&checked).map_err(|e| format!("trace {i}: {e}"))?;
        if !validate_learned(&m, &checked) {
            return Err(format!("trace {i}: learned method failed validation"));
        }
        write_method(&mut out, &m);
    }
    Ok(out)
}

fn cmd_learn(domain: &str, trace: &Path, out: &Path) -> CliResult<()> {
    let domain = load_domain(domain)?;
    let dump: TraceDump = serde_json::from_str(&read(trace)?).map_err(|e| format!("{}: {e}", trace.display()))?;
    write(out, &learn_from_dump(&domain, &dump)?)
}

fn cmd_gen(domain: &str, seed: u64, count: usize, out: &Path) -> CliResult<()> {
    let b = BenchmarkDomain::parse(domain).ok_or_else(|| format!("unknown benchmark domain `{domain}`"))?;
    fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
    for p in b.generate_many(seed, count) {
        write(&out.join(format!("{}.problem", p.id)), &save_problem(&p))?;
    }
    Ok(())
}

fn cmd_ablate(spec: &Path, workers: usize, out: &Path) -> CliResult<()> {
    let base = spec.parent().unwrap_or(Path::new("."));
    let transcripts = out.join("transcripts");
    let parsed = parse_spec(&read(spec)?, base, Some(&transcripts)).map_err(|e| e.to_string())?;
    eprintln!("{}", describe(&parsed));
    let results = run_ablation(&parsed, workers).map_err(|e| e.to_string())?;
    write_reports(&results, out).map_err(|e| e.to_string())
}

/// Runs the parsed command. Returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Plan {
            domain,
            problem,
            oracle,
            learn,
            max_oracle_calls,
            verifier_policy,
            out,
            metrics,
            dump_traces,
        } => cmd_plan(
            domain,
            problem,
            oracle,
            *learn,
            *max_oracle_calls,
            *verifier_policy,
            out.as_deref(),
            metrics.as_deref(),
            dump_traces.as_deref(),
        )
        .map(|solved| if solved { 0 } else { 2 }),
        Command::Learn { domain, trace, out } => cmd_learn(domain, trace, out).map(|_| 0),
        Command::Gen {
            domain,
            seed,
            count,
            out,
        } => cmd_gen(domain, *seed, *count, out).map(|_| 0),
        Command::Ablate { spec, workers, out } => cmd_ablate(spec, *workers, out).map(|_| 0),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

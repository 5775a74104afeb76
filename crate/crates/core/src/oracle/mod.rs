//! Decomposition oracles: anything that proposes a ground primitive step
//! list for a compound task the planner cannot decompose itself.

mod expert;
mod llm;
mod prompt;
mod replay;
mod scripted;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{AnnotatedTask, Operator, Task};
use crate::symbolic::State;

pub use expert::{ExpertOracle, FaultInjectingOracle, FaultKind};
pub use llm::{ChatTransport, HttpTransport, LlmConfig, LlmOracle, API_KEY_ENV};
pub use prompt::{render_first_prompt, render_second_prompt, PROMPT_VERSION};
pub use replay::{request_digest, CacheRecord, ReplayCache, ReplayOracle};
pub use scripted::{parse_scripted_rules, ScriptFault, ScriptRule, ScriptedOracle};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRequest {
    pub task: Task,
    pub annotated: AnnotatedTask,
    pub state: State,
    pub operator_catalog: Vec<Operator>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResponse {
    pub steps: Vec<Task>,
    pub raw_text: String,
    pub transcript: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum OracleFailure {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed response at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("oracle refused: {0}")]
    Refused(String),
}

impl OracleFailure {
    pub fn kind(&self) -> &'static str {
        match self {
            OracleFailure::Transport(_) => "transport",
            OracleFailure::Malformed { .. } => "malformed",
            OracleFailure::Refused(_) => "refused",
        }
    }
}

/// The oracle boundary. Implementations must tolerate concurrent calls.
pub trait DecompositionOracle: Send + Sync {
    fn propose(&self, req: &OracleRequest) -> Result<OracleResponse, OracleFailure>;

    /// Whether equal requests always yield equal responses.
    fn is_deterministic(&self) -> bool;
}

impl<T: DecompositionOracle + ?Sized> DecompositionOracle for &T {
    fn propose(&self, req: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        (**self).propose(req)
    }

    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
}

impl<T: DecompositionOracle + ?Sized> DecompositionOracle for std::sync::Arc<T> {
    fn propose(&self, req: &OracleRequest) -> Result<OracleResponse, OracleFailure> {
        (**self).propose(req)
    }

    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> OracleFailure {
    OracleFailure::Malformed {
        line,
        reason: reason.into(),
    }
}

/// Parses a completion into ground primitive tasks, one per line.
///
/// When the text contains a fenced code block only its body is read.
/// List bullets (`-`, `*`, `1.`) are stripped. Blank lines are skipped.
/// Operator names and arities are checked by the caller.
pub fn parse_steps(text: &str) -> Result<Vec<Task>, OracleFailure> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let body: Vec<(usize, &str)> = match lines.iter().position(|(_, l)| l.trim_start().starts_with("```")) {
        Some(open) => {
            let close = lines[open + 1..]
                .iter()
                .position(|(_, l)| l.trim_start().starts_with("```"))
                .ok_or_else(|| malformed(lines[open].0, "unterminated code fence"))?;
            lines[open + 1..open + 1 + close].to_vec()
        }
        None => lines,
    };
    let mut steps = Vec::new();
    for (no, line) in body {
        let mut l = line.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix("- ").or_else(|| l.strip_prefix("* ")) {
            l = rest.trim();
        } else if let Some(dot) = l.find(". ") {
            if l[..dot].chars().all(|c| c.is_ascii_digit()) && dot > 0 {
                l = l[dot + 2..].trim();
            }
        }
        if !l.starts_with('!') {
            return Err(malformed(no, format!("expected `!name(args)`, got `{l}`")));
        }
        let t = Task::parse(l).map_err(|e| malformed(no, e.to_string()))?;
        if !t.is_ground() {
            return Err(malformed(no, format!("variable in ground step `{l}`")));
        }
        steps.push(t);
    }
    if steps.is_empty() {
        return Err(malformed(0, "no steps"));
    }
    Ok(steps)
}

/// Renders steps one per line, the inverse of [`parse_steps`].
pub fn render_steps(steps: &[Task]) -> String {
    let mut out = String::new();
    for s in steps {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

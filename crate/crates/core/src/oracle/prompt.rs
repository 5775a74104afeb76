//! Versioned prompt templates for the two-step chained LLM oracle.

use std::fmt::Write as _;

use super::OracleRequest;
use crate::format::render_literals;

/// Part of every replay-cache key; bump whenever template text changes.
pub const PROMPT_VERSION: &str = "v1";

const PREAMBLE: &str = "You are a planning assistant for a hierarchical task network planner. \
You decompose one compound task into a sequence of primitive tasks that the planner can execute.";

fn render_request(req: &OracleRequest) -> String {
    let mut out = String::new();
    let at = &req.annotated;
    let _ = writeln!(out, "Task to decompose: {}", req.task);
    let _ = writeln!(out, "Task definition: {}", at.head);
    if !at.preconds.is_empty() {
        let _ = writeln!(out, "  preconditions: {}", render_literals(&at.preconds));
    }
    let effects: Vec<String> = at.effects.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "  effects that must hold afterwards: {}", effects.join(", "));
    out.push_str("\nCurrent state (one fact per line):\n");
    for a in req.state.iter() {
        let _ = writeln!(out, "{a}");
    }
    out.push_str("\nAvailable primitive tasks and their operators:\n");
    for op in &req.operator_catalog {
        let _ = writeln!(out, "{}", op.head);
        if !op.preconds.is_empty() {
            let _ = writeln!(out, "  pre: {}", render_literals(&op.preconds));
        }
        if !op.add.is_empty() {
            let add: Vec<String> = op.add.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "  add: {}", add.join(", "));
        }
        if !op.del.is_empty() {
            let del: Vec<String> = op.del.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "  del: {}", del.join(", "));
        }
    }
    out
}

const FORMAT: &str = "Output format: one primitive task per line, written as !name(arg1,arg2) \
with constants from the state only, no variables, inside a single ``` fenced block. \
If no decomposition exists, output NONE.";

/// First prompt: the task, its definition, the state and the operators.
pub fn render_first_prompt(req: &OracleRequest) -> String {
    format!(
        "{PREAMBLE}\n\n{}\nPropose a sequence of primitive tasks that achieves the effects of {} \
         starting from the current state. Explain briefly, then give the list.\n{FORMAT}\n",
        render_request(req),
        req.task
    )
}

/// Second prompt: the same information plus the first answer, asking for
/// the final list only.
pub fn render_second_prompt(req: &OracleRequest, first_completion: &str) -> String {
    format!(
        "{PREAMBLE}\n\n{}\nA previous answer was:\n{first_completion}\n\nCheck every step against \
         the operator preconditions in order and correct any mistakes. Output only the final list.\n{FORMAT}\n",
        render_request(req)
    )
}

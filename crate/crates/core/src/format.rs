//! Line-oriented text formats for domains, problems and plans.
//!
//! Domain file:
//!
//! ```text
//! domain sar
//! operator !fly(?d,?from,?to)
//!   pre: isDrone(?d), atDrone(?d,?from)
//!   add: atDrone(?d,?to)
//!   del: atDrone(?d,?from)
//! method RS1 rescueSurvivor(?survivor,?loc)
//!   pre: isDrone(?drone), safeHaven(?SH), atDrone(?drone,?loc)
//!   sub: !pickUpSurvivor(?drone,?survivor,?loc), !fly(?drone,?loc,?SH)
//!   kind: handcrafted
//! annotated rescueSurvivor(?survivor,?loc)
//!   pre: safeHaven(?SH), at(?survivor,?loc)
//!   eff: at(?survivor,?SH)
//! ```
//!
//! A field may repeat; repeated lines append. `#` starts a comment.
//!
//! Problem file:
//!
//! ```text
//! problem sar-1
//! seed: 7
//! state:
//!   area(Alpha), location(Zulu)
//! tasks:
//!   searchANDrescue(Alpha)
//! ```

use std::fmt::Write as _;

use crate::domain::{
    parse_atoms, parse_literals, parse_tasks, AnnotatedTask, Domain, DomainError, Method, Operator,
    Plan, Problem, Provenance, Task, DO_NOTHING,
};
use crate::symbolic::{Atom, Literal, State, SymbolError};

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn perr(line: usize, e: impl std::fmt::Display) -> DomainError {
    DomainError::Parse {
        line,
        message: e.to_string(),
    }
}

fn sym(line: usize) -> impl Fn(SymbolError) -> DomainError {
    move |e| perr(line, e)
}

enum Block {
    Operator(Operator),
    Method(Method),
    Annotated(AnnotatedTask),
}

pub fn parse_domain(text: &str) -> Result<Domain, DomainError> {
    let mut name = String::from("domain");
    let mut blocks: Vec<(usize, Block)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with(' ') || line.starts_with('\t');
        let line = line.trim();
        if !indented {
            let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let block = match kw {
                "domain" => {
                    name = rest.to_string();
                    continue;
                }
                "operator" => {
                    let head = Task::parse(rest).map_err(sym(line_no))?;
                    if !head.primitive {
                        return Err(perr(line_no, "operator head must start with `!`"));
                    }
                    Block::Operator(Operator {
                        head,
                        preconds: vec![],
                        add: vec![],
                        del: vec![],
                    })
                }
                "method" => {
                    let (mname, head) = rest
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| perr(line_no, "expected `method NAME head(...)`"))?;
                    Block::Method(Method {
                        name: mname.to_string(),
                        head: Task::parse(head).map_err(sym(line_no))?,
                        preconds: vec![],
                        subtasks: vec![],
                        provenance: Provenance::Handcrafted,
                    })
                }
                "annotated" => Block::Annotated(AnnotatedTask {
                    head: Task::parse(rest).map_err(sym(line_no))?,
                    preconds: vec![],
                    effects: vec![],
                }),
                other => return Err(perr(line_no, format!("unknown block `{other}`"))),
            };
            blocks.push((line_no, block));
            continue;
        }
        let Some((_, block)) = blocks.last_mut() else {
            return Err(perr(line_no, "field outside of a block"));
        };
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| perr(line_no, "expected `key: value`"))?;
        let value = value.trim();
        match (block, key.trim()) {
            (Block::Operator(o), "pre") => o.preconds.extend(parse_literals(value).map_err(sym(line_no))?),
            (Block::Operator(o), "add") => o.add.extend(parse_atoms(value).map_err(sym(line_no))?),
            (Block::Operator(o), "del") => o.del.extend(parse_atoms(value).map_err(sym(line_no))?),
            (Block::Method(m), "pre") => m.preconds.extend(parse_literals(value).map_err(sym(line_no))?),
            (Block::Method(m), "sub") => m.subtasks.extend(parse_tasks(value).map_err(sym(line_no))?),
            (Block::Method(m), "kind") => {
                m.provenance = Provenance::parse(value)
                    .ok_or_else(|| perr(line_no, format!("unknown method kind `{value}`")))?
            }
            (Block::Annotated(a), "pre") => a.preconds.extend(parse_literals(value).map_err(sym(line_no))?),
            (Block::Annotated(a), "eff") => {
                let lits = parse_literals(value).map_err(sym(line_no))?;
                if lits.iter().any(|l| l.negated) {
                    return Err(perr(line_no, "annotated effects must be positive atoms"));
                }
                a.effects.extend(lits.into_iter().map(|l| l.atom));
            }
            (_, k) => return Err(perr(line_no, format!("unexpected field `{k}`"))),
        }
    }

    let mut operators = Vec::new();
    let mut methods = Vec::new();
    let mut annotated = Vec::new();
    for (_, b) in blocks {
        match b {
            Block::Operator(o) => operators.push(o),
            Block::Method(m) => methods.push(m),
            Block::Annotated(a) => annotated.push(a),
        }
    }
    Domain::new(name, operators, methods, annotated)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn write_method(out: &mut String, m: &Method) {
    let _ = writeln!(out, "method {} {}", m.name, m.head);
    if !m.preconds.is_empty() {
        let _ = writeln!(out, "  pre: {}", join(&m.preconds));
    }
    let _ = writeln!(out, "  sub: {}", join(&m.subtasks));
    if m.provenance != Provenance::Handcrafted {
        let _ = writeln!(out, "  kind: {}", m.provenance);
    }
}

pub fn save_domain(d: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "domain {}", d.name);
    for o in d.operators.iter().filter(|o| o.name() != DO_NOTHING) {
        let _ = writeln!(out, "operator {}", o.head);
        if !o.preconds.is_empty() {
            let _ = writeln!(out, "  pre: {}", join(&o.preconds));
        }
        if !o.add.is_empty() {
            let _ = writeln!(out, "  add: {}", join(&o.add));
        }
        if !o.del.is_empty() {
            let _ = writeln!(out, "  del: {}", join(&o.del));
        }
    }
    for m in &d.methods {
        write_method(&mut out, m);
    }
    for a in &d.annotated {
        let _ = writeln!(out, "annotated {}", a.head);
        if !a.preconds.is_empty() {
            let _ = writeln!(out, "  pre: {}", join(&a.preconds));
        }
        if !a.effects.is_empty() {
            let _ = writeln!(out, "  eff: {}", join(&a.effects));
        }
    }
    out
}

/// Parses one or more `method` blocks (the learner's output format).
pub fn parse_methods(text: &str) -> Result<Vec<Method>, DomainError> {
    let mut methods = Vec::new();
    let mut current: Option<Method> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with(' ') || line.starts_with('\t');
        let line = line.trim();
        if !indented {
            let rest = line
                .strip_prefix("method")
                .ok_or_else(|| perr(line_no, "expected a method block"))?
                .trim();
            let (mname, head) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| perr(line_no, "expected `method NAME head(...)`"))?;
            methods.extend(current.take());
            current = Some(Method {
                name: mname.to_string(),
                head: Task::parse(head).map_err(sym(line_no))?,
                preconds: vec![],
                subtasks: vec![],
                provenance: Provenance::Handcrafted,
            });
            continue;
        }
        let m = current.as_mut().ok_or_else(|| perr(line_no, "field outside of a block"))?;
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| perr(line_no, "expected `key: value`"))?;
        let value = value.trim();
        match key.trim() {
            "pre" => m.preconds.extend(parse_literals(value).map_err(sym(line_no))?),
            "sub" => m.subtasks.extend(parse_tasks(value).map_err(sym(line_no))?),
            "kind" => {
                m.provenance = Provenance::parse(value)
                    .ok_or_else(|| perr(line_no, format!("unknown method kind `{value}`")))?
            }
            k => return Err(perr(line_no, format!("unexpected field `{k}`"))),
        }
    }
    methods.extend(current);
    Ok(methods)
}

pub fn parse_problem(text: &str) -> Result<Problem, DomainError> {
    enum Section {
        None,
        State,
        Tasks,
    }
    let mut id = String::from("problem");
    let mut seed = 0u64;
    let mut atoms: Vec<Atom> = Vec::new();
    let mut tasks: Vec<Task> = Vec::new();
    let mut section = Section::None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with(' ') || line.starts_with('\t');
        let line = line.trim();
        if indented {
            match section {
                Section::State => atoms.extend(parse_atoms(line).map_err(sym(line_no))?),
                Section::Tasks => tasks.extend(parse_tasks(line).map_err(sym(line_no))?),
                Section::None => return Err(perr(line_no, "indented line outside of a block")),
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("problem") {
            id = rest.trim().trim_start_matches(':').trim().to_string();
            section = Section::None;
        } else if let Some(rest) = line.strip_prefix("seed:") {
            seed = rest
                .trim()
                .parse()
                .map_err(|e| perr(line_no, format!("bad seed: {e}")))?;
            section = Section::None;
        } else if let Some(rest) = line.strip_prefix("state:") {
            atoms.extend(parse_atoms(rest).map_err(sym(line_no))?);
            section = Section::State;
        } else if let Some(rest) = line.strip_prefix("tasks:") {
            tasks.extend(parse_tasks(rest).map_err(sym(line_no))?);
            section = Section::Tasks;
        } else {
            return Err(perr(line_no, format!("unexpected line `{line}`")));
        }
    }
    if let Some(a) = atoms.iter().find(|a| !a.is_ground()) {
        return Err(DomainError::validation(format!("problem {id}"), format!("state atom {a} is not ground")));
    }
    if let Some(t) = tasks.iter().find(|t| !t.is_ground()) {
        return Err(DomainError::validation(format!("problem {id}"), format!("task {t} is not ground")));
    }
    if tasks.is_empty() {
        return Err(DomainError::validation(format!("problem {id}"), "task list is empty"));
    }
    Ok(Problem {
        id,
        seed,
        state: State::from_atoms(atoms),
        tasks,
    })
}

/// Parses a problem and checks it against `domain`.
pub fn load_problem(text: &str, domain: &Domain) -> Result<Problem, DomainError> {
    let p = parse_problem(text)?;
    domain.check_problem(&p)?;
    Ok(p)
}

pub fn save_problem(p: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "problem {}", p.id);
    let _ = writeln!(out, "seed: {}", p.seed);
    let _ = writeln!(out, "state:");
    for a in p.state.iter() {
        let _ = writeln!(out, "  {a}");
    }
    let _ = writeln!(out, "tasks:");
    for t in &p.tasks {
        let _ = writeln!(out, "  {t}");
    }
    out
}

pub fn save_plan(plan: &Plan) -> String {
    let mut out = String::new();
    for s in &plan.steps {
        let _ = writeln!(out, "{s}");
    }
    let _ = writeln!(
        out,
        "# plan-length-excluding-bookkeeping: {}",
        plan.len_excluding_bookkeeping()
    );
    out
}

pub fn parse_plan(text: &str) -> Result<Plan, DomainError> {
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let t = Task::parse(line).map_err(sym(idx + 1))?;
        if !t.primitive || !t.is_ground() {
            return Err(perr(idx + 1, "plan steps must be ground primitive tasks"));
        }
        steps.push(t);
    }
    Ok(Plan { steps })
}

/// Renders a literal list in file syntax, for messages and prompts.
pub fn render_literals(lits: &[Literal]) -> String {
    join(lits)
}

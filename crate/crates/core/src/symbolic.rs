//! First-order terms, atoms, literals and states.
//!
//! Everything here is an immutable value. Matching is one-way (pattern
//! against ground atom); states and oracle output are always ground, so no
//! variable-variable unification is needed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("unsafe negation: {0} has a variable that is unbound when it is evaluated")]
    UnsafeNegation(Literal),
    #[error("syntax error in `{text}`: {message}")]
    Syntax { text: String, message: String },
}

impl SymbolError {
    pub(crate) fn syntax(text: &str, message: impl Into<String>) -> Self {
        SymbolError::Syntax {
            text: text.to_string(),
            message: message.into(),
        }
    }
}

/// A constant or a `?`-prefixed variable. The stored name never carries the `?`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Term::Const(_))
    }

    pub fn parse(text: &str) -> Result<Self, SymbolError> {
        let text = text.trim();
        if let Some(name) = text.strip_prefix('?') {
            check_symbol(name).map_err(|m| SymbolError::syntax(text, m))?;
            Ok(Term::Var(name.to_string()))
        } else {
            check_symbol(text).map_err(|m| SymbolError::syntax(text, m))?;
            Ok(Term::Const(text.to_string()))
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => f.write_str(c),
            Term::Var(v) => write!(f, "?{v}"),
        }
    }
}

/// Symbol names are nonempty and free of whitespace, commas and parentheses.
pub fn check_symbol(name: &str) -> Result<(), String> {
    if name.is_empty() {
        return Err("empty symbol name".into());
    }
    if let Some(c) = name
        .chars()
        .find(|c| c.is_whitespace() || matches!(c, ',' | '(' | ')' | '?' | '!'))
    {
        return Err(format!("illegal character {c:?} in symbol `{name}`"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Builds a ground atom from constant names.
    pub fn ground(predicate: &str, args: &[&str]) -> Self {
        Atom::new(predicate, args.iter().map(|a| Term::constant(*a)).collect())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Const(c) => Some(c.as_str()),
            Term::Var(_) => None,
        })
    }

    /// Parses `pred(a,?b)`. A bare `pred` is accepted as a zero-arity atom.
    pub fn parse(text: &str) -> Result<Self, SymbolError> {
        let (name, args) = parse_call(text)?;
        check_symbol(&name).map_err(|m| SymbolError::syntax(text, m))?;
        Ok(Atom::new(name, args))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        write_terms(f, &self.args)?;
        f.write_str(")")
    }
}

pub(crate) fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[Term]) -> fmt::Result {
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

/// Splits `name(a, b, c)` into its name and parsed argument terms.
pub(crate) fn parse_call(text: &str) -> Result<(String, Vec<Term>), SymbolError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(SymbolError::syntax(text, "empty expression"));
    }
    let Some(open) = compact.find('(') else {
        return Ok((compact, Vec::new()));
    };
    if !compact.ends_with(')') {
        return Err(SymbolError::syntax(text, "missing closing parenthesis"));
    }
    let name = compact[..open].to_string();
    let inner = &compact[open + 1..compact.len() - 1];
    if inner.contains('(') || inner.contains(')') {
        return Err(SymbolError::syntax(text, "nested parentheses are not allowed"));
    }
    let args = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(Term::parse).collect::<Result<_, _>>()?
    };
    Ok((name, args))
}

/// Splits a comma-separated list at depth zero: `p(a,b), q(c)` -> [`p(a,b)`, `q(c)`].
pub fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = text[start..].trim();
    if !last.is_empty() || !out.is_empty() {
        out.push(last);
    }
    out.retain(|s| !s.is_empty());
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }

    pub fn parse(text: &str) -> Result<Self, SymbolError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(inner) = compact
            .strip_prefix("not(")
            .and_then(|rest| rest.strip_suffix(')'))
        {
            Ok(Literal::neg(Atom::parse(inner)?))
        } else {
            Ok(Literal::pos(Atom::parse(&compact)?))
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not({})", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

/// A set of ground atoms, iterated in canonical (predicate, args) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    atoms: BTreeSet<Atom>,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    /// Panics if an atom is not ground.
    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        let mut s = State::new();
        for a in atoms {
            s.insert(a);
        }
        s
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        assert!(atom.is_ground(), "state atoms must be ground: {atom}");
        self.atoms.insert(atom)
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.atoms.remove(atom)
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    /// Atoms with the given predicate, in canonical order.
    pub fn with_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        let lower = Atom::new(predicate, Vec::new());
        self.atoms
            .range(lower..)
            .take_while(move |a| a.predicate == predicate)
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        State::from_atoms(iter)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// Mapping from variable names (without `?`) to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Term)>) -> Self {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(v, t);
        }
        s
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn is_bound(&self, var: &str) -> bool {
        self.bindings.contains_key(var)
    }

    /// Binding a variable to itself is a no-op.
    pub fn bind(&mut self, var: &str, term: Term) {
        if term == Term::Var(var.to_string()) {
            return;
        }
        self.bindings.insert(var.to_string(), term);
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn apply_term(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => self.bindings.get(v).cloned().unwrap_or_else(|| term.clone()),
            Term::Const(_) => term.clone(),
        }
    }

    pub fn apply_terms(&self, terms: &[Term]) -> Vec<Term> {
        terms.iter().map(|t| self.apply_term(t)).collect()
    }

    pub fn apply_atom(&self, atom: &Atom) -> Atom {
        Atom::new(atom.predicate.clone(), self.apply_terms(&atom.args))
    }

    pub fn apply_literal(&self, lit: &Literal) -> Literal {
        Literal {
            atom: self.apply_atom(&lit.atom),
            negated: lit.negated,
        }
    }

    /// True when every binding of `self` is present, unchanged, in `other`.
    pub fn is_subset_of(&self, other: &Substitution) -> bool {
        self.bindings
            .iter()
            .all(|(k, v)| other.bindings.get(k) == Some(v))
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "(?{k},{v})")?;
        }
        f.write_str("]")
    }
}

pub fn apply_substitution(atom: &Atom, th: &Substitution) -> Atom {
    th.apply_atom(atom)
}

/// One-way matching of pattern terms against ground terms, extending `th`.
pub fn match_terms(patterns: &[Term], grounds: &[Term], th: &Substitution) -> Option<Substitution> {
    if patterns.len() != grounds.len() {
        return None;
    }
    let mut out: Option<Substitution> = None;
    for (p, g) in patterns.iter().zip(grounds) {
        match p {
            Term::Const(_) => {
                if p != g {
                    return None;
                }
            }
            Term::Var(v) => {
                let current = out.as_ref().unwrap_or(th);
                match current.get(v) {
                    Some(bound) if bound != g => return None,
                    Some(_) => {}
                    None => out.get_or_insert_with(|| th.clone()).bind(v, g.clone()),
                }
            }
        }
    }
    Some(out.unwrap_or_else(|| th.clone()))
}

/// Extends `th` so that `pattern·θ == ground`, or `None` on predicate/arity
/// mismatch or conflicting bindings.
pub fn match_atom(pattern: &Atom, ground: &Atom, th: &Substitution) -> Option<Substitution> {
    if pattern.predicate != ground.predicate {
        return None;
    }
    match_terms(&pattern.args, &ground.args, th)
}

/// Enumerates all extensions of `th` under which `preconds` hold in `state`.
///
/// Positive literals are matched left to right against the state's atoms in
/// canonical order; negated literals are checked afterwards and must be
/// ground by then.
pub fn satisfy<'a>(
    preconds: &'a [Literal],
    state: &'a State,
    th: &Substitution,
) -> Result<Satisfy<'a>, SymbolError> {
    let positives: Vec<&Atom> = preconds
        .iter()
        .filter(|l| !l.negated)
        .map(|l| &l.atom)
        .collect();
    let negatives: Vec<&Atom> = preconds
        .iter()
        .filter(|l| l.negated)
        .map(|l| &l.atom)
        .collect();
    let mut bound: BTreeSet<&str> = th.iter().map(|(k, _)| k).collect();
    for p in &positives {
        bound.extend(p.variables());
    }
    for lit in preconds.iter().filter(|l| l.negated) {
        if lit.atom.variables().any(|v| !bound.contains(v)) {
            return Err(SymbolError::UnsafeNegation(lit.clone()));
        }
    }
    let mut it = Satisfy {
        positives,
        negatives,
        state,
        stack: Vec::new(),
    };
    let first = it.frame(0, th.clone());
    it.stack.push(first);
    Ok(it)
}

/// Lazy, deterministic enumeration produced by [`satisfy`].
pub struct Satisfy<'a> {
    positives: Vec<&'a Atom>,
    negatives: Vec<&'a Atom>,
    state: &'a State,
    stack: Vec<Frame<'a>>,
}

struct Frame<'a> {
    sub: Substitution,
    candidates: Vec<&'a Atom>,
    next: usize,
}

impl<'a> Satisfy<'a> {
    fn frame(&self, depth: usize, sub: Substitution) -> Frame<'a> {
        let candidates = match self.positives.get(depth) {
            None => Vec::new(),
            Some(pattern) => {
                let inst = sub.apply_atom(pattern);
                if inst.is_ground() {
                    self.state
                        .atoms
                        .get(&inst)
                        .into_iter()
                        .collect()
                } else {
                    self.state
                        .with_predicate(&pattern.predicate)
                        .filter(|a| a.arity() == pattern.arity())
                        .collect()
                }
            }
        };
        Frame {
            sub,
            candidates,
            next: 0,
        }
    }

    fn negatives_hold(&self, sub: &Substitution) -> bool {
        self.negatives
            .iter()
            .all(|a| !self.state.contains(&sub.apply_atom(a)))
    }
}

impl Iterator for Satisfy<'_> {
    type Item = Substitution;

    fn next(&mut self) -> Option<Substitution> {
        loop {
            let depth = self.stack.len().checked_sub(1)?;
            if depth == self.positives.len() {
                let leaf = self.stack.pop().expect("nonempty stack");
                if self.negatives_hold(&leaf.sub) {
                    return Some(leaf.sub);
                }
                continue;
            }
            let pattern = self.positives[depth];
            let top = self.stack.last_mut().expect("nonempty stack");
            let mut extended = None;
            while top.next < top.candidates.len() {
                let cand = top.candidates[top.next];
                top.next += 1;
                if let Some(s) = match_atom(pattern, cand, &top.sub) {
                    extended = Some(s);
                    break;
                }
            }
            match extended {
                Some(s) => {
                    let frame = self.frame(depth + 1, s);
                    self.stack.push(frame);
                }
                None => {
                    self.stack.pop();
                }
            }
        }
    }
}

/// Constant name -> generated variable name (without `?`).
pub type ConstantMap = BTreeMap<String, String>;

/// Replaces constants with variables, consistently across every call on the
/// same lifter. Constants in `keep` stay as they are.
#[derive(Debug, Clone, Default)]
pub struct Lifter {
    map: ConstantMap,
    used: BTreeSet<String>,
    keep: BTreeSet<String>,
}

impl Lifter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn keeping(keep: impl IntoIterator<Item = String>) -> Self {
        Lifter {
            keep: keep.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn lift_term(&mut self, term: &Term) -> Term {
        match term {
            Term::Var(_) => term.clone(),
            Term::Const(c) if self.keep.contains(c) => term.clone(),
            Term::Const(c) => {
                if let Some(v) = self.map.get(c) {
                    return Term::Var(v.clone());
                }
                let mut name = c.clone();
                let mut n = 2;
                while self.used.contains(&name) {
                    name = format!("{c}_{n}");
                    n += 1;
                }
                self.used.insert(name.clone());
                self.map.insert(c.clone(), name.clone());
                Term::Var(name)
            }
        }
    }

    pub fn lift_terms(&mut self, terms: &[Term]) -> Vec<Term> {
        terms.iter().map(|t| self.lift_term(t)).collect()
    }

    pub fn lift_atom(&mut self, atom: &Atom) -> Atom {
        Atom::new(atom.predicate.clone(), self.lift_terms(&atom.args))
    }

    pub fn lift_literal(&mut self, lit: &Literal) -> Literal {
        Literal {
            atom: self.lift_atom(&lit.atom),
            negated: lit.negated,
        }
    }

    pub fn constant_map(&self) -> &ConstantMap {
        &self.map
    }

    pub fn into_constant_map(self) -> ConstantMap {
        self.map
    }
}

/// Substitution that undoes a lifting: each generated variable maps back to its constant.
pub fn inverse_map(map: &ConstantMap) -> Substitution {
    let mut s = Substitution::new();
    for (c, v) in map {
        s.bind(v, Term::constant(c.clone()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Atom {
        Atom::parse(s).unwrap()
    }

    fn lits(s: &str) -> Vec<Literal> {
        split_top_level(s)
            .into_iter()
            .map(|l| Literal::parse(l).unwrap())
            .collect()
    }

    #[test]
    fn substitution_from_footnote_example() {
        let th = Substitution::from_pairs([("x", Term::constant("1")), ("y", Term::constant("a"))]);
        assert_eq!(apply_substitution(&atom("foo(?x,?y)"), &th), atom("foo(1,a)"));
    }

    #[test]
    fn empty_and_partial_substitution() {
        let a = atom("at(Maria,Zulu)");
        assert_eq!(apply_substitution(&a, &Substitution::new()), a);
        let th = Substitution::from_pairs([("s", Term::constant("John"))]);
        assert_eq!(
            apply_substitution(&atom("at(?s,?loc)"), &th),
            atom("at(John,?loc)")
        );
    }

    #[test]
    fn matching_binds_and_rejects_conflicts() {
        let g = atom("at(Maria,Zulu)");
        let th = match_atom(&atom("at(?s,?loc)"), &g, &Substitution::new()).unwrap();
        assert_eq!(th.get("s"), Some(&Term::constant("Maria")));
        assert_eq!(th.get("loc"), Some(&Term::constant("Zulu")));
        assert!(match_atom(&atom("at(?s,?s)"), &g, &Substitution::new()).is_none());
        let pre = Substitution::from_pairs([("s", Term::constant("Maria"))]);
        assert_eq!(match_atom(&atom("at(?s,Zulu)"), &g, &pre), Some(pre.clone()));
        assert!(match_atom(&atom("at(?s)"), &g, &Substitution::new()).is_none());
        assert!(match_atom(&atom("in(?s,?l)"), &g, &Substitution::new()).is_none());
    }

    #[test]
    fn satisfy_single_binding() {
        let s = State::from_atoms([atom("person(Maria)"), atom("at(Maria,Zulu)")]);
        let pre = lits("person(?p), at(?p,?loc)");
        let all: Vec<_> = satisfy(&pre, &s, &Substitution::new()).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].get("loc"), Some(&Term::constant("Zulu")));
    }

    #[test]
    fn satisfy_negation() {
        let s = State::from_atoms([atom("scanned(Zulu)")]);
        let pre = lits("not(scanned(?loc))");
        let th = Substitution::from_pairs([("loc", Term::constant("Zulu"))]);
        assert_eq!(satisfy(&pre, &s, &th).unwrap().count(), 0);
        let th = Substitution::from_pairs([("loc", Term::constant("Yankee"))]);
        assert_eq!(satisfy(&pre, &s, &th).unwrap().count(), 1);
    }

    #[test]
    fn satisfy_rejects_unsafe_negation() {
        let s = State::new();
        let pre = lits("not(at(?survivor,?loc))");
        let th = Substitution::from_pairs([("loc", Term::constant("Zulu"))]);
        assert!(matches!(
            satisfy(&pre, &s, &th),
            Err(SymbolError::UnsafeNegation(_))
        ));
        // a later positive literal binds the variable before negation is checked
        let pre = lits("not(at(?s,?loc)), person(?s)");
        assert!(satisfy(&pre, &s, &th).is_ok());
    }

    #[test]
    fn satisfy_enumerates_in_canonical_order() {
        let s = State::from_atoms([atom("at(Maria,Zulu)"), atom("at(John,Zulu)"), atom("at(Ana,Xray)")]);
        let pre = lits("at(?p,Zulu)");
        let got: Vec<_> = satisfy(&pre, &s, &Substitution::new())
            .unwrap()
            .map(|th| th.get("p").unwrap().clone())
            .collect();
        // brute force: every state atom that matches, in sorted order
        let expected: Vec<_> = s
            .iter()
            .filter_map(|a| match_atom(&pre[0].atom, a, &Substitution::new()))
            .map(|th| th.get("p").unwrap().clone())
            .collect();
        assert_eq!(got, expected);
        assert_eq!(got, vec![Term::constant("John"), Term::constant("Maria")]);
    }

    #[test]
    fn lift_is_consistent_and_invertible() {
        let mut l = Lifter::new();
        let a = l.lift_atom(&atom("at(Drone01,Zulu)"));
        let b = l.lift_atom(&atom("safeHaven(SH1)"));
        let c = l.lift_atom(&atom("fly(Drone01,Zulu,SH1)"));
        assert_eq!(a, atom("at(?Drone01,?Zulu)"));
        assert_eq!(b, atom("safeHaven(?SH1)"));
        assert_eq!(c, atom("fly(?Drone01,?Zulu,?SH1)"));
        let inv = inverse_map(l.constant_map());
        assert_eq!(inv.apply_atom(&c), atom("fly(Drone01,Zulu,SH1)"));
    }

    #[test]
    fn lift_keeps_protected_constants() {
        let mut l = Lifter::keeping(["n0".to_string()]);
        assert_eq!(l.lift_atom(&atom("survivors(Zulu,n0)")), atom("survivors(?Zulu,n0)"));
    }

    #[test]
    fn lift_suffixes_on_generated_name_clash() {
        let mut l = Lifter::new();
        l.used.insert("a".into());
        assert_eq!(l.lift_term(&Term::constant("a")), Term::var("a_2"));
    }

    #[test]
    fn parses_and_prints() {
        assert_eq!(atom(" at( ?s , Zulu ) ").to_string(), "at(?s,Zulu)");
        assert_eq!(Literal::parse("not(p(a))").unwrap().to_string(), "not(p(a))");
        assert_eq!(atom("doNothing()").arity(), 0);
        assert!(Atom::parse("p(a(b))").is_err());
        assert!(Atom::parse("p(a b)").is_ok()); // whitespace-insensitive
        assert_eq!(split_top_level("p(a,b), q(c) ,r()"), vec!["p(a,b)", "q(c)", "r()"]);
        assert!(split_top_level("  ").is_empty());
    }

    #[test]
    #[should_panic]
    fn state_rejects_non_ground() {
        State::from_atoms([atom("at(?x,Zulu)")]);
    }
}

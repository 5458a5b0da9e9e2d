//! Reversible rewriting: forward steps record trace terms, backward steps
//! consume them.
//!
//! A trace term stores the rule label, the position,
//! the bindings a backward step cannot recompute (the rule's safety domain)
//! and one sub-trace per condition. Traces list the most recent step first.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::rewrite::{self, Bounds, RewriteError, StepWitness, Strategy};
use crate::syntax::{ParseError, ParseOptions, Parser, Tok};
use crate::system::RewriteSystem;
use crate::term::{Name, Position, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReversibleError {
    #[error("no step: {0} is a normal form")]
    NoStep(Term),
    #[error("empty trace")]
    EmptyTrace,
    #[error("trace mismatch: {0}")]
    TraceMismatch(String),
    #[error("unsafe pair: {0}")]
    UnsafePair(String),
    #[error("unknown rule label `{0}`")]
    UnknownLabel(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceTerm {
    pub label: Name,
    pub position: Position,
    pub recorded: Substitution,
    pub sub_traces: Vec<Trace>,
}

/// Trace terms, most recent first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace(pub Vec<TraceTerm>);

impl Trace {
    pub fn new() -> Trace {
        Trace(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn items(&self) -> &[TraceTerm] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pair {
    pub term: Term,
    pub trace: Trace,
}

impl Pair {
    pub fn new(term: Term) -> Pair {
        Pair { term, trace: Trace::new() }
    }
}

impl fmt::Display for TraceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {}", self.label, self.position, self.recorded)?;
        for sub in &self.sub_traces {
            write!(f, ", {sub}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.term, self.trace)
    }
}

/// Builds the trace term of a witnessed step.
pub fn trace_term_of(system: &RewriteSystem, witness: &StepWitness) -> TraceTerm {
    let rule = system.rule(&witness.rule_label).expect("witness refers to a rule of the system");
    let domain = rule.safety_domain();
    TraceTerm {
        label: witness.rule_label.clone(),
        position: witness.position.clone(),
        recorded: witness.subst.restrict(&domain),
        sub_traces: witness
            .sub_witnesses
            .iter()
            .map(|d| Trace(d.steps.iter().rev().map(|w| trace_term_of(system, w)).collect()))
            .collect(),
    }
}

fn push(pair: &Pair, system: &RewriteSystem, witness: &StepWitness) -> Pair {
    let mut items = Vec::with_capacity(pair.trace.len() + 1);
    items.push(trace_term_of(system, witness));
    items.extend(pair.trace.0.iter().cloned());
    Pair { term: witness.result.clone(), trace: Trace(items) }
}

/// One forward step using the first witness under `strategy`.
pub fn forward_step(system: &RewriteSystem, pair: &Pair, strategy: Strategy, bounds: Bounds) -> Result<Pair, ReversibleError> {
    match rewrite::first_step(system, &pair.term, strategy, bounds)? {
        Some(w) => Ok(push(pair, system, &w)),
        None => Err(ReversibleError::NoStep(pair.term.clone())),
    }
}

/// Every forward successor, in the engine's order.
pub fn forward_successors(
    system: &RewriteSystem,
    pair: &Pair,
    strategy: Strategy,
    bounds: Bounds,
) -> Result<Vec<Pair>, ReversibleError> {
    Ok(rewrite::step(system, &pair.term, strategy, bounds)?.iter().map(|w| push(pair, system, w)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steps {
    Count(usize),
    UntilNormal,
}

impl std::str::FromStr for Steps {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "normal" {
            return Ok(Steps::UntilNormal);
        }
        s.parse().map(Steps::Count).map_err(|_| format!("expected a number or `normal`, got `{s}`"))
    }
}

/// Iterates [`forward_step`]; stops early at a normal form.
pub fn forward_run(
    system: &RewriteSystem,
    pair: &Pair,
    strategy: Strategy,
    steps: Steps,
    bounds: Bounds,
) -> Result<Pair, ReversibleError> {
    let limit = match steps {
        Steps::Count(n) => n,
        Steps::UntilNormal => usize::MAX,
    };
    let mut current = pair.clone();
    let mut taken = 0;
    while taken < limit {
        if taken >= bounds.max_steps {
            return Err(RewriteError::StepsExceeded(bounds.max_steps).into());
        }
        match rewrite::first_step(system, &current.term, strategy, bounds)? {
            Some(w) => current = push(&current, system, &w),
            None => break,
        }
        taken += 1;
    }
    Ok(current)
}

/// Outcome of a safety check; `findings` is empty iff the trace is safe.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SafetyReport {
    pub findings: Vec<String>,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.findings.is_empty()
    }
}

pub fn is_safe(system: &RewriteSystem, trace: &Trace) -> Result<SafetyReport, ReversibleError> {
    let mut report = SafetyReport::default();
    for t in &trace.0 {
        check_trace_term(system, t, &mut report)?;
    }
    Ok(report)
}

fn check_trace_term(system: &RewriteSystem, t: &TraceTerm, report: &mut SafetyReport) -> Result<(), ReversibleError> {
    let rule = system.rule(&t.label).ok_or_else(|| ReversibleError::UnknownLabel(t.label.to_string()))?;
    let domain = rule.safety_domain();
    if t.recorded.domain() != domain {
        let want: Vec<&str> = domain.iter().map(|x| &**x).collect();
        report.findings.push(format!(
            "{}: recorded {} but rule needs bindings for {{{}}}",
            t.label,
            t.recorded,
            want.join(", ")
        ));
    }
    if !t.recorded.is_ground() {
        report.findings.push(format!("{}: recorded substitution {} is not ground", t.label, t.recorded));
    }
    if t.sub_traces.len() != rule.conditions.len() {
        report.findings.push(format!(
            "{}: {} sub-traces for {} conditions",
            t.label,
            t.sub_traces.len(),
            rule.conditions.len()
        ));
    }
    for sub in &t.sub_traces {
        for item in &sub.0 {
            check_trace_term(system, item, report)?;
        }
    }
    Ok(())
}

fn require_safe(system: &RewriteSystem, items: &[TraceTerm]) -> Result<(), ReversibleError> {
    let mut report = SafetyReport::default();
    for t in items {
        check_trace_term(system, t, &mut report)?;
    }
    match report.findings.first() {
        None => Ok(()),
        Some(f) => Err(ReversibleError::UnsafePair(f.clone())),
    }
}

/// Undoes the step recorded by `t` on `term`.
fn undo(system: &RewriteSystem, term: &Term, t: &TraceTerm) -> Result<Term, ReversibleError> {
    let mismatch = |what: String| ReversibleError::TraceMismatch(format!("{}: {what}", t.label));
    let rule = system.rule(&t.label).ok_or_else(|| ReversibleError::UnknownLabel(t.label.to_string()))?;
    let focus = term
        .subterm(&t.position)
        .map_err(|_| mismatch(format!("position {} not in {term}", t.position)))?;
    if !focus.is_ground() {
        return Err(mismatch(format!("{focus} is not ground")));
    }
    let mut unifier = t.recorded.clone();
    if !unifier.extend_by_match(&rule.rhs, focus) {
        return Err(mismatch(format!("rhs {} does not match {focus}", rule.rhs)));
    }
    for (c, sub) in rule.conditions.iter().zip(&t.sub_traces).rev() {
        let target = unifier.apply(&c.rhs);
        if !target.is_ground() {
            return Err(mismatch(format!("condition rhs {target} not determined")));
        }
        let mut u = target;
        for item in &sub.0 {
            u = undo(system, &u, item)?;
        }
        if !unifier.extend_by_match(&c.lhs, &u) {
            return Err(mismatch(format!("condition lhs {} does not match {u}", c.lhs)));
        }
    }
    let lhs = unifier.apply(&rule.lhs);
    if !lhs.is_ground() {
        return Err(mismatch(format!("lhs {lhs} not determined")));
    }
    term.replace(&t.position, lhs).map_err(|e| mismatch(e.to_string()))
}

/// Pops the most recent trace term and undoes its step. Only the popped
/// trace term is checked for safety.
pub fn backward_step(system: &RewriteSystem, pair: &Pair) -> Result<Pair, ReversibleError> {
    let (head, rest) = pair.trace.0.split_first().ok_or(ReversibleError::EmptyTrace)?;
    require_safe(system, std::slice::from_ref(head))?;
    let term = undo(system, &pair.term, head)?;
    Ok(Pair { term, trace: Trace(rest.to_vec()) })
}

/// Undoes the whole trace.
pub fn backward_run(system: &RewriteSystem, pair: &Pair) -> Result<Pair, ReversibleError> {
    require_safe(system, &pair.trace.0)?;
    let mut term = pair.term.clone();
    for t in &pair.trace.0 {
        term = undo(system, &term, t)?;
    }
    Ok(Pair::new(term))
}

/// Every way to undo the most recent trace term, found by scanning all rules
/// carrying its label and every completion of the sub-traces. A sound system
/// yields exactly one.
pub fn backward_completions(system: &RewriteSystem, pair: &Pair) -> Result<Vec<Pair>, ReversibleError> {
    let (head, rest) = pair.trace.0.split_first().ok_or(ReversibleError::EmptyTrace)?;
    Ok(completions(system, &pair.term, head)
        .into_iter()
        .map(|term| Pair { term, trace: Trace(rest.to_vec()) })
        .collect())
}

fn completions(system: &RewriteSystem, term: &Term, t: &TraceTerm) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    let Ok(focus) = term.subterm(&t.position) else { return out };
    for rule in system.rules().iter().filter(|r| r.label == t.label) {
        if rule.conditions.len() != t.sub_traces.len() {
            continue;
        }
        let mut unifier = t.recorded.clone();
        if !unifier.extend_by_match(&rule.rhs, focus) {
            continue;
        }
        let mut partial = vec![unifier];
        for (c, sub) in rule.conditions.iter().zip(&t.sub_traces).rev() {
            let mut next = Vec::new();
            for unifier in partial {
                let target = unifier.apply(&c.rhs);
                if !target.is_ground() {
                    continue;
                }
                let mut starts = BTreeSet::from([target]);
                for item in &sub.0 {
                    starts = starts.iter().flat_map(|u| completions(system, u, item)).collect();
                }
                for u in starts {
                    let mut extended = unifier.clone();
                    if extended.extend_by_match(&c.lhs, &u) {
                        next.push(extended);
                    }
                }
            }
            partial = next;
        }
        for unifier in partial {
            let lhs = unifier.apply(&rule.lhs);
            if lhs.is_ground() {
                if let Ok(t2) = term.replace(&t.position, lhs) {
                    out.insert(t2);
                }
            }
        }
    }
    out
}

fn position(p: &mut Parser) -> Result<Position, ParseError> {
    let first = p.ident()?;
    if first == "e" {
        return Ok(Position::root());
    }
    let mut text = first;
    while *p.peek()? == Tok::Dot {
        p.next()?;
        text.push('.');
        text.push_str(&p.ident()?);
    }
    match text.parse() {
        Ok(pos) => Ok(pos),
        Err(e) => p.error(e),
    }
}

fn substitution(p: &mut Parser) -> Result<Substitution, ParseError> {
    let none = BTreeSet::new();
    if let Tok::Ident(s) = p.peek()? {
        if s == "id" {
            p.next()?;
            return Ok(Substitution::new());
        }
    }
    p.expect(Tok::LBrace)?;
    let mut subst = Substitution::new();
    if *p.peek()? == Tok::RBrace {
        p.next()?;
        return Ok(subst);
    }
    loop {
        let x = p.ident()?;
        match p.next()? {
            Tok::MapsTo | Tok::Arrow => {}
            _ => return p.error("expected `↦` or `->` in substitution"),
        }
        let t = p.term(&none)?;
        subst.insert(x.as_str().into(), t);
        match p.next()? {
            Tok::Comma => continue,
            Tok::RBrace => return Ok(subst),
            _ => return p.error("expected `,` or `}` in substitution"),
        }
    }
}

fn trace_term(p: &mut Parser) -> Result<TraceTerm, ParseError> {
    let label = p.ident()?;
    p.expect(Tok::LParen)?;
    let position = position(p)?;
    p.expect(Tok::Comma)?;
    let recorded = substitution(p)?;
    let mut sub_traces = Vec::new();
    loop {
        match p.next()? {
            Tok::Comma => sub_traces.push(trace(p)?),
            Tok::RParen => break,
            _ => return p.error("expected `,` or `)` in trace term"),
        }
    }
    Ok(TraceTerm { label: label.as_str().into(), position, recorded, sub_traces })
}

fn trace(p: &mut Parser) -> Result<Trace, ParseError> {
    p.expect(Tok::LBracket)?;
    let mut items = Vec::new();
    if *p.peek()? == Tok::RBracket {
        p.next()?;
        return Ok(Trace(items));
    }
    loop {
        items.push(trace_term(p)?);
        match p.next()? {
            Tok::Comma => continue,
            Tok::RBracket => return Ok(Trace(items)),
            _ => return p.error("expected `,` or `]` in trace"),
        }
    }
}

/// Reads the textual form printed by `Display for Trace`.
pub fn parse_trace(text: &str) -> Result<Trace, ParseError> {
    let mut p = Parser::new(text, ParseOptions::generated());
    let t = trace(&mut p)?;
    if !p.at_eof()? {
        return p.error("trailing input after trace");
    }
    Ok(t)
}

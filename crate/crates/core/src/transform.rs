//! System-to-system transformations.
//!
//! [`to_pcdctrs`] flattens nested calls into conditions and simplifies
//! constructor conditions. [`injectivize`] makes every function return its
//! result paired with an encoded trace, and [`invert`] turns that system into
//! one computing arguments from result and trace.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::reversible::{is_safe, Trace, TraceTerm};
use crate::rewrite::{normalize, Bounds, RewriteError, Strategy};
use crate::syntax::format_system;
use crate::system::{Condition, RewriteSystem, Rule, SystemError};
use crate::term::{tuple_arity, unify, Name, Position, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("not applicable")]
    NotApplicable,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("shape violated: {0}")]
    ShapeViolated(String),
    #[error("unsafe trace: {0}")]
    UnsafeTrace(String),
    #[error("view failed: {0}")]
    ViewFailed(String),
    #[error("update failed: {0}")]
    UpdateFailed(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// Generator of `_w1, _w2, …`, skipping names already in use.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    next: usize,
    taken: BTreeSet<Name>,
}

impl FreshNames {
    pub fn avoiding(system: &RewriteSystem) -> FreshNames {
        let mut taken = BTreeSet::new();
        for rule in system.rules() {
            rule.add_vars_to(&mut taken);
        }
        FreshNames { next: 0, taken }
    }

    pub fn fresh(&mut self) -> Name {
        loop {
            self.next += 1;
            let name: Name = format!("_w{}", self.next).into();
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }
}

pub fn injective_name(f: &str) -> String {
    format!("{f}^i")
}

pub fn inverse_name(f: &str) -> String {
    format!("{f}^-1")
}

/// Leftmost-innermost basic subterm position.
fn first_basic(system: &RewriteSystem, t: &Term) -> Option<Position> {
    t.positions_postorder()
        .into_iter()
        .find(|p| system.is_basic(t.subterm(p).expect("own position")))
}

/// Moves the leftmost-innermost basic subterm of the rhs into a new last
/// condition, leaving a fresh variable in its place.
pub fn flatten_rhs(system: &RewriteSystem, rule: &Rule, fresh: &mut FreshNames) -> Result<Rule, TransformError> {
    if system.is_constructor_term(&rule.rhs) {
        return Err(TransformError::NotApplicable);
    }
    let q = first_basic(system, &rule.rhs).ok_or(TransformError::NotApplicable)?;
    let w = Term::Var(fresh.fresh());
    let call = rule.rhs.subterm(&q).expect("found position").clone();
    let mut out = rule.clone();
    out.rhs = rule.rhs.replace(&q, w.clone()).expect("found position");
    out.conditions.push(Condition { lhs: call, rhs: w });
    Ok(out)
}

/// Splits the first condition whose lhs is neither constructor nor basic.
/// Its innermost basic call gets its own condition just before it.
pub fn flatten_condition(system: &RewriteSystem, rule: &Rule, fresh: &mut FreshNames) -> Result<Rule, TransformError> {
    let i = rule
        .conditions
        .iter()
        .position(|c| !system.is_constructor_term(&c.lhs) && !system.is_basic(&c.lhs))
        .ok_or(TransformError::NotApplicable)?;
    let s = &rule.conditions[i].lhs;
    let q = first_basic(system, s).ok_or(TransformError::NotApplicable)?;
    let w = Term::Var(fresh.fresh());
    let mut out = rule.clone();
    let inner = Condition { lhs: s.subterm(&q).expect("found position").clone(), rhs: w.clone() };
    let outer = Condition { lhs: s.replace(&q, w).expect("found position"), rhs: rule.conditions[i].rhs.clone() };
    out.conditions.splice(i..=i, [inner, outer]);
    Ok(out)
}

/// Drops the first constructor condition whose sides unify and applies the
/// mgu to the whole rule.
pub fn remove_unify(system: &RewriteSystem, rule: &Rule) -> Result<Rule, TransformError> {
    for (i, c) in rule.conditions.iter().enumerate() {
        if !system.is_constructor_term(&c.lhs) {
            continue;
        }
        if let Some(unifier) = unify(&c.lhs, &c.rhs) {
            let mut rest = rule.clone();
            rest.conditions.remove(i);
            return Ok(rest.map_terms(|t| unifier.apply(t)));
        }
    }
    Err(TransformError::NotApplicable)
}

/// True when some constructor condition can never hold, so the rule can be
/// deleted.
pub fn remove_fail(system: &RewriteSystem, rule: &Rule) -> Result<(), TransformError> {
    let infeasible = rule
        .conditions
        .iter()
        .any(|c| system.is_constructor_term(&c.lhs) && unify(&c.lhs, &c.rhs).is_none());
    if infeasible {
        Ok(())
    } else {
        Err(TransformError::NotApplicable)
    }
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub name: String,
    pub input: RewriteSystem,
    pub output: RewriteSystem,
    pub changes: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineReport {
    pub stages: Vec<Stage>,
}

impl fmt::Display for PipelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, stage) in self.stages.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "== {} ==", stage.name)?;
            for change in &stage.changes {
                writeln!(f, "  {change}")?;
            }
            write!(f, "{}", format_system(&stage.output))?;
        }
        Ok(())
    }
}

fn check_flattenable(system: &RewriteSystem) -> Result<(), TransformError> {
    let class = system.classification();
    let mut problems = Vec::new();
    if !class.is_dctrs {
        problems.push("not a DCTRS".to_string());
    }
    if !class.is_constructor_system {
        problems.push("some lhs is not basic".to_string());
    }
    for rule in system.rules() {
        for c in &rule.conditions {
            if !system.is_constructor_term(&c.rhs) {
                problems.push(format!("{}: condition rhs {} is not a constructor term", rule.label, c.rhs));
            }
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(TransformError::PreconditionViolated(problems.join("; ")))
    }
}

/// Exhaustively flattens and simplifies a constructor DCTRS into a pcDCTRS.
pub fn to_pcdctrs(system: &RewriteSystem) -> Result<(RewriteSystem, PipelineReport), TransformError> {
    check_flattenable(system)?;
    let mut fresh = FreshNames::avoiding(system);
    let mut changes = Vec::new();
    let mut flat = Vec::new();
    for rule in system.rules() {
        let mut current = rule.clone();
        loop {
            if let Ok(next) = flatten_rhs(system, &current, &mut fresh) {
                changes.push(format!("{}: flatten rhs, {}", rule.label, crate::syntax::format_rule(&next)));
                current = next;
            } else if let Ok(next) = flatten_condition(system, &current, &mut fresh) {
                changes.push(format!("{}: flatten condition, {}", rule.label, crate::syntax::format_rule(&next)));
                current = next;
            } else {
                break;
            }
        }
        flat.push(current);
    }
    let flattened = RewriteSystem::new(flat.clone())?;
    let mut report = PipelineReport::default();
    report.stages.push(Stage { name: "flattening".into(), input: system.clone(), output: flattened.clone(), changes });

    let mut changes = Vec::new();
    let mut kept = Vec::new();
    for rule in flat {
        let mut current = rule;
        let mut deleted = false;
        loop {
            if let Ok(next) = remove_unify(system, &current) {
                changes.push(format!("{}: unify constructor condition, {}", current.label, crate::syntax::format_rule(&next)));
                current = next;
            } else if remove_fail(system, &current).is_ok() {
                changes.push(format!("{}: infeasible condition, rule removed", current.label));
                deleted = true;
                break;
            } else {
                break;
            }
        }
        if !deleted {
            kept.push(current);
        }
    }
    let output = RewriteSystem::new(kept)?;
    report.stages.push(Stage {
        name: "constructor conditions".into(),
        input: flattened,
        output: output.clone(),
        changes,
    });
    Ok((output, report))
}

fn rename_root(t: &Term, rename: impl Fn(&str) -> String) -> Term {
    match t {
        Term::App(f, args) => Term::App(rename(f).as_str().into(), args.clone()),
        Term::Var(_) => t.clone(),
    }
}

fn require_pcdctrs(system: &RewriteSystem) -> Result<(), TransformError> {
    let report = system.validate(crate::system::Property::Pcdctrs);
    if report.holds() {
        Ok(())
    } else {
        Err(TransformError::PreconditionViolated(report.to_string()))
    }
}

/// Rule label applied to the safety-domain variables, then the trace variables.
fn trace_constructor(rule: &Rule, ws: &[Name]) -> Term {
    let args = rule
        .safety_domain()
        .into_iter()
        .chain(ws.iter().cloned())
        .map(Term::Var)
        .collect();
    Term::App(rule.label.clone(), args)
}

/// Each rule returns its result paired with a trace constructor term, and
/// each condition call returns a pair whose second half feeds that term.
pub fn injectivize(system: &RewriteSystem) -> Result<RewriteSystem, TransformError> {
    injectivize_selected(system, &BTreeSet::new())
}

fn injectivize_selected(system: &RewriteSystem, improved: &BTreeSet<Name>) -> Result<RewriteSystem, TransformError> {
    require_pcdctrs(system)?;
    let mut fresh = FreshNames::avoiding(system);
    let mut rules = Vec::new();
    for rule in system.rules() {
        let ws: Vec<Name> = rule.conditions.iter().map(|_| fresh.fresh()).collect();
        let trace = if improved.contains(&rule.label) {
            Term::Var(ws[0].clone())
        } else {
            trace_constructor(rule, &ws)
        };
        rules.push(Rule {
            label: rule.label.clone(),
            lhs: rename_root(&rule.lhs, injective_name),
            rhs: Term::tuple(vec![rule.rhs.clone(), trace]),
            conditions: rule
                .conditions
                .iter()
                .zip(&ws)
                .map(|(c, w)| Condition {
                    lhs: rename_root(&c.lhs, injective_name),
                    rhs: Term::tuple(vec![c.rhs.clone(), Term::Var(w.clone())]),
                })
                .collect(),
        });
    }
    Ok(RewriteSystem::new(rules)?)
}

fn split_pair(t: &Term) -> Option<(&Term, &Term)> {
    match t {
        Term::App(f, args) if tuple_arity(f) == Some(2) && args.len() == 2 => Some((&args[0], &args[1])),
        _ => None,
    }
}

fn injective_base(t: &Term) -> Option<(&str, &[Term])> {
    match t {
        Term::App(f, args) => f.strip_suffix("^i").map(|base| (base, args.as_slice())),
        Term::Var(_) => None,
    }
}

/// Swaps each rule of an injectivized system: the inverse takes the result
/// and trace term and rebuilds the arguments, undoing the conditions last to first.
pub fn invert(forward: &RewriteSystem) -> Result<RewriteSystem, TransformError> {
    let mut rules = Vec::new();
    for rule in forward.rules() {
        let shape = |what: &str| TransformError::ShapeViolated(format!("{}: {what}", rule.label));
        let (f, params) = injective_base(&rule.lhs).ok_or_else(|| shape("lhs is not an injectivized call"))?;
        let (result, trace) = split_pair(&rule.rhs).ok_or_else(|| shape("rhs is not a pair"))?;
        let mut conditions = Vec::new();
        let mut ws = Vec::new();
        for c in rule.conditions.iter().rev() {
            let (g, args) = injective_base(&c.lhs).ok_or_else(|| shape("condition lhs is not an injectivized call"))?;
            let (t, w) = split_pair(&c.rhs).ok_or_else(|| shape("condition rhs is not a pair"))?;
            if !w.is_var() {
                return Err(shape("condition trace is not a variable"));
            }
            ws.push(w.clone());
            conditions.push(Condition {
                lhs: Term::app(&inverse_name(g), vec![t.clone(), w.clone()]),
                rhs: Term::tuple(args.to_vec()),
            });
        }
        ws.reverse();
        let trace_ok = match trace {
            Term::Var(_) => ws.len() == 1 && ws[0] == *trace,
            Term::App(_, args) => args.len() >= ws.len() && args[args.len() - ws.len()..] == ws[..],
        };
        if !trace_ok {
            return Err(shape("trace component does not end with the condition traces"));
        }
        rules.push(Rule {
            label: rule.label.clone(),
            lhs: Term::app(&inverse_name(f), vec![result.clone(), trace.clone()]),
            rhs: Term::tuple(params.to_vec()),
            conditions,
        });
    }
    Ok(RewriteSystem::new(rules)?)
}

/// Reversible-trace term as a constructor term: the label applied to the
/// recorded bindings (by variable name), then the encoded sub-traces.
pub fn encode_trace(system: &RewriteSystem, t: &TraceTerm) -> Result<Term, TransformError> {
    encode_trace_with(system, t, &BTreeSet::new())
}

/// As [`encode_trace`]; steps by the `improved` rules encode as their single
/// sub-trace.
pub fn encode_trace_with(system: &RewriteSystem, t: &TraceTerm, improved: &BTreeSet<Name>) -> Result<Term, TransformError> {
    let report = is_safe(system, &Trace(vec![t.clone()])).map_err(|e| TransformError::UnsafeTrace(e.to_string()))?;
    if let Some(f) = report.findings.first() {
        return Err(TransformError::UnsafeTrace(f.clone()));
    }
    encode_unchecked(t, improved)
}

fn encode_unchecked(t: &TraceTerm, improved: &BTreeSet<Name>) -> Result<Term, TransformError> {
    let mut subs = Vec::new();
    for sub in &t.sub_traces {
        match sub.items() {
            [single] => subs.push(encode_unchecked(single, improved)?),
            items => {
                return Err(TransformError::UnsafeTrace(format!(
                    "{}: sub-trace of length {} (one step expected)",
                    t.label,
                    items.len()
                )))
            }
        }
    }
    if improved.contains(&t.label) && t.recorded.is_empty() && subs.len() == 1 {
        return Ok(subs.pop().unwrap());
    }
    let args = t.recorded.iter().map(|(_, v)| v.clone()).chain(subs).collect();
    Ok(Term::App(t.label.clone(), args))
}

/// Replaces maximal defined-rooted subterms by distinct fresh variables.
fn abstract_calls(system: &RewriteSystem, t: &Term, tag: &str, counter: &mut usize) -> Term {
    match t {
        Term::Var(x) => Term::var(&format!("{tag}{x}")),
        Term::App(f, _) if system.is_defined(f) => {
            *counter += 1;
            Term::var(&format!("_call{counter}"))
        }
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| abstract_calls(system, a, tag, counter)).collect(),
        ),
    }
}

/// Sound check that `r1` and `r2` have no common constructor instance: after
/// abstracting calls away and renaming apart, the two must not unify.
pub fn range_disjoint(system: &RewriteSystem, r1: &Term, r2: &Term) -> bool {
    let mut counter = 0;
    let a = abstract_calls(system, r1, "_l_", &mut counter);
    let b = abstract_calls(system, r2, "_r_", &mut counter);
    unify(&a, &b).is_none()
}

fn defined_occurrences(system: &RewriteSystem, t: &Term) -> usize {
    match t {
        Term::Var(_) => 0,
        Term::App(f, args) => {
            usize::from(system.is_defined(f)) + args.iter().map(|a| defined_occurrences(system, a)).sum::<usize>()
        }
    }
}

/// Labels of the rules of `pc` that qualify for the trace-free encoding.
pub fn improvable_rules(pc: &RewriteSystem, origin: &RewriteSystem) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for rule in pc.rules() {
        let Some(source) = origin.rule(&rule.label) else { continue };
        let disjoint = origin
            .rules_for(source.root())
            .filter(|other| other.label != source.label)
            .all(|other| range_disjoint(origin, &source.rhs, &other.rhs));
        let non_erasing = source.lhs.var_set() == source.rhs.var_set();
        let single_call = defined_occurrences(origin, &source.rhs) == 1;
        let flat_shape = source.conditions.is_empty()
            && rule.conditions.len() == 1
            && rule.conditions[0].rhs.is_var()
            && rule.safety_domain().is_empty();
        if disjoint && non_erasing && single_call && flat_shape {
            out.insert(rule.label.clone());
        }
    }
    out
}

/// Injectivization that drops the trace constructor for rules of injective
/// shape; those pass the inner call's trace through unchanged. Returns the system
/// and the labels that were improved.
pub fn injectivize_improved(pc: &RewriteSystem, origin: &RewriteSystem) -> Result<(RewriteSystem, BTreeSet<Name>), TransformError> {
    if !origin.classification().is_trs {
        return Err(TransformError::PreconditionViolated("origin is not an unconditional TRS".into()));
    }
    let improved = improvable_rules(pc, origin);
    Ok((injectivize_selected(pc, &improved)?, improved))
}

/// A view function with its derived forward (`Rf`) and backward (`Rb`)
/// systems.
#[derive(Debug, Clone)]
pub struct Bidirectional {
    pub view: Name,
    pub forward: RewriteSystem,
    pub backward: RewriteSystem,
    pub bounds: Bounds,
}

impl Bidirectional {
    pub fn new(system: &RewriteSystem, view: &str, bounds: Bounds) -> Result<Bidirectional, TransformError> {
        if !system.is_defined(view) {
            return Err(TransformError::PreconditionViolated(format!("`{view}` is not a defined function")));
        }
        let pc;
        let system = if system.classification().is_pcdctrs {
            system
        } else {
            pc = to_pcdctrs(system)?.0;
            &pc
        };
        let forward = injectivize(system)?;
        let backward = invert(&forward)?;
        Ok(Bidirectional { view: view.into(), forward, backward, bounds })
    }

    /// The view of `args` together with its encoded trace.
    pub fn get(&self, args: &[Term]) -> Result<(Term, Term), TransformError> {
        let call = Term::app(&injective_name(&self.view), args.to_vec());
        let out = normalize(&self.forward, &call, Strategy::Constructor, self.bounds)?;
        match split_pair(&out) {
            Some((v, trace)) if self.forward.is_constructor_term(v) => Ok((v.clone(), trace.clone())),
            _ => Err(TransformError::ViewFailed(stuck(&call, &out))),
        }
    }

    /// Source arguments whose view is `new_view`, reusing the trace of `args`.
    pub fn put(&self, args: &[Term], new_view: &Term) -> Result<Vec<Term>, TransformError> {
        let (_, trace) = self.get(args)?;
        let call = Term::app(&inverse_name(&self.view), vec![new_view.clone(), trace]);
        let out = normalize(&self.backward, &call, Strategy::Constructor, self.bounds)?;
        match &out {
            Term::App(f, items)
                if tuple_arity(f) == Some(args.len()) && items.iter().all(|t| self.backward.is_constructor_term(t)) =>
            {
                Ok(items.clone())
            }
            _ => Err(TransformError::UpdateFailed(stuck(&call, &out))),
        }
    }
}

fn stuck(call: &Term, out: &Term) -> String {
    if call == out {
        format!("{call} has no applicable rule")
    } else {
        format!("{call} is stuck at {out}")
    }
}

/// `upd(new_view, source)`: propagates a changed view back to the source
/// arguments of `view`.
pub fn view_update(
    system: &RewriteSystem,
    view: &str,
    args: &[Term],
    new_view: &Term,
    bounds: Bounds,
) -> Result<Vec<Term>, TransformError> {
    Bidirectional::new(system, view, bounds)?.put(args, new_view)
}

/// `(a,b,…)`, the way updated sources are shown.
pub fn format_arguments(args: &[Term]) -> String {
    let items: Vec<String> = args.iter().map(Term::to_string).collect();
    format!("({})", items.join(","))
}

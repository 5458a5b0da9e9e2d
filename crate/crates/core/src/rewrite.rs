//! Conditional rewriting under the any, innermost, constructor and top
//! strategies.
//!
//! Redexes are visited leftmost-innermost (post-order), rules in textual
//! order. Conditions are solved left to right: the instantiated lhs is
//! normalized under the same strategy and the rhs is matched against the result.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::system::{RewriteSystem, Rule};
use crate::term::{Position, Substitution, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Any,
    Innermost,
    Constructor,
    Top,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Any => "any",
            Strategy::Innermost => "innermost",
            Strategy::Constructor => "constructor",
            Strategy::Top => "top",
        }
    }

    /// Constructor strategy for pcDCTRSs, innermost otherwise.
    pub fn default_for(system: &RewriteSystem) -> Strategy {
        if system.classification().is_pcdctrs {
            Strategy::Constructor
        } else {
            Strategy::Innermost
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(Strategy::Any),
            "innermost" => Ok(Strategy::Innermost),
            "constructor" => Ok(Strategy::Constructor),
            "top" => Ok(Strategy::Top),
            _ => Err(format!("unknown strategy `{s}` (expected any, innermost, constructor or top)")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Total rewrite steps per call, including steps inside conditions.
    pub max_steps: usize,
    /// Nesting depth of condition evaluation.
    pub max_depth: usize,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds { max_steps: 10_000, max_depth: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("bound exceeded: more than {0} rewrite steps")]
    StepsExceeded(usize),
    #[error("bound exceeded: condition nesting deeper than {0}")]
    DepthExceeded(usize),
    #[error("term {0} is not ground")]
    NonGround(Term),
    #[error("rule {label}: condition lhs {lhs} is not ground when reached")]
    UnboundCondition { label: String, lhs: Term },
}

impl RewriteError {
    pub fn is_bound_exceeded(&self) -> bool {
        matches!(self, RewriteError::StepsExceeded(_) | RewriteError::DepthExceeded(_))
    }
}

/// One rewrite step with the evidence for its conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepWitness {
    pub position: Position,
    pub rule_label: crate::term::Name,
    pub subst: Substitution,
    pub result: Term,
    /// One derivation per condition, from its instantiated lhs to a normal form.
    pub sub_witnesses: Vec<Derivation>,
}

/// A sequence of steps from `start`, oldest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub start: Term,
    pub steps: Vec<StepWitness>,
}

impl Derivation {
    pub fn end(&self) -> &Term {
        self.steps.last().map_or(&self.start, |w| &w.result)
    }
}

struct Engine<'a> {
    system: &'a RewriteSystem,
    strategy: Strategy,
    bounds: Bounds,
    steps: usize,
}

impl<'a> Engine<'a> {
    fn new(system: &'a RewriteSystem, strategy: Strategy, bounds: Bounds) -> Engine<'a> {
        Engine { system, strategy, bounds, steps: 0 }
    }

    fn try_rule(
        &mut self,
        rule: &Rule,
        redex: &Term,
        depth: usize,
    ) -> Result<Option<(Substitution, Vec<Derivation>)>, RewriteError> {
        let mut subst = Substitution::new();
        if !subst.extend_by_match(&rule.lhs, redex) {
            return Ok(None);
        }
        self.solve(rule, subst, depth)
    }

    fn solve(
        &mut self,
        rule: &Rule,
        mut subst: Substitution,
        depth: usize,
    ) -> Result<Option<(Substitution, Vec<Derivation>)>, RewriteError> {
        let constructor = self.strategy == Strategy::Constructor;
        if constructor && !subst.iter().all(|(_, t)| self.system.is_constructor_term(t)) {
            return Ok(None);
        }
        let mut subs = Vec::with_capacity(rule.conditions.len());
        for c in &rule.conditions {
            if depth + 1 > self.bounds.max_depth {
                return Err(RewriteError::DepthExceeded(self.bounds.max_depth));
            }
            let start = subst.apply(&c.lhs);
            if !start.is_ground() {
                return Err(RewriteError::UnboundCondition { label: rule.label.to_string(), lhs: c.lhs.clone() });
            }
            let derivation = self.derive(start, depth + 1)?;
            let before = subst.clone();
            if !subst.extend_by_match(&c.rhs, derivation.end()) {
                return Ok(None);
            }
            if constructor
                && subst
                    .iter()
                    .any(|(x, t)| !before.contains(x) && !self.system.is_constructor_term(t))
            {
                return Ok(None);
            }
            subs.push(derivation);
        }
        Ok(Some((subst, subs)))
    }

    fn witnesses(&mut self, t: &Term, depth: usize, first_only: bool) -> Result<Vec<StepWitness>, RewriteError> {
        let positions = match self.strategy {
            Strategy::Top => vec![Position::root()],
            _ => t.positions_postorder(),
        };
        let innermost = matches!(self.strategy, Strategy::Innermost | Strategy::Constructor);
        let mut redexes: Vec<Position> = Vec::new();
        let mut out = Vec::new();
        for p in positions {
            if innermost && redexes.iter().any(|q| q.is_strictly_below(&p)) {
                continue;
            }
            let redex = t.subterm(&p).expect("position from traversal");
            let Some(f) = redex.root() else { continue };
            let mut found = false;
            for rule in self.system.rules_for(f) {
                if let Some((subst, sub_witnesses)) = self.try_rule(rule, redex, depth)? {
                    let result = t.replace(&p, subst.apply(&rule.rhs)).expect("valid position");
                    out.push(StepWitness {
                        position: p.clone(),
                        rule_label: rule.label.clone(),
                        subst,
                        result,
                        sub_witnesses,
                    });
                    found = true;
                    if first_only {
                        return Ok(out);
                    }
                }
            }
            if found {
                redexes.push(p);
            }
        }
        Ok(out)
    }

    fn derive(&mut self, start: Term, depth: usize) -> Result<Derivation, RewriteError> {
        let mut steps: Vec<StepWitness> = Vec::new();
        loop {
            let current = steps.last().map_or(&start, |w| &w.result).clone();
            let Some(w) = self.witnesses(&current, depth, true)?.pop() else {
                return Ok(Derivation { start, steps });
            };
            self.steps += 1;
            if self.steps > self.bounds.max_steps {
                return Err(RewriteError::StepsExceeded(self.bounds.max_steps));
            }
            steps.push(w);
        }
    }
}

fn ground(t: &Term) -> Result<(), RewriteError> {
    if t.is_ground() {
        Ok(())
    } else {
        Err(RewriteError::NonGround(t.clone()))
    }
}

/// All one-step successors of `t`, ordered by position then rule order.
pub fn step(system: &RewriteSystem, t: &Term, strategy: Strategy, bounds: Bounds) -> Result<Vec<StepWitness>, RewriteError> {
    ground(t)?;
    Engine::new(system, strategy, bounds).witnesses(t, 0, false)
}

/// The first successor in the fixed order, if any.
pub fn first_step(
    system: &RewriteSystem,
    t: &Term,
    strategy: Strategy,
    bounds: Bounds,
) -> Result<Option<StepWitness>, RewriteError> {
    ground(t)?;
    Ok(Engine::new(system, strategy, bounds).witnesses(t, 0, true)?.pop())
}

/// Follows first witnesses until a normal form, keeping every step.
pub fn derive(system: &RewriteSystem, t: &Term, strategy: Strategy, bounds: Bounds) -> Result<Derivation, RewriteError> {
    ground(t)?;
    Engine::new(system, strategy, bounds).derive(t.clone(), 0)
}

pub fn normalize(system: &RewriteSystem, t: &Term, strategy: Strategy, bounds: Bounds) -> Result<Term, RewriteError> {
    Ok(derive(system, t, strategy, bounds)?.end().clone())
}

/// Extends `sigma0` through the rule's conditions, or `None` when one of
/// them cannot be satisfied.
pub fn solve_conditions(
    system: &RewriteSystem,
    rule: &Rule,
    sigma0: &Substitution,
    strategy: Strategy,
    bounds: Bounds,
) -> Result<Option<Substitution>, RewriteError> {
    let mut engine = Engine::new(system, strategy, bounds);
    Ok(engine.solve(rule, sigma0.clone(), 0)?.map(|(subst, _)| subst))
}

//! First-order terms, positions and substitutions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

/// Interned-ish name of a variable or function symbol.
pub type Name = Arc<str>;

/// Name of the binary list constructor produced by `[a,b]` and `a:b`.
pub const CONS: &str = "cons";
/// Name of the empty list produced by `[]`.
pub const NIL: &str = "nil";
/// Prefix of generated tuple constructors (`tuple#k`).
pub const TUPLE_PREFIX: &str = "tuple#";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid position {position} in {term}")]
    InvalidPosition { position: Position, term: Term },
    #[error("cannot match against non-ground subject {0}")]
    NonGroundSubject(Term),
    #[error("substitution domains overlap on {0}")]
    OverlappingDomains(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    App(Name, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.into())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    pub fn constant(name: &str) -> Term {
        Term::App(name.into(), Vec::new())
    }

    /// `tuple#k(items)`.
    pub fn tuple(items: Vec<Term>) -> Term {
        Term::App(tuple_name(items.len()).into(), items)
    }

    /// Builds a `cons`/`nil` list.
    pub fn list(items: Vec<Term>) -> Term {
        items
            .into_iter()
            .rev()
            .fold(Term::constant(NIL), |tail, head| Term::app(CONS, vec![head, tail]))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Root symbol name, `None` for variables.
    pub fn root(&self) -> Option<&Name> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Variables in left-to-right order of first occurrence.
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Term::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn var_set(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.add_vars_to(&mut out);
        out
    }

    pub fn add_vars_to(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.add_vars_to(out)),
        }
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    /// Height of the term; constants and variables have depth 1.
    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }

    /// All symbol occurrences `(name, arity)`, preorder.
    pub fn symbols(&self) -> Vec<(Name, usize)> {
        let mut out = Vec::new();
        self.for_each_app(&mut |f, args| out.push((f.clone(), args.len())));
        out
    }

    fn for_each_app(&self, visit: &mut impl FnMut(&Name, &[Term])) {
        if let Term::App(f, args) = self {
            visit(f, args);
            args.iter().for_each(|a| a.for_each_app(visit));
        }
    }

    pub fn subterm(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in &p.0 {
            cur = match cur {
                Term::App(_, args) if i >= 1 && i <= args.len() => &args[i - 1],
                _ => {
                    return Err(TermError::InvalidPosition {
                        position: p.clone(),
                        term: self.clone(),
                    })
                }
            };
        }
        Ok(cur)
    }

    pub fn replace(&self, p: &Position, u: Term) -> Result<Term, TermError> {
        fn go(t: &Term, path: &[usize], u: Term) -> Option<Term> {
            match path.split_first() {
                None => Some(u),
                Some((&i, rest)) => match t {
                    Term::App(f, args) if i >= 1 && i <= args.len() => {
                        let mut args = args.clone();
                        args[i - 1] = go(&args[i - 1], rest, u)?;
                        Some(Term::App(f.clone(), args))
                    }
                    _ => None,
                },
            }
        }
        go(self, &p.0, u).ok_or_else(|| TermError::InvalidPosition {
            position: p.clone(),
            term: self.clone(),
        })
    }

    /// Non-variable positions in post-order: children left to right before
    /// their parent. The first redex found in this order is the
    /// leftmost-innermost one.
    pub fn positions_postorder(&self) -> Vec<Position> {
        fn go(t: &Term, prefix: &mut Vec<usize>, out: &mut Vec<Position>) {
            if let Term::App(_, args) = t {
                for (i, a) in args.iter().enumerate() {
                    prefix.push(i + 1);
                    go(a, prefix, out);
                    prefix.pop();
                }
                out.push(Position(prefix.clone()));
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Renames every variable through `rename`.
    pub fn map_vars(&self, rename: &mut impl FnMut(&Name) -> Term) -> Term {
        match self {
            Term::Var(x) => rename(x),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.map_vars(rename)).collect())
            }
        }
    }

    /// Renames every function symbol through `rename`.
    pub fn map_symbols(&self, rename: &mut impl FnMut(&Name, usize) -> Name) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::App(f, args) => Term::App(
                rename(f, args.len()),
                args.iter().map(|a| a.map_symbols(rename)).collect(),
            ),
        }
    }

    fn list_items(&self) -> Option<Vec<&Term>> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::App(f, args) if &**f == NIL && args.is_empty() => return Some(items),
                Term::App(f, args) if &**f == CONS && args.len() == 2 => {
                    items.push(&args[0]);
                    cur = &args[1];
                }
                _ => return None,
            }
        }
    }
}

pub fn tuple_name(k: usize) -> String {
    format!("{TUPLE_PREFIX}{k}")
}

/// Arity encoded in a `tuple#k` name.
pub fn tuple_arity(name: &str) -> Option<usize> {
    name.strip_prefix(TUPLE_PREFIX)?.parse().ok()
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(name, args) => {
                if let Some(items) = self.list_items() {
                    f.write_str("[")?;
                    for (i, a) in items.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    return f.write_str("]");
                }
                if &**name == CONS && args.len() == 2 {
                    // Partial list: `h:t`, parenthesising a cons head.
                    let head_is_cons = args[0].root().is_some_and(|h| &**h == CONS)
                        && args[0].args().len() == 2
                        && args[0].list_items().is_none();
                    if head_is_cons {
                        write!(f, "({})", args[0])?;
                    } else {
                        write!(f, "{}", args[0])?;
                    }
                    return write!(f, ":{}", args[1]);
                }
                if tuple_arity(name) == Some(args.len()) {
                    f.write_str("<")?;
                    write_args(f, args)?;
                    return f.write_str(">");
                }
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    write_args(f, args)?;
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// A path of 1-based child indices; the empty path is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    /// True if `self` lies strictly below `other`.
    pub fn is_strictly_below(&self, other: &Position) -> bool {
        self.0.len() > other.0.len() && self.0.starts_with(&other.0)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

impl FromStr for Position {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "e" || s == "ε" {
            return Ok(Position::root());
        }
        s.split('.')
            .map(|part| match part.parse::<usize>() {
                Ok(i) if i >= 1 => Ok(i),
                _ => Err(format!("bad position `{s}`")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Position)
    }
}

/// Finite map from variables to terms. Identity bindings are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<Name, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Name, Term)>>(pairs: I) -> Substitution {
        let mut s = Substitution::new();
        for (x, t) in pairs {
            s.insert(x, t);
        }
        s
    }

    /// Sets `x ↦ t`, dropping the binding if `t` is `x` itself.
    pub fn insert(&mut self, x: Name, t: Term) {
        if matches!(&t, Term::Var(y) if *y == x) {
            self.0.remove(&x);
        } else {
            self.0.insert(x, t);
        }
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.0.contains_key(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bindings in lexicographic (byte-wise) variable order.
    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> BTreeSet<Name> {
        self.0.keys().cloned().collect()
    }

    pub fn is_ground(&self) -> bool {
        self.0.values().all(Term::is_ground)
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.0.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(x) => self.0.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    pub fn restrict<'a, I: IntoIterator<Item = &'a Name>>(&self, vars: I) -> Substitution {
        let mut out = Substitution::new();
        for x in vars {
            if let Some(t) = self.0.get(x) {
                out.0.insert(x.clone(), t.clone());
            }
        }
        out
    }

    pub fn disjoint_union(&self, other: &Substitution) -> Result<Substitution, TermError> {
        let mut out = self.clone();
        for (x, t) in &other.0 {
            if out.0.contains_key(x) {
                return Err(TermError::OverlappingDomains(x.clone()));
            }
            out.0.insert(x.clone(), t.clone());
        }
        Ok(out)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (x, t) in &other.0 {
            out.insert(x.clone(), self.apply(t));
        }
        for (x, t) in &self.0 {
            if !other.0.contains_key(x) {
                out.insert(x.clone(), t.clone());
            }
        }
        out
    }

    /// Extends `self` so that `self(pattern) = subject`. Returns false on a
    /// clash or on a binding inconsistent with an existing one; `self` may be
    /// partially extended in that case. The subject must be ground.
    pub fn extend_by_match(&mut self, pattern: &Term, subject: &Term) -> bool {
        match pattern {
            Term::Var(x) => match self.0.get(x) {
                Some(bound) => bound == subject,
                None => {
                    self.insert(x.clone(), subject.clone());
                    true
                }
            },
            Term::App(f, ps) => match subject {
                Term::App(g, ss) if f == g && ps.len() == ss.len() => {
                    ps.iter().zip(ss).all(|(p, s)| self.extend_by_match(p, s))
                }
                _ => false,
            },
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}↦{t}")?;
        }
        f.write_str("}")
    }
}

/// Syntactic matching of a pattern against a ground subject.
pub fn match_term(pattern: &Term, subject: &Term) -> Result<Option<Substitution>, TermError> {
    if !subject.is_ground() {
        return Err(TermError::NonGroundSubject(subject.clone()));
    }
    let mut subst = Substitution::new();
    Ok(subst.extend_by_match(pattern, subject).then_some(subst))
}

/// Most general unifier with occurs check; the result is idempotent.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    let mut subst = Substitution::new();
    let mut work = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = work.pop() {
        let a = subst.apply(&a);
        let b = subst.apply(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), u) | (u, Term::Var(x)) => {
                if u.contains_var(&x) {
                    return None;
                }
                let single = Substitution::from_pairs([(x.clone(), u.clone())]);
                subst = single.compose(&subst);
                subst.insert(x, u);
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return None;
                }
                work.extend(xs.into_iter().zip(ys));
            }
        }
    }
    Some(subst)
}

//! Reference semantics by exhaustive search. Shares only the term type and
//! the parser with the library: matching, substitution and redex selection
//! are written again here, as plainly as possible.

use std::collections::{BTreeSet, HashMap};

use revrw::{Name, RewriteSystem, Term};

type Env = HashMap<Name, Term>;

struct RawRule {
    lhs: Term,
    rhs: Term,
    conditions: Vec<(Term, Term)>,
}

pub struct Oracle {
    rules: Vec<RawRule>,
    defined: BTreeSet<Name>,
    reach_memo: HashMap<Term, BTreeSet<Term>>,
    root_memo: HashMap<Term, Vec<Term>>,
    limit: usize,
    /// Match condition rhs's against normal forms only (the engine's
    /// discipline) rather than against every reachable term.
    normal_conditions: bool,
}

fn bind(pattern: &Term, subject: &Term, env: &mut Env) -> bool {
    match (pattern, subject) {
        (Term::Var(x), _) => match env.get(x) {
            Some(bound) => bound == subject,
            None => {
                env.insert(x.clone(), subject.clone());
                true
            }
        },
        (Term::App(f, ps), Term::App(g, ss)) => {
            f == g && ps.len() == ss.len() && ps.iter().zip(ss).all(|(p, s)| bind(p, s, env))
        }
        _ => false,
    }
}

fn instantiate(t: &Term, env: &Env) -> Term {
    match t {
        Term::Var(x) => env.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| instantiate(a, env)).collect()),
    }
}

fn has_var(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::App(_, args) => args.iter().any(has_var),
    }
}

/// Every (path, subterm) pair of `t`.
fn subterms(t: &Term) -> Vec<(Vec<usize>, Term)> {
    let mut out = vec![(vec![], t.clone())];
    if let Term::App(_, args) = t {
        for (i, a) in args.iter().enumerate() {
            for (mut path, sub) in subterms(a) {
                path.insert(0, i);
                out.push((path, sub));
            }
        }
    }
    out
}

fn put(t: &Term, path: &[usize], new: Term) -> Term {
    match (path.split_first(), t) {
        (None, _) => new,
        (Some((i, rest)), Term::App(f, args)) => {
            let mut args = args.clone();
            args[*i] = put(&args[*i], rest, new);
            Term::App(f.clone(), args)
        }
        _ => unreachable!("path leaves the term"),
    }
}

impl Oracle {
    pub fn new(system: &RewriteSystem) -> Oracle {
        let rules: Vec<RawRule> = system
            .rules()
            .iter()
            .map(|r| RawRule {
                lhs: r.lhs.clone(),
                rhs: r.rhs.clone(),
                conditions: r.conditions.iter().map(|c| (c.lhs.clone(), c.rhs.clone())).collect(),
            })
            .collect();
        let defined = rules
            .iter()
            .filter_map(|r| match &r.lhs {
                Term::App(f, _) => Some(f.clone()),
                Term::Var(_) => None,
            })
            .collect();
        Oracle {
            rules,
            defined,
            reach_memo: HashMap::new(),
            root_memo: HashMap::new(),
            limit: 5000,
            normal_conditions: false,
        }
    }

    pub fn normalizing(system: &RewriteSystem) -> Oracle {
        Oracle { normal_conditions: true, ..Oracle::new(system) }
    }

    pub fn is_constructor_term(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, args) => !self.defined.contains(f) && args.iter().all(|a| self.is_constructor_term(a)),
        }
    }

    /// Results of rewriting `u` at its root, over every rule and every way
    /// of satisfying its conditions.
    fn root_steps(&mut self, u: &Term) -> Vec<Term> {
        if let Some(done) = self.root_memo.get(u) {
            return done.clone();
        }
        let mut out = Vec::new();
        for i in 0..self.rules.len() {
            let mut env = Env::new();
            if !bind(&self.rules[i].lhs, u, &mut env) {
                continue;
            }
            let mut envs = vec![env];
            for k in 0..self.rules[i].conditions.len() {
                let (s, t) = self.rules[i].conditions[k].clone();
                let mut next = Vec::new();
                for env in envs {
                    let start = instantiate(&s, &env);
                    assert!(!has_var(&start), "oracle: unbound condition");
                    let candidates =
                        if self.normal_conditions { self.normal_forms(&start) } else { self.reachable(&start) };
                    for reached in candidates {
                        let mut e = env.clone();
                        if bind(&t, &reached, &mut e) {
                            next.push(e);
                        }
                    }
                }
                envs = next;
            }
            for env in envs {
                let r = instantiate(&self.rules[i].rhs, &env);
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        self.root_memo.insert(u.clone(), out.clone());
        out
    }

    /// One innermost step: a redex none of whose proper subterms is a redex.
    pub fn successors(&mut self, t: &Term) -> Vec<Term> {
        let subs = subterms(t);
        let redex: Vec<bool> = subs.iter().map(|(_, u)| !self.root_steps(u).is_empty()).collect();
        let mut out = Vec::new();
        for (i, (path, _)) in subs.iter().enumerate() {
            if !redex[i] {
                continue;
            }
            let below = subs
                .iter()
                .enumerate()
                .any(|(j, (q, _))| redex[j] && q.len() > path.len() && q.starts_with(path));
            if below {
                continue;
            }
            for r in self.root_steps(&subs[i].1) {
                out.push(put(t, path, r));
            }
        }
        out
    }

    /// All terms reachable from `t` by innermost steps, `t` included.
    pub fn reachable(&mut self, t: &Term) -> BTreeSet<Term> {
        if let Some(done) = self.reach_memo.get(t) {
            return done.clone();
        }
        let mut seen = BTreeSet::from([t.clone()]);
        let mut todo = vec![t.clone()];
        while let Some(u) = todo.pop() {
            for v in self.successors(&u) {
                if seen.insert(v.clone()) {
                    assert!(seen.len() <= self.limit, "oracle: search space too large from {t}");
                    todo.push(v);
                }
            }
        }
        self.reach_memo.insert(t.clone(), seen.clone());
        seen
    }

    pub fn normal_forms(&mut self, t: &Term) -> BTreeSet<Term> {
        self.reachable(t).into_iter().filter(|u| self.successors(u).is_empty()).collect()
    }

    pub fn constructor_normal_forms(&mut self, t: &Term) -> BTreeSet<Term> {
        self.normal_forms(t).into_iter().filter(|u| self.is_constructor_term(u)).collect()
    }
}

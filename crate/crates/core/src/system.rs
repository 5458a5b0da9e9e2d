//! Rules, rewrite systems and their classification.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::term::{tuple_arity, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("symbol `{symbol}` used with arities {first} and {second}")]
    ArityConflict { symbol: String, first: usize, second: usize },
    #[error("duplicate rule label `{0}`")]
    DuplicateLabel(String),
    #[error("rule {0}: left-hand side is a variable")]
    VariableLhs(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Constructor,
    Defined,
    Tuple,
    TraceConstructor,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: Name,
    pub arity: usize,
    pub kind: SymbolKind,
}

/// Oriented condition `lhs ↠ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub label: Name,
    pub lhs: Term,
    pub rhs: Term,
    pub conditions: Vec<Condition>,
}

impl Rule {
    pub fn new(label: &str, lhs: Term, rhs: Term, conditions: Vec<(Term, Term)>) -> Rule {
        Rule {
            label: label.into(),
            lhs,
            rhs,
            conditions: conditions.into_iter().map(|(lhs, rhs)| Condition { lhs, rhs }).collect(),
        }
    }

    pub fn root(&self) -> &Name {
        self.lhs.root().expect("rule lhs is never a variable")
    }

    pub fn add_vars_to(&self, out: &mut BTreeSet<Name>) {
        self.lhs.add_vars_to(out);
        self.rhs.add_vars_to(out);
        for c in &self.conditions {
            c.lhs.add_vars_to(out);
            c.rhs.add_vars_to(out);
        }
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.add_vars_to(&mut out);
        out
    }

    /// Variables whose bindings a backward step cannot recover from the
    /// result and the conditions: lhs variables absent from the rest of the
    /// rule, plus variables bound by a condition rhs and not used by the rhs
    /// or by a later condition lhs.
    pub fn safety_domain(&self) -> BTreeSet<Name> {
        let mut used = self.rhs.var_set();
        for c in &self.conditions {
            c.lhs.add_vars_to(&mut used);
            c.rhs.add_vars_to(&mut used);
        }
        let mut out: BTreeSet<Name> = self.lhs.var_set().difference(&used).cloned().collect();
        for (i, c) in self.conditions.iter().enumerate() {
            let mut later = self.rhs.var_set();
            for d in &self.conditions[i + 1..] {
                d.lhs.add_vars_to(&mut later);
            }
            out.extend(c.rhs.var_set().difference(&later).cloned());
        }
        out
    }

    /// Applies `f` to every term of the rule.
    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Rule {
        Rule {
            label: self.label.clone(),
            lhs: f(&self.lhs),
            rhs: f(&self.rhs),
            conditions: self
                .conditions
                .iter()
                .map(|c| Condition { lhs: f(&c.lhs), rhs: f(&c.rhs) })
                .collect(),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.label, crate::syntax::format_rule(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    ThreeCtrs,
    Dctrs,
    Constructor,
    Pcdctrs,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::ThreeCtrs, Property::Dctrs, Property::Constructor, Property::Pcdctrs];

    pub fn name(self) -> &'static str {
        match self {
            Property::ThreeCtrs => "3ctrs",
            Property::Dctrs => "dctrs",
            Property::Constructor => "constructor",
            Property::Pcdctrs => "pcdctrs",
        }
    }
}

impl std::str::FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown property `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub label: Name,
    pub property: Property,
    pub passed: bool,
    pub message: String,
}

/// Violations of one property; empty when the property holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub property: Property,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn holds(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            return write!(f, "{}: pass", self.property.name());
        }
        write!(f, "{}: fail", self.property.name())?;
        for finding in &self.findings {
            write!(f, "\n  {}: {}", finding.label, finding.message)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Classification {
    pub is_trs: bool,
    pub is_3ctrs: bool,
    pub is_dctrs: bool,
    pub is_constructor_system: bool,
    pub is_pcdctrs: bool,
}

/// An ordered sequence of uniquely labeled rules with its signature.
#[derive(Debug, Clone)]
pub struct RewriteSystem {
    rules: Vec<Rule>,
    signature: BTreeMap<Name, Symbol>,
    by_label: HashMap<Name, usize>,
    by_root: HashMap<Name, Vec<usize>>,
    class: Classification,
}

impl PartialEq for RewriteSystem {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Eq for RewriteSystem {}

impl RewriteSystem {
    pub fn new(rules: Vec<Rule>) -> Result<RewriteSystem, SystemError> {
        let mut by_label = HashMap::new();
        let mut by_root: HashMap<Name, Vec<usize>> = HashMap::new();
        for (i, rule) in rules.iter().enumerate() {
            let Some(root) = rule.lhs.root() else {
                return Err(SystemError::VariableLhs(rule.label.to_string()));
            };
            if by_label.insert(rule.label.clone(), i).is_some() {
                return Err(SystemError::DuplicateLabel(rule.label.to_string()));
            }
            by_root.entry(root.clone()).or_default().push(i);
        }
        let labels: BTreeSet<&Name> = rules.iter().map(|r| &r.label).collect();
        let mut signature: BTreeMap<Name, Symbol> = BTreeMap::new();
        for rule in &rules {
            let terms = std::iter::once(&rule.lhs)
                .chain(std::iter::once(&rule.rhs))
                .chain(rule.conditions.iter().flat_map(|c| [&c.lhs, &c.rhs]));
            for t in terms {
                for (name, arity) in t.symbols() {
                    if let Some(existing) = signature.get(&name) {
                        if existing.arity != arity {
                            return Err(SystemError::ArityConflict {
                                symbol: name.to_string(),
                                first: existing.arity,
                                second: arity,
                            });
                        }
                        continue;
                    }
                    let kind = if by_root.contains_key(&name) {
                        SymbolKind::Defined
                    } else if tuple_arity(&name) == Some(arity) {
                        SymbolKind::Tuple
                    } else if labels.contains(&name) {
                        SymbolKind::TraceConstructor
                    } else {
                        SymbolKind::Constructor
                    };
                    signature.insert(name.clone(), Symbol { name, arity, kind });
                }
            }
        }
        let mut system = RewriteSystem { rules, signature, by_label, by_root, class: Classification::default() };
        system.class = Classification {
            is_trs: system
                .rules
                .iter()
                .all(|r| r.conditions.is_empty() && r.rhs.var_set().is_subset(&r.lhs.var_set())),
            is_3ctrs: system.validate(Property::ThreeCtrs).holds(),
            is_dctrs: system.validate(Property::Dctrs).holds(),
            is_constructor_system: system.validate(Property::Constructor).holds(),
            is_pcdctrs: system.validate(Property::Pcdctrs).holds(),
        };
        Ok(system)
    }

    pub fn empty() -> RewriteSystem {
        RewriteSystem::new(Vec::new()).expect("empty system is valid")
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, label: &str) -> Option<&Rule> {
        self.by_label.get(label).map(|&i| &self.rules[i])
    }

    /// Rules whose lhs is rooted by `f`, in textual order.
    pub fn rules_for(&self, f: &str) -> impl Iterator<Item = &Rule> {
        self.by_root.get(f).into_iter().flatten().map(|&i| &self.rules[i])
    }

    pub fn signature(&self) -> impl Iterator<Item = &Symbol> {
        self.signature.values()
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.signature.get(name)
    }

    pub fn classification(&self) -> Classification {
        self.class
    }

    pub fn is_defined(&self, name: &str) -> bool {
        self.by_root.contains_key(name)
    }

    /// Defined symbols in order of first definition.
    pub fn defined_symbols(&self) -> Vec<(Name, usize)> {
        let mut out: Vec<(Name, usize)> = Vec::new();
        for rule in &self.rules {
            let f = rule.root();
            if !out.iter().any(|(g, _)| g == f) {
                out.push((f.clone(), rule.lhs.args().len()));
            }
        }
        out
    }

    /// Constructor symbols of the signature (tuples and trace constructors
    /// included).
    pub fn constructor_symbols(&self) -> Vec<(Name, usize)> {
        self.signature
            .values()
            .filter(|s| s.kind != SymbolKind::Defined)
            .map(|s| (s.name.clone(), s.arity))
            .collect()
    }

    /// No defined symbol occurs in `t`. Symbols outside the signature count as
    /// constructors.
    pub fn is_constructor_term(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, args) => !self.is_defined(f) && args.iter().all(|a| self.is_constructor_term(a)),
        }
    }

    pub fn is_basic(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => false,
            Term::App(f, args) => self.is_defined(f) && args.iter().all(|a| self.is_constructor_term(a)),
        }
    }

    pub fn label_set(&self) -> BTreeSet<Name> {
        self.rules.iter().map(|r| r.label.clone()).collect()
    }

    pub fn validate(&self, property: Property) -> ValidationReport {
        let mut findings = Vec::new();
        let mut fail = |rule: &Rule, message: String| {
            findings.push(Finding { label: rule.label.clone(), property, passed: false, message })
        };
        for rule in &self.rules {
            let mut housed = rule.lhs.var_set();
            for c in &rule.conditions {
                c.lhs.add_vars_to(&mut housed);
                c.rhs.add_vars_to(&mut housed);
            }
            let unhoused: Vec<String> = rule.rhs.var_set().difference(&housed).map(|x| x.to_string()).collect();
            if !unhoused.is_empty() {
                fail(rule, format!("rhs variables {{{}}} occur neither in lhs nor in conditions", unhoused.join(",")));
            }
            if property == Property::ThreeCtrs {
                continue;
            }
            if matches!(property, Property::Dctrs | Property::Pcdctrs) {
                let mut known = rule.lhs.var_set();
                for (i, c) in rule.conditions.iter().enumerate() {
                    let missing: Vec<String> = c.lhs.var_set().difference(&known).map(|x| x.to_string()).collect();
                    if !missing.is_empty() {
                        fail(
                            rule,
                            format!(
                                "condition {}: variables {{{}}} not bound by lhs or earlier conditions",
                                i + 1,
                                missing.join(",")
                            ),
                        );
                    }
                    c.rhs.add_vars_to(&mut known);
                }
            }
            if matches!(property, Property::Constructor | Property::Pcdctrs) && !self.is_basic(&rule.lhs) {
                fail(rule, format!("lhs {} is not a basic term", rule.lhs));
            }
            if property == Property::Pcdctrs {
                if !self.is_constructor_term(&rule.rhs) {
                    fail(rule, format!("rhs {} is not a constructor term", rule.rhs));
                }
                for (i, c) in rule.conditions.iter().enumerate() {
                    if !self.is_basic(&c.lhs) {
                        fail(rule, format!("condition {}: lhs {} is not basic", i + 1, c.lhs));
                    }
                    if !self.is_constructor_term(&c.rhs) {
                        fail(rule, format!("condition {}: rhs {} is not a constructor term", i + 1, c.rhs));
                    }
                }
            }
        }
        ValidationReport { property, findings }
    }
}

impl fmt::Display for RewriteSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::format_system(self))
    }
}

/// Checks that two systems agree rule by rule up to a per-rule bijective
/// renaming of variables and a global bijective renaming of labels (which
/// also renames the trace constructors named after them).
pub fn alpha_equivalent(a: &RewriteSystem, b: &RewriteSystem) -> Result<(), String> {
    if a.rules.len() != b.rules.len() {
        return Err(format!("{} rules vs {} rules", a.rules.len(), b.rules.len()));
    }
    let labels: HashMap<&Name, &Name> = a.rules.iter().map(|r| &r.label).zip(b.rules.iter().map(|r| &r.label)).collect();
    for (ra, rb) in a.rules.iter().zip(&b.rules) {
        let mut vars: HashMap<Name, Name> = HashMap::new();
        let mut back: HashMap<Name, Name> = HashMap::new();
        let mut same = |x: &Term, y: &Term| same_shape(x, y, &labels, &mut vars, &mut back);
        let conditions_agree = ra.conditions.len() == rb.conditions.len()
            && ra.conditions.iter().zip(&rb.conditions).all(|(c, d)| same(&c.lhs, &d.lhs) && same(&c.rhs, &d.rhs));
        if !(same(&ra.lhs, &rb.lhs) && same(&ra.rhs, &rb.rhs) && conditions_agree) {
            return Err(format!("rules differ:\n  {ra}\n  {rb}"));
        }
    }
    Ok(())
}

fn same_shape(
    x: &Term,
    y: &Term,
    labels: &HashMap<&Name, &Name>,
    vars: &mut HashMap<Name, Name>,
    back: &mut HashMap<Name, Name>,
) -> bool {
    match (x, y) {
        (Term::Var(u), Term::Var(v)) => {
            let forward_ok = vars.entry(u.clone()).or_insert_with(|| v.clone()) == v;
            let backward_ok = back.entry(v.clone()).or_insert_with(|| u.clone()) == u;
            forward_ok && backward_ok
        }
        (Term::App(f, xs), Term::App(g, ys)) => {
            let names_agree = f == g || labels.get(f).is_some_and(|h| *h == g);
            names_agree
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(a, b)| same_shape(a, b, labels, vars, back))
        }
        _ => false,
    }
}

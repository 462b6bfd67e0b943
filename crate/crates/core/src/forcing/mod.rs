//! Point forcing, open-set forcing and Heyting truth values.
//!
//! Quantifiers range over principal sections: on an Alexandrov site every
//! section is glued from its germs `[y) -> fiber`, and forcing at `y` only
//! looks at values on `[y)`. [`Oracle`] evaluates the open-set clauses
//! directly over all opens and all sections, for cross-checking on small
//! sites.

mod oracle;

pub use oracle::Oracle;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::logic::{Formula, Term};
use crate::sheaf::{Section, SheafError, SheafOfStructures};
use crate::site::{NodeId, NodeSet, OpenSet, SiteError};
use crate::structure::{FiniteStructure, StructureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForcingError {
    #[error("variable `{0}` is not bound in the environment")]
    UnboundVariable(String),
    #[error("`{0}` is not in the environment domain")]
    OutsideDomain(String),
    #[error("symbol `{0}` is not interpreted by the sheaf")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} argument(s), got {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("node `{0}` is not maximal")]
    NotMaximal(String),
    #[error("expected an existential formula")]
    NotExistential,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Sections for the free variables of a formula, all over one open domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Environment {
    domain: OpenSet,
    bindings: BTreeMap<String, Section>,
}

impl Environment {
    /// No bindings, over `domain`.
    pub fn new(domain: OpenSet) -> Self {
        Environment {
            domain,
            bindings: BTreeMap::new(),
        }
    }

    /// No bindings, over the whole site.
    pub fn global(s: &SheafOfStructures) -> Self {
        Environment::new(s.site().whole())
    }

    /// Binds `var`; the domain shrinks to its meet with the section's
    /// domain and every binding is restricted to it.
    pub fn bind(&mut self, var: &str, section: Section) {
        self.domain = self.domain.meet(section.domain());
        self.bindings.insert(var.to_string(), section);
        let d = self.domain;
        for s in self.bindings.values_mut() {
            *s = s.restrict_unchecked(d);
        }
    }

    pub fn with(mut self, var: &str, section: Section) -> Self {
        self.bind(var, section);
        self
    }

    /// Binds every variable of `vars` that names a section of `s`.
    pub fn named(s: &SheafOfStructures, vars: impl IntoIterator<Item = String>) -> Self {
        let mut env = Environment::global(s);
        for v in vars {
            if let Ok(sec) = s.section(&v) {
                env.bind(&v, sec.clone());
            }
        }
        env
    }

    pub fn domain(&self) -> OpenSet {
        self.domain
    }

    pub fn get(&self, var: &str) -> Option<&Section> {
        self.bindings.get(var)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &Section)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn restrict(&self, v: OpenSet) -> Result<Environment, ForcingError> {
        if !v.is_subset(self.domain) {
            return Err(ForcingError::Precondition(
                "open is not inside the environment domain".into(),
            ));
        }
        Ok(Environment {
            domain: v,
            bindings: self
                .bindings
                .iter()
                .map(|(k, s)| (k.clone(), s.restrict_unchecked(v)))
                .collect(),
        })
    }
}

pub(crate) type Binds<'a> = Vec<(&'a str, &'a Section)>;

/// Evaluation context with every principal section precomputed.
pub(crate) struct Eval<'a> {
    pub(crate) s: &'a SheafOfStructures,
    pub(crate) principal: Vec<Vec<Section>>,
}

impl<'a> Eval<'a> {
    pub(crate) fn new(s: &'a SheafOfStructures) -> Self {
        let principal = s
            .site()
            .nodes()
            .map(|x| (0..s.fiber_len(x)).map(|a| s.principal(x, a)).collect())
            .collect();
        Eval { s, principal }
    }

    /// Checks free variables, domains and symbols so that evaluation below
    /// cannot fail.
    pub(crate) fn check(
        &self,
        f: &Formula,
        env: &Environment,
        at: OpenSet,
    ) -> Result<(), ForcingError> {
        let site = self.s.site();
        if !at.is_subset(env.domain) {
            let outside = at.nodes().difference(env.domain.nodes());
            return Err(ForcingError::OutsideDomain(site.show(outside)));
        }
        for v in f.free_vars() {
            if env.get(&v).is_none() {
                return Err(ForcingError::UnboundVariable(v));
            }
        }
        f.check_signature(&self.s.signature()).map_err(|e| match e {
            crate::logic::LogicError::ArityMismatch {
                symbol,
                expected,
                found,
            } => ForcingError::Arity {
                symbol,
                expected,
                found,
            },
            crate::logic::LogicError::UnknownSymbol(s) => ForcingError::UnknownSymbol(s),
            other => ForcingError::UnknownSymbol(other.to_string()),
        })
    }

    pub(crate) fn term(&self, t: &Term, x: NodeId, b: &Binds) -> usize {
        match t {
            Term::Var(v) => b
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .expect("checked binding")
                .1
                .at(x),
            Term::Const(c) => self.s.constant(c, x).expect("constant defined"),
            Term::App(f, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.term(a, x, b)).collect();
                self.s.apply(f, x, &vals).expect("function total")
            }
        }
    }

    pub(crate) fn atom(&self, f: &Formula, x: NodeId, b: &Binds) -> bool {
        match f {
            Formula::Eq(l, r) => self.term(l, x, b) == self.term(r, x, b),
            Formula::Rel(r, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.term(a, x, b)).collect();
                self.s.holds(r, x, &vals).expect("relation declared")
            }
            _ => unreachable!("not atomic"),
        }
    }

    /// `x ⊩ f`.
    pub(crate) fn point(&'a self, x: NodeId, f: &'a Formula, b: &mut Binds<'a>) -> bool {
        let site = self.s.site();
        match f {
            Formula::Eq(..) | Formula::Rel(..) => self.atom(f, x, b),
            Formula::Not(a) => site.up(x).iter().all(|y| !self.point(y, a, b)),
            Formula::And(l, r) => self.point(x, l, b) && self.point(x, r, b),
            Formula::Or(l, r) => self.point(x, l, b) || self.point(x, r, b),
            Formula::Implies(l, r) => site
                .up(x)
                .iter()
                .all(|y| !self.point(y, l, b) || self.point(y, r, b)),
            Formula::Exists(v, body) => (0..self.s.fiber_len(x)).any(|a| {
                b.push((v, &self.principal[x][a]));
                let r = self.point(x, body, b);
                b.pop();
                r
            }),
            Formula::Forall(v, body) => site.up(x).iter().all(|y| {
                (0..self.s.fiber_len(y)).all(|a| {
                    b.push((v, &self.principal[y][a]));
                    let r = self.point(y, body, b);
                    b.pop();
                    r
                })
            }),
        }
    }

    /// `[[f]]_U` by the Heyting clauses.
    pub(crate) fn value(&'a self, u: NodeSet, f: &'a Formula, b: &mut Binds<'a>) -> NodeSet {
        let site = self.s.site();
        match f {
            Formula::Eq(..) | Formula::Rel(..) => {
                u.iter().filter(|&x| self.atom(f, x, b)).collect()
            }
            Formula::Not(a) => {
                let va = self.value(u, a, b);
                site.interior(u.difference(va)).nodes()
            }
            Formula::And(l, r) => self.value(u, l, b).intersection(self.value(u, r, b)),
            Formula::Or(l, r) => self.value(u, l, b).union(self.value(u, r, b)),
            Formula::Implies(l, r) => {
                let vl = self.value(u, l, b);
                let vr = self.value(u, r, b);
                site.interior(u.difference(vl).union(vr)).nodes()
            }
            Formula::Exists(v, body) => {
                let mut acc = NodeSet::EMPTY;
                for y in u.iter() {
                    let basic = site.up(y).nodes();
                    for a in 0..self.s.fiber_len(y) {
                        b.push((v, &self.principal[y][a]));
                        acc = acc.union(self.value(basic, body, b));
                        b.pop();
                    }
                }
                acc
            }
            Formula::Forall(v, body) => {
                let mut acc = u;
                for y in u.iter() {
                    let basic = site.up(y).nodes();
                    for a in 0..self.s.fiber_len(y) {
                        b.push((v, &self.principal[y][a]));
                        let inside = self.value(basic, body, b);
                        b.pop();
                        acc = acc.intersection(inside.union(u.difference(basic)));
                    }
                }
                site.interior(acc).nodes()
            }
        }
    }
}

fn binds(env: &Environment) -> Binds<'_> {
    env.bindings.iter().map(|(k, v)| (k.as_str(), v)).collect()
}

/// `x ⊩ f` under `env`.
///
/// ```
/// use sheaf_logic::fixtures;
/// use sheaf_logic::forcing::{forces_at, Environment};
/// use sheaf_logic::logic::parse_formula;
///
/// let s = fixtures::s2();
/// let p = s.site().node("p").unwrap();
/// let env = Environment::named(&s, ["s".to_string()]);
/// let lem = parse_formula("R(s) | ~R(s)", &s.signature()).unwrap();
/// assert!(!forces_at(&s, p, &lem, &env).unwrap());
/// let nn = parse_formula("~~R(s)", &s.signature()).unwrap();
/// assert!(forces_at(&s, p, &nn, &env).unwrap());
/// ```
pub fn forces_at(
    s: &SheafOfStructures,
    x: NodeId,
    f: &Formula,
    env: &Environment,
) -> Result<bool, ForcingError> {
    if x >= s.site().len() {
        return Err(SiteError::NodeOutOfRange(x).into());
    }
    let ev = Eval::new(s);
    ev.check(f, env, s.site().up(x))?;
    let mut b = binds(env);
    Ok(ev.point(x, f, &mut b))
}

/// `U ⊩ f`: forced at every node of `u`.
pub fn forces_on(
    s: &SheafOfStructures,
    u: OpenSet,
    f: &Formula,
    env: &Environment,
) -> Result<bool, ForcingError> {
    Ok(truth_value_pointwise(s, u, f, env)? == u)
}

/// `{x ∈ U : x ⊩ f}`.
pub fn truth_value_pointwise(
    s: &SheafOfStructures,
    u: OpenSet,
    f: &Formula,
    env: &Environment,
) -> Result<OpenSet, ForcingError> {
    let ev = Eval::new(s);
    ev.check(f, env, u)?;
    let mut b = binds(env);
    let set: NodeSet = u.iter().filter(|&x| ev.point(x, f, &mut b)).collect();
    Ok(s.site().open(set)?)
}

/// `[[f]]_U` computed recursively with the Heyting operations of the opens
/// inside `u`.
pub fn truth_value(
    s: &SheafOfStructures,
    u: OpenSet,
    f: &Formula,
    env: &Environment,
) -> Result<OpenSet, ForcingError> {
    let ev = Eval::new(s);
    ev.check(f, env, u)?;
    let mut b = binds(env);
    let set = ev.value(u.nodes(), f, &mut b);
    Ok(s.site().open(set)?)
}

/// A witness for `exists v. body` on a dense open of `u`.
///
/// Germs are merged greedily, maximal nodes first, taking at each node the
/// first witnessing element compatible with what has been chosen.
pub fn glue_witnesses(
    s: &SheafOfStructures,
    u: OpenSet,
    f: &Formula,
    env: &Environment,
) -> Result<Section, ForcingError> {
    let Formula::Exists(v, body) = f else {
        return Err(ForcingError::NotExistential);
    };
    let ev = Eval::new(s);
    ev.check(f, env, u)?;
    let mut b = binds(env);
    if !u.iter().all(|x| ev.point(x, f, &mut b)) {
        return Err(ForcingError::Precondition(format!(
            "`{f}` is not forced on {}",
            s.site().show(u)
        )));
    }
    let mut glued = Section::empty(s.site().len());
    for x in s.site().top_down(u.nodes()) {
        if glued.domain().contains(x) {
            continue;
        }
        for a in 0..s.fiber_len(x) {
            let germ = &ev.principal[x][a];
            if !germ.compatible_with(&glued) {
                continue;
            }
            b.push((v, germ));
            let ok = ev.point(x, body, &mut b);
            b.pop();
            if ok {
                glued = glued.glue(germ).expect("compatible");
                break;
            }
        }
    }
    Ok(glued)
}

/// Forcing and classical truth at a maximal node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassicalCheck {
    pub forced: bool,
    pub classical: bool,
}

impl ClassicalCheck {
    pub fn agrees(&self) -> bool {
        self.forced == self.classical
    }
}

pub fn is_classical_node(s: &SheafOfStructures, x: NodeId) -> bool {
    s.site().is_maximal(x)
}

/// Compares `x ⊩ f` with Tarski truth in the fiber structure at `x`.
pub fn classical_check(
    s: &SheafOfStructures,
    x: NodeId,
    f: &Formula,
    env: &Environment,
) -> Result<ClassicalCheck, ForcingError> {
    if x >= s.site().len() {
        return Err(SiteError::NodeOutOfRange(x).into());
    }
    if !is_classical_node(s, x) {
        return Err(ForcingError::NotMaximal(s.site().name(x).to_string()));
    }
    let forced = forces_at(s, x, f, env)?;
    let fiber: FiniteStructure = s.fiber_structure(x);
    let assignment: Vec<(String, usize)> = env
        .bindings()
        .map(|(k, sec)| (k.to_string(), sec.at(x)))
        .collect();
    let classical = fiber.satisfies(f, &assignment)?;
    Ok(ClassicalCheck { forced, classical })
}

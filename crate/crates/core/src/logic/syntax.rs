use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::LogicError;

/// Relation, function and constant symbols of a single-sorted language.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
    constants: BTreeSet<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Relation(usize),
    Function(usize),
    Constant,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Self {
        self.add_relation(name, arity).expect("valid relation");
        self
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Self {
        self.add_function(name, arity).expect("valid function");
        self
    }

    pub fn with_constant(mut self, name: &str) -> Self {
        self.add_constant(name).expect("valid constant");
        self
    }

    fn clash(&self, name: &str, kind: SymbolKind) -> Result<(), LogicError> {
        match self.kind(name) {
            None => Ok(()),
            Some(k) if k == kind => Ok(()),
            Some(_) => Err(LogicError::SymbolClash(name.to_string())),
        }
    }

    /// Adds a relation symbol. Re-adding with the same arity is a no-op.
    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), LogicError> {
        if arity == 0 {
            return Err(LogicError::ZeroArity(name.to_string()));
        }
        self.clash(name, SymbolKind::Relation(arity))?;
        self.relations.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<(), LogicError> {
        if arity == 0 {
            return Err(LogicError::ZeroArity(name.to_string()));
        }
        self.clash(name, SymbolKind::Function(arity))?;
        self.functions.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), LogicError> {
        self.clash(name, SymbolKind::Constant)?;
        self.constants.insert(name.to_string());
        Ok(())
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        if let Some(&a) = self.relations.get(name) {
            Some(SymbolKind::Relation(a))
        } else if let Some(&a) = self.functions.get(name) {
            Some(SymbolKind::Function(a))
        } else if self.constants.contains(name) {
            Some(SymbolKind::Constant)
        } else {
            None
        }
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> {
        self.relations.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.functions.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.constants.iter().map(String::as_str)
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constants.contains(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.to_string(), args)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn substitute(&self, var: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => by.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|t| t.substitute(var, by)).collect(),
            ),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) | Term::Const(v) => f.write_str(v),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// First-order formulas. `<->` is not primitive; [`Formula::iff`] expands it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(name.to_string(), args)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn not_not(f: Formula) -> Formula {
        Formula::not(Formula::not(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Eq(..) | Formula::Rel(..))
    }

    /// Connective nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Eq(..) | Formula::Rel(..) => 0,
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add_term = |t: &Term, bound: &Vec<String>| {
            for v in t.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::Eq(a, b) => {
                add_term(a, bound);
                add_term(b, bound);
            }
            Formula::Rel(_, args) => args.iter().for_each(|t| add_term(t, bound)),
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Eq(a, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Formula::Rel(_, args) => args.iter().for_each(|t| t.collect_vars(&mut out)),
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Eq(..) | Formula::Rel(..) => {}
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Distinct subformulas, children before parents.
    pub fn subformulas(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        self.push_subformulas(&mut out);
        out
    }

    fn push_subformulas(&self, out: &mut Vec<Formula>) {
        match self {
            Formula::Eq(..) | Formula::Rel(..) => {}
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => {
                a.push_subformulas(out)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.push_subformulas(out);
                b.push_subformulas(out);
            }
        }
        if !out.contains(self) {
            out.push(self.clone());
        }
    }

    /// Capture-avoiding substitution of `by` for free occurrences of `var`.
    pub fn substitute(&self, var: &str, by: &Term) -> Formula {
        match self {
            Formula::Eq(a, b) => Formula::Eq(a.substitute(var, by), b.substitute(var, by)),
            Formula::Rel(r, args) => Formula::Rel(
                r.clone(),
                args.iter().map(|t| t.substitute(var, by)).collect(),
            ),
            Formula::Not(a) => Formula::not(a.substitute(var, by)),
            Formula::And(a, b) => Formula::and(a.substitute(var, by), b.substitute(var, by)),
            Formula::Or(a, b) => Formula::or(a.substitute(var, by), b.substitute(var, by)),
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute(var, by), b.substitute(var, by))
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let rebuild = |v: String, b: Formula| match self {
                    Formula::Exists(..) => Formula::Exists(v, Box::new(b)),
                    _ => Formula::Forall(v, Box::new(b)),
                };
                if v == var || !body.free_vars().contains(var) {
                    return self.clone();
                }
                if by.vars().contains(v) {
                    let mut avoid = self.all_vars();
                    avoid.extend(by.vars());
                    avoid.insert(var.to_string());
                    let fresh = fresh_name(v, &avoid);
                    let renamed = body.substitute(v, &Term::Var(fresh.clone()));
                    rebuild(fresh, renamed.substitute(var, by))
                } else {
                    rebuild(v.clone(), body.substitute(var, by))
                }
            }
        }
    }

    /// Symbols used by the formula, checked against `sig`.
    pub fn check_signature(&self, sig: &Signature) -> Result<(), LogicError> {
        fn term(t: &Term, sig: &Signature) -> Result<(), LogicError> {
            match t {
                Term::Var(_) => Ok(()),
                Term::Const(c) => {
                    if sig.is_constant(c) {
                        Ok(())
                    } else {
                        Err(LogicError::UnknownSymbol(c.clone()))
                    }
                }
                Term::App(f, args) => {
                    let arity = sig
                        .function_arity(f)
                        .ok_or_else(|| LogicError::UnknownSymbol(f.clone()))?;
                    if arity != args.len() {
                        return Err(LogicError::ArityMismatch {
                            symbol: f.clone(),
                            expected: arity,
                            found: args.len(),
                        });
                    }
                    args.iter().try_for_each(|a| term(a, sig))
                }
            }
        }
        let mut result = Ok(());
        self.visit(&mut |f| {
            if result.is_err() {
                return;
            }
            result = match f {
                Formula::Eq(a, b) => term(a, sig).and_then(|_| term(b, sig)),
                Formula::Rel(r, args) => match sig.relation_arity(r) {
                    None => Err(LogicError::UnknownSymbol(r.clone())),
                    Some(a) if a != args.len() => Err(LogicError::ArityMismatch {
                        symbol: r.clone(),
                        expected: a,
                        found: args.len(),
                    }),
                    Some(_) => args.iter().try_for_each(|t| term(t, sig)),
                },
                _ => Ok(()),
            };
        });
        result
    }
}

/// `base` with the smallest numeric suffix not in `avoid`.
pub(crate) fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { base } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|c| !avoid.contains(c))
        .expect("infinitely many candidates")
}

// Binding strength used by the printer; higher binds tighter.
const PREC_QUANT: u8 = 0;
const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_NOT: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Formula {
    fn prec(&self) -> u8 {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => PREC_QUANT,
            Formula::Implies(..) => PREC_IMPLIES,
            Formula::Or(..) => PREC_OR,
            Formula::And(..) => PREC_AND,
            Formula::Not(..) => PREC_NOT,
            Formula::Eq(..) | Formula::Rel(..) => PREC_ATOM,
        }
    }

    fn fmt_in(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let paren = self.prec() < ctx;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formula::Eq(a, b) => write!(f, "{a} = {b}")?,
            Formula::Rel(r, args) => {
                write!(f, "{r}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")?;
            }
            Formula::Not(a) => {
                f.write_str("~")?;
                a.fmt_in(f, PREC_NOT)?;
            }
            Formula::And(a, b) => {
                a.fmt_in(f, PREC_AND)?;
                f.write_str(" & ")?;
                b.fmt_in(f, PREC_NOT)?;
            }
            Formula::Or(a, b) => {
                a.fmt_in(f, PREC_OR)?;
                f.write_str(" | ")?;
                b.fmt_in(f, PREC_AND)?;
            }
            Formula::Implies(a, b) => {
                a.fmt_in(f, PREC_OR)?;
                f.write_str(" -> ")?;
                b.fmt_in(f, PREC_IMPLIES)?;
            }
            Formula::Exists(v, a) => {
                write!(f, "exists {v}. ")?;
                a.fmt_in(f, PREC_QUANT)?;
            }
            Formula::Forall(v, a) => {
                write!(f, "forall {v}. ")?;
                a.fmt_in(f, PREC_QUANT)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_in(f, PREC_QUANT)
    }
}

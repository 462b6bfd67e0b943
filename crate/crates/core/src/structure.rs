//! Classical finite structures and Tarski satisfaction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::logic::{Formula, Signature, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("variable `{0}` is not assigned")]
    UnboundVariable(String),
    #[error("symbol `{0}` is not interpreted")]
    UnknownSymbol(String),
    #[error("function `{0}` is undefined on the given arguments")]
    UndefinedValue(String),
    #[error("element {0} is outside the carrier")]
    OutOfCarrier(usize),
}

/// A classical structure on the carrier `0..len`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteStructure {
    labels: Vec<String>,
    relations: BTreeMap<String, (usize, BTreeSet<Vec<usize>>)>,
    functions: BTreeMap<String, (usize, HashMap<Vec<usize>, usize>)>,
    constants: BTreeMap<String, usize>,
}

impl FiniteStructure {
    pub fn new(labels: Vec<String>) -> Self {
        FiniteStructure {
            labels,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn set_relation(&mut self, name: &str, arity: usize, tuples: BTreeSet<Vec<usize>>) {
        self.relations.insert(name.to_string(), (arity, tuples));
    }

    pub fn set_function(&mut self, name: &str, arity: usize, table: HashMap<Vec<usize>, usize>) {
        self.functions.insert(name.to_string(), (arity, table));
    }

    pub fn set_constant(&mut self, name: &str, value: usize) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn relation(&self, name: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.relations.get(name).map(|(_, t)| t)
    }

    pub fn function(&self, name: &str) -> Option<&HashMap<Vec<usize>, usize>> {
        self.functions.get(name).map(|(_, t)| t)
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (r, (a, _)) in &self.relations {
            let _ = sig.add_relation(r, *a);
        }
        for (f, (a, _)) in &self.functions {
            let _ = sig.add_function(f, *a);
        }
        for c in self.constants.keys() {
            let _ = sig.add_constant(c);
        }
        sig
    }

    pub fn eval_term(&self, t: &Term, env: &[(String, usize)]) -> Result<usize, StructureError> {
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|&(_, a)| a)
                .ok_or_else(|| StructureError::UnboundVariable(v.clone())),
            Term::Const(c) => self
                .constant(c)
                .ok_or_else(|| StructureError::UnknownSymbol(c.clone())),
            Term::App(f, args) => {
                let table = self
                    .function(f)
                    .ok_or_else(|| StructureError::UnknownSymbol(f.clone()))?;
                let vals = args
                    .iter()
                    .map(|a| self.eval_term(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                table
                    .get(&vals)
                    .copied()
                    .ok_or_else(|| StructureError::UndefinedValue(f.clone()))
            }
        }
    }

    /// Tarski satisfaction. Later entries of `env` shadow earlier ones.
    pub fn satisfies(&self, f: &Formula, env: &[(String, usize)]) -> Result<bool, StructureError> {
        if let Some(&(_, a)) = env.iter().find(|(_, a)| *a >= self.len()) {
            return Err(StructureError::OutOfCarrier(a));
        }
        let mut env = env.to_vec();
        self.sat(f, &mut env)
    }

    fn sat(&self, f: &Formula, env: &mut Vec<(String, usize)>) -> Result<bool, StructureError> {
        Ok(match f {
            Formula::Eq(a, b) => self.eval_term(a, env)? == self.eval_term(b, env)?,
            Formula::Rel(r, args) => {
                let tuples = self
                    .relation(r)
                    .ok_or_else(|| StructureError::UnknownSymbol(r.clone()))?;
                let vals = args
                    .iter()
                    .map(|a| self.eval_term(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                tuples.contains(&vals)
            }
            Formula::Not(a) => !self.sat(a, env)?,
            Formula::And(a, b) => self.sat(a, env)? && self.sat(b, env)?,
            Formula::Or(a, b) => self.sat(a, env)? || self.sat(b, env)?,
            Formula::Implies(a, b) => !self.sat(a, env)? || self.sat(b, env)?,
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let universal = matches!(f, Formula::Forall(..));
                for a in 0..self.len() {
                    env.push((v.clone(), a));
                    let r = self.sat(body, env);
                    env.pop();
                    if r? != universal {
                        return Ok(!universal);
                    }
                }
                universal
            }
        })
    }
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "carrier: {{{}}}", self.labels.join(", "))?;
        let show = |t: &[usize]| {
            let v: Vec<&str> = t.iter().map(|&a| self.labels[a].as_str()).collect();
            format!("({})", v.join(","))
        };
        for (r, (_, tuples)) in &self.relations {
            let v: Vec<String> = tuples.iter().map(|t| show(t)).collect();
            writeln!(f, "{r}: {{{}}}", v.join(", "))?;
        }
        for (name, (_, table)) in &self.functions {
            let mut rows: Vec<(&Vec<usize>, &usize)> = table.iter().collect();
            rows.sort();
            let v: Vec<String> = rows
                .iter()
                .map(|(k, &o)| format!("{} -> {}", show(k), self.labels[o]))
                .collect();
            writeln!(f, "{name}: {}", v.join(", "))?;
        }
        for (c, &a) in &self.constants {
            writeln!(f, "{c} = {}", self.labels[a])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    #[test]
    fn tarski_basics() {
        let mut m = FiniteStructure::new(vec!["0".into()]);
        let sig = Signature::new();
        let f = parse_formula("x = x", &sig).unwrap();
        assert_eq!(m.satisfies(&f, &[("x".into(), 0)]), Ok(true));
        let g = parse_formula("exists x. exists y. ~x = y", &sig).unwrap();
        assert_eq!(m.satisfies(&g, &[]), Ok(false));
        assert_eq!(
            m.satisfies(&f, &[]),
            Err(StructureError::UnboundVariable("x".into()))
        );
        m.set_relation("R", 1, BTreeSet::from([vec![0]]));
        let h = parse_formula("forall x. R(x)", &m.signature()).unwrap();
        assert_eq!(m.satisfies(&h, &[]), Ok(true));
    }

    #[test]
    fn empty_carrier() {
        let m = FiniteStructure::new(vec![]);
        let sig = Signature::new();
        let f = parse_formula("forall x. ~x = x", &sig).unwrap();
        assert_eq!(m.satisfies(&f, &[]), Ok(true));
        let g = parse_formula("exists x. x = x", &sig).unwrap();
        assert_eq!(m.satisfies(&g, &[]), Ok(false));
    }
}

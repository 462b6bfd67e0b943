//! Open-set forcing evaluated literally: `∨` over all pairs of opens
//! covering `U`, `∃` over all opens and all sections on them, `¬`, `→` and
//! `∀` over all opens inside `U`.

use std::collections::HashMap;

use super::{binds, Binds, Environment, Eval, ForcingError};
use crate::logic::Formula;
use crate::sheaf::{Section, SheafOfStructures};
use crate::site::{NodeSet, OpenSet};

/// Default node bound for the exhaustive evaluator.
pub const ORACLE_NODE_BOUND: usize = 6;

/// Exhaustive open-set forcing for small sheaves.
pub struct Oracle<'a> {
    ev: Eval<'a>,
    opens: Vec<OpenSet>,
    sections: HashMap<OpenSet, Vec<Section>>,
}

impl<'a> Oracle<'a> {
    pub fn new(s: &'a SheafOfStructures) -> Result<Self, ForcingError> {
        let opens = s.site().enumerate_opens(ORACLE_NODE_BOUND)?;
        let mut sections = HashMap::new();
        for &u in &opens {
            sections.insert(u, s.sections_on(u)?);
        }
        Ok(Oracle {
            ev: Eval::new(s),
            opens,
            sections,
        })
    }

    fn within(&self, u: NodeSet) -> impl Iterator<Item = NodeSet> + '_ {
        self.opens
            .iter()
            .map(|o| o.nodes())
            .filter(move |w| w.is_subset(u))
    }

    fn kj(&'a self, u: NodeSet, f: &'a Formula, b: &mut Binds<'a>) -> bool {
        match f {
            Formula::Eq(..) | Formula::Rel(..) => u.iter().all(|x| self.ev.atom(f, x, b)),
            Formula::And(l, r) => self.kj(u, l, b) && self.kj(u, r, b),
            Formula::Or(l, r) => {
                let opens: Vec<NodeSet> = self.within(u).collect();
                let left: Vec<NodeSet> = opens
                    .iter()
                    .copied()
                    .filter(|&v| self.kj(v, l, b))
                    .collect();
                let right: Vec<NodeSet> = opens
                    .iter()
                    .copied()
                    .filter(|&w| self.kj(w, r, b))
                    .collect();
                left.iter().any(|v| right.iter().any(|w| v.union(*w) == u))
            }
            Formula::Not(a) => {
                let opens: Vec<NodeSet> = self.within(u).collect();
                opens.into_iter().all(|w| w.is_empty() || !self.kj(w, a, b))
            }
            Formula::Implies(l, r) => {
                let opens: Vec<NodeSet> = self.within(u).collect();
                opens
                    .into_iter()
                    .all(|w| !self.kj(w, l, b) || self.kj(w, r, b))
            }
            Formula::Exists(v, body) => {
                let mut covered = NodeSet::EMPTY;
                for w in self.within(u) {
                    if w.is_subset(covered) && !w.is_empty() {
                        continue;
                    }
                    let open = OpenSet::from_nodes_unchecked(w);
                    for sec in &self.sections[&open] {
                        b.push((v, sec));
                        let ok = self.kj(w, body, b);
                        b.pop();
                        if ok {
                            covered = covered.union(w);
                            break;
                        }
                    }
                }
                covered == u
            }
            Formula::Forall(v, body) => self.within(u).all(|w| {
                let open = OpenSet::from_nodes_unchecked(w);
                self.sections[&open].iter().all(|sec| {
                    b.push((v, sec));
                    let ok = self.kj(w, body, b);
                    b.pop();
                    ok
                })
            }),
        }
    }

    /// `U ⊩ f` by the open-set clauses.
    pub fn forces_on(
        &'a self,
        u: OpenSet,
        f: &'a Formula,
        env: &'a Environment,
    ) -> Result<bool, ForcingError> {
        self.ev.check(f, env, u)?;
        let mut b = binds(env);
        Ok(self.kj(u.nodes(), f, &mut b))
    }

    /// Union of all opens inside `u` that force `f`.
    pub fn truth_value(
        &'a self,
        u: OpenSet,
        f: &'a Formula,
        env: &'a Environment,
    ) -> Result<OpenSet, ForcingError> {
        self.ev.check(f, env, u)?;
        let mut b = binds(env);
        let mut acc = NodeSet::EMPTY;
        let opens: Vec<NodeSet> = self.within(u.nodes()).collect();
        for w in opens {
            if !w.is_subset(acc) && self.kj(w, f, &mut b) {
                acc = acc.union(w);
            }
        }
        Ok(OpenSet::from_nodes_unchecked(acc))
    }
}

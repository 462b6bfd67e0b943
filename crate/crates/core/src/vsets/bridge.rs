//! Variable sets as a sheaf of structures, so that formulas about
//! membership can be handed to the forcing evaluator.

use std::collections::HashMap;

use super::{build_hierarchy, Universe, VSet, VSetError};
use crate::forcing::{forces_at, Environment};
use crate::logic::Formula;
use crate::sheaf::{SheafBuilder, SheafOfStructures};
use crate::site::NodeId;

/// A sheaf whose fiber at `q` is a restriction-closed set of variable
/// sets based at `q`, with the binary relation `In` read as membership.
///
/// Extra unary relations name the members of fixed variable sets, and
/// extra binary relations hold of `(x, y)` when the ordered pair is a
/// member of a fixed variable set.
#[derive(Clone, Debug)]
pub struct VSheaf {
    sheaf: SheafOfStructures,
    carrier: Vec<Vec<VSet>>,
    index: Vec<HashMap<VSet, usize>>,
}

/// The `∈`-sheaf over `V_α`.
pub fn in_sheaf(u: &mut Universe, alpha: usize) -> Result<VSheaf, VSetError> {
    let carrier = build_hierarchy(u, alpha)?.carrier();
    VSheaf::build(u, carrier, &[], &[])
}

fn name(f: VSet) -> String {
    format!("v{}", f.id())
}

impl VSheaf {
    /// Builds and validates the sheaf. `carrier[q]` must consist of sets
    /// based at `q` and be closed under restriction.
    pub fn build(
        u: &mut Universe,
        carrier: Vec<Vec<VSet>>,
        unary: &[(&str, VSet)],
        pairs: &[(&str, VSet)],
    ) -> Result<VSheaf, VSetError> {
        let site = u.site().clone();
        if carrier.len() != site.len() {
            return Err(VSetError::Precondition(
                "one carrier list per node is required".into(),
            ));
        }
        let mut carrier = carrier;
        for c in carrier.iter_mut() {
            c.sort();
            c.dedup();
        }
        let index: Vec<HashMap<VSet, usize>> = carrier
            .iter()
            .map(|c| c.iter().enumerate().map(|(i, &f)| (f, i)).collect())
            .collect();
        let mut b = SheafBuilder::new(site.clone());
        for q in site.nodes() {
            let names: Vec<String> = carrier[q].iter().map(|&f| name(f)).collect();
            b = b.fiber(site.name(q), &names);
        }
        for q in site.nodes() {
            for r in site.strictly_above(q).iter() {
                let mut rows = Vec::new();
                for &f in &carrier[q] {
                    let g = u.restrict_vset(f, r)?;
                    if !index[r].contains_key(&g) {
                        return Err(VSetError::Precondition(format!(
                            "carrier is not closed under restriction: {} to {}",
                            u.label(f),
                            site.name(r)
                        )));
                    }
                    rows.push((name(f), name(g)));
                }
                let rows: Vec<(&str, &str)> =
                    rows.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
                b = b.map(site.name(q), site.name(r), &rows);
            }
        }
        b = b.relation("In", 2);
        for &(rel, _) in unary {
            b = b.relation(rel, 1);
        }
        for &(rel, _) in pairs {
            b = b.relation(rel, 2);
        }
        for q in site.nodes() {
            let qn = site.name(q);
            for &x in &carrier[q] {
                for &y in &carrier[q] {
                    if u.graph(y, q).expect("based at q").binary_search(&x).is_ok() {
                        b = b.holds("In", qn, &[&name(x), &name(y)]);
                    }
                }
                for &(rel, set) in unary {
                    if site.leq(u.base(set), q) && u.membership(x, set, q)? {
                        b = b.holds(rel, qn, &[&name(x)]);
                    }
                }
            }
            for &(rel, set) in pairs {
                if !site.leq(u.base(set), q) {
                    continue;
                }
                for &x in &carrier[q] {
                    for &y in &carrier[q] {
                        let xy = u.ordered_pair(x, y)?;
                        if u.membership(xy, set, q)? {
                            b = b.holds(rel, qn, &[&name(x), &name(y)]);
                        }
                    }
                }
            }
        }
        Ok(VSheaf {
            sheaf: b.build()?,
            carrier,
            index,
        })
    }

    pub fn sheaf(&self) -> &SheafOfStructures {
        &self.sheaf
    }

    /// The fiber at `q`, sorted by id.
    pub fn carrier(&self, q: NodeId) -> &[VSet] {
        &self.carrier[q]
    }

    /// Index of `f` in the fiber at its base.
    pub fn element(&self, u: &Universe, f: VSet) -> Option<usize> {
        self.index[u.base(f)].get(&f).copied()
    }

    /// `q ⊩ φ` with each variable of `binds` bound to the principal
    /// section of its restriction to `q`.
    pub fn forces(
        &self,
        u: &Universe,
        q: NodeId,
        phi: &Formula,
        binds: &[(&str, VSet)],
    ) -> Result<bool, VSetError> {
        let mut env = Environment::new(u.site().up(q));
        for &(var, f) in binds {
            let g = u
                .find_restriction(f, q)
                .filter(|g| self.index[q].contains_key(g))
                .ok_or_else(|| {
                    VSetError::Precondition(format!(
                        "{} is not in the carrier at {}",
                        u.label(f),
                        u.site().name(q)
                    ))
                })?;
            env.bind(var, self.sheaf.principal_section(q, self.index[q][&g])?);
        }
        Ok(forces_at(&self.sheaf, q, phi, &env)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::parse_formula;

    #[test]
    fn fibers_match_hierarchy_counts() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        let s = in_sheaf(&mut u, 2).unwrap();
        assert_eq!(s.sheaf().fiber_len(0), 3);
        assert_eq!(s.sheaf().fiber_len(1), 2);
        assert!(s.sheaf().validate().is_empty());
    }

    #[test]
    fn atoms_agree_with_membership() {
        let mut u = Universe::new(fixtures::pv()).unwrap();
        let s = in_sheaf(&mut u, 2).unwrap();
        let phi = parse_formula("In(x, y)", &s.sheaf().signature()).unwrap();
        for p in u.site().nodes() {
            for &x in s.carrier(p) {
                for &y in s.carrier(p) {
                    for q in u.site().up(p).iter() {
                        assert_eq!(
                            s.forces(&u, q, &phi, &[("x", x), ("y", y)]).unwrap(),
                            u.membership(x, y, q).unwrap()
                        );
                    }
                }
            }
        }
    }
}

//! Variable sets: the cumulative hierarchy `V_α(p)` over a finite partial
//! order, built from coherent node-indexed families of sets.
//!
//! A variable set with base `p` assigns to each `q ≥ p` a finite set of
//! variable sets with base `q`, such that `g ∈ f(q)` and `q ≤ r` imply
//! `g↾[r) ∈ f(r)`. Every variable set lives in a [`Universe`], which
//! hash-conses them: two handles are equal exactly when the families are.
//!
//! ```
//! use sheaf_logic::fixtures;
//! use sheaf_logic::vsets::{build_hierarchy, Universe};
//!
//! let mut u = Universe::new(fixtures::p2()).unwrap();
//! let level = build_hierarchy(&mut u, 2).unwrap();
//! assert_eq!(level.counts(), vec![3, 2]);
//! ```

mod axioms;
mod bridge;
mod classifier;
mod cohen;
mod construct;
mod hf;
mod hierarchy;

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::forcing::ForcingError;
use crate::sheaf::SheafError;
use crate::site::{NodeId, Site, SiteError};

pub use axioms::{axiom_check, Axiom, AxiomReport};
pub use bridge::{in_sheaf, VSheaf};
pub use classifier::{
    chi_char, chi_check, forced_functions, function_criterion, function_forced, is_onto,
    no_surjection_check, omega_classifier, onto_forced, upset_code, ChiReport, NoSurjectionReport,
    CHI_K_GUARD, CHI_SITE_GUARD,
};
pub use cohen::{extends, separating_extension, Condition};
pub use hf::HfSet;
pub use hierarchy::{
    build_hierarchy, build_hierarchy_guarded, enumerate_coherent, HierarchyLevel, ALPHA_GUARD,
    SITE_GUARD, SUBSET_GUARD,
};

#[derive(Debug, Error)]
pub enum VSetError {
    #[error("variable sets need a partial order")]
    NotPartialOrder,
    #[error("node {q} is not above the base {base}")]
    NotAbove { base: String, q: String },
    #[error("bases {0} and {1} differ")]
    BaseMismatch(String, String),
    #[error("bases {0} and {1} have no common upper node to compare at")]
    Incomparable(String, String),
    #[error("node {0} is not maximal")]
    NotMaximal(String),
    #[error("graph of a variable set over {base} is malformed: {reason}")]
    Malformed { base: String, reason: String },
    #[error(
        "incoherent family over {base}: a member at {at} does not restrict into the value at {to}"
    )]
    Incoherent {
        base: String,
        at: String,
        to: String,
    },
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
}

/// Handle to a canonical variable set inside a [`Universe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VSet(u32);

impl VSet {
    pub fn id(self) -> usize {
        self.0 as usize
    }
}

/// Graph over `[base)`, ascending by node, members sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    base: NodeId,
    graph: Vec<(NodeId, Vec<VSet>)>,
}

#[derive(Clone, Debug)]
struct Entry {
    key: Key,
    rank: usize,
}

/// Insert-only table of canonical variable sets over one site.
#[derive(Clone, Debug)]
pub struct Universe {
    site: Site,
    entries: Vec<Entry>,
    index: HashMap<Key, VSet>,
    restrictions: HashMap<(VSet, NodeId), VSet>,
}

impl Universe {
    pub fn new(site: Site) -> Result<Self, VSetError> {
        if !site.is_partial_order() {
            return Err(VSetError::NotPartialOrder);
        }
        Ok(Universe {
            site,
            entries: Vec::new(),
            index: HashMap::new(),
            restrictions: HashMap::new(),
        })
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    /// Number of canonical sets created so far.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn entry(&self, f: VSet) -> &Entry {
        &self.entries[f.id()]
    }

    pub fn base(&self, f: VSet) -> NodeId {
        self.entry(f).key.base
    }

    /// `f(q)`, or `None` when `q` is not above the base.
    pub fn graph(&self, f: VSet, q: NodeId) -> Option<&[VSet]> {
        let key = &self.entry(f).key;
        key.graph
            .iter()
            .find(|(r, _)| *r == q)
            .map(|(_, m)| m.as_slice())
    }

    /// `f(base)`: the members forced at the base.
    pub fn members(&self, f: VSet) -> &[VSet] {
        let key = &self.entry(f).key;
        &key.graph[key
            .graph
            .iter()
            .position(|(r, _)| *r == key.base)
            .expect("base in graph")]
        .1
    }

    /// Every `(q, f(q))` for `q` above the base, ascending by node.
    pub fn nodes_and_values(&self, f: VSet) -> impl Iterator<Item = (NodeId, &[VSet])> {
        self.entry(f)
            .key
            .graph
            .iter()
            .map(|(q, m)| (*q, m.as_slice()))
    }

    /// Least `α` with `f ∈ V_{α+1}`: one more than the largest member rank,
    /// zero for the empty family.
    pub fn rank(&self, f: VSet) -> usize {
        self.entry(f).rank
    }

    fn require_above(&self, base: NodeId, q: NodeId) -> Result<(), VSetError> {
        if q >= self.site.len() {
            return Err(SiteError::NodeOutOfRange(q).into());
        }
        if !self.site.leq(base, q) {
            return Err(VSetError::NotAbove {
                base: self.site.name(base).to_string(),
                q: self.site.name(q).to_string(),
            });
        }
        Ok(())
    }

    /// Interns a family given as `(q, members)` pairs, one for each node
    /// above `base`. Members are sorted and deduplicated; coherence and
    /// member bases are checked.
    pub fn make(
        &mut self,
        base: NodeId,
        graph: Vec<(NodeId, Vec<VSet>)>,
    ) -> Result<VSet, VSetError> {
        if base >= self.site.len() {
            return Err(SiteError::NodeOutOfRange(base).into());
        }
        let mut graph = graph;
        graph.sort_by_key(|(q, _)| *q);
        for (_, m) in graph.iter_mut() {
            m.sort();
            m.dedup();
        }
        let domain: Vec<NodeId> = self.site.up(base).iter().collect();
        let malformed = |reason: String| VSetError::Malformed {
            base: self.site.name(base).to_string(),
            reason,
        };
        if graph.iter().map(|(q, _)| *q).collect::<Vec<_>>() != domain {
            return Err(malformed(
                "nodes must be exactly those above the base, once each".into(),
            ));
        }
        for (q, m) in &graph {
            if let Some(g) = m.iter().find(|g| self.base(**g) != *q) {
                return Err(malformed(format!(
                    "member #{} at {} has base {}",
                    g.id(),
                    self.site.name(*q),
                    self.site.name(self.base(*g))
                )));
            }
        }
        for (q, m) in &graph {
            for &g in m {
                for (r, mr) in &graph {
                    if r == q || !self.site.leq(*q, *r) {
                        continue;
                    }
                    let h = self.restrict_vset(g, *r)?;
                    if mr.binary_search(&h).is_err() {
                        return Err(VSetError::Incoherent {
                            base: self.site.name(base).to_string(),
                            at: self.site.name(*q).to_string(),
                            to: self.site.name(*r).to_string(),
                        });
                    }
                }
            }
        }
        Ok(self.intern(Key { base, graph }))
    }

    fn intern(&mut self, key: Key) -> VSet {
        if let Some(&f) = self.index.get(&key) {
            return f;
        }
        let rank = key
            .graph
            .iter()
            .flat_map(|(_, m)| m.iter())
            .map(|g| self.entries[g.id()].rank + 1)
            .max()
            .unwrap_or(0);
        let f = VSet(u32::try_from(self.entries.len()).expect("universe overflow"));
        self.entries.push(Entry {
            key: key.clone(),
            rank,
        });
        self.index.insert(key, f);
        f
    }

    fn restricted_key(&self, f: VSet, q: NodeId) -> Key {
        Key {
            base: q,
            graph: self
                .entry(f)
                .key
                .graph
                .iter()
                .filter(|(r, _)| self.site.leq(q, *r))
                .cloned()
                .collect(),
        }
    }

    /// `f↾[q)`.
    pub fn restrict_vset(&mut self, f: VSet, q: NodeId) -> Result<VSet, VSetError> {
        self.require_above(self.base(f), q)?;
        if self.base(f) == q {
            return Ok(f);
        }
        if let Some(&g) = self.restrictions.get(&(f, q)) {
            return Ok(g);
        }
        let g = self.intern(self.restricted_key(f, q));
        self.restrictions.insert((f, q), g);
        Ok(g)
    }

    /// `f↾[q)` if it has already been created.
    pub fn find_restriction(&self, f: VSet, q: NodeId) -> Option<VSet> {
        if !self.site.leq(self.base(f), q) {
            return None;
        }
        if self.base(f) == q {
            return Some(f);
        }
        if let Some(&g) = self.restrictions.get(&(f, q)) {
            return Some(g);
        }
        self.index.get(&self.restricted_key(f, q)).copied()
    }

    /// `q ⊩ a ∈ f`, that is `a↾[q) ∈ f(q)`.
    pub fn membership(&self, a: VSet, f: VSet, q: NodeId) -> Result<bool, VSetError> {
        let (ba, bf) = (self.base(a), self.base(f));
        if q >= self.site.len() {
            return Err(SiteError::NodeOutOfRange(q).into());
        }
        if !self.site.leq(ba, q) || !self.site.leq(bf, q) {
            return Err(VSetError::Incomparable(
                self.site.name(ba).to_string(),
                self.site.name(bf).to_string(),
            ));
        }
        // Every member of `f(q)` is interned, so an absent restriction is
        // not a member.
        Ok(match self.find_restriction(a, q) {
            Some(a) => self
                .graph(f, q)
                .expect("q above base")
                .binary_search(&a)
                .is_ok(),
            None => false,
        })
    }

    /// `q ⊩ a = b`: equal restrictions at `q`.
    pub fn equal_at(&self, a: VSet, b: VSet, q: NodeId) -> bool {
        match (self.find_restriction(a, q), self.find_restriction(b, q)) {
            (Some(x), Some(y)) => x == y,
            (None, None) => self.restricted_key(a, q) == self.restricted_key(b, q),
            _ => false,
        }
    }

    /// `p ⊩ ¬(a = b)`: the restrictions differ at every node above `p`.
    pub fn forced_distinct(&self, a: VSet, b: VSet, p: NodeId) -> bool {
        self.site.up(p).iter().all(|q| !self.equal_at(a, b, q))
    }

    pub(crate) fn check_same_base(&self, a: VSet, b: VSet) -> Result<NodeId, VSetError> {
        let (ba, bb) = (self.base(a), self.base(b));
        if ba != bb {
            return Err(VSetError::BaseMismatch(
                self.site.name(ba).to_string(),
                self.site.name(bb).to_string(),
            ));
        }
        Ok(ba)
    }

    /// `#id@base`.
    pub fn label(&self, f: VSet) -> String {
        format!("#{}@{}", f.id(), self.site.name(self.base(f)))
    }

    /// One line: label, rank and the value at each node.
    pub fn show(&self, f: VSet) -> String {
        let mut out = format!("{} rank {}", self.label(f), self.rank(f));
        for (q, m) in self.nodes_and_values(f) {
            let ids: Vec<String> = m.iter().map(|g| format!("#{}", g.id())).collect();
            let _ = write!(out, " {}:{{{}}}", self.site.name(q), ids.join(","));
        }
        out
    }

    /// `f` and everything reachable from it, one [`Universe::show`] line
    /// each, ascending by id.
    pub fn dump(&self, f: VSet) -> String {
        let mut seen = std::collections::BTreeSet::new();
        let mut stack = vec![f];
        while let Some(g) = stack.pop() {
            if seen.insert(g) {
                stack.extend(
                    self.nodes_and_values(g)
                        .flat_map(|(_, m)| m.iter().copied()),
                );
            }
        }
        seen.into_iter().map(|g| self.show(g) + "\n").collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn empty_family_is_canonical() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        let e1 = u.make(0, vec![(0, vec![]), (1, vec![])]).unwrap();
        let e2 = u.make(0, vec![(1, vec![]), (0, vec![])]).unwrap();
        assert_eq!(e1, e2);
        assert_eq!(u.rank(e1), 0);
        let r = u.restrict_vset(e1, 1).unwrap();
        assert_eq!(u.members(r), &[] as &[VSet]);
        assert_eq!(u.restrict_vset(e1, 0).unwrap(), e1);
    }

    #[test]
    fn coherence_is_enforced() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        let ep = u.make(0, vec![(0, vec![]), (1, vec![])]).unwrap();
        let err = u.make(0, vec![(0, vec![ep]), (1, vec![])]).unwrap_err();
        assert!(matches!(err, VSetError::Incoherent { .. }));
        let eq = u.restrict_vset(ep, 1).unwrap();
        let f = u.make(0, vec![(0, vec![ep]), (1, vec![eq])]).unwrap();
        assert_eq!(u.rank(f), 1);
        assert!(u.membership(ep, f, 0).unwrap());
        assert!(u.membership(ep, f, 1).unwrap());
        assert!(!u.membership(f, ep, 0).unwrap());
    }

    #[test]
    fn cycle_is_rejected() {
        assert!(matches!(
            Universe::new(fixtures::cycle()),
            Err(VSetError::NotPartialOrder)
        ));
    }

    #[test]
    fn restriction_needs_node_above() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        let eq = u.make(1, vec![(1, vec![])]).unwrap();
        assert!(matches!(
            u.restrict_vset(eq, 0),
            Err(VSetError::NotAbove { .. })
        ));
    }
}

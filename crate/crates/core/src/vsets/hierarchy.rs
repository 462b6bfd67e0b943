use std::collections::{BTreeSet, HashMap};

use super::{Universe, VSet, VSetError};
use crate::site::NodeId;

/// Default bound on `α` for [`build_hierarchy`].
pub const ALPHA_GUARD: usize = 3;
/// Default bound on the number of nodes for [`build_hierarchy`].
pub const SITE_GUARD: usize = 3;
/// Largest candidate set whose subsets are enumerated at a single node.
pub const SUBSET_GUARD: usize = 20;

/// `V_β(q)` for every `β ≤ α` and every node `q`.
#[derive(Clone, Debug)]
pub struct HierarchyLevel {
    alpha: usize,
    levels: Vec<Vec<Vec<VSet>>>,
}

impl HierarchyLevel {
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// `V_α(q)` in enumeration order.
    pub fn at(&self, q: NodeId) -> &[VSet] {
        &self.levels[self.alpha][q]
    }

    /// `V_β(q)` for `β ≤ α`.
    pub fn level(&self, beta: usize, q: NodeId) -> &[VSet] {
        &self.levels[beta][q]
    }

    /// `|V_α(q)|` for each node.
    pub fn counts(&self) -> Vec<usize> {
        self.levels[self.alpha].iter().map(Vec::len).collect()
    }

    /// Per-node values of `V_α`, ready to use as a carrier.
    pub fn carrier(&self) -> Vec<Vec<VSet>> {
        self.levels[self.alpha].clone()
    }
}

/// Every coherent family with base `base` whose value at each `q` is a
/// subset of `candidates(q)`. Candidates at `q` must have base `q`.
///
/// Nodes are filled maximal first; at `q` only candidates whose
/// restrictions already lie in the chosen values above are allowed, and
/// every subset of those is taken.
pub fn enumerate_coherent(
    u: &mut Universe,
    base: NodeId,
    candidates: &dyn Fn(NodeId) -> Vec<VSet>,
) -> Result<Vec<VSet>, VSetError> {
    let site = u.site().clone();
    let order = site.top_down(site.up(base).nodes());
    let cand: HashMap<NodeId, Vec<VSet>> = order.iter().map(|&q| (q, candidates(q))).collect();
    // restrictions[q][i] = the restriction of candidate i at q to each strictly higher node
    let mut restrictions: HashMap<NodeId, Vec<Vec<(NodeId, VSet)>>> = HashMap::new();
    for &q in &order {
        let above: Vec<NodeId> = site.strictly_above(q).iter().collect();
        let mut rows = Vec::new();
        for &g in &cand[&q] {
            if u.base(g) != q {
                return Err(VSetError::Precondition(format!(
                    "candidate {} is not based at {}",
                    u.label(g),
                    site.name(q)
                )));
            }
            let mut row = Vec::new();
            for &r in &above {
                row.push((r, u.restrict_vset(g, r)?));
            }
            rows.push(row);
        }
        restrictions.insert(q, rows);
    }

    let mut graphs: Vec<Vec<(NodeId, Vec<VSet>)>> = Vec::new();
    let mut chosen: Vec<(NodeId, Vec<VSet>)> = Vec::new();
    fill(&order, 0, &cand, &restrictions, &mut chosen, &mut graphs)?;
    graphs.into_iter().map(|g| u.make(base, g)).collect()
}

fn fill(
    order: &[NodeId],
    i: usize,
    cand: &HashMap<NodeId, Vec<VSet>>,
    restrictions: &HashMap<NodeId, Vec<Vec<(NodeId, VSet)>>>,
    chosen: &mut Vec<(NodeId, Vec<VSet>)>,
    out: &mut Vec<Vec<(NodeId, Vec<VSet>)>>,
) -> Result<(), VSetError> {
    let Some(&q) = order.get(i) else {
        out.push(chosen.clone());
        return Ok(());
    };
    let value_at = |r: NodeId, chosen: &[(NodeId, Vec<VSet>)]| -> Vec<VSet> {
        chosen
            .iter()
            .find(|(n, _)| *n == r)
            .map(|(_, m)| m.clone())
            .unwrap_or_default()
    };
    let allowed: Vec<VSet> = cand[&q]
        .iter()
        .zip(&restrictions[&q])
        .filter(|(_, row)| row.iter().all(|(r, h)| value_at(*r, chosen).contains(h)))
        .map(|(g, _)| *g)
        .collect();
    if allowed.len() > SUBSET_GUARD {
        return Err(VSetError::Guard(format!(
            "{} candidates at one node (limit {SUBSET_GUARD})",
            allowed.len()
        )));
    }
    for mask in 0u64..1 << allowed.len() {
        let subset: Vec<VSet> = allowed
            .iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(_, g)| *g)
            .collect();
        chosen.push((q, subset));
        fill(order, i + 1, cand, restrictions, chosen, out)?;
        chosen.pop();
    }
    Ok(())
}

/// `V_β(q)` for all `β ≤ alpha`, with the default guards.
pub fn build_hierarchy(u: &mut Universe, alpha: usize) -> Result<HierarchyLevel, VSetError> {
    build_hierarchy_guarded(u, alpha, ALPHA_GUARD, SITE_GUARD)
}

/// [`build_hierarchy`] with explicit bounds on `α` and on the site size.
/// Cumulativity `V_β(q) ⊆ V_{β+1}(q)` and the rank bound are checked on
/// every level.
pub fn build_hierarchy_guarded(
    u: &mut Universe,
    alpha: usize,
    max_alpha: usize,
    max_nodes: usize,
) -> Result<HierarchyLevel, VSetError> {
    if alpha > max_alpha {
        return Err(VSetError::Guard(format!(
            "alpha {alpha} exceeds {max_alpha}"
        )));
    }
    let n = u.site().len();
    if n > max_nodes {
        return Err(VSetError::Guard(format!("{n} nodes exceed {max_nodes}")));
    }
    let mut levels: Vec<Vec<Vec<VSet>>> = vec![vec![Vec::new(); n]];
    for beta in 1..=alpha {
        let prev = levels[beta - 1].clone();
        let mut next = Vec::with_capacity(n);
        for q in 0..n {
            let level = enumerate_coherent(u, q, &|r| prev[r].clone())?;
            next.push(level);
        }
        for q in 0..n {
            let have: BTreeSet<VSet> = next[q].iter().copied().collect();
            if let Some(f) = prev[q].iter().find(|f| !have.contains(f)) {
                return Err(VSetError::Precondition(format!(
                    "cumulativity fails at {}: {} is in level {} but not {}",
                    u.site().name(q),
                    u.label(*f),
                    beta - 1,
                    beta
                )));
            }
            if let Some(f) = next[q].iter().find(|f| u.rank(**f) >= beta) {
                return Err(VSetError::Precondition(format!(
                    "{} has rank {} in level {beta}",
                    u.label(*f),
                    u.rank(*f)
                )));
            }
        }
        levels.push(next);
    }
    Ok(HierarchyLevel { alpha, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::site::Site;

    fn counts(site: Site, alpha: usize) -> Vec<usize> {
        let mut u = Universe::new(site).unwrap();
        build_hierarchy(&mut u, alpha).unwrap().counts()
    }

    #[test]
    fn small_counts() {
        assert_eq!(counts(fixtures::p2(), 0), vec![0, 0]);
        assert_eq!(counts(fixtures::p2(), 1), vec![1, 1]);
        assert_eq!(counts(fixtures::p2(), 2), vec![3, 2]);
        assert_eq!(counts(fixtures::p2(), 3), vec![15, 4]);
        assert_eq!(counts(fixtures::p1(), 2), vec![2]);
        assert_eq!(counts(fixtures::p1(), 3), vec![4]);
        assert_eq!(counts(fixtures::pv(), 2), vec![5, 2, 2]);
    }

    #[test]
    fn third_element_restricts_to_nonempty() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        let level = build_hierarchy(&mut u, 2).unwrap();
        let at_q: Vec<VSet> = level.at(1).to_vec();
        let nonempty = *at_q.iter().find(|f| !u.members(**f).is_empty()).unwrap();
        let third = level.at(0)[2];
        assert_eq!(u.restrict_vset(third, 1).unwrap(), nonempty);
        // the element outside the image of the classical sets: empty at p,
        // inhabited at q
        let odd: Vec<VSet> = level
            .at(0)
            .iter()
            .copied()
            .filter(|&f| u.members(f).is_empty() && u.rank(f) == 1)
            .collect();
        assert_eq!(odd.len(), 1);
        assert_eq!(u.restrict_vset(odd[0], 1).unwrap(), nonempty);
    }

    #[test]
    fn guards() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        assert!(matches!(
            build_hierarchy(&mut u, 4),
            Err(VSetError::Guard(_))
        ));
        let chain =
            Site::from_relation(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")])
                .unwrap();
        let mut u = Universe::new(chain).unwrap();
        assert!(matches!(
            build_hierarchy(&mut u, 1),
            Err(VSetError::Guard(_))
        ));
    }
}

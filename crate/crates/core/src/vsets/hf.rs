use std::collections::BTreeSet;
use std::fmt;

/// A hereditarily finite set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HfSet(BTreeSet<HfSet>);

impl HfSet {
    pub fn empty() -> Self {
        HfSet(BTreeSet::new())
    }

    pub fn from_members(members: impl IntoIterator<Item = HfSet>) -> Self {
        HfSet(members.into_iter().collect())
    }

    pub fn members(&self) -> impl Iterator<Item = &HfSet> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &HfSet) -> bool {
        self.0.contains(x)
    }

    pub fn rank(&self) -> usize {
        self.0.iter().map(|m| m.rank() + 1).max().unwrap_or(0)
    }

    /// The von Neumann ordinal `n = {0, ..., n-1}`.
    pub fn ordinal(n: usize) -> Self {
        let mut acc = Vec::with_capacity(n);
        for _ in 0..n {
            let next = HfSet::from_members(acc.iter().cloned());
            acc.push(next);
        }
        HfSet::from_members(acc)
    }

    /// `n` if this is a von Neumann ordinal.
    pub fn as_ordinal(&self) -> Option<usize> {
        (*self == HfSet::ordinal(self.len())).then_some(self.len())
    }

    pub fn singleton(x: HfSet) -> Self {
        HfSet::from_members([x])
    }

    pub fn pair(x: HfSet, y: HfSet) -> Self {
        HfSet::from_members([x, y])
    }

    /// Kuratowski pair `{{a}, {a, b}}`.
    pub fn ordered_pair(a: HfSet, b: HfSet) -> Self {
        HfSet::pair(HfSet::singleton(a.clone()), HfSet::pair(a, b))
    }

    /// `x ∪ {x}`.
    pub fn suc(&self) -> Self {
        let mut m = self.0.clone();
        m.insert(self.clone());
        HfSet(m)
    }

    pub fn union(&self) -> Self {
        HfSet(self.0.iter().flat_map(|m| m.0.iter().cloned()).collect())
    }

    pub fn power(&self) -> Self {
        let items: Vec<&HfSet> = self.0.iter().collect();
        let subsets = (0u64..1 << items.len()).map(|mask| {
            HfSet::from_members(
                items
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, m)| (*m).clone()),
            )
        });
        HfSet(subsets.collect())
    }

    pub fn product(&self, other: &HfSet) -> Self {
        HfSet(
            self.0
                .iter()
                .flat_map(|a| {
                    other
                        .0
                        .iter()
                        .map(move |b| HfSet::ordered_pair(a.clone(), b.clone()))
                })
                .collect(),
        )
    }

    /// Every hereditarily finite set of rank below `r`, in increasing
    /// order. There are 0, 1, 2, 4, 16, 65536 of them for `r = 0..=5`.
    pub fn all_below_rank(r: usize) -> Vec<HfSet> {
        let mut level: Vec<HfSet> = Vec::new();
        for _ in 0..r {
            level = HfSet::from_members(level).power().0.into_iter().collect();
        }
        level
    }
}

impl fmt::Display for HfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinals_and_ranks() {
        assert_eq!(HfSet::ordinal(0), HfSet::empty());
        assert_eq!(HfSet::ordinal(2).to_string(), "{{},{{}}}");
        assert_eq!(HfSet::ordinal(3).rank(), 3);
        assert_eq!(HfSet::ordinal(2).suc(), HfSet::ordinal(3));
        assert_eq!(HfSet::ordinal(3).as_ordinal(), Some(3));
        assert_eq!(HfSet::singleton(HfSet::ordinal(1)).as_ordinal(), None);
    }

    #[test]
    fn counts_below_rank() {
        let counts: Vec<usize> = (0..5).map(|r| HfSet::all_below_rank(r).len()).collect();
        assert_eq!(counts, vec![0, 1, 2, 4, 16]);
        assert!(HfSet::all_below_rank(3).iter().all(|a| a.rank() < 3));
    }

    #[test]
    fn operations() {
        let one = HfSet::ordinal(1);
        assert_eq!(HfSet::singleton(one.clone()).union(), one);
        assert_eq!(HfSet::empty().power(), one);
        assert_eq!(one.product(&one).len(), 1);
        assert_eq!(
            HfSet::ordered_pair(HfSet::empty(), HfSet::empty()),
            HfSet::singleton(one)
        );
    }
}

//! Finite preorders and their Alexandrov topology.
//!
//! A [`Site`] is a finite preorder. Its open sets are the up-closed subsets,
//! which form a complete Heyting algebra. Nodes are stored in declaration
//! order and every set of nodes is a bitmask against that order, so all
//! enumerations are deterministic.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Index of a node in its site's declaration order.
pub type NodeId = usize;

/// Largest number of nodes a site may have (sets are `u64` bitmasks).
pub const MAX_NODES: usize = 64;

/// Default bound for [`Site::enumerate_opens`].
pub const DEFAULT_OPEN_ENUMERATION_BOUND: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SiteError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node index {0} out of range")]
    NodeOutOfRange(NodeId),
    #[error("relation is not reflexive at `{0}`")]
    NotReflexive(String),
    #[error("relation is not transitive: `{0}` <= `{1}` <= `{2}`")]
    NotTransitive(String, String, String),
    #[error("site has {0} nodes, at most {MAX_NODES} are supported")]
    TooManyNodes(usize),
    #[error("refusing to enumerate opens of a {nodes}-node site (bound {bound})")]
    EnumerationBound { nodes: usize, bound: usize },
    #[error("set {0} is not open")]
    NotOpen(String),
    #[error("set {set} is not contained in ambient open {ambient}")]
    NotContained { set: String, ambient: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// A subset of a site's nodes, as a bitmask over declaration order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet(u64);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn from_bits(bits: u64) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(x: NodeId) -> Self {
        NodeSet(1 << x)
    }

    pub fn contains(self, x: NodeId) -> bool {
        x < MAX_NODES && self.0 & (1 << x) != 0
    }

    pub fn insert(&mut self, x: NodeId) {
        self.0 |= 1 << x;
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in increasing node order.
    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        let bits = self.0;
        (0..MAX_NODES).filter(move |i| bits & (1 << i) != 0)
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for x in iter {
            s.insert(x);
        }
        s
    }
}

/// An up-closed set of nodes. Only a [`Site`] hands these out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpenSet(NodeSet);

impl OpenSet {
    pub const EMPTY: OpenSet = OpenSet(NodeSet::EMPTY);

    /// Wraps a set the caller knows to be up-closed.
    pub(crate) fn from_nodes_unchecked(s: NodeSet) -> OpenSet {
        OpenSet(s)
    }

    pub fn nodes(self) -> NodeSet {
        self.0
    }

    pub fn contains(self, x: NodeId) -> bool {
        self.0.contains(x)
    }

    pub fn is_empty(self) -> bool {
        self.0.is_empty()
    }

    pub fn len(self) -> usize {
        self.0.len()
    }

    pub fn is_subset(self, other: OpenSet) -> bool {
        self.0.is_subset(other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        self.0.iter()
    }

    /// Opens are closed under finite intersection.
    pub fn meet(self, other: OpenSet) -> OpenSet {
        OpenSet(self.0.intersection(other.0))
    }

    /// Opens are closed under union.
    pub fn join(self, other: OpenSet) -> OpenSet {
        OpenSet(self.0.union(other.0))
    }
}

impl From<OpenSet> for NodeSet {
    fn from(u: OpenSet) -> NodeSet {
        u.0
    }
}

/// A finite preorder with its Alexandrov topology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Site {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    /// `up[x]` = { y : x <= y }.
    up: Vec<NodeSet>,
}

impl Site {
    /// Builds a site from node names and a generating relation; the
    /// reflexive-transitive closure is taken.
    pub fn from_relation<S: AsRef<str>>(nodes: &[S], pairs: &[(S, S)]) -> Result<Site, SiteError> {
        let (names, index) = Self::register(nodes)?;
        let n = names.len();
        let mut up: Vec<NodeSet> = (0..n).map(NodeSet::singleton).collect();
        for (a, b) in pairs {
            let a = *index
                .get(a.as_ref())
                .ok_or_else(|| SiteError::UnknownNode(a.as_ref().to_string()))?;
            let b = *index
                .get(b.as_ref())
                .ok_or_else(|| SiteError::UnknownNode(b.as_ref().to_string()))?;
            up[a].insert(b);
        }
        // Warshall closure on bit rows.
        for k in 0..n {
            for i in 0..n {
                if up[i].contains(k) {
                    up[i] = up[i].union(up[k]);
                }
            }
        }
        Ok(Site { names, index, up })
    }

    /// Builds a site from an explicit order predicate, which must already be
    /// reflexive and transitive.
    pub fn from_preorder<S: AsRef<str>>(
        nodes: &[S],
        leq: impl Fn(NodeId, NodeId) -> bool,
    ) -> Result<Site, SiteError> {
        let (names, index) = Self::register(nodes)?;
        let n = names.len();
        let up: Vec<NodeSet> = (0..n)
            .map(|x| (0..n).filter(|&y| leq(x, y)).collect())
            .collect();
        for x in 0..n {
            if !up[x].contains(x) {
                return Err(SiteError::NotReflexive(names[x].clone()));
            }
            for y in up[x].iter() {
                for z in up[y].iter() {
                    if !up[x].contains(z) {
                        return Err(SiteError::NotTransitive(
                            names[x].clone(),
                            names[y].clone(),
                            names[z].clone(),
                        ));
                    }
                }
            }
        }
        Ok(Site { names, index, up })
    }

    fn register<S: AsRef<str>>(
        nodes: &[S],
    ) -> Result<(Vec<String>, HashMap<String, NodeId>), SiteError> {
        if nodes.len() > MAX_NODES {
            return Err(SiteError::TooManyNodes(nodes.len()));
        }
        let mut names = Vec::with_capacity(nodes.len());
        let mut index = HashMap::new();
        for name in nodes {
            let name = name.as_ref().to_string();
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(SiteError::DuplicateNode(name));
            }
            names.push(name);
        }
        Ok((names, index))
    }

    /// Parses the line-oriented site format (`node <id>`, `le <id> <id>`, `#` comments).
    pub fn parse(text: &str) -> Result<Site, SiteError> {
        let mut nodes: Vec<String> = Vec::new();
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            let words: Vec<&str> = line.split_whitespace().collect();
            let syntax = |message: &str| SiteError::Syntax {
                line: lineno + 1,
                message: message.to_string(),
            };
            match words.as_slice() {
                [] => {}
                ["node", rest @ ..] if !rest.is_empty() => {
                    nodes.extend(rest.iter().map(|s| s.to_string()));
                }
                ["le", a, b] => pairs.push((a.to_string(), b.to_string())),
                ["node"] => return Err(syntax("`node` needs an identifier")),
                ["le", ..] => return Err(syntax("`le` takes exactly two identifiers")),
                [other, ..] => return Err(syntax(&format!("unknown declaration `{other}`"))),
            }
        }
        Site::from_relation(&nodes, &pairs)
    }

    /// Renders the site back into its text format (full relation, no covers).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(&format!("node {name}\n"));
        }
        for x in self.nodes() {
            for y in self.up[x].iter() {
                if x != y {
                    out.push_str(&format!("le {} {}\n", self.names[x], self.names[y]));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.names.len()
    }

    pub fn name(&self, x: NodeId) -> &str {
        &self.names[x]
    }

    pub fn node(&self, name: &str) -> Result<NodeId, SiteError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| SiteError::UnknownNode(name.to_string()))
    }

    pub fn node_set(&self, names: &[&str]) -> Result<NodeSet, SiteError> {
        names.iter().map(|n| self.node(n)).collect()
    }

    pub fn leq(&self, x: NodeId, y: NodeId) -> bool {
        self.up[x].contains(y)
    }

    /// Whether the order is antisymmetric.
    pub fn is_partial_order(&self) -> bool {
        self.nodes()
            .all(|x| self.up[x].iter().all(|y| y == x || !self.leq(y, x)))
    }

    pub fn all_nodes(&self) -> NodeSet {
        self.nodes().collect()
    }

    pub fn whole(&self) -> OpenSet {
        OpenSet(self.all_nodes())
    }

    /// The basic open `[x) = { y : y >= x }`, the least neighbourhood of `x`.
    pub fn up(&self, x: NodeId) -> OpenSet {
        OpenSet(self.up[x])
    }

    /// Strict successors of `x`.
    pub fn strictly_above(&self, x: NodeId) -> NodeSet {
        self.up[x].difference(NodeSet::singleton(x))
    }

    /// `x` is isolated in its own neighbourhood: `[x) = {x}`.
    pub fn is_maximal(&self, x: NodeId) -> bool {
        self.up[x] == NodeSet::singleton(x)
    }

    pub fn maximal_nodes(&self) -> Vec<NodeId> {
        self.nodes().filter(|&x| self.is_maximal(x)).collect()
    }

    pub fn is_up_closed(&self, s: NodeSet) -> bool {
        s.iter().all(|x| self.up[x].is_subset(s))
    }

    /// Accepts `s` as an open set if it is up-closed.
    pub fn open(&self, s: NodeSet) -> Result<OpenSet, SiteError> {
        if self.is_up_closed(s) && s.is_subset(self.all_nodes()) {
            Ok(OpenSet(s))
        } else {
            Err(SiteError::NotOpen(self.show(s)))
        }
    }

    pub fn open_of(&self, names: &[&str]) -> Result<OpenSet, SiteError> {
        self.open(self.node_set(names)?)
    }

    /// Smallest up-set containing `seed`.
    pub fn up_closure(&self, seed: NodeSet) -> OpenSet {
        OpenSet(
            seed.iter()
                .filter(|&x| x < self.len())
                .fold(NodeSet::EMPTY, |acc, x| acc.union(self.up[x])),
        )
    }

    pub fn up_closure_of(&self, names: &[&str]) -> Result<OpenSet, SiteError> {
        Ok(self.up_closure(self.node_set(names)?))
    }

    /// Largest up-set contained in `s`.
    pub fn interior(&self, s: NodeSet) -> OpenSet {
        OpenSet(self.nodes().filter(|&x| self.up[x].is_subset(s)).collect())
    }

    pub fn interior_of(&self, names: &[&str]) -> Result<OpenSet, SiteError> {
        Ok(self.interior(self.node_set(names)?))
    }

    /// Heyting operations relative to an ambient open set.
    pub fn heyting(&self, ambient: OpenSet) -> Heyting<'_> {
        Heyting {
            site: self,
            ambient,
        }
    }

    /// Every nonempty open subset of `w` meets `u`.
    ///
    /// On an Alexandrov space it suffices to test basic opens: for each
    /// `x` in `w`, `[x)` is inside `w` and must meet `u`.
    pub fn is_dense(&self, u: OpenSet, w: OpenSet) -> bool {
        w.iter()
            .all(|x| !self.up[x].intersection(u.nodes()).is_empty())
    }

    /// All open sets, sorted by bit encoding. Refuses sites with more than
    /// `bound` nodes.
    pub fn enumerate_opens(&self, bound: usize) -> Result<Vec<OpenSet>, SiteError> {
        if self.len() > bound {
            return Err(SiteError::EnumerationBound {
                nodes: self.len(),
                bound,
            });
        }
        Ok((0u64..(1u64 << self.len()))
            .map(NodeSet)
            .filter(|&s| self.is_up_closed(s))
            .map(OpenSet)
            .collect())
    }

    /// Open subsets of `u`, sorted by bit encoding.
    pub fn opens_within(&self, u: OpenSet) -> Result<Vec<OpenSet>, SiteError> {
        Ok(self
            .enumerate_opens(DEFAULT_OPEN_ENUMERATION_BOUND)?
            .into_iter()
            .filter(|w| w.is_subset(u))
            .collect())
    }

    /// Nodes of `s` ordered so that every node comes after all of its strict
    /// successors (maximal nodes first). Ties keep declaration order.
    pub fn top_down(&self, s: NodeSet) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = s.iter().collect();
        v.sort_by_key(|&x| (self.up[x].len(), x));
        v
    }

    /// `{a,b}` in declaration order.
    pub fn show(&self, s: impl Into<NodeSet>) -> String {
        let s: NodeSet = s.into();
        let names: Vec<&str> = s.iter().map(|x| self.names[x].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

impl FromStr for Site {
    type Err = SiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Site::parse(s)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Heyting algebra of the opens contained in a fixed ambient open.
#[derive(Clone, Copy, Debug)]
pub struct Heyting<'a> {
    site: &'a Site,
    ambient: OpenSet,
}

impl Heyting<'_> {
    fn check(&self, u: OpenSet) -> Result<(), SiteError> {
        if u.is_subset(self.ambient) {
            Ok(())
        } else {
            Err(SiteError::NotContained {
                set: self.site.show(u),
                ambient: self.site.show(self.ambient),
            })
        }
    }

    pub fn top(&self) -> OpenSet {
        self.ambient
    }

    pub fn meet(&self, u: OpenSet, v: OpenSet) -> Result<OpenSet, SiteError> {
        self.check(u)?;
        self.check(v)?;
        Ok(u.meet(v))
    }

    pub fn join(&self, u: OpenSet, v: OpenSet) -> Result<OpenSet, SiteError> {
        self.check(u)?;
        self.check(v)?;
        Ok(u.join(v))
    }

    /// Pseudo-complement: interior of `ambient \ u`.
    pub fn neg(&self, u: OpenSet) -> Result<OpenSet, SiteError> {
        self.check(u)?;
        Ok(self
            .site
            .interior(self.ambient.nodes().difference(u.nodes())))
    }

    /// Relative pseudo-complement: interior of `(ambient \ u) ∪ v`.
    pub fn implies(&self, u: OpenSet, v: OpenSet) -> Result<OpenSet, SiteError> {
        self.check(u)?;
        self.check(v)?;
        Ok(self
            .site
            .interior(self.ambient.nodes().difference(u.nodes()).union(v.nodes())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn up_closure_examples() {
        let p2 = fixtures::p2();
        assert_eq!(
            p2.up_closure_of(&["q"]).unwrap(),
            p2.open_of(&["q"]).unwrap()
        );
        assert_eq!(p2.up_closure_of(&["p"]).unwrap(), p2.whole());
        let pv = fixtures::pv();
        assert_eq!(pv.up_closure_of(&["a"]).unwrap(), pv.whole());
        assert_eq!(
            p2.up_closure_of(&["r"]),
            Err(SiteError::UnknownNode("r".into()))
        );
    }

    #[test]
    fn interior_examples() {
        let p2 = fixtures::p2();
        assert!(p2.interior_of(&["p"]).unwrap().is_empty());
        assert_eq!(p2.interior_of(&["q"]).unwrap(), p2.open_of(&["q"]).unwrap());
        assert_eq!(p2.interior_of(&["p", "q"]).unwrap(), p2.whole());
    }

    #[test]
    fn heyting_examples() {
        let p2 = fixtures::p2();
        let h = p2.heyting(p2.whole());
        let q = p2.open_of(&["q"]).unwrap();
        assert_eq!(h.neg(q).unwrap(), OpenSet::EMPTY);
        assert_eq!(h.neg(OpenSet::EMPTY).unwrap(), p2.whole());
        assert_eq!(h.implies(p2.whole(), q).unwrap(), q);
        let hq = p2.heyting(q);
        assert!(matches!(
            hq.neg(p2.whole()),
            Err(SiteError::NotContained { .. })
        ));
    }

    #[test]
    fn density_examples() {
        let p2 = fixtures::p2();
        assert!(p2.is_dense(p2.open_of(&["q"]).unwrap(), p2.whole()));
        assert!(p2.is_dense(OpenSet::EMPTY, OpenSet::EMPTY));
        let pv = fixtures::pv();
        assert!(!pv.is_dense(pv.open_of(&["b"]).unwrap(), pv.whole()));
        assert!(pv.is_dense(pv.open_of(&["b", "c"]).unwrap(), pv.whole()));
    }

    #[test]
    fn open_enumeration_counts() {
        assert_eq!(fixtures::p1().enumerate_opens(12).unwrap().len(), 2);
        let p2 = fixtures::p2();
        let opens = p2.enumerate_opens(12).unwrap();
        let shown: Vec<String> = opens.iter().map(|&u| p2.show(u)).collect();
        assert_eq!(shown, vec!["{}", "{q}", "{p,q}"]);
        assert_eq!(fixtures::pv().enumerate_opens(12).unwrap().len(), 5);
        assert!(matches!(
            fixtures::pv().enumerate_opens(2),
            Err(SiteError::EnumerationBound { .. })
        ));
    }

    #[test]
    fn parse_format() {
        let site = Site::parse("# chain\nnode p q r\nle p q # cover\nle q r\n").unwrap();
        assert!(site.leq(0, 2));
        assert!(!site.leq(2, 0));
        assert_eq!(Site::parse(&site.to_text()).unwrap(), site);
        assert!(matches!(
            Site::parse("node a\nle a b"),
            Err(SiteError::UnknownNode(_))
        ));
        assert!(matches!(
            Site::parse("edge a b"),
            Err(SiteError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            Site::parse("node a a"),
            Err(SiteError::DuplicateNode(_))
        ));
        let uni = Site::parse("node α β\nle α β").unwrap();
        assert!(uni.leq(uni.node("α").unwrap(), uni.node("β").unwrap()));
    }

    #[test]
    fn preorder_checks() {
        assert!(matches!(
            Site::from_preorder(&["a", "b"], |x, y| x < y),
            Err(SiteError::NotReflexive(_))
        ));
        let leq = |x: usize, y: usize| x == y || (x, y) == (0, 1) || (x, y) == (1, 2);
        assert!(matches!(
            Site::from_preorder(&["a", "b", "c"], leq),
            Err(SiteError::NotTransitive(..))
        ));
        let cyc = Site::from_relation(&["a", "b"], &[("a", "b"), ("b", "a")]).unwrap();
        assert!(!cyc.is_partial_order());
        assert_eq!(cyc.enumerate_opens(12).unwrap().len(), 2);
    }
}

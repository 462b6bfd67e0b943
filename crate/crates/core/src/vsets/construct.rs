//! Set-theoretic constructions on variable sets.

use super::{enumerate_coherent, HfSet, Universe, VSet, VSetError, VSheaf};
use crate::logic::Formula;
use crate::site::NodeId;

impl Universe {
    fn up_nodes(&self, p: NodeId) -> Vec<NodeId> {
        self.site().up(p).iter().collect()
    }

    /// The embedding of a classical set: `â(p)(q) = { b̂(q) : b ∈ a }`.
    pub fn hat_embed(&mut self, a: &HfSet, p: NodeId) -> Result<VSet, VSetError> {
        let mut graph = Vec::new();
        for q in self.up_nodes(p) {
            let mut m = Vec::with_capacity(a.len());
            for b in a.members() {
                m.push(self.hat_embed(b, q)?);
            }
            graph.push((q, m));
        }
        self.make(p, graph)
    }

    /// Inverse of [`Universe::hat_embed`] at a maximal node `m`, where a
    /// variable set is just a set of variable sets.
    pub fn collapse_iso(&self, m: NodeId, f: VSet) -> Result<HfSet, VSetError> {
        if !self.site().is_maximal(m) {
            return Err(VSetError::NotMaximal(self.site().name(m).to_string()));
        }
        if self.base(f) != m {
            return Err(VSetError::BaseMismatch(
                self.site().name(self.base(f)).to_string(),
                self.site().name(m).to_string(),
            ));
        }
        self.members(f)
            .iter()
            .map(|&g| self.collapse_iso(m, g))
            .collect::<Result<Vec<_>, _>>()
            .map(HfSet::from_members)
    }

    /// `Suc(f)(q) = { f↾[q) } ∪ f(q)`.
    pub fn suc(&mut self, f: VSet) -> Result<VSet, VSetError> {
        let p = self.base(f);
        let mut graph = Vec::new();
        for q in self.up_nodes(p) {
            let mut m = self.graph(f, q).expect("q above base").to_vec();
            m.push(self.restrict_vset(f, q)?);
            graph.push((q, m));
        }
        self.make(p, graph)
    }

    /// `z(q) = { x↾[q), y↾[q) }`.
    pub fn pair_set(&mut self, x: VSet, y: VSet) -> Result<VSet, VSetError> {
        let p = self.check_same_base(x, y)?;
        let mut graph = Vec::new();
        for q in self.up_nodes(p) {
            let m = vec![self.restrict_vset(x, q)?, self.restrict_vset(y, q)?];
            graph.push((q, m));
        }
        self.make(p, graph)
    }

    pub fn singleton(&mut self, x: VSet) -> Result<VSet, VSetError> {
        self.pair_set(x, x)
    }

    /// `{ {f}, {f, g} }`.
    pub fn ordered_pair(&mut self, f: VSet, g: VSet) -> Result<VSet, VSetError> {
        let a = self.singleton(f)?;
        let b = self.pair_set(f, g)?;
        self.pair_set(a, b)
    }

    /// `(f × g)(q) = { (a, b) : a ∈ f(q) and b ∈ g(q) }`.
    pub fn product(&mut self, f: VSet, g: VSet) -> Result<VSet, VSetError> {
        let p = self.check_same_base(f, g)?;
        let mut graph = Vec::new();
        for q in self.up_nodes(p) {
            let fa = self.graph(f, q).expect("q above base").to_vec();
            let gb = self.graph(g, q).expect("q above base").to_vec();
            let mut m = Vec::with_capacity(fa.len() * gb.len());
            for &a in &fa {
                for &b in &gb {
                    m.push(self.ordered_pair(a, b)?);
                }
            }
            graph.push((q, m));
        }
        self.make(p, graph)
    }

    /// `A(q) = ⋃ { Y(q) : Y ∈ F(q) }`.
    pub fn union_set(&mut self, family: VSet) -> Result<VSet, VSetError> {
        let p = self.base(family);
        let mut graph = Vec::new();
        for q in self.up_nodes(p) {
            let m: Vec<VSet> = self
                .graph(family, q)
                .expect("q above base")
                .iter()
                .flat_map(|&y| self.members(y).to_vec())
                .collect();
            graph.push((q, m));
        }
        self.make(p, graph)
    }

    /// `g(q)` = every coherent `h` over `[q)` with `h(r) ⊆ f(r)`.
    pub fn power_object(&mut self, f: VSet) -> Result<VSet, VSetError> {
        let p = self.base(f);
        let values: Vec<(NodeId, Vec<VSet>)> = self
            .nodes_and_values(f)
            .map(|(q, m)| (q, m.to_vec()))
            .collect();
        let lookup = |r: NodeId| {
            values
                .iter()
                .find(|(n, _)| *n == r)
                .map(|(_, m)| m.clone())
                .unwrap_or_default()
        };
        let mut graph = Vec::new();
        for q in self.up_nodes(p) {
            graph.push((q, enumerate_coherent(self, q, &lookup)?));
        }
        self.make(p, graph)
    }

    /// `y(q) = { x ∈ z(q) : q ⊩ φ(x) }`, with `φ` evaluated in `sheaf`.
    /// `params` binds the other free variables of `φ`; each is restricted
    /// to the node of evaluation.
    pub fn comprehension_set(
        &mut self,
        sheaf: &VSheaf,
        z: VSet,
        var: &str,
        phi: &Formula,
        params: &[(&str, VSet)],
    ) -> Result<VSet, VSetError> {
        let p = self.base(z);
        let mut graph = Vec::new();
        for q in self.up_nodes(p) {
            let mut m = Vec::new();
            for &x in self.graph(z, q).expect("q above base") {
                let mut binds = params.to_vec();
                binds.push((var, x));
                if sheaf.forces(self, q, phi, &binds)? {
                    m.push(x);
                }
            }
            graph.push((q, m));
        }
        self.make(p, graph)
    }

    /// `Y(q)` = the carrier elements `y` at `q` such that `q ⊩ φ(x, y)` for
    /// some `x ∈ A(q)`.
    pub fn replacement_set(
        &mut self,
        sheaf: &VSheaf,
        a: VSet,
        x_var: &str,
        y_var: &str,
        phi: &Formula,
    ) -> Result<VSet, VSetError> {
        let p = self.base(a);
        let mut graph = Vec::new();
        for q in self.up_nodes(p) {
            let mut m = Vec::new();
            for &y in sheaf.carrier(q) {
                for &x in self.graph(a, q).expect("q above base") {
                    if sheaf.forces(self, q, phi, &[(x_var, x), (y_var, y)])? {
                        m.push(y);
                        break;
                    }
                }
            }
            graph.push((q, m));
        }
        self.make(p, graph)
    }
}

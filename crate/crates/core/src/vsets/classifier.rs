//! The truth-value object, characteristic functions and the finite
//! Cantor argument, with `ℕ` replaced by a finite ordinal `k`.

use std::collections::{BTreeSet, HashMap};

use super::{HfSet, Universe, VSet, VSetError, VSheaf};
use crate::logic::parse_formula;
use crate::site::{NodeId, NodeSet};

/// Largest `k` accepted by [`chi_check`] and [`no_surjection_check`].
pub const CHI_K_GUARD: usize = 2;
/// Largest site accepted by [`chi_check`] and [`no_surjection_check`].
pub const CHI_SITE_GUARD: usize = 2;

const FUNCTION: &str = "(forall x. A(x) -> exists y. B(y) & F(x, y)) \
    & (forall x. forall y. forall z. A(x) & B(y) & B(z) & F(x, y) & F(x, z) -> y = z) \
    & (forall x. forall y. F(x, y) -> A(x) & B(y))";
const ONTO: &str = "forall y. B(y) -> exists x. A(x) & F(x, y)";

/// An up-set as a classical set: the von Neumann ordinals of its node
/// indices.
pub fn upset_code(k: NodeSet) -> HfSet {
    HfSet::from_members(k.iter().map(HfSet::ordinal))
}

/// `Ω̂` at `p`: the embedding of the set of up-sets of `[p)`.
pub fn omega_classifier(u: &mut Universe, p: NodeId) -> Result<VSet, VSetError> {
    let site = u.site().clone();
    let upsets = site.opens_within(site.up(p))?;
    let codes = HfSet::from_members(upsets.into_iter().map(|k| upset_code(k.nodes())));
    u.hat_embed(&codes, p)
}

fn check_guards(u: &Universe, k: usize) -> Result<(), VSetError> {
    if k > CHI_K_GUARD {
        return Err(VSetError::Guard(format!("k = {k} exceeds {CHI_K_GUARD}")));
    }
    if u.site().len() > CHI_SITE_GUARD {
        return Err(VSetError::Guard(format!(
            "{} nodes exceed {CHI_SITE_GUARD}",
            u.site().len()
        )));
    }
    Ok(())
}

/// `χ_H(q) = { (n̂(q), K̂_n(q)) : n < k }` where
/// `K_n = { r ≥ p : r ⊩ n̂ ∈ H }`. `H` must be a member of the power
/// object of `k̂` at its base `p`.
pub fn chi_char(u: &mut Universe, h: VSet, k: usize) -> Result<VSet, VSetError> {
    let p = u.base(h);
    let up: Vec<NodeId> = u.site().up(p).iter().collect();
    let khat = u.hat_embed(&HfSet::ordinal(k), p)?;
    for &r in &up {
        let allowed = u.graph(khat, r).expect("r above p").to_vec();
        if u.graph(h, r)
            .expect("r above p")
            .iter()
            .any(|g| !allowed.contains(g))
        {
            return Err(VSetError::Precondition(format!(
                "{} is not a subobject of {k}",
                u.label(h)
            )));
        }
    }
    let mut ks = Vec::with_capacity(k);
    for n in 0..k {
        let mut set = NodeSet::EMPTY;
        for &r in &up {
            let nr = u.hat_embed(&HfSet::ordinal(n), r)?;
            if u.membership(nr, h, r)? {
                set.insert(r);
            }
        }
        ks.push(upset_code(set));
    }
    let mut graph = Vec::new();
    for &q in &up {
        let mut m = Vec::with_capacity(k);
        for (n, code) in ks.iter().enumerate() {
            let nq = u.hat_embed(&HfSet::ordinal(n), q)?;
            let kq = u.hat_embed(code, q)?;
            m.push(u.ordered_pair(nq, kq)?);
        }
        graph.push((q, m));
    }
    u.make(p, graph)
}

fn common_base(u: &Universe, sets: &[VSet]) -> Result<NodeId, VSetError> {
    for w in sets.windows(2) {
        u.check_same_base(w[0], w[1])?;
    }
    Ok(u.base(sets[0]))
}

/// The pairs of `f(q)` indexed by first component, or `None` if some member
/// of `f(q)` is not a pair from `A(q) × B(q)`.
fn pairs_at(
    u: &mut Universe,
    f: VSet,
    a: VSet,
    b: VSet,
    q: NodeId,
) -> Result<Option<HashMap<VSet, Vec<VSet>>>, VSetError> {
    let members: BTreeSet<VSet> = u
        .graph(f, q)
        .expect("q above base")
        .iter()
        .copied()
        .collect();
    let xs = u.graph(a, q).expect("q above base").to_vec();
    let ys = u.graph(b, q).expect("q above base").to_vec();
    let mut seen = 0;
    let mut out: HashMap<VSet, Vec<VSet>> = xs.iter().map(|&x| (x, Vec::new())).collect();
    for &x in &xs {
        for &y in &ys {
            let xy = u.ordered_pair(x, y)?;
            if members.contains(&xy) {
                seen += 1;
                out.get_mut(&x).expect("x in A").push(y);
            }
        }
    }
    Ok((seen == members.len()).then_some(out))
}

/// The fiberwise test: at every `q ≥ p`, `f(q)` is the graph of a function
/// from `A(q)` to `B(q)`.
pub fn function_criterion(u: &mut Universe, f: VSet, a: VSet, b: VSet) -> Result<bool, VSetError> {
    let p = common_base(u, &[f, a, b])?;
    for q in u.site().up(p).iter() {
        match pairs_at(u, f, a, b, q)? {
            Some(m) if m.values().all(|ys| ys.len() == 1) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// At every `q ≥ p`, every member of `B(q)` is a value of `f(q)`.
pub fn is_onto(u: &mut Universe, f: VSet, a: VSet, b: VSet) -> Result<bool, VSetError> {
    let p = common_base(u, &[f, a, b])?;
    for q in u.site().up(p).iter() {
        let Some(m) = pairs_at(u, f, a, b, q)? else {
            return Ok(false);
        };
        let hit: BTreeSet<VSet> = m.values().flatten().copied().collect();
        if u.graph(b, q)
            .expect("q above base")
            .iter()
            .any(|y| !hit.contains(y))
        {
            return Ok(false);
        }
    }
    Ok(true)
}

fn function_sheaf(
    u: &mut Universe,
    f: VSet,
    a: VSet,
    b: VSet,
) -> Result<(VSheaf, NodeId), VSetError> {
    let p = common_base(u, &[f, a, b])?;
    let site = u.site().clone();
    let carrier: Vec<Vec<VSet>> = site
        .nodes()
        .map(|q| {
            if site.leq(p, q) {
                let mut c = u.graph(a, q).expect("q above base").to_vec();
                c.extend_from_slice(u.graph(b, q).expect("q above base"));
                c
            } else {
                Vec::new()
            }
        })
        .collect();
    let sheaf = VSheaf::build(u, carrier, &[("A", a), ("B", b)], &[("F", f)])?;
    Ok((sheaf, p))
}

fn forced(u: &mut Universe, f: VSet, a: VSet, b: VSet, text: &str) -> Result<bool, VSetError> {
    let (sheaf, p) = function_sheaf(u, f, a, b)?;
    let phi = parse_formula(text, &sheaf.sheaf().signature())
        .map_err(|e| VSetError::Precondition(e.to_string()))?;
    sheaf.forces(u, p, &phi, &[])
}

/// `p ⊩ "f is a function from A to B"`, evaluated by forcing over the
/// sheaf whose fibers are `A(q) ∪ B(q)`.
pub fn function_forced(u: &mut Universe, f: VSet, a: VSet, b: VSet) -> Result<bool, VSetError> {
    forced(u, f, a, b, FUNCTION)
}

/// `p ⊩ ∀y (y ∈ B → ∃x (x ∈ A ∧ (x, y) ∈ f))`, by forcing.
pub fn onto_forced(u: &mut Universe, f: VSet, a: VSet, b: VSet) -> Result<bool, VSetError> {
    forced(u, f, a, b, ONTO)
}

/// Every variable set over the common base of `a` and `b` that passes
/// [`function_criterion`], built by choosing a value for each argument at
/// each node, top nodes first, consistently with restriction.
pub fn forced_functions(u: &mut Universe, a: VSet, b: VSet) -> Result<Vec<VSet>, VSetError> {
    let p = common_base(u, &[a, b])?;
    let site = u.site().clone();
    let order = site.top_down(site.up(p).nodes());
    let mut doms = HashMap::new();
    let mut cods = HashMap::new();
    let mut restr: HashMap<(VSet, NodeId), VSet> = HashMap::new();
    for &q in &order {
        let xs = u.graph(a, q).expect("q above base").to_vec();
        let ys = u.graph(b, q).expect("q above base").to_vec();
        for r in site.strictly_above(q).iter() {
            for &v in xs.iter().chain(&ys) {
                let w = u.restrict_vset(v, r)?;
                restr.insert((v, r), w);
            }
        }
        doms.insert(q, xs);
        cods.insert(q, ys);
    }
    let mut out = Vec::new();
    let mut chosen: HashMap<NodeId, HashMap<VSet, VSet>> = HashMap::new();
    let ctx = Ctx {
        order: &order,
        doms: &doms,
        cods: &cods,
        restr: &restr,
        above: &|q| site.strictly_above(q).iter().collect(),
    };
    choose(&ctx, 0, 0, &mut chosen, &mut out);
    let mut result = Vec::with_capacity(out.len());
    for assignment in out {
        let mut graph = Vec::new();
        for &q in &order {
            let mut m = Vec::new();
            for (&x, &y) in &assignment[&q] {
                m.push(u.ordered_pair(x, y)?);
            }
            graph.push((q, m));
        }
        result.push(u.make(p, graph)?);
    }
    Ok(result)
}

struct Ctx<'a> {
    order: &'a [NodeId],
    doms: &'a HashMap<NodeId, Vec<VSet>>,
    cods: &'a HashMap<NodeId, Vec<VSet>>,
    restr: &'a HashMap<(VSet, NodeId), VSet>,
    above: &'a dyn Fn(NodeId) -> Vec<NodeId>,
}

fn choose(
    ctx: &Ctx,
    i: usize,
    j: usize,
    chosen: &mut HashMap<NodeId, HashMap<VSet, VSet>>,
    out: &mut Vec<HashMap<NodeId, HashMap<VSet, VSet>>>,
) {
    let Some(&q) = ctx.order.get(i) else {
        out.push(chosen.clone());
        return;
    };
    chosen.entry(q).or_default();
    let xs = &ctx.doms[&q];
    let Some(&x) = xs.get(j) else {
        return choose(ctx, i + 1, 0, chosen, out);
    };
    for &y in &ctx.cods[&q] {
        let ok = (ctx.above)(q)
            .into_iter()
            .all(|r| chosen[&r].get(&ctx.restr[&(x, r)]) == Some(&ctx.restr[&(y, r)]));
        if ok {
            chosen.entry(q).or_default().insert(x, y);
            choose(ctx, i, j + 1, chosen, out);
            chosen.get_mut(&q).expect("just inserted").remove(&x);
        }
    }
}

/// Outcome of [`chi_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiReport {
    pub k: usize,
    /// Members of the power object of `k̂` at the node.
    pub subobjects: usize,
    /// Functions from `k̂` to `Ω̂` at the node.
    pub characteristic: usize,
    /// Every `χ_H` passes the fiberwise function test and is forced to be
    /// a function.
    pub functions: bool,
    /// Distinct subobjects get distinct `χ`, and forced-distinct ones get
    /// forced-distinct `χ`.
    pub injective: bool,
    /// Every function `X` is `χ` of its preimage subobject.
    pub surjective: bool,
}

impl ChiReport {
    pub fn holds(&self) -> bool {
        self.functions
            && self.injective
            && self.surjective
            && self.subobjects == self.characteristic
    }
}

/// Checks that `H ↦ χ_H` is a bijection between the power object of `k̂`
/// and the functions `k̂ → Ω̂` at `p`.
pub fn chi_check(u: &mut Universe, p: NodeId, k: usize) -> Result<ChiReport, VSetError> {
    check_guards(u, k)?;
    let khat = u.hat_embed(&HfSet::ordinal(k), p)?;
    let power = u.power_object(khat)?;
    let subs = u.members(power).to_vec();
    let omega = omega_classifier(u, p)?;
    let targets = forced_functions(u, khat, omega)?;

    let mut chis = Vec::with_capacity(subs.len());
    let mut functions = true;
    for &h in &subs {
        let c = chi_char(u, h, k)?;
        functions &= function_criterion(u, c, khat, omega)? && function_forced(u, c, khat, omega)?;
        chis.push(c);
    }

    let mut injective = true;
    for i in 0..subs.len() {
        for j in i + 1..subs.len() {
            injective &= chis[i] != chis[j];
            if u.forced_distinct(subs[i], subs[j], p) {
                injective &= u.forced_distinct(chis[i], chis[j], p);
            }
        }
    }

    let mut surjective = true;
    let site = u.site().clone();
    for &x in &targets {
        let mut graph = Vec::new();
        for q in site.up(p).iter() {
            let here = HfSet::ordinal(q);
            let q_hat = u.hat_embed(&here, q)?;
            let mut m = Vec::new();
            for n in 0..k {
                let nq = u.hat_embed(&HfSet::ordinal(n), q)?;
                let values = u.graph(omega, q).expect("q above p").to_vec();
                for y in values {
                    let pair = u.ordered_pair(nq, y)?;
                    if u.membership(pair, x, q)? && u.membership(q_hat, y, q)? {
                        m.push(nq);
                    }
                }
            }
            graph.push((q, m));
        }
        match u.make(p, graph) {
            Ok(s) => surjective &= subs.contains(&s) && chi_char(u, s, k)? == x,
            Err(VSetError::Incoherent { .. }) => surjective = false,
            Err(e) => return Err(e),
        }
    }

    Ok(ChiReport {
        k,
        subobjects: subs.len(),
        characteristic: targets.len(),
        functions,
        injective,
        surjective,
    })
}

/// Outcome of [`no_surjection_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoSurjectionReport {
    pub k: usize,
    /// Functions from `k̂` to the power object of `k̂` at the node.
    pub functions: usize,
    /// How many of them are onto, nodewise.
    pub onto: usize,
    /// How many are forced onto by the evaluator.
    pub forced_onto: usize,
}

impl NoSurjectionReport {
    pub fn holds(&self) -> bool {
        self.onto == 0 && self.forced_onto == 0
    }
}

/// Enumerates every function from `k̂` to the power object of `k̂` at `p`
/// and counts the surjective ones.
pub fn no_surjection_check(
    u: &mut Universe,
    p: NodeId,
    k: usize,
) -> Result<NoSurjectionReport, VSetError> {
    check_guards(u, k)?;
    let khat = u.hat_embed(&HfSet::ordinal(k), p)?;
    let power = u.power_object(khat)?;
    let fs = forced_functions(u, khat, power)?;
    let mut onto = 0;
    let mut forced_onto = 0;
    for &f in &fs {
        onto += usize::from(is_onto(u, f, khat, power)?);
        forced_onto += usize::from(onto_forced(u, f, khat, power)?);
    }
    Ok(NoSurjectionReport {
        k,
        functions: fs.len(),
        onto,
        forced_onto,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::vsets::build_hierarchy;

    #[test]
    fn omega_counts() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        let op = omega_classifier(&mut u, 0).unwrap();
        let oq = omega_classifier(&mut u, 1).unwrap();
        assert_eq!(u.members(op).len(), 3);
        assert_eq!(u.members(oq).len(), 2);
        let mut u = Universe::new(fixtures::p1()).unwrap();
        let om = omega_classifier(&mut u, 0).unwrap();
        assert_eq!(u.members(om).len(), 2);
    }

    #[test]
    fn chi_of_empty_is_empty_upset() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        let e = u.hat_embed(&HfSet::empty(), 0).unwrap();
        let c = chi_char(&mut u, e, 1).unwrap();
        let zero = u.hat_embed(&HfSet::empty(), 0).unwrap();
        let none = u.hat_embed(&upset_code(NodeSet::EMPTY), 0).unwrap();
        let pair = u.ordered_pair(zero, none).unwrap();
        assert_eq!(u.members(c), &[pair]);
    }

    #[test]
    fn chi_bijections() {
        for (site, p, k, size) in [
            (fixtures::p1(), 0, 0, 1),
            (fixtures::p1(), 0, 1, 2),
            (fixtures::p1(), 0, 2, 4),
            (fixtures::p2(), 0, 1, 3),
            (fixtures::p2(), 1, 1, 2),
        ] {
            let mut u = Universe::new(site).unwrap();
            let r = chi_check(&mut u, p, k).unwrap();
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.subobjects, size);
        }
    }

    #[test]
    fn no_surjections() {
        for (site, k, count) in [
            (fixtures::p1(), 0, 1),
            (fixtures::p1(), 1, 2),
            (fixtures::p2(), 1, 3),
        ] {
            let mut u = Universe::new(site).unwrap();
            let r = no_surjection_check(&mut u, 0, k).unwrap();
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.functions, count);
        }
    }

    #[test]
    fn guards() {
        let mut u = Universe::new(fixtures::pv()).unwrap();
        assert!(matches!(chi_check(&mut u, 0, 1), Err(VSetError::Guard(_))));
        let mut u = Universe::new(fixtures::p1()).unwrap();
        assert!(matches!(
            no_surjection_check(&mut u, 0, 3),
            Err(VSetError::Guard(_))
        ));
    }

    #[test]
    fn criterion_matches_forcing_on_subobjects_of_products() {
        let mut u = Universe::new(fixtures::p2()).unwrap();
        let level = build_hierarchy(&mut u, 2).unwrap();
        let v: Vec<VSet> = level.at(0).to_vec();
        for &a in &v {
            for &b in &v {
                let prod = u.product(a, b).unwrap();
                let power = u.power_object(prod).unwrap();
                for f in u.members(power).to_vec() {
                    assert_eq!(
                        function_criterion(&mut u, f, a, b).unwrap(),
                        function_forced(&mut u, f, a, b).unwrap()
                    );
                }
            }
        }
    }
}

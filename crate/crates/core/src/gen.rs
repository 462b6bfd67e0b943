//! Seeded generators for property checks: small partial orders, sheaves
//! over them, formulas, intuitionistic schemes and finite conditions.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::forcing::Environment;
use crate::logic::{Formula, Signature, Term};
use crate::sheaf::{SheafBuilder, SheafOfStructures};
use crate::site::{NodeId, Site};
use crate::vsets::Condition;

/// The generator used everywhere a seed is accepted.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random partial order on `1..=max_nodes` nodes named `n0, n1, ...`.
/// Each pair `i < j` is related with probability 0.4 before closure.
pub fn random_site(rng: &mut impl Rng, max_nodes: usize) -> Site {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                pairs.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    Site::from_relation(&names, &pairs).expect("acyclic by construction")
}

/// Knobs for [`random_sheaf`].
#[derive(Clone, Copy, Debug)]
pub struct SheafShape {
    pub max_fiber: usize,
    /// Probability of trying to add the unary function `f`.
    pub function: f64,
    /// Probability of trying to add the constant `c`.
    pub constant: f64,
}

impl Default for SheafShape {
    fn default() -> Self {
        SheafShape {
            max_fiber: 3,
            function: 0.3,
            constant: 0.3,
        }
    }
}

/// A random sheaf over `site` with relations `R/1` and `S/2`, and sometimes
/// a function `f/1` and a constant `c`.
///
/// Nodes are filled maximal first. An element at `x` is a germ: it picks a
/// compatible family over the nodes strictly above `x`, which fixes its
/// images under every transition map. Relations only hold at `x` where
/// they hold of all images, so they stay open.
pub fn random_sheaf(rng: &mut impl Rng, site: &Site, shape: SheafShape) -> SheafOfStructures {
    let n = site.len();
    let order = site.top_down(site.all_nodes());
    // images[x][a][y] for y ≥ x
    let mut images: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    for &x in &order {
        let above: Vec<NodeId> = site.top_down(site.strictly_above(x));
        let families = families(site, &images, &above);
        if !above.is_empty() && families.is_empty() {
            continue;
        }
        let size = rng.gen_range(0..=shape.max_fiber);
        let size = if size == 0 && rng.gen_bool(0.7) {
            1
        } else {
            size
        };
        for a in 0..size {
            let mut img = vec![usize::MAX; n];
            img[x] = a;
            if let Some(fam) = families.choose(rng) {
                for (y, v) in above.iter().zip(fam) {
                    img[*y] = *v;
                }
            }
            images[x].push(img);
        }
    }

    let fiber_len = |x: NodeId| images[x].len();
    let mut r: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut s: Vec<Vec<Vec<bool>>> = vec![Vec::new(); n];
    for &x in &order {
        let above: Vec<NodeId> = site.strictly_above(x).iter().collect();
        r[x] = (0..fiber_len(x))
            .map(|a| above.iter().all(|&y| r[y][images[x][a][y]]) && rng.gen_bool(0.5))
            .collect();
        s[x] = (0..fiber_len(x))
            .map(|a| {
                (0..fiber_len(x))
                    .map(|b| {
                        above
                            .iter()
                            .all(|&y| s[y][images[x][a][y]][images[x][b][y]])
                            && rng.gen_bool(0.4)
                    })
                    .collect()
            })
            .collect();
    }

    let f = if rng.gen_bool(shape.function) {
        random_function(rng, site, &order, &images)
    } else {
        None
    };
    let c = if rng.gen_bool(shape.constant) {
        families(site, &images, &order).choose(rng).map(|fam| {
            let mut v = vec![0; n];
            for (x, a) in order.iter().zip(fam) {
                v[*x] = *a;
            }
            v
        })
    } else {
        None
    };

    let name = |a: usize| a.to_string();
    let mut b = SheafBuilder::new(site.clone())
        .relation("R", 1)
        .relation("S", 2);
    for x in 0..n {
        let elems: Vec<String> = (0..fiber_len(x)).map(name).collect();
        b = b.fiber(site.name(x), &elems);
    }
    for x in 0..n {
        for y in site.strictly_above(x).iter() {
            let pairs: Vec<(String, String)> = (0..fiber_len(x))
                .map(|a| (name(a), name(images[x][a][y])))
                .collect();
            let pairs: Vec<(&str, &str)> = pairs
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect();
            b = b.map(site.name(x), site.name(y), &pairs);
        }
        for a in 0..fiber_len(x) {
            if r[x][a] {
                b = b.holds("R", site.name(x), &[&name(a)]);
            }
            for c2 in 0..fiber_len(x) {
                if s[x][a][c2] {
                    b = b.holds("S", site.name(x), &[&name(a), &name(c2)]);
                }
            }
        }
    }
    if let Some(f) = &f {
        b = b.function("f", 1);
        for x in 0..n {
            for a in 0..fiber_len(x) {
                b = b.value("f", site.name(x), &[&name(a)], &name(f[x][a]));
            }
        }
    }
    if let Some(c) = &c {
        for x in 0..n {
            b = b.constant("c", site.name(x), &name(c[x]));
        }
    }
    b.build().expect("generated sheaves are valid")
}

/// Compatible choices of one element at each node of `nodes` (given
/// maximal first): `v[i]` at `nodes[i]` must map to `v[j]` whenever
/// `nodes[i] ≤ nodes[j]`.
fn families(site: &Site, images: &[Vec<Vec<usize>>], nodes: &[NodeId]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(nodes.len());
    fn go(
        site: &Site,
        images: &[Vec<Vec<usize>>],
        nodes: &[NodeId],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = cur.len();
        if i == nodes.len() {
            out.push(cur.clone());
            return;
        }
        let x = nodes[i];
        for a in 0..images[x].len() {
            let ok = (0..i).all(|j| !site.leq(x, nodes[j]) || images[x][a][nodes[j]] == cur[j]);
            if ok {
                cur.push(a);
                go(site, images, nodes, cur, out);
                cur.pop();
            }
        }
    }
    go(site, images, nodes, &mut cur, &mut out);
    out
}

/// A natural unary operation, or `None` when the random choices at some
/// node leave no value commuting with the maps.
fn random_function(
    rng: &mut impl Rng,
    site: &Site,
    order: &[NodeId],
    images: &[Vec<Vec<usize>>],
) -> Option<Vec<Vec<usize>>> {
    let n = site.len();
    let mut f: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &x in order {
        let above: Vec<NodeId> = site.strictly_above(x).iter().collect();
        for a in 0..images[x].len() {
            let options: Vec<usize> = (0..images[x].len())
                .filter(|&b| {
                    above
                        .iter()
                        .all(|&y| images[x][b][y] == f[y][images[x][a][y]])
                })
                .collect();
            f[x].push(*options.choose(rng)?);
        }
    }
    Some(f)
}

/// A random site with at most `max_nodes` nodes and a random sheaf on it.
pub fn random_sheaf_on_random_site(
    rng: &mut impl Rng,
    max_nodes: usize,
    shape: SheafShape,
) -> SheafOfStructures {
    let site = random_site(rng, max_nodes);
    random_sheaf(rng, &site, shape)
}

fn random_term(rng: &mut impl Rng, sig: &Signature, scope: &[String]) -> Term {
    let consts: Vec<&str> = sig.constants().collect();
    let funcs: Vec<(&str, usize)> = sig.functions().collect();
    if !funcs.is_empty() && rng.gen_bool(0.15) {
        let (name, arity) = funcs[rng.gen_range(0..funcs.len())];
        let args = (0..arity).map(|_| random_term(rng, sig, scope)).collect();
        return Term::app(name, args);
    }
    let pick_const = scope.is_empty() || (!consts.is_empty() && rng.gen_bool(0.2));
    if pick_const {
        Term::constant(
            consts
                .choose(rng)
                .expect("a term needs a variable or constant"),
        )
    } else {
        Term::var(scope.choose(rng).expect("nonempty"))
    }
}

fn random_atom(rng: &mut impl Rng, sig: &Signature, scope: &[String]) -> Formula {
    let rels: Vec<(&str, usize)> = sig.relations().collect();
    if rels.is_empty() || rng.gen_bool(0.2) {
        Formula::eq(random_term(rng, sig, scope), random_term(rng, sig, scope))
    } else {
        let (name, arity) = rels[rng.gen_range(0..rels.len())];
        Formula::rel(
            name,
            (0..arity).map(|_| random_term(rng, sig, scope)).collect(),
        )
    }
}

fn has_terms(sig: &Signature, scope: &[String]) -> bool {
    !scope.is_empty() || sig.constants().next().is_some()
}

/// A random formula of depth at most `depth` (at least one when there is
/// no term to build an atom from). Variables come from `free`; binders are
/// named `x1, x2, ...` by nesting level, so nothing is shadowed as long as
/// `free` avoids those names.
pub fn random_formula(
    rng: &mut impl Rng,
    sig: &Signature,
    depth: usize,
    free: &[String],
) -> Formula {
    let mut scope = free.to_vec();
    gen_formula(rng, sig, depth, &mut scope)
}

fn gen_formula(
    rng: &mut impl Rng,
    sig: &Signature,
    depth: usize,
    scope: &mut Vec<String>,
) -> Formula {
    let must_bind = !has_terms(sig, scope);
    if !must_bind && (depth == 0 || rng.gen_bool(0.25)) {
        return random_atom(rng, sig, scope);
    }
    let d = depth.saturating_sub(1);
    let choice = if must_bind {
        5 + rng.gen_range(0..2)
    } else {
        rng.gen_range(0..7)
    };
    match choice {
        0 => Formula::not(gen_formula(rng, sig, d, scope)),
        1 => Formula::and(
            gen_formula(rng, sig, d, scope),
            gen_formula(rng, sig, d, scope),
        ),
        2 => Formula::or(
            gen_formula(rng, sig, d, scope),
            gen_formula(rng, sig, d, scope),
        ),
        3 | 4 => Formula::implies(
            gen_formula(rng, sig, d, scope),
            gen_formula(rng, sig, d, scope),
        ),
        k => {
            let v = format!(
                "x{}",
                scope.iter().filter(|s| s.starts_with('x')).count() + 1
            );
            scope.push(v.clone());
            let body = gen_formula(rng, sig, d, scope);
            scope.pop();
            if k == 5 {
                Formula::exists(&v, body)
            } else {
                Formula::forall(&v, body)
            }
        }
    }
}

/// Every formula of depth at most `depth` over the relations, constants
/// and equality of `sig`, with free variables from `free`. Functions are
/// not applied. Binders are named by nesting level as in
/// [`random_formula`]. The count grows very quickly; keep the signature
/// tiny.
pub fn all_formulas(sig: &Signature, depth: usize, free: &[String]) -> Vec<Formula> {
    let mut scope = free.to_vec();
    enumerate(sig, depth, &mut scope)
}

fn enumerate(sig: &Signature, depth: usize, scope: &mut Vec<String>) -> Vec<Formula> {
    let mut terms: Vec<Term> = scope.iter().map(|v| Term::var(v)).collect();
    terms.extend(sig.constants().map(Term::constant));
    let mut out = Vec::new();
    for (name, arity) in sig.relations() {
        for_each_tuple(&terms, arity, &mut |args| {
            out.push(Formula::rel(name, args.to_vec()))
        });
    }
    for a in &terms {
        for b in &terms {
            out.push(Formula::eq(a.clone(), b.clone()));
        }
    }
    if depth == 0 {
        return out;
    }
    let smaller = enumerate(sig, depth - 1, scope);
    for a in &smaller {
        out.push(Formula::not(a.clone()));
    }
    for a in &smaller {
        for b in &smaller {
            out.push(Formula::and(a.clone(), b.clone()));
            out.push(Formula::or(a.clone(), b.clone()));
            out.push(Formula::implies(a.clone(), b.clone()));
        }
    }
    let v = format!(
        "x{}",
        scope.iter().filter(|s| s.starts_with('x')).count() + 1
    );
    scope.push(v.clone());
    let bodies = enumerate(sig, depth - 1, scope);
    scope.pop();
    for body in bodies {
        out.push(Formula::exists(&v, body.clone()));
        out.push(Formula::forall(&v, body));
    }
    out.sort_by_key(|f| f.to_string());
    out.dedup();
    out
}

fn for_each_tuple(terms: &[Term], arity: usize, f: &mut dyn FnMut(&[Term])) {
    fn go(terms: &[Term], arity: usize, cur: &mut Vec<Term>, f: &mut dyn FnMut(&[Term])) {
        if cur.len() == arity {
            f(cur);
            return;
        }
        for t in terms {
            cur.push(t.clone());
            go(terms, arity, cur, f);
            cur.pop();
        }
    }
    go(terms, arity, &mut Vec::new(), f);
}

/// Ten intuitionistically valid schemes in `a`, `b`, `c`.
pub fn ipc_schemes(a: &Formula, b: &Formula, c: &Formula) -> Vec<Formula> {
    let imp = |x: &Formula, y: &Formula| Formula::implies(x.clone(), y.clone());
    let and = |x: &Formula, y: &Formula| Formula::and(x.clone(), y.clone());
    let or = |x: &Formula, y: &Formula| Formula::or(x.clone(), y.clone());
    let not = |x: &Formula| Formula::not(x.clone());
    vec![
        imp(a, &imp(b, a)),
        imp(&imp(a, &imp(b, c)), &imp(&imp(a, b), &imp(a, c))),
        imp(&and(a, b), a),
        imp(&and(a, b), b),
        imp(a, &imp(b, &and(a, b))),
        imp(a, &or(a, b)),
        imp(b, &or(a, b)),
        imp(&imp(a, c), &imp(&imp(b, c), &imp(&or(a, b), c))),
        imp(&imp(a, b), &imp(&imp(a, &not(b)), &not(a))),
        imp(&not(a), &imp(a, b)),
    ]
}

/// `(¬¬(a → b), a → ¬¬b)`.
pub fn int1(a: &Formula, b: &Formula) -> (Formula, Formula) {
    (
        Formula::not_not(Formula::implies(a.clone(), b.clone())),
        Formula::implies(a.clone(), Formula::not_not(b.clone())),
    )
}

/// `(¬¬∀x ¬¬φ, ∀x ¬¬φ)`.
pub fn int2(var: &str, phi: &Formula) -> (Formula, Formula) {
    let inner = Formula::forall(var, Formula::not_not(phi.clone()));
    (Formula::not_not(inner.clone()), inner)
}

/// Binds each of `vars` to the principal section of a random element at
/// `x`. `None` when the fiber at `x` is empty and `vars` is not.
pub fn random_env(
    rng: &mut impl Rng,
    s: &SheafOfStructures,
    x: NodeId,
    vars: &[String],
) -> Option<Environment> {
    let mut env = Environment::new(s.site().up(x));
    for v in vars {
        if s.fiber_len(x) == 0 {
            return None;
        }
        let a = rng.gen_range(0..s.fiber_len(x));
        env.bind(v, s.principal_section(x, a).expect("element exists"));
    }
    Some(env)
}

/// A random finite condition with at most `max_entries` entries over the
/// labels `H0, H1, ...` and columns below `2 * max_entries`.
pub fn random_condition(rng: &mut impl Rng, max_entries: usize, labels: usize) -> Condition {
    let mut t = Condition::new();
    let size = rng.gen_range(0..=max_entries);
    let cols = (2 * max_entries).max(1);
    while t.len() < size {
        let l = rng.gen_range(0..labels.max(1));
        t.insert((format!("H{l}"), rng.gen_range(0..cols)), rng.gen_bool(0.5));
    }
    t
}

//! Filters of opens, genericity relative to a finite formula set, the
//! direct-limit collapse and the fundamental-theorem harness.
//!
//! On a finite site every filter of opens has a least member `U0`, so the
//! direct limit of the section structures along the filter is the section
//! structure over `U0`. [`collapse_by_quotient`] builds the limit as a
//! quotient instead, as an independent check of that shortcut.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::forcing::{Binds, Environment, Eval, ForcingError};
use crate::logic::{goedel, Formula};
use crate::sheaf::{for_each_tuple, Section, SheafOfStructures};
use crate::site::{NodeId, OpenSet, Site, SiteError};
use crate::structure::{FiniteStructure, StructureError};

/// A filter of open sets, stored as its least member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OpenFilter {
    minimum: OpenSet,
}

impl OpenFilter {
    /// All opens containing `x`.
    pub fn point_filter(site: &Site, x: NodeId) -> Result<Self, SiteError> {
        if x >= site.len() {
            return Err(SiteError::NodeOutOfRange(x));
        }
        Ok(OpenFilter {
            minimum: site.up(x),
        })
    }

    /// All opens containing `u`.
    pub fn principal(u: OpenSet) -> Self {
        OpenFilter { minimum: u }
    }

    /// The filter generated by `gens`; the whole space when `gens` is empty.
    pub fn generated(site: &Site, gens: &[OpenSet]) -> Self {
        let minimum = gens.iter().fold(site.whole(), |acc, &u| acc.meet(u));
        OpenFilter { minimum }
    }

    pub fn minimum(&self) -> OpenSet {
        self.minimum
    }

    pub fn contains(&self, u: OpenSet) -> bool {
        self.minimum.is_subset(u)
    }

    /// Members in bit order.
    pub fn members(&self, site: &Site) -> Result<Vec<OpenSet>, SiteError> {
        Ok(site
            .enumerate_opens(crate::site::DEFAULT_OPEN_ENUMERATION_BOUND)?
            .into_iter()
            .filter(|&u| self.contains(u))
            .collect())
    }
}

/// Every assignment of sections over `u` to `vars`, in lexicographic order.
pub fn environments(
    s: &SheafOfStructures,
    u: OpenSet,
    vars: &[String],
) -> Result<Vec<Environment>, ForcingError> {
    let sections = s.sections_on(u)?;
    let mut out = Vec::new();
    for_each_tuple(sections.len(), vars.len(), |t| {
        let mut env = Environment::new(u);
        for (v, &i) in vars.iter().zip(t) {
            env.bind(v, sections[i].clone());
        }
        out.push(env);
    });
    Ok(out)
}

fn describe(s: &SheafOfStructures, env: &Environment) -> String {
    let parts: Vec<String> = env
        .bindings()
        .map(|(v, sec)| format!("{v}={}", s.show_section(sec)))
        .collect();
    parts.join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureKind {
    /// No member forces the formula or its negation.
    Undecided,
    /// An existential is forced but no member carries a witness.
    NoWitness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericFailure {
    pub formula: Formula,
    pub open: String,
    pub env: String,
    pub kind: FailureKind,
}

impl fmt::Display for GenericFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            FailureKind::Undecided => "undecided",
            FailureKind::NoWitness => "no witness",
        };
        write!(
            f,
            "{what}: {} on {} [{}]",
            self.formula, self.open, self.env
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenericReport {
    pub checked: usize,
    pub failures: Vec<GenericFailure>,
}

impl GenericReport {
    pub fn is_generic(&self) -> bool {
        self.failures.is_empty()
    }
}

fn forced_on<'a>(ev: &'a Eval<'a>, w: OpenSet, f: &'a Formula, b: &mut Binds<'a>) -> bool {
    w.iter().all(|x| ev.point(x, f, b))
}

/// Genericity of `filter` relative to `formulas`: for every formula and
/// every assignment of sections over a member `U`, some member inside `U`
/// forces the formula or its negation, and forced existentials have a
/// section witness on some member.
pub fn check_generic(
    s: &SheafOfStructures,
    filter: &OpenFilter,
    formulas: &[Formula],
) -> Result<GenericReport, ForcingError> {
    let site = s.site();
    let ev = Eval::new(s);
    let members = filter.members(site)?;
    let sections: HashMap<OpenSet, Vec<Section>> = members
        .iter()
        .map(|&u| Ok((u, s.sections_on(u)?)))
        .collect::<Result<_, ForcingError>>()?;
    let mut report = GenericReport::default();
    for phi in formulas {
        let vars: Vec<String> = phi.free_vars().into_iter().collect();
        let negated = Formula::not(phi.clone());
        for &u in &members {
            for env in environments(s, u, &vars)? {
                ev.check(phi, &env, u)?;
                report.checked += 1;
                let mut b: Binds = env.bindings().collect();
                let inside: Vec<OpenSet> =
                    members.iter().copied().filter(|w| w.is_subset(u)).collect();
                let decided = inside.iter().any(|&w| {
                    forced_on(&ev, w, phi, &mut b) || forced_on(&ev, w, &negated, &mut b)
                });
                if !decided {
                    report.failures.push(GenericFailure {
                        formula: phi.clone(),
                        open: site.show(u),
                        env: describe(s, &env),
                        kind: FailureKind::Undecided,
                    });
                }
                if let Formula::Exists(v, body) = phi {
                    if forced_on(&ev, u, phi, &mut b) {
                        let witnessed = inside.iter().any(|&w| {
                            sections[&w].iter().any(|sec| {
                                b.push((v, sec));
                                let ok = forced_on(&ev, w, body, &mut b);
                                b.pop();
                                ok
                            })
                        });
                        if !witnessed {
                            report.failures.push(GenericFailure {
                                formula: phi.clone(),
                                open: site.show(u),
                                env: describe(s, &env),
                                kind: FailureKind::NoWitness,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// The classical structure `𝔄[F]`, realized on sections over the least
/// member of the filter.
#[derive(Clone, Debug)]
pub struct CollapsedModel {
    pub minimum: OpenSet,
    pub carrier: Vec<Section>,
    pub structure: FiniteStructure,
}

impl CollapsedModel {
    /// Class of a section defined on a member of the filter.
    pub fn class_of(&self, sec: &Section) -> Option<usize> {
        let r = sec.restrict(self.minimum).ok()?;
        self.carrier.binary_search(&r).ok()
    }
}

pub fn collapse(
    s: &SheafOfStructures,
    filter: &OpenFilter,
) -> Result<CollapsedModel, ForcingError> {
    let st = s.sections_structure(filter.minimum())?;
    Ok(CollapsedModel {
        minimum: st.domain,
        carrier: st.sections,
        structure: st.structure,
    })
}

/// Classical satisfaction in the collapse; `assignment` maps variables to
/// carrier indices.
pub fn tarski_eval(
    m: &CollapsedModel,
    f: &Formula,
    assignment: &[(String, usize)],
) -> Result<bool, StructureError> {
    m.structure.satisfies(f, assignment)
}

/// The direct limit built as a quotient of all sections over members.
#[derive(Clone, Debug)]
pub struct QuotientModel {
    /// Each class lists its members as sections (domain included).
    pub classes: Vec<Vec<Section>>,
    pub structure: FiniteStructure,
}

/// Direct limit as a quotient of the disjoint union of `𝔄(U)` over members
/// `U`: sections are identified when they agree on some member, relations
/// hold of classes when they hold of representatives over some member.
pub fn collapse_by_quotient(
    s: &SheafOfStructures,
    filter: &OpenFilter,
) -> Result<QuotientModel, ForcingError> {
    let members = filter.members(s.site())?;
    let mut elems: Vec<Section> = Vec::new();
    let mut by_open: Vec<(OpenSet, std::ops::Range<usize>)> = Vec::new();
    for &u in &members {
        let start = elems.len();
        elems.extend(s.sections_on(u)?);
        by_open.push((u, start..elems.len()));
    }
    let mut parent: Vec<usize> = (0..elems.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..elems.len() {
        for j in (i + 1)..elems.len() {
            let common = elems[i].domain().meet(elems[j].domain());
            let agree = members.iter().any(|&w| {
                w.is_subset(common)
                    && elems[i].restrict_unchecked(w) == elems[j].restrict_unchecked(w)
            });
            if agree {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut class_index: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<Vec<Section>> = Vec::new();
    let mut class_of = vec![0; elems.len()];
    for i in 0..elems.len() {
        let r = find(&mut parent, i);
        let c = *class_index.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[c].push(elems[i].clone());
        class_of[i] = c;
    }
    let labels = classes
        .iter()
        .map(|c| format!("[{}]", s.show_section(&c[0])))
        .collect();
    let mut m = FiniteStructure::new(labels);
    let sig = s.signature();
    for (r, arity) in sig.relations() {
        let mut tuples = BTreeSet::new();
        for (u, range) in &by_open {
            let local: Vec<usize> = range.clone().collect();
            for_each_tuple(local.len(), arity, |t| {
                let holds = u.iter().all(|x| {
                    let vals: Vec<usize> = t.iter().map(|&i| elems[local[i]].at(x)).collect();
                    s.holds(r, x, &vals) == Some(true)
                });
                if holds {
                    tuples.insert(t.iter().map(|&i| class_of[local[i]]).collect::<Vec<_>>());
                }
            });
        }
        m.set_relation(r, arity, tuples);
    }
    for (f, arity) in sig.functions() {
        let mut table = HashMap::new();
        for (u, range) in &by_open {
            let local: Vec<usize> = range.clone().collect();
            let lookup: HashMap<&Section, usize> =
                local.iter().map(|&i| (&elems[i], class_of[i])).collect();
            for_each_tuple(local.len(), arity, |t| {
                let pairs: Option<Vec<(NodeId, usize)>> = u
                    .iter()
                    .map(|x| {
                        let vals: Vec<usize> = t.iter().map(|&i| elems[local[i]].at(x)).collect();
                        s.apply(f, x, &vals).map(|v| (x, v))
                    })
                    .collect();
                let Some(pairs) = pairs else { return };
                let Ok(image) = s.section_from(&pairs) else {
                    return;
                };
                if let Some(&c) = lookup.get(&image) {
                    table.insert(t.iter().map(|&i| class_of[local[i]]).collect::<Vec<_>>(), c);
                }
            });
        }
        m.set_function(f, arity, table);
    }
    for c in sig.constants() {
        for (u, range) in &by_open {
            let pairs: Option<Vec<(NodeId, usize)>> =
                u.iter().map(|x| s.constant(c, x).map(|v| (x, v))).collect();
            let Some(pairs) = pairs else { continue };
            let Ok(sec) = s.section_from(&pairs) else {
                continue;
            };
            if let Some(i) = range.clone().find(|&i| elems[i] == sec) {
                m.set_constant(c, class_of[i]);
                break;
            }
        }
    }
    Ok(QuotientModel {
        classes,
        structure: m,
    })
}

/// Checks that the quotient construction and the least-member realization
/// give the same structure: restriction to the least member is a bijection
/// on classes preserving every symbol.
pub fn quotient_matches_minimum(
    s: &SheafOfStructures,
    filter: &OpenFilter,
) -> Result<bool, ForcingError> {
    let direct = collapse(s, filter)?;
    let quotient = collapse_by_quotient(s, filter)?;
    let n = direct.carrier.len();
    if quotient.classes.len() != n {
        return Ok(false);
    }
    // h: quotient class -> direct element
    let mut h = Vec::with_capacity(n);
    for class in &quotient.classes {
        let images: BTreeSet<Option<usize>> =
            class.iter().map(|sec| direct.class_of(sec)).collect();
        match images.into_iter().collect::<Vec<_>>().as_slice() {
            [Some(i)] => h.push(*i),
            _ => return Ok(false),
        }
    }
    if h.iter().collect::<BTreeSet<_>>().len() != n {
        return Ok(false);
    }
    let sig = s.signature();
    for (r, _) in sig.relations() {
        let mapped: BTreeSet<Vec<usize>> = quotient
            .structure
            .relation(r)
            .expect("declared")
            .iter()
            .map(|t| t.iter().map(|&c| h[c]).collect())
            .collect();
        if Some(&mapped) != direct.structure.relation(r) {
            return Ok(false);
        }
    }
    for (f, _) in sig.functions() {
        let q = quotient.structure.function(f).expect("declared");
        let d = direct.structure.function(f).expect("declared");
        if q.len() != d.len() {
            return Ok(false);
        }
        for (args, &v) in q {
            let mapped: Vec<usize> = args.iter().map(|&c| h[c]).collect();
            if d.get(&mapped) != Some(&h[v]) {
                return Ok(false);
            }
        }
    }
    for c in sig.constants() {
        if quotient.structure.constant(c).map(|v| h[v]) != direct.structure.constant(c) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All subformulas of the given formulas, children first, without repeats.
pub fn subformula_closure(formulas: &[Formula]) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for f in formulas {
        for g in f.subformulas() {
            if !out.contains(&g) {
                out.push(g);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy {
    pub formula: Formula,
    pub env: String,
    pub collapse_satisfies: bool,
    pub translation_in_filter: bool,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}]: collapse {}, translation {}",
            self.formula,
            self.env,
            if self.collapse_satisfies {
                "satisfies"
            } else {
                "fails"
            },
            if self.translation_in_filter {
                "in filter"
            } else {
                "not in filter"
            }
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FundamentalReport {
    pub checked: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl FundamentalReport {
    pub fn holds(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// For each formula and each assignment of collapse elements to its free
/// variables: `𝔄[F] ⊨ φ` iff the pointwise truth value of the Gödel
/// translation over the least member belongs to the filter.
pub fn fundamental_check(
    s: &SheafOfStructures,
    filter: &OpenFilter,
    formulas: &[Formula],
) -> Result<FundamentalReport, ForcingError> {
    let model = collapse(s, filter)?;
    let u0 = filter.minimum();
    let ev = Eval::new(s);
    let mut report = FundamentalReport::default();
    for phi in formulas {
        let g = goedel(phi);
        let vars: Vec<String> = phi.free_vars().into_iter().collect();
        for env in environments(s, u0, &vars)? {
            ev.check(&g, &env, u0)?;
            report.checked += 1;
            let assignment: Vec<(String, usize)> = env
                .bindings()
                .map(|(v, sec)| (v.to_string(), model.class_of(sec).expect("section over U0")))
                .collect();
            let sat = tarski_eval(&model, phi, &assignment)?;
            let mut b: Binds = env.bindings().collect();
            let value: crate::site::NodeSet =
                u0.iter().filter(|&x| ev.point(x, &g, &mut b)).collect();
            let in_filter = filter.contains(OpenSet::from_nodes_unchecked(value));
            if sat != in_filter {
                report.discrepancies.push(Discrepancy {
                    formula: phi.clone(),
                    env: describe(s, &env),
                    collapse_satisfies: sat,
                    translation_in_filter: in_filter,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::logic::parse_formula;

    fn f(s: &SheafOfStructures, text: &str) -> Formula {
        parse_formula(text, &s.signature()).unwrap()
    }

    #[test]
    fn point_filters() {
        let p2 = fixtures::p2();
        let q = OpenFilter::point_filter(&p2, p2.node("q").unwrap()).unwrap();
        let shown: Vec<String> = q
            .members(&p2)
            .unwrap()
            .iter()
            .map(|&u| p2.show(u))
            .collect();
        assert_eq!(shown, ["{q}", "{p,q}"]);
        let p = OpenFilter::point_filter(&p2, p2.node("p").unwrap()).unwrap();
        assert_eq!(p.members(&p2).unwrap(), vec![p2.whole()]);
        let p1 = fixtures::p1();
        assert_eq!(
            OpenFilter::point_filter(&p1, 0)
                .unwrap()
                .members(&p1)
                .unwrap()
                .len(),
            1
        );
        assert_eq!(OpenFilter::generated(&p2, &[]).minimum(), p2.whole());
    }

    #[test]
    fn genericity_examples() {
        let s = fixtures::s2();
        let site = s.site();
        let r = [f(&s, "R(s)")];
        let at_q = OpenFilter::point_filter(site, site.node("q").unwrap()).unwrap();
        assert!(check_generic(&s, &at_q, &r).unwrap().is_generic());
        let at_p = OpenFilter::point_filter(site, site.node("p").unwrap()).unwrap();
        let report = check_generic(&s, &at_p, &r).unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].kind, FailureKind::Undecided);
        let s1 = fixtures::s1();
        let whole = OpenFilter::principal(s1.site().whole());
        let phis = [f(&s1, "R(x)"), f(&s1, "exists x. ~R(x)")];
        assert!(check_generic(&s1, &whole, &phis).unwrap().is_generic());
    }

    #[test]
    fn collapse_examples() {
        let s = fixtures::s2();
        let site = s.site();
        let at_q = OpenFilter::point_filter(site, site.node("q").unwrap()).unwrap();
        let m = collapse(&s, &at_q).unwrap();
        assert_eq!(m.carrier.len(), 1);
        let sigma = m.class_of(s.section("s").unwrap()).unwrap();
        assert_eq!(
            tarski_eval(&m, &f(&s, "R(s)"), &[("s".into(), sigma)]),
            Ok(true)
        );
        let whole = collapse(&s, &OpenFilter::principal(site.whole())).unwrap();
        assert_eq!(whole.carrier.len(), 1);
        assert_eq!(
            tarski_eval(&whole, &f(&s, "R(s)"), &[("s".into(), 0)]),
            Ok(false)
        );
        let e = fixtures::se();
        let m = collapse(&e, &OpenFilter::principal(e.site().whole())).unwrap();
        assert!(m.carrier.is_empty());
        assert_eq!(
            tarski_eval(&m, &f(&e, "x = x"), &[]),
            Err(StructureError::UnboundVariable("x".into()))
        );
        assert_eq!(
            tarski_eval(&m, &f(&e, "exists x. exists y. ~x = y"), &[]),
            Ok(false)
        );
    }

    #[test]
    fn fundamental_examples() {
        let s = fixtures::s2();
        let site = s.site();
        let at_q = OpenFilter::point_filter(site, site.node("q").unwrap()).unwrap();
        let phis = subformula_closure(&[f(&s, "R(s)"), f(&s, "~R(s)")]);
        let report = fundamental_check(&s, &at_q, &phis).unwrap();
        assert!(report.holds());
        assert!(report.checked >= 2);
    }

    #[test]
    fn quotient_agrees_with_minimum_on_all_filters() {
        for s in fixtures::all_sheaves() {
            let site = s.site();
            for u in site.enumerate_opens(8).unwrap() {
                let filter = OpenFilter::principal(u);
                assert!(
                    quotient_matches_minimum(&s, &filter).unwrap(),
                    "{}",
                    site.show(u)
                );
            }
        }
    }

    #[test]
    fn closure_is_children_first() {
        let s = fixtures::s2();
        let c = subformula_closure(&[f(&s, "~R(s) | R(s)")]);
        let shown: Vec<String> = c.iter().map(|g| g.to_string()).collect();
        assert_eq!(shown, ["R(s)", "~R(s)", "~R(s) | R(s)"]);
    }
}

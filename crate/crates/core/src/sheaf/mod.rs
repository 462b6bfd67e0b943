//! Sheaves of structures over a finite site, stored as a functor: one finite
//! structure per node plus transition maps along the order.

mod format;

pub use format::{load_sheaf, parse_sheaf, parse_sheaf_unchecked};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::logic::Signature;
use crate::site::{NodeId, OpenSet, Site, SiteError};
use crate::structure::FiniteStructure;

/// Default cap on the number of sections [`SheafOfStructures::sections_on`]
/// will enumerate.
pub const DEFAULT_SECTION_BOUND: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SheafError {
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error("unknown element `{element}` in fiber over `{node}`")]
    UnknownElement { node: String, element: String },
    #[error("duplicate element `{element}` in fiber over `{node}`")]
    DuplicateElement { node: String, element: String },
    #[error("element index {index} is not in the fiber over `{node}`")]
    NotInFiber { node: String, index: usize },
    #[error("`{0}` is not below `{1}`")]
    NotBelow(String, String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{0}` declared twice with different kinds or arities")]
    SymbolClash(String),
    #[error("`{symbol}` expects {expected} argument(s), got {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("section domain {0} is not open")]
    SectionDomain(String),
    #[error("open {set} is not contained in the section domain {domain}")]
    NotContained { set: String, domain: String },
    #[error("{count} sections exceed the enumeration bound {bound}")]
    TooManySections { count: usize, bound: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error("sheaf is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// One failed sheaf condition. Elements and nodes are given by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MissingTransition {
        from: String,
        to: String,
        element: String,
    },
    Identity {
        node: String,
        element: String,
    },
    Functoriality {
        x: String,
        y: String,
        z: String,
        element: String,
    },
    RelationOpenness {
        relation: String,
        from: String,
        to: String,
        tuple: Vec<String>,
    },
    FunctionUndefined {
        function: String,
        node: String,
        args: Vec<String>,
    },
    FunctionContinuity {
        function: String,
        from: String,
        to: String,
        args: Vec<String>,
    },
    ConstantUndefined {
        constant: String,
        node: String,
    },
    ConstantContinuity {
        constant: String,
        from: String,
        to: String,
    },
    SectionIncompatible {
        section: String,
        from: String,
        to: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingTransition { from, to, element } => {
                write!(
                    f,
                    "functoriality: no image of `{element}` under {from}->{to}"
                )
            }
            Violation::Identity { node, element } => {
                write!(f, "functoriality: {node}->{node} moves `{element}`")
            }
            Violation::Functoriality { x, y, z, element } => write!(
                f,
                "functoriality: {x}->{y}->{z} and {x}->{z} disagree on `{element}`"
            ),
            Violation::RelationOpenness {
                relation,
                from,
                to,
                tuple,
            } => write!(
                f,
                "openness: {relation}({}) holds at {from} but its image fails at {to}",
                tuple.join(",")
            ),
            Violation::FunctionUndefined {
                function,
                node,
                args,
            } => write!(
                f,
                "function: {function}({}) undefined at {node}",
                args.join(",")
            ),
            Violation::FunctionContinuity {
                function,
                from,
                to,
                args,
            } => write!(
                f,
                "continuity: {function}({}) does not commute with {from}->{to}",
                args.join(",")
            ),
            Violation::ConstantUndefined { constant, node } => {
                write!(f, "constant: {constant} undefined at {node}")
            }
            Violation::ConstantContinuity { constant, from, to } => {
                write!(
                    f,
                    "continuity: constant {constant} does not commute with {from}->{to}"
                )
            }
            Violation::SectionIncompatible { section, from, to } => {
                write!(
                    f,
                    "section {section}: values at {from} and {to} are not compatible"
                )
            }
        }
    }
}

/// A compatible family of fiber elements over an open set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Section {
    domain: OpenSet,
    values: Vec<Option<usize>>,
}

impl Section {
    /// The unique section over the empty open.
    pub fn empty(site_len: usize) -> Section {
        Section {
            domain: OpenSet::EMPTY,
            values: vec![None; site_len],
        }
    }

    pub fn domain(&self) -> OpenSet {
        self.domain
    }

    pub fn value(&self, x: NodeId) -> Option<usize> {
        self.values.get(x).copied().flatten()
    }

    pub(crate) fn at(&self, x: NodeId) -> usize {
        self.values[x].expect("node inside section domain")
    }

    /// Pointwise restriction to an open `v` inside the domain.
    pub fn restrict(&self, v: OpenSet) -> Result<Section, SheafError> {
        if !v.is_subset(self.domain) {
            return Err(SheafError::NotContained {
                set: format!("{:#x}", v.nodes().bits()),
                domain: format!("{:#x}", self.domain.nodes().bits()),
            });
        }
        Ok(self.restrict_unchecked(v))
    }

    pub(crate) fn restrict_unchecked(&self, v: OpenSet) -> Section {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(x, a)| if v.contains(x) { *a } else { None })
            .collect();
        Section { domain: v, values }
    }

    /// Agree at every node of both domains.
    pub fn compatible_with(&self, other: &Section) -> bool {
        self.domain
            .meet(other.domain)
            .iter()
            .all(|x| self.values[x] == other.values[x])
    }

    /// Union of two compatible sections.
    pub fn glue(&self, other: &Section) -> Option<Section> {
        if !self.compatible_with(other) {
            return None;
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.or(*b))
            .collect();
        Some(Section {
            domain: self.domain.join(other.domain),
            values,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct RelationData {
    arity: usize,
    tuples: Vec<BTreeSet<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct FunctionData {
    arity: usize,
    tables: Vec<BTreeMap<Vec<usize>, usize>>,
}

/// A sheaf of structures on a finite site.
///
/// Fibers are finite lists of named elements (possibly empty). For `x <= y`
/// there is a transition map from the fiber over `x` to the fiber over `y`.
/// Values built through [`SheafBuilder::build`] or [`parse_sheaf`] have
/// passed [`SheafOfStructures::validate`]; the forcing evaluator assumes it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafOfStructures {
    site: Site,
    fibers: Vec<Vec<String>>,
    trans: Vec<Vec<Option<Vec<Option<usize>>>>>,
    relations: BTreeMap<String, RelationData>,
    functions: BTreeMap<String, FunctionData>,
    constants: BTreeMap<String, Vec<Option<usize>>>,
    sections: BTreeMap<String, Section>,
}

impl SheafOfStructures {
    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn fiber(&self, x: NodeId) -> &[String] {
        &self.fibers[x]
    }

    pub fn fiber_len(&self, x: NodeId) -> usize {
        self.fibers[x].len()
    }

    pub fn element(&self, x: NodeId, name: &str) -> Result<usize, SheafError> {
        self.fibers[x]
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| SheafError::UnknownElement {
                node: self.site.name(x).to_string(),
                element: name.to_string(),
            })
    }

    /// Image of `a` under the transition `x -> y`, if defined.
    pub fn transition(&self, x: NodeId, y: NodeId, a: usize) -> Option<usize> {
        self.trans[x][y].as_ref()?.get(a).copied().flatten()
    }

    /// Transition on a valid sheaf; panics if undefined.
    pub(crate) fn map(&self, x: NodeId, y: NodeId, a: usize) -> usize {
        self.transition(x, y, a)
            .expect("transition defined on a valid sheaf")
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (r, d) in &self.relations {
            sig.add_relation(r, d.arity).expect("disjoint symbols");
        }
        for (f, d) in &self.functions {
            sig.add_function(f, d.arity).expect("disjoint symbols");
        }
        for c in self.constants.keys() {
            sig.add_constant(c).expect("disjoint symbols");
        }
        sig
    }

    pub fn holds(&self, relation: &str, x: NodeId, tuple: &[usize]) -> Option<bool> {
        self.relations
            .get(relation)
            .map(|d| d.tuples[x].contains(tuple))
    }

    pub fn apply(&self, function: &str, x: NodeId, args: &[usize]) -> Option<usize> {
        self.functions.get(function)?.tables[x].get(args).copied()
    }

    pub fn constant(&self, name: &str, x: NodeId) -> Option<usize> {
        self.constants.get(name)?.get(x).copied().flatten()
    }

    pub fn section(&self, name: &str) -> Result<&Section, SheafError> {
        self.sections
            .get(name)
            .ok_or_else(|| SheafError::UnknownSection(name.to_string()))
    }

    /// Named sections in name order.
    pub fn sections(&self) -> impl Iterator<Item = (&str, &Section)> {
        self.sections.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Adds or replaces a named section after checking compatibility.
    pub fn add_section(&mut self, name: &str, section: Section) -> Result<(), SheafError> {
        if let Some(v) = self.section_violation(name, &section) {
            return Err(SheafError::Invalid(vec![v]));
        }
        self.sections.insert(name.to_string(), section);
        Ok(())
    }

    /// `x`-germ of `a`: the section on `[x)` with `y -> transition(x, y)(a)`.
    pub fn principal_section(&self, x: NodeId, a: usize) -> Result<Section, SheafError> {
        if a >= self.fiber_len(x) {
            return Err(SheafError::NotInFiber {
                node: self.site.name(x).to_string(),
                index: a,
            });
        }
        Ok(self.principal(x, a))
    }

    pub(crate) fn principal(&self, x: NodeId, a: usize) -> Section {
        let domain = self.site.up(x);
        let mut values = vec![None; self.site.len()];
        for y in domain.iter() {
            values[y] = Some(self.map(x, y, a));
        }
        Section { domain, values }
    }

    /// Builds a section from explicit values; checks openness and
    /// compatibility.
    pub fn section_from(&self, values: &[(NodeId, usize)]) -> Result<Section, SheafError> {
        let mut vals = vec![None; self.site.len()];
        let mut dom = crate::site::NodeSet::EMPTY;
        for &(x, a) in values {
            if a >= self.fiber_len(x) {
                return Err(SheafError::NotInFiber {
                    node: self.site.name(x).to_string(),
                    index: a,
                });
            }
            vals[x] = Some(a);
            dom.insert(x);
        }
        let domain = self
            .site
            .open(dom)
            .map_err(|_| SheafError::SectionDomain(self.site.show(dom)))?;
        let s = Section {
            domain,
            values: vals,
        };
        match self.section_violation("<anonymous>", &s) {
            Some(v) => Err(SheafError::Invalid(vec![v])),
            None => Ok(s),
        }
    }

    fn section_violation(&self, name: &str, s: &Section) -> Option<Violation> {
        for x in s.domain.iter() {
            for y in self.site.up(x).iter() {
                if self.transition(x, y, s.at(x)) != s.value(y) {
                    return Some(Violation::SectionIncompatible {
                        section: name.to_string(),
                        from: self.site.name(x).to_string(),
                        to: self.site.name(y).to_string(),
                    });
                }
            }
        }
        None
    }

    /// All sections over `u`, in lexicographic order of their values along
    /// declaration order.
    pub fn sections_on(&self, u: OpenSet) -> Result<Vec<Section>, SheafError> {
        self.sections_on_bounded(u, DEFAULT_SECTION_BOUND)
    }

    pub fn sections_on_bounded(
        &self,
        u: OpenSet,
        bound: usize,
    ) -> Result<Vec<Section>, SheafError> {
        // Bottom-up order: a node's value is usually forced by a node below.
        let mut order = self.site.top_down(u.nodes());
        order.reverse();
        let mut out = Vec::new();
        let mut values = vec![None; self.site.len()];
        self.extend_sections(u, &order, 0, &mut values, &mut out, bound)?;
        out.sort();
        Ok(out)
    }

    fn extend_sections(
        &self,
        u: OpenSet,
        order: &[NodeId],
        i: usize,
        values: &mut Vec<Option<usize>>,
        out: &mut Vec<Section>,
        bound: usize,
    ) -> Result<(), SheafError> {
        if i == order.len() {
            if out.len() >= bound {
                return Err(SheafError::TooManySections {
                    count: out.len() + 1,
                    bound,
                });
            }
            out.push(Section {
                domain: u,
                values: values.clone(),
            });
            return Ok(());
        }
        let x = order[i];
        for a in 0..self.fiber_len(x) {
            let ok = order[..i].iter().all(|&y| {
                let b = values[y].expect("assigned");
                (!self.site.leq(y, x) || self.transition(y, x, b) == Some(a))
                    && (!self.site.leq(x, y) || self.transition(x, y, a) == Some(b))
            });
            if ok {
                values[x] = Some(a);
                self.extend_sections(u, order, i + 1, values, out, bound)?;
                values[x] = None;
            }
        }
        Ok(())
    }

    /// The classical structure at a single node.
    pub fn fiber_structure(&self, x: NodeId) -> FiniteStructure {
        let mut m = FiniteStructure::new(self.fibers[x].clone());
        for (r, d) in &self.relations {
            m.set_relation(r, d.arity, d.tuples[x].clone());
        }
        for (f, d) in &self.functions {
            m.set_function(
                f,
                d.arity,
                d.tables[x].iter().map(|(k, v)| (k.clone(), *v)).collect(),
            );
        }
        for (c, vals) in &self.constants {
            if let Some(a) = vals[x] {
                m.set_constant(c, a);
            }
        }
        m
    }

    /// The structure of sections over `u`: relations hold when they hold at
    /// every node of `u`; functions and constants act pointwise.
    pub fn sections_structure(&self, u: OpenSet) -> Result<SectionStructure, SheafError> {
        let sections = self.sections_on(u)?;
        let index: HashMap<&Section, usize> =
            sections.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let labels = sections.iter().map(|s| self.show_section(s)).collect();
        let mut m = FiniteStructure::new(labels);
        for (r, d) in &self.relations {
            let mut tuples = BTreeSet::new();
            for_each_tuple(sections.len(), d.arity, |t| {
                if u.iter().all(|x| {
                    d.tuples[x].contains(&t.iter().map(|&i| sections[i].at(x)).collect::<Vec<_>>())
                }) {
                    tuples.insert(t.to_vec());
                }
            });
            m.set_relation(r, d.arity, tuples);
        }
        for (f, d) in &self.functions {
            let mut table = HashMap::new();
            for_each_tuple(sections.len(), d.arity, |t| {
                let mut values = vec![None; self.site.len()];
                for x in u.iter() {
                    let args: Vec<usize> = t.iter().map(|&i| sections[i].at(x)).collect();
                    values[x] = d.tables[x].get(&args).copied();
                }
                let s = Section { domain: u, values };
                if let Some(&i) = index.get(&s) {
                    table.insert(t.to_vec(), i);
                }
            });
            m.set_function(f, d.arity, table);
        }
        for (c, vals) in &self.constants {
            let mut values = vec![None; self.site.len()];
            for x in u.iter() {
                values[x] = vals[x];
            }
            let s = Section { domain: u, values };
            if let Some(&i) = index.get(&s) {
                m.set_constant(c, i);
            }
        }
        Ok(SectionStructure {
            domain: u,
            sections,
            structure: m,
        })
    }

    /// `{p->0, q->0}`.
    pub fn show_section(&self, s: &Section) -> String {
        let parts: Vec<String> = s
            .domain
            .iter()
            .map(|x| format!("{}->{}", self.site.name(x), self.fibers[x][s.at(x)]))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Every violated sheaf condition; empty iff the sheaf is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let site = &self.site;
        let name = |x: NodeId| site.name(x).to_string();
        let mut out = Vec::new();
        for x in site.nodes() {
            for y in site.up(x).iter() {
                for a in 0..self.fiber_len(x) {
                    match self.transition(x, y, a) {
                        None => out.push(Violation::MissingTransition {
                            from: name(x),
                            to: name(y),
                            element: self.fibers[x][a].clone(),
                        }),
                        Some(b) if x == y && a != b => out.push(Violation::Identity {
                            node: name(x),
                            element: self.fibers[x][a].clone(),
                        }),
                        Some(_) => {}
                    }
                }
            }
        }
        for x in site.nodes() {
            for y in site.up(x).iter() {
                for z in site.up(y).iter() {
                    for a in 0..self.fiber_len(x) {
                        let (Some(b), Some(direct)) =
                            (self.transition(x, y, a), self.transition(x, z, a))
                        else {
                            continue;
                        };
                        if let Some(c) = self.transition(y, z, b) {
                            if c != direct {
                                out.push(Violation::Functoriality {
                                    x: name(x),
                                    y: name(y),
                                    z: name(z),
                                    element: self.fibers[x][a].clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        let image = |x: NodeId, y: NodeId, t: &[usize]| -> Option<Vec<usize>> {
            t.iter().map(|&a| self.transition(x, y, a)).collect()
        };
        let labels = |x: NodeId, t: &[usize]| -> Vec<String> {
            t.iter().map(|&a| self.fibers[x][a].clone()).collect()
        };
        for (r, d) in &self.relations {
            for x in site.nodes() {
                for t in &d.tuples[x] {
                    for y in site.up(x).iter() {
                        if let Some(img) = image(x, y, t) {
                            if !d.tuples[y].contains(&img) {
                                out.push(Violation::RelationOpenness {
                                    relation: r.clone(),
                                    from: name(x),
                                    to: name(y),
                                    tuple: labels(x, t),
                                });
                            }
                        }
                    }
                }
            }
        }
        for (f, d) in &self.functions {
            for x in site.nodes() {
                for_each_tuple(self.fiber_len(x), d.arity, |t| {
                    let Some(&v) = d.tables[x].get(t) else {
                        out.push(Violation::FunctionUndefined {
                            function: f.clone(),
                            node: name(x),
                            args: labels(x, t),
                        });
                        return;
                    };
                    for y in site.up(x).iter() {
                        let (Some(img), Some(vy)) = (image(x, y, t), self.transition(x, y, v))
                        else {
                            continue;
                        };
                        if d.tables[y].get(&img) != Some(&vy) {
                            out.push(Violation::FunctionContinuity {
                                function: f.clone(),
                                from: name(x),
                                to: name(y),
                                args: labels(x, t),
                            });
                        }
                    }
                });
            }
        }
        for (c, vals) in &self.constants {
            for x in site.nodes() {
                let Some(a) = vals[x] else {
                    out.push(Violation::ConstantUndefined {
                        constant: c.clone(),
                        node: name(x),
                    });
                    continue;
                };
                for y in site.up(x).iter() {
                    if vals[y].is_some() && self.transition(x, y, a) != vals[y] {
                        out.push(Violation::ConstantContinuity {
                            constant: c.clone(),
                            from: name(x),
                            to: name(y),
                        });
                    }
                }
            }
        }
        for (s, sec) in &self.sections {
            if let Some(v) = self.section_violation(s, sec) {
                out.push(v);
            }
        }
        out
    }

    /// Serializes to the text format read by [`parse_sheaf`].
    pub fn to_text(&self) -> String {
        let site = &self.site;
        let mut out = site.to_text();
        for x in site.nodes() {
            out.push_str(&format!("sort {}:", site.name(x)));
            for e in &self.fibers[x] {
                out.push_str(&format!(" {e}"));
            }
            out.push('\n');
        }
        for x in site.nodes() {
            for y in site.strictly_above(x).iter() {
                let pairs: Vec<String> = (0..self.fiber_len(x))
                    .filter_map(|a| {
                        self.transition(x, y, a)
                            .map(|b| format!("{} -> {}", self.fibers[x][a], self.fibers[y][b]))
                    })
                    .collect();
                if !pairs.is_empty() {
                    out.push_str(&format!(
                        "map {} {}: {}\n",
                        site.name(x),
                        site.name(y),
                        pairs.join(", ")
                    ));
                }
            }
        }
        let tuple = |x: NodeId, t: &[usize]| {
            let v: Vec<&str> = t.iter().map(|&a| self.fibers[x][a].as_str()).collect();
            format!("({})", v.join(","))
        };
        for (r, d) in &self.relations {
            for x in site.nodes() {
                let ts: Vec<String> = d.tuples[x].iter().map(|t| tuple(x, t)).collect();
                out.push_str(
                    &format!("rel {r}/{} {}: {}\n", d.arity, site.name(x), ts.join(" "))
                        .replace(": \n", ":\n"),
                );
            }
        }
        for (f, d) in &self.functions {
            for x in site.nodes() {
                let rows: Vec<String> = d.tables[x]
                    .iter()
                    .map(|(k, &v)| format!("{} -> {}", tuple(x, k), self.fibers[x][v]))
                    .collect();
                out.push_str(
                    &format!(
                        "fun {f}/{} {}: {}\n",
                        d.arity,
                        site.name(x),
                        rows.join(", ")
                    )
                    .replace(": \n", ":\n"),
                );
            }
        }
        for (c, vals) in &self.constants {
            for x in site.nodes() {
                if let Some(a) = vals[x] {
                    out.push_str(&format!(
                        "const {c} {}: {}\n",
                        site.name(x),
                        self.fibers[x][a]
                    ));
                }
            }
        }
        for (s, sec) in &self.sections {
            let parts: Vec<String> = sec
                .domain
                .iter()
                .map(|x| format!("{}->{}", site.name(x), self.fibers[x][sec.at(x)]))
                .collect();
            out.push_str(&format!("section {s}: {}\n", parts.join(" ")));
        }
        out
    }
}

/// Calls `f` on every tuple in `0..n` of length `arity`, lexicographically.
pub(crate) fn for_each_tuple(n: usize, arity: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 && arity > 0 {
        return;
    }
    let mut t = vec![0usize; arity];
    loop {
        f(&t);
        let mut i = arity;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

/// `𝔄(U)`: sections over `U` together with their classical structure.
/// Carrier element `i` of `structure` is `sections[i]`.
#[derive(Clone, Debug)]
pub struct SectionStructure {
    pub domain: OpenSet,
    pub sections: Vec<Section>,
    pub structure: FiniteStructure,
}

impl SectionStructure {
    pub fn index_of(&self, s: &Section) -> Option<usize> {
        self.sections.binary_search(s).ok()
    }
}

/// Incremental construction by node and element names.
///
/// Transitions not given explicitly are filled in: identities on each fiber,
/// then composites through intermediate nodes, then same-named elements
/// along covering pairs, then composites again, then same-named elements
/// anywhere.
///
/// ```
/// use sheaf_logic::sheaf::SheafBuilder;
/// use sheaf_logic::site::Site;
///
/// let site = Site::from_relation(&["p", "q"], &[("p", "q")]).unwrap();
/// let s = SheafBuilder::new(site)
///     .fiber("p", &["0"])
///     .fiber("q", &["0"])
///     .relation("R", 1)
///     .holds("R", "q", &["0"])
///     .section("s", &[("p", "0"), ("q", "0")])
///     .build()
///     .unwrap();
/// assert!(s.validate().is_empty());
/// ```
#[derive(Clone, Debug)]
pub struct SheafBuilder {
    site: Site,
    fibers: Vec<Vec<String>>,
    maps: Vec<(String, String, String, String)>,
    relations: BTreeMap<String, usize>,
    holds: Vec<(String, String, Vec<String>)>,
    functions: BTreeMap<String, usize>,
    values: Vec<(String, String, Vec<String>, String)>,
    constants: Vec<(String, String, String)>,
    sections: Vec<(String, Vec<(String, String)>)>,
    error: Option<SheafError>,
}

impl SheafBuilder {
    pub fn new(site: Site) -> Self {
        let n = site.len();
        SheafBuilder {
            site,
            fibers: vec![Vec::new(); n],
            maps: Vec::new(),
            relations: BTreeMap::new(),
            holds: Vec::new(),
            functions: BTreeMap::new(),
            values: Vec::new(),
            constants: Vec::new(),
            sections: Vec::new(),
            error: None,
        }
    }

    fn fail(&mut self, e: SheafError) {
        if self.error.is_none() {
            self.error = Some(e);
        }
    }

    fn node(&mut self, name: &str) -> Option<NodeId> {
        match self.site.node(name) {
            Ok(x) => Some(x),
            Err(e) => {
                self.fail(e.into());
                None
            }
        }
    }

    /// Appends elements to the fiber over `node`.
    pub fn fiber<S: AsRef<str>>(mut self, node: &str, elements: &[S]) -> Self {
        if let Some(x) = self.node(node) {
            for e in elements {
                let e = e.as_ref().to_string();
                if self.fibers[x].contains(&e) {
                    self.fail(SheafError::DuplicateElement {
                        node: node.to_string(),
                        element: e,
                    });
                } else {
                    self.fibers[x].push(e);
                }
            }
        }
        self
    }

    pub fn map(mut self, from: &str, to: &str, pairs: &[(&str, &str)]) -> Self {
        for (a, b) in pairs {
            self.maps.push((
                from.to_string(),
                to.to_string(),
                a.to_string(),
                b.to_string(),
            ));
        }
        self
    }

    pub fn relation(mut self, name: &str, arity: usize) -> Self {
        self.declare(name, arity, true);
        self
    }

    pub fn function(mut self, name: &str, arity: usize) -> Self {
        self.declare(name, arity, false);
        self
    }

    fn declare(&mut self, name: &str, arity: usize, relation: bool) {
        let (mine, other) = if relation {
            (&self.relations, &self.functions)
        } else {
            (&self.functions, &self.relations)
        };
        let clash = other.contains_key(name)
            || self.constants.iter().any(|(c, _, _)| c == name)
            || mine.get(name).is_some_and(|&a| a != arity)
            || arity == 0;
        if clash {
            self.fail(SheafError::SymbolClash(name.to_string()));
        } else if relation {
            self.relations.insert(name.to_string(), arity);
        } else {
            self.functions.insert(name.to_string(), arity);
        }
    }

    /// Adds a tuple to a declared relation at `node`.
    pub fn holds(mut self, relation: &str, node: &str, tuple: &[&str]) -> Self {
        self.holds.push((
            relation.to_string(),
            node.to_string(),
            tuple.iter().map(|s| s.to_string()).collect(),
        ));
        self
    }

    pub fn value(mut self, function: &str, node: &str, args: &[&str], result: &str) -> Self {
        self.values.push((
            function.to_string(),
            node.to_string(),
            args.iter().map(|s| s.to_string()).collect(),
            result.to_string(),
        ));
        self
    }

    pub fn constant(mut self, name: &str, node: &str, element: &str) -> Self {
        if self.relations.contains_key(name) || self.functions.contains_key(name) {
            self.fail(SheafError::SymbolClash(name.to_string()));
        }
        self.constants
            .push((name.to_string(), node.to_string(), element.to_string()));
        self
    }

    pub fn section(mut self, name: &str, values: &[(&str, &str)]) -> Self {
        self.sections.push((
            name.to_string(),
            values
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        ));
        self
    }

    fn elem(&self, x: NodeId, name: &str) -> Result<usize, SheafError> {
        self.fibers[x]
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| SheafError::UnknownElement {
                node: self.site.name(x).to_string(),
                element: name.to_string(),
            })
    }

    /// Builds and validates.
    pub fn build(self) -> Result<SheafOfStructures, SheafError> {
        let s = self.build_unchecked()?;
        let report = s.validate();
        if report.is_empty() {
            Ok(s)
        } else {
            Err(SheafError::Invalid(report))
        }
    }

    /// Builds without running [`SheafOfStructures::validate`]. Name errors
    /// are still reported.
    pub fn build_unchecked(self) -> Result<SheafOfStructures, SheafError> {
        if let Some(e) = self.error.clone() {
            return Err(e);
        }
        let site = &self.site;
        let n = site.len();
        let mut trans: Vec<Vec<Option<Vec<Option<usize>>>>> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| site.leq(x, y).then(|| vec![None; self.fibers[x].len()]))
                    .collect()
            })
            .collect();
        for (from, to, a, b) in &self.maps {
            let x = site.node(from)?;
            let y = site.node(to)?;
            if !site.leq(x, y) {
                return Err(SheafError::NotBelow(from.clone(), to.clone()));
            }
            let a = self.elem(x, a)?;
            let b = self.elem(y, b)?;
            trans[x][y].as_mut().expect("x <= y")[a] = Some(b);
        }
        for x in 0..n {
            let row = trans[x][x].as_mut().expect("reflexive");
            for (a, slot) in row.iter_mut().enumerate() {
                slot.get_or_insert(a);
            }
        }
        let same_name = |trans: &mut Vec<Vec<Option<Vec<Option<usize>>>>>, covers_only: bool| {
            for x in 0..n {
                for y in site.strictly_above(x).iter() {
                    let is_cover = site
                        .strictly_above(x)
                        .iter()
                        .all(|z| z == y || !site.leq(z, y) || site.leq(y, z));
                    if covers_only && !is_cover {
                        continue;
                    }
                    for a in 0..self.fibers[x].len() {
                        let row = trans[x][y].as_mut().expect("x <= y");
                        if row[a].is_none() {
                            row[a] = self.fibers[y].iter().position(|e| *e == self.fibers[x][a]);
                        }
                    }
                }
            }
        };
        compose_fixpoint(site, &mut trans);
        same_name(&mut trans, true);
        compose_fixpoint(site, &mut trans);
        same_name(&mut trans, false);

        let mut relations = BTreeMap::new();
        for (r, &arity) in &self.relations {
            relations.insert(
                r.clone(),
                RelationData {
                    arity,
                    tuples: vec![BTreeSet::new(); n],
                },
            );
        }
        for (r, node, tuple) in &self.holds {
            let x = site.node(node)?;
            let d = relations
                .get_mut(r)
                .ok_or_else(|| SheafError::UnknownSymbol(r.clone()))?;
            if tuple.len() != d.arity {
                return Err(SheafError::Arity {
                    symbol: r.clone(),
                    expected: d.arity,
                    found: tuple.len(),
                });
            }
            let t = tuple
                .iter()
                .map(|e| self.elem(x, e))
                .collect::<Result<Vec<_>, _>>()?;
            d.tuples[x].insert(t);
        }
        let mut functions = BTreeMap::new();
        for (f, &arity) in &self.functions {
            functions.insert(
                f.clone(),
                FunctionData {
                    arity,
                    tables: vec![BTreeMap::new(); n],
                },
            );
        }
        for (f, node, args, result) in &self.values {
            let x = site.node(node)?;
            let d = functions
                .get_mut(f)
                .ok_or_else(|| SheafError::UnknownSymbol(f.clone()))?;
            if args.len() != d.arity {
                return Err(SheafError::Arity {
                    symbol: f.clone(),
                    expected: d.arity,
                    found: args.len(),
                });
            }
            let t = args
                .iter()
                .map(|e| self.elem(x, e))
                .collect::<Result<Vec<_>, _>>()?;
            let v = self.elem(x, result)?;
            d.tables[x].insert(t, v);
        }
        let mut constants: BTreeMap<String, Vec<Option<usize>>> = BTreeMap::new();
        for (c, node, e) in &self.constants {
            let x = site.node(node)?;
            let v = self.elem(x, e)?;
            constants.entry(c.clone()).or_insert_with(|| vec![None; n])[x] = Some(v);
        }
        let mut sheaf = SheafOfStructures {
            site: self.site.clone(),
            fibers: self.fibers.clone(),
            trans,
            relations,
            functions,
            constants,
            sections: BTreeMap::new(),
        };
        for (name, vals) in &self.sections {
            let mut pairs = Vec::new();
            for (node, e) in vals {
                let x = site.node(node)?;
                pairs.push((x, self.elem(x, e)?));
            }
            let mut values = vec![None; n];
            let mut dom = crate::site::NodeSet::EMPTY;
            for &(x, a) in &pairs {
                values[x] = Some(a);
                dom.insert(x);
            }
            let domain = site
                .open(dom)
                .map_err(|_| SheafError::SectionDomain(site.show(dom)))?;
            sheaf
                .sections
                .insert(name.clone(), Section { domain, values });
        }
        Ok(sheaf)
    }
}

fn compose_fixpoint(site: &Site, trans: &mut [Vec<Option<Vec<Option<usize>>>>]) {
    let n = site.len();
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in site.strictly_above(x).iter() {
                for z in site.strictly_above(x).iter() {
                    if z == y || !site.leq(z, y) {
                        continue;
                    }
                    let len = trans[x][y].as_ref().map_or(0, Vec::len);
                    for a in 0..len {
                        if trans[x][y].as_ref().expect("x <= y")[a].is_some() {
                            continue;
                        }
                        let via = trans[x][z]
                            .as_ref()
                            .and_then(|m| m[a])
                            .and_then(|b| trans[z][y].as_ref().and_then(|m| m[b]));
                        if let Some(c) = via {
                            trans[x][y].as_mut().expect("x <= y")[a] = Some(c);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn s2_is_valid() {
        assert!(fixtures::s2().validate().is_empty());
    }

    #[test]
    fn openness_violation() {
        let s = SheafBuilder::new(fixtures::p2())
            .fiber("p", &["0"])
            .fiber("q", &["0"])
            .relation("R", 1)
            .holds("R", "p", &["0"])
            .build_unchecked()
            .unwrap();
        let report = s.validate();
        assert_eq!(
            report,
            vec![Violation::RelationOpenness {
                relation: "R".into(),
                from: "p".into(),
                to: "q".into(),
                tuple: vec!["0".into()],
            }]
        );
    }

    #[test]
    fn missing_transition() {
        let s = SheafBuilder::new(fixtures::p2())
            .fiber("p", &["0"])
            .fiber("q", &["1"])
            .build_unchecked()
            .unwrap();
        assert!(matches!(
            s.validate().as_slice(),
            [Violation::MissingTransition { .. }]
        ));
    }

    #[test]
    fn principal_sections() {
        let s = fixtures::s2();
        let site = s.site();
        let p = site.node("p").unwrap();
        let q = site.node("q").unwrap();
        let sp = s.principal_section(p, 0).unwrap();
        assert_eq!(s.show_section(&sp), "{p->0, q->0}");
        assert_eq!(sp, *s.section("s").unwrap());
        let sq = s.principal_section(q, 0).unwrap();
        assert_eq!(s.show_section(&sq), "{q->0}");
        assert!(matches!(
            s.principal_section(p, 1),
            Err(SheafError::NotInFiber { .. })
        ));
    }

    #[test]
    fn restriction() {
        let s = fixtures::s2();
        let site = s.site();
        let sigma = s.section("s").unwrap();
        let q = site.open_of(&["q"]).unwrap();
        let r = sigma.restrict(q).unwrap();
        assert_eq!(s.show_section(&r), "{q->0}");
        assert_eq!(sigma.restrict(site.whole()).unwrap(), *sigma);
        assert!(r.restrict(site.whole()).is_err());
    }

    #[test]
    fn section_structures() {
        let s = fixtures::s2();
        let site = s.site();
        let whole = s.sections_structure(site.whole()).unwrap();
        assert_eq!(whole.structure.len(), 1);
        assert!(whole.structure.relation("R").unwrap().is_empty());
        let empty = s.sections_structure(OpenSet::EMPTY).unwrap();
        assert_eq!(empty.structure.len(), 1);
        assert!(empty.structure.relation("R").unwrap().contains(&vec![0]));
        let q = s.sections_structure(site.open_of(&["q"]).unwrap()).unwrap();
        assert_eq!(q.structure.labels(), &["{q->0}".to_string()]);
        assert!(q.structure.relation("R").unwrap().contains(&vec![0]));
    }

    #[test]
    fn sections_glue_from_principal_germs() {
        for s in fixtures::all_sheaves() {
            let site = s.site();
            for u in site.enumerate_opens(8).unwrap() {
                for sec in s.sections_on(u).unwrap() {
                    for x in u.iter() {
                        let germ = s.principal(x, sec.at(x));
                        assert!(germ.compatible_with(&sec));
                        assert_eq!(sec.restrict(germ.domain()).unwrap(), germ);
                    }
                }
            }
        }
    }

    #[test]
    fn implied_and_composed_maps() {
        let site = Site::from_relation(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let s = SheafBuilder::new(site)
            .fiber("a", &["x"])
            .fiber("b", &["y"])
            .fiber("c", &["z", "x"])
            .map("a", "b", &[("x", "y")])
            .map("b", "c", &[("y", "z")])
            .build()
            .unwrap();
        let a = s.site().node("a").unwrap();
        let c = s.site().node("c").unwrap();
        // the composite wins over the same-named element
        assert_eq!(s.transition(a, c, 0), Some(0));
    }

    #[test]
    fn tuples() {
        let mut seen = Vec::new();
        for_each_tuple(2, 2, |t| seen.push(t.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let mut count = 0;
        for_each_tuple(0, 0, |_| count += 1);
        assert_eq!(count, 1);
        for_each_tuple(0, 1, |_| count += 1);
        assert_eq!(count, 1);
    }
}

//! Set-theoretic axioms checked over a bounded level of the hierarchy.
//!
//! Existence, extensionality and the foundation variant are closed
//! formulas handed to the evaluator at every node. The constructor axioms
//! have witnesses that may lie above the level, so each explicit witness
//! is checked against its defining biconditional instead: at every node
//! `q` and every candidate member `w`, `q ⊩ w ∈ witness` must agree with
//! the forcing of the defining condition.

use std::fmt;
use std::str::FromStr;

use super::{in_sheaf, Universe, VSet, VSetError, VSheaf};
use crate::logic::{parse_formula, Formula};
use crate::site::NodeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Existence,
    Extensionality,
    /// `¬∃x ¬(∃y (y ∈ x) → ∃y (y ∈ x ∧ ¬∃z (z ∈ x ∧ z ∈ y)))`.
    FoundationVariant,
    Pairing,
    Union,
    Power,
    Comprehension,
    Replacement,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::Existence,
        Axiom::Extensionality,
        Axiom::FoundationVariant,
        Axiom::Pairing,
        Axiom::Union,
        Axiom::Power,
        Axiom::Comprehension,
        Axiom::Replacement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Existence => "existence",
            Axiom::Extensionality => "extensionality",
            Axiom::FoundationVariant => "foundation",
            Axiom::Pairing => "pairing",
            Axiom::Union => "union",
            Axiom::Power => "power",
            Axiom::Comprehension => "comprehension",
            Axiom::Replacement => "replacement",
        }
    }

    /// The closed formula, for the three axioms checked directly.
    pub fn formula_text(self) -> Option<&'static str> {
        match self {
            Axiom::Existence => Some("exists x. forall y. ~In(y, x)"),
            Axiom::Extensionality => {
                Some("forall x. forall y. (forall z. In(z, x) <-> In(z, y)) -> x = y")
            }
            Axiom::FoundationVariant => Some(
                "~(exists x. ~((exists y. In(y, x)) -> exists y. In(y, x) & ~(exists z. In(z, x) & In(z, y))))",
            ),
            _ => None,
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = VSetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| VSetError::Precondition(format!("unknown axiom {s}")))
    }
}

/// Outcome of [`axiom_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub alpha: usize,
    /// Nodes, or witness/node/member combinations, examined.
    pub checked: usize,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Checker<'a> {
    u: &'a mut Universe,
    sheaf: VSheaf,
    checked: usize,
    failures: Vec<String>,
}

impl Checker<'_> {
    fn parse(&self, text: &str) -> Result<Formula, VSetError> {
        parse_formula(text, &self.sheaf.sheaf().signature())
            .map_err(|e| VSetError::Precondition(e.to_string()))
    }

    fn forces(&self, q: NodeId, phi: &Formula, binds: &[(&str, VSet)]) -> Result<bool, VSetError> {
        self.sheaf.forces(self.u, q, phi, binds)
    }

    /// Compares `q ⊩ w ∈ witness` with `q ⊩ condition(w)` at every node
    /// above the base and every carrier element `w`.
    fn biconditional(
        &mut self,
        what: &str,
        witness: VSet,
        condition: &Formula,
        params: &[(&str, VSet)],
    ) -> Result<(), VSetError> {
        let p = self.u.base(witness);
        let site = self.u.site().clone();
        for q in site.up(p).iter() {
            let carrier = self.sheaf.carrier(q).to_vec();
            for &g in self.u.graph(witness, q).expect("q above base") {
                if carrier.binary_search(&g).is_err() {
                    self.failures.push(format!(
                        "{what}: member {} at {} is outside the level",
                        self.u.label(g),
                        site.name(q)
                    ));
                }
            }
            for &w in &carrier {
                self.checked += 1;
                let member = self.u.membership(w, witness, q)?;
                let mut binds = params.to_vec();
                binds.push(("w", w));
                if member != self.forces(q, condition, &binds)? {
                    self.failures.push(format!(
                        "{what}: at {} membership of {} is {member} but the condition is not",
                        site.name(q),
                        self.u.label(w)
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Checks one axiom over `V_alpha`.
pub fn axiom_check(u: &mut Universe, alpha: usize, axiom: Axiom) -> Result<AxiomReport, VSetError> {
    let sheaf = in_sheaf(u, alpha)?;
    let mut c = Checker {
        u,
        sheaf,
        checked: 0,
        failures: Vec::new(),
    };
    let site = c.u.site().clone();
    let level: Vec<Vec<VSet>> = site.nodes().map(|p| c.sheaf.carrier(p).to_vec()).collect();
    if let Some(text) = axiom.formula_text() {
        let phi = c.parse(text)?;
        for q in site.nodes() {
            c.checked += 1;
            if !c.forces(q, &phi, &[])? {
                c.failures.push(format!("not forced at {}", site.name(q)));
            }
        }
    }
    match axiom {
        Axiom::Existence | Axiom::Extensionality | Axiom::FoundationVariant => {}
        Axiom::Pairing => {
            let cond = c.parse("w = x | w = y")?;
            for p in site.nodes() {
                for &x in &level[p] {
                    for &y in &level[p] {
                        let z = c.u.pair_set(x, y)?;
                        c.biconditional("pairing", z, &cond, &[("x", x), ("y", y)])?;
                    }
                }
            }
        }
        Axiom::Union => {
            let cond = c.parse("exists v. In(v, a) & In(w, v)")?;
            for p in site.nodes() {
                for &a in &level[p] {
                    let z = c.u.union_set(a)?;
                    c.biconditional("union", z, &cond, &[("a", a)])?;
                }
            }
        }
        Axiom::Power => {
            let cond = c.parse("forall v. In(v, w) -> In(v, a)")?;
            for p in site.nodes() {
                for &a in &level[p] {
                    let z = c.u.power_object(a)?;
                    c.biconditional("power", z, &cond, &[("a", a)])?;
                }
            }
        }
        Axiom::Comprehension => {
            let bodies = [
                ("exists v. In(v, x)", "exists v. In(v, w)"),
                ("~(exists v. In(v, x))", "~(exists v. In(v, w))"),
                (
                    "exists v. In(v, x) & ~(exists t. In(t, v))",
                    "exists v. In(v, w) & ~(exists t. In(t, v))",
                ),
            ];
            for (body, at_w) in bodies {
                let phi = c.parse(body)?;
                let cond = c.parse(&format!("In(w, a) & ({at_w})"))?;
                for p in site.nodes() {
                    for &a in &level[p] {
                        let z = c.u.comprehension_set(&c.sheaf, a, "x", &phi, &[])?;
                        c.biconditional("comprehension", z, &cond, &[("a", a)])?;
                    }
                }
            }
        }
        Axiom::Replacement => {
            let phi = c.parse("exists v. In(v, x) & In(v, y)")?;
            let cond = c.parse("exists x. In(x, a) & (exists v. In(v, x) & In(v, w))")?;
            for p in site.nodes() {
                for &a in &level[p] {
                    let z = c.u.replacement_set(&c.sheaf, a, "x", "y", &phi)?;
                    c.biconditional("replacement", z, &cond, &[("a", a)])?;
                }
            }
        }
    }
    Ok(AxiomReport {
        axiom,
        alpha,
        checked: c.checked,
        failures: c.failures,
    })
}

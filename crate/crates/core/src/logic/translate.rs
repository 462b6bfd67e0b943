//! Double-negation translations.

use super::syntax::Formula;

/// Gödel–Gentzen negative translation: atoms, `|` and `exists` are
/// prefixed with `~~`; the other connectives are translated
/// homomorphically.
///
/// ```
/// use sheaf_logic::logic::{goedel, parse_formula, Signature};
///
/// let sig = Signature::new().with_relation("R", 1);
/// let f = parse_formula("exists x. R(x)", &sig).unwrap();
/// assert_eq!(goedel(&f).to_string(), "~~(exists x. ~~R(x))");
/// ```
pub fn goedel(f: &Formula) -> Formula {
    match f {
        Formula::Eq(..) | Formula::Rel(..) => Formula::not_not(f.clone()),
        Formula::Not(a) => Formula::not(goedel(a)),
        Formula::And(a, b) => Formula::and(goedel(a), goedel(b)),
        Formula::Or(a, b) => Formula::not_not(Formula::or(goedel(a), goedel(b))),
        Formula::Implies(a, b) => Formula::implies(goedel(a), goedel(b)),
        Formula::Exists(v, a) => Formula::not_not(Formula::exists(v, goedel(a))),
        Formula::Forall(v, a) => Formula::forall(v, goedel(a)),
    }
}

/// Replaces every subformula `forall x. p` by `forall x. ~~p*`, innermost
/// first.
pub fn ac_star(f: &Formula) -> Formula {
    match f {
        Formula::Eq(..) | Formula::Rel(..) => f.clone(),
        Formula::Not(a) => Formula::not(ac_star(a)),
        Formula::And(a, b) => Formula::and(ac_star(a), ac_star(b)),
        Formula::Or(a, b) => Formula::or(ac_star(a), ac_star(b)),
        Formula::Implies(a, b) => Formula::implies(ac_star(a), ac_star(b)),
        Formula::Exists(v, a) => Formula::exists(v, ac_star(a)),
        Formula::Forall(v, a) => Formula::forall(v, Formula::not_not(ac_star(a))),
    }
}

/// True when every atom, `|` and `exists` in `f` sits directly under a
/// double negation. Holds for every output of [`goedel`].
pub fn is_negative(f: &Formula) -> bool {
    fn walk(f: &Formula, guarded: bool) -> bool {
        match f {
            Formula::Eq(..) | Formula::Rel(..) => guarded,
            Formula::Or(a, b) => guarded && walk(a, false) && walk(b, false),
            Formula::Exists(_, a) => guarded && walk(a, false),
            Formula::Not(a) => match &**a {
                Formula::Not(inner) => walk(inner, true) || walk(a, false),
                _ => walk(a, false),
            },
            Formula::And(a, b) | Formula::Implies(a, b) => walk(a, false) && walk(b, false),
            Formula::Forall(_, a) => walk(a, false),
        }
    }
    walk(f, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Signature};

    fn sig() -> Signature {
        Signature::new().with_relation("R", 1).with_relation("S", 2)
    }

    fn p(s: &str) -> Formula {
        parse_formula(s, &sig()).unwrap()
    }

    #[test]
    fn goedel_examples() {
        assert_eq!(goedel(&p("R(x)")), p("~~R(x)"));
        assert_eq!(goedel(&p("R(x) & R(y)")), p("~~R(x) & ~~R(y)"));
        assert_eq!(goedel(&p("exists x. R(x)")), p("~~(exists x. ~~R(x))"));
        assert_eq!(goedel(&p("R(x) | R(y)")), p("~~(~~R(x) | ~~R(y))"));
        assert_eq!(goedel(&p("forall x. ~R(x)")), p("forall x. ~~~R(x)"));
    }

    #[test]
    fn ac_star_examples() {
        assert_eq!(ac_star(&p("forall x. R(x)")), p("forall x. ~~R(x)"));
        assert_eq!(ac_star(&p("R(x)")), p("R(x)"));
        assert_eq!(
            ac_star(&p("forall x. forall y. S(x,y)")),
            p("forall x. ~~(forall y. ~~S(x,y))")
        );
    }

    #[test]
    fn negative_form() {
        for s in [
            "R(x)",
            "exists x. R(x) | ~R(x)",
            "forall x. R(x) -> exists y. S(x,y)",
        ] {
            let f = p(s);
            assert!(is_negative(&goedel(&f)), "{s}");
        }
        assert!(!is_negative(&p("R(x)")));
        assert!(!is_negative(&p("~~(R(x) | R(y))")));
    }
}

//! Sheaves of first-order structures over finite sites: point forcing,
//! open-set forcing, Heyting truth values, generic-filter collapse, and a
//! bounded cumulative hierarchy of variable sets.
//!
//! ```
//! use sheaf_logic::fixtures;
//! use sheaf_logic::forcing::{truth_value, Environment};
//! use sheaf_logic::logic::parse_formula;
//!
//! let s = fixtures::s2();
//! let env = Environment::named(&s, ["s".to_string()]);
//! let lem = parse_formula("R(s) | ~R(s)", &s.signature()).unwrap();
//! let v = truth_value(&s, s.site().whole(), &lem, &env).unwrap();
//! assert_eq!(s.site().show(v), "{q}");
//! ```

pub mod cli;
pub mod fixtures;
pub mod forcing;
pub mod gen;
pub mod generic;
pub mod logic;
pub mod sheaf;
pub mod site;
pub mod structure;
pub mod vsets;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sites.md")]
    mod sites {}
    #[doc = include_str!("../../../book/src/sheaves.md")]
    mod sheaves {}
    #[doc = include_str!("../../../book/src/formulas.md")]
    mod formulas {}
    #[doc = include_str!("../../../book/src/forcing.md")]
    mod forcing {}
    #[doc = include_str!("../../../book/src/generic.md")]
    mod generic {}
    #[doc = include_str!("../../../book/src/vsets.md")]
    mod vsets {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

//! Small named sites and sheaves used throughout the tests, the book and
//! the CLI examples.

use crate::sheaf::{SheafBuilder, SheafOfStructures};
use crate::site::Site;

/// One node `m`.
pub fn p1() -> Site {
    Site::from_relation(&["m"], &[]).expect("fixture")
}

/// The chain `p < q`.
pub fn p2() -> Site {
    Site::from_relation(&["p", "q"], &[("p", "q")]).expect("fixture")
}

/// `a < b`, `a < c`.
pub fn pv() -> Site {
    Site::from_relation(&["a", "b", "c"], &[("a", "b"), ("a", "c")]).expect("fixture")
}

/// Two nodes below each other: a preorder that is not a partial order.
pub fn cycle() -> Site {
    Site::from_relation(&["u", "v"], &[("u", "v"), ("v", "u")]).expect("fixture")
}

/// Over `p2`: one element `0` in each fiber, `R` false at `p` and true at
/// `q`, and the global section `s`.
pub fn s2() -> SheafOfStructures {
    SheafBuilder::new(p2())
        .fiber("p", &["0"])
        .fiber("q", &["0"])
        .relation("R", 1)
        .holds("R", "q", &["0"])
        .section("s", &[("p", "0"), ("q", "0")])
        .build()
        .expect("fixture")
}

/// Over `p1`: fiber `{0, 1}` with `R = {0}`.
pub fn s1() -> SheafOfStructures {
    SheafBuilder::new(p1())
        .fiber("m", &["0", "1"])
        .relation("R", 1)
        .holds("R", "m", &["0"])
        .build()
        .expect("fixture")
}

/// Over `pv`: `0` at `a` and `b`, `{0, 1}` at `c`; `a` sends `0` to `0`.
/// `R` holds of `0` at `b` and of `1` at `c`.
pub fn sv() -> SheafOfStructures {
    SheafBuilder::new(pv())
        .fiber("a", &["0"])
        .fiber("b", &["0"])
        .fiber("c", &["0", "1"])
        .relation("R", 1)
        .holds("R", "b", &["0"])
        .holds("R", "c", &["1"])
        .build()
        .expect("fixture")
}

/// Over `pv`, for witness gluing: `W` holds everywhere, the fibers at `b`
/// and `c` are `{0, 1}` and the only element at `a` goes to `1` in both.
/// Gluing witnesses for `exists v. W(v)` from the top picks `0` at `b` and
/// `c`, which no germ at `a` extends.
pub fn sv_glue() -> SheafOfStructures {
    SheafBuilder::new(pv())
        .fiber("a", &["0"])
        .fiber("b", &["0", "1"])
        .fiber("c", &["0", "1"])
        .map("a", "b", &[("0", "1")])
        .map("a", "c", &[("0", "1")])
        .relation("W", 1)
        .holds("W", "a", &["0"])
        .holds("W", "b", &["0"])
        .holds("W", "b", &["1"])
        .holds("W", "c", &["0"])
        .holds("W", "c", &["1"])
        .build()
        .expect("fixture")
}

/// Over `p2` with an empty fiber at `p`.
pub fn se() -> SheafOfStructures {
    SheafBuilder::new(p2())
        .fiber("q", &["0"])
        .relation("R", 1)
        .holds("R", "q", &["0"])
        .build()
        .expect("fixture")
}

/// Over `p2`, with a unary function `f`, a constant `c` and a binary
/// relation `E`. The fiber at `q` has one element more than at `p`.
pub fn sf() -> SheafOfStructures {
    SheafBuilder::new(p2())
        .fiber("p", &["a", "b"])
        .fiber("q", &["a", "b", "c"])
        .function("f", 1)
        .value("f", "p", &["a"], "b")
        .value("f", "p", &["b"], "a")
        .value("f", "q", &["a"], "b")
        .value("f", "q", &["b"], "a")
        .value("f", "q", &["c"], "c")
        .constant("k", "p", "a")
        .constant("k", "q", "a")
        .relation("E", 2)
        .holds("E", "p", &["a", "a"])
        .holds("E", "q", &["a", "a"])
        .holds("E", "q", &["b", "b"])
        .holds("E", "q", &["c", "a"])
        .build()
        .expect("fixture")
}

/// Over `cycle`: isomorphic fibers `{0, 1}` and `{x, y}`.
pub fn sc() -> SheafOfStructures {
    SheafBuilder::new(cycle())
        .fiber("u", &["0", "1"])
        .fiber("v", &["x", "y"])
        .map("u", "v", &[("0", "x"), ("1", "y")])
        .map("v", "u", &[("x", "0"), ("y", "1")])
        .relation("R", 1)
        .holds("R", "u", &["0"])
        .holds("R", "v", &["x"])
        .build()
        .expect("fixture")
}

/// Every fixture sheaf.
pub fn all_sheaves() -> Vec<SheafOfStructures> {
    vec![s1(), s2(), sv(), sv_glue(), se(), sf(), sc()]
}

//! First-order syntax: signatures, terms, formulas, a text grammar and the
//! double-negation translations.

mod parser;
mod syntax;
mod translate;

pub use parser::{parse_formula, parse_formula_infer, parse_term};
pub use syntax::{Formula, Signature, SymbolKind, Term};
pub use translate::{ac_star, goedel, is_negative};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("unexpected character `{ch}` at offset {pos}")]
    Lexical { pos: usize, ch: char },
    #[error("unexpected {found} at offset {pos}, expected {expected}")]
    UnexpectedToken {
        pos: usize,
        found: String,
        expected: String,
    },
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEnd(String),
    #[error("`{symbol}` takes {expected} argument(s), found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` is a {kind} and cannot be used here")]
    Misuse { symbol: String, kind: &'static str },
    #[error("symbol `{0}` declared with two different kinds or arities")]
    SymbolClash(String),
    #[error("symbol `{0}` must have arity at least 1")]
    ZeroArity(String),
}

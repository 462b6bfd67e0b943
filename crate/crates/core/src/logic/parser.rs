//! Recursive-descent parser for the formula grammar.
//!
//! Precedence from loosest to tightest: quantifiers, `<->`, `->` (right
//! associative), `|`, `&`, `~`, atoms. A quantifier body extends as far
//! right as possible.

use std::collections::BTreeSet;

use super::syntax::{fresh_name, Formula, Signature, SymbolKind, Term};
use super::LogicError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Neq,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Forall,
    Exists,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Forall => "`forall`".into(),
            Tok::Exists => "`exists`".into(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let two = |it: &mut std::iter::Peekable<std::str::CharIndices>, next: char| {
            let mut look = it.clone();
            look.next();
            matches!(look.peek(), Some(&(_, n)) if n == next)
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '=' => Tok::Eq,
            '~' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Implies,
            '↔' => Tok::Iff,
            '∀' => Tok::Forall,
            '∃' => Tok::Exists,
            '≠' => Tok::Neq,
            '!' if two(&mut it, '=') => {
                it.next();
                Tok::Neq
            }
            '-' if two(&mut it, '>') => {
                it.next();
                Tok::Implies
            }
            '<' if text[pos..].starts_with("<->") => {
                it.next();
                it.next();
                Tok::Iff
            }
            c if is_ident_char(c) => {
                let mut end = pos;
                while let Some(&(i, c)) = it.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    end = i + c.len_utf8();
                    it.next();
                }
                let word = &text[pos..end];
                let tok = match word {
                    "forall" => Tok::Forall,
                    "exists" => Tok::Exists,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((pos, tok));
                continue;
            }
            c => return Err(LogicError::Lexical { pos, ch: c }),
        };
        it.next();
        out.push((pos, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    sig: &'a mut Signature,
    infer: bool,
    bound: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn error(&self, expected: &str) -> LogicError {
        match self.toks.get(self.pos) {
            Some((pos, t)) => LogicError::UnexpectedToken {
                pos: *pos,
                found: t.describe(),
                expected: expected.to_string(),
            },
            None => LogicError::UnexpectedEnd(expected.to_string()),
        }
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Forall) | Some(Tok::Exists) => self.quantified(),
            _ => self.iff(),
        }
    }

    fn quantified(&mut self) -> Result<Formula, LogicError> {
        let universal = matches!(self.next(), Some(Tok::Forall));
        let mut vars = Vec::new();
        while let Some(Tok::Ident(v)) = self.peek() {
            vars.push(v.clone());
            self.pos += 1;
        }
        if vars.is_empty() {
            return Err(self.error("a bound variable"));
        }
        self.expect(Tok::Dot, "`.` after bound variables")?;
        let depth = self.bound.len();
        self.bound.extend(vars.iter().cloned());
        let body = self.formula();
        self.bound.truncate(depth);
        let mut body = body?;
        for v in vars.iter().rev() {
            body = if universal {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            };
        }
        Ok(body)
    }

    fn iff(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.implication()?;
        if self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = match self.peek() {
                Some(Tok::Forall) | Some(Tok::Exists) => self.quantified()?,
                _ => self.implication()?,
            };
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Forall) | Some(Tok::Exists) => self.quantified(),
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, LogicError> {
        if let (Some(Tok::Ident(name)), Some(Tok::LParen)) = (self.peek(), self.peek_at(1)) {
            let name = name.clone();
            let is_relation = match self.sig.kind(&name) {
                Some(SymbolKind::Relation(_)) => true,
                Some(_) => false,
                None if self.infer => !self.followed_by_equality(),
                None => return Err(LogicError::UnknownSymbol(name)),
            };
            if is_relation {
                self.pos += 2;
                let args = self.arguments()?;
                self.check_arity(&name, args.len(), true)?;
                return Ok(Formula::Rel(name, args));
            }
        }
        let lhs = self.term()?;
        match self.next() {
            Some(Tok::Eq) => Ok(Formula::Eq(lhs, self.term()?)),
            Some(Tok::Neq) => Ok(Formula::not(Formula::Eq(lhs, self.term()?))),
            _ => {
                self.pos -= 1;
                Err(self.error("`=` after a term"))
            }
        }
    }

    // Looks past a balanced `name(...)` for `=`, so that an unknown symbol in
    // inference mode becomes a function when it sits in an equation.
    fn followed_by_equality(&self) -> bool {
        let mut depth = 0usize;
        let mut k = self.pos + 1;
        while let Some((_, t)) = self.toks.get(k) {
            match t {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        return matches!(
                            self.toks.get(k + 1),
                            Some((_, Tok::Eq)) | Some((_, Tok::Neq))
                        );
                    }
                }
                _ => {}
            }
            k += 1;
        }
        false
    }

    fn arguments(&mut self) -> Result<Vec<Term>, LogicError> {
        let mut args = vec![self.term()?];
        loop {
            match self.next() {
                Some(Tok::Comma) => args.push(self.term()?),
                Some(Tok::RParen) => return Ok(args),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("`,` or `)`"));
                }
            }
        }
    }

    fn check_arity(&mut self, name: &str, found: usize, relation: bool) -> Result<(), LogicError> {
        match self.sig.kind(name) {
            Some(SymbolKind::Relation(a)) | Some(SymbolKind::Function(a)) if a != found => {
                Err(LogicError::ArityMismatch {
                    symbol: name.to_string(),
                    expected: a,
                    found,
                })
            }
            Some(_) => Ok(()),
            None if relation => self.sig.add_relation(name, found),
            None => self.sig.add_function(name, found),
        }
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let name = match self.next() {
            Some(Tok::Ident(name)) => name,
            _ => {
                self.pos -= 1;
                return Err(self.error("a term"));
            }
        };
        if self.peek() == Some(&Tok::LParen) {
            match self.sig.kind(&name) {
                Some(SymbolKind::Function(_)) => {}
                Some(SymbolKind::Relation(_)) => {
                    return Err(LogicError::Misuse {
                        symbol: name,
                        kind: "relation",
                    })
                }
                Some(SymbolKind::Constant) => {
                    return Err(LogicError::Misuse {
                        symbol: name,
                        kind: "constant",
                    })
                }
                None if self.infer => {}
                None => return Err(LogicError::UnknownSymbol(name)),
            }
            self.pos += 1;
            let args = self.arguments()?;
            self.check_arity(&name, args.len(), false)?;
            return Ok(Term::App(name, args));
        }
        if self.bound.contains(&name) {
            return Ok(Term::Var(name));
        }
        match self.sig.kind(&name) {
            Some(SymbolKind::Constant) => Ok(Term::Const(name)),
            Some(SymbolKind::Relation(_)) => Err(LogicError::Misuse {
                symbol: name,
                kind: "relation",
            }),
            Some(SymbolKind::Function(_)) => Err(LogicError::Misuse {
                symbol: name,
                kind: "function",
            }),
            None => Ok(Term::Var(name)),
        }
    }
}

fn run(text: &str, sig: &mut Signature, infer: bool) -> Result<Formula, LogicError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        sig,
        infer,
        bound: Vec::new(),
    };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.error("end of input"));
    }
    let constants: BTreeSet<String> = p.sig.constants().map(str::to_string).collect();
    Ok(rename_binders(&f, &constants))
}

/// Parses a formula against a fixed signature.
///
/// Free variables are allowed; use [`Formula::free_vars`] to list them.
/// Binders that shadow an enclosing binder, a free variable or a constant
/// are renamed apart.
///
/// ```
/// use sheaf_logic::logic::{parse_formula, Formula, Signature, Term};
///
/// let sig = Signature::new().with_constant("c");
/// let f = parse_formula("exists x. x = c", &sig).unwrap();
/// assert_eq!(f, Formula::exists("x", Formula::eq(Term::var("x"), Term::constant("c"))));
/// assert!(f.free_vars().is_empty());
/// ```
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, LogicError> {
    let mut sig = sig.clone();
    run(text, &mut sig, false)
}

/// Parses a formula, adding unknown relation and function symbols to `sig`
/// with the arity of their first use. Bare identifiers are variables.
pub fn parse_formula_infer(text: &str, sig: &mut Signature) -> Result<Formula, LogicError> {
    run(text, sig, true)
}

/// Parses a single term.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, LogicError> {
    let mut sig = sig.clone();
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        sig: &mut sig,
        infer: false,
        bound: Vec::new(),
    };
    let t = p.term()?;
    if p.pos < p.toks.len() {
        return Err(p.error("end of input"));
    }
    Ok(t)
}

fn rename_binders(f: &Formula, constants: &BTreeSet<String>) -> Formula {
    let mut avoid = f.all_vars();
    avoid.extend(constants.iter().cloned());
    let mut reserved = f.free_vars();
    reserved.extend(constants.iter().cloned());
    rename(f, &mut Vec::new(), &reserved, &mut avoid)
}

fn rename(
    f: &Formula,
    scope: &mut Vec<String>,
    reserved: &BTreeSet<String>,
    avoid: &mut BTreeSet<String>,
) -> Formula {
    match f {
        Formula::Eq(..) | Formula::Rel(..) => f.clone(),
        Formula::Not(a) => Formula::not(rename(a, scope, reserved, avoid)),
        Formula::And(a, b) => Formula::and(
            rename(a, scope, reserved, avoid),
            rename(b, scope, reserved, avoid),
        ),
        Formula::Or(a, b) => Formula::or(
            rename(a, scope, reserved, avoid),
            rename(b, scope, reserved, avoid),
        ),
        Formula::Implies(a, b) => Formula::implies(
            rename(a, scope, reserved, avoid),
            rename(b, scope, reserved, avoid),
        ),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let (name, body) = if scope.contains(v) || reserved.contains(v) {
                let fresh = fresh_name(v, avoid);
                avoid.insert(fresh.clone());
                let b = body.substitute(v, &Term::Var(fresh.clone()));
                (fresh, b)
            } else {
                (v.clone(), (**body).clone())
            };
            scope.push(name.clone());
            let body = rename(&body, scope, reserved, avoid);
            scope.pop();
            match f {
                Formula::Exists(..) => Formula::exists(&name, body),
                _ => Formula::forall(&name, body),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1() -> Signature {
        Signature::new().with_relation("R", 1)
    }

    #[test]
    fn spec_examples() {
        let f = parse_formula("forall x. R(x) -> R(x)", &r1()).unwrap();
        let rx = Formula::rel("R", vec![Term::var("x")]);
        assert_eq!(f, Formula::forall("x", Formula::implies(rx.clone(), rx)));
        assert_eq!(
            parse_formula("R(x,y)", &r1()),
            Err(LogicError::ArityMismatch {
                symbol: "R".into(),
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn precedence() {
        let sig = Signature::new()
            .with_relation("A", 1)
            .with_relation("B", 1)
            .with_relation("C", 1);
        let f = parse_formula("A(x) | B(x) & C(x) -> A(x) -> B(x)", &sig).unwrap();
        assert_eq!(f.to_string(), "A(x) | B(x) & C(x) -> A(x) -> B(x)");
        match f {
            Formula::Implies(l, r) => {
                assert!(matches!(*l, Formula::Or(..)));
                assert!(matches!(*r, Formula::Implies(..)));
            }
            _ => panic!("expected implication"),
        }
        let g = parse_formula("~A(x) & B(x)", &sig).unwrap();
        assert!(matches!(g, Formula::And(..)));
        let h = parse_formula("∀x. ¬A(x) ∨ B(x)", &sig).unwrap();
        assert_eq!(h.to_string(), "forall x. ~A(x) | B(x)");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_formula("R(x) $ R(y)", &r1()),
            Err(LogicError::Lexical { ch: '$', .. })
        ));
        assert_eq!(
            parse_formula("S(x)", &r1()),
            Err(LogicError::UnknownSymbol("S".into()))
        );
        assert!(matches!(
            parse_formula("R(x", &r1()),
            Err(LogicError::UnexpectedEnd(_))
        ));
        assert!(matches!(
            parse_formula("R(x) R(x)", &r1()),
            Err(LogicError::UnexpectedToken { .. })
        ));
        assert!(matches!(
            parse_formula("x = R", &r1()),
            Err(LogicError::Misuse { .. })
        ));
    }

    #[test]
    fn shadowing_is_renamed() {
        let f = parse_formula("R(x) & exists x. forall x. R(x)", &r1()).unwrap();
        let s = f.to_string();
        assert_eq!(s, "R(x) & (exists x1. forall x2. R(x2))");
        assert_eq!(f.free_vars().len(), 1);
        let sig = Signature::new().with_constant("c").with_relation("R", 1);
        let g = parse_formula("exists c. R(c)", &sig).unwrap();
        assert_eq!(g.to_string(), "exists c1. R(c1)");
    }

    #[test]
    fn inference_and_sugar() {
        let mut sig = Signature::new();
        let f = parse_formula_infer("forall x y. S(x,y) <-> f(x) = y", &mut sig).unwrap();
        assert_eq!(sig.relation_arity("S"), Some(2));
        assert_eq!(sig.function_arity("f"), Some(1));
        assert!(f.free_vars().is_empty());
        let g = parse_formula("x != y", &Signature::new()).unwrap();
        assert_eq!(g.to_string(), "~x = y");
        assert_eq!(parse_formula("~x = y", &Signature::new()).unwrap(), g);
    }
}

//! Line-oriented sheaf file format.
//!
//! ```text
//! use p2.site            # or inline `node` / `le` lines
//! sort p: 0
//! sort q: 0
//! map p q: 0 -> 0
//! rel R/1 p:
//! rel R q: (0)
//! fun f q: (0) -> 0
//! const c q: 0
//! section s: p->0 q->0
//! ```
//!
//! The `/n` arity suffix is needed only when no tuple fixes the arity.

use std::collections::BTreeMap;
use std::path::Path;

use super::{SheafBuilder, SheafError, SheafOfStructures};
use crate::site::{strip_comment, Site};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Open,
    Close,
    Comma,
    Arrow,
}

fn tokens(s: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut Vec<Tok>| {
        if !word.is_empty() {
            out.push(Tok::Word(std::mem::take(word)));
        }
    };
    let mut rest = s;
    while let Some(c) = rest.chars().next() {
        if rest.starts_with("->") {
            flush(&mut word, &mut out);
            out.push(Tok::Arrow);
            rest = &rest[2..];
            continue;
        }
        match c {
            '(' | ')' | ',' => {
                flush(&mut word, &mut out);
                out.push(match c {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    _ => Tok::Comma,
                });
            }
            c if c.is_whitespace() => flush(&mut word, &mut out),
            c => word.push(c),
        }
        rest = &rest[c.len_utf8()..];
    }
    flush(&mut word, &mut out);
    out
}

struct Line {
    no: usize,
    toks: Vec<Tok>,
    pos: usize,
}

impl Line {
    fn err(&self, message: impl Into<String>) -> SheafError {
        SheafError::Syntax {
            line: self.no,
            message: message.into(),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn skip_comma(&mut self) {
        if self.toks.get(self.pos) == Some(&Tok::Comma) {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> Result<String, SheafError> {
        match self.toks.get(self.pos) {
            Some(Tok::Word(w)) => {
                self.pos += 1;
                Ok(w.clone())
            }
            _ => Err(self.err("expected a name")),
        }
    }

    fn arrow(&mut self) -> Result<(), SheafError> {
        if self.toks.get(self.pos) == Some(&Tok::Arrow) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err("expected `->`"))
        }
    }

    /// `(a,b,...)` or a bare element (a 1-tuple).
    fn tuple(&mut self) -> Result<Vec<String>, SheafError> {
        if self.toks.get(self.pos) != Some(&Tok::Open) {
            return Ok(vec![self.word()?]);
        }
        self.pos += 1;
        let mut out = Vec::new();
        loop {
            match self.toks.get(self.pos) {
                Some(Tok::Close) => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::Word(w)) => {
                    out.push(w.clone());
                    self.pos += 1;
                }
                _ => return Err(self.err("unterminated tuple")),
            }
        }
    }
}

// `name` or `name/arity`.
fn symbol(raw: &str, line: usize) -> Result<(String, Option<usize>), SheafError> {
    match raw.split_once('/') {
        None => Ok((raw.to_string(), None)),
        Some((name, a)) => a
            .parse::<usize>()
            .map(|a| (name.to_string(), Some(a)))
            .map_err(|_| SheafError::Syntax {
                line,
                message: format!("bad arity in `{raw}`"),
            }),
    }
}

/// Parses a sheaf file and validates it. `base` resolves `use` paths.
pub fn parse_sheaf(text: &str, base: Option<&Path>) -> Result<SheafOfStructures, SheafError> {
    parse_builder(text, base)?.build()
}

/// Like [`parse_sheaf`] but skips validation, so that invalid files can be
/// reported on.
pub fn parse_sheaf_unchecked(
    text: &str,
    base: Option<&Path>,
) -> Result<SheafOfStructures, SheafError> {
    parse_builder(text, base)?.build_unchecked()
}

pub fn load_sheaf(path: &Path) -> Result<SheafOfStructures, SheafError> {
    let text = read(path)?;
    parse_sheaf(&text, path.parent())
}

fn read(path: &Path) -> Result<String, SheafError> {
    std::fs::read_to_string(path).map_err(|e| SheafError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

enum Decl {
    Sort(String, Vec<String>),
    Map(String, String, Vec<(String, String)>),
    Rel(String, String, Vec<Vec<String>>),
    Fun(String, String, Vec<(Vec<String>, String)>),
    Const(String, String, String),
    Section(String, Vec<(String, String)>),
}

pub(crate) fn parse_builder(text: &str, base: Option<&Path>) -> Result<SheafBuilder, SheafError> {
    let mut site_text = String::new();
    let mut used: Option<Site> = None;
    let mut decls = Vec::new();
    let mut rel_arity: BTreeMap<String, usize> = BTreeMap::new();
    let mut fun_arity: BTreeMap<String, usize> = BTreeMap::new();

    let note_arity =
        |table: &mut BTreeMap<String, usize>, name: &str, a: usize, no: usize| match table
            .insert(name.to_string(), a)
        {
            Some(old) if old != a => Err(SheafError::Syntax {
                line: no,
                message: format!("`{name}` used with arities {old} and {a}"),
            }),
            _ => Ok(()),
        };

    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match keyword {
            "node" | "le" => {
                site_text.push_str(line);
                site_text.push('\n');
            }
            "use" => {
                if rest.is_empty() {
                    return Err(SheafError::Syntax {
                        line: no,
                        message: "`use` needs a path".into(),
                    });
                }
                let path = match base {
                    Some(b) => b.join(rest),
                    None => Path::new(rest).to_path_buf(),
                };
                used = Some(Site::parse(&read(&path)?)?);
            }
            "sort" | "map" | "rel" | "fun" | "const" | "section" => {
                let (head, body) = rest.split_once(':').ok_or_else(|| SheafError::Syntax {
                    line: no,
                    message: format!("`{keyword}` line needs `:`"),
                })?;
                let head: Vec<&str> = head.split_whitespace().collect();
                let mut l = Line {
                    no,
                    toks: tokens(body),
                    pos: 0,
                };
                let want = |n: usize| {
                    if head.len() == n {
                        Ok(())
                    } else {
                        Err(SheafError::Syntax {
                            line: no,
                            message: format!("`{keyword}` expects {n} name(s) before `:`"),
                        })
                    }
                };
                match keyword {
                    "sort" => {
                        want(1)?;
                        let mut elems = Vec::new();
                        while !l.done() {
                            elems.push(l.word()?);
                            l.skip_comma();
                        }
                        decls.push(Decl::Sort(head[0].to_string(), elems));
                    }
                    "map" => {
                        want(2)?;
                        let mut pairs = Vec::new();
                        while !l.done() {
                            let a = l.word()?;
                            l.arrow()?;
                            pairs.push((a, l.word()?));
                            l.skip_comma();
                        }
                        decls.push(Decl::Map(head[0].to_string(), head[1].to_string(), pairs));
                    }
                    "rel" => {
                        want(2)?;
                        let (name, arity) = symbol(head[0], no)?;
                        if let Some(a) = arity {
                            note_arity(&mut rel_arity, &name, a, no)?;
                        }
                        let mut tuples = Vec::new();
                        while !l.done() {
                            let t = l.tuple()?;
                            note_arity(&mut rel_arity, &name, t.len(), no)?;
                            tuples.push(t);
                            l.skip_comma();
                        }
                        decls.push(Decl::Rel(name, head[1].to_string(), tuples));
                    }
                    "fun" => {
                        want(2)?;
                        let (name, arity) = symbol(head[0], no)?;
                        if let Some(a) = arity {
                            note_arity(&mut fun_arity, &name, a, no)?;
                        }
                        let mut rows = Vec::new();
                        while !l.done() {
                            let t = l.tuple()?;
                            note_arity(&mut fun_arity, &name, t.len(), no)?;
                            l.arrow()?;
                            rows.push((t, l.word()?));
                            l.skip_comma();
                        }
                        decls.push(Decl::Fun(name, head[1].to_string(), rows));
                    }
                    "const" => {
                        want(2)?;
                        let e = l.word()?;
                        if !l.done() {
                            return Err(l.err("`const` takes one element"));
                        }
                        decls.push(Decl::Const(head[0].to_string(), head[1].to_string(), e));
                    }
                    _ => {
                        want(1)?;
                        let mut vals = Vec::new();
                        while !l.done() {
                            let x = l.word()?;
                            l.arrow()?;
                            vals.push((x, l.word()?));
                            l.skip_comma();
                        }
                        decls.push(Decl::Section(head[0].to_string(), vals));
                    }
                }
            }
            other => {
                return Err(SheafError::Syntax {
                    line: no,
                    message: format!("unknown declaration `{other}`"),
                })
            }
        }
    }

    let site = match used {
        Some(s) if site_text.is_empty() => s,
        Some(_) => {
            return Err(SheafError::Syntax {
                line: 0,
                message: "both `use` and inline `node` lines given".into(),
            })
        }
        None => Site::parse(&site_text)?,
    };
    let mut b = SheafBuilder::new(site);
    for d in &decls {
        if let Decl::Sort(x, elems) = d {
            b = b.fiber(x, elems);
        }
    }
    for d in &decls {
        match d {
            Decl::Rel(r, _, _) => {
                let a = *rel_arity.get(r).ok_or_else(|| SheafError::Syntax {
                    line: 0,
                    message: format!("arity of `{r}` unknown; write `{r}/n`"),
                })?;
                b = b.relation(r, a);
            }
            Decl::Fun(f, _, _) => {
                let a = *fun_arity.get(f).ok_or_else(|| SheafError::Syntax {
                    line: 0,
                    message: format!("arity of `{f}` unknown; write `{f}/n`"),
                })?;
                b = b.function(f, a);
            }
            _ => {}
        }
    }
    for d in decls {
        b = match d {
            Decl::Sort(..) => b,
            Decl::Map(x, y, pairs) => {
                let p: Vec<(&str, &str)> = pairs
                    .iter()
                    .map(|(a, c)| (a.as_str(), c.as_str()))
                    .collect();
                b.map(&x, &y, &p)
            }
            Decl::Rel(r, x, tuples) => tuples.iter().fold(b, |b, t| {
                let t: Vec<&str> = t.iter().map(String::as_str).collect();
                b.holds(&r, &x, &t)
            }),
            Decl::Fun(f, x, rows) => rows.iter().fold(b, |b, (t, v)| {
                let t: Vec<&str> = t.iter().map(String::as_str).collect();
                b.value(&f, &x, &t, v)
            }),
            Decl::Const(c, x, e) => b.constant(&c, &x, &e),
            Decl::Section(s, vals) => {
                let v: Vec<(&str, &str)> =
                    vals.iter().map(|(a, c)| (a.as_str(), c.as_str())).collect();
                b.section(&s, &v)
            }
        };
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const S2: &str = "\
node p
node q
le p q
sort p: 0
sort q: 0
rel R/1 p:
rel R q: (0)
section s: p->0 q->0
";

    #[test]
    fn parses_s2() {
        let s = parse_sheaf(S2, None).unwrap();
        assert_eq!(s, fixtures::s2());
    }

    #[test]
    fn round_trip() {
        for s in fixtures::all_sheaves() {
            let text = s.to_text();
            assert_eq!(parse_sheaf(&text, None).unwrap(), s, "{text}");
        }
    }

    #[test]
    fn errors() {
        let bad = "node p\nsort p: 0\nrel R p:\n";
        assert!(matches!(
            parse_sheaf(bad, None),
            Err(SheafError::Syntax { .. })
        ));
        let bad = "node p\nsort p: 0\nfrob p: 0\n";
        assert!(matches!(
            parse_sheaf(bad, None),
            Err(SheafError::Syntax { line: 3, .. })
        ));
        let bad = "node p\nsort p: 0\nconst c p: 1\n";
        assert!(matches!(
            parse_sheaf(bad, None),
            Err(SheafError::UnknownElement { .. })
        ));
        let invalid = "node p\nnode q\nle p q\nsort p: 0\nsort q: 0\nrel R p: 0\nrel R q:\n";
        assert!(matches!(
            parse_sheaf(invalid, None),
            Err(SheafError::Invalid(_))
        ));
        let s = parse_sheaf_unchecked(invalid, None).unwrap();
        assert_eq!(s.validate().len(), 1);
    }

    #[test]
    fn functions_and_constants() {
        let text = "\
node a
sort a: 0 1
fun f a: 0 -> 1, 1 -> 0
const c a: 1
";
        let s = parse_sheaf(text, None).unwrap();
        assert_eq!(s.apply("f", 0, &[0]), Some(1));
        assert_eq!(s.constant("c", 0), Some(1));
    }
}

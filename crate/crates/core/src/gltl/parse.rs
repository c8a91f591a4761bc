//! Recursive-descent parser shared by GLTL and plain LTL.
//!
//! ```text
//! or    := and ('|' and)*
//! and   := until ('&' until)*
//! until := unary ('U' theta? until)?
//! unary := '!' unary | 'X' unary | ('G' | 'F') theta? unary | atom | '(' or ')'
//! theta := '[' rational ']'
//! ```
//! GLTL requires `theta` on `G`, `F`, `U`; LTL forbids it.

use num_traits::{One, Signed};

use super::{Gltl, GltlKind, Ltl};
use crate::alphabet::is_identifier;
use crate::error::{Error, Result};
use crate::rational::{parse_rational, Rational};

pub fn parse_gltl(text: &str) -> Result<Gltl> {
    let mut p = Parser::new(text, Mode::Gltl)?;
    let f = p.or()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_ltl(text: &str) -> Result<Ltl> {
    let mut p = Parser::new(text, Mode::Ltl)?;
    let f = p.or()?;
    p.finish()?;
    Ok(to_ltl(f))
}

fn to_ltl(f: Gltl) -> Ltl {
    match f.kind {
        GltlKind::Atom(a) => Ltl::Atom(a),
        GltlKind::Not(a) => Ltl::not(to_ltl(*a)),
        GltlKind::And(a, b) => Ltl::and(to_ltl(*a), to_ltl(*b)),
        GltlKind::Or(a, b) => Ltl::or(to_ltl(*a), to_ltl(*b)),
        GltlKind::Next(a) => Ltl::next(to_ltl(*a)),
        GltlKind::Always(_, a) => Ltl::always(to_ltl(*a)),
        GltlKind::Eventually(_, a) => Ltl::eventually(to_ltl(*a)),
        GltlKind::Until(_, a, b) => Ltl::until(to_ltl(*a), to_ltl(*b)),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Gltl,
    Ltl,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
    Next,
    Always,
    Eventually,
    Until,
    /// Raw text between `[` and `]`.
    Theta(String),
}

#[derive(Debug, Clone)]
struct Lexeme {
    tok: Tok,
    start: usize,
    end: usize,
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<Lexeme>,
    pos: usize,
    mode: Mode,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, mode: Mode) -> Result<Self> {
        let toks = lex(text)?;
        Ok(Parser {
            text,
            toks,
            pos: 0,
            mode,
        })
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> Error {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        Error::parse(line, column, message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn here(&self) -> usize {
        match self.toks.get(self.pos) {
            Some(l) => l.start,
            None => self.toks.last().map_or(0, |l| l.end),
        }
    }

    fn last_end(&self) -> usize {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.toks.get(i))
            .map_or(0, |l| l.end)
    }

    fn finish(&self) -> Result<()> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(l) => Err(self.error_at(l.start, "unexpected trailing input")),
        }
    }

    fn or(&mut self) -> Result<Gltl> {
        let start = self.here();
        let mut left = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let right = self.and()?;
            left = self.node(GltlKind::Or(Box::new(left), Box::new(right)), start);
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Gltl> {
        let start = self.here();
        let mut left = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let right = self.until()?;
            left = self.node(GltlKind::And(Box::new(left), Box::new(right)), start);
        }
        Ok(left)
    }

    fn until(&mut self) -> Result<Gltl> {
        let start = self.here();
        let left = self.unary()?;
        if self.peek() == Some(&Tok::Until) {
            self.pos += 1;
            let theta = self.theta()?;
            let right = self.until()?;
            return Ok(self.node(GltlKind::Until(theta, Box::new(left), Box::new(right)), start));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Gltl> {
        let start = self.here();
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_at(start, "unexpected end of formula"));
        };
        self.pos += 1;
        match tok {
            Tok::Ident(name) => Ok(self.node(GltlKind::Atom(name), start)),
            Tok::Not => {
                let a = self.unary()?;
                Ok(self.node(GltlKind::Not(Box::new(a)), start))
            }
            Tok::Next => {
                let a = self.unary()?;
                Ok(self.node(GltlKind::Next(Box::new(a)), start))
            }
            Tok::Always => {
                let t = self.theta()?;
                let a = self.unary()?;
                Ok(self.node(GltlKind::Always(t, Box::new(a)), start))
            }
            Tok::Eventually => {
                let t = self.theta()?;
                let a = self.unary()?;
                Ok(self.node(GltlKind::Eventually(t, Box::new(a)), start))
            }
            Tok::LParen => {
                let inner = self.or()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.error_at(self.here(), "expected `)`"));
                }
                self.pos += 1;
                Ok(Gltl {
                    kind: inner.kind,
                    span: start..self.last_end(),
                })
            }
            _ => Err(self.error_at(start, "expected a formula")),
        }
    }

    fn theta(&mut self) -> Result<Rational> {
        let at = self.here();
        match (self.mode, self.peek().cloned()) {
            (Mode::Gltl, Some(Tok::Theta(raw))) => {
                self.pos += 1;
                let t = parse_rational(raw.trim()).map_err(|e| self.error_at(at + 1, e.to_string()))?;
                if !(t.is_positive() && t < Rational::one()) {
                    return Err(self.error_at(at + 1, format!("expiration probability {t} must lie in (0, 1)")));
                }
                Ok(t)
            }
            (Mode::Gltl, _) => Err(self.error_at(at, "expected `[θ]` after temporal operator")),
            (Mode::Ltl, Some(Tok::Theta(_))) => Err(self.error_at(at, "LTL operators take no `[θ]`")),
            (Mode::Ltl, _) => Ok(Rational::one()),
        }
    }

    fn node(&self, kind: GltlKind, start: usize) -> Gltl {
        Gltl {
            kind,
            span: start..self.last_end(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Lexeme>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, msg: String| {
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        Error::parse(line, column, msg)
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'!' => Some(Tok::Not),
            b'&' => Some(Tok::And),
            b'|' => Some(Tok::Or),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            i += 1;
            out.push(Lexeme { tok, start, end: i });
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'[' {
            let close = text[i..]
                .find(']')
                .ok_or_else(|| err(start, "unclosed `[`".into()))?;
            let raw = text[i + 1..i + close].to_string();
            i += close + 1;
            out.push(Lexeme {
                tok: Tok::Theta(raw),
                start,
                end: i,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            debug_assert!(is_identifier(word));
            let tok = match word {
                "X" => Tok::Next,
                "G" => Tok::Always,
                "F" => Tok::Eventually,
                "U" => Tok::Until,
                _ => Tok::Ident(word.to_string()),
            };
            out.push(Lexeme { tok, start, end: i });
            continue;
        }
        let ch = text[i..].chars().next().unwrap_or('?');
        return Err(err(start, format!("unexpected character `{ch}`")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn nested_operators_shape() {
        let f = parse_gltl("F[9/10] goal & G[9/10] lava").unwrap();
        let expected = Gltl::and(
            Gltl::eventually(ratio(9, 10), Gltl::atom("goal")),
            Gltl::always(ratio(9, 10), Gltl::atom("lava")),
        );
        assert_eq!(f, expected);
        assert_eq!(f.span, 0..27);
        let GltlKind::And(l, r) = &f.kind else { panic!() };
        assert_eq!(l.span, 0..12);
        assert_eq!(r.span, 15..27);
    }

    #[test]
    fn nested_shape_and_decimal_theta() {
        let f = parse_gltl("G[1/2] (a & F[0.5] b)").unwrap();
        let expected = Gltl::always(
            ratio(1, 2),
            Gltl::and(Gltl::atom("a"), Gltl::eventually(ratio(1, 2), Gltl::atom("b"))),
        );
        assert_eq!(f, expected);
        assert_eq!(f.expiring_count(), 2);
        assert_eq!(parse_gltl("a").unwrap(), Gltl::atom("a"));
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_gltl("!a U[1/2] b U[1/3] c & d | e").unwrap();
        let u = Gltl::until(
            ratio(1, 2),
            Gltl::not(Gltl::atom("a")),
            Gltl::until(ratio(1, 3), Gltl::atom("b"), Gltl::atom("c")),
        );
        assert_eq!(f, Gltl::or(Gltl::and(u, Gltl::atom("d")), Gltl::atom("e")));
    }

    #[test]
    fn errors_have_positions() {
        assert!(matches!(parse_gltl("F[1] a"), Err(Error::Parse { column: 3, .. })));
        assert!(matches!(parse_gltl("F[0] a"), Err(Error::Parse { .. })));
        assert!(matches!(parse_gltl("F a"), Err(Error::Parse { column: 3, .. })));
        assert!(matches!(parse_gltl("a &"), Err(Error::Parse { column: 4, .. })));
        assert!(matches!(parse_gltl("(a"), Err(Error::Parse { .. })));
        assert!(matches!(parse_gltl("a b"), Err(Error::Parse { column: 3, .. })));
        assert!(matches!(parse_gltl("a\n  & $"), Err(Error::Parse { line: 2, column: 5, .. })));
        assert!(matches!(parse_ltl("F[1/2] a"), Err(Error::Parse { .. })));
    }

    #[test]
    fn ltl_syntax() {
        assert_eq!(
            parse_ltl("G (a | b) & F b").unwrap(),
            Ltl::and(
                Ltl::always(Ltl::or(Ltl::atom("a"), Ltl::atom("b"))),
                Ltl::eventually(Ltl::atom("b"))
            )
        );
        let f = parse_ltl("a U !b").unwrap();
        assert_eq!(parse_ltl(&f.to_string()).unwrap(), f);
    }
}

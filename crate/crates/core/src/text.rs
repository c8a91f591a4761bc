//! Line-oriented tokenizer shared by the specification file formats.

use std::collections::HashMap;

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};

/// One non-empty, comment-stripped line split into tokens.
///
/// Whitespace separates tokens except inside `{...}`, so `{goal, lava}` is one token.
#[derive(Debug, Clone)]
pub(crate) struct Line<'a> {
    pub number: usize,
    pub tokens: Vec<Token<'a>>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Token<'a> {
    pub text: &'a str,
    pub column: usize,
}

impl<'a> Line<'a> {
    pub fn keyword(&self) -> &'a str {
        self.tokens[0].text
    }

    pub fn args(&self) -> &[Token<'a>] {
        &self.tokens[1..]
    }

    pub fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::parse(self.number, column, message)
    }

    pub fn expect_args(&self, n: usize) -> Result<&[Token<'a>]> {
        if self.args().len() != n {
            return Err(self.error(
                self.tokens[0].column,
                format!(
                    "`{}` takes {n} argument(s), found {}",
                    self.keyword(),
                    self.args().len()
                ),
            ));
        }
        Ok(self.args())
    }
}

impl Token<'_> {
    /// Splits `key=value`.
    pub fn key_value(&self, line: &Line<'_>) -> Result<(&str, &str)> {
        self.text
            .split_once('=')
            .ok_or_else(|| line.error(self.column, format!("expected key=value, found `{}`", self.text)))
    }
}

pub(crate) fn lines(text: &str) -> Result<Vec<Line<'_>>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let body = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let mut tokens = Vec::new();
        let bytes = body.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i].is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            let mut depth = 0i32;
            while i < bytes.len() && (depth > 0 || !bytes[i].is_ascii_whitespace()) {
                match bytes[i] {
                    b'{' => depth += 1,
                    b'}' => depth -= 1,
                    _ => {}
                }
                i += 1;
            }
            if depth != 0 {
                return Err(Error::parse(number, start + 1, "unbalanced `{`"));
            }
            tokens.push(Token {
                text: &body[start..i],
                column: start + 1,
            });
        }
        if !tokens.is_empty() {
            out.push(Line { number, tokens });
        }
    }
    Ok(out)
}

/// Name-to-index map for a declared state list, rejecting duplicates.
pub(crate) fn state_index<'s>(what: &'static str, states: &'s [String]) -> Result<HashMap<&'s str, usize>> {
    let index: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if index.len() != states.len() {
        return Err(Error::invalid(what, "duplicate state names"));
    }
    Ok(index)
}

pub(crate) fn lookup(index: &HashMap<&str, usize>, line: &Line<'_>, tok: &Token<'_>) -> Result<usize> {
    index
        .get(tok.text)
        .copied()
        .ok_or_else(|| line.error(tok.column, format!("unknown state `{}`", tok.text)))
}

/// Builds a total deterministic table from `trans SRC LETTER DST ...` lines.
///
/// `SRC` may be `*` (every state), `LETTER` may be `*` (every letter not listed
/// explicitly for that state) and `DST` may be `self`. Lines with an explicit
/// letter are applied before wildcard lines. `visit(line, u, v)` is called once
/// per expanded source state so callers can read trailing columns.
pub(crate) fn transition_table(
    what: &'static str,
    trans: &[&Line<'_>],
    arity: usize,
    states: &[String],
    index: &HashMap<&str, usize>,
    alphabet: &Alphabet,
    mut visit: impl FnMut(&Line<'_>, usize, usize) -> Result<()>,
) -> Result<Vec<Vec<usize>>> {
    let letters = alphabet.len() as usize;
    let mut next: Vec<Vec<Option<usize>>> = vec![vec![None; letters]; states.len()];
    let is_wild = |l: &&Line<'_>| l.args().get(1).is_some_and(|t| t.text == "*");
    let ordered = trans
        .iter()
        .filter(|l| !is_wild(l))
        .chain(trans.iter().filter(|l| is_wild(l)));
    for line in ordered {
        let args = line.expect_args(arity)?;
        let sources: Vec<usize> = if args[0].text == "*" {
            (0..states.len()).collect()
        } else {
            vec![lookup(index, line, &args[0])?]
        };
        let letter = if args[1].text == "*" {
            None
        } else {
            Some(
                alphabet
                    .parse_letter(args[1].text)
                    .map_err(|e| line.error(args[1].column, e.to_string()))?,
            )
        };
        for u in sources {
            let v = if args[2].text == "self" {
                u
            } else {
                lookup(index, line, &args[2])?
            };
            match letter {
                Some(s) => {
                    if next[u][s.index()].is_some() {
                        return Err(line.error(
                            args[1].column,
                            format!("duplicate transition for ({}, {})", states[u], args[1].text),
                        ));
                    }
                    next[u][s.index()] = Some(v);
                }
                None => {
                    for slot in next[u].iter_mut().filter(|t| t.is_none()) {
                        *slot = Some(v);
                    }
                }
            }
            visit(line, u, v)?;
        }
    }
    next.into_iter()
        .enumerate()
        .map(|(u, row)| {
            row.into_iter()
                .enumerate()
                .map(|(l, t)| {
                    t.ok_or_else(|| {
                        Error::invalid(
                            what,
                            format!("no transition for ({}, {})", states[u], alphabet.name(Symbol(l as u32))),
                        )
                    })
                })
                .collect()
        })
        .collect()
}

/// Letters with identical columns in `next[u][letter]` share the first such letter as leader.
pub(crate) fn column_classes(alphabet: &Alphabet, next: &[Vec<usize>]) -> Vec<Symbol> {
    let mut leaders: HashMap<Vec<usize>, Symbol> = HashMap::new();
    alphabet
        .symbols()
        .map(|s| {
            let column: Vec<usize> = next.iter().map(|row| row[s.index()]).collect();
            *leaders.entry(column).or_insert(s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn braces_group_tokens() {
        let ls = lines("trans u1 {goal, lava} u3 0  # comment\n\n   # only comment\nstates a b").unwrap();
        assert_eq!(ls.len(), 2);
        let t: Vec<&str> = ls[0].tokens.iter().map(|t| t.text).collect();
        assert_eq!(t, ["trans", "u1", "{goal, lava}", "u3", "0"]);
        assert_eq!(ls[0].tokens[2].column, 10);
        assert_eq!(ls[1].number, 4);
        assert!(lines("trans {a").is_err());
    }
}

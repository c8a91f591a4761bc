//! Finite alphabets with a canonical symbol order.

use std::fmt;

use crate::error::{Error, Result};

/// A letter, identified by its position in the owning [`Alphabet`]'s canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Largest proposition set a valuation alphabet may range over.
pub const MAX_PROPS: usize = 30;

/// An ordered finite alphabet.
///
/// `Valuations` is the power set `2^props`: symbol `i` is the valuation whose
/// bit `j` says whether `props[j]` holds, so the canonical order is binary
/// counting order. `Named` is an explicit list such as the state-action pairs
/// of an MDP.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Alphabet {
    Valuations { props: Vec<String> },
    Named { names: Vec<String> },
}

impl Alphabet {
    pub fn valuations<S: AsRef<str>>(props: &[S]) -> Result<Self> {
        let props: Vec<String> = props.iter().map(|p| p.as_ref().to_string()).collect();
        if props.len() > MAX_PROPS {
            return Err(Error::invalid(
                "alphabet",
                format!("{} propositions exceeds the limit of {MAX_PROPS}", props.len()),
            ));
        }
        check_distinct(&props)?;
        for p in &props {
            if !is_identifier(p) {
                return Err(Error::invalid("alphabet", format!("`{p}` is not a proposition name")));
            }
        }
        Ok(Alphabet::Valuations { props })
    }

    pub fn named<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|p| p.as_ref().to_string()).collect();
        if names.is_empty() {
            return Err(Error::invalid("alphabet", "an alphabet needs at least one symbol"));
        }
        if names.len() > u32::MAX as usize {
            return Err(Error::invalid("alphabet", "too many symbols"));
        }
        check_distinct(&names)?;
        for n in &names {
            if n.is_empty() || n.contains([';', '^', ' ', '\t', '\n']) {
                return Err(Error::invalid("alphabet", format!("`{n}` is not a symbol name")));
            }
        }
        Ok(Alphabet::Named { names })
    }

    pub fn len(&self) -> u64 {
        match self {
            Alphabet::Valuations { props } => 1u64 << props.len(),
            Alphabet::Named { names } => names.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, s: Symbol) -> bool {
        u64::from(s.0) < self.len()
    }

    pub fn check(&self, s: Symbol) -> Result<Symbol> {
        if self.contains(s) {
            Ok(s)
        } else {
            Err(Error::InvalidLetter {
                symbol: s.0,
                size: self.len(),
            })
        }
    }

    /// Symbols in canonical order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.len()).map(|i| Symbol(i as u32))
    }

    pub fn first(&self) -> Symbol {
        Symbol(0)
    }

    pub fn props(&self) -> Option<&[String]> {
        match self {
            Alphabet::Valuations { props } => Some(props),
            Alphabet::Named { .. } => None,
        }
    }

    pub fn prop_index(&self, prop: &str) -> Option<usize> {
        self.props()?.iter().position(|p| p == prop)
    }

    /// The valuation in which exactly `props` hold.
    pub fn valuation<S: AsRef<str>>(&self, props: &[S]) -> Result<Symbol> {
        let Alphabet::Valuations { props: all } = self else {
            return Err(Error::AlphabetMismatch("not a proposition alphabet".into()));
        };
        let mut mask = 0u32;
        for p in props {
            let p = p.as_ref();
            let i = all.iter().position(|q| q == p).ok_or_else(|| Error::Unknown {
                kind: "proposition",
                name: p.to_string(),
            })?;
            mask |= 1 << i;
        }
        Ok(Symbol(mask))
    }

    /// Propositions true in `s` (empty for named alphabets).
    pub fn true_props(&self, s: Symbol) -> Vec<&str> {
        match self {
            Alphabet::Valuations { props } => props
                .iter()
                .enumerate()
                .filter(|(i, _)| s.0 & (1 << i) != 0)
                .map(|(_, p)| p.as_str())
                .collect(),
            Alphabet::Named { .. } => Vec::new(),
        }
    }

    pub fn name(&self, s: Symbol) -> String {
        match self {
            Alphabet::Valuations { .. } => format!("{{{}}}", self.true_props(s).join(",")),
            Alphabet::Named { names } => names
                .get(s.index())
                .cloned()
                .unwrap_or_else(|| format!("#{}", s.0)),
        }
    }

    /// Parses one letter: `{p,q}` for valuation alphabets, a bare name otherwise.
    pub fn parse_letter(&self, text: &str) -> Result<Symbol> {
        let t = text.trim();
        match self {
            Alphabet::Valuations { .. } => {
                let inner = t
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| Error::invalid("letter", format!("`{t}` is not a `{{...}}` set")))?;
                let items: Vec<&str> = inner
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .collect();
                self.valuation(&items)
            }
            Alphabet::Named { names } => names
                .iter()
                .position(|n| n == t)
                .map(|i| Symbol(i as u32))
                .ok_or_else(|| Error::Unknown {
                    kind: "symbol",
                    name: t.to_string(),
                }),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::Valuations { props } => write!(f, "2^{{{}}}", props.join(",")),
            Alphabet::Named { names } => write!(f, "{{{}}}", names.join(",")),
        }
    }
}

fn check_distinct(items: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for it in items {
        if !seen.insert(it.as_str()) {
            return Err(Error::invalid("alphabet", format!("duplicate symbol `{it}`")));
        }
    }
    Ok(())
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

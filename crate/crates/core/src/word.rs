//! Infinite words as lassos, indexed access, and read-depth instrumentation.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};

/// Indexed read access to a (possibly infinite) word.
///
/// Objectives only ever look at their input through this trait, so wrapping the
/// input in a [`BoundedProbe`] observes exactly which indices were needed.
pub trait Word {
    fn letter(&self, i: usize) -> Result<Symbol>;
}

impl<W: Word + ?Sized> Word for &W {
    fn letter(&self, i: usize) -> Result<Symbol> {
        (**self).letter(i)
    }
}

/// A finite word. Reading past its end is an out-of-bound read.
impl Word for [Symbol] {
    fn letter(&self, i: usize) -> Result<Symbol> {
        self.get(i).copied().ok_or(Error::OutOfBound {
            index: i,
            bound: self.len(),
        })
    }
}

impl Word for Vec<Symbol> {
    fn letter(&self, i: usize) -> Result<Symbol> {
        self.as_slice().letter(i)
    }
}

/// An ultimately periodic word `prefix · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LassoWord {
    prefix: Vec<Symbol>,
    cycle: Vec<Symbol>,
    alphabet: Arc<Alphabet>,
}

impl LassoWord {
    pub fn new(prefix: Vec<Symbol>, cycle: Vec<Symbol>, alphabet: Arc<Alphabet>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::invalid("lasso word", "cycle must be nonempty"));
        }
        for &s in prefix.iter().chain(&cycle) {
            alphabet.check(s)?;
        }
        Ok(LassoWord {
            prefix,
            cycle,
            alphabet,
        })
    }

    /// `u · rep^ω`.
    pub fn with_tail(prefix: Vec<Symbol>, rep: Symbol, alphabet: Arc<Alphabet>) -> Result<Self> {
        Self::new(prefix, vec![rep], alphabet)
    }

    pub fn prefix(&self) -> &[Symbol] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Symbol] {
        &self.cycle
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Number of distinct positions up to cycle identification.
    pub fn positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn letter_at(&self, i: usize) -> Symbol {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// The first `len` letters.
    pub fn unroll(&self, len: usize) -> Vec<Symbol> {
        (0..len).map(|i| self.letter_at(i)).collect()
    }

    pub fn parse(text: &str, alphabet: Arc<Alphabet>) -> Result<Self> {
        let (prefix_text, cycle_text) = text.split_once('^').ok_or_else(|| {
            Error::parse(1, 1, "lasso word needs `^` between prefix and cycle")
        })?;
        let letters = |part: &str, offset: usize| -> Result<Vec<Symbol>> {
            if part.trim().is_empty() {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            let mut col = offset;
            for tok in part.split(';') {
                let sym = alphabet
                    .parse_letter(tok)
                    .map_err(|e| Error::parse(1, col + 1, e.to_string()))?;
                out.push(sym);
                col += tok.len() + 1;
            }
            Ok(out)
        };
        let prefix = letters(prefix_text, 0)?;
        let cycle = letters(cycle_text, prefix_text.len() + 1)?;
        if cycle.is_empty() {
            return Err(Error::parse(
                1,
                prefix_text.len() + 2,
                "lasso cycle must contain at least one letter",
            ));
        }
        LassoWord::new(prefix, cycle, alphabet)
    }
}

impl Word for LassoWord {
    fn letter(&self, i: usize) -> Result<Symbol> {
        Ok(self.letter_at(i))
    }
}

impl fmt::Display for LassoWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |part: &[Symbol]| {
            part.iter()
                .map(|&s| self.alphabet.name(s))
                .collect::<Vec<_>>()
                .join(";")
        };
        write!(f, "{}^{}", join(&self.prefix), join(&self.cycle))
    }
}

/// `min(Lprefix(w1, w2), cap)`: length of the longest common prefix, capped.
pub fn common_prefix_length(w1: &LassoWord, w2: &LassoWord, cap: usize) -> Result<usize> {
    if w1.alphabet != w2.alphabet {
        return Err(Error::AlphabetMismatch(format!(
            "{} vs {}",
            w1.alphabet, w2.alphabet
        )));
    }
    Ok((0..cap)
        .find(|&i| w1.letter_at(i) != w2.letter_at(i))
        .unwrap_or(cap))
}

/// Wraps a word, rejects reads at index `>= bound`, and records read depth.
///
/// `max_index_read` is one past the largest index successfully read. Not `Sync`:
/// one probe per evaluation.
pub struct BoundedProbe<'a> {
    inner: &'a dyn Word,
    bound: usize,
    max_read: Cell<usize>,
    tripped: Cell<bool>,
}

impl<'a> BoundedProbe<'a> {
    pub fn new(inner: &'a dyn Word, bound: usize) -> Self {
        BoundedProbe {
            inner,
            bound,
            max_read: Cell::new(0),
            tripped: Cell::new(false),
        }
    }

    /// A probe that never trips; only records depth.
    pub fn unbounded(inner: &'a dyn Word) -> Self {
        Self::new(inner, usize::MAX)
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn max_index_read(&self) -> usize {
        self.max_read.get()
    }

    /// Whether any read targeted an index `>= bound`.
    pub fn tripped(&self) -> bool {
        self.tripped.get()
    }
}

impl Word for BoundedProbe<'_> {
    fn letter(&self, i: usize) -> Result<Symbol> {
        if i >= self.bound {
            self.tripped.set(true);
            return Err(Error::OutOfBound {
                index: i,
                bound: self.bound,
            });
        }
        let s = self.inner.letter(i)?;
        self.max_read.set(self.max_read.get().max(i + 1));
        Ok(s)
    }
}

//! The computable-objective interface and the generic machinery built on it:
//! labeling composition, modulus of continuity, and finite-horizon truncation.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::rational::{precision_for, Rational};
use crate::word::{BoundedProbe, Word};

/// Default cap on the number of finite words a modulus search may enumerate.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 22;

/// An objective `f: X^ω → ℝ` given by fast-converging rational approximations.
///
/// Contract: for every word `w` and every `n`, `|approx(w, n) − f(w)| ≤ 2^-n`,
/// and `approx` reads `w` only through [`Word::letter`].
pub trait Objective: Send + Sync {
    fn alphabet(&self) -> &Arc<Alphabet>;

    fn approx(&self, word: &dyn Word, n: u32) -> Result<Rational>;

    /// Uniform bound on `|f|`.
    fn value_bound(&self) -> Rational;

    /// Class leader of `s`: letters with the same leader are interchangeable for
    /// this objective. Defaults to every letter being its own class.
    fn letter_class(&self, s: Symbol) -> Symbol {
        s
    }

    /// One symbol per letter class, in canonical order. Exhaustive searches may
    /// enumerate these instead of the full alphabet.
    fn representatives(&self) -> Vec<Symbol> {
        self.alphabet()
            .symbols()
            .filter(|&s| self.letter_class(s) == s)
            .collect()
    }
}

pub type SharedObjective = Arc<dyn Objective>;

impl fmt::Debug for dyn Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Objective over {}", self.alphabet())
    }
}

/// `f ≡ c`.
#[derive(Debug, Clone)]
pub struct ConstantObjective {
    alphabet: Arc<Alphabet>,
    value: Rational,
}

impl ConstantObjective {
    pub fn new(alphabet: Arc<Alphabet>, value: Rational) -> Self {
        ConstantObjective { alphabet, value }
    }
}

impl Objective for ConstantObjective {
    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn approx(&self, _word: &dyn Word, _n: u32) -> Result<Rational> {
        Ok(self.value.clone())
    }

    fn value_bound(&self) -> Rational {
        self.value.abs()
    }

    fn letter_class(&self, _s: Symbol) -> Symbol {
        self.alphabet.first()
    }
}

type ApproxFn = dyn Fn(&dyn Word, u32) -> Result<Rational> + Send + Sync;

/// An objective backed by a closure; handy for ad-hoc and environment-specific objectives.
pub struct FnObjective {
    alphabet: Arc<Alphabet>,
    bound: Rational,
    f: Box<ApproxFn>,
}

impl FnObjective {
    pub fn new(
        alphabet: Arc<Alphabet>,
        bound: Rational,
        f: impl Fn(&dyn Word, u32) -> Result<Rational> + Send + Sync + 'static,
    ) -> Self {
        FnObjective {
            alphabet,
            bound,
            f: Box::new(f),
        }
    }
}

impl Objective for FnObjective {
    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn approx(&self, word: &dyn Word, n: u32) -> Result<Rational> {
        (self.f)(word, n)
    }

    fn value_bound(&self) -> Rational {
        self.bound.clone()
    }
}

/// A total map from the symbols of a domain alphabet (usually state-action
/// pairs) to feature letters, written in the feature alphabet's letter syntax
/// (`{goal}`, `{}`, or a bare name).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelingFunction {
    domain: Arc<Alphabet>,
    labels: Vec<String>,
}

impl LabelingFunction {
    pub fn new(domain: Arc<Alphabet>, labels: Vec<String>) -> Result<Self> {
        if labels.len() as u64 != domain.len() {
            return Err(Error::invalid(
                "labeling",
                format!(
                    "{} labels for a domain of {} symbols",
                    labels.len(),
                    domain.len()
                ),
            ));
        }
        Ok(LabelingFunction { domain, labels })
    }

    pub fn domain(&self) -> &Arc<Alphabet> {
        &self.domain
    }

    pub fn label(&self, s: Symbol) -> &str {
        &self.labels[s.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Propositions mentioned by any label of the form `{...}`.
    pub fn mentioned_props(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for l in &self.labels {
            if let Some(inner) = l.trim().strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
                for p in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                    if !out.iter().any(|q| q == p) {
                        out.push(p.to_string());
                    }
                }
            }
        }
        out
    }

    /// Resolves every label against `features`.
    pub fn resolve(&self, features: &Alphabet) -> Result<Vec<Symbol>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                features.parse_letter(l).map_err(|e| {
                    Error::CodomainMismatch(format!(
                        "label `{l}` of {} is not a letter of {features}: {e}",
                        self.domain.name(Symbol(i as u32))
                    ))
                })
            })
            .collect()
    }
}

/// `ξ ∘ L`: an objective over the labeling's domain.
pub struct Labeled {
    inner: SharedObjective,
    domain: Arc<Alphabet>,
    table: Vec<Symbol>,
    classes: Vec<Symbol>,
}

struct LabeledWord<'a> {
    inner: &'a dyn Word,
    table: &'a [Symbol],
}

impl Word for LabeledWord<'_> {
    fn letter(&self, i: usize) -> Result<Symbol> {
        let s = self.inner.letter(i)?;
        self.table.get(s.index()).copied().ok_or(Error::InvalidLetter {
            symbol: s.0,
            size: self.table.len() as u64,
        })
    }
}

impl Labeled {
    pub fn inner(&self) -> &SharedObjective {
        &self.inner
    }

    pub fn feature_of(&self, s: Symbol) -> Symbol {
        self.table[s.index()]
    }
}

impl Objective for Labeled {
    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.domain
    }

    fn approx(&self, word: &dyn Word, n: u32) -> Result<Rational> {
        let labeled = LabeledWord {
            inner: word,
            table: &self.table,
        };
        self.inner.approx(&labeled, n)
    }

    fn value_bound(&self) -> Rational {
        self.inner.value_bound()
    }

    fn letter_class(&self, s: Symbol) -> Symbol {
        self.classes[s.index()]
    }
}

/// `κ = ξ ∘ L`. Letters are relabeled lazily: reading index `i` of the composed
/// input reads index `i` of the original word and nothing else.
pub fn compose_with_labeling(xi: SharedObjective, labeling: &LabelingFunction) -> Result<Labeled> {
    let table = labeling.resolve(xi.alphabet())?;
    // Domain letters whose features fall in one inner class share the first
    // such domain letter as leader.
    let mut leaders: HashMap<Symbol, Symbol> = HashMap::new();
    let classes = labeling
        .domain()
        .symbols()
        .map(|s| *leaders.entry(xi.letter_class(table[s.index()])).or_insert(s))
        .collect();
    Ok(Labeled {
        inner: xi,
        domain: labeling.domain().clone(),
        table,
        classes,
    })
}

/// Odometer over `reps^len` in lexicographic order of `reps`.
pub(crate) struct WordEnumerator<'a> {
    reps: &'a [Symbol],
    digits: Vec<usize>,
    word: Vec<Symbol>,
    started: bool,
}

impl<'a> WordEnumerator<'a> {
    pub(crate) fn new(reps: &'a [Symbol], len: usize) -> Self {
        WordEnumerator {
            reps,
            digits: vec![0; len],
            word: vec![reps[0]; len],
            started: false,
        }
    }

    pub(crate) fn next_word(&mut self) -> Option<&[Symbol]> {
        if !self.started {
            self.started = true;
            return Some(&self.word);
        }
        for pos in (0..self.digits.len()).rev() {
            self.digits[pos] += 1;
            if self.digits[pos] < self.reps.len() {
                self.word[pos] = self.reps[self.digits[pos]];
                return Some(&self.word);
            }
            self.digits[pos] = 0;
            self.word[pos] = self.reps[0];
        }
        None
    }
}

pub(crate) fn word_count(reps: usize, len: usize) -> Option<u64> {
    (reps as u64).checked_pow(len as u32)
}

/// Smallest `H >= 1` such that, at precision `n = max(0, ⌈−log2 eps⌉)`, the
/// objective never reads index `>= H` of any word in `X^H`.
///
/// Words sharing a length-`H` prefix therefore get bit-identical
/// approximations at that `n`. `cap` limits `|X|^H`.
pub fn modulus_of_continuity(f: &dyn Objective, eps: &Rational, cap: u64) -> Result<usize> {
    let n = precision_for(eps)?;
    modulus_at_precision(f, n, cap)
}

pub fn modulus_at_precision(f: &dyn Objective, n: u32, cap: u64) -> Result<usize> {
    let reps = f.representatives();
    if reps.is_empty() {
        return Err(Error::Invariant("objective reported no representatives".into()));
    }
    let mut h = 1usize;
    loop {
        let count = word_count(reps.len(), h).filter(|&c| c <= cap && (h as u64) <= cap);
        let Some(_) = count else {
            return Err(Error::Budget {
                what: "modulus enumeration",
                needed: format!("{}^{h}", reps.len()),
                cap,
                context: Some(format!("last horizon tried H={}", h - 1)),
            });
        };
        if all_within(f, &reps, h, n)? {
            return Ok(h);
        }
        h += 1;
    }
}

fn all_within(f: &dyn Objective, reps: &[Symbol], h: usize, n: u32) -> Result<bool> {
    let mut words = WordEnumerator::new(reps, h);
    while let Some(u) = words.next_word() {
        let probe = BoundedProbe::new(&u, h);
        match f.approx(&probe, n) {
            Ok(_) => {}
            Err(Error::OutOfBound { .. }) if probe.tripped() => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// `u · rep^ω` without allocation.
pub(crate) struct TailWord<'a> {
    pub prefix: &'a [Symbol],
    pub rep: Symbol,
}

impl Word for TailWord<'_> {
    fn letter(&self, i: usize) -> Result<Symbol> {
        Ok(self.prefix.get(i).copied().unwrap_or(self.rep))
    }
}

/// The finite-horizon objective `κ̃` derived from a computable objective.
///
/// For `u ∈ X^H`, `evaluate(u) = f.approx(u · rep^ω, n)`; any word `w` with
/// prefix `u` satisfies `|evaluate(u) − f(w)| ≤ eps`.
#[derive(Clone)]
pub struct Truncation {
    objective: SharedObjective,
    horizon: usize,
    precision: u32,
    rep: Symbol,
    eps: Rational,
}

impl fmt::Debug for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Truncation")
            .field("horizon", &self.horizon)
            .field("precision", &self.precision)
            .field("rep", &self.rep)
            .field("eps", &self.eps)
            .finish()
    }
}

/// Splits `eps_prime` into `eps'/2` continuity slack (the modulus search) and
/// `eps'/2` approximation slack (the precision handed to `approx`).
pub fn truncate_objective(
    f: SharedObjective,
    eps_prime: &Rational,
    rep: Option<Symbol>,
    cap: u64,
) -> Result<Truncation> {
    if !eps_prime.is_positive() {
        return Err(Error::invalid("tolerance", format!("{eps_prime} must be positive")));
    }
    let rep = match rep {
        Some(s) => f.alphabet().check(s)?,
        None => f.alphabet().first(),
    };
    let half = eps_prime / Rational::from_integer(2.into());
    let precision = precision_for(&half)?;
    let horizon = modulus_at_precision(f.as_ref(), precision, cap)?;
    Ok(Truncation {
        objective: f,
        horizon,
        precision,
        rep,
        eps: eps_prime.clone(),
    })
}

impl Truncation {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn rep(&self) -> Symbol {
        self.rep
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    pub fn objective(&self) -> &SharedObjective {
        &self.objective
    }

    pub fn evaluate(&self, prefix: &[Symbol]) -> Result<Rational> {
        if prefix.len() != self.horizon {
            return Err(Error::invalid(
                "truncated input",
                format!("expected {} letters, got {}", self.horizon, prefix.len()),
            ));
        }
        let w = TailWord {
            prefix,
            rep: self.rep,
        };
        self.objective.approx(&w, self.precision)
    }

    /// Minimum and maximum of `evaluate` over all of `X^H` (through the
    /// objective's representatives), or `None` when that exceeds `cap` words.
    pub fn range(&self, cap: u64) -> Result<Option<(Rational, Rational)>> {
        let reps = self.objective.representatives();
        match word_count(reps.len(), self.horizon) {
            Some(c) if c <= cap => {}
            _ => return Ok(None),
        }
        let mut words = WordEnumerator::new(&reps, self.horizon);
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        while let Some(u) = words.next_word() {
            let v = self.evaluate(u)?;
            if lo.as_ref().is_none_or(|l| &v < l) {
                lo = Some(v.clone());
            }
            if hi.as_ref().is_none_or(|h| &v > h) {
                hi = Some(v);
            }
        }
        Ok(lo.zip(hi))
    }

    /// Whether `evaluate` is identically zero, when decidable within `cap`.
    pub fn is_identically_zero(&self, cap: u64) -> Result<Option<bool>> {
        Ok(self
            .range(cap)?
            .map(|(lo, hi)| lo.is_zero() && hi.is_zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::word::LassoWord;

    fn ab() -> Arc<Alphabet> {
        Arc::new(Alphabet::named(&["a", "b"]).unwrap())
    }

    /// 1 if w[0] = a else 0.
    fn first_is_a() -> FnObjective {
        FnObjective::new(ab(), int(1), |w, _| {
            Ok(if w.letter(0)?.0 == 0 { int(1) } else { int(0) })
        })
    }

    /// Sum of the first three letter indices.
    fn sum_first_three() -> FnObjective {
        FnObjective::new(ab(), int(3), |w, _| {
            let mut s = 0i64;
            for i in 0..3 {
                s += w.letter(i)?.0 as i64;
            }
            Ok(int(s))
        })
    }

    #[test]
    fn modulus_depth_one() {
        assert_eq!(
            modulus_of_continuity(&first_is_a(), &ratio(1, 4), DEFAULT_ENUMERATION_CAP).unwrap(),
            1
        );
    }

    #[test]
    fn modulus_finite_sum() {
        assert_eq!(
            modulus_of_continuity(&sum_first_three(), &int(1), DEFAULT_ENUMERATION_CAP).unwrap(),
            3
        );
        // H = 1 and H = 2 both trip the probe.
        let f = sum_first_three();
        assert!(!all_within(&f, &f.representatives(), 1, 0).unwrap());
        assert!(!all_within(&f, &f.representatives(), 2, 0).unwrap());
    }

    #[test]
    fn modulus_budget() {
        let deep = FnObjective::new(ab(), int(1), |w, _| {
            w.letter(30)?;
            Ok(int(0))
        });
        let err = modulus_of_continuity(&deep, &int(1), 1000).unwrap_err();
        assert!(err.is_budget(), "{err}");
    }

    #[test]
    fn constant_composition() {
        let xi: SharedObjective = Arc::new(ConstantObjective::new(ab(), int(0)));
        let domain = Arc::new(Alphabet::named(&["x", "y", "z"]).unwrap());
        let l = LabelingFunction::new(domain.clone(), vec!["a".into(), "b".into(), "a".into()]).unwrap();
        let k = compose_with_labeling(xi, &l).unwrap();
        let w = LassoWord::new(vec![Symbol(2)], vec![Symbol(1)], domain).unwrap();
        assert_eq!(k.approx(&w, 5).unwrap(), int(0));
    }

    #[test]
    fn composition_rejects_foreign_labels() {
        let xi: SharedObjective = Arc::new(ConstantObjective::new(ab(), int(0)));
        let domain = Arc::new(Alphabet::named(&["x"]).unwrap());
        let l = LabelingFunction::new(domain, vec!["c".into()]).unwrap();
        assert!(matches!(
            compose_with_labeling(xi, &l),
            Err(Error::CodomainMismatch(_))
        ));
    }

    #[test]
    fn composition_reads_same_depth() {
        let xi: SharedObjective = Arc::new(sum_first_three());
        let domain = Arc::new(Alphabet::named(&["x", "y", "z"]).unwrap());
        let l = LabelingFunction::new(domain.clone(), vec!["a".into(), "b".into(), "b".into()]).unwrap();
        let k = compose_with_labeling(xi.clone(), &l).unwrap();
        assert_eq!(k.representatives(), [Symbol(0), Symbol(1)]);
        let w = LassoWord::new(vec![Symbol(2), Symbol(0)], vec![Symbol(1)], domain).unwrap();
        let p1 = BoundedProbe::unbounded(&w);
        let v1 = k.approx(&p1, 0).unwrap();
        let labeled: Vec<Symbol> = w.unroll(10).iter().map(|&s| k.feature_of(s)).collect();
        let p2 = BoundedProbe::unbounded(&labeled);
        let v2 = xi.approx(&p2, 0).unwrap();
        assert_eq!(v1, v2);
        assert_eq!(v1, int(2));
        assert_eq!(p1.max_index_read(), p2.max_index_read());
    }

    #[test]
    fn truncation_of_constant() {
        let c = ratio(3, 7);
        let f: SharedObjective = Arc::new(ConstantObjective::new(ab(), c.clone()));
        let t = truncate_objective(f, &ratio(1, 4), None, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(t.horizon(), 1);
        assert_eq!(t.precision(), 3);
        assert_eq!(t.evaluate(&[Symbol(1)]).unwrap(), c);
        assert_eq!(t.range(100).unwrap(), Some((c.clone(), c)));
        assert!(t.evaluate(&[]).is_err());
    }

    #[test]
    fn enumerator_is_lexicographic() {
        let reps = [Symbol(0), Symbol(5)];
        let mut e = WordEnumerator::new(&reps, 2);
        let mut all = Vec::new();
        while let Some(w) = e.next_word() {
            all.push(w.to_vec());
        }
        assert_eq!(
            all,
            vec![
                vec![Symbol(0), Symbol(0)],
                vec![Symbol(0), Symbol(5)],
                vec![Symbol(5), Symbol(0)],
                vec![Symbol(5), Symbol(5)],
            ]
        );
    }
}

//! Satisfaction probability of a GLTL formula as a computable objective.
//!
//! Each event triggers independently at each step with its `θ`. Once every
//! event has triggered at all positions of a block `[p − d, p]`, where `d` is
//! the formula's `X`-depth, the truth of the event form at position 0 no longer
//! depends on anything after `p`. `approx` sums the probability of accepted
//! streams that resolve within `H` steps; the unresolved mass is at most
//! `(1 − Θ^(d+1))^⌊H/(d+1)⌋ ≤ 2^-n`, so `approx ≤ f ≤ approx + 2^-n`.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::eval::Compiled;
use super::{event_form, parse_gltl, EventProfile, Gltl, Ltl};
use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::objective::{Objective, DEFAULT_ENUMERATION_CAP};
use crate::rational::{int, min_satisfying, pow, pow2_neg, Rational};
use crate::word::{LassoWord, Word};

/// Per-position event masks: bit `i` says event `i` of the profile triggered.
pub type EventStream = Vec<u64>;

const MAX_EVENTS: usize = 16;
const HORIZON_CAP: u64 = 1 << 20;

#[derive(Debug, Clone)]
pub struct GltlObjective {
    formula: Gltl,
    ltl: Ltl,
    profile: EventProfile,
    alphabet: Arc<Alphabet>,
    /// Props occupy bits `0..k` of a position mask, events bits `k..`.
    compiled: Compiled,
    next_depth: usize,
    /// Probability of each event mask at one step.
    step_prob: Vec<Rational>,
    /// Bits of the alphabet that the formula mentions.
    atom_mask: u32,
    budget: u64,
}

impl GltlObjective {
    /// Over `2^atoms(φ)`, atoms in order of first appearance.
    pub fn new(formula: Gltl) -> Result<Self> {
        let props = formula.atoms();
        Self::with_props(formula, &props)
    }

    /// Over `2^props`; `props` must include every atom of the formula.
    pub fn with_props<S: AsRef<str>>(formula: Gltl, props: &[S]) -> Result<Self> {
        let alphabet = Arc::new(Alphabet::valuations(props)?);
        let (ltl, profile) = event_form(&formula);
        if profile.len() > MAX_EVENTS {
            return Err(Error::invalid(
                "GLTL formula",
                format!("{} expiring operators exceed the limit of {MAX_EVENTS}", profile.len()),
            ));
        }
        let k = props.len() as u32;
        let mut atom_mask = 0u32;
        for a in formula.atoms() {
            let i = alphabet.prop_index(&a).ok_or_else(|| Error::Unknown {
                kind: "atom",
                name: a.clone(),
            })?;
            atom_mask |= 1 << i;
        }
        let compiled = Compiled::new(&ltl, &|name: &str| {
            alphabet
                .prop_index(name)
                .map(|i| i as u32)
                .or_else(|| profile.events.iter().position(|e| e == name).map(|i| k + i as u32))
        })?;
        let step_prob = (0..1u64 << profile.len())
            .map(|mask| {
                profile.theta.iter().enumerate().fold(int(1), |acc, (i, t)| {
                    if mask >> i & 1 == 1 {
                        acc * t
                    } else {
                        acc * (Rational::one() - t)
                    }
                })
            })
            .collect();
        Ok(GltlObjective {
            next_depth: formula.next_depth(),
            formula,
            ltl,
            profile,
            alphabet,
            compiled,
            step_prob,
            atom_mask,
            budget: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// Formula file: an optional `props p q ...` line, then the formula.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut props: Option<Vec<String>> = None;
        let mut body = String::new();
        for line in text.lines() {
            let content = line.split('#').next().unwrap_or("");
            match content.trim_start().strip_prefix("props") {
                Some(rest) if props.is_none() && body.trim().is_empty() && rest.starts_with(char::is_whitespace) => {
                    props = Some(rest.split_whitespace().map(str::to_string).collect());
                    body.push('\n');
                }
                _ => {
                    body.push_str(content);
                    body.push('\n');
                }
            }
        }
        let formula = parse_gltl(&body)?;
        match props {
            Some(p) => Self::with_props(formula, &p),
            None => Self::new(formula),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn formula(&self) -> &Gltl {
        &self.formula
    }

    pub fn event_form(&self) -> &Ltl {
        &self.ltl
    }

    pub fn profile(&self) -> &EventProfile {
        &self.profile
    }

    pub fn next_depth(&self) -> usize {
        self.next_depth
    }

    /// Probability that one block of `d + 1` positions triggers every event.
    pub fn block_trigger(&self) -> Rational {
        pow(&self.profile.joint_trigger(), self.next_depth as u32 + 1)
    }

    /// Smallest multiple `H` of `d + 1`, at least `d + 1`, with
    /// `(1 − Θ^(d+1))^(H/(d+1)) ≤ 2^-n`.
    pub fn horizon(&self, n: u32) -> usize {
        let block = self.next_depth + 1;
        let miss = Rational::one() - self.block_trigger();
        let slack = pow2_neg(n);
        let blocks = min_satisfying(1, HORIZON_CAP, |k| pow(&miss, k as u32) <= slack)
            .expect("miss probability is below 1, so its powers vanish");
        blocks as usize * block
    }

    fn check_budget(&self, horizon: usize) -> Result<()> {
        let bits = self.profile.len() as u64 * horizon as u64;
        if bits < 64 && (1u64 << bits) <= self.budget {
            return Ok(());
        }
        Err(Error::Budget {
            what: "event-stream enumeration",
            needed: format!("(2^{})^{horizon}", self.profile.len()),
            cap: self.budget,
            context: None,
        })
    }

    /// Total probability of streams that resolve within `horizon(n)` steps,
    /// accepted or not.
    pub fn resolved_mass(&self, n: u32) -> Result<Rational> {
        let horizon = self.horizon(n);
        self.check_budget(horizon)?;
        let mut search = Search::new(self, horizon, None);
        search.run(0, 0, &Rational::one())?;
        Ok(search.total)
    }

    fn position_mask(&self, letter: Symbol, events: u64) -> u64 {
        u64::from(letter.0) | events << self.alphabet.props().map_or(0, |p| p.len())
    }
}

struct Search<'a> {
    obj: &'a GltlObjective,
    horizon: usize,
    word: Option<&'a dyn Word>,
    letters: Vec<Symbol>,
    events: Vec<u64>,
    total: Rational,
}

impl<'a> Search<'a> {
    fn new(obj: &'a GltlObjective, horizon: usize, word: Option<&'a dyn Word>) -> Self {
        Search {
            obj,
            horizon,
            word,
            letters: Vec::new(),
            events: vec![0; horizon],
            total: Rational::zero(),
        }
    }

    fn letter(&mut self, i: usize) -> Result<Symbol> {
        let word = self.word.expect("evaluation without a word");
        while self.letters.len() <= i {
            let s = self.obj.alphabet.check(word.letter(self.letters.len())?)?;
            self.letters.push(s);
        }
        Ok(self.letters[i])
    }

    /// Truth of the event form on `(w ⊎ events)[0..=p] · ({})^ω`.
    fn accepted(&mut self, p: usize) -> Result<bool> {
        let mut masks = Vec::with_capacity(p + 2);
        for i in 0..=p {
            let l = self.letter(i)?;
            masks.push(self.obj.position_mask(l, self.events[i]));
        }
        masks.push(0);
        Ok(self.obj.compiled.eval(&masks, p + 1))
    }

    fn run(&mut self, p: usize, run: usize, prob: &Rational) -> Result<()> {
        let all = (1u64 << self.obj.profile.len()) - 1;
        let block = self.obj.next_depth + 1;
        for mask in 0..=all {
            let pr = prob * &self.obj.step_prob[mask as usize];
            if pr.is_zero() {
                continue;
            }
            self.events[p] = mask;
            let streak = if mask == all { run + 1 } else { 0 };
            if streak >= block {
                if self.word.is_none() || self.accepted(p)? {
                    self.total += pr;
                }
            } else if p + 1 < self.horizon {
                self.run(p + 1, streak, &pr)?;
            }
        }
        self.events[p] = 0;
        Ok(())
    }
}

impl Objective for GltlObjective {
    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn approx(&self, word: &dyn Word, n: u32) -> Result<Rational> {
        let horizon = self.horizon(n);
        self.check_budget(horizon)?;
        let mut search = Search::new(self, horizon, Some(word));
        search.run(0, 0, &Rational::one())?;
        Ok(search.total)
    }

    fn value_bound(&self) -> Rational {
        Rational::one()
    }

    fn letter_class(&self, s: Symbol) -> Symbol {
        Symbol(s.0 & self.atom_mask)
    }
}

/// Evaluates the event form of `phi` on `w1 ⊎ stream` and `w2 ⊎ stream` and
/// reports whether the results agree. Events are false past the end of
/// `stream`.
///
/// Preconditions: every event triggers at each position of `[h, h + d]`
/// (`d` = `X`-depth of `phi`), and `w1`, `w2` agree on `[0, h + d]`. Under
/// these the answer is always `true`.
pub fn simultaneous_expiration_check(
    phi: &Gltl,
    h: usize,
    stream: &[u64],
    w1: &LassoWord,
    w2: &LassoWord,
) -> Result<bool> {
    let obj = GltlObjective::with_props(phi.clone(), w1.alphabet().props().unwrap_or(&[]))?;
    if w2.alphabet() != w1.alphabet() {
        return Err(Error::AlphabetMismatch(format!("{} vs {}", w1.alphabet(), w2.alphabet())));
    }
    let d = obj.next_depth;
    let all = (1u64 << obj.profile.len()) - 1;
    if stream.len() <= h + d || stream[h..=h + d].iter().any(|&m| m & all != all) {
        return Err(Error::invalid(
            "expiration check",
            format!("stream must trigger every event on [{h}, {}]", h + d),
        ));
    }
    if (0..=h + d).any(|i| w1.letter_at(i) != w2.letter_at(i)) {
        return Err(Error::invalid(
            "expiration check",
            format!("words must agree on [0, {}]", h + d),
        ));
    }
    let eval = |w: &LassoWord| {
        let start = w.prefix().len().max(stream.len());
        let masks: Vec<u64> = (0..start + w.cycle().len())
            .map(|i| obj.position_mask(w.letter_at(i), stream.get(i).copied().unwrap_or(0) & all))
            .collect();
        obj.compiled.eval(&masks, start)
    };
    Ok(eval(w1) == eval(w2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use num_traits::Signed;

    fn obj(src: &str) -> GltlObjective {
        GltlObjective::new(parse_gltl(src).unwrap()).unwrap()
    }

    fn word(o: &GltlObjective, text: &str) -> LassoWord {
        LassoWord::parse(text, o.alphabet().clone()).unwrap()
    }

    #[test]
    fn eventually_immediate() {
        let o = obj("F[1/2] a");
        let w = word(&o, "{a}^{}");
        for n in [0, 4, 8] {
            let v = o.approx(&w, n).unwrap();
            assert!(v >= int(1) - pow2_neg(n) && v <= int(1), "n={n} v={v}");
        }
    }

    #[test]
    fn eventually_at_two() {
        let o = obj("F[1/2] a");
        let w = word(&o, "{};{};{a}^{}");
        for n in [2, 4, 8] {
            let v = o.approx(&w, n).unwrap();
            assert!(v <= ratio(1, 4) && v >= ratio(1, 4) - pow2_neg(n), "n={n} v={v}");
        }
    }

    #[test]
    fn eventually_never() {
        let o = obj("F[1/2] a");
        let w = word(&o, "^{}");
        for n in 0..8 {
            assert_eq!(o.approx(&w, n).unwrap(), Rational::zero());
        }
    }

    #[test]
    fn resolved_mass_partition() {
        let o = obj("G[3/4] (a | F[2/3] b)");
        let theta = ratio(1, 2);
        for n in 0..8 {
            let h = o.horizon(n);
            let expected = int(1) - pow(&(int(1) - &theta), h as u32);
            assert_eq!(o.resolved_mass(n).unwrap(), expected);
        }
    }

    #[test]
    fn no_events_is_deterministic() {
        let o = obj("X a & !b");
        assert_eq!(o.horizon(10), 2);
        let w = word(&o, "{};{a}^{}");
        assert_eq!(o.approx(&w, 10).unwrap(), int(1));
        let w = word(&o, "{b};{a}^{}");
        assert_eq!(o.approx(&w, 10).unwrap(), int(0));
    }

    #[test]
    fn horizon_with_next() {
        let o = obj("G[1/2] X a");
        assert_eq!(o.next_depth(), 1);
        // (1 − 1/4)^k ≤ 2^-3 first at k = 8
        assert_eq!(o.horizon(3), 16);
        let w = word(&o, "^{a}");
        let v = o.approx(&w, 3).unwrap();
        assert!((int(1) - v).abs() <= pow2_neg(3));
    }

    #[test]
    fn budget_guard() {
        let o = obj("F[1/2] a & G[1/2] b").with_budget(1000);
        let w = word(&o, "^{a}");
        assert!(o.approx(&w, 8).unwrap_err().is_budget());
    }

    #[test]
    fn letter_classes_ignore_extra_props() {
        let o = GltlObjective::with_props(parse_gltl("F[1/2] b").unwrap(), &["a", "b", "c"]).unwrap();
        assert_eq!(o.representatives(), [Symbol(0), Symbol(2)]);
        assert!(GltlObjective::with_props(parse_gltl("F[1/2] z").unwrap(), &["a"]).is_err());
    }

    #[test]
    fn file_with_props_line() {
        let o = GltlObjective::parse("# reach\nprops goal lava\nF[1/2] goal\n  & G[1/2] !lava\n").unwrap();
        assert_eq!(o.alphabet().props().unwrap(), ["goal", "lava"]);
        assert_eq!(o.profile().len(), 2);
        assert!(matches!(
            GltlObjective::parse("props a\nF[1/2] (a"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn expiration_examples() {
        let phi = parse_gltl("G[1/2] a").unwrap();
        let alphabet = Arc::new(Alphabet::valuations(&["a"]).unwrap());
        let w1 = LassoWord::parse("{a};{a};{a};{a}^{}", alphabet.clone()).unwrap();
        let w2 = LassoWord::parse("{a};{a};{a};{a}^{a}", alphabet).unwrap();
        let stream = vec![0, 0, 0, 1];
        assert!(simultaneous_expiration_check(&phi, 3, &stream, &w1, &w1).unwrap());
        assert!(simultaneous_expiration_check(&phi, 3, &stream, &w1, &w2).unwrap());
        assert!(simultaneous_expiration_check(&phi, 2, &stream, &w1, &w2).is_err());
    }
}

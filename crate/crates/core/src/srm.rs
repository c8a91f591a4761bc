//! Simple reward machines and their discounted-reward objective.
//!
//! The objective is `Σ_{k≥0} γ^k · δ_r(u_k, u_{k+1})` with `u_{k+1} = δ_u(u_k, w[k])`,
//! so the first transition is undiscounted.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rational::{int, min_satisfying, parse_rational, pow, pow2_neg, Rational};
use crate::text::{self, Line};
use crate::word::{LassoWord, Word};

/// Largest horizon the horizon search will consider.
const HORIZON_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleRewardMachine {
    alphabet: Arc<Alphabet>,
    states: Vec<String>,
    /// `next[u * |2^Π| + letter]`
    next: Vec<usize>,
    /// `reward[u * |U| + u']`
    reward: Vec<Rational>,
    init: usize,
    gamma: Rational,
    r_max: Rational,
    /// Letters with identical transition columns share a leader.
    classes: Vec<Symbol>,
}

impl SimpleRewardMachine {
    /// `next[u][letter]` must be total over `U × 2^Π`; `reward[u][u']` over `U × U`.
    pub fn new(
        alphabet: Arc<Alphabet>,
        states: Vec<String>,
        init: usize,
        gamma: Rational,
        next: Vec<Vec<usize>>,
        reward: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if alphabet.props().is_none() {
            return Err(Error::AlphabetMismatch(
                "a reward machine reads proposition valuations".into(),
            ));
        }
        if states.is_empty() {
            return Err(Error::invalid("reward machine", "no states"));
        }
        if init >= states.len() {
            return Err(Error::invalid("reward machine", "initial state out of range"));
        }
        if !(gamma.is_positive() && gamma < Rational::one()) {
            return Err(Error::invalid(
                "reward machine",
                format!("discount {gamma} must lie in (0, 1)"),
            ));
        }
        let letters = alphabet.len() as usize;
        if next.len() != states.len() || next.iter().any(|row| row.len() != letters) {
            return Err(Error::invalid("reward machine", "transition table is not total"));
        }
        if next.iter().flatten().any(|&v| v >= states.len()) {
            return Err(Error::invalid("reward machine", "transition target out of range"));
        }
        if reward.len() != states.len() || reward.iter().any(|row| row.len() != states.len()) {
            return Err(Error::invalid("reward machine", "reward table is not U × U"));
        }
        let r_max = reward
            .iter()
            .flatten()
            .map(|r| r.abs())
            .max()
            .unwrap_or_else(Rational::zero);
        let classes = text::column_classes(&alphabet, &next);
        Ok(SimpleRewardMachine {
            alphabet,
            states,
            classes,
            next: next.into_iter().flatten().collect(),
            reward: reward.into_iter().flatten().collect(),
            init,
            gamma,
            r_max,
        })
    }

    /// The machine from the goal/lava grid example: `u1` moves to `u2` with
    /// reward 1 on `goal ∧ ¬lava`, any `lava` leads to the absorbing `u3`, and
    /// every other transition is a zero-reward self-loop.
    pub fn reach_goal_avoid_lava(gamma: Rational) -> Result<Self> {
        let alphabet = Arc::new(Alphabet::valuations(&["goal", "lava"])?);
        let goal = 1usize;
        let lava = 2usize;
        let mut next = vec![vec![0; 4], vec![1; 4], vec![2; 4]];
        for letter in 0..4 {
            if letter & lava != 0 {
                next[0][letter] = 2;
                next[1][letter] = 2;
            } else if letter & goal != 0 {
                next[0][letter] = 1;
            }
        }
        let mut reward = vec![vec![Rational::zero(); 3]; 3];
        reward[0][1] = int(1);
        Self::new(
            alphabet,
            vec!["u1".into(), "u2".into(), "u3".into()],
            0,
            gamma,
            next,
            reward,
        )
    }

    pub fn alphabet_arc(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    pub fn r_max(&self) -> &Rational {
        &self.r_max
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn step(&self, u: usize, letter: Symbol) -> usize {
        self.next[u * self.alphabet.len() as usize + letter.index()]
    }

    pub fn reward(&self, u: usize, v: usize) -> &Rational {
        &self.reward[u * self.states.len() + v]
    }

    /// Smallest `H` with `r_max · γ^H ≤ (1 − γ) · 2^-n` (0 when all rewards vanish).
    pub fn horizon(&self, n: u32) -> usize {
        if self.r_max.is_zero() {
            return 0;
        }
        let slack = (Rational::one() - &self.gamma) * pow2_neg(n);
        min_satisfying(0, HORIZON_CAP, |h| {
            &self.r_max * pow(&self.gamma, h as u32) <= slack
        })
        .expect("geometric tail eventually drops below any positive slack") as usize
    }

    /// Bound on the discounted tail from step `depth` on: `r_max · γ^depth / (1 − γ)`.
    pub fn tail_bound(&self, depth: usize) -> Rational {
        &self.r_max * pow(&self.gamma, depth as u32) / (Rational::one() - &self.gamma)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_srm(text)
    }
}

impl Objective for SimpleRewardMachine {
    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    fn approx(&self, word: &dyn Word, n: u32) -> Result<Rational> {
        let horizon = self.horizon(n);
        let mut u = self.init;
        let mut value = Rational::zero();
        let mut discount = Rational::one();
        for k in 0..horizon {
            let letter = self.alphabet.check(word.letter(k)?)?;
            let v = self.step(u, letter);
            let r = self.reward(u, v);
            if !r.is_zero() {
                value += &discount * r;
            }
            discount *= &self.gamma;
            u = v;
        }
        Ok(value)
    }

    fn value_bound(&self) -> Rational {
        &self.r_max / (Rational::one() - &self.gamma)
    }

    fn letter_class(&self, s: Symbol) -> Symbol {
        self.classes.get(s.index()).copied().unwrap_or(s)
    }
}

/// Interval `(lower, upper)` from running `machine` for `depth` steps on `w`:
/// `lower` is the partial sum and `upper = lower + r_max · γ^depth / (1 − γ)`.
///
/// The true value lies in `[lower − tail, upper]`. Computed by direct
/// simulation on the lasso, independently of [`Objective::approx`].
pub fn srm_brute_oracle(
    machine: &SimpleRewardMachine,
    w: &LassoWord,
    depth: usize,
) -> (Rational, Rational) {
    let mut u = machine.init;
    let mut lower = Rational::zero();
    for k in 0..depth {
        let v = machine.step(u, w.letter_at(k));
        lower += pow(&machine.gamma, k as u32) * machine.reward(u, v);
        u = v;
    }
    let upper = &lower + machine.tail_bound(depth);
    (lower, upper)
}

impl fmt::Display for SimpleRewardMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let props = self.alphabet.props().unwrap_or(&[]);
        writeln!(f, "srm gamma={}", self.gamma)?;
        writeln!(f, "props {}", props.join(" "))?;
        writeln!(f, "states {}", self.states.join(" "))?;
        writeln!(f, "init {}", self.states[self.init])?;
        for (u, name) in self.states.iter().enumerate() {
            for letter in self.alphabet.symbols() {
                let v = self.step(u, letter);
                writeln!(
                    f,
                    "trans {name} {} {} {}",
                    self.alphabet.name(letter),
                    self.states[v],
                    self.reward(u, v)
                )?;
            }
        }
        Ok(())
    }
}

fn parse_srm(input: &str) -> Result<SimpleRewardMachine> {
    let lines = text::lines(input)?;
    let mut iter = lines.iter();
    let header = iter
        .next()
        .ok_or_else(|| Error::parse(1, 1, "empty reward machine file"))?;
    if header.keyword() != "srm" {
        return Err(header.error(1, "expected `srm gamma=p/q` header"));
    }
    let mut gamma = None;
    for tok in header.args() {
        let (k, v) = tok.key_value(header)?;
        match k {
            "gamma" => gamma = Some(parse_rational(v).map_err(|e| header.error(tok.column, e.to_string()))?),
            _ => return Err(header.error(tok.column, format!("unknown header key `{k}`"))),
        }
    }
    let gamma = gamma.ok_or_else(|| header.error(1, "missing gamma"))?;

    let mut props: Option<Vec<String>> = None;
    let mut states: Option<Vec<String>> = None;
    let mut init: Option<&Line<'_>> = None;
    let mut trans: Vec<&Line<'_>> = Vec::new();
    for line in iter {
        match line.keyword() {
            "props" => props = Some(line.args().iter().map(|t| t.text.to_string()).collect()),
            "states" => states = Some(line.args().iter().map(|t| t.text.to_string()).collect()),
            "init" => {
                line.expect_args(1)?;
                init = Some(line);
            }
            "trans" => trans.push(line),
            other => return Err(line.error(1, format!("unknown directive `{other}`"))),
        }
    }
    let props = props.ok_or_else(|| Error::parse(header.number, 1, "missing `props` line"))?;
    let states = states.ok_or_else(|| Error::parse(header.number, 1, "missing `states` line"))?;
    let alphabet = Arc::new(Alphabet::valuations(&props)?);
    let index = text::state_index("reward machine", &states)?;
    let init_line = init.ok_or_else(|| Error::parse(header.number, 1, "missing `init` line"))?;
    let init = text::lookup(&index, init_line, &init_line.args()[0])?;

    let mut reward: Vec<Vec<Option<Rational>>> = vec![vec![None; states.len()]; states.len()];
    let table = text::transition_table("reward machine", &trans, 4, &states, &index, &alphabet, |line, u, v| {
        let tok = &line.args()[3];
        let r = parse_rational(tok.text).map_err(|e| line.error(tok.column, e.to_string()))?;
        match &reward[u][v] {
            Some(existing) if existing != &r => Err(line.error(
                tok.column,
                format!("reward for ({}, {}) already set to {existing}", states[u], states[v]),
            )),
            _ => {
                reward[u][v] = Some(r);
                Ok(())
            }
        }
    })?;
    let reward = reward
        .into_iter()
        .map(|row| row.into_iter().map(|r| r.unwrap_or_else(Rational::zero)).collect())
        .collect();
    SimpleRewardMachine::new(alphabet, states, init, gamma, table, reward)
}

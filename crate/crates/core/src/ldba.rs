//! Limit-deterministic Büchi automata and the discounted LTL-in-the-limit
//! objective built from them.
//!
//! A run visits automaton states `u_0, u_1, ...`. State `u` pays
//! `R(u) = (1 − γ₁)·1{u ∈ B}` and discounts by `Γ(u) = γ₁` on accepting states,
//! `γ₂` elsewhere. At each step the agent either takes an available ε-move or
//! consumes the next environment letter; the objective is the best value over
//! all such choices.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::objective::{Objective, DEFAULT_ENUMERATION_CAP};
use crate::rational::{min_satisfying, parse_rational, pow, pow2_neg, Rational};
use crate::text::{self, Line};
use crate::word::Word;

const HORIZON_CAP: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ldba {
    alphabet: Arc<Alphabet>,
    states: Vec<String>,
    /// Membership in the accepting component `U_B`.
    in_accepting_component: Vec<bool>,
    accepting: Vec<bool>,
    eps_names: Vec<String>,
    /// `next[u * |2^Π| + letter]`
    next: Vec<usize>,
    /// `eps_next[u * |E| + e]`
    eps_next: Vec<Option<usize>>,
    init: usize,
    classes: Vec<Symbol>,
}

/// Description of an automaton handed to [`Ldba::new`].
#[derive(Debug, Clone)]
pub struct LdbaParts {
    pub alphabet: Arc<Alphabet>,
    pub states: Vec<String>,
    pub in_accepting_component: Vec<bool>,
    pub accepting: Vec<bool>,
    pub eps_names: Vec<String>,
    pub next: Vec<Vec<usize>>,
    /// `(source, label, target)`
    pub eps_moves: Vec<(usize, usize, usize)>,
    pub init: usize,
}

impl Ldba {
    /// Checks the limit-determinism conditions: no ε-move leaves `U_B`, letter
    /// transitions from `U_B` stay in `U_B`, and `B ⊆ U_B`.
    pub fn new(parts: LdbaParts) -> Result<Self> {
        let LdbaParts {
            alphabet,
            states,
            in_accepting_component,
            accepting,
            eps_names,
            next,
            eps_moves,
            init,
        } = parts;
        if alphabet.props().is_none() {
            return Err(Error::AlphabetMismatch("an LDBA reads proposition valuations".into()));
        }
        let n = states.len();
        if n == 0 {
            return Err(Error::invalid("LDBA", "no states"));
        }
        if init >= n || in_accepting_component.len() != n || accepting.len() != n {
            return Err(Error::invalid("LDBA", "state tables have inconsistent sizes"));
        }
        let letters = alphabet.len() as usize;
        if next.len() != n || next.iter().any(|r| r.len() != letters) {
            return Err(Error::invalid("LDBA", "letter transition table is not total"));
        }
        if next.iter().flatten().any(|&v| v >= n) {
            return Err(Error::invalid("LDBA", "transition target out of range"));
        }
        for u in 0..n {
            if accepting[u] && !in_accepting_component[u] {
                return Err(Error::invalid(
                    "LDBA",
                    format!("accepting state {} lies outside the accepting component", states[u]),
                ));
            }
            if in_accepting_component[u] {
                if let Some(l) = next[u].iter().position(|&v| !in_accepting_component[v]) {
                    return Err(Error::invalid(
                        "LDBA",
                        format!(
                            "letter {} leaves the accepting component from {}",
                            alphabet.name(Symbol(l as u32)),
                            states[u]
                        ),
                    ));
                }
            }
        }
        let mut eps_next = vec![None; n * eps_names.len()];
        for &(u, e, v) in &eps_moves {
            if u >= n || v >= n || e >= eps_names.len() {
                return Err(Error::invalid("LDBA", "ε-move out of range"));
            }
            if in_accepting_component[u] {
                return Err(Error::invalid(
                    "LDBA",
                    format!("ε-move {} leaves accepting-component state {}", eps_names[e], states[u]),
                ));
            }
            let slot = &mut eps_next[u * eps_names.len() + e];
            if slot.is_some() {
                return Err(Error::invalid(
                    "LDBA",
                    format!("ε-move {} from {} has two targets", eps_names[e], states[u]),
                ));
            }
            *slot = Some(v);
        }
        let classes = text::column_classes(&alphabet, &next);
        Ok(Ldba {
            alphabet,
            states,
            in_accepting_component,
            accepting,
            eps_names,
            next: next.into_iter().flatten().collect(),
            eps_next,
            init,
            classes,
        })
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn is_accepting(&self, u: usize) -> bool {
        self.accepting[u]
    }

    pub fn in_accepting_component(&self, u: usize) -> bool {
        self.in_accepting_component[u]
    }

    pub fn eps_names(&self) -> &[String] {
        &self.eps_names
    }

    pub fn step(&self, u: usize, letter: Symbol) -> usize {
        self.next[u * self.alphabet.len() as usize + letter.index()]
    }

    pub fn eps_step(&self, u: usize, e: usize) -> Option<usize> {
        self.eps_next[u * self.eps_names.len() + e]
    }

    pub fn parse(input: &str) -> Result<(Self, Rational, Rational)> {
        parse_ldba(input)
    }
}

/// An LDBA with its two discount hyper-parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BozkurtSpec {
    ldba: Ldba,
    gamma1: Rational,
    gamma2: Rational,
}

impl BozkurtSpec {
    pub fn new(ldba: Ldba, gamma1: Rational, gamma2: Rational) -> Result<Self> {
        for (name, g) in [("gamma1", &gamma1), ("gamma2", &gamma2)] {
            if !(g.is_positive() && g < &Rational::one()) {
                return Err(Error::invalid("LDBA spec", format!("{name} = {g} must lie in (0, 1)")));
            }
        }
        Ok(BozkurtSpec { ldba, gamma1, gamma2 })
    }

    pub fn parse(input: &str) -> Result<Self> {
        let (ldba, g1, g2) = Ldba::parse(input)?;
        Self::new(ldba, g1, g2)
    }

    pub fn ldba(&self) -> &Ldba {
        &self.ldba
    }

    pub fn gamma1(&self) -> &Rational {
        &self.gamma1
    }

    pub fn gamma2(&self) -> &Rational {
        &self.gamma2
    }

    pub fn gamma_max(&self) -> &Rational {
        std::cmp::max(&self.gamma1, &self.gamma2)
    }

    pub fn reward(&self, u: usize) -> Rational {
        if self.ldba.accepting[u] {
            Rational::one() - &self.gamma1
        } else {
            Rational::zero()
        }
    }

    pub fn discount(&self, u: usize) -> &Rational {
        if self.ldba.accepting[u] {
            &self.gamma1
        } else {
            &self.gamma2
        }
    }

    /// Smallest `H >= 1` with `γmax^(H−1) ≤ (1 − γmax)·2^-n`.
    pub fn horizon(&self, n: u32) -> usize {
        let g = self.gamma_max();
        let slack = (Rational::one() - g) * pow2_neg(n);
        min_satisfying(1, HORIZON_CAP, |h| pow(g, (h - 1) as u32) <= slack)
            .expect("geometric tail eventually drops below any positive slack") as usize
    }
}

/// The truncated sum `g_{0:H}` for choice sequence `w_e`.
///
/// `w_e[k] = Some(e)` takes ε-move `e` at step `k` if it is available from the
/// current state; `None` (⊥) or an unavailable move consumes the next
/// environment letter instead. The environment cursor only advances on letter
/// steps.
pub fn bozkurt_helper(
    spec: &BozkurtSpec,
    horizon: usize,
    w_e: &[Option<usize>],
    w: &dyn Word,
) -> Result<Rational> {
    if w_e.len() != horizon {
        return Err(Error::invalid(
            "ε-choice sequence",
            format!("expected {horizon} entries, got {}", w_e.len()),
        ));
    }
    let ldba = &spec.ldba;
    let mut u = ldba.init;
    let mut cursor = 0usize;
    let mut value = Rational::zero();
    let mut discount = Rational::one();
    for (k, choice) in w_e.iter().enumerate() {
        if ldba.accepting[u] {
            value += &discount * spec.reward(u);
        }
        discount *= spec.discount(u);
        if k + 1 == horizon {
            break;
        }
        match choice.and_then(|e| ldba.eps_step(u, e)) {
            Some(v) => u = v,
            None => {
                let letter = ldba.alphabet.check(w.letter(cursor)?)?;
                u = ldba.step(u, letter);
                cursor += 1;
            }
        }
    }
    Ok(value)
}

/// `approx(w, n) = max over w_e ∈ (E ∪ {⊥})^H of g_{0:H}(w_e, w)`.
#[derive(Debug, Clone)]
pub struct BozkurtObjective {
    spec: BozkurtSpec,
    budget: u64,
}

impl BozkurtObjective {
    pub fn new(spec: BozkurtSpec) -> Self {
        BozkurtObjective {
            spec,
            budget: DEFAULT_ENUMERATION_CAP,
        }
    }

    /// Cap on `(|E| + 1)^H`, the number of choice sequences.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn spec(&self) -> &BozkurtSpec {
        &self.spec
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn horizon(&self, n: u32) -> usize {
        self.spec.horizon(n)
    }

    fn check_budget(&self, horizon: usize) -> Result<()> {
        let branches = self.spec.ldba.eps_names.len() as u64 + 1;
        match branches.checked_pow(horizon as u32) {
            Some(c) if c <= self.budget => Ok(()),
            _ => Err(Error::Budget {
                what: "ε-choice enumeration",
                needed: format!("{branches}^{horizon}"),
                cap: self.budget,
                context: None,
            }),
        }
    }
}

struct Search<'a> {
    spec: &'a BozkurtSpec,
    horizon: usize,
    word: &'a dyn Word,
    letters: Vec<Symbol>,
    memo: HashMap<(usize, usize, usize), Rational>,
}

impl Search<'_> {
    fn letter(&mut self, t: usize) -> Result<Symbol> {
        while self.letters.len() <= t {
            let i = self.letters.len();
            let s = self.spec.ldba.alphabet.check(self.word.letter(i)?)?;
            self.letters.push(s);
        }
        Ok(self.letters[t])
    }

    /// Best `Σ_{j≥k}` of the remaining discounted rewards, relative to step `k`.
    fn value(&mut self, k: usize, u: usize, t: usize) -> Result<Rational> {
        if let Some(v) = self.memo.get(&(k, u, t)) {
            return Ok(v.clone());
        }
        let spec = self.spec;
        let mut v = spec.reward(u);
        if k + 1 < self.horizon {
            let letter = self.letter(t)?;
            let mut best = self.value(k + 1, spec.ldba.step(u, letter), t + 1)?;
            for e in 0..spec.ldba.eps_names.len() {
                if let Some(target) = spec.ldba.eps_step(u, e) {
                    let alt = self.value(k + 1, target, t)?;
                    if alt > best {
                        best = alt;
                    }
                }
            }
            v += spec.discount(u) * best;
        }
        self.memo.insert((k, u, t), v.clone());
        Ok(v)
    }
}

impl Objective for BozkurtObjective {
    fn alphabet(&self) -> &Arc<Alphabet> {
        &self.spec.ldba.alphabet
    }

    fn approx(&self, word: &dyn Word, n: u32) -> Result<Rational> {
        let horizon = self.horizon(n);
        self.check_budget(horizon)?;
        // Same maximum as the literal enumeration of choice sequences: every
        // discount is positive, so maximizing each suffix maximizes the sum.
        let mut search = Search {
            spec: &self.spec,
            horizon,
            word,
            letters: Vec::new(),
            memo: HashMap::new(),
        };
        search.value(0, self.spec.ldba.init, 0)
    }

    fn value_bound(&self) -> Rational {
        Rational::one()
    }

    fn letter_class(&self, s: Symbol) -> Symbol {
        self.spec.ldba.classes.get(s.index()).copied().unwrap_or(s)
    }
}

impl fmt::Display for BozkurtSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = &self.ldba;
        writeln!(f, "ldba gamma1={} gamma2={}", self.gamma1, self.gamma2)?;
        writeln!(f, "props {}", l.alphabet.props().unwrap_or(&[]).join(" "))?;
        let part = |b: bool| -> Vec<&str> {
            l.states
                .iter()
                .enumerate()
                .filter(|&(u, _)| l.in_accepting_component[u] == b)
                .map(|(_, s)| s.as_str())
                .collect()
        };
        writeln!(f, "states {} | {}", part(false).join(" "), part(true).join(" "))?;
        writeln!(f, "init {}", l.states[l.init])?;
        let acc: Vec<&str> = (0..l.states.len())
            .filter(|&u| l.accepting[u])
            .map(|u| l.states[u].as_str())
            .collect();
        if !acc.is_empty() {
            writeln!(f, "accept {}", acc.join(" "))?;
        }
        for (u, name) in l.states.iter().enumerate() {
            for (e, label) in l.eps_names.iter().enumerate() {
                if let Some(v) = l.eps_step(u, e) {
                    writeln!(f, "eps {label} {name} -> {}", l.states[v])?;
                }
            }
        }
        for (u, name) in l.states.iter().enumerate() {
            for letter in l.alphabet.symbols() {
                writeln!(f, "trans {name} {} {}", l.alphabet.name(letter), l.states[l.step(u, letter)])?;
            }
        }
        Ok(())
    }
}

fn parse_ldba(input: &str) -> Result<(Ldba, Rational, Rational)> {
    let lines = text::lines(input)?;
    let mut iter = lines.iter();
    let header = iter
        .next()
        .ok_or_else(|| Error::parse(1, 1, "empty LDBA file"))?;
    if header.keyword() != "ldba" {
        return Err(header.error(1, "expected `ldba gamma1=p/q gamma2=p/q` header"));
    }
    let (mut g1, mut g2) = (None, None);
    for tok in header.args() {
        let (k, v) = tok.key_value(header)?;
        let r = parse_rational(v).map_err(|e| header.error(tok.column, e.to_string()))?;
        match k {
            "gamma1" => g1 = Some(r),
            "gamma2" => g2 = Some(r),
            _ => return Err(header.error(tok.column, format!("unknown header key `{k}`"))),
        }
    }
    let g1 = g1.ok_or_else(|| header.error(1, "missing gamma1"))?;
    let g2 = g2.ok_or_else(|| header.error(1, "missing gamma2"))?;

    let mut props: Option<Vec<String>> = None;
    let mut states_line: Option<&Line<'_>> = None;
    let mut init: Option<&Line<'_>> = None;
    let mut accept: Vec<&Line<'_>> = Vec::new();
    let mut eps: Vec<&Line<'_>> = Vec::new();
    let mut trans: Vec<&Line<'_>> = Vec::new();
    for line in iter {
        match line.keyword() {
            "props" => props = Some(line.args().iter().map(|t| t.text.to_string()).collect()),
            "states" => states_line = Some(line),
            "init" => {
                line.expect_args(1)?;
                init = Some(line);
            }
            "accept" => accept.push(line),
            "eps" => eps.push(line),
            "trans" => trans.push(line),
            other => return Err(line.error(1, format!("unknown directive `{other}`"))),
        }
    }
    let props = props.ok_or_else(|| Error::parse(header.number, 1, "missing `props` line"))?;
    let alphabet = Arc::new(Alphabet::valuations(&props)?);
    let states_line = states_line.ok_or_else(|| Error::parse(header.number, 1, "missing `states` line"))?;
    let bar = states_line
        .args()
        .iter()
        .position(|t| t.text == "|")
        .ok_or_else(|| states_line.error(1, "`states` needs `|` between the initial and accepting components"))?;
    let mut states = Vec::new();
    let mut in_b = Vec::new();
    for (i, tok) in states_line.args().iter().enumerate() {
        if i == bar {
            continue;
        }
        if tok.text == "|" {
            return Err(states_line.error(tok.column, "more than one `|`"));
        }
        states.push(tok.text.to_string());
        in_b.push(i > bar);
    }
    let index = text::state_index("LDBA", &states)?;
    let init_line = init.ok_or_else(|| Error::parse(header.number, 1, "missing `init` line"))?;
    let init = text::lookup(&index, init_line, &init_line.args()[0])?;
    let mut accepting = vec![false; states.len()];
    for line in accept {
        for tok in line.args() {
            accepting[text::lookup(&index, line, tok)?] = true;
        }
    }
    let mut eps_names: Vec<String> = Vec::new();
    let mut eps_moves = Vec::new();
    for line in eps {
        let args = line.expect_args(4)?;
        if args[2].text != "->" {
            return Err(line.error(args[2].column, "expected `eps LABEL SRC -> DST`"));
        }
        let label = args[0].text;
        let e = match eps_names.iter().position(|n| n == label) {
            Some(e) => e,
            None => {
                eps_names.push(label.to_string());
                eps_names.len() - 1
            }
        };
        let u = text::lookup(&index, line, &args[1])?;
        let v = text::lookup(&index, line, &args[3])?;
        eps_moves.push((u, e, v));
    }
    let next = text::transition_table("LDBA", &trans, 3, &states, &index, &alphabet, |_, _, _| Ok(()))?;
    let ldba = Ldba::new(LdbaParts {
        alphabet,
        states,
        in_accepting_component: in_b,
        accepting,
        eps_names,
        next,
        eps_moves,
        init,
    })?;
    Ok((ldba, g1, g2))
}

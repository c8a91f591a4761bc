//! Reference implementations used as oracles by the integration tests.
//!
//! Each one follows the textbook definition literally and shares no search
//! code with the library: no memoization, no pruning, no early exits.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use num_traits::{One, Zero};
use pacrl_core::env::{GridSpec, Mdp};
use pacrl_core::gltl::{GltlObjective, Ltl};
use pacrl_core::ldba::BozkurtSpec;
use pacrl_core::objective::Truncation;
use pacrl_core::{Objective, Rational, Symbol, Word};

/// All vectors in `0..base` of length `len`, in lexicographic order.
pub fn odometer(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur = Some(vec![0usize; len]);
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = len;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            next[i] += 1;
            if next[i] < base {
                cur = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(out)
    })
}

/// Value of one run of the LDBA reward scheme under a fixed ε-choice sequence.
/// `choice[k] = 0` means "read a letter"; `d > 0` picks ε-label `d − 1`.
fn ldba_run(spec: &BozkurtSpec, w: &dyn Word, horizon: usize, choice: &[usize]) -> Rational {
    let aut = spec.ldba();
    let g1 = spec.gamma1().clone();
    let g2 = spec.gamma2().clone();
    let mut u = aut.init();
    let mut cursor = 0usize;
    let mut discount = Rational::one();
    let mut value = Rational::zero();
    for k in 0..horizon {
        if aut.is_accepting(u) {
            value += &discount * (Rational::one() - &g1);
            discount *= &g1;
        } else {
            discount *= &g2;
        }
        if k + 1 == horizon {
            break;
        }
        let eps = choice[k].checked_sub(1).and_then(|e| aut.eps_step(u, e));
        match eps {
            Some(v) => u = v,
            None => {
                u = aut.step(u, w.letter(cursor).unwrap());
                cursor += 1;
            }
        }
    }
    value
}

/// Maximum over every sequence in `(E ∪ {⊥})^(H−1)` (the last choice is never
/// consulted).
pub fn ldba_brute(spec: &BozkurtSpec, w: &dyn Word, n: u32) -> Rational {
    let horizon = spec.horizon(n);
    let base = spec.ldba().eps_names().len() + 1;
    odometer(base, horizon.saturating_sub(1))
        .map(|c| ldba_run(spec, w, horizon, &c))
        .max()
        .unwrap()
}

fn holds_at(psi: &Ltl, pos: &[Vec<String>]) -> Vec<bool> {
    // `pos` is a finite prefix whose last letter repeats forever.
    let last = pos.len() - 1;
    let len = pos.len();
    match psi {
        Ltl::Atom(a) => pos.iter().map(|l| l.contains(a)).collect(),
        Ltl::Not(a) => holds_at(a, pos).into_iter().map(|b| !b).collect(),
        Ltl::And(a, b) => {
            let (x, y) = (holds_at(a, pos), holds_at(b, pos));
            (0..len).map(|i| x[i] && y[i]).collect()
        }
        Ltl::Or(a, b) => {
            let (x, y) = (holds_at(a, pos), holds_at(b, pos));
            (0..len).map(|i| x[i] || y[i]).collect()
        }
        Ltl::Next(a) => {
            let x = holds_at(a, pos);
            (0..len).map(|i| x[(i + 1).min(last)]).collect()
        }
        Ltl::Always(a) => {
            let x = holds_at(a, pos);
            let mut out = vec![false; len];
            out[last] = x[last];
            for i in (0..last).rev() {
                out[i] = x[i] && out[i + 1];
            }
            out
        }
        Ltl::Eventually(a) => {
            let x = holds_at(a, pos);
            let mut out = vec![false; len];
            out[last] = x[last];
            for i in (0..last).rev() {
                out[i] = x[i] || out[i + 1];
            }
            out
        }
        Ltl::Until(a, b) => {
            let (x, y) = (holds_at(a, pos), holds_at(b, pos));
            let mut out = vec![false; len];
            out[last] = y[last];
            for i in (0..last).rev() {
                out[i] = y[i] || (x[i] && out[i + 1]);
            }
            out
        }
    }
}

/// Probability of one event mask under independent per-event triggers.
fn mask_prob(theta: &[Rational], mask: usize) -> Rational {
    theta.iter().enumerate().fold(Rational::one(), |acc, (i, t)| {
        if mask >> i & 1 == 1 {
            acc * t
        } else {
            acc * (Rational::one() - t)
        }
    })
}

/// Full enumeration of `(2^|E|)^H`. Returns `(value, resolved mass, mass of
/// streams with some all-trigger position)`. A stream resolves at the first
/// position ending `d + 1` consecutive all-trigger positions; its
/// contribution is the event form's truth on the word merged with the stream
/// up to there, followed by the empty letter forever.
pub fn gltl_brute(obj: &GltlObjective, w: &dyn Word, n: u32) -> (Rational, Rational, Rational) {
    let horizon = obj.horizon(n);
    let events = obj.profile().events.clone();
    let theta = obj.profile().theta.clone();
    let props: Vec<String> = obj.alphabet().props().unwrap_or(&[]).to_vec();
    let all = (1usize << events.len()) - 1;
    let block = obj.next_depth() + 1;
    let psi = obj.event_form();
    let mut value = Rational::zero();
    let mut resolved = Rational::zero();
    let mut simultaneous = Rational::zero();
    for stream in odometer(all + 1, horizon) {
        let prob = stream.iter().fold(Rational::one(), |acc, &m| acc * mask_prob(&theta, m));
        if stream.contains(&all) {
            simultaneous += &prob;
        }
        let mut streak = 0;
        let Some(p) = stream.iter().position(|&m| {
            streak = if m == all { streak + 1 } else { 0 };
            streak >= block
        }) else {
            continue;
        };
        resolved += &prob;
        let mut pos: Vec<Vec<String>> = (0..=p)
            .map(|i| {
                let letter = w.letter(i).unwrap();
                let mut names: Vec<String> = props
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| letter.0 >> j & 1 == 1)
                    .map(|(_, s)| s.clone())
                    .collect();
                names.extend(
                    events.iter().enumerate().filter(|(j, _)| stream[i] >> j & 1 == 1).map(|(_, e)| e.clone()),
                );
                names
            })
            .collect();
        pos.push(Vec::new());
        if holds_at(psi, &pos)[0] {
            value += &prob;
        }
    }
    (value, resolved, simultaneous)
}

/// Expectimax over the complete tree of histories: every successor state is
/// expanded, including zero-probability ones.
pub fn expectimax(mdp: &Mdp, trunc: &Truncation) -> Rational {
    fn go(mdp: &Mdp, trunc: &Truncation, s: usize, letters: &mut Vec<Symbol>) -> Rational {
        let mut best: Option<Rational> = None;
        for a in 0..mdp.num_actions() {
            letters.push(mdp.symbol(s, a));
            let v = if letters.len() == trunc.horizon() {
                trunc.evaluate(letters).unwrap()
            } else {
                (0..mdp.num_states())
                    .map(|t| mdp.prob(s, a, t) * go(mdp, trunc, t, letters))
                    .fold(Rational::zero(), |x, y| x + y)
            };
            letters.pop();
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v);
            }
        }
        best.unwrap()
    }
    go(mdp, trunc, mdp.init(), &mut Vec::new())
}

/// Histories `s0 a0 s1 ... s_t` with `t < H`, in breadth-first order.
pub fn decision_points(mdp: &Mdp, horizon: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![mdp.init()]];
    let mut frontier = out.clone();
    for _ in 1..horizon {
        let mut next = Vec::new();
        for h in &frontier {
            for a in 0..mdp.num_actions() {
                for t in 0..mdp.num_states() {
                    let mut g = h.clone();
                    g.push(a);
                    g.push(t);
                    next.push(g);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Exact value of a deterministic history policy by forward propagation of
/// trajectory probabilities.
pub fn policy_value(mdp: &Mdp, trunc: &Truncation, policy: &HashMap<Vec<usize>, usize>) -> Rational {
    let mut layer: Vec<(Vec<usize>, Vec<Symbol>, Rational)> = vec![(vec![mdp.init()], Vec::new(), Rational::one())];
    let mut total = Rational::zero();
    while let Some((h, letters, p)) = layer.pop() {
        let s = *h.last().unwrap();
        let a = policy[&h];
        let mut letters = letters;
        letters.push(mdp.symbol(s, a));
        if letters.len() == trunc.horizon() {
            total += p * trunc.evaluate(&letters).unwrap();
            continue;
        }
        for t in 0..mdp.num_states() {
            let q = &p * mdp.prob(s, a, t);
            if q.is_zero() {
                continue;
            }
            let mut g = h.clone();
            g.push(a);
            g.push(t);
            layer.push((g, letters.clone(), q));
        }
    }
    total
}

/// Best value over every deterministic history-dependent policy.
pub fn best_policy_value(mdp: &Mdp, trunc: &Truncation) -> Rational {
    let points = decision_points(mdp, trunc.horizon());
    odometer(mdp.num_actions(), points.len())
        .map(|acts| {
            let table: HashMap<Vec<usize>, usize> = points.iter().cloned().zip(acts).collect();
            policy_value(mdp, trunc, &table)
        })
        .max()
        .unwrap()
}

/// Fewest moves from `start` to a goal on a slip-free grid without entering
/// lava.
pub fn grid_distance(spec: &GridSpec) -> Option<usize> {
    let moves: [(i64, i64); 4] = [(0, 1), (0, -1), (-1, 0), (1, 0)];
    let mut dist = HashMap::new();
    dist.insert(spec.start, 0usize);
    let mut queue = VecDeque::from([spec.start]);
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[&(x, y)];
        if spec.goals.contains(&(x, y)) {
            return Some(d);
        }
        for (dx, dy) in moves {
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx < 0 || ny < 0 || nx >= spec.width as i64 || ny >= spec.height as i64 {
                continue;
            }
            let next = (nx as usize, ny as usize);
            if spec.lava.contains(&next) || dist.contains_key(&next) {
                continue;
            }
            dist.insert(next, d + 1);
            queue.push_back(next);
        }
    }
    None
}

/// `lo ≤ x ≤ hi` as exact rationals.
pub fn within(x: &Rational, lo: &Rational, hi: &Rational) -> bool {
    lo <= x && x <= hi
}

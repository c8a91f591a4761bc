//! Random small instances for property sweeps.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::alphabet::{Alphabet, Symbol};
use crate::env::Mdp;
use crate::error::Result;
use crate::gltl::Gltl;
use crate::ldba::{BozkurtSpec, Ldba, LdbaParts};
use crate::objective::LabelingFunction;
use crate::rational::{int, ratio, Rational};
use crate::srm::SimpleRewardMachine;
use crate::word::LassoWord;

/// `u · v^ω` with `|u| ≤ max_prefix` and `1 ≤ |v| ≤ max_cycle`.
pub fn lasso(rng: &mut impl Rng, alphabet: &Arc<Alphabet>, max_prefix: usize, max_cycle: usize) -> LassoWord {
    let size = alphabet.len() as u32;
    let prefix_len = rng.random_range(0..=max_prefix);
    let cycle_len = rng.random_range(1..=max_cycle.max(1));
    let mut letters = (0..prefix_len + cycle_len).map(|_| Symbol(rng.random_range(0..size)));
    let prefix = letters.by_ref().take(prefix_len).collect();
    let cycle = letters.collect();
    LassoWord::new(prefix, cycle, alphabet.clone()).expect("letters drawn from the alphabet")
}

/// A random reward machine over `props` with `1..=max_states` states and
/// rewards in `{0, 1/2, 1}`.
pub fn srm(rng: &mut impl Rng, props: &[&str], max_states: usize, gamma: Rational) -> Result<SimpleRewardMachine> {
    let alphabet = Arc::new(Alphabet::valuations(props)?);
    let n = rng.random_range(1..=max_states.max(1));
    let letters = alphabet.len() as usize;
    let next = (0..n).map(|_| (0..letters).map(|_| rng.random_range(0..n)).collect()).collect();
    let choices = [int(0), ratio(1, 2), int(1)];
    let reward = (0..n)
        .map(|_| (0..n).map(|_| choices.choose(rng).cloned().unwrap_or_default()).collect())
        .collect();
    let states = (0..n).map(|i| format!("u{i}")).collect();
    SimpleRewardMachine::new(alphabet, states, 0, gamma, next, reward)
}

/// A random LDBA with `1..=max_states` states split into an initial and an
/// accepting component, and `0..=max_eps` ε-labels.
pub fn ldba(
    rng: &mut impl Rng,
    props: &[&str],
    max_states: usize,
    max_eps: usize,
    gamma1: Rational,
    gamma2: Rational,
) -> Result<BozkurtSpec> {
    let alphabet = Arc::new(Alphabet::valuations(props)?);
    let n = rng.random_range(1..=max_states.max(1));
    // States `split..n` form the accepting component.
    let split = rng.random_range(0..n);
    let in_acc: Vec<bool> = (0..n).map(|u| u >= split).collect();
    let accepting: Vec<bool> = (0..n).map(|u| in_acc[u] && rng.random_bool(0.5)).collect();
    let letters = alphabet.len() as usize;
    let next = (0..n)
        .map(|u| {
            (0..letters)
                .map(|_| if in_acc[u] { rng.random_range(split..n) } else { rng.random_range(0..n) })
                .collect()
        })
        .collect();
    let e = rng.random_range(0..=max_eps);
    let mut eps_moves = Vec::new();
    for u in 0..split {
        for label in 0..e {
            if rng.random_bool(0.6) {
                eps_moves.push((u, label, rng.random_range(0..n)));
            }
        }
    }
    let parts = LdbaParts {
        alphabet,
        states: (0..n).map(|i| format!("q{i}")).collect(),
        in_accepting_component: in_acc,
        accepting,
        eps_names: (0..e).map(|i| format!("eps{i}")).collect(),
        next,
        eps_moves,
        init: 0,
    };
    BozkurtSpec::new(Ldba::new(parts)?, gamma1, gamma2)
}

/// A random GLTL formula over `atoms` with at most `depth` nested operators.
/// Expiration probabilities come from `thetas`; `X` appears only when
/// `allow_next` is set.
pub fn gltl(rng: &mut impl Rng, atoms: &[&str], depth: usize, thetas: &[Rational], allow_next: bool) -> Gltl {
    if depth == 0 || rng.random_bool(0.2) {
        return Gltl::atom(atoms.choose(rng).copied().unwrap_or("a"));
    }
    let theta = thetas.choose(rng).cloned().unwrap_or_else(|| ratio(1, 2));
    let ops = if allow_next { 7 } else { 6 };
    let d = depth - 1;
    match rng.random_range(0..ops) {
        0 => Gltl::not(gltl(rng, atoms, d, thetas, allow_next)),
        1 => Gltl::and(gltl(rng, atoms, d, thetas, allow_next), gltl(rng, atoms, d, thetas, allow_next)),
        2 => Gltl::or(gltl(rng, atoms, d, thetas, allow_next), gltl(rng, atoms, d, thetas, allow_next)),
        3 => Gltl::always(theta, gltl(rng, atoms, d, thetas, allow_next)),
        4 => Gltl::eventually(theta, gltl(rng, atoms, d, thetas, allow_next)),
        5 => Gltl::until(theta, gltl(rng, atoms, d, thetas, allow_next), gltl(rng, atoms, d, thetas, allow_next)),
        _ => Gltl::next(gltl(rng, atoms, d, thetas, allow_next)),
    }
}

/// A total random labeling from `domain` into letters of `features`.
pub fn labeling(rng: &mut impl Rng, domain: &Arc<Alphabet>, features: &Alphabet) -> Result<LabelingFunction> {
    let size = features.len() as u32;
    let labels = (0..domain.len())
        .map(|_| features.name(Symbol(rng.random_range(0..size))))
        .collect();
    LabelingFunction::new(domain.clone(), labels)
}

/// A random MDP whose rows have denominators dividing `denom`.
pub fn mdp(rng: &mut impl Rng, states: usize, actions: usize, denom: u32) -> Mdp {
    let rows = (0..states)
        .map(|_| {
            (0..actions)
                .map(|_| {
                    let mut row = vec![0i64; states];
                    for _ in 0..denom {
                        row[rng.random_range(0..states)] += 1;
                    }
                    row.into_iter().map(|c| ratio(c, denom as i64)).collect()
                })
                .collect()
        })
        .collect();
    Mdp::new(
        (0..states).map(|i| format!("s{i}")).collect(),
        (0..actions).map(|i| format!("a{i}")).collect(),
        0,
        rows,
    )
    .expect("rows sum to one")
}

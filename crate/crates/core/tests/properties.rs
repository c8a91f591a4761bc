mod common;

use std::sync::Arc;

use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pacrl_core::check::random_objective;
use pacrl_core::env::{Environment, Record, SamplingSession};
use pacrl_core::gen;
use pacrl_core::gltl::{parse_gltl, GltlObjective};
use pacrl_core::ldba::BozkurtObjective;
use pacrl_core::objective::{compose_with_labeling, modulus_at_precision, truncate_objective};
use pacrl_core::pac::{exact_plan, LiftedMdp};
use pacrl_core::rational::{pow2_neg, ratio, Rational};
use pacrl_core::srm::srm_brute_oracle;
use pacrl_core::{Alphabet, BoundedProbe, LassoWord, Objective, SharedObjective, SimpleRewardMachine};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn approximations_form_a_fast_cauchy_sequence(seed in any::<u64>(), family in 0usize..3) {
        let mut r = rng(seed);
        let f = random_objective(&mut r, family).unwrap();
        let w = gen::lasso(&mut r, f.alphabet(), 4, 3);
        let q: Vec<Rational> = (0..=8).map(|n| f.approx(&w, n).unwrap()).collect();
        for n in 0..q.len() {
            for m in n + 1..q.len() {
                prop_assert!((&q[n] - &q[m]).abs() <= pow2_neg(n as u32) + pow2_neg(m as u32));
            }
        }
    }

    #[test]
    fn srm_approx_lies_in_deep_oracle_interval(seed in any::<u64>(), g in 0usize..3, n in 0u32..10) {
        let mut r = rng(seed);
        let gamma = [ratio(1, 3), ratio(1, 2), ratio(9, 10)][g].clone();
        let m = gen::srm(&mut r, &["a", "b"], 4, gamma).unwrap();
        let w = gen::lasso(&mut r, m.alphabet(), 4, 3);
        let (lo, hi) = srm_brute_oracle(&m, &w, 64);
        let q = m.approx(&w, n).unwrap();
        let tail = m.tail_bound(64);
        prop_assert!(q >= &lo - &tail - pow2_neg(n) && q <= &hi + pow2_neg(n), "{} not near [{}, {}]", q, lo, hi);
    }

    #[test]
    fn horizons_grow_with_precision(seed in any::<u64>(), n in 0u32..12) {
        let mut r = rng(seed);
        let m = gen::srm(&mut r, &["a"], 3, ratio(2, 3)).unwrap();
        prop_assert!(m.horizon(n) <= m.horizon(n + 1));
        let spec = gen::ldba(&mut r, &["a"], 3, 2, ratio(1, 2), ratio(3, 4)).unwrap();
        prop_assert!(spec.horizon(n) <= spec.horizon(n + 1));
        let g = GltlObjective::with_props(gen::gltl(&mut r, &["a"], 3, &[ratio(1, 2)], true), &["a"]).unwrap();
        prop_assert!(g.horizon(n) <= g.horizon(n + 1));
        prop_assert_eq!(g.horizon(n) % (g.next_depth() + 1), 0);
    }

    #[test]
    fn ldba_matches_literal_enumeration(seed in any::<u64>(), n in 0u32..4) {
        let mut r = rng(seed);
        let spec = gen::ldba(&mut r, &["a"], 4, 2, ratio(1, 2), ratio(1, 3)).unwrap();
        let w = gen::lasso(&mut r, spec.ldba().alphabet(), 3, 3);
        let expected = common::ldba_brute(&spec, &w, n);
        prop_assert_eq!(BozkurtObjective::new(spec).approx(&w, n).unwrap(), expected);
    }

    #[test]
    fn gltl_matches_full_stream_enumeration(seed in any::<u64>(), n in 0u32..4) {
        let mut r = rng(seed);
        let phi = gen::gltl(&mut r, &["a", "b"], 3, &[ratio(1, 2), ratio(3, 4)], true);
        let obj = GltlObjective::with_props(phi, &["a", "b"]).unwrap();
        prop_assume!(obj.profile().len() * obj.horizon(n) <= 12);
        let w = gen::lasso(&mut r, obj.alphabet(), 3, 3);
        let (value, resolved, _) = common::gltl_brute(&obj, &w, n);
        prop_assert_eq!(obj.approx(&w, n).unwrap(), value);
        prop_assert_eq!(obj.resolved_mass(n).unwrap(), resolved);
    }

    #[test]
    fn modulus_prefix_decides_the_approximation(seed in any::<u64>(), family in 0usize..3, k in 0u32..4) {
        let mut r = rng(seed);
        let f = random_objective(&mut r, family).unwrap();
        let h = modulus_at_precision(f.as_ref(), k, 1 << 16).unwrap();
        let shared = gen::lasso(&mut r, f.alphabet(), 0, 4).unroll(h);
        let extend = |r: &mut ChaCha8Rng| {
            let t = gen::lasso(r, f.alphabet(), 3, 2);
            let mut p = shared.clone();
            p.extend_from_slice(t.prefix());
            LassoWord::new(p, t.cycle().to_vec(), f.alphabet().clone()).unwrap()
        };
        let (w1, w2) = (extend(&mut r), extend(&mut r));
        prop_assert_eq!(f.approx(&w1, k).unwrap(), f.approx(&w2, k).unwrap());
        let probe = BoundedProbe::new(&w1, h);
        prop_assert!(f.approx(&probe, k).is_ok());
    }

    #[test]
    fn labeling_commutes_with_approximation(seed in any::<u64>(), family in 0usize..3, n in 0u32..6) {
        let mut r = rng(seed);
        let xi = random_objective(&mut r, family).unwrap();
        let domain = Arc::new(Alphabet::named(&["p", "q", "r"]).unwrap());
        let l = gen::labeling(&mut r, &domain, xi.alphabet()).unwrap();
        let composed = compose_with_labeling(xi.clone(), &l).unwrap();
        let w = gen::lasso(&mut r, &domain, 3, 3);
        let sym = |s: &pacrl_core::Symbol| xi.alphabet().parse_letter(l.label(*s)).unwrap();
        let labeled = LassoWord::new(
            w.prefix().iter().map(sym).collect(),
            w.cycle().iter().map(sym).collect(),
            xi.alphabet().clone(),
        )
        .unwrap();
        let (p1, p2) = (BoundedProbe::unbounded(&w), BoundedProbe::unbounded(&labeled));
        prop_assert_eq!(composed.approx(&p1, n).unwrap(), xi.approx(&p2, n).unwrap());
        prop_assert_eq!(p1.max_index_read(), p2.max_index_read());
    }

    #[test]
    fn transcripts_are_reproducible(seed in any::<u64>(), actions in prop::collection::vec(0usize..3, 1..60)) {
        let mdp = Arc::new(gen::mdp(&mut rng(seed), 3, 2, 8));
        let run = || {
            let mut s = SamplingSession::new(mdp.clone(), seed);
            for &a in &actions {
                if a == 2 { s.reset(); } else { s.step(a).unwrap(); }
            }
            (s.transcript().to_vec(), s.samples())
        };
        let (t1, n1) = run();
        prop_assert_eq!(&t1, &run().0);
        prop_assert_eq!(n1 as usize, t1.iter().filter(|r| matches!(r, Record::Step { .. })).count());
    }

    #[test]
    fn sampled_successors_have_positive_probability(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mdp = gen::mdp(&mut r, 4, 2, 5);
        for s in 0..4 {
            for a in 0..2 {
                let total = mdp.row(s, a).iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
                prop_assert_eq!(total, Rational::from_integer(1.into()));
                let t = mdp.sample_next(s, a, &mut r);
                prop_assert!(mdp.prob(s, a, t) > Rational::zero());
            }
        }
    }

    #[test]
    fn planner_equals_expectimax(seed in any::<u64>(), states in 1usize..4, actions in 1usize..3, family in 0usize..3) {
        let mut r = rng(seed);
        let mdp = Arc::new(gen::mdp(&mut r, states, actions, 4));
        let xi = random_objective(&mut r, family).unwrap();
        let l = gen::labeling(&mut r, mdp.alphabet(), xi.alphabet()).unwrap();
        let f: SharedObjective = Arc::new(compose_with_labeling(xi, &l).unwrap());
        let truncation = truncate_objective(f, &ratio(1, 2), None, 1 << 12);
        prop_assume!(truncation.is_ok());
        let truncation = truncation.unwrap();
        let leaves = ((states * actions) as u64).checked_pow(truncation.horizon() as u32);
        prop_assume!(leaves.is_some_and(|c| c <= 4096));
        let lifted = LiftedMdp::from_truncation(mdp.clone(), truncation.clone()).unwrap();
        let plan = exact_plan(&lifted, 1 << 20).unwrap();
        prop_assert_eq!(&plan.value, &common::expectimax(&mdp, &truncation));
    }

    #[test]
    fn srm_text_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = gen::srm(&mut r, &["a", "b"], 4, ratio(1, 2)).unwrap();
        let back = SimpleRewardMachine::parse(&m.to_string()).unwrap();
        let w = gen::lasso(&mut r, m.alphabet(), 4, 3);
        // Rewards on untraversed pairs are not printed, so r_max (and with it
        // the horizon) may shrink; both values are 2^-10-approximations.
        let gap = (back.approx(&w, 10).unwrap() - m.approx(&w, 10).unwrap()).abs();
        prop_assert!(gap <= pow2_neg(9));
        prop_assert_eq!(back.to_string(), m.to_string());
    }

    #[test]
    fn gltl_text_round_trips(seed in any::<u64>()) {
        let phi = gen::gltl(&mut rng(seed), &["a", "b"], 4, &[ratio(1, 2), ratio(9, 10)], true);
        prop_assert_eq!(parse_gltl(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn lasso_text_round_trips(seed in any::<u64>()) {
        let alphabet = Arc::new(Alphabet::valuations(&["a", "b"]).unwrap());
        let w = gen::lasso(&mut rng(seed), &alphabet, 4, 3);
        let back = LassoWord::parse(&w.to_string(), alphabet.clone()).unwrap();
        prop_assert_eq!(back.unroll(12), w.unroll(12));
    }

    #[test]
    fn mdp_text_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let states = r.random_range(1..4);
        let mdp = gen::mdp(&mut r, states, 2, 6);
        let env = Environment::parse(&mdp.to_string()).unwrap();
        prop_assert_eq!(env.mdp.to_string(), mdp.to_string());
    }
}

#[test]
fn planner_matches_best_enumerated_policy() {
    let mut r = rng(11);
    let mut checked = 0;
    for i in 0..60 {
        let mdp = Arc::new(gen::mdp(&mut r, 2, 2, 3));
        let xi = random_objective(&mut r, i).unwrap();
        let l = gen::labeling(&mut r, mdp.alphabet(), xi.alphabet()).unwrap();
        let f: SharedObjective = Arc::new(compose_with_labeling(xi, &l).unwrap());
        let Ok(truncation) = truncate_objective(f, &ratio(1, 2), None, 1 << 12) else {
            continue;
        };
        if truncation.horizon() > 2 {
            continue;
        }
        let lifted = LiftedMdp::from_truncation(mdp.clone(), truncation.clone()).unwrap();
        let plan = exact_plan(&lifted, 1 << 12).unwrap();
        assert_eq!(plan.value, common::best_policy_value(&mdp, &truncation));
        checked += 1;
    }
    assert!(checked >= 10, "only {checked} instances had H ≤ 2");
}

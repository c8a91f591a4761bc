//! Randomized property sweeps, run by `pacrl check`.

use std::sync::Arc;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::Alphabet;
use crate::env::{Policy, SamplingSession};
use crate::error::Result;
use crate::gen;
use crate::gltl::{event_form, ltl_eval, naive_ltl_eval, simultaneous_expiration_check, GltlObjective};
use crate::ldba::BozkurtObjective;
use crate::objective::{compose_with_labeling, modulus_at_precision, Objective, SharedObjective};
use crate::pac::{evaluate_policy, exact_plan, LiftedMdp};
use crate::rational::{pow2_neg, ratio, Rational};
use crate::srm::srm_brute_oracle;
use crate::word::{BoundedProbe, LassoWord};

/// Result of one sweep.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Sweep {
    outcome: CheckOutcome,
}

impl Sweep {
    fn new(name: &'static str) -> Self {
        Sweep {
            outcome: CheckOutcome {
                name,
                cases: 0,
                failures: Vec::new(),
            },
        }
    }

    fn case(&mut self, result: Result<Option<String>>) {
        self.outcome.cases += 1;
        match result {
            Ok(None) => {}
            Ok(Some(msg)) => self.outcome.failures.push(msg),
            Err(e) => self.outcome.failures.push(format!("error: {e}")),
        }
    }
}

/// Random objectives of the three families over `2^{a, b}`.
pub fn random_objective(rng: &mut ChaCha8Rng, family: usize) -> Result<SharedObjective> {
    let props = ["a", "b"];
    let halves = [ratio(1, 4), ratio(1, 3), ratio(1, 2)];
    Ok(match family % 3 {
        0 => {
            let g = halves[rng.random_range(0..3)].clone();
            Arc::new(gen::srm(rng, &props, 4, g)?)
        }
        1 => {
            let g1 = halves[rng.random_range(0..3)].clone();
            let g2 = halves[rng.random_range(0..3)].clone();
            Arc::new(BozkurtObjective::new(gen::ldba(rng, &props, 4, 2, g1, g2)?).with_budget(1 << 23))
        }
        _ => loop {
            let f = gen::gltl(rng, &props, 3, &[ratio(3, 4), ratio(9, 10)], false);
            let obj = GltlObjective::with_props(f, &props)?;
            if obj.profile().len() * obj.horizon(12) <= 20 {
                break Arc::new(obj);
            }
        },
    })
}

fn cauchy(rng: &mut ChaCha8Rng, cases: usize, max_n: u32) -> CheckOutcome {
    let mut sweep = Sweep::new("cauchy");
    for i in 0..cases {
        let result = (|| {
            let f = random_objective(rng, i)?;
            let w = gen::lasso(rng, f.alphabet(), 4, 3);
            let q: Vec<Rational> = (0..=max_n).map(|n| f.approx(&w, n)).collect::<Result<_>>()?;
            for n in 0..=max_n {
                for m in n + 1..=max_n {
                    let gap = (&q[n as usize] - &q[m as usize]).abs();
                    if gap > pow2_neg(n) + pow2_neg(m) {
                        return Ok(Some(format!("family {} on {w}: n={n} m={m} gap {gap}", i % 3)));
                    }
                }
            }
            Ok(None)
        })();
        sweep.case(result);
    }
    sweep.outcome
}

fn srm_oracle(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    let mut sweep = Sweep::new("srm-truncation");
    let gammas = [ratio(1, 3), ratio(1, 2), ratio(9, 10)];
    for _ in 0..cases {
        let result = (|| {
            let g = gammas[rng.random_range(0..3)].clone();
            let m = gen::srm(rng, &["a", "b"], 4, g)?;
            let w = gen::lasso(rng, m.alphabet(), 4, 3);
            let (lo, hi) = srm_brute_oracle(&m, &w, 64);
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            let half = (&hi - &lo) / Rational::from_integer(2.into());
            for n in 0..=10 {
                let q = m.approx(&w, n)?;
                if (&q - &mid).abs() > pow2_neg(n) + &half {
                    return Ok(Some(format!("{w} at n={n}: {q} vs [{lo}, {hi}]")));
                }
            }
            Ok(None)
        })();
        sweep.case(result);
    }
    sweep.outcome
}

/// Words sharing a prefix of the modulus length get identical approximations.
fn modulus(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    let mut sweep = Sweep::new("modulus");
    for i in 0..cases {
        let result = (|| {
            let f = random_objective(rng, i)?;
            let k = rng.random_range(0..=4);
            let m = modulus_at_precision(f.as_ref(), k, 1 << 16)?;
            let prefix = gen::lasso(rng, f.alphabet(), 0, m).cycle().to_vec();
            let prefix: Vec<_> = prefix.iter().copied().cycle().take(m).collect();
            let tail = |rng: &mut ChaCha8Rng| {
                let t = gen::lasso(rng, f.alphabet(), 2, 2);
                let mut p = prefix.clone();
                p.extend_from_slice(t.prefix());
                LassoWord::new(p, t.cycle().to_vec(), f.alphabet().clone())
            };
            let (w1, w2) = (tail(rng)?, tail(rng)?);
            let (q1, q2) = (f.approx(&w1, k)?, f.approx(&w2, k)?);
            Ok((q1 != q2).then(|| format!("family {}: H={m} n={k}: {w1} -> {q1}, {w2} -> {q2}", i % 3)))
        })();
        sweep.case(result);
    }
    sweep.outcome
}

fn labeling(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    let mut sweep = Sweep::new("labeling");
    for i in 0..cases {
        let result = (|| {
            let xi = random_objective(rng, i)?;
            let names: Vec<String> = (0..rng.random_range(1..=6)).map(|j| format!("d{j}")).collect();
            let domain = Arc::new(Alphabet::named(&names)?);
            let l = gen::labeling(rng, &domain, xi.alphabet())?;
            let composed = compose_with_labeling(xi.clone(), &l)?;
            let w = gen::lasso(rng, &domain, 4, 3);
            let table = l.resolve(xi.alphabet())?;
            let map = |s: &[crate::alphabet::Symbol]| s.iter().map(|x| table[x.index()]).collect::<Vec<_>>();
            let labeled = LassoWord::new(map(w.prefix()), map(w.cycle()), xi.alphabet().clone())?;
            let n = rng.random_range(0..=6);
            let p1 = BoundedProbe::unbounded(&w);
            let p2 = BoundedProbe::unbounded(&labeled);
            let (q1, q2) = (composed.approx(&p1, n)?, xi.approx(&p2, n)?);
            if q1 != q2 || p1.max_index_read() != p2.max_index_read() {
                return Ok(Some(format!("{w}: {q1} vs {q2}")));
            }
            Ok(None)
        })();
        sweep.case(result);
    }
    sweep.outcome
}

fn expiration(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    let mut sweep = Sweep::new("simultaneous-expiration");
    let props = ["a", "b"];
    let alphabet = Arc::new(Alphabet::valuations(&props).expect("two props"));
    for _ in 0..cases {
        let result = (|| {
            let phi = gen::gltl(rng, &props, 3, &[ratio(1, 2)], true);
            let (_, profile) = event_form(&phi);
            let d = phi.next_depth();
            let h = rng.random_range(0..=4);
            let all = (1u64 << profile.len()) - 1;
            let stream: Vec<u64> = (0..=h + d)
                .map(|i| if i >= h { all } else { rng.random_range(0..=all) })
                .collect();
            let w1 = gen::lasso(rng, &alphabet, 6, 3);
            let shared = w1.unroll(h + d + 1);
            let t = gen::lasso(rng, &alphabet, 3, 3);
            let mut p = shared;
            p.extend_from_slice(t.prefix());
            let w2 = LassoWord::new(p, t.cycle().to_vec(), alphabet.clone())?;
            let ok = simultaneous_expiration_check(&phi, h, &stream, &w1, &w2)?;
            Ok((!ok).then(|| format!("{phi} at H={h}: {w1} vs {w2}")))
        })();
        sweep.case(result);
    }
    sweep.outcome
}

fn ltl(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    let mut sweep = Sweep::new("ltl-evaluation");
    let props = ["a", "b"];
    for _ in 0..cases {
        let result = (|| {
            let phi = gen::gltl(rng, &props, 4, &[ratio(1, 2)], true);
            let (psi, profile) = event_form(&phi);
            let mut all: Vec<String> = props.iter().map(|s| s.to_string()).collect();
            all.extend(profile.events.iter().cloned());
            let w = gen::lasso(rng, &Arc::new(Alphabet::valuations(&all)?), 4, 3);
            let (fast, slow) = (ltl_eval(&psi, &w)?, naive_ltl_eval(&psi, &w)?);
            Ok((fast != slow).then(|| format!("{psi} on {w}")))
        })();
        sweep.case(result);
    }
    sweep.outcome
}

fn transcripts(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    let mut sweep = Sweep::new("transcript-determinism");
    for _ in 0..cases {
        let mdp = Arc::new(gen::mdp(rng, 3, 2, 4));
        let seed = rng.random();
        let actions: Vec<usize> = (0..40).map(|_| rng.random_range(0..3)).collect();
        let run = || {
            let mut s = SamplingSession::new(mdp.clone(), seed);
            for &a in &actions {
                if a == 2 {
                    s.reset();
                } else {
                    s.step(a).expect("valid action");
                }
            }
            s.transcript().to_vec()
        };
        sweep.case(Ok((run() != run()).then(|| format!("seed {seed}"))));
    }
    sweep.outcome
}

/// The planner's value is attained by its policy and dominates the uniform one.
fn planner(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    let mut sweep = Sweep::new("planner");
    for i in 0..cases {
        let result = (|| {
            let mdp = Arc::new(gen::mdp(rng, 2, 2, 4));
            let xi = random_objective(rng, i)?;
            let l = gen::labeling(rng, mdp.alphabet(), xi.alphabet())?;
            let f: SharedObjective = Arc::new(compose_with_labeling(xi, &l)?);
            let lifted = match LiftedMdp::new(mdp, f, &ratio(1, 2), 1 << 12) {
                Err(e) if e.is_budget() => return Ok(None),
                other => other?,
            };
            if lifted.horizon() > 5 {
                return Ok(None);
            }
            let plan = exact_plan(&lifted, 1 << 14)?;
            let attained = evaluate_policy(&lifted, &plan.policy, 1 << 14)?;
            let uniform = evaluate_policy(&lifted, &Policy::uniform(2), 1 << 14)?;
            Ok((attained != plan.value || uniform > plan.value)
                .then(|| format!("value {} attained {attained} uniform {uniform}", plan.value)))
        })();
        sweep.case(result);
    }
    sweep.outcome
}

/// Runs every sweep with `cases` instances each.
pub fn run_all(seed: u64, cases: usize) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![
        cauchy(&mut rng, cases, 12),
        srm_oracle(&mut rng, cases),
        modulus(&mut rng, cases),
        labeling(&mut rng, cases),
        expiration(&mut rng, cases),
        ltl(&mut rng, cases),
        transcripts(&mut rng, cases),
        planner(&mut rng, cases),
    ]
}

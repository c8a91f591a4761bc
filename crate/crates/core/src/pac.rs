//! The finite-horizon reduction: a history-lifted MDP whose terminal reward is
//! the truncated objective, an exact planner on it, and a sampling learner.
//!
//! The learner estimates base transition rows from samples (rows are shared
//! by every lifted node with the same `(s, a)`), then plans exactly on the
//! empirical model. Any finite-horizon PAC learner could sit behind
//! [`pac_learn`]; this one is simple and certifiable but exponential in `H`.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::alphabet::Symbol;
use crate::env::{Mdp, Policy, SamplingSession};
use crate::error::{Error, Result};
use crate::objective::{
    compose_with_labeling, truncate_objective, LabelingFunction, SharedObjective, Truncation,
    DEFAULT_ENUMERATION_CAP,
};
use crate::rational::{int, pow2_neg, ratio, to_f64, Rational};

/// Caps for the exponential parts of planning and learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Words enumerated by the modulus search and the truncation range.
    pub enumeration: u64,
    /// Lifted tree nodes visited by one planning or evaluation pass.
    pub tree: u64,
    /// Environment steps taken by the learner.
    pub samples: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            enumeration: DEFAULT_ENUMERATION_CAP,
            tree: 1 << 22,
            samples: 1 << 26,
        }
    }
}

/// `base` lifted to histories of length `H`, with `truncation.evaluate` on the
/// `H` state-action letters as terminal reward. The last action's successor
/// does not affect the reward, so only rows at depths `< H − 1` matter.
#[derive(Debug, Clone)]
pub struct LiftedMdp {
    base: Arc<Mdp>,
    truncation: Truncation,
}

impl LiftedMdp {
    /// Truncates `objective` (over `base`'s state-action alphabet) at `eps_prime`.
    pub fn new(base: Arc<Mdp>, objective: SharedObjective, eps_prime: &Rational, cap: u64) -> Result<Self> {
        let truncation = truncate_objective(objective, eps_prime, None, cap)?;
        Self::from_truncation(base, truncation)
    }

    pub fn from_truncation(base: Arc<Mdp>, truncation: Truncation) -> Result<Self> {
        if truncation.objective().alphabet().as_ref() != base.alphabet().as_ref() {
            return Err(Error::AlphabetMismatch(
                "objective must be over the MDP's state-action pairs".into(),
            ));
        }
        Ok(LiftedMdp { base, truncation })
    }

    pub fn base(&self) -> &Arc<Mdp> {
        &self.base
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn horizon(&self) -> usize {
        self.truncation.horizon()
    }

    /// Same terminal rewards over a different transition model.
    pub fn with_base(&self, base: Arc<Mdp>) -> Result<Self> {
        Self::from_truncation(base, self.truncation.clone())
    }
}

/// Output of [`exact_plan`].
#[derive(Debug, Clone)]
pub struct Plan {
    pub policy: Policy,
    pub value: Rational,
    pub nodes: u64,
}

struct Walk<'a> {
    lifted: &'a LiftedMdp,
    cap: u64,
    nodes: u64,
    letters: Vec<Symbol>,
    history: Vec<usize>,
}

impl Walk<'_> {
    fn new(lifted: &LiftedMdp, cap: u64) -> Walk<'_> {
        let h = lifted.horizon();
        Walk {
            lifted,
            cap,
            nodes: 0,
            letters: Vec::with_capacity(h),
            history: Vec::with_capacity(2 * h + 1),
        }
    }

    fn visit(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::Budget {
                what: "lifted tree",
                needed: format!("more than {} nodes", self.cap),
                cap: self.cap,
                context: Some(format!(
                    "H={}, |S|={}, |A|={}",
                    self.lifted.horizon(),
                    self.lifted.base.num_states(),
                    self.lifted.base.num_actions()
                )),
            });
        }
        Ok(())
    }

    /// Value of taking `a` at the current node (state `s`), given `value` for
    /// the children.
    fn action_value(
        &mut self,
        s: usize,
        a: usize,
        value: &mut dyn FnMut(&mut Self, usize) -> Result<Rational>,
    ) -> Result<Rational> {
        let mdp = self.lifted.base.clone();
        self.letters.push(mdp.symbol(s, a));
        let v = if self.letters.len() == self.lifted.horizon() {
            self.lifted.truncation.evaluate(&self.letters)
        } else {
            self.history.push(a);
            let mut sum = Rational::zero();
            let mut result = Ok(());
            for (t, p) in mdp.row(s, a) {
                self.history.push(*t);
                let child = value(self, *t);
                self.history.pop();
                match child {
                    Ok(v) => sum += p * v,
                    Err(e) => {
                        result = Err(e);
                        break;
                    }
                }
            }
            self.history.pop();
            result.map(|_| sum)
        };
        self.letters.pop();
        v
    }
}

/// Backward induction on the lifted tree. Ties go to the lowest action index.
/// `cap` bounds the number of visited nodes.
pub fn exact_plan(lifted: &LiftedMdp, cap: u64) -> Result<Plan> {
    fn node(walk: &mut Walk<'_>, s: usize, table: &mut HashMap<Vec<usize>, usize>) -> Result<Rational> {
        walk.visit()?;
        let mut best: Option<(usize, Rational)> = None;
        for a in 0..walk.lifted.base.num_actions() {
            let v = walk.action_value(s, a, &mut |w, t| node(w, t, table))?;
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((a, v));
            }
        }
        let (a, v) = best.expect("at least one action");
        table.insert(walk.history.clone(), a);
        Ok(v)
    }
    let mut walk = Walk::new(lifted, cap);
    let s0 = lifted.base.init();
    walk.history.push(s0);
    let mut table = HashMap::new();
    let value = node(&mut walk, s0, &mut table)?;
    Ok(Plan {
        policy: Policy::Table {
            actions: lifted.base.num_actions(),
            table,
            default: 0,
        },
        value,
        nodes: walk.nodes,
    })
}

/// Exact expected terminal reward of `policy` on the lifted MDP.
pub fn evaluate_policy(lifted: &LiftedMdp, policy: &Policy, cap: u64) -> Result<Rational> {
    if policy.num_actions() != lifted.base.num_actions() {
        return Err(Error::invalid("policy", "action count differs from the MDP"));
    }
    fn node(walk: &mut Walk<'_>, s: usize, policy: &Policy) -> Result<Rational> {
        walk.visit()?;
        let dist = policy.distribution(&walk.history);
        let mut total = Rational::zero();
        for (a, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            total += p * walk.action_value(s, a, &mut |w, t| node(w, t, policy))?;
        }
        Ok(total)
    }
    let mut walk = Walk::new(lifted, cap);
    let s0 = lifted.base.init();
    walk.history.push(s0);
    node(&mut walk, s0, policy)
}

/// Why [`pac_learn`] returned without sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shortcut {
    /// `eps ≥ 2·value_bound`: every policy is eps-optimal.
    TrivialTolerance,
    /// The truncated terminal table is constant (zero included).
    ConstantReward,
    /// `H = 1`: the reward depends on the first letter only.
    SingleStep,
}

/// Output of [`pac_learn`].
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub policy: Policy,
    pub lifted: Option<LiftedMdp>,
    pub horizon: usize,
    pub precision: u32,
    /// Target count per estimated row (0 when nothing was estimated).
    pub samples_per_row: u64,
    pub samples_used: u64,
    pub rows_estimated: usize,
    pub shortcut: Option<Shortcut>,
    /// Optimum of the learner's empirical model.
    pub empirical_value: Option<Rational>,
}

/// Hoeffding sample count per base row: every subset of successors is
/// estimated within `eps1` (so each row within `2·eps1` in L1) with
/// probability `1 − delta/2` over `|S||A|·max(1, 2^|S| − 2)` events.
pub fn samples_per_row(eps1: f64, delta: f64, states: usize, actions: usize) -> f64 {
    let subsets = if states >= 2 { 2f64.powi(states as i32) - 2.0 } else { 1.0 };
    let events = (states * actions) as f64 * subsets.max(1.0);
    (2.0 / (eps1 * eps1) * (4.0 * events / delta).ln()).ceil()
}

/// Learns an eps-optimal policy with probability `≥ 1 − delta`.
///
/// Truncation takes `eps/4` (it is paid once for the learned policy and once
/// for the optimal one) and estimation `eps/2`, through
/// `eps1 = eps / (4 (H − 1) c)` with `c` half the range of the truncated table.
pub fn pac_learn(
    session: &mut SamplingSession,
    objective: SharedObjective,
    eps: &Rational,
    delta: &Rational,
    budgets: &Budgets,
) -> Result<LearnOutcome> {
    let zero = Rational::zero();
    let one = Rational::one();
    if !(eps > &zero && eps < &one) || !(delta > &zero && delta < &one) {
        return Err(Error::invalid("tolerance", "eps and delta must lie in (0, 1)"));
    }
    let mdp = session.mdp().clone();
    if objective.alphabet().as_ref() != mdp.alphabet().as_ref() {
        return Err(Error::AlphabetMismatch(
            "objective must be over the session's state-action pairs".into(),
        ));
    }
    let early = |policy, shortcut| LearnOutcome {
        policy,
        lifted: None,
        horizon: 0,
        precision: 0,
        samples_per_row: 0,
        samples_used: 0,
        rows_estimated: 0,
        shortcut: Some(shortcut),
        empirical_value: None,
    };
    if eps >= &(int(2) * objective.value_bound()) {
        return Ok(early(Policy::uniform(mdp.num_actions()), Shortcut::TrivialTolerance));
    }
    let eps_prime = eps / int(4);
    let lifted = LiftedMdp::new(mdp.clone(), objective.clone(), &eps_prime, budgets.enumeration)?;
    let h = lifted.horizon();
    let precision = lifted.truncation().precision();
    let range = lifted.truncation().range(budgets.enumeration)?;
    let done = |outcome: LearnOutcome| {
        Ok(LearnOutcome {
            lifted: Some(lifted.clone()),
            horizon: h,
            precision,
            ..outcome
        })
    };
    let first_action = || Policy::Table {
        actions: mdp.num_actions(),
        table: HashMap::new(),
        default: 0,
    };
    if let Some((lo, hi)) = &range {
        if lo == hi {
            return done(early(first_action(), Shortcut::ConstantReward));
        }
    }
    if h == 1 {
        let plan = exact_plan(&lifted, budgets.tree)?;
        return done(LearnOutcome {
            empirical_value: Some(plan.value),
            ..early(plan.policy, Shortcut::SingleStep)
        });
    }
    let half_range = match &range {
        Some((lo, hi)) => (hi - lo) / int(2),
        None => objective.value_bound() + pow2_neg(precision),
    };
    let eps1 = to_f64(eps) / (4.0 * (h - 1) as f64 * to_f64(&half_range));
    let n = samples_per_row(eps1, to_f64(delta), mdp.num_states(), mdp.num_actions());
    let rows = (mdp.num_states() * mdp.num_actions()) as f64;
    if !n.is_finite() || n * rows > budgets.samples as f64 {
        return Err(Error::Budget {
            what: "samples",
            needed: format!("{n:.0} per row × {rows} rows"),
            cap: budgets.samples,
            context: Some(format!("H={h}, eps1={eps1:.3e}")),
        });
    }
    let n = n as u64;
    let counts = collect(session, h - 2, n, budgets.samples)?;
    let empirical = Arc::new(empirical_model(&mdp, &counts)?);
    let model = lifted.with_base(empirical)?;
    let plan = exact_plan(&model, budgets.tree)?;
    Ok(LearnOutcome {
        policy: plan.policy,
        lifted: Some(lifted),
        horizon: h,
        precision,
        samples_per_row: n,
        samples_used: counts.samples,
        rows_estimated: counts.rows_estimated(n),
        shortcut: None,
        empirical_value: Some(plan.value),
    })
}

/// Environment-generic entry point: composes `objective` (over features) with
/// `labeling`, then learns.
pub fn rl_general_objective(
    eps: &Rational,
    delta: &Rational,
    objective: SharedObjective,
    session: &mut SamplingSession,
    labeling: &LabelingFunction,
    budgets: &Budgets,
) -> Result<LearnOutcome> {
    if labeling.domain().as_ref() != session.mdp().alphabet().as_ref() {
        return Err(Error::AlphabetMismatch(
            "labeling domain must be the session's state-action pairs".into(),
        ));
    }
    let composed: SharedObjective = Arc::new(compose_with_labeling(objective, labeling)?);
    pac_learn(session, composed, eps, delta, budgets)
}

struct Counts {
    actions: usize,
    /// Transition counts per base row.
    table: Vec<HashMap<usize, u64>>,
    totals: Vec<u64>,
    samples: u64,
}

impl Counts {
    fn rows_estimated(&self, n: u64) -> usize {
        self.totals.iter().filter(|&&t| t >= n).count()
    }
}

/// Samples every action at every state seen within `max_depth` steps of the
/// start until each such row has `n` samples. Episodes restart by reset; at a
/// saturated state the walk heads for the likeliest unsaturated one under the
/// counts so far.
fn collect(session: &mut SamplingSession, max_depth: usize, n: u64, cap: u64) -> Result<Counts> {
    let mdp = session.mdp().clone();
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let mut counts = Counts {
        actions: na,
        table: vec![HashMap::new(); ns * na],
        totals: vec![0; ns * na],
        samples: 0,
    };
    // Shortest distance from the start over observed transitions.
    let mut depth = vec![usize::MAX; ns];
    depth[mdp.init()] = 0;
    let needs = |s: usize, counts: &Counts, depth: &[usize]| {
        depth[s] <= max_depth && (0..na).any(|a| counts.totals[s * na + a] < n)
    };
    let mut reach: Option<Vec<Vec<f64>>> = None;
    loop {
        if !(0..ns).any(|s| needs(s, &counts, &depth)) {
            return Ok(counts);
        }
        let mut s = session.reset();
        for t in 0..=max_depth {
            let a = if needs(s, &counts, &depth) {
                (0..na).min_by_key(|&a| counts.totals[s * na + a]).unwrap_or(0)
            } else {
                let r = reach.get_or_insert_with(|| reach_table(&counts, ns, max_depth, |u| needs(u, &counts, &depth)));
                (0..na)
                    .map(|a| (a, expected(&counts, s, a, &r[t + 1])))
                    .fold((0, f64::MIN), |best, x| if x.1 > best.1 { x } else { best })
                    .0
            };
            if counts.samples >= cap {
                return Err(Error::Budget {
                    what: "samples",
                    needed: format!("more than {cap}"),
                    cap,
                    context: Some(format!("{n} per row")),
                });
            }
            let next = session.step(a)?;
            counts.samples += 1;
            let row = s * na + a;
            let fresh = !counts.table[row].contains_key(&next);
            *counts.table[row].entry(next).or_insert(0) += 1;
            counts.totals[row] += 1;
            let relaxed = fresh && relax(&counts, &mut depth, s, next, max_depth);
            if relaxed || counts.totals[row] == n {
                reach = None;
            }
            s = next;
        }
    }
}

/// Updates distances after the first observation of `from → to`. Returns
/// whether a state came within `max_depth`.
fn relax(counts: &Counts, depth: &mut [usize], from: usize, to: usize, max_depth: usize) -> bool {
    if depth[from] == usize::MAX || depth[from] + 1 >= depth[to] {
        return false;
    }
    let mut changed = false;
    depth[to] = depth[from] + 1;
    let mut queue = std::collections::VecDeque::from([to]);
    while let Some(u) = queue.pop_front() {
        changed |= depth[u] <= max_depth;
        for a in 0..counts.actions {
            for &v in counts.table[u * counts.actions + a].keys() {
                if depth[u] + 1 < depth[v] {
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    changed
}

fn expected(counts: &Counts, s: usize, a: usize, values: &[f64]) -> f64 {
    let row = s * counts.actions + a;
    let total = counts.totals[row];
    if total == 0 {
        return 0.0;
    }
    counts.table[row]
        .iter()
        .map(|(t, c)| *c as f64 / total as f64 * values[*t])
        .sum::<f64>()
}

/// `reach[t][s]`: best empirical probability of meeting a state that needs
/// samples somewhere in steps `t..=max_depth`, starting from `s` at step `t`.
fn reach_table(counts: &Counts, ns: usize, max_depth: usize, needs: impl Fn(usize) -> bool) -> Vec<Vec<f64>> {
    let mut reach = vec![vec![0.0; ns]; max_depth + 2];
    for t in (0..=max_depth).rev() {
        for s in 0..ns {
            reach[t][s] = if needs(s) {
                1.0
            } else {
                (0..counts.actions)
                    .map(|a| expected(counts, s, a, &reach[t + 1]))
                    .fold(0.0, f64::max)
            };
        }
    }
    reach
}

/// Empirical frequencies for sampled rows; unsampled rows become self-loops
/// (they are only reachable at the last step, where transitions are ignored).
fn empirical_model(mdp: &Mdp, counts: &Counts) -> Result<Mdp> {
    let (ns, na) = (mdp.num_states(), mdp.num_actions());
    let rows = (0..ns)
        .map(|s| {
            (0..na)
                .map(|a| {
                    let row = s * na + a;
                    let mut out = vec![Rational::zero(); ns];
                    let total = counts.totals[row];
                    if total == 0 {
                        out[s] = Rational::one();
                    } else {
                        for (t, c) in &counts.table[row] {
                            out[*t] = ratio(*c as i64, total as i64);
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    Mdp::new(mdp.states().to_vec(), mdp.actions().to_vec(), mdp.init(), rows)
}

/// Two states `s0`, `s1` and actions `flip`, `lean`, `stay` reaching `s1`
/// from `s0` with probabilities 1/2, 3/8, 0; `s1` is absorbing. The objective
/// is 1 when the letter at index 1 is in state `s1`, so the optimum is 1/2.
pub fn coin_fixture() -> (Arc<Mdp>, SharedObjective) {
    let p = |q: Rational| vec![Rational::one() - &q, q];
    let absorbing = vec![Rational::zero(), Rational::one()];
    let mdp = Arc::new(
        Mdp::new(
            vec!["s0".into(), "s1".into()],
            vec!["flip".into(), "lean".into(), "stay".into()],
            0,
            vec![
                vec![p(ratio(1, 2)), p(ratio(3, 8)), p(Rational::zero())],
                vec![absorbing.clone(), absorbing.clone(), absorbing],
            ],
        )
        .expect("coin rows are normalized"),
    );
    let actions = mdp.num_actions();
    let objective = crate::objective::FnObjective::new(mdp.alphabet().clone(), int(1), move |w, _| {
        let s = w.letter(1)?.index() / actions;
        Ok(if s == 1 { int(1) } else { int(0) })
    });
    (mdp, Arc::new(objective))
}

mod common;

use std::sync::Arc;

use num_traits::Signed;

use pacrl_core::env::{build_gridworld, Environment, GridSpec, SamplingSession};
use pacrl_core::objective::ConstantObjective;
use pacrl_core::pac::{evaluate_policy, exact_plan, pac_learn, rl_general_objective, Budgets, LiftedMdp};
use pacrl_core::rational::{pow, ratio};
use pacrl_core::{compose_with_labeling, LassoWord, Objective, SharedObjective, SimpleRewardMachine};

fn figure() -> Environment {
    Environment::parse(include_str!("../../../fixtures/fig31.grid")).unwrap()
}

fn srm(gamma: (i64, i64)) -> SharedObjective {
    Arc::new(SimpleRewardMachine::reach_goal_avoid_lava(ratio(gamma.0, gamma.1)).unwrap())
}

#[test]
fn fixture_is_the_figure_grid() {
    assert_eq!(figure().grid.unwrap(), GridSpec::figure());
}

#[test]
fn planner_optimum_is_discount_to_the_bfs_distance() {
    let env = figure();
    let d = common::grid_distance(env.grid.as_ref().unwrap()).unwrap();
    assert_eq!(d, 5);
    let f: SharedObjective = Arc::new(compose_with_labeling(srm((1, 2)), &env.labeling).unwrap());
    let lifted = LiftedMdp::new(env.mdp.clone(), f, &ratio(1, 20), 1 << 22).unwrap();
    let plan = exact_plan(&lifted, 1 << 22).unwrap();
    assert_eq!(plan.value, pow(&ratio(1, 2), d as u32));
    assert_eq!(evaluate_policy(&lifted, &plan.policy, 1 << 22).unwrap(), plan.value);
}

#[test]
fn shortest_path_word_scores_discount_to_the_distance() {
    let env = figure();
    let m = SimpleRewardMachine::reach_goal_avoid_lava(ratio(9, 10)).unwrap();
    let composed = compose_with_labeling(Arc::new(m), &env.labeling).unwrap();
    let mdp = &env.mdp;
    // up, right, right, right, down, then stay on the goal
    let cells = ["x0y0", "x0y1", "x1y1", "x2y1", "x3y1", "x3y0"];
    let moves = ["up", "right", "right", "right", "down", "down"];
    let letters: Vec<_> = cells
        .iter()
        .zip(moves)
        .map(|(c, a)| mdp.symbol(mdp.state_index(c).unwrap(), mdp.action_index(a).unwrap()))
        .collect();
    let w = LassoWord::new(letters[..5].to_vec(), letters[5..].to_vec(), mdp.alphabet().clone()).unwrap();
    let q = composed.approx(&w, 12).unwrap();
    let target = pow(&ratio(9, 10), 5);
    assert!((q - target).abs() <= pacrl_core::rational::pow2_neg(12));
}

#[test]
fn slow_discount_exceeds_the_tree_budget() {
    let env = figure();
    let f: SharedObjective = Arc::new(compose_with_labeling(srm((9, 10)), &env.labeling).unwrap());
    let mut session = SamplingSession::new(env.mdp.clone(), 1);
    let err = pac_learn(&mut session, f, &ratio(1, 5), &ratio(1, 10), &Budgets::default()).unwrap_err();
    assert!(err.is_budget(), "{err}");
    assert_eq!(session.samples(), 0);
}

#[test]
fn generic_and_precomposed_paths_agree() {
    let env = figure();
    let budgets = Budgets::default();
    let (eps, delta) = (ratio(1, 5), ratio(1, 10));
    let mut s1 = SamplingSession::new(env.mdp.clone(), 9);
    let a = rl_general_objective(&eps, &delta, srm((1, 2)), &mut s1, &env.labeling, &budgets).unwrap();
    let f: SharedObjective = Arc::new(compose_with_labeling(srm((1, 2)), &env.labeling).unwrap());
    let mut s2 = SamplingSession::new(env.mdp.clone(), 9);
    let b = pac_learn(&mut s2, f, &eps, &delta, &budgets).unwrap();
    assert_eq!(a.policy, b.policy);
    assert_eq!(a.samples_used, b.samples_used);
    assert_eq!(s1.transcript(), s2.transcript());
}

#[test]
fn constant_objective_on_deterministic_grid() {
    let (mdp, _) = build_gridworld(&GridSpec::figure()).unwrap();
    let mdp = Arc::new(mdp);
    let f: SharedObjective = Arc::new(ConstantObjective::new(mdp.alphabet().clone(), ratio(2, 3)));
    let mut session = SamplingSession::new(mdp.clone(), 4);
    let out = pac_learn(&mut session, f.clone(), &ratio(1, 10), &ratio(1, 10), &Budgets::default()).unwrap();
    assert_eq!(out.samples_used, 0);
    let lifted = LiftedMdp::new(mdp, f, &ratio(1, 40), 1 << 10).unwrap();
    let best = exact_plan(&lifted, 1 << 10).unwrap().value;
    assert_eq!(evaluate_policy(&lifted, &out.policy, 1 << 10).unwrap(), best);
    assert_eq!(best, ratio(2, 3));
}

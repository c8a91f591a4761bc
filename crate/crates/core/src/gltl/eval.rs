//! LTL satisfaction on lasso words.

use super::Ltl;
use crate::error::{Error, Result};
use crate::word::LassoWord;

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Atom(u32),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Always(usize),
    Eventually(usize),
    Until(usize, usize),
}

/// A formula flattened in post-order, with atoms resolved to bit positions of
/// a letter mask.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    nodes: Vec<Node>,
}

impl Compiled {
    pub(crate) fn new(f: &Ltl, resolve: &impl Fn(&str) -> Option<u32>) -> Result<Self> {
        let mut nodes = Vec::new();
        push(f, resolve, &mut nodes)?;
        Ok(Compiled { nodes })
    }

    /// Whether position 0 of the lasso satisfies the formula. `letters` lists
    /// every distinct position; the successor of the last one is `loop_start`.
    pub(crate) fn eval(&self, letters: &[u64], loop_start: usize) -> bool {
        let m = letters.len();
        debug_assert!(loop_start < m);
        let succ = |i: usize| if i + 1 < m { i + 1 } else { loop_start };
        let mut vals: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::Atom(bit) => letters.iter().map(|l| l >> bit & 1 == 1).collect(),
                Node::Not(a) => vals[a].iter().map(|x| !x).collect(),
                Node::And(a, b) => vals[a].iter().zip(&vals[b]).map(|(x, y)| *x && *y).collect(),
                Node::Or(a, b) => vals[a].iter().zip(&vals[b]).map(|(x, y)| *x || *y).collect(),
                Node::Next(a) => (0..m).map(|i| vals[a][succ(i)]).collect(),
                Node::Until(a, b) => least_fixpoint(&vals[a], &vals[b], succ),
                Node::Eventually(b) => least_fixpoint(&vec![true; m], &vals[b], succ),
                Node::Always(a) => {
                    let mut r = vals[a].clone();
                    loop {
                        let mut changed = false;
                        for i in (0..m).rev() {
                            if r[i] && !r[succ(i)] {
                                r[i] = false;
                                changed = true;
                            }
                        }
                        if !changed {
                            break r;
                        }
                    }
                }
            };
            vals.push(v);
        }
        vals.last().is_some_and(|v| v[0])
    }
}

/// `a U b`: smallest set containing `b` and closed under `a ∧ X`.
fn least_fixpoint(a: &[bool], b: &[bool], succ: impl Fn(usize) -> usize) -> Vec<bool> {
    let mut r = b.to_vec();
    loop {
        let mut changed = false;
        for i in (0..r.len()).rev() {
            if !r[i] && a[i] && r[succ(i)] {
                r[i] = true;
                changed = true;
            }
        }
        if !changed {
            return r;
        }
    }
}

fn push(f: &Ltl, resolve: &impl Fn(&str) -> Option<u32>, nodes: &mut Vec<Node>) -> Result<usize> {
    let node = match f {
        Ltl::Atom(a) => Node::Atom(resolve(a).ok_or_else(|| Error::Unknown {
            kind: "atom",
            name: a.clone(),
        })?),
        Ltl::Not(a) => Node::Not(push(a, resolve, nodes)?),
        Ltl::And(a, b) => {
            let a = push(a, resolve, nodes)?;
            Node::And(a, push(b, resolve, nodes)?)
        }
        Ltl::Or(a, b) => {
            let a = push(a, resolve, nodes)?;
            Node::Or(a, push(b, resolve, nodes)?)
        }
        Ltl::Next(a) => Node::Next(push(a, resolve, nodes)?),
        Ltl::Always(a) => Node::Always(push(a, resolve, nodes)?),
        Ltl::Eventually(a) => Node::Eventually(push(a, resolve, nodes)?),
        Ltl::Until(a, b) => {
            let a = push(a, resolve, nodes)?;
            Node::Until(a, push(b, resolve, nodes)?)
        }
    };
    nodes.push(node);
    Ok(nodes.len() - 1)
}

fn resolver(w: &LassoWord) -> Result<impl Fn(&str) -> Option<u32> + '_> {
    if w.alphabet().props().is_none() {
        return Err(Error::AlphabetMismatch(
            "LTL evaluation needs a proposition alphabet".into(),
        ));
    }
    Ok(move |a: &str| w.alphabet().prop_index(a).map(|i| i as u32))
}

/// `w ⊨ ψ`, by fixpoint iteration over the lasso's positions.
pub fn ltl_eval(psi: &Ltl, w: &LassoWord) -> Result<bool> {
    let compiled = Compiled::new(psi, &resolver(w)?)?;
    let letters: Vec<u64> = w
        .prefix()
        .iter()
        .chain(w.cycle())
        .map(|s| u64::from(s.0))
        .collect();
    Ok(compiled.eval(&letters, w.prefix().len()))
}

/// Reference evaluator: direct recursion on the semantics, searching each
/// `U`/`F`/`G` window `[i, i + |prefix| + |cycle|)` of the unrolled word.
pub fn naive_ltl_eval(psi: &Ltl, w: &LassoWord) -> Result<bool> {
    let resolve = resolver(w)?;
    for a in psi.atoms() {
        if resolve(&a).is_none() {
            return Err(Error::Unknown { kind: "atom", name: a });
        }
    }
    let window = w.positions();
    fn sat(f: &Ltl, i: usize, w: &LassoWord, window: usize, r: &dyn Fn(&str) -> Option<u32>) -> bool {
        match f {
            Ltl::Atom(a) => w.letter_at(i).0 >> r(a).unwrap_or(0) & 1 == 1,
            Ltl::Not(a) => !sat(a, i, w, window, r),
            Ltl::And(a, b) => sat(a, i, w, window, r) && sat(b, i, w, window, r),
            Ltl::Or(a, b) => sat(a, i, w, window, r) || sat(b, i, w, window, r),
            Ltl::Next(a) => sat(a, i + 1, w, window, r),
            Ltl::Eventually(b) => (i..i + window).any(|j| sat(b, j, w, window, r)),
            Ltl::Always(a) => (i..i + window).all(|j| sat(a, j, w, window, r)),
            Ltl::Until(a, b) => {
                for j in i..i + window {
                    if sat(b, j, w, window, r) {
                        return true;
                    }
                    if !sat(a, j, w, window, r) {
                        return false;
                    }
                }
                false
            }
        }
    }
    Ok(sat(psi, 0, w, window, &resolve))
}

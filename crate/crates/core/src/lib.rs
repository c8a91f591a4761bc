//! Computable reinforcement-learning objectives.
//!
//! Objectives over infinite words are exposed through rational approximations
//! with a `2^-n` error guarantee ([`objective::Objective`]). On top of that
//! interface the crate computes moduli of continuity, truncates objectives to
//! finite horizons, and learns near-optimal policies by planning on a
//! history-lifted MDP.
//!
//! Objective families: simple reward machines ([`srm`]), LDBA-based
//! LTL-in-the-limit specifications ([`ldba`]), and GLTL formulas ([`gltl`]).

pub mod alphabet;
pub mod check;
pub mod env;
pub mod error;
pub mod gen;
pub mod gltl;
pub mod ldba;
pub mod objective;
pub mod pac;
pub mod rational;
pub mod srm;
mod text;
pub mod word;

pub use alphabet::{Alphabet, Symbol};
pub use error::{Error, Result};
pub use objective::{
    compose_with_labeling, modulus_of_continuity, truncate_objective, LabelingFunction, Objective,
    SharedObjective, Truncation,
};
pub use rational::Rational;
pub use srm::SimpleRewardMachine;
pub use word::{BoundedProbe, LassoWord, Word};

//! Causal probabilistic temporal logic for Markov decision processes.
//!
//! The crate is split along the lines of the verification pipeline:
//!
//! * [`mdp`] holds the MDP data model, paths, policies, the grid-world
//!   benchmark and finite-horizon reach-avoid value iteration.
//! * [`scm`] encodes an MDP under a policy as a Gumbel-max structural causal
//!   model: forward sampling, posterior inference of the Gumbel noise from an
//!   observed path, and counterfactual models built on top of it.
//! * [`logic`] is the formula language: AST, parser, printer and the
//!   finite-path semantics of path formulas.
//! * [`statcheck`] contains the Monte-Carlo estimators, confidence intervals
//!   and decision procedures for every probabilistic, reward, counterfactual
//!   and causal-effect operator.

pub mod logic;
pub mod mdp;
pub mod rng;
pub mod scm;
pub mod statcheck;

pub use logic::{parse_formula, PathFormula, StateFormula};
pub use mdp::{Mdp, Path, Policy, PolicyRegistry, StateId, ActionId};
pub use scm::{AbductionMethod, CounterfactualModel, GumbelContext, Intervention, ScmConfig};
pub use statcheck::{CheckParams, Checker, Estimate, Truth, Verdict};

//! Monte-Carlo estimation and statistical decision procedures.

mod checker;
mod decide;
mod interval;

use thiserror::Error;

use crate::logic::EvalError;
use crate::mdp::MdpError;
use crate::scm::ScmError;

pub use checker::{CheckParams, Checker, DeltaMode, Outcome};
pub use decide::{check_threshold, chernoff_sample_size, sprt, SprtOutcome, Truth, Verdict};
pub use interval::{
    clopper_pearson, paired_t, proportion, t_interval, two_proportion_z, wald, welch, CiMethod, Estimate,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatError {
    #[error("significance level must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("invalid counts: {k} successes out of {n}")]
    Counts { k: usize, n: usize },
    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },
    #[error("sequential test undecided after {0} samples")]
    SprtCap(usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("'=?' is only allowed on the outermost operator: {0}")]
    QuantitativeNested(String),
    #[error("invalid state distribution: {0}")]
    Distribution(String),
}

impl From<MdpError> for CheckError {
    fn from(e: MdpError) -> Self {
        CheckError::Scm(ScmError::Mdp(e))
    }
}

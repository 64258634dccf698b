use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::gumbel::{gumbel_argmax, sample_gumbel_vector, sample_standard_gumbel, GumbelContext};
use super::{Inconsistency, ScmError};
use crate::mdp::{ActionId, Mdp, MdpError, Path, Policy, StateId};

/// Attempts per step before rejection sampling gives up.
pub const REJECTION_CAP: usize = 1_000_000;

/// How the posterior noise of a single transition is sampled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbductionMethod {
    /// Draw prior vectors until the observed successor wins.
    Rejection,
    /// Sample the conditioned maximum directly, then truncated Gumbels.
    #[default]
    Exact,
}

impl fmt::Display for AbductionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AbductionMethod::Rejection => "rejection",
            AbductionMethod::Exact => "exact",
        })
    }
}

impl FromStr for AbductionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rejection" => Ok(AbductionMethod::Rejection),
            "exact" => Ok(AbductionMethod::Exact),
            _ => Err(format!("unknown abduction method '{s}' (expected rejection or exact)")),
        }
    }
}

fn observed_row<'a>(
    mdp: &'a Mdp,
    s: StateId,
    a: ActionId,
    next: StateId,
) -> Result<&'a [f64], ScmError> {
    let row = mdp.row(s, a).ok_or(MdpError::UndefinedTransition { state: s, action: a })?;
    if row.get(next.0).copied().unwrap_or(0.0) <= 0.0 {
        return Err(ScmError::ImpossibleTransition { from: s, action: a, to: next });
    }
    Ok(row)
}

/// Prior noise conditioned on `next` winning the Gumbel-max race out of
/// `(s, a)`, by plain rejection.
pub fn abduct_step_rejection<R: Rng + ?Sized>(
    mdp: &Mdp,
    s: StateId,
    a: ActionId,
    next: StateId,
    rng: &mut R,
) -> Result<Vec<f64>, ScmError> {
    let row = observed_row(mdp, s, a, next)?;
    for _ in 0..REJECTION_CAP {
        let g = sample_gumbel_vector(row.len(), rng);
        if gumbel_argmax(row, &g)? == next.0 {
            return Ok(g);
        }
    }
    Err(ScmError::RejectionCap { attempts: REJECTION_CAP })
}

/// Exact posterior sample of the noise given that `next` won.
///
/// The winning perturbed value is Gumbel with location `ln Σp = 0`; every
/// other support state gets a Gumbel with location `ln p_j` truncated above
/// at that maximum. States outside the support keep prior noise.
pub fn abduct_step_exact<R: Rng + ?Sized>(
    mdp: &Mdp,
    s: StateId,
    a: ActionId,
    next: StateId,
    rng: &mut R,
) -> Result<Vec<f64>, ScmError> {
    let row = observed_row(mdp, s, a, next)?;
    loop {
        let m = sample_standard_gumbel(rng);
        let g: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                if j == next.0 {
                    m - p.ln()
                } else if p > 0.0 {
                    let e: f64 = rng.sample(Exp1);
                    -((p.ln() - m).exp() + e).ln()
                } else {
                    sample_standard_gumbel(rng)
                }
            })
            .collect();
        // A rounding tie can hand the race to a lower index; redraw then.
        if gumbel_argmax(row, &g)? == next.0 {
            return Ok(g);
        }
    }
}

pub fn abduct_step<R: Rng + ?Sized>(
    method: AbductionMethod,
    mdp: &Mdp,
    s: StateId,
    a: ActionId,
    next: StateId,
    rng: &mut R,
) -> Result<Vec<f64>, ScmError> {
    match method {
        AbductionMethod::Rejection => abduct_step_rejection(mdp, s, a, next, rng),
        AbductionMethod::Exact => abduct_step_exact(mdp, s, a, next, rng),
    }
}

/// Checks that every transition of `path` has positive probability and
/// every action is the one `policy` prescribes. Positions in the error are
/// 1-based. The first state is not checked against the initial
/// distribution: counterfactual models start from a fixed state of the
/// path and never infer the initial noise.
pub fn check_consistency(mdp: &Mdp, policy: &Policy, path: &Path) -> Result<(), ScmError> {
    let steps = path.steps();
    for (i, step) in steps.iter().enumerate() {
        let expected = policy.action(step.state);
        if step.action != expected {
            return Err(ScmError::Inconsistent {
                position: i + 1,
                reason: Inconsistency::ActionMismatch { expected, found: step.action },
            });
        }
        if let Some(next) = steps.get(i + 1) {
            if mdp.prob(step.state, step.action, next.state) <= 0.0 {
                return Err(ScmError::Inconsistent {
                    position: i + 2,
                    reason: Inconsistency::ZeroProbability,
                });
            }
        }
    }
    Ok(())
}

/// Posterior noise for transitions `first .. first + count` of `path`
/// (0-based step indices). The posterior factorises over steps, so each
/// vector is sampled on its own.
pub(crate) fn abduct_steps<R: Rng + ?Sized>(
    mdp: &Mdp,
    path: &Path,
    first: usize,
    count: usize,
    method: AbductionMethod,
    rng: &mut R,
) -> Result<GumbelContext, ScmError> {
    let steps = path.steps();
    let mut ctx = GumbelContext::empty();
    for t in first..first + count {
        let (cur, next) = (steps[t], steps[t + 1]);
        ctx.push(abduct_step(method, mdp, cur.state, cur.action, next.state, rng)?);
    }
    Ok(ctx)
}

/// `n` independent posterior contexts for the whole of `path`, each with
/// `|path| - 1` steps.
pub fn abduct_path<R: Rng + ?Sized>(
    mdp: &Mdp,
    policy: &Policy,
    path: &Path,
    n: usize,
    method: AbductionMethod,
    rng: &mut R,
) -> Result<Vec<GumbelContext>, ScmError> {
    check_consistency(mdp, policy, path)?;
    (0..n)
        .map(|_| abduct_steps(mdp, path, 0, path.len() - 1, method, rng))
        .collect()
}

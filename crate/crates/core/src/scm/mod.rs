//! Gumbel-max structural causal model of an MDP under a fixed policy.

mod abduction;
mod counterfactual;
mod gumbel;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{ActionId, Mdp, MdpError, Path, Policy, PolicyRegistry, Start, StateId, Step};

pub use abduction::{
    abduct_path, abduct_step, abduct_step_exact, abduct_step_rejection, check_consistency,
    AbductionMethod, REJECTION_CAP,
};
pub use counterfactual::{start_position, CounterfactualModel};
pub use gumbel::{gumbel_argmax, gumbel_from_uniform, sample_gumbel_vector, sample_standard_gumbel, GumbelContext};

/// Why an observed path cannot have been produced by the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inconsistency {
    /// The recorded action differs from what the policy prescribes.
    ActionMismatch { expected: ActionId, found: ActionId },
    /// The transition into this position has probability zero.
    ZeroProbability,
}

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inconsistency::ActionMismatch { expected, found } => {
                write!(f, "policy prescribes {expected} but the trace records {found}")
            }
            Inconsistency::ZeroProbability => f.write_str("transition has probability zero"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScmError {
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error("inconsistent trace at position {position}: {reason}")]
    Inconsistent { position: usize, reason: Inconsistency },
    #[error("transition {from} --{action}--> {to} has probability zero")]
    ImpossibleTransition { from: StateId, action: ActionId, to: StateId },
    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionCap { attempts: usize },
    #[error("distribution has no positive entry")]
    AllZero,
    #[error("context has {found} steps, {needed} needed")]
    ContextTooShort { needed: usize, found: usize },
    #[error("invalid Gumbel context: {0}")]
    BadContext(String),
    #[error("unknown policy '{name}' (known: {})", .known.join(", "))]
    UnknownPolicy { name: String, known: Vec<String> },
}

/// The SCM induced by `mdp` under `policy`, unrolled for `horizon` states.
#[derive(Debug, Clone, Copy)]
pub struct ScmConfig<'a> {
    pub mdp: &'a Mdp,
    pub policy: &'a Policy,
    pub horizon: usize,
}

impl<'a> ScmConfig<'a> {
    pub fn new(mdp: &'a Mdp, policy: &'a Policy, horizon: usize) -> Result<Self, ScmError> {
        if horizon == 0 {
            return Err(MdpError::ZeroHorizon.into());
        }
        policy.check_against(mdp)?;
        Ok(Self { mdp, policy, horizon })
    }

    pub fn with_policy(self, policy: &'a Policy) -> Self {
        Self { policy, ..self }
    }

    /// Rolls the model forward from `start` for `self.horizon` states,
    /// taking the noise for step `j` from `context.step(j)`.
    pub fn rollout(&self, start: StateId, context: &GumbelContext) -> Result<Path, ScmError> {
        rollout(self.mdp, self.policy, start, self.horizon, context)
    }

    /// Samples a path with fresh prior noise. The first state is drawn from
    /// the initial distribution when `start` is [`Start::Init`].
    pub fn sample_path<R: Rng + ?Sized>(&self, start: Start, rng: &mut R) -> Result<Path, ScmError> {
        let n = self.mdp.num_states();
        let s = match start {
            Start::State(s) => s,
            Start::Init => StateId(gumbel_argmax(self.mdp.init(), &sample_gumbel_vector(n, rng))?),
        };
        let ctx = GumbelContext::prior(n, self.horizon - 1, rng);
        self.rollout(s, &ctx)
    }
}

/// Deterministic roll-out of `len` states: `S_{j+1} = argmax(ln P(·|S_j, π(S_j)) + g_j)`.
pub fn rollout(
    mdp: &Mdp,
    policy: &Policy,
    start: StateId,
    len: usize,
    context: &GumbelContext,
) -> Result<Path, ScmError> {
    if len == 0 {
        return Err(MdpError::ZeroLength.into());
    }
    if context.len() + 1 < len {
        return Err(ScmError::ContextTooShort { needed: len - 1, found: context.len() });
    }
    let mut steps = Vec::with_capacity(len);
    let mut s = start;
    for j in 0..len {
        let a = policy.action(s);
        steps.push(Step::new(s, a));
        if j + 1 == len {
            break;
        }
        let row = mdp.row(s, a).ok_or(MdpError::UndefinedTransition { state: s, action: a })?;
        s = StateId(gumbel_argmax(row, context.step(j))?);
    }
    Ok(Path::new(steps)?)
}

/// Samples one path of the SCM given either a fixed context or fresh noise.
pub fn sample_scm_path<R: Rng + ?Sized>(
    cfg: &ScmConfig<'_>,
    context: Option<&GumbelContext>,
    start: Start,
    rng: &mut R,
) -> Result<Path, ScmError> {
    match context {
        Some(ctx) => {
            let s = match start {
                Start::State(s) => s,
                Start::Init => StateId(crate::mdp::sample_categorical(cfg.mdp.init(), rng)),
            };
            cfg.rollout(s, ctx)
        }
        None => cfg.sample_path(start, rng),
    }
}

/// An ordered list of policy replacements `π ← π'`. The empty list leaves
/// the policy unchanged; otherwise the last replacement is the one in force.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Intervention {
    replacements: Vec<String>,
}

impl Intervention {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(replacements: Vec<String>) -> Self {
        Self { replacements }
    }

    pub fn single(name: impl Into<String>) -> Self {
        Self { replacements: vec![name.into()] }
    }

    pub fn is_empty(&self) -> bool {
        self.replacements.is_empty()
    }

    pub fn replacements(&self) -> &[String] {
        &self.replacements
    }

    /// The policy in force after the intervention. Every name must be
    /// registered, even those overridden by a later replacement.
    pub fn resolve<'a>(
        &self,
        base: &'a Policy,
        registry: &'a PolicyRegistry,
    ) -> Result<&'a Policy, ScmError> {
        let mut out = base;
        for name in &self.replacements {
            out = registry.get(name).ok_or_else(|| ScmError::UnknownPolicy {
                name: name.clone(),
                known: registry.names(),
            })?;
        }
        Ok(out)
    }
}

impl fmt::Display for Intervention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.replacements.is_empty() {
            return f.write_str("empty");
        }
        for (i, r) in self.replacements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "pi<-{r}")?;
        }
        Ok(())
    }
}

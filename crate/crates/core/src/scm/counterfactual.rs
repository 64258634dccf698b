use rand::Rng;

use super::abduction::{abduct_steps, check_consistency, AbductionMethod};
use super::gumbel::GumbelContext;
use super::{rollout, ScmConfig, ScmError};
use crate::mdp::{Mdp, MdpError, Path, Policy, StateId};

/// Clips an offset to `[-|τ|+1, |τ|-1]` and returns it together with the
/// 1-based position of `τ[-t]`.
pub fn start_position(len: usize, offset: i64) -> (i64, usize) {
    let lim = len as i64 - 1;
    let t = offset.clamp(-lim, lim);
    let k = if t >= 0 { len as i64 - t } else { -t };
    (t, k as usize)
}

/// The model `M^{P(s)}(τ)[I]`: start at `s = τ[-t]`, follow the intervened
/// policy, and drive every transition that overlaps `τ` with posterior noise
/// inferred from `τ`. Later transitions use prior noise.
///
/// Noise is indexed by absolute time, so the counterfactual world reuses
/// the observed world's posterior even after the two have diverged.
#[derive(Debug, Clone)]
pub struct CounterfactualModel<'a> {
    mdp: &'a Mdp,
    policy: &'a Policy,
    observed: &'a Path,
    offset: i64,
    start_pos: usize,
    horizon: usize,
    method: AbductionMethod,
}

impl<'a> CounterfactualModel<'a> {
    /// `cfg` is the nominal model that produced `observed`; `intervened` is
    /// the policy in force from the start state on. The rollout has
    /// `horizon` states.
    pub fn build(
        cfg: &ScmConfig<'a>,
        observed: &'a Path,
        offset: i64,
        intervened: &'a Policy,
        horizon: usize,
    ) -> Result<Self, ScmError> {
        if horizon == 0 {
            return Err(MdpError::ZeroHorizon.into());
        }
        check_consistency(cfg.mdp, cfg.policy, observed)?;
        intervened.check_against(cfg.mdp)?;
        let (offset, start_pos) = start_position(observed.len(), offset);
        Ok(Self {
            mdp: cfg.mdp,
            policy: intervened,
            observed,
            offset,
            start_pos,
            horizon,
            method: AbductionMethod::default(),
        })
    }

    pub fn with_method(self, method: AbductionMethod) -> Self {
        Self { method, ..self }
    }

    /// The same model under a different intervened policy. Both share the
    /// posterior, which does not depend on the intervention.
    pub fn with_policy(&self, policy: &'a Policy) -> Self {
        Self { policy, ..self.clone() }
    }

    pub fn mdp(&self) -> &'a Mdp {
        self.mdp
    }

    pub fn policy(&self) -> &'a Policy {
        self.policy
    }

    pub fn observed(&self) -> &'a Path {
        self.observed
    }

    /// The offset after clipping.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// 1-based position of the start state in the observed path.
    pub fn start_position(&self) -> usize {
        self.start_pos
    }

    pub fn start(&self) -> StateId {
        self.observed.steps()[self.start_pos - 1].state
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn method(&self) -> AbductionMethod {
        self.method
    }

    /// Number of rollout transitions driven by posterior noise.
    pub fn posterior_steps(&self) -> usize {
        (self.observed.len() - self.start_pos).min(self.horizon - 1)
    }

    /// Posterior noise for the overlapping transitions only.
    pub fn draw_posterior<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GumbelContext, ScmError> {
        abduct_steps(
            self.mdp,
            self.observed,
            self.start_pos - 1,
            self.posterior_steps(),
            self.method,
            rng,
        )
    }

    /// Extends a posterior draw with prior noise up to the rollout length.
    pub fn complete_context<R: Rng + ?Sized>(&self, mut ctx: GumbelContext, rng: &mut R) -> GumbelContext {
        ctx.extend_prior(self.mdp.num_states(), self.horizon - 1, rng);
        ctx
    }

    pub fn draw_context<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GumbelContext, ScmError> {
        let post = self.draw_posterior(rng)?;
        Ok(self.complete_context(post, rng))
    }

    pub fn rollout(&self, context: &GumbelContext) -> Result<Path, ScmError> {
        rollout(self.mdp, self.policy, self.start(), self.horizon, context)
    }

    pub fn sample_counterfactual_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Path, ScmError> {
        let ctx = self.draw_context(rng)?;
        self.rollout(&ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{build_gridworld, simulate_path, Cell, GridConfig, Start};
    use crate::rng::substream;

    #[test]
    fn offsets_are_clipped_and_mapped_to_positions() {
        assert_eq!(start_position(5, 0), (0, 5));
        assert_eq!(start_position(5, 1), (1, 4));
        assert_eq!(start_position(5, -1), (-1, 1));
        assert_eq!(start_position(5, 9), (4, 1));
        assert_eq!(start_position(5, -9), (-4, 4));
        assert_eq!(start_position(1, -3), (0, 1));
    }

    fn observed(seed: u64, len: usize) -> (crate::mdp::GridWorld, Policy, Path) {
        let g = build_gridworld(&GridConfig::benchmark()).unwrap();
        let pi = g.random_policy().unwrap();
        let tau = simulate_path(&g.mdp, &pi, Start::Init, len, &mut substream(seed, 0)).unwrap();
        (g, pi, tau)
    }

    #[test]
    fn empty_intervention_replays_the_observation() {
        let (g, pi, tau) = observed(1, 10);
        let cfg = ScmConfig::new(&g.mdp, &pi, 10).unwrap();
        let cf = CounterfactualModel::build(&cfg, &tau, -1, &pi, 10).unwrap();
        assert_eq!(cf.start(), tau.first().state);
        for i in 0..50 {
            assert_eq!(cf.sample_counterfactual_path(&mut substream(2, i)).unwrap(), tau);
        }
    }

    #[test]
    fn zero_offset_has_no_posterior() {
        let (g, pi, tau) = observed(3, 6);
        let cfg = ScmConfig::new(&g.mdp, &pi, 6).unwrap();
        let cf = CounterfactualModel::build(&cfg, &tau, 0, &pi, 6).unwrap();
        assert_eq!(cf.posterior_steps(), 0);
        assert_eq!(cf.start(), tau.last().state);
        // same noise stream as a nominal rollout from τ[0]
        let nominal = ScmConfig::new(&g.mdp, &pi, 6).unwrap();
        for i in 0..20 {
            let a = cf.sample_counterfactual_path(&mut substream(4, i)).unwrap();
            let ctx = GumbelContext::prior(16, 5, &mut substream(4, i));
            assert_eq!(a, nominal.rollout(tau.last().state, &ctx).unwrap());
        }
    }

    #[test]
    fn short_observation_mixes_posterior_and_prior() {
        let (g, pi, tau) = observed(5, 2);
        let cfg = ScmConfig::new(&g.mdp, &pi, 10).unwrap();
        let cf = CounterfactualModel::build(&cfg, &tau, 1, &pi, 10).unwrap();
        assert_eq!(cf.start_position(), 1);
        assert_eq!(cf.posterior_steps(), 1);
        for i in 0..20 {
            let p = cf.sample_counterfactual_path(&mut substream(6, i)).unwrap();
            assert_eq!(p.len(), 10);
            assert_eq!(p.state_at(2), tau.state_at(2));
        }
    }

    #[test]
    fn slip_free_observation_follows_the_new_arrows() {
        // with slip 0 every transition is a point mass, so the posterior is
        // irrelevant and the intervened policy is followed exactly
        let g = build_gridworld(&GridConfig { slip: 0.0, ..GridConfig::benchmark() }).unwrap();
        let (rand, opt) = (g.random_policy().unwrap(), g.optimal_policy().unwrap());
        let tau = simulate_path(&g.mdp, &rand, Start::Init, 8, &mut substream(0, 0)).unwrap();
        let cfg = ScmConfig::new(&g.mdp, &rand, 8).unwrap();
        let cf = CounterfactualModel::build(&cfg, &tau, -1, &opt, 8).unwrap();
        let expected = simulate_path(&g.mdp, &opt, Start::Init, 8, &mut substream(0, 1)).unwrap();
        let p = cf.sample_counterfactual_path(&mut substream(7, 0)).unwrap();
        assert_eq!(p, expected);
        assert_eq!(p.last().state, g.state_of(Cell(3, 3)));
    }

    #[test]
    fn inconsistent_trace_is_rejected() {
        let (g, pi, tau) = observed(8, 5);
        let opt = g.optimal_policy().unwrap();
        let cfg = ScmConfig::new(&g.mdp, &opt, 5).unwrap();
        if opt != pi && tau.steps().iter().any(|s| opt.action(s.state) != s.action) {
            assert!(CounterfactualModel::build(&cfg, &tau, -1, &pi, 5).is_err());
        }
    }
}

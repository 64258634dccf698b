use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use super::decide::{sprt, Verdict};
use super::interval::{paired_t, proportion, t_interval, two_proportion_z, welch, CiMethod, Estimate};
use super::{CheckError, StatError};
use crate::logic::{
    eval_labels, eval_path_formula, query_horizon, Bound, Comparison, Interval, PathFormula, Query, StateFormula,
    StateOracle,
};
use crate::mdp::{Mdp, Path, Policy, PolicyRegistry, StateId};
use crate::rng::{derive_seed, substream};
use crate::scm::{rollout, AbductionMethod, CounterfactualModel, GumbelContext, Intervention, ScmConfig};

const POOL_TAG: u64 = 0x706f_6f6c;
const NESTED_TAG: u64 = 0x6e65_7374;

/// How the two worlds of a difference operator are sampled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    /// Both worlds share each posterior context; paired-t interval.
    #[default]
    Paired,
    /// Independent samples per world; Z or Welch interval.
    Unpaired,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckParams {
    /// Rollouts per estimate.
    pub n: usize,
    /// Posterior contexts per observed path; rollout `i` uses context
    /// `i mod m`. `None` draws a fresh context for every rollout.
    pub m: Option<usize>,
    pub alpha: f64,
    pub seed: u64,
    /// Worker threads; 0 uses every core and 1 runs inline.
    pub jobs: usize,
    pub method: AbductionMethod,
    /// Interval for proportions: Clopper-Pearson or Wald.
    pub ci: CiMethod,
    pub delta_mode: DeltaMode,
    /// Sample cap for the sequential test.
    pub sprt_cap: usize,
}

impl Default for CheckParams {
    fn default() -> Self {
        Self {
            n: 1000,
            m: None,
            alpha: 0.05,
            seed: 0,
            jobs: 0,
            method: AbductionMethod::Exact,
            ci: CiMethod::ClopperPearson,
            delta_mode: DeltaMode::Paired,
            sprt_cap: 1_000_000,
        }
    }
}

impl CheckParams {
    pub fn validate(&self) -> Result<(), StatError> {
        if self.n == 0 {
            return Err(StatError::Invalid("n must be at least 1".into()));
        }
        if self.m == Some(0) {
            return Err(StatError::Invalid("m must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(StatError::Alpha(self.alpha));
        }
        if !matches!(self.ci, CiMethod::ClopperPearson | CiMethod::Wald) {
            return Err(StatError::Invalid(format!("{} is not an interval for proportions", self.ci)));
        }
        Ok(())
    }
}

/// Result of evaluating a top-level formula: a number for `=?` operators,
/// a verdict otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Estimate(Estimate),
    Verdict(Verdict),
}

/// Per-call evaluation settings that change under nesting.
#[derive(Clone, Copy)]
struct Ctx<'c> {
    policy: &'c Policy,
    seed: u64,
    alpha: f64,
}

enum Source<'c> {
    Nominal { policy: &'c Policy, start: StateId },
    Counterfactual { model: CounterfactualModel<'c>, pool: Vec<GumbelContext> },
}

enum Samples {
    Hits(Vec<bool>),
    Values(Vec<f64>),
}

/// Statistical model checker for one MDP, its nominal policy and the
/// policies interventions may refer to.
pub struct Checker<'a> {
    mdp: &'a Mdp,
    policy: &'a Policy,
    registry: &'a PolicyRegistry,
    params: CheckParams,
    pool: Option<ThreadPool>,
}

impl<'a> Checker<'a> {
    pub fn new(
        mdp: &'a Mdp,
        policy: &'a Policy,
        registry: &'a PolicyRegistry,
        params: CheckParams,
    ) -> Result<Self, CheckError> {
        params.validate()?;
        policy.check_against(mdp)?;
        let pool = match params.jobs {
            1 => None,
            j => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(j)
                    .build()
                    .map_err(|e| StatError::Invalid(format!("thread pool: {e}")))?,
            ),
        };
        Ok(Self { mdp, policy, registry, params, pool })
    }

    pub fn params(&self) -> &CheckParams {
        &self.params
    }

    pub fn mdp(&self) -> &'a Mdp {
        self.mdp
    }

    fn root(&self) -> Ctx<'a> {
        Ctx { policy: self.policy, seed: self.params.seed, alpha: self.params.alpha }
    }

    /// Runs `f(0..n)` and collects the results in index order, so the
    /// output does not depend on scheduling.
    fn map<T: Send>(&self, n: usize, f: impl Fn(usize) -> Result<T, CheckError> + Sync + Send) -> Result<Vec<T>, CheckError> {
        match &self.pool {
            None => (0..n).map(f).collect(),
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }

    fn draw(&self, src: &Source<'_>, i: usize, seed: u64, len: usize) -> Result<Path, CheckError> {
        let mut rng = substream(seed, i as u64);
        Ok(match src {
            Source::Nominal { policy, start } => {
                let ctx = GumbelContext::prior(self.mdp.num_states(), len - 1, &mut rng);
                rollout(self.mdp, policy, *start, len, &ctx)?
            }
            Source::Counterfactual { model, pool } => {
                let ctx = model.complete_context(pool[i % pool.len()].clone(), &mut rng);
                model.rollout(&ctx)?
            }
        })
    }

    fn indicator(&self, ctx: Ctx<'_>, path: &Path, phi: &PathFormula, i: usize) -> Result<bool, CheckError> {
        let mut oracle = NestedOracle {
            checker: self,
            ctx: Ctx { seed: derive_seed(derive_seed(ctx.seed, NESTED_TAG), i as u64), ..ctx },
            counter: 0,
        };
        eval_path_formula(&mut oracle, path, 1, phi)
    }

    /// `Σ_{j=a..b} R(τ[1+j])`.
    fn cumulative_reward(&self, path: &Path, iv: Interval) -> f64 {
        path.steps()[iv.lo() as usize..=iv.hi() as usize]
            .iter()
            .map(|s| self.mdp.reward(s.state, s.action))
            .sum()
    }

    fn statistic(&self, ctx: Ctx<'_>, path: &Path, query: &Query, i: usize) -> Result<f64, CheckError> {
        Ok(match query {
            Query::Prob { path: phi, .. } => f64::from(u8::from(self.indicator(ctx, path, phi, i)?)),
            Query::Reward { interval, .. } => self.cumulative_reward(path, *interval),
        })
    }

    fn samples(&self, ctx: Ctx<'_>, src: &Source<'_>, query: &Query) -> Result<Samples, CheckError> {
        let len = query_horizon(query) + 1;
        let n = self.params.n;
        match query {
            Query::Prob { path: phi, .. } => Ok(Samples::Hits(self.map(n, |i| {
                let p = self.draw(src, i, ctx.seed, len)?;
                self.indicator(ctx, &p, phi, i)
            })?)),
            Query::Reward { interval, .. } => Ok(Samples::Values(self.map(n, |i| {
                let p = self.draw(src, i, ctx.seed, len)?;
                Ok(self.cumulative_reward(&p, *interval))
            })?)),
        }
    }

    fn summarise(&self, samples: &Samples, alpha: f64) -> Result<Estimate, CheckError> {
        Ok(match samples {
            Samples::Hits(h) => proportion(h.iter().filter(|&&b| b).count(), h.len(), alpha, self.params.ci)?,
            Samples::Values(v) => t_interval(v, alpha)?,
        })
    }

    fn cf_model<'c>(
        &'c self,
        ctx: Ctx<'c>,
        tau: &'c Path,
        intervention: &Intervention,
        offset: i64,
        query: &Query,
    ) -> Result<CounterfactualModel<'c>, CheckError> {
        // intervention names refer to the registry; the empty intervention
        // keeps whatever policy generated `tau`
        let intervened =
            if intervention.is_empty() { ctx.policy } else { intervention.resolve(self.policy, self.registry)? };
        let cfg = ScmConfig::new(self.mdp, ctx.policy, query_horizon(query) + 1)?;
        Ok(CounterfactualModel::build(&cfg, tau, offset, intervened, cfg.horizon)?.with_method(self.params.method))
    }

    fn posterior_pool(&self, model: &CounterfactualModel<'_>, seed: u64) -> Result<Vec<GumbelContext>, CheckError> {
        let m = self.params.m.unwrap_or(self.params.n);
        let pool_seed = derive_seed(seed, POOL_TAG);
        self.map(m, |j| Ok(model.draw_posterior(&mut substream(pool_seed, j as u64))?))
    }

    fn cf_samples(
        &self,
        ctx: Ctx<'_>,
        tau: &Path,
        intervention: &Intervention,
        offset: i64,
        query: &Query,
    ) -> Result<Samples, CheckError> {
        let model = self.cf_model(ctx, tau, intervention, offset, query)?;
        let pool = self.posterior_pool(&model, ctx.seed)?;
        let inner = Ctx { policy: model.policy(), ..ctx };
        self.samples(inner, &Source::Counterfactual { model, pool }, query)
    }

    // ---- estimators -------------------------------------------------------

    /// `P=?(φ)` from `start` under `policy`.
    pub fn estimate_path_prob_with(
        &self,
        policy: &Policy,
        start: StateId,
        phi: &PathFormula,
        seed: u64,
    ) -> Result<Estimate, CheckError> {
        let q = Query::Prob { bound: Bound::Query, path: Box::new(phi.clone()) };
        self.estimate_query_with(policy, start, &q, seed)
    }

    /// `P=?(φ)` from `start` under the nominal policy.
    pub fn estimate_path_prob(&self, start: StateId, phi: &PathFormula) -> Result<Estimate, CheckError> {
        self.estimate_path_prob_with(self.policy, start, phi, self.params.seed)
    }

    /// `R=?(C[a,b])` from `start` under the nominal policy.
    pub fn estimate_cumulative_reward(&self, start: StateId, interval: Interval) -> Result<Estimate, CheckError> {
        let q = Query::Reward { bound: Bound::Query, interval };
        self.estimate_query_with(self.policy, start, &q, self.params.seed)
    }

    pub fn estimate_query_with(
        &self,
        policy: &Policy,
        start: StateId,
        query: &Query,
        seed: u64,
    ) -> Result<Estimate, CheckError> {
        policy.check_against(self.mdp)?;
        let ctx = Ctx { policy, seed, alpha: self.params.alpha };
        let s = self.samples(ctx, &Source::Nominal { policy, start }, query)?;
        self.summarise(&s, ctx.alpha)
    }

    fn nominal_estimate(&self, ctx: Ctx<'_>, tau: &Path, query: &Query) -> Result<Estimate, CheckError> {
        let src = Source::Nominal { policy: ctx.policy, start: tau.last().state };
        let s = self.samples(ctx, &src, query)?;
        self.summarise(&s, ctx.alpha)
    }

    fn cf_estimate(
        &self,
        ctx: Ctx<'_>,
        tau: &Path,
        intervention: &Intervention,
        offset: i64,
        query: &Query,
    ) -> Result<Estimate, CheckError> {
        let s = self.cf_samples(ctx, tau, intervention, offset, query)?;
        self.summarise(&s, ctx.alpha)
    }

    /// `I@t.P=?(φ)` or `I@t.R=?(C[a,b])` given the observed path `tau`.
    pub fn eval_cf(
        &self,
        tau: &Path,
        intervention: &Intervention,
        offset: i64,
        query: &Query,
    ) -> Result<Estimate, CheckError> {
        self.cf_estimate(self.root(), tau, intervention, offset, query)
    }

    /// `I@t.P=?(φ)`.
    pub fn eval_cf_prob(
        &self,
        tau: &Path,
        intervention: &Intervention,
        offset: i64,
        phi: &PathFormula,
    ) -> Result<Estimate, CheckError> {
        let q = Query::Prob { bound: Bound::Query, path: Box::new(phi.clone()) };
        self.eval_cf(tau, intervention, offset, &q)
    }

    /// `I@t.R=?(C[a,b])`.
    pub fn eval_cf_reward(
        &self,
        tau: &Path,
        intervention: &Intervention,
        offset: i64,
        interval: Interval,
    ) -> Result<Estimate, CheckError> {
        self.eval_cf(tau, intervention, offset, &Query::Reward { bound: Bound::Query, interval })
    }

    #[allow(clippy::too_many_arguments)]
    fn delta_estimate(
        &self,
        ctx: Ctx<'_>,
        tau: &Path,
        treated: &Intervention,
        control: &Intervention,
        offset: i64,
        query: &Query,
        mode: DeltaMode,
    ) -> Result<Estimate, CheckError> {
        match mode {
            DeltaMode::Paired => {
                let m1 = self.cf_model(ctx, tau, treated, offset, query)?;
                let m0 = self.cf_model(ctx, tau, control, offset, query)?;
                let pool = self.posterior_pool(&m1, ctx.seed)?;
                let src = Source::Counterfactual { model: m1.clone(), pool };
                let len = query_horizon(query) + 1;
                let diffs = self.map(self.params.n, |i| {
                    let p1 = self.draw(&src, i, ctx.seed, len)?;
                    // same noise, other policy
                    let p0 = rollout_like(&m0, &p1, &src, i, ctx.seed)?;
                    let c1 = Ctx { policy: m1.policy(), ..ctx };
                    let c0 = Ctx { policy: m0.policy(), ..ctx };
                    Ok(self.statistic(c1, &p1, query, i)? - self.statistic(c0, &p0, query, i)?)
                })?;
                Ok(paired_t(&diffs, ctx.alpha)?)
            }
            DeltaMode::Unpaired => {
                let s1 = self.cf_samples(Ctx { seed: derive_seed(ctx.seed, 1), ..ctx }, tau, treated, offset, query)?;
                let s0 = self.cf_samples(Ctx { seed: derive_seed(ctx.seed, 2), ..ctx }, tau, control, offset, query)?;
                Ok(match (s1, s0) {
                    (Samples::Hits(a), Samples::Hits(b)) => {
                        let (k1, k0) = (a.iter().filter(|&&x| x).count(), b.iter().filter(|&&x| x).count());
                        two_proportion_z(k1, a.len(), k0, b.len(), ctx.alpha)?
                    }
                    (Samples::Values(a), Samples::Values(b)) => welch(&a, &b, ctx.alpha)?,
                    _ => unreachable!("both worlds evaluate the same query"),
                })
            }
        }
    }

    /// `D[I1, I0]@t.Q=?`: the difference of the two counterfactual values.
    pub fn eval_delta(
        &self,
        tau: &Path,
        treated: &Intervention,
        control: &Intervention,
        offset: i64,
        query: &Query,
        mode: DeltaMode,
    ) -> Result<Estimate, CheckError> {
        self.delta_estimate(self.root(), tau, treated, control, offset, query, mode)
    }

    /// `Σ_s P(s) · D[I1, I0]@0.Q=?` over singleton paths `(s)`. Each term
    /// uses level `1 - α/k` for the `k` states in the support of `P`, so the
    /// weighted sum of the intervals covers with probability `1 - α`.
    pub fn eval_ate_like(
        &self,
        dist: &[f64],
        treated: &Intervention,
        control: &Intervention,
        query: &Query,
        mode: DeltaMode,
    ) -> Result<Estimate, CheckError> {
        if dist.len() != self.mdp.num_states() {
            return Err(CheckError::Distribution(format!(
                "{} weights for {} states",
                dist.len(),
                self.mdp.num_states()
            )));
        }
        if dist.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CheckError::Distribution("weights must lie in [0, 1]".into()));
        }
        let total: f64 = dist.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(CheckError::Distribution(format!("weights sum to {total}")));
        }
        let support: Vec<usize> = (0..dist.len()).filter(|&s| dist[s] > 0.0).collect();
        let ctx = Ctx { alpha: self.params.alpha / support.len() as f64, ..self.root() };
        let mut acc = Estimate { mean: 0.0, ci_low: 0.0, ci_high: 0.0, n: 0, method: CiMethod::PairedT };
        for &s in &support {
            let state = StateId(s);
            let tau = Path::singleton(state, self.policy.action(state));
            let e = self.delta_estimate(ctx, &tau, treated, control, 0, query, mode)?;
            acc.mean += dist[s] * e.mean;
            acc.ci_low += dist[s] * e.ci_low;
            acc.ci_high += dist[s] * e.ci_high;
            acc.n += e.n;
            acc.method = e.method;
        }
        Ok(acc)
    }

    // ---- formulas ---------------------------------------------------------

    /// A probability operator over a propositional formula only looks at
    /// the first state of each rollout, which is fixed, so its value is known
    /// without sampling. Deciding it exactly lets thresholds like `P>=1`
    /// come out true instead of undecided.
    fn exact_indicator(&self, q: &Query, start: StateId) -> Option<Estimate> {
        let Query::Prob { path, .. } = q else { return None };
        let b = eval_labels(self.mdp, path.as_state()?, start)?;
        let v = f64::from(u8::from(b));
        Some(Estimate { mean: v, ci_low: v, ci_high: v, n: self.params.n, method: self.params.ci })
    }

    fn check(&self, ctx: Ctx<'_>, tau: &Path, f: &StateFormula) -> Result<Verdict, CheckError> {
        let child = |k: u64| Ctx { seed: derive_seed(ctx.seed, k), ..ctx };
        let threshold = |q: &Query| match q.bound() {
            Bound::Cmp(c, p) => Ok((c, p)),
            Bound::Query => Err(CheckError::QuantitativeNested(f.to_string())),
        };
        Ok(match f {
            StateFormula::True => Verdict::exact(true),
            StateFormula::Atom(_) | StateFormula::Not(_) | StateFormula::And(..) | StateFormula::Or(..)
            | StateFormula::Implies(..)
                if f.is_propositional() =>
            {
                Verdict::exact(eval_labels(self.mdp, f, tau.last().state).expect("propositional"))
            }
            StateFormula::Atom(_) => unreachable!("atoms are propositional"),
            StateFormula::Not(a) => self.check(child(1), tau, a)?.not(),
            StateFormula::And(a, b) => self.check(child(1), tau, a)?.and(self.check(child(2), tau, b)?),
            StateFormula::Or(a, b) => self.check(child(1), tau, a)?.or(self.check(child(2), tau, b)?),
            StateFormula::Implies(a, b) => self.check(child(1), tau, a)?.implies(self.check(child(2), tau, b)?),
            StateFormula::Query(q) => {
                let (c, p) = threshold(q)?;
                let e = match self.exact_indicator(q, tau.last().state) {
                    Some(e) => e,
                    None => self.nominal_estimate(ctx, tau, q)?,
                };
                Verdict::from_estimate(e, c, p)
            }
            StateFormula::Cf { intervention, offset, query } => {
                let (c, p) = threshold(query)?;
                let model = self.cf_model(ctx, tau, intervention, *offset, query)?;
                let e = match self.exact_indicator(query, model.start()) {
                    Some(e) => e,
                    None => self.cf_estimate(ctx, tau, intervention, *offset, query)?,
                };
                Verdict::from_estimate(e, c, p)
            }
            StateFormula::Delta { treated, control, offset, query } => {
                let (c, p) = threshold(query)?;
                let model = self.cf_model(ctx, tau, treated, *offset, query)?;
                self.cf_model(ctx, tau, control, *offset, query)?;
                let e = match self.exact_indicator(query, model.start()) {
                    // both worlds start in the same state
                    Some(e) => Estimate { mean: 0.0, ci_low: 0.0, ci_high: 0.0, method: CiMethod::PairedT, ..e },
                    None => self.delta_estimate(ctx, tau, treated, control, *offset, query, self.params.delta_mode)?,
                };
                Verdict::from_estimate(e, c, p)
            }
        })
    }

    /// Verdict of `(M, τ) ⊨ Φ`. Operators nested inside path formulas are
    /// decided with fresh samples at every evaluation point; an undecided
    /// nested verdict falls back to comparing the point estimate.
    pub fn check_state_formula(&self, tau: &Path, f: &StateFormula) -> Result<Verdict, CheckError> {
        self.check(self.root(), tau, f)
    }

    /// Top-level entry point: `=?` on the root operator yields an estimate,
    /// anything else a verdict.
    pub fn evaluate(&self, tau: &Path, f: &StateFormula) -> Result<Outcome, CheckError> {
        if f.has_nested_query_bound() {
            return Err(CheckError::QuantitativeNested(f.to_string()));
        }
        let ctx = self.root();
        match f {
            StateFormula::Query(q) if q.is_quantitative() => {
                Ok(Outcome::Estimate(self.nominal_estimate(ctx, tau, q)?))
            }
            StateFormula::Cf { intervention, offset, query } if query.is_quantitative() => {
                Ok(Outcome::Estimate(self.cf_estimate(ctx, tau, intervention, *offset, query)?))
            }
            StateFormula::Delta { treated, control, offset, query } if query.is_quantitative() => Ok(
                Outcome::Estimate(self.delta_estimate(
                    ctx,
                    tau,
                    treated,
                    control,
                    *offset,
                    query,
                    self.params.delta_mode,
                )?),
            ),
            _ => Ok(Outcome::Verdict(self.check(ctx, tau, f)?)),
        }
    }

    /// The property `∅@t.P>p(F[0,T+t] ¬φ) -> I@t.P<=p(F[0,T+t] ¬φ)`.
    pub fn successful_intervention_formula(
        intervention: &Intervention,
        p: f64,
        horizon: u32,
        offset: i64,
        phi: &PathFormula,
    ) -> StateFormula {
        let reach = offset.max(0) as u32;
        let fail = PathFormula::eventually(
            Interval::new(0, horizon + reach).expect("0 <= bound"),
            PathFormula::not(phi.clone()),
        );
        let cf = |i: Intervention, c: Comparison| StateFormula::Cf {
            intervention: i,
            offset,
            query: Query::Prob { bound: Bound::Cmp(c, p), path: Box::new(fail.clone()) },
        };
        StateFormula::implies(cf(Intervention::empty(), Comparison::Gt), cf(intervention.clone(), Comparison::Le))
    }

    /// Smallest `t` in `0..|τ|` for which the successful-intervention
    /// property holds, checking offsets in increasing order.
    pub fn latest_successful_intervention(
        &self,
        tau: &Path,
        intervention: &Intervention,
        p: f64,
        horizon: u32,
        phi: &PathFormula,
    ) -> Result<Option<i64>, CheckError> {
        for t in 0..tau.len() as i64 {
            let f = Self::successful_intervention_formula(intervention, p, horizon, t, phi);
            let ctx = Ctx { seed: derive_seed(self.params.seed, t as u64), ..self.root() };
            if self.check(ctx, tau, &f)?.truth == super::Truth::True {
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    /// Sequential test of `P>p(φ)` from `start` with indifference `delta`.
    /// Returns true when `prob >= p + delta` is accepted.
    pub fn sprt_decide(
        &self,
        start: StateId,
        phi: &PathFormula,
        p: f64,
        delta: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<bool, CheckError> {
        let ctx = self.root();
        let len = crate::logic::path_horizon(phi) + 1;
        let src = Source::Nominal { policy: self.policy, start };
        let out = sprt::<CheckError>(p, delta, alpha, beta, self.params.sprt_cap, |i| {
            let path = self.draw(&src, i, ctx.seed, len)?;
            self.indicator(ctx, &path, phi, i)
        })?;
        Ok(out.accept_upper)
    }
}

/// Replays the noise of rollout `i` of `src` under `other`'s policy.
fn rollout_like(
    other: &CounterfactualModel<'_>,
    _reference: &Path,
    src: &Source<'_>,
    i: usize,
    seed: u64,
) -> Result<Path, CheckError> {
    let Source::Counterfactual { model, pool } = src else {
        unreachable!("paired differences use counterfactual sources")
    };
    let mut rng = substream(seed, i as u64);
    let ctx = model.complete_context(pool[i % pool.len()].clone(), &mut rng);
    Ok(other.rollout(&ctx)?)
}

struct NestedOracle<'c, 'a> {
    checker: &'c Checker<'a>,
    ctx: Ctx<'c>,
    counter: u64,
}

impl StateOracle for NestedOracle<'_, '_> {
    type Error = CheckError;

    fn holds(&mut self, f: &StateFormula, path: &Path, pos: usize) -> Result<bool, CheckError> {
        let state = path.steps()[pos - 1].state;
        if let Some(b) = eval_labels(self.checker.mdp, f, state) {
            return Ok(b);
        }
        self.counter += 1;
        let prefix = path.prefix(pos).expect("1 <= pos <= len");
        let ctx = Ctx { seed: derive_seed(self.ctx.seed, self.counter), ..self.ctx };
        let v = self.checker.check(ctx, &prefix, f)?;
        Ok(match v.truth {
            super::Truth::True => true,
            super::Truth::False => false,
            super::Truth::Undecided => v.point,
        })
    }
}

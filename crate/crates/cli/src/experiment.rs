//! Scripted grid-world experiments comparing nominal, counterfactual and
//! post-interventional satisfaction probabilities of the reach-avoid
//! property `!unsafe U[0,T] target`.
//!
//! Every repetition observes `paths` runs of the behaviour policy `rand` and
//! estimates each counterfactual value from `contexts` posterior noise
//! draws, intervening with `opt`. One number per arm and repetition is the
//! average satisfaction over all rollouts of that repetition.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use cfcheck_core::logic::{eval_path_formula, Interval, LabelOracle, PathFormula, StateFormula};
use cfcheck_core::mdp::{Start, TARGET_LABEL, UNSAFE_LABEL};
use cfcheck_core::rng::{derive_seed, substream};
use cfcheck_core::statcheck::CheckParams;
use cfcheck_core::{AbductionMethod, Checker, Intervention, Policy, ScmConfig, StateId};
use rayon::prelude::*;
use serde::Serialize;

use crate::model_file::LoadedModel;
use crate::CliError;

pub const NOMINAL: &str = "nominal";
pub const COUNTERFACTUAL: &str = "counterfactual";
pub const POST_INTERVENTIONAL: &str = "post_interventional";

pub const BEHAVIOUR_POLICY: &str = "rand";
pub const TARGET_POLICY: &str = "opt";

/// Histogram resolution over `[0, 1]`.
pub const BINS: usize = 20;

const OBSERVED_TAG: u64 = 1;
const COUNTERFACTUAL_TAG: u64 = 2;
const POST_TAG: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Intervening at the first state versus simulating the intervened
    /// policy from scratch; both should agree.
    Sanity,
    /// Intervening at the first observed state.
    CfOffset1,
    /// Intervening after the first observed step.
    CfOffset2,
    /// Observing only two steps and intervening after the first, so most of
    /// each rollout lies beyond the observation.
    Beyond,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Experiment::Sanity, Experiment::CfOffset1, Experiment::CfOffset2, Experiment::Beyond];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sanity => "sanity",
            Experiment::CfOffset1 => "cf_offset1",
            Experiment::CfOffset2 => "cf_offset2",
            Experiment::Beyond => "beyond",
        }
    }

    pub fn arms(self) -> &'static [&'static str] {
        match self {
            Experiment::Sanity => &[COUNTERFACTUAL, POST_INTERVENTIONAL],
            _ => &[NOMINAL, COUNTERFACTUAL],
        }
    }

    /// Offset of the counterfactual operator.
    pub fn offset(self) -> i64 {
        match self {
            Experiment::Sanity | Experiment::CfOffset1 => -1,
            Experiment::CfOffset2 => -2,
            Experiment::Beyond => 1,
        }
    }

    /// States of the observation the counterfactual arm conditions on;
    /// `None` keeps the whole simulated run.
    fn observed_states(self) -> Option<usize> {
        match self {
            Experiment::Beyond => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment '{s}' (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub reps: usize,
    pub paths: usize,
    pub contexts: usize,
    /// Bound `T` of the reach-avoid property.
    pub horizon: u32,
    pub seed: u64,
    /// Worker threads over repetitions; 0 uses every core.
    pub jobs: usize,
    pub method: AbductionMethod,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            reps: 1000,
            paths: 100,
            contexts: 20,
            horizon: 10,
            seed: 0,
            jobs: 0,
            method: AbductionMethod::Rejection,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.reps == 0 || self.paths == 0 || self.contexts == 0 {
            return Err(CliError::Usage("reps, paths and contexts must be positive".into()));
        }
        if self.horizon == 0 {
            return Err(CliError::Usage("horizon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub arm: String,
    pub mean: f64,
    pub std_error: f64,
    /// Counts over `BINS` equal bins of `[0, 1]`; 1.0 falls in the last.
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsSummary {
    pub arms: [String; 2],
    pub statistic: f64,
    /// Asymptotic two-sample critical value at the 5% level.
    pub critical_5pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub slip: Option<f64>,
    pub arms: Vec<ArmSummary>,
    pub ks: KsSummary,
    /// `values[r][k]` is arm `k`'s value in repetition `r`.
    #[serde(skip)]
    pub values: Vec<Vec<f64>>,
}

impl ExperimentReport {
    pub fn arm(&self, name: &str) -> Option<&ArmSummary> {
        self.arms.iter().find(|a| a.arm == name)
    }

    /// Per-repetition values of one arm.
    pub fn arm_values(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.arms.iter().position(|a| a.arm == name)?;
        Some(self.values.iter().map(|row| row[k]).collect())
    }

    /// Writes `repetition,arm,phi_probability` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["repetition", "arm", "phi_probability"])?;
        for (r, row) in self.values.iter().enumerate() {
            for (arm, v) in self.arms.iter().zip(row) {
                w.write_record([r.to_string(), arm.arm.clone(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `!unsafe U[0,T] target`.
pub fn reach_avoid(horizon: u32) -> PathFormula {
    PathFormula::until(
        PathFormula::state(StateFormula::not(StateFormula::atom(UNSAFE_LABEL))),
        Interval::new(0, horizon).expect("0 <= horizon"),
        PathFormula::state(StateFormula::atom(TARGET_LABEL)),
    )
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn histogram(xs: &[f64]) -> Vec<usize> {
    let mut h = vec![0; BINS];
    for &x in xs {
        let b = ((x.clamp(0.0, 1.0) * BINS as f64).floor() as usize).min(BINS - 1);
        h[b] += 1;
    }
    h
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn ks_critical_5pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.358 * ((n + m) / (n * m)).sqrt()
}

struct Setup<'a> {
    model: &'a LoadedModel,
    behaviour: &'a Policy,
    target: &'a Policy,
    start: StateId,
    phi: PathFormula,
    intervention: Intervention,
}

impl Setup<'_> {
    fn repetition(&self, cfg: &ExperimentConfig, r: usize) -> Result<Vec<f64>, CliError> {
        let mdp = &self.model.mdp;
        let len = cfg.horizon as usize + 1;
        let scm = ScmConfig::new(mdp, self.behaviour, len)?;
        let observed_seed = derive_seed(cfg.seed, OBSERVED_TAG);
        let cf_seed = derive_seed(cfg.seed, COUNTERFACTUAL_TAG);
        let (mut nominal, mut cf) = (0.0, 0.0);
        for j in 0..cfg.paths {
            let idx = (r * cfg.paths + j) as u64;
            let full = scm.sample_path(Start::State(self.start), &mut substream(observed_seed, idx))?;
            let hit = eval_path_formula(&mut LabelOracle { mdp }, &full, 1, &self.phi).map_err(|e| CliError::Model(e.to_string()))?;
            nominal += f64::from(u8::from(hit));
            let tau = match cfg.experiment.observed_states() {
                Some(k) => full.prefix(k).expect("observation shorter than the run"),
                None => full,
            };
            let params = CheckParams {
                n: cfg.contexts,
                m: Some(cfg.contexts),
                seed: derive_seed(cf_seed, idx),
                jobs: 1,
                method: cfg.method,
                ..CheckParams::default()
            };
            let checker = Checker::new(mdp, self.behaviour, &self.model.registry, params)?;
            cf += checker.eval_cf_prob(&tau, &self.intervention, cfg.experiment.offset(), &self.phi)?.mean;
        }
        let paths = cfg.paths as f64;
        Ok(match cfg.experiment {
            Experiment::Sanity => {
                let params = CheckParams {
                    n: cfg.paths * cfg.contexts,
                    seed: derive_seed(derive_seed(cfg.seed, POST_TAG), r as u64),
                    jobs: 1,
                    ..CheckParams::default()
                };
                let checker = Checker::new(mdp, self.target, &self.model.registry, params.clone())?;
                let post = checker.estimate_path_prob_with(self.target, self.start, &self.phi, params.seed)?.mean;
                vec![cf / paths, post]
            }
            _ => vec![nominal / paths, cf / paths],
        })
    }
}

/// Runs one experiment on a grid-world model registering `opt` and `rand`.
pub fn run(model: &LoadedModel, cfg: &ExperimentConfig) -> Result<ExperimentReport, CliError> {
    cfg.validate()?;
    let grid = model
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Usage("experiments need a grid-world model".into()))?;
    let setup = Setup {
        model,
        behaviour: model.policy(BEHAVIOUR_POLICY)?,
        target: model.policy(TARGET_POLICY)?,
        start: grid.start_state(),
        phi: reach_avoid(cfg.horizon),
        intervention: Intervention::single(TARGET_POLICY),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let values: Vec<Vec<f64>> =
        pool.install(|| (0..cfg.reps).into_par_iter().map(|r| setup.repetition(cfg, r)).collect::<Result<_, _>>())?;

    let names = cfg.experiment.arms();
    let columns: Vec<Vec<f64>> = (0..names.len()).map(|k| values.iter().map(|row| row[k]).collect()).collect();
    let arms = names
        .iter()
        .zip(&columns)
        .map(|(name, xs)| {
            let (mean, std_error) = mean_and_se(xs);
            ArmSummary { arm: name.to_string(), mean, std_error, histogram: histogram(xs) }
        })
        .collect();
    let ks = KsSummary {
        arms: [names[0].to_string(), names[1].to_string()],
        statistic: ks_statistic(&columns[0], &columns[1]),
        critical_5pct: ks_critical_5pct(cfg.reps, cfg.reps),
    };
    Ok(ExperimentReport { config: cfg.clone(), slip: Some(grid.config.slip), arms, ks, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse_back() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>(), Ok(e));
        }
        assert!("nope".parse::<Experiment>().unwrap_err().contains("sanity"));
    }

    #[test]
    fn ks_statistic_examples() {
        assert_eq!(ks_statistic(&[0.1, 0.2], &[0.1, 0.2]), 0.0);
        assert_eq!(ks_statistic(&[0.1, 0.2], &[0.8, 0.9]), 1.0);
        // F_a jumps to 1/2 at 0.1 while F_b is still 0
        assert_eq!(ks_statistic(&[0.1, 0.5], &[0.3, 0.5]), 0.5);
        assert!((ks_critical_5pct(100, 100) - 0.19205).abs() < 1e-4);
    }

    #[test]
    fn histogram_puts_one_in_the_last_bin() {
        let h = histogram(&[0.0, 0.049, 0.05, 1.0]);
        assert_eq!(h.len(), BINS);
        assert_eq!((h[0], h[1], h[BINS - 1]), (2, 1, 1));
    }

    #[test]
    fn standard_error_of_constant_data_is_zero() {
        assert_eq!(mean_and_se(&[0.5, 0.5, 0.5]), (0.5, 0.0));
        let (m, se) = mean_and_se(&[0.0, 1.0]);
        assert_eq!(m, 0.5);
        assert!((se - 0.5).abs() < 1e-12);
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ScmError;

/// Uniform draws are clamped to `[EPS, 1 - EPS]` so the double logarithm
/// stays finite.
const EPS: f64 = f64::EPSILON;

/// `-ln(-ln u)`, the inverse CDF of the standard Gumbel distribution.
pub fn gumbel_from_uniform(u: f64) -> f64 {
    let u = u.clamp(EPS, 1.0 - EPS);
    -(-u.ln()).ln()
}

pub fn sample_standard_gumbel<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    gumbel_from_uniform(rng.random())
}

/// One standard Gumbel draw per state.
pub fn sample_gumbel_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| sample_standard_gumbel(rng)).collect()
}

/// `argmax_s ln probs[s] + g[s]` over the support of `probs`.
///
/// Zero-probability entries never win. Exact ties go to the lowest index.
pub fn gumbel_argmax(probs: &[f64], g: &[f64]) -> Result<usize, ScmError> {
    debug_assert_eq!(probs.len(), g.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, (&p, &gi)) in probs.iter().zip(g).enumerate() {
        if p <= 0.0 {
            continue;
        }
        let v = p.ln() + gi;
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i).ok_or(ScmError::AllZero)
}

/// Exogenous Gumbel noise for a run of the SCM.
///
/// `step(t)` holds one value per state and drives the transition into
/// `S_{t+1}`, i.e. from the `(t+1)`-th to the `(t+2)`-th state of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GumbelContext {
    steps: Vec<Vec<f64>>,
}

impl GumbelContext {
    /// Checks that every vector has `num_states` finite entries.
    pub fn new(num_states: usize, steps: Vec<Vec<f64>>) -> Result<Self, ScmError> {
        for (t, v) in steps.iter().enumerate() {
            if v.len() != num_states {
                return Err(ScmError::BadContext(format!(
                    "step {t} has {} entries, expected {num_states}",
                    v.len()
                )));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(ScmError::BadContext(format!("step {t} contains {x}")));
            }
        }
        Ok(Self { steps })
    }

    pub fn empty() -> Self {
        Self { steps: Vec::new() }
    }

    /// `len` vectors of independent prior noise.
    pub fn prior<R: Rng + ?Sized>(num_states: usize, len: usize, rng: &mut R) -> Self {
        Self {
            steps: (0..len).map(|_| sample_gumbel_vector(num_states, rng)).collect(),
        }
    }

    /// Appends prior noise until the context has `len` steps.
    pub fn extend_prior<R: Rng + ?Sized>(&mut self, num_states: usize, len: usize, rng: &mut R) {
        while self.steps.len() < len {
            self.steps.push(sample_gumbel_vector(num_states, rng));
        }
    }

    pub(crate) fn push(&mut self, g: Vec<f64>) {
        self.steps.push(g);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn step(&self, t: usize) -> &[f64] {
        &self.steps[t]
    }

    pub fn steps(&self) -> &[Vec<f64>] {
        &self.steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn closed_form_values() {
        assert!((gumbel_from_uniform(0.5) - 0.366513).abs() < 1e-6);
        assert!(gumbel_from_uniform((-1.0f64).exp()).abs() < 1e-15);
        assert!(gumbel_from_uniform(0.0).is_finite());
        assert!(gumbel_from_uniform(1.0).is_finite());
    }

    #[test]
    fn sample_mean_is_euler_mascheroni() {
        const EULER: f64 = 0.577_215_664_901_532_9;
        let n = 1_000_000;
        let mut rng = substream(5, 0);
        let mean = (0..n).map(|_| sample_standard_gumbel(&mut rng)).sum::<f64>() / n as f64;
        let se = std::f64::consts::PI / 6f64.sqrt() / (n as f64).sqrt();
        assert!((mean - EULER).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn argmax_respects_support_and_ties() {
        assert_eq!(gumbel_argmax(&[1.0, 0.0, 0.0], &[-5.0, 9.0, 9.0]).unwrap(), 0);
        assert_eq!(gumbel_argmax(&[0.5, 0.5], &[0.1, 0.2]).unwrap(), 1);
        assert_eq!(gumbel_argmax(&[0.5, 0.5], &[0.3, 0.3]).unwrap(), 0);
        assert!(matches!(gumbel_argmax(&[0.0, 0.0], &[0.0, 0.0]), Err(ScmError::AllZero)));
    }

    #[test]
    fn argmax_frequencies_match_probabilities() {
        let probs = [0.2, 0.3, 0.5];
        let draws = 100_000;
        let mut rng = substream(8, 0);
        let mut counts = [0f64; 3];
        for _ in 0..draws {
            let g = sample_gumbel_vector(3, &mut rng);
            counts[gumbel_argmax(&probs, &g).unwrap()] += 1.0;
        }
        let stat: f64 = counts
            .iter()
            .zip(probs)
            .map(|(c, p)| (c - p * draws as f64).powi(2) / (p * draws as f64))
            .sum();
        let crit = ChiSquared::new(2.0).unwrap().inverse_cdf(0.999);
        assert!(stat < crit, "chi-square {stat}");
    }

    #[test]
    fn context_validation() {
        assert!(GumbelContext::new(2, vec![vec![0.0, 1.0]]).is_ok());
        assert!(GumbelContext::new(2, vec![vec![0.0]]).is_err());
        assert!(GumbelContext::new(2, vec![vec![0.0, f64::NAN]]).is_err());
        let mut c = GumbelContext::prior(3, 2, &mut substream(0, 0));
        c.extend_prior(3, 5, &mut substream(0, 1));
        assert_eq!(c.len(), 5);
    }
}

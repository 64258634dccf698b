use std::fmt;

use serde::Serialize;

use super::{Estimate, StatError};
use crate::logic::Comparison;

/// Kleene three-valued truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    True,
    False,
    Undecided,
}

impl Truth {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Undecided => Truth::Undecided,
        }
    }

    pub fn and(self, other: Truth) -> Self {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Undecided,
        }
    }

    pub fn or(self, other: Truth) -> Self {
        self.not().and(other.not()).not()
    }

    pub fn implies(self, other: Truth) -> Self {
        self.not().or(other)
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Undecided => "undecided",
        })
    }
}

/// The statistical verdict on a state formula.
///
/// `point` is the truth value obtained by comparing every estimate's mean
/// with its threshold; it resolves `Undecided` where a yes/no answer is
/// required, such as inside path formulas. `estimate` is the estimate of
/// the root operator when there is one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub truth: Truth,
    pub point: bool,
    pub estimate: Option<Estimate>,
}

impl Verdict {
    pub fn exact(b: bool) -> Self {
        Self { truth: Truth::from_bool(b), point: b, estimate: None }
    }

    pub fn from_estimate(est: Estimate, cmp: Comparison, threshold: f64) -> Self {
        Self {
            truth: check_threshold(&est, cmp, threshold),
            point: cmp.holds(est.mean, threshold),
            estimate: Some(est),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Self { truth: self.truth.not(), point: !self.point, estimate: None }
    }

    pub fn and(self, other: Verdict) -> Self {
        Self { truth: self.truth.and(other.truth), point: self.point && other.point, estimate: None }
    }

    pub fn or(self, other: Verdict) -> Self {
        Self { truth: self.truth.or(other.truth), point: self.point || other.point, estimate: None }
    }

    pub fn implies(self, other: Verdict) -> Self {
        Self { truth: self.truth.implies(other.truth), point: !self.point || other.point, estimate: None }
    }
}

/// Decides `value ⋈ threshold` from a confidence interval: true when every
/// value in the interval satisfies the bound, false when none does.
pub fn check_threshold(est: &Estimate, cmp: Comparison, threshold: f64) -> Truth {
    let all = cmp.holds(est.ci_low, threshold) && cmp.holds(est.ci_high, threshold);
    let none = !cmp.holds(est.ci_low, threshold) && !cmp.holds(est.ci_high, threshold);
    if all {
        Truth::True
    } else if none {
        Truth::False
    } else {
        Truth::Undecided
    }
}

/// Number of Bernoulli samples `n` with `P(|p̂ - p| > θ) <= γ` by the
/// Okamoto form of the Chernoff bound.
pub fn chernoff_sample_size(theta: f64, gamma: f64) -> Result<u64, StatError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(StatError::Invalid(format!("theta must lie in (0, 1), got {theta}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(StatError::Invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    Ok(((2.0 / gamma).ln() / (2.0 * theta * theta)).ceil() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SprtOutcome {
    /// True when `prob >= p + δ` is accepted, false for `prob <= p - δ`.
    pub accept_upper: bool,
    pub samples: usize,
}

/// Wald's sequential probability ratio test of `H0: prob >= p + δ` against
/// `H1: prob <= p - δ` with type-1 error `alpha` and type-2 error `beta`.
/// `sample(i)` draws the `i`-th Bernoulli observation.
pub fn sprt<E: From<StatError>>(
    p: f64,
    delta: f64,
    alpha: f64,
    beta: f64,
    cap: usize,
    mut sample: impl FnMut(usize) -> Result<bool, E>,
) -> Result<SprtOutcome, E> {
    let (p0, p1) = (p + delta, p - delta);
    if !(delta > 0.0 && p1 > 0.0 && p0 < 1.0) {
        return Err(StatError::Invalid(format!("need 0 < p - delta and p + delta < 1, got p={p}, delta={delta}")).into());
    }
    for e in [alpha, beta] {
        if !(e > 0.0 && e < 0.5) {
            return Err(StatError::Invalid(format!("error rates must lie in (0, 0.5), got {e}")).into());
        }
    }
    let upper = ((1.0 - beta) / alpha).ln();
    let lower = (beta / (1.0 - alpha)).ln();
    let (win, loss) = ((p1 / p0).ln(), ((1.0 - p1) / (1.0 - p0)).ln());
    let mut llr = 0.0;
    for i in 0..cap {
        llr += if sample(i)? { win } else { loss };
        if llr >= upper {
            return Ok(SprtOutcome { accept_upper: false, samples: i + 1 });
        }
        if llr <= lower {
            return Ok(SprtOutcome { accept_upper: true, samples: i + 1 });
        }
    }
    Err(StatError::SprtCap(cap).into())
}

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal, StudentsT};

use super::StatError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Wald,
    #[default]
    ClopperPearson,
    TInterval,
    PairedT,
    TwoSample,
}

impl fmt::Display for CiMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CiMethod::Wald => "wald",
            CiMethod::ClopperPearson => "clopper_pearson",
            CiMethod::TInterval => "t_interval",
            CiMethod::PairedT => "paired_t",
            CiMethod::TwoSample => "two_sample",
        })
    }
}

/// A Monte-Carlo estimate with a two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub method: CiMethod,
}

impl Estimate {
    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

fn check_alpha(alpha: f64) -> Result<(), StatError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatError::Alpha(alpha))
    }
}

fn z(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

fn t_quantile(alpha: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(1.0 - alpha / 2.0)
}

/// Exact binomial interval for `k` successes out of `n`.
pub fn clopper_pearson(k: usize, n: usize, alpha: f64) -> Result<Estimate, StatError> {
    check_alpha(alpha)?;
    if n == 0 || k > n {
        return Err(StatError::Counts { k, n });
    }
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0).expect("positive shapes").inverse_cdf(alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).expect("positive shapes").inverse_cdf(1.0 - alpha / 2.0)
    };
    let mean = kf / nf;
    Ok(Estimate {
        mean,
        ci_low: lo.min(mean),
        ci_high: hi.max(mean),
        n,
        method: CiMethod::ClopperPearson,
    })
}

/// Normal-approximation interval, clamped to `[0, 1]`.
pub fn wald(k: usize, n: usize, alpha: f64) -> Result<Estimate, StatError> {
    check_alpha(alpha)?;
    if n == 0 || k > n {
        return Err(StatError::Counts { k, n });
    }
    let p = k as f64 / n as f64;
    let half = z(alpha) * (p * (1.0 - p) / n as f64).sqrt();
    Ok(Estimate {
        mean: p,
        ci_low: (p - half).max(0.0),
        ci_high: (p + half).min(1.0),
        n,
        method: CiMethod::Wald,
    })
}

pub fn proportion(k: usize, n: usize, alpha: f64, method: CiMethod) -> Result<Estimate, StatError> {
    match method {
        CiMethod::Wald => wald(k, n, alpha),
        _ => clopper_pearson(k, n, alpha),
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Student-t interval for the mean of `xs`. A sample without spread gets a
/// zero-width interval.
pub fn t_interval(xs: &[f64], alpha: f64) -> Result<Estimate, StatError> {
    check_alpha(alpha)?;
    if xs.len() < 2 {
        return Err(StatError::TooFewSamples { needed: 2, found: xs.len() });
    }
    let (mean, var) = mean_var(xs);
    let half = if var > 0.0 {
        t_quantile(alpha, xs.len() as f64 - 1.0) * (var / xs.len() as f64).sqrt()
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
        n: xs.len(),
        method: CiMethod::TInterval,
    })
}

/// One-sample t interval on paired differences.
pub fn paired_t(diffs: &[f64], alpha: f64) -> Result<Estimate, StatError> {
    Ok(Estimate { method: CiMethod::PairedT, ..t_interval(diffs, alpha)? })
}

/// Z interval for `p1 - p2` from two independent binomial samples.
pub fn two_proportion_z(k1: usize, n1: usize, k2: usize, n2: usize, alpha: f64) -> Result<Estimate, StatError> {
    check_alpha(alpha)?;
    for (k, n) in [(k1, n1), (k2, n2)] {
        if n == 0 || k > n {
            return Err(StatError::Counts { k, n });
        }
    }
    let (p1, p2) = (k1 as f64 / n1 as f64, k2 as f64 / n2 as f64);
    let se = (p1 * (1.0 - p1) / n1 as f64 + p2 * (1.0 - p2) / n2 as f64).sqrt();
    let d = p1 - p2;
    let half = z(alpha) * se;
    Ok(Estimate {
        mean: d,
        ci_low: (d - half).max(-1.0),
        ci_high: (d + half).min(1.0),
        n: n1 + n2,
        method: CiMethod::TwoSample,
    })
}

/// Welch interval for `mean(a) - mean(b)`.
pub fn welch(a: &[f64], b: &[f64], alpha: f64) -> Result<Estimate, StatError> {
    check_alpha(alpha)?;
    for xs in [a, b] {
        if xs.len() < 2 {
            return Err(StatError::TooFewSamples { needed: 2, found: xs.len() });
        }
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    let d = ma - mb;
    let half = if se2 > 0.0 {
        let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
        t_quantile(alpha, df) * se2.sqrt()
    } else {
        0.0
    };
    Ok(Estimate {
        mean: d,
        ci_low: d - half,
        ci_high: d + half,
        n: a.len() + b.len(),
        method: CiMethod::TwoSample,
    })
}

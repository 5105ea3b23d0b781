//! Estimators and checks that compare simulated output with the limit laws
//! and with exact small-graph oracles.

mod aging;
mod conditions;
mod green;
mod moduli;
mod proxies;

pub use aging::{clock_marginal_check, clock_marginal_samples, estimate_aging, AgingEstimate, MAX_INCOMPLETE_FRACTION};
pub use conditions::{
    condition_a_check, condition_b_check, condition_d_diagnostic, hitting_laplace_check, ConditionKind,
    ConditionReport, Probe,
};
pub use green::{
    estimate_green, exact_green_small, exact_occupation, hitting_times, visits_before_hitting, PercolationCloud,
    EXACT_GREEN_LIMIT, OCCUPATION_LIMIT,
};
pub use moduli::{path_moduli, PathModuli};
pub use proxies::{
    condition1_proxy, condition2_proxy, score_domination, shallow_negligibility, Frequency, ScoreDomination,
};

use crate::error::{Error, Result};

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut sample: Vec<f64>) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        if sample.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidParameter("sample contains NaN".into()));
        }
        sample.sort_by(f64::total_cmp);
        Ok(Self { sorted: sample })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{x_i <= x} / n`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// Empirical quantile `inf{x : F(x) >= p}`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }
}

/// Kolmogorov-Smirnov distance `sup |F_n - F|`, checking both the value and
/// the left limit of both functions at each distinct sample point.
pub fn ks_statistic(sample: &EmpiricalCdf, cdf: impl Fn(f64) -> f64) -> f64 {
    let xs = sample.values();
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max((at - cdf(x)).abs()).max((below - cdf(x.next_down())).abs());
        i = j;
    }
    d
}

/// The KS acceptance bound `1.5 * 1.36 / sqrt(n)`.
pub fn ks_tolerance(n: usize) -> f64 {
    1.5 * 1.36 / (n as f64).sqrt()
}

/// Sample mean and its standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Frequency of `hits` in `n` trials with its binomial standard error.
pub fn binomial(hits: u64, n: u64) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

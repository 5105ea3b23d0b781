use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{two_time_states, Ensemble, Mode, TrapWalk};
use crate::error::{Error, Result};
use crate::extremal::{marginal_cdf, ExtremalLaw};

use super::{binomial, ks_statistic, EmpiricalCdf};

/// Largest tolerated share of budget-exhausted replicas.
pub const MAX_INCOMPLETE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgingEstimate {
    pub a: f64,
    pub b: f64,
    /// `ln(a^(1/alpha) t_n)`.
    pub t1_log: f64,
    /// `ln(b^(1/alpha) t_n)`.
    pub t2_log: f64,
    /// Share of completed replicas with `X(t1) = X(t2)`.
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: u64,
    pub incomplete: u64,
    pub mode: Mode,
}

impl AgingEstimate {
    /// At most 5% of replicas ran out of budget.
    pub fn valid(&self) -> bool {
        (self.incomplete as f64) <= MAX_INCOMPLETE_FRACTION * self.replicas as f64
    }
}

/// Estimates `R_n(a^(1/alpha) t_n, b^(1/alpha) t_n)`; each replica walks
/// until the clock passes `t2` within `ceil(100 T r_n)` steps.
pub fn estimate_aging(ens: &Ensemble, a: f64, b: f64, horizon: f64, replicas: u64) -> Result<AgingEstimate> {
    if !(a > 0.0 && a <= b) {
        return Err(Error::Ordering(format!("need 0 < a <= b, got a={a}, b={b}")));
    }
    if replicas == 0 {
        return Err(Error::EmptySample);
    }
    let t1_log = ens.scales.log_clock_at_level(a);
    let t2_log = ens.scales.log_clock_at_level(b);
    let outcomes: Vec<Option<bool>> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let model = ens.model(rep)?;
            let (holds, walk) = ens.streams(rep);
            match two_time_states(&model, holds, walk, t1_log, t2_log, model.clock_budget(horizon)) {
                Ok((x1, x2)) => Ok(Some(x1 == x2)),
                Err(Error::BudgetExhausted { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let incomplete = outcomes.iter().filter(|o| o.is_none()).count() as u64;
    let done = replicas - incomplete;
    let same = outcomes.iter().filter(|o| **o == Some(true)).count() as u64;
    let (estimate, stderr) = if done > 0 { binomial(same, done) } else { (f64::NAN, f64::NAN) };
    Ok(AgingEstimate { a, b, t1_log, t2_log, estimate, stderr, replicas, incomplete, mode: ens.mode })
}

/// `(S_n(floor(t r_n)) / t_n)^alpha` for each replica.
pub fn clock_marginal_samples(ens: &Ensemble, t: f64, replicas: u64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    if replicas == 0 {
        return Err(Error::EmptySample);
    }
    let steps = ens.scales.steps(t);
    (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let model = ens.model(rep)?;
            let (holds, walk) = ens.streams(rep);
            let mut walker = TrapWalk::new(&model, holds, walk)?;
            for _ in 0..steps {
                walker.advance()?;
            }
            Ok(ens.scales.rescale_log_clock(walker.log_clock()))
        })
        .collect()
}

/// Empirical law of the rescaled clock at `t` and its KS distance from
/// `exp(-t/x)`.
pub fn clock_marginal_check(ens: &Ensemble, t: f64, replicas: u64) -> Result<(EmpiricalCdf, f64)> {
    let cdf = EmpiricalCdf::new(clock_marginal_samples(ens, t, replicas)?)?;
    let law = ExtremalLaw::standard();
    let ks = ks_statistic(&cdf, |x| marginal_cdf(&law, t, x));
    Ok((cdf, ks))
}

//! Finite-n proxies for the shallow-trap, score-domination and record-site
//! properties, measured over replicas of full traces.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{record_view, simulate, Ensemble, SimulationPlan, StopRule, TraceSummary};
use crate::error::{Error, Result};

use super::binomial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency {
    pub hits: u64,
    pub trials: u64,
    pub frequency: f64,
    pub stderr: f64,
}

impl Frequency {
    fn new(hits: u64, trials: u64) -> Self {
        let (frequency, stderr) = if trials > 0 { binomial(hits, trials) } else { (f64::NAN, f64::NAN) };
        Self { hits, trials, frequency, stderr }
    }

    fn count(outcomes: &[Option<bool>]) -> Self {
        let trials = outcomes.iter().flatten().count() as u64;
        let hits = outcomes.iter().filter(|o| **o == Some(true)).count() as u64;
        Self::new(hits, trials)
    }
}

fn traces<T: Send>(
    ens: &Ensemble,
    horizon: f64,
    replicas: u64,
    observe: bool,
    f: impl Fn(&TraceSummary) -> T + Sync,
) -> Result<Vec<T>> {
    if replicas == 0 {
        return Err(Error::EmptySample);
    }
    let plan = SimulationPlan { horizon, stop: StopRule::horizon(&ens.scales, horizon), grid: vec![], observe };
    (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let model = ens.model(rep)?;
            let (holds, walk) = ens.streams(rep);
            Ok(f(&simulate(&model, &plan, holds, walk)?))
        })
        .collect()
}

/// Share of replicas with `(shallow clock / t_n)^alpha <= epsilon + d`
/// over `T r_n` steps.
pub fn shallow_negligibility(ens: &Ensemble, horizon: f64, d: f64, replicas: u64) -> Result<Frequency> {
    let bound = ens.thresholds.epsilon + d;
    let s = ens.scales;
    let out = traces(ens, horizon, replicas, false, |t| Some(s.rescale_log_clock(t.log_shallow_clock) <= bound))?;
    Ok(Frequency::count(&out))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreDomination {
    pub k_values: Vec<f64>,
    pub frequencies: Vec<Frequency>,
    /// Smallest scanned `K` reaching the target frequency.
    pub k_found: Option<f64>,
}

/// For each `K`: share of replicas with `S_n(d_n(j)) <= K m_n(j)` for every
/// `j <= zeta_n(T)`.
pub fn score_domination(
    ens: &Ensemble,
    horizon: f64,
    k_values: &[f64],
    target: f64,
    replicas: u64,
) -> Result<ScoreDomination> {
    // Per replica, the smallest K that works: max_j S(d(j)) / m(j).
    let needed = traces(ens, horizon, replicas, false, |t| {
        let Ok(view) = record_view(t) else { return f64::NEG_INFINITY };
        t.deep_events
            .iter()
            .take(t.zeta as usize)
            .zip(&view.log_m)
            .map(|(e, log_m)| e.log_clock_at_found - log_m)
            .fold(f64::NEG_INFINITY, f64::max)
    })?;
    let frequencies: Vec<Frequency> = k_values
        .iter()
        .map(|k| Frequency::new(needed.iter().filter(|&&l| l <= k.ln()).count() as u64, replicas))
        .collect();
    let k_found = k_values.iter().zip(&frequencies).find(|(_, f)| f.frequency >= target).map(|(k, _)| *k);
    Ok(ScoreDomination { k_values: k_values.to_vec(), frequencies, k_found })
}

/// Share of traces whose record sites repeat a vertex.
pub fn condition2_proxy(ens: &Ensemble, horizon: f64, replicas: u64) -> Result<Frequency> {
    let out = traces(ens, horizon, replicas, false, |t| Some(record_view(t).is_ok_and(|v| v.repeats_vertex())))?;
    Ok(Frequency::count(&out))
}

/// Among replicas where `t'` falls strictly between consecutive rescaled
/// record clock values `(S_n(k_n(j)) / t_n)^alpha`, the share with
/// `X_n(t'^{1/alpha} t_n)` at the current record site `V_n(j)`.
pub fn condition1_proxy(ens: &Ensemble, t_prime: f64, horizon: f64, replicas: u64) -> Result<Frequency> {
    let s = ens.scales;
    let log_t = s.log_clock_at_level(t_prime);
    let out = traces(ens, horizon, replicas, true, |t| {
        let view = record_view(t).ok()?;
        let holds = t.observed.as_ref()?;
        let clock_at = |step: u64| holds.get(step as usize).map(|h| h.log_clock_before);
        let levels: Vec<f64> =
            view.k.iter().map(|&k| clock_at(k).map_or(f64::INFINITY, |l| s.rescale_log_clock(l))).collect();
        let j = levels.windows(2).position(|w| w[0] < t_prime && t_prime < w[1])?;
        let hold = holds.iter().find(|h| h.log_clock_before <= log_t && log_t < h.log_clock_after)?;
        Some(hold.vertex == view.v[j])
    })?;
    Ok(Frequency::count(&out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Mode;
    use crate::graphs::GraphSpec;
    use crate::landscape::LandscapeSpec;
    use crate::scales::{pareto_scales, TrapThresholds};

    fn ensemble() -> Ensemble {
        Ensemble {
            graph: GraphSpec::complete(1 << 12).unwrap(),
            landscape: LandscapeSpec::pareto(0.5, 1.0, 0).unwrap(),
            scales: pareto_scales(0.5, 1.0, 50.0).unwrap(),
            thresholds: TrapThresholds::new(0.5, 4.0).unwrap(),
            mode: Mode::Annealed,
            seed: 9,
        }
    }

    #[test]
    fn proxies_run_and_are_probabilities() {
        let e = ensemble();
        for f in [
            shallow_negligibility(&e, 5.0, 0.25, 200).unwrap(),
            condition2_proxy(&e, 5.0, 200).unwrap(),
            condition1_proxy(&e, 1.0, 5.0, 200).unwrap(),
        ] {
            assert!(f.trials > 0 && (0.0..=1.0).contains(&f.frequency), "{f:?}");
        }
        let d = score_domination(&e, 5.0, &[1.0, 2.0, 5.0, 10.0, 20.0], 0.9, 200).unwrap();
        assert!(d.frequencies.windows(2).all(|w| w[0].frequency <= w[1].frequency));
        // S(d(2)) >= S(d(1)) + s(1) > m(2), so K = 1 only covers traces with one event.
        assert!(d.frequencies[4].frequency > d.frequencies[0].frequency);
    }
}

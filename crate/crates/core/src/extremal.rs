//! Reference laws for the limit objects: the extremal process `W` built
//! from a Poisson random measure with intensity `dt x nu(dx)`, and the
//! score law `sigma` on `[epsilon, M]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scales::{rho, TrapThresholds};

/// An extremal law given by its tail `nu(x, inf) = -ln F(x)` and the
/// inverse of that tail.
#[derive(Debug, Clone, Copy)]
pub struct ExtremalLaw {
    tail: fn(f64) -> f64,
    inverse_tail: fn(f64) -> f64,
}

fn standard_tail(x: f64) -> f64 {
    if x > 0.0 {
        1.0 / x
    } else {
        f64::INFINITY
    }
}

fn standard_inverse_tail(m: f64) -> f64 {
    1.0 / m
}

impl ExtremalLaw {
    /// `F(x) = exp(-1/x)`, `nu(x, inf) = 1/x`.
    pub fn standard() -> Self {
        Self { tail: standard_tail, inverse_tail: standard_inverse_tail }
    }

    /// `tail` must be nonincreasing with `inverse_tail(tail(x)) = x`.
    pub fn from_tail(tail: fn(f64) -> f64, inverse_tail: fn(f64) -> f64) -> Self {
        Self { tail, inverse_tail }
    }

    #[inline]
    pub fn tail(&self, x: f64) -> f64 {
        (self.tail)(x)
    }

    #[inline]
    pub fn inverse_tail(&self, mass: f64) -> f64 {
        (self.inverse_tail)(mass)
    }

    /// `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        (-self.tail(x)).exp()
    }
}

impl Default for ExtremalLaw {
    fn default() -> Self {
        Self::standard()
    }
}

/// `P(W(t_1) <= x_1, ..., W(t_l) <= x_l)` for nondecreasing times.
pub fn fdd_probability(law: &ExtremalLaw, times: &[f64], levels: &[f64]) -> Result<f64> {
    if times.len() != levels.len() {
        return Err(Error::InvalidParameter(format!("{} times but {} levels", times.len(), levels.len())));
    }
    if times.first().is_some_and(|t| !(*t >= 0.0)) || times.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Ordering("times must be nonnegative and nondecreasing".into()));
    }
    if levels.iter().any(|x| !(*x > 0.0)) {
        return Ok(0.0);
    }
    // Suffix minima of the levels, walked from the back.
    let mut exponent = 0.0;
    let mut suffix_min = f64::INFINITY;
    for k in (0..times.len()).rev() {
        suffix_min = suffix_min.min(levels[k]);
        let gap = times[k] - if k == 0 { 0.0 } else { times[k - 1] };
        if gap > 0.0 {
            exponent += gap * law.tail(suffix_min);
        }
    }
    Ok((-exponent).exp())
}

/// `P(W(t) <= x) = F(x)^t`.
pub fn marginal_cdf(law: &ExtremalLaw, t: f64, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    (-t * law.tail(x)).exp()
}

/// A sampled path of `W` on `[0, horizon]`, exact above `floor`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalPath {
    pub floor: f64,
    pub horizon: f64,
    /// Record times and the new running maximum, increasing in both.
    pub jumps: Vec<(f64, f64)>,
    /// All PRM points above the floor, in time order.
    pub points: usize,
}

impl ExtremalPath {
    /// `W(t)`, or `None` while no point above the floor has arrived.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let idx = self.jumps.partition_point(|&(s, _)| s <= t);
        (idx > 0).then(|| self.jumps[idx - 1].1)
    }

    /// Values on a grid, with the floor standing in for `None`.
    pub fn sample_grid(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&t| self.value_at(t).unwrap_or(self.floor)).collect()
    }
}

/// Samples the PRM points above `floor` on `[0, horizon]`: exponential
/// arrival gaps at rate `nu(floor, inf)`, marks by the conditional inverse
/// tail. Per point the stream yields the gap, then the mark.
pub fn sample_path(law: &ExtremalLaw, horizon: f64, floor: f64, r: &mut RngStream) -> Result<ExtremalPath> {
    if !(horizon > 0.0 && horizon.is_finite()) || !(floor > 0.0 && floor.is_finite()) {
        return Err(Error::InvalidParameter(format!("need horizon > 0 and floor > 0, got {horizon}, {floor}")));
    }
    let rate = law.tail(floor);
    let mut t = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut jumps = Vec::new();
    let mut points = 0;
    loop {
        t += -r.next_unit().ln() / rate;
        if t > horizon {
            break;
        }
        points += 1;
        let mark = law.inverse_tail(rate * r.next_unit());
        if mark > best {
            best = mark;
            jumps.push((t, mark));
        }
    }
    Ok(ExtremalPath { floor, horizon, jumps, points })
}

/// `P(sigma >= u) = rho(u, M) / rho(epsilon, M)` on `[epsilon, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaLaw {
    pub epsilon: f64,
    pub em: f64,
}

impl SigmaLaw {
    pub fn new(th: &TrapThresholds) -> Result<Self> {
        th.validate()?;
        Ok(Self { epsilon: th.epsilon, em: th.em })
    }

    fn mass(&self) -> f64 {
        1.0 / self.epsilon - 1.0 / self.em
    }

    pub fn survival(&self, u: f64) -> f64 {
        if u <= self.epsilon {
            1.0
        } else if u > self.em {
            0.0
        } else {
            (1.0 / u - 1.0 / self.em) / self.mass()
        }
    }

    pub fn cdf(&self, u: f64) -> f64 {
        1.0 - self.survival(u)
    }

    /// Inverse-CDF at `q` in (0, 1]: `1 / (1/M + q * rho(epsilon, M))`.
    pub fn quantile_from_uniform(&self, q: f64) -> f64 {
        1.0 / (1.0 / self.em + q * self.mass())
    }
}

/// One `sigma` draw; one counter step.
pub fn sample_sigma(law: &SigmaLaw, r: &mut RngStream) -> f64 {
    law.quantile_from_uniform(r.next_unit())
}

/// Limit probability that the record range jumps over `[a, b]`:
/// `rho(b, M) / rho(a, M)`, which is `a / b` for `M = inf`.
pub fn record_gap_probability(th: &TrapThresholds, a: f64, b: f64) -> Result<f64> {
    th.validate()?;
    if a == b && th.epsilon < a && a < th.em {
        return Ok(1.0);
    }
    if !(th.epsilon < a && a < b && b < th.em) {
        return Err(Error::Ordering(format!("need epsilon < a < b < M, got {} < {a} < {b} < {}", th.epsilon, th.em)));
    }
    Ok(rho(b, th.em)? / rho(a, th.em)?)
}

/// Monte Carlo counterpart: an i.i.d. `sigma` sequence avoids `[a, b]` in
/// its record range iff the first draw at or above `a` exceeds `b`.
/// Returns `(frequency, binomial stderr)`.
pub fn record_gap_monte_carlo(law: &SigmaLaw, a: f64, b: f64, sequences: u64, r: &mut RngStream) -> Result<(f64, f64)> {
    if !(law.epsilon < a && a <= b && b < law.em) || sequences == 0 {
        return Err(Error::Ordering(format!("need epsilon < a <= b < M and sequences > 0, got a={a}, b={b}")));
    }
    let mut hits = 0u64;
    for _ in 0..sequences {
        let first_high = loop {
            let s = sample_sigma(law, r);
            if s >= a {
                break s;
            }
        };
        hits += u64::from(first_high > b);
    }
    let p = hits as f64 / sequences as f64;
    Ok((p, (p * (1.0 - p) / sequences as f64).sqrt()))
}

/// `P(W(T) - W(T - delta) = 0) = (T - delta) / T`.
pub fn flat_increment_probability(horizon: f64, delta: f64) -> Result<f64> {
    if !(horizon > 0.0) || !(0.0..=horizon).contains(&delta) {
        return Err(Error::InvalidParameter(format!("need 0 <= delta <= T, got delta={delta}, T={horizon}")));
    }
    Ok((horizon - delta) / horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs()
    }

    #[test]
    fn fdd_examples() {
        let w = ExtremalLaw::standard();
        assert!(close(fdd_probability(&w, &[1.0], &[2.0]).unwrap(), 0.6065306597126334));
        assert!(close(fdd_probability(&w, &[1.0, 2.0], &[1.0, 3.0]).unwrap(), (-4.0f64 / 3.0).exp()));
        assert!(close(fdd_probability(&w, &[1.0, 2.0], &[2.0, 1.0]).unwrap(), (-2.0f64).exp()));
        assert_eq!(fdd_probability(&w, &[1.0], &[-1.0]).unwrap(), 0.0);
        assert_eq!(fdd_probability(&w, &[], &[]).unwrap(), 1.0);
        assert!(fdd_probability(&w, &[2.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(fdd_probability(&w, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn marginal_examples() {
        let w = ExtremalLaw::standard();
        assert_eq!(marginal_cdf(&w, 0.0, 0.3), 1.0);
        assert!(close(marginal_cdf(&w, 1.0, 1.0), 0.36787944117144233));
        assert!(close(marginal_cdf(&w, 2.0, 2.0), (-1.0f64).exp()));
        for t in [0.5, 1.0, 3.0] {
            for x in [0.2, 1.0, 7.0] {
                assert_eq!(marginal_cdf(&w, t, x), fdd_probability(&w, &[t], &[x]).unwrap());
            }
        }
    }

    #[test]
    fn path_value_lookup() {
        let p = ExtremalPath { floor: 0.5, horizon: 2.0, jumps: vec![(0.3, 1.0), (1.2, 4.0)], points: 3 };
        assert_eq!(p.value_at(0.1), None);
        assert_eq!(p.value_at(0.3), Some(1.0));
        assert_eq!(p.value_at(1.19), Some(1.0));
        assert_eq!(p.value_at(2.0), Some(4.0));
        assert_eq!(p.sample_grid(&[0.0, 1.5]), vec![0.5, 4.0]);
    }

    #[test]
    fn no_point_probability() {
        let w = ExtremalLaw::standard();
        let mut r = RngStream::new([3, 9]);
        let n = 100_000u64;
        let empty = (0..n).filter(|_| sample_path(&w, 1.0, 0.5, &mut r).unwrap().jumps.is_empty()).count();
        let p = (-2.0f64).exp();
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((empty as f64 / n as f64 - p).abs() < 3.0 * sd);
    }

    #[test]
    fn paths_are_monotone() {
        let w = ExtremalLaw::standard();
        let mut r = RngStream::new([4, 4]);
        for _ in 0..200 {
            let p = sample_path(&w, 5.0, 0.05, &mut r).unwrap();
            assert!(p.jumps.windows(2).all(|j| j[0].0 < j[1].0 && j[0].1 < j[1].1));
            assert!(p.jumps.iter().all(|j| j.1 > 0.05 && j.0 <= 5.0));
        }
    }

    #[test]
    fn sigma_law() {
        let s = SigmaLaw::new(&TrapThresholds::new(0.5, 4.0).unwrap()).unwrap();
        assert!(close(s.quantile_from_uniform(1.0), 0.5));
        assert!(close(s.quantile_from_uniform(1e-300), 4.0));
        assert!(close(s.survival(1.0), 3.0 / 7.0));
        let mut r = RngStream::new([1, 1]);
        let n = 100_000u64;
        let above = (0..n).filter(|_| sample_sigma(&s, &mut r) >= 1.0).count() as f64 / n as f64;
        let sd = (3.0 / 7.0 * 4.0 / 7.0 / n as f64).sqrt();
        assert!((above - 3.0 / 7.0).abs() < 3.0 * sd, "{above}");

        let wide = SigmaLaw::new(&TrapThresholds::new(1.0, 1e9).unwrap()).unwrap();
        assert!((wide.survival(2.0) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn record_gap_values() {
        let th = TrapThresholds::new(0.5, 4.0).unwrap();
        assert!(close(record_gap_probability(&th, 1.0, 2.0).unwrap(), 1.0 / 3.0));
        let open = TrapThresholds::new(0.5, f64::INFINITY).unwrap();
        assert_eq!(record_gap_probability(&open, 1.0, 2.0).unwrap(), 0.5);
        assert_eq!(record_gap_probability(&th, 1.5, 1.5).unwrap(), 1.0);
        assert!(record_gap_probability(&th, 2.0, 1.0).is_err());
        assert!(record_gap_probability(&th, 0.4, 1.0).is_err());
        assert!(record_gap_probability(&th, 1.0, 4.0).is_err());
    }

    #[test]
    fn record_gap_frequency() {
        let s = SigmaLaw::new(&TrapThresholds::new(0.5, 4.0).unwrap()).unwrap();
        let mut r = RngStream::new([8, 2]);
        let (p, sd) = record_gap_monte_carlo(&s, 1.0, 2.0, 100_000, &mut r).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 3.0 * sd, "{p} +- {sd}");
    }

    #[test]
    fn flat_increment() {
        assert_eq!(flat_increment_probability(1.0, 0.5).unwrap(), 0.5);
        assert_eq!(flat_increment_probability(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(flat_increment_probability(3.0, 3.0).unwrap(), 0.0);
        assert!(flat_increment_probability(1.0, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn fdd_monotone_in_levels(t1 in 0.0f64..3.0, dt in 0.0f64..3.0, x1 in 0.01f64..5.0, x2 in 0.01f64..5.0, bump in 0.0f64..2.0) {
            let w = ExtremalLaw::standard();
            let times = [t1, t1 + dt];
            let base = fdd_probability(&w, &times, &[x1, x2]).unwrap();
            prop_assert!(fdd_probability(&w, &times, &[x1 + bump, x2]).unwrap() >= base);
            prop_assert!(fdd_probability(&w, &times, &[x1, x2 + bump]).unwrap() >= base);
            prop_assert!(fdd_probability(&w, &[t1, t1 + dt + bump], &[x1, x2]).unwrap() <= base);
            prop_assert!(fdd_probability(&w, &[t1 + bump, t1 + dt + bump], &[x1, x2]).unwrap() <= base);
        }

        #[test]
        fn sigma_quantile_inverts_survival(q in 1e-9f64..1.0) {
            let s = SigmaLaw { epsilon: 0.5, em: 4.0 };
            let u = s.quantile_from_uniform(q);
            prop_assert!((0.5..=4.0).contains(&u));
            prop_assert!((s.survival(u) - q).abs() < 1e-9);
        }
    }
}

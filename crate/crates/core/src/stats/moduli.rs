use serde::Serialize;

use crate::error::{Error, Result};

/// Oscillation moduli of a path known on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathModuli {
    /// `sup min(|f(t) - f(t1)|, |f(t2) - f(t)|)` over `t1 <= t <= t2`, `t2 - t1 <= delta`.
    pub w: f64,
    /// `sup` of the distance from `f(t)` to the segment between `f(t1)` and `f(t2)`.
    pub w_prime: f64,
    /// Range of `f` over `[0, delta)`.
    pub v0: f64,
    /// Range of `f` over `(T - delta, T]`.
    pub v_t: f64,
}

/// Moduli over the grid points in `[0, T]`. The grid spacing must not
/// exceed `delta`.
pub fn path_moduli(times: &[f64], values: &[f64], delta: f64, horizon: f64) -> Result<PathModuli> {
    if times.len() != values.len() || times.is_empty() {
        return Err(Error::InvalidParameter("times and values must be nonempty and of equal length".into()));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Ordering("grid times must be increasing".into()));
    }
    if !(delta > 0.0 && horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("need delta > 0 and T > 0, got {delta}, {horizon}")));
    }
    let end = times.partition_point(|&t| t <= horizon);
    let (ts, fs) = (&times[..end], &values[..end]);
    // Grid times are sums of rounded spacings; compare with a little slack.
    let slack = 1e-9 * delta;
    let spacing = ts.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if spacing > delta + slack {
        return Err(Error::CoarseGrid { spacing, delta });
    }

    let mut w: f64 = 0.0;
    let mut w_prime: f64 = 0.0;
    for i in 0..ts.len() {
        for j in i..ts.len() {
            if ts[j] - ts[i] > delta + slack {
                break;
            }
            let (lo, hi) = (fs[i].min(fs[j]), fs[i].max(fs[j]));
            for k in i..=j {
                let f = fs[k];
                w = w.max((f - fs[i]).abs().min((fs[j] - f).abs()));
                w_prime = w_prime.max((lo - f).max(f - hi).max(0.0));
            }
        }
    }
    let range = |pred: &dyn Fn(f64) -> bool| {
        let inside = ts.iter().zip(fs).filter(|(t, _)| pred(**t)).map(|(_, f)| *f);
        let (lo, hi) = inside.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f), hi.max(f)));
        if lo.is_finite() {
            hi - lo
        } else {
            0.0
        }
    };
    let v0 = range(&|t| t < delta - slack);
    let v_t = range(&|t| t > horizon - delta + slack);
    Ok(PathModuli { w, w_prime, v0, v_t })
}

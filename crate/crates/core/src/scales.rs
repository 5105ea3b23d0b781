//! Scale tuples, trap classification and the `rho` calculus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `ln` that still fits in an f64.
const LN_F64_MAX: f64 = 709.782712893384;

/// `sqrt(2 ln 2)`, the admissibility bound for `alpha_n * beta_n`.
pub fn rem_admissibility_bound() -> f64 {
    (2.0 * std::f64::consts::LN_2).sqrt()
}

/// The scale tuple `(alpha_n, g_n, b_n, f_n, r_n, t_n)`.
///
/// Only `alpha_n`, `g_n`, `b_n` and `f_n` are stored; `r_n = f_n / b_n` and
/// `t_n = f_n * g_n` are computed on access so the identities hold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleSet {
    alpha: f64,
    log_g: f64,
    b: f64,
    f: f64,
}

impl ScaleSet {
    pub fn new(alpha: f64, g: f64, b: f64, f: f64) -> Result<Self> {
        Self::from_log_depth(alpha, g.ln(), b, f)
    }

    pub fn from_log_depth(alpha: f64, log_g: f64, b: f64, f: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha_n must be in (0,1), got {alpha}")));
        }
        if !(b > 0.0 && b <= 1.0) {
            return Err(Error::InvalidParameter(format!("b_n must be in (0,1], got {b}")));
        }
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::InvalidParameter(format!("f_n must be positive, got {f}")));
        }
        if !log_g.is_finite() {
            return Err(Error::InvalidParameter(format!("g_n must be positive and finite, got ln g = {log_g}")));
        }
        let s = Self { alpha, log_g, b, f };
        for (name, v) in [("g_n", s.log_g), ("t_n", s.log_t()), ("r_n", s.r().ln())] {
            if v > LN_F64_MAX {
                return Err(Error::ScaleOverflow { name, log_value: v });
            }
        }
        Ok(s)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn g(&self) -> f64 {
        self.log_g.exp()
    }
    pub fn log_g(&self) -> f64 {
        self.log_g
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn f(&self) -> f64 {
        self.f
    }
    pub fn r(&self) -> f64 {
        self.f / self.b
    }
    pub fn t(&self) -> f64 {
        self.f * self.g()
    }
    pub fn log_t(&self) -> f64 {
        self.f.ln() + self.log_g
    }

    /// `ln(level^(1/alpha_n) * t_n)`: the clock time whose rescaled value is `level`.
    pub fn log_clock_at_level(&self, level: f64) -> f64 {
        level.ln() / self.alpha + self.log_t()
    }

    /// `(S / t_n)^alpha_n` from `ln S`; `S = 0` maps to 0.
    pub fn rescale_log_clock(&self, log_clock: f64) -> f64 {
        if log_clock == f64::NEG_INFINITY {
            0.0
        } else {
            (self.alpha * (log_clock - self.log_t())).exp()
        }
    }

    /// Number of walk steps `floor(T * r_n)`.
    pub fn steps(&self, horizon: f64) -> u64 {
        (horizon * self.r()).floor() as u64
    }

    pub fn summary(&self) -> ScaleSummary {
        ScaleSummary {
            alpha_n: self.alpha,
            g_n: self.g(),
            b_n: self.b,
            f_n: self.f,
            r_n: self.r(),
            t_n: self.t(),
            log_g_n: self.log_g,
            log_t_n: self.log_t(),
        }
    }
}

/// Flat view of a [`ScaleSet`] for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleSummary {
    pub alpha_n: f64,
    pub g_n: f64,
    pub b_n: f64,
    pub f_n: f64,
    pub r_n: f64,
    pub t_n: f64,
    pub log_g_n: f64,
    pub log_t_n: f64,
}

/// How far an REM parameter point is from the asymptotic assumptions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub alpha_beta: f64,
    pub bound: f64,
    pub admissible: bool,
    /// `r_n / (n ln n)`; the assumption `n ln n << r_n` is flagged below 10.
    pub steps_over_nlogn: f64,
    pub warnings: Vec<String>,
}

pub fn rem_admissibility(n: u32, alpha: f64, beta: f64, r: f64) -> Admissibility {
    let product = alpha * beta;
    let bound = rem_admissibility_bound();
    let nf = n as f64;
    let nlogn = nf * nf.ln();
    let ratio = r / nlogn;
    let mut warnings = Vec::new();
    if ratio < 10.0 {
        warnings.push(format!("r_n = {r:.4} is below 10 n ln n = {:.4}", 10.0 * nlogn));
    }
    Admissibility { alpha_beta: product, bound, admissible: product < bound, steps_over_nlogn: ratio, warnings }
}

/// REM scales: `g_n = t_n = exp(alpha beta^2 n)`,
/// `r_n = 1/b_n = alpha beta sqrt(2 pi n) exp(alpha^2 beta^2 n / 2)`, `f_n = 1`.
pub fn rem_scales(n: u32, alpha: f64, beta: f64) -> Result<ScaleSet> {
    if n == 0 || !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("need n >= 1 and beta > 0, got n={n}, beta={beta}")));
    }
    let product = alpha * beta;
    let bound = rem_admissibility_bound();
    if product >= bound {
        return Err(Error::Inadmissible { product, bound });
    }
    let nf = n as f64;
    let log_g = alpha * beta * beta * nf;
    let log_r = (product * (2.0 * std::f64::consts::PI * nf).sqrt()).ln() + product * product * nf / 2.0;
    if log_r > LN_F64_MAX {
        return Err(Error::ScaleOverflow { name: "r_n", log_value: log_r });
    }
    let r = log_r.exp();
    let scales = ScaleSet::from_log_depth(alpha, log_g, 1.0 / r, 1.0)?;
    for w in rem_admissibility(n, alpha, beta, scales.r()).warnings {
        log::warn!("{w}");
    }
    Ok(scales)
}

/// Scales for the Pareto landscape: Condition A holds exactly with
/// `b_n = 1/target_r`, `g_n = scale * b_n^(-1/alpha)`, `f_n = 1`.
pub fn pareto_scales(alpha: f64, scale: f64, target_r: f64) -> Result<ScaleSet> {
    if !(target_r >= 1.0) {
        return Err(Error::InvalidParameter(format!("target_r must be >= 1, got {target_r}")));
    }
    let b = 1.0 / target_r;
    ScaleSet::from_log_depth(alpha, scale.ln() - b.ln() / alpha, b, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapThresholds {
    pub epsilon: f64,
    pub em: f64,
}

impl TrapThresholds {
    pub fn new(epsilon: f64, em: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < em) || epsilon.is_infinite() {
            return Err(Error::Ordering(format!("0 < epsilon < M, got epsilon={epsilon}, M={em}")));
        }
        Ok(Self { epsilon, em })
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.epsilon, self.em).map(|_| ())
    }

    /// `(ln(eps^(1/alpha) g_n), ln(M^(1/alpha) g_n))`; the upper end is `+inf` when `M = inf`.
    pub fn log_bounds(&self, s: &ScaleSet) -> (f64, f64) {
        (self.epsilon.ln() / s.alpha() + s.log_g(), self.em.ln() / s.alpha() + s.log_g())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrapClass {
    Shallow,
    Deep,
    VeryDeep,
}

/// Precomputed log-space thresholds for repeated classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classifier {
    lower: f64,
    upper: f64,
}

impl Classifier {
    pub fn new(s: &ScaleSet, th: &TrapThresholds) -> Self {
        let (lower, upper) = th.log_bounds(s);
        Self { lower, upper }
    }

    /// Deep on the closed interval `[lower, upper]`.
    #[inline]
    pub fn classify_log(&self, log_tau: f64) -> TrapClass {
        if log_tau < self.lower {
            TrapClass::Shallow
        } else if log_tau > self.upper {
            TrapClass::VeryDeep
        } else {
            TrapClass::Deep
        }
    }

    pub fn log_lower(&self) -> f64 {
        self.lower
    }

    pub fn log_upper(&self) -> f64 {
        self.upper
    }
}

/// Classifies a depth given as `ln tau`.
pub fn classify_trap_log(log_tau: f64, s: &ScaleSet, th: &TrapThresholds) -> TrapClass {
    Classifier::new(s, th).classify_log(log_tau)
}

pub fn classify_trap(tau: f64, s: &ScaleSet, th: &TrapThresholds) -> TrapClass {
    classify_trap_log(tau.ln(), s, th)
}

/// `rho_a^b = 1/a - 1/b` for `0 < a < b`, with `rho(a, inf) = 1/a`.
pub fn rho(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && a < b) {
        return Err(Error::Ordering(format!("0 < a < b, got a={a}, b={b}")));
    }
    Ok(1.0 / a - 1.0 / b)
}

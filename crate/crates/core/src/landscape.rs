//! Lazily evaluated trapping landscapes.
//!
//! A depth is `inverse_cdf(hash(seed, vertex))`: one Philox evaluation per
//! lookup, no storage, bit-identical on every call.

use std::io::Read;
use std::sync::Arc;

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::graphs::VertexId;
use crate::rng::{philox4x64_10, unit_open, unit_open_closed, RngStream};

/// Second key word for landscape hashing ("landscap").
const LANDSCAPE_DOMAIN: u64 = 0x6c61_6e64_7363_6170;

#[derive(Debug, Clone, PartialEq)]
pub enum LandscapeKind {
    /// `tau = exp(beta * sqrt(n) * Z)` with `Z` standard Gaussian.
    RemGibbs { n: u32, beta: f64 },
    /// `P(tau >= u) = (u / scale)^(-alpha)` for `u >= scale`.
    ParetoTail { alpha: f64, scale: f64 },
    /// Depth per vertex; `NaN` marks a missing entry.
    Explicit { table: Arc<[f64]> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeSpec {
    pub kind: LandscapeKind,
    pub seed: u64,
}

/// Standard normal quantile.
#[inline]
pub fn gaussian_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// `P(Z >= x)` for standard Gaussian `Z`.
#[inline]
pub fn gaussian_survival(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

impl LandscapeSpec {
    pub fn rem(n: u32, beta: f64, seed: u64) -> Result<Self> {
        if n == 0 || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidLandscape(format!("REM needs n >= 1 and beta > 0, got n={n}, beta={beta}")));
        }
        Ok(Self { kind: LandscapeKind::RemGibbs { n, beta }, seed })
    }

    pub fn pareto(alpha: f64, scale: f64, seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidLandscape(format!(
                "Pareto needs alpha in (0,1) and scale > 0, got alpha={alpha}, scale={scale}"
            )));
        }
        Ok(Self { kind: LandscapeKind::ParetoTail { alpha, scale }, seed })
    }

    pub fn explicit(table: Vec<f64>) -> Result<Self> {
        if let Some(bad) = table.iter().find(|t| !t.is_nan() && !(**t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidLandscape(format!("depths must be positive and finite, got {bad}")));
        }
        Ok(Self { kind: LandscapeKind::Explicit { table: table.into() }, seed: 0 })
    }

    /// Same law, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { kind: self.kind.clone(), seed }
    }

    /// The 64 hashed bits behind vertex `v`.
    #[inline]
    pub fn vertex_bits(&self, v: VertexId) -> u64 {
        philox4x64_10([v.0, 0, 0, 0], [self.seed, LANDSCAPE_DOMAIN])[0]
    }

    /// Vertices `0..count` all have a depth.
    pub fn covers(&self, count: u64) -> Result<()> {
        if let LandscapeKind::Explicit { table } = &self.kind {
            if let Some(missing) = (0..count).find(|&v| table.get(v as usize).is_none_or(|t| t.is_nan())) {
                return Err(Error::MissingDepth(missing));
            }
        }
        Ok(())
    }

    /// Natural log of the depth at `v`.
    #[inline]
    pub fn log_tau(&self, v: VertexId) -> Result<f64> {
        match &self.kind {
            LandscapeKind::RemGibbs { n, beta } => {
                let u = unit_open(self.vertex_bits(v));
                Ok(beta * (*n as f64).sqrt() * gaussian_quantile(u))
            }
            LandscapeKind::ParetoTail { alpha, scale } => {
                let u = unit_open_closed(self.vertex_bits(v));
                Ok(scale.ln() - u.ln() / alpha)
            }
            LandscapeKind::Explicit { table } => match table.get(v.0 as usize) {
                Some(t) if !t.is_nan() => Ok(t.ln()),
                _ => Err(Error::MissingDepth(v.0)),
            },
        }
    }

    /// `(tau, ln tau)` from one lookup; explicit depths are returned as stored.
    #[inline]
    pub fn depth(&self, v: VertexId) -> Result<(f64, f64)> {
        match &self.kind {
            LandscapeKind::Explicit { table } => match table.get(v.0 as usize) {
                Some(t) if !t.is_nan() => Ok((*t, t.ln())),
                _ => Err(Error::MissingDepth(v.0)),
            },
            _ => self.log_tau(v).map(|l| (l.exp(), l)),
        }
    }

    pub fn tau(&self, v: VertexId) -> Result<f64> {
        match &self.kind {
            LandscapeKind::Explicit { table } => match table.get(v.0 as usize) {
                Some(t) if !t.is_nan() => Ok(*t),
                _ => Err(Error::MissingDepth(v.0)),
            },
            _ => self.log_tau(v).map(f64::exp),
        }
    }

    /// Inverse-CDF transform used by [`Self::tau`] for the random laws.
    /// Explicit landscapes have no such transform and return `None`.
    pub fn depth_from_uniform(&self, u: f64) -> Option<f64> {
        match &self.kind {
            LandscapeKind::RemGibbs { n, beta } => Some((beta * (*n as f64).sqrt() * gaussian_quantile(u)).exp()),
            LandscapeKind::ParetoTail { alpha, scale } => Some(scale * u.powf(-1.0 / alpha)),
            LandscapeKind::Explicit { .. } => None,
        }
    }

    /// Exact `P(tau_x >= u)`. For an explicit table this is the fraction
    /// of vertices with depth at least `u`.
    pub fn tail_probability(&self, u: f64) -> f64 {
        self.tail_probability_log(u.ln())
    }

    /// [`Self::tail_probability`] at `u = exp(log_u)`, for thresholds that
    /// overflow f64.
    pub fn tail_probability_log(&self, log_u: f64) -> f64 {
        match &self.kind {
            LandscapeKind::RemGibbs { n, beta } => gaussian_survival(log_u / (beta * (*n as f64).sqrt())),
            LandscapeKind::ParetoTail { alpha, scale } => (-alpha * (log_u - scale.ln())).exp().min(1.0),
            LandscapeKind::Explicit { table } => {
                let present = table.iter().filter(|t| !t.is_nan());
                let total = present.clone().count();
                let above = present.filter(|t| t.ln() >= log_u).count();
                above as f64 / total.max(1) as f64
            }
        }
    }
}

/// Mean-one exponential `-ln U`, `U` uniform in (0, 1]; one counter step.
#[inline]
pub fn exponential_draw(r: &mut RngStream) -> f64 {
    exponential_from_uniform(r.next_unit())
}

#[inline]
pub fn exponential_from_uniform(u: f64) -> f64 {
    -u.ln()
}

#[derive(Debug, serde::Deserialize)]
struct DepthRow {
    vertex: u64,
    tau: f64,
}

/// Reads a `vertex,tau` CSV with header into a table indexed by vertex.
/// Gaps are stored as `NaN` and reported when the table is used.
pub fn read_explicit_table<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut table = Vec::new();
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for row in csv.deserialize::<DepthRow>() {
        let row = row.map_err(|e| Error::InvalidLandscape(format!("depth table: {e}")))?;
        if !(row.tau > 0.0 && row.tau.is_finite()) {
            return Err(Error::InvalidLandscape(format!("vertex {}: depth {} not positive", row.vertex, row.tau)));
        }
        let idx = row.vertex as usize;
        if idx >= table.len() {
            table.resize(idx + 1, f64::NAN);
        }
        if !table[idx].is_nan() {
            return Err(Error::InvalidLandscape(format!("vertex {} listed twice", row.vertex)));
        }
        table[idx] = row.tau;
    }
    Ok(table)
}

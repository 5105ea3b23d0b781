//! The random walk `Y_n`, its clock process `S_n` and the time-changed trap
//! model `X_n(t) = Y_n(k)` for `S_n(k) <= t < S_n(k+1)`.
//!
//! Random draw order per step is fixed: the exponential hold `e_i` first
//! (hold stream), then the neighbor index (walk stream). Replaying the same
//! streams therefore replays the same path bit for bit.

mod clock;
mod records;
mod trace;

pub use clock::ClockSum;
pub use records::{record_gap_hit, record_view, RecordView};
pub use trace::{rescaled_clock_path, simulate, DeepEvent, GridSample, SimulationPlan, StopRule, TraceSummary};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{GraphSpec, VertexId};
use crate::landscape::{exponential_draw, LandscapeKind, LandscapeSpec};
use crate::rng::{derive_stream, Purpose, RngStream};
use crate::scales::{Classifier, ScaleSet, TrapClass, TrapThresholds};

/// Source of the mean-one exponential holds `e_i`.
pub trait Holds {
    fn next_exponential(&mut self) -> f64;
}

impl Holds for RngStream {
    #[inline]
    fn next_exponential(&mut self) -> f64 {
        exponential_draw(self)
    }
}

/// Fixed hold values, for hand-checkable traces.
#[derive(Debug, Clone)]
pub struct ScriptedHolds<I>(pub I);

impl<I: Iterator<Item = f64>> Holds for ScriptedHolds<I> {
    fn next_exponential(&mut self) -> f64 {
        self.0.next().expect("scripted holds exhausted")
    }
}

/// Graph, landscape, scales and trap thresholds of one trap model.
#[derive(Debug, Clone)]
pub struct TrapModel {
    graph: GraphSpec,
    landscape: LandscapeSpec,
    scales: ScaleSet,
    thresholds: TrapThresholds,
    classifier: Classifier,
    start: VertexId,
}

impl TrapModel {
    pub fn new(
        graph: GraphSpec,
        landscape: LandscapeSpec,
        scales: ScaleSet,
        thresholds: TrapThresholds,
    ) -> Result<Self> {
        thresholds.validate()?;
        match (&landscape.kind, graph) {
            (LandscapeKind::RemGibbs { n, .. }, GraphSpec::Hypercube { n: dim }) if *n != dim => {
                return Err(Error::InvalidLandscape(format!(
                    "REM landscape dimension {n} does not match hypercube dimension {dim}"
                )));
            }
            (LandscapeKind::Explicit { .. }, _) => landscape.covers(graph.vertex_count())?,
            _ => {}
        }
        Ok(Self {
            graph,
            landscape,
            classifier: Classifier::new(&scales, &thresholds),
            scales,
            thresholds,
            start: VertexId(0),
        })
    }

    pub fn graph(&self) -> &GraphSpec {
        &self.graph
    }
    pub fn landscape(&self) -> &LandscapeSpec {
        &self.landscape
    }
    pub fn scales(&self) -> &ScaleSet {
        &self.scales
    }
    pub fn thresholds(&self) -> &TrapThresholds {
        &self.thresholds
    }
    pub fn classifier(&self) -> &Classifier {
        &self.classifier
    }
    pub fn start(&self) -> VertexId {
        self.start
    }

    /// Step budget for clock-level stopping: `ceil(100 * T * r_n)`.
    pub fn clock_budget(&self, horizon: f64) -> u64 {
        (100.0 * horizon * self.scales.r()).ceil() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One landscape shared by every replica.
    Quenched,
    /// A fresh landscape per replica.
    #[default]
    Annealed,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Quenched => "quenched",
            Mode::Annealed => "annealed",
        })
    }
}

/// A family of replicas: the model law plus the seed discipline that maps a
/// replica index to its landscape and walk streams.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub graph: GraphSpec,
    /// In quenched mode this landscape (and its seed) is used as is.
    pub landscape: LandscapeSpec,
    pub scales: ScaleSet,
    pub thresholds: TrapThresholds,
    pub mode: Mode,
    pub seed: u64,
}

impl Ensemble {
    pub fn landscape_for(&self, replica: u64) -> LandscapeSpec {
        match self.mode {
            Mode::Quenched => self.landscape.clone(),
            Mode::Annealed => {
                self.landscape.with_seed(derive_stream(self.seed, replica, Purpose::Landscape).next_u64())
            }
        }
    }

    pub fn model(&self, replica: u64) -> Result<TrapModel> {
        TrapModel::new(self.graph, self.landscape_for(replica), self.scales, self.thresholds)
    }

    /// `(hold stream, walk stream)` for a replica.
    pub fn streams(&self, replica: u64) -> (RngStream, RngStream) {
        (derive_stream(self.seed, replica, Purpose::Hold), derive_stream(self.seed, replica, Purpose::Walk))
    }
}

/// One holding period: the walk sat at `vertex` during step `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hold {
    pub step: u64,
    pub vertex: VertexId,
    pub log_tau: f64,
    pub class: TrapClass,
    /// `tau * e`; may overflow to infinity, `log_hold` does not.
    pub hold: f64,
    pub log_hold: f64,
    /// `ln S_n(step)`.
    pub log_clock_before: f64,
    /// `ln S_n(step + 1)`.
    pub log_clock_after: f64,
}

/// Step-by-step driver shared by every simulation entry point.
pub struct TrapWalk<'m, H> {
    model: &'m TrapModel,
    holds: H,
    walk: RngStream,
    step: u64,
    vertex: VertexId,
    tau: f64,
    log_tau: f64,
    clock: ClockSum,
}

impl<'m, H: Holds> TrapWalk<'m, H> {
    pub fn new(model: &'m TrapModel, holds: H, walk: RngStream) -> Result<Self> {
        let vertex = model.start;
        let (tau, log_tau) = model.landscape.depth(vertex)?;
        Ok(Self { model, holds, walk, step: 0, vertex, tau, log_tau, clock: ClockSum::zero() })
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// `Y_n(step)`.
    pub fn vertex(&self) -> VertexId {
        self.vertex
    }

    pub fn log_tau(&self) -> f64 {
        self.log_tau
    }

    pub fn class(&self) -> TrapClass {
        self.model.classifier.classify_log(self.log_tau)
    }

    /// `ln S_n(step)`.
    pub fn log_clock(&self) -> f64 {
        self.clock.ln()
    }

    /// Hold at the current vertex, then jump to a uniform neighbor.
    #[inline]
    pub fn advance(&mut self) -> Result<Hold> {
        let e = self.holds.next_exponential();
        let log_hold = self.log_tau + e.ln();
        let log_clock_before = self.clock.ln();
        let value = self.tau * e;
        self.clock.add_term(value, log_hold);
        let hold = Hold {
            step: self.step,
            vertex: self.vertex,
            log_tau: self.log_tau,
            class: self.class(),
            hold: value,
            log_hold,
            log_clock_before,
            log_clock_after: self.clock.ln(),
        };
        self.vertex = self.model.graph.random_neighbor(self.vertex, &mut self.walk);
        (self.tau, self.log_tau) = self.model.landscape.depth(self.vertex)?;
        self.step += 1;
        Ok(hold)
    }
}

/// `X_n(t)` for `t = exp(log_t)`: walks until the clock passes `t`.
pub fn state_at_time<H: Holds>(
    model: &TrapModel,
    holds: H,
    walk: RngStream,
    log_t: f64,
    budget: u64,
) -> Result<VertexId> {
    two_time_states(model, holds, walk, log_t, log_t, budget).map(|(x, _)| x)
}

/// `(X_n(t1), X_n(t2))` from a single pass, `t1 <= t2` given as logs.
pub fn two_time_states<H: Holds>(
    model: &TrapModel,
    holds: H,
    walk: RngStream,
    log_t1: f64,
    log_t2: f64,
    budget: u64,
) -> Result<(VertexId, VertexId)> {
    if !(log_t1 <= log_t2) {
        return Err(Error::Ordering(format!("t1 <= t2, got ln t1 = {log_t1}, ln t2 = {log_t2}")));
    }
    let mut walker = TrapWalk::new(model, holds, walk)?;
    let mut first = None;
    while walker.step() < budget {
        let hold = walker.advance()?;
        // S(k) <= t < S(k+1)
        if first.is_none() && log_t1 < hold.log_clock_after {
            first = Some(hold.vertex);
        }
        if log_t2 < hold.log_clock_after {
            return Ok((first.unwrap_or(hold.vertex), hold.vertex));
        }
    }
    Err(Error::BudgetExhausted { budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_model(graph: GraphSpec, table: Vec<f64>) -> TrapModel {
        let scales = ScaleSet::new(0.5, 4.0, 0.5, 1.0).unwrap();
        TrapModel::new(graph, LandscapeSpec::explicit(table).unwrap(), scales, TrapThresholds::new(0.5, 4.0).unwrap())
            .unwrap()
    }

    #[test]
    fn walk_sums_holds() {
        let m = explicit_model(GraphSpec::complete(2).unwrap(), vec![3.0, 1.0]);
        let mut w = TrapWalk::new(&m, ScriptedHolds([0.5, 2.0].into_iter()), RngStream::new([0, 0])).unwrap();
        assert_eq!(w.log_clock(), f64::NEG_INFINITY);
        let h0 = w.advance().unwrap();
        assert_eq!((h0.vertex, w.vertex()), (VertexId(0), VertexId(1)));
        w.advance().unwrap();
        assert!((w.log_clock().exp() - 3.5).abs() < 1e-14);
    }

    #[test]
    fn state_at_time_edges() {
        let m = explicit_model(GraphSpec::complete(2).unwrap(), vec![3.0, 1.0]);
        let holds = || ScriptedHolds([0.5, 2.0, 1.0].into_iter());
        let walk = RngStream::new([0, 0]);
        // S(1) = 1.5
        assert_eq!(state_at_time(&m, holds(), walk.clone(), f64::NEG_INFINITY, 10).unwrap(), VertexId(0));
        assert_eq!(state_at_time(&m, holds(), walk.clone(), 1.5f64.next_down().ln(), 10).unwrap(), VertexId(0));
        assert_eq!(state_at_time(&m, holds(), walk.clone(), 1.5f64.ln(), 10).unwrap(), VertexId(1));
        let t = 2.0f64.ln();
        let a = two_time_states(&m, holds(), walk.clone(), t, t, 10).unwrap();
        assert_eq!(a.0, a.1);
        assert_eq!(state_at_time(&m, holds(), walk.clone(), 100f64.ln(), 3), Err(Error::BudgetExhausted { budget: 3 }));
        assert!(two_time_states(&m, holds(), walk, 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn rem_dimension_must_match() {
        let s = ScaleSet::new(0.5, 4.0, 0.5, 1.0).unwrap();
        let th = TrapThresholds::new(0.5, 4.0).unwrap();
        let l = LandscapeSpec::rem(10, 1.0, 0).unwrap();
        assert!(TrapModel::new(GraphSpec::hypercube(12).unwrap(), l.clone(), s, th).is_err());
        assert!(TrapModel::new(GraphSpec::hypercube(10).unwrap(), l, s, th).is_ok());
        let short = LandscapeSpec::explicit(vec![1.0]).unwrap();
        assert_eq!(TrapModel::new(GraphSpec::complete(2).unwrap(), short, s, th).unwrap_err(), Error::MissingDepth(1));
    }

    #[test]
    fn ensemble_seed_discipline() {
        let e = Ensemble {
            graph: GraphSpec::hypercube(8).unwrap(),
            landscape: LandscapeSpec::rem(8, 1.0, 99).unwrap(),
            scales: ScaleSet::new(0.5, 4.0, 0.5, 1.0).unwrap(),
            thresholds: TrapThresholds::new(0.5, 4.0).unwrap(),
            mode: Mode::Annealed,
            seed: 5,
        };
        assert_ne!(e.landscape_for(0).seed, e.landscape_for(1).seed);
        assert_eq!(e.landscape_for(3), e.landscape_for(3));
        let q = Ensemble { mode: Mode::Quenched, ..e.clone() };
        assert_eq!(q.landscape_for(0).seed, 99);
        assert_eq!(q.landscape_for(7).seed, 99);
        assert_ne!(e.streams(0), e.streams(1));
    }
}

use serde::Serialize;

use super::{ClockSum, Hold, Holds, TrapModel, TrapWalk};
use crate::error::{Error, Result};
use crate::graphs::VertexId;
use crate::rng::RngStream;
use crate::scales::{ScaleSet, TrapClass};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Perform exactly this many holds, ending at `S_n(steps)`.
    Steps(u64),
    /// Walk until the clock first exceeds `exp(log_level)`, giving up after
    /// `budget` holds.
    ClockLevel { log_level: f64, budget: u64 },
}

impl StopRule {
    /// `Steps(floor(T * r_n))`.
    pub fn horizon(scales: &ScaleSet, horizon: f64) -> Self {
        StopRule::Steps(scales.steps(horizon))
    }

    /// Clock level `exp(log_level)` with the budget `ceil(100 * T * r_n)`.
    pub fn clock_level(model: &TrapModel, log_level: f64, horizon: f64) -> Self {
        StopRule::ClockLevel { log_level, budget: model.clock_budget(horizon) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    /// `T`, in units of `r_n` steps; `zeta` counts events up to `T * r_n`.
    pub horizon: f64,
    pub stop: StopRule,
    /// Sorted times in units of `r_n` steps.
    pub grid: Vec<f64>,
    /// Keep every hold in [`TraceSummary::observed`].
    pub observe: bool,
}

impl SimulationPlan {
    pub fn steps(scales: &ScaleSet, horizon: f64, grid: Vec<f64>) -> Self {
        Self { horizon, stop: StopRule::horizon(scales, horizon), grid, observe: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeepEvent {
    /// Ordinal `j >= 1`.
    pub j: u64,
    /// `d_n(j)`.
    pub step: u64,
    /// `U_n(j)`.
    pub vertex: VertexId,
    /// `ln s_n(j)`: holds at `U_n(j)` during steps `d_n(j)..d_n(j+1)`.
    pub log_score: f64,
    /// `ln S_n(d_n(j))`.
    pub log_clock_at_found: f64,
    pub log_depth: f64,
    /// False for the last event, whose score was cut short by the stop.
    pub closed: bool,
}

impl DeepEvent {
    pub fn score(&self) -> f64 {
        self.log_score.exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSample {
    /// Grid time in units of `r_n`.
    pub t: f64,
    /// `floor(t * r_n)`.
    pub step: u64,
    /// `ln S_n(step)`.
    pub log_clock: f64,
    /// `zeta_n(t)`.
    pub zeta: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub deep_events: Vec<DeepEvent>,
    /// Deep events with `step <= T * r_n`.
    pub zeta: u64,
    /// Grid points reached before the stop; later points are dropped.
    pub clock_grid: Vec<GridSample>,
    /// `ln` of the clock accumulated in shallow traps.
    pub log_shallow_clock: f64,
    pub final_step: u64,
    pub final_vertex: VertexId,
    pub log_final_clock: f64,
    /// False when a clock-level stop ran out of budget.
    pub complete: bool,
    pub observed: Option<Vec<Hold>>,
}

impl TraceSummary {
    pub fn scores_log(&self) -> Vec<f64> {
        self.deep_events.iter().map(|e| e.log_score).collect()
    }
}

struct EventTracker {
    events: Vec<DeepEvent>,
    last_deep: VertexId,
    score: ClockSum,
}

impl EventTracker {
    fn arrive(&mut self, step: u64, vertex: VertexId, class: TrapClass, log_tau: f64, log_clock: f64) -> bool {
        if step == 0 || class != TrapClass::Deep || vertex == self.last_deep {
            return false;
        }
        self.close();
        self.events.push(DeepEvent {
            j: self.events.len() as u64 + 1,
            step,
            vertex,
            log_score: f64::NEG_INFINITY,
            log_clock_at_found: log_clock,
            log_depth: log_tau,
            closed: false,
        });
        self.last_deep = vertex;
        self.score = ClockSum::zero();
        true
    }

    fn hold(&mut self, h: &Hold) {
        if !self.events.is_empty() && h.vertex == self.last_deep {
            self.score.add_term(h.hold, h.log_hold);
        }
    }

    fn close(&mut self) {
        if let Some(last) = self.events.last_mut() {
            last.log_score = self.score.ln();
            last.closed = true;
        }
    }

    fn finish(mut self) -> Vec<DeepEvent> {
        if let Some(last) = self.events.last_mut() {
            last.log_score = self.score.ln();
        }
        self.events
    }
}

/// Runs one replica of the trap model.
///
/// Deep events follow `d_n(0) = 0`, `U_n(0) = start`: an event at step
/// `i > 0` is an arrival at a Deep vertex other than the previous event's
/// vertex. An arrival exactly at the final step is recorded with an empty,
/// open score.
pub fn simulate<H: Holds>(model: &TrapModel, plan: &SimulationPlan, holds: H, walk: RngStream) -> Result<TraceSummary> {
    if plan.grid.windows(2).any(|w| !(w[0] <= w[1])) || plan.grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter("grid must be sorted and nonnegative".into()));
    }
    let scales = model.scales();
    let horizon_steps = scales.steps(plan.horizon);
    let grid_steps: Vec<u64> = plan.grid.iter().map(|&t| scales.steps(t)).collect();

    let mut walker = TrapWalk::new(model, holds, walk)?;
    let mut tracker = EventTracker { events: Vec::new(), last_deep: model.start(), score: ClockSum::zero() };
    let mut shallow = ClockSum::zero();
    let mut clock_grid = Vec::with_capacity(plan.grid.len());
    let mut observed = plan.observe.then(Vec::new);
    let mut zeta = 0u64;
    let mut next_grid = 0usize;
    let mut complete = true;

    loop {
        let step = walker.step();
        let class = walker.class();
        if tracker.arrive(step, walker.vertex(), class, walker.log_tau(), walker.log_clock()) && step <= horizon_steps {
            zeta += 1;
        }
        while next_grid < grid_steps.len() && grid_steps[next_grid] == step {
            let events = tracker.events.iter().filter(|e| e.step <= step).count() as u64;
            clock_grid.push(GridSample { t: plan.grid[next_grid], step, log_clock: walker.log_clock(), zeta: events });
            next_grid += 1;
        }
        let done = match plan.stop {
            StopRule::Steps(n) => step >= n,
            StopRule::ClockLevel { log_level, budget } => {
                if walker.log_clock() > log_level {
                    true
                } else if step >= budget {
                    complete = false;
                    true
                } else {
                    false
                }
            }
        };
        if done {
            break;
        }
        let hold = walker.advance()?;
        if hold.class == TrapClass::Shallow {
            shallow.add_term(hold.hold, hold.log_hold);
        }
        tracker.hold(&hold);
        if let Some(obs) = observed.as_mut() {
            obs.push(hold);
        }
    }

    Ok(TraceSummary {
        deep_events: tracker.finish(),
        zeta,
        clock_grid,
        log_shallow_clock: shallow.ln(),
        final_step: walker.step(),
        final_vertex: walker.vertex(),
        log_final_clock: walker.log_clock(),
        complete,
        observed,
    })
}

/// `(t, (S_n(t r_n) / t_n)^alpha)` on the trace's grid.
pub fn rescaled_clock_path(trace: &TraceSummary, s: &ScaleSet) -> Vec<(f64, f64)> {
    trace.clock_grid.iter().map(|g| (g.t, s.rescale_log_clock(g.log_clock))).collect()
}

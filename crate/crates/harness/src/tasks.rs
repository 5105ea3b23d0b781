//! Task bodies. Each returns the files it wrote and its failure counts;
//! the caller turns those into an exit status and a manifest.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use trapflow::dynamics::{record_view, simulate, SimulationPlan, StopRule, TraceSummary};
use trapflow::extremal::{fdd_probability, sample_path, ExtremalLaw, ExtremalPath};
use trapflow::graphs::VertexId;
use trapflow::rng::{derive_stream, Purpose};
use trapflow::stats::{
    binomial, condition_a_check, condition_b_check, condition_d_diagnostic, estimate_aging, hitting_laplace_check,
    AgingEstimate, ConditionReport,
};

use crate::config::{ExtremalConfig, LoadedConfig};
use crate::error::{HarnessError, HarnessResult};
use crate::output::{float, write_json, CsvTable};

pub const TRACES_CSV: &str = "traces.csv";
pub const DEEP_EVENTS_CSV: &str = "deep_events.csv";
pub const AGING_CSV: &str = "aging.csv";
pub const AGING_CONDITIONS_JSON: &str = "conditions.json";
pub const FDD_CSV: &str = "extremal_fdd.csv";
pub const PATHS_CSV: &str = "extremal_paths.csv";

/// Default Condition A probe points for the aging task's side report.
const AGING_CONDITION_A_U: [f64; 3] = [0.5, 1.0, 2.0];
const AGING_CONDITION_A_TOL: f64 = 0.15;

#[derive(Debug, Default)]
pub struct TaskOutcome {
    pub outputs: Vec<String>,
    pub incomplete: u64,
    pub gated_failures: u64,
    /// Some estimate exceeded the incomplete-replica budget.
    pub invalid: bool,
}

fn record(out: &mut TaskOutcome, name: &str) {
    out.outputs.push(name.to_string());
}

pub fn simulate_task(lc: &LoadedConfig, dir: &Path) -> HarnessResult<TaskOutcome> {
    let c = &lc.config;
    let hash = lc.hash();
    let ens = c.ensemble(&lc.base_dir)?;
    let grid = c.grid();
    let traces: Vec<TraceSummary> = (0..c.replicas)
        .into_par_iter()
        .map(|rep| {
            let model = ens.model(rep)?;
            let (holds, walk) = ens.streams(rep);
            let plan = SimulationPlan {
                horizon: c.horizon,
                stop: StopRule::horizon(&ens.scales, c.horizon),
                grid: grid.clone(),
                observe: false,
            };
            simulate(&model, &plan, holds, walk)
        })
        .collect::<Result<_, _>>()?;

    let mut clock = CsvTable::new(&hash, &["replica", "t", "clock", "rescaled", "zeta"]);
    let mut events = CsvTable::new(&hash, &["replica", "j", "step", "vertex", "score", "record_flag"]);
    let mut incomplete = 0;
    for (rep, trace) in traces.iter().enumerate() {
        incomplete += u64::from(!trace.complete);
        for g in &trace.clock_grid {
            clock.push(vec![
                rep.to_string(),
                float(g.t),
                float(g.log_clock.exp()),
                float(ens.scales.rescale_log_clock(g.log_clock)),
                g.zeta.to_string(),
            ]);
        }
        let records = match record_view(trace) {
            Ok(view) => view.q,
            Err(trapflow::error::Error::NoDeepEvents) => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        for e in &trace.deep_events {
            // Open events carry no score.
            let score = if e.closed { float(e.score()) } else { String::new() };
            events.push(vec![
                rep.to_string(),
                e.j.to_string(),
                e.step.to_string(),
                e.vertex.0.to_string(),
                score,
                u8::from(records.contains(&e.j)).to_string(),
            ]);
        }
    }
    let mut out = TaskOutcome { incomplete, ..Default::default() };
    clock.write(&dir.join(TRACES_CSV))?;
    record(&mut out, TRACES_CSV);
    events.write(&dir.join(DEEP_EVENTS_CSV))?;
    record(&mut out, DEEP_EVENTS_CSV);
    out.invalid = incomplete as f64 > trapflow::stats::MAX_INCOMPLETE_FRACTION * c.replicas as f64;
    Ok(out)
}

#[derive(Serialize)]
struct Reports<'a> {
    reports: &'a [ConditionReport],
}

pub fn aging_task(lc: &LoadedConfig, dir: &Path) -> HarnessResult<TaskOutcome> {
    let c = &lc.config;
    let hash = lc.hash();
    let ens = c.ensemble(&lc.base_dir)?;
    let aging = c.aging.as_ref().ok_or_else(|| HarnessError::Config("missing [aging]".into()))?;
    let estimates: Vec<AgingEstimate> = aging
        .levels
        .iter()
        .map(|&[a, b]| estimate_aging(&ens, a, b, c.horizon, c.replicas))
        .collect::<Result<_, _>>()?;

    let mut out = TaskOutcome::default();
    let mut table = CsvTable::new(&hash, &["a", "b", "t1_log", "t2_log", "estimate", "stderr", "replicas", "mode"]);
    for e in &estimates {
        table.push(vec![
            float(e.a),
            float(e.b),
            float(e.t1_log),
            float(e.t2_log),
            float(e.estimate),
            float(e.stderr),
            e.replicas.to_string(),
            e.mode.to_string(),
        ]);
        out.incomplete += e.incomplete;
        out.invalid |= !e.valid();
        if let Some(tol) = aging.tolerance {
            out.gated_failures += u64::from(!((e.estimate - e.a / e.b).abs() <= tol));
        }
    }
    table.write(&dir.join(AGING_CSV))?;
    record(&mut out, AGING_CSV);

    // Side report on the tail condition at the same parameter point; it
    // documents the finite-n bias and does not gate the run.
    let mut a = condition_a_check(&ens.landscape, &ens.scales, &AGING_CONDITION_A_U, AGING_CONDITION_A_TOL);
    a.gated = false;
    write_json(&dir.join(AGING_CONDITIONS_JSON), &hash, &Reports { reports: &[a] })?;
    record(&mut out, AGING_CONDITIONS_JSON);
    Ok(out)
}

#[derive(Serialize)]
struct Single<'a> {
    report: &'a ConditionReport,
}

pub fn conditions_task(lc: &LoadedConfig, dir: &Path) -> HarnessResult<TaskOutcome> {
    let c = &lc.config;
    let hash = lc.hash();
    let ens = c.ensemble(&lc.base_dir)?;
    let cond = c.conditions.as_ref().ok_or_else(|| HarnessError::Config("missing [conditions]".into()))?;
    let (s, graph) = (&ens.scales, ens.graph);
    let mut reports: Vec<(&str, ConditionReport)> = Vec::new();
    if let Some(a) = &cond.a {
        reports.push(("a", condition_a_check(&ens.landscape, s, &a.u_values, a.tolerance)));
    }
    if let Some(b) = &cond.b {
        let density = b.density.unwrap_or(s.b());
        reports.push(("b", condition_b_check(&graph, density, VertexId(0), b.replicas, c.seed, b.k_g, b.tolerance)?));
    }
    if let Some(h) = &cond.c {
        let report = hitting_laplace_check(
            &graph,
            h.rho,
            s.b(),
            &h.s_values,
            s.r(),
            h.replicas,
            c.seed,
            h.laplace_tolerance,
            h.ks_tolerance,
        )?;
        reports.push(("c", report));
    }
    if let Some(d) = &cond.d {
        let g = d.graph.unwrap_or(graph);
        reports.push(("d", condition_d_diagnostic(&g, d.horizon, s.r(), d.lambda, d.replicas, c.seed)?));
    }
    let mut out = TaskOutcome::default();
    for (tag, report) in &reports {
        let name = format!("condition_{tag}.json");
        write_json(&dir.join(&name), &hash, &Single { report })?;
        record(&mut out, &name);
        out.gated_failures += report.probes.iter().filter(|p| report.gated && p.pass == Some(false)).count() as u64;
    }
    Ok(out)
}

/// Every `(t, x)` of the marginal grid, then the configured multi-time points.
fn fdd_points(x: &ExtremalConfig) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut points: Vec<(Vec<f64>, Vec<f64>)> =
        x.times.iter().flat_map(|&t| x.levels.iter().map(move |&l| (vec![t], vec![l]))).collect();
    points.extend(x.fdd_points.iter().map(|[t, l]| (t.clone(), l.clone())));
    points
}

fn joined(xs: &[f64]) -> String {
    xs.iter().map(|&x| float(x)).collect::<Vec<_>>().join(";")
}

/// A path is below every level iff its value (the floor where it has
/// no point yet, which is below any admissible level) is.
fn path_below(p: &ExtremalPath, times: &[f64], levels: &[f64]) -> bool {
    times.iter().zip(levels).all(|(&t, &x)| p.value_at(t).is_none_or(|v| v <= x))
}

pub fn extremal_task(lc: &LoadedConfig, dir: &Path) -> HarnessResult<TaskOutcome> {
    let c = &lc.config;
    let hash = lc.hash();
    let x = c.extremal.as_ref().ok_or_else(|| HarnessError::Config("missing [extremal]".into()))?;
    let points = fdd_points(x);
    for (t, l) in &points {
        if t.len() != l.len() || t.is_empty() {
            return Err(HarnessError::Config("fdd point needs equally many times and levels".into()));
        }
        if t.iter().any(|&t| t > c.horizon) || l.iter().any(|&l| l < x.floor) {
            return Err(HarnessError::Config(format!(
                "fdd point {t:?}/{l:?} leaves the sampled window (times <= horizon, levels >= floor)"
            )));
        }
    }
    if !(x.path_step > 0.0) {
        return Err(HarnessError::Config("path_step must be positive".into()));
    }
    let law = ExtremalLaw::standard();
    let paths: Vec<ExtremalPath> = (0..x.paths)
        .into_par_iter()
        .map(|id| sample_path(&law, c.horizon, x.floor, &mut derive_stream(c.seed, id, Purpose::Extremal)))
        .collect::<Result<_, _>>()?;

    let mut fdd = CsvTable::new(&hash, &["point", "times", "levels", "analytic", "empirical", "stderr", "paths"]);
    for (i, (t, l)) in points.iter().enumerate() {
        let analytic = fdd_probability(&law, t, l)?;
        let hits = paths.iter().filter(|p| path_below(p, t, l)).count() as u64;
        let (p, se) = if x.paths > 0 { binomial(hits, x.paths) } else { (f64::NAN, f64::NAN) };
        fdd.push(vec![i.to_string(), joined(t), joined(l), float(analytic), float(p), float(se), x.paths.to_string()]);
    }

    let steps = (c.horizon / x.path_step).floor() as u64;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * x.path_step).collect();
    let mut table = CsvTable::new(&hash, &["path_id", "t", "value"]);
    for (id, p) in paths.iter().take(x.export_paths as usize).enumerate() {
        for (t, v) in grid.iter().zip(p.sample_grid(&grid)) {
            table.push(vec![id.to_string(), float(*t), float(v)]);
        }
    }
    let mut out = TaskOutcome::default();
    fdd.write(&dir.join(FDD_CSV))?;
    record(&mut out, FDD_CSV);
    table.write(&dir.join(PATHS_CSV))?;
    record(&mut out, PATHS_CSV);
    Ok(out)
}

/// Scale summary of the campaign's model, plus admissibility and the deep
/// window for REM points.
pub fn scale_report(lc: &LoadedConfig) -> HarnessResult<serde_json::Value> {
    let c = &lc.config;
    let s = c.scales()?;
    let mut report = serde_json::json!({
        "config_hash": lc.hash(),
        "scales": s.summary(),
    });
    if let (
        Some(crate::config::LandscapeConfig::Rem { beta, .. }),
        Some(trapflow::graphs::GraphSpec::Hypercube { n }),
    ) = (&c.landscape, c.graph)
    {
        report["admissibility"] = serde_json::to_value(trapflow::scales::rem_admissibility(n, s.alpha(), *beta, s.r()))
            .map_err(|e| HarnessError::Io(e.to_string()))?;
    }
    if let Ok(th) = c.thresholds() {
        let (lo, hi) = th.log_bounds(&s);
        report["deep_window_log"] = serde_json::json!([lo, hi]);
    }
    Ok(report)
}

//! Browser bindings: three small operations behind the static demo page.
//! Results come back as flat `Float64Array`s; errors as thrown strings.

use wasm_bindgen::prelude::*;

use trapflow::dynamics::{rescaled_clock_path, simulate, Ensemble, Mode, SimulationPlan, StopRule};
use trapflow::extremal::{fdd_probability, record_gap_monte_carlo, record_gap_probability, sample_path};
use trapflow::extremal::{ExtremalLaw, SigmaLaw};
use trapflow::graphs::GraphSpec;
use trapflow::landscape::LandscapeSpec;
use trapflow::rng::{derive_stream, Purpose};
use trapflow::scales::{rem_scales, TrapThresholds};

fn js(e: trapflow::error::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Jumps of one extremal-process path on `[0, horizon]` above `floor`, as
/// `[t0, w0, t1, w1, ...]`.
#[wasm_bindgen]
pub fn extremal_path(horizon: f64, floor: f64, seed: u32) -> Result<Vec<f64>, JsValue> {
    let mut r = derive_stream(u64::from(seed), 0, Purpose::Extremal);
    let path = sample_path(&ExtremalLaw::standard(), horizon, floor, &mut r).map_err(js)?;
    Ok(path.jumps.iter().flat_map(|&(t, w)| [t, w]).collect())
}

/// `P(W(t_i) <= x_i for all i)`.
#[wasm_bindgen]
pub fn extremal_fdd(times: Vec<f64>, levels: Vec<f64>) -> Result<f64, JsValue> {
    fdd_probability(&ExtremalLaw::standard(), &times, &levels).map_err(js)
}

/// `[monte_carlo, stderr, exact]` for the record range of i.i.d.
/// `sigma` draws on `[epsilon, em]` jumping over `[a, b]`.
#[wasm_bindgen]
pub fn record_gap(epsilon: f64, em: f64, a: f64, b: f64, sequences: u32, seed: u32) -> Result<Vec<f64>, JsValue> {
    let th = TrapThresholds::new(epsilon, em).map_err(js)?;
    let exact = record_gap_probability(&th, a, b).map_err(js)?;
    let law = SigmaLaw::new(&th).map_err(js)?;
    let mut r = derive_stream(u64::from(seed), 0, Purpose::Sigma);
    let (p, se) = record_gap_monte_carlo(&law, a, b, u64::from(sequences), &mut r).map_err(js)?;
    Ok(vec![p, se, exact])
}

/// Rescaled clock `(S(t r_n) / t_n)^alpha` of one REM trap-model replica on
/// the `n`-cube at `points + 1` even times in `[0, horizon]`, as
/// `[t0, v0, t1, v1, ...]`.
#[wasm_bindgen]
pub fn rem_clock_path(
    n: u32,
    alpha: f64,
    beta: f64,
    horizon: f64,
    points: u32,
    seed: u32,
) -> Result<Vec<f64>, JsValue> {
    if points == 0 || points > 10_000 {
        return Err(JsValue::from_str("points must be in 1..=10000"));
    }
    let scales = rem_scales(n, alpha, beta).map_err(js)?;
    if scales.steps(horizon) > 50_000_000 {
        return Err(JsValue::from_str("horizon too long for the browser (more than 5e7 steps)"));
    }
    let seed = u64::from(seed);
    let ens = Ensemble {
        graph: GraphSpec::hypercube(n).map_err(js)?,
        landscape: LandscapeSpec::rem(n, beta, seed).map_err(js)?,
        scales,
        thresholds: TrapThresholds::new(0.5, f64::INFINITY).map_err(js)?,
        mode: Mode::Quenched,
        seed,
    };
    let model = ens.model(0).map_err(js)?;
    let (holds, walk) = ens.streams(0);
    let grid = (0..=points).map(|i| horizon * f64::from(i) / f64::from(points)).collect();
    let plan = SimulationPlan { horizon, stop: StopRule::horizon(&scales, horizon), grid, observe: false };
    let trace = simulate(&model, &plan, holds, walk).map_err(js)?;
    Ok(rescaled_clock_path(&trace, &scales).into_iter().flat_map(|(t, v)| [t, v]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremal_path_is_increasing() {
        let p = extremal_path(2.0, 0.05, 1).unwrap();
        assert_eq!(p.len() % 2, 0);
        let jumps: Vec<_> = p.chunks(2).collect();
        assert!(jumps.windows(2).all(|w| w[0][0] < w[1][0] && w[0][1] < w[1][1]));
        assert_eq!(extremal_path(2.0, 0.05, 1).unwrap(), p);
    }

    #[test]
    fn fdd_hand_value() {
        let v = extremal_fdd(vec![1.0, 2.0], vec![1.0, 3.0]).unwrap();
        assert!((v / (-4.0f64 / 3.0).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn record_gap_third() {
        let v = record_gap(0.5, 4.0, 1.0, 2.0, 20_000, 3).unwrap();
        assert!((v[2] - 1.0 / 3.0).abs() < 1e-15);
        assert!((v[0] - v[2]).abs() < 4.0 * v[1]);
    }

    #[test]
    fn clock_path_is_monotone() {
        let v = rem_clock_path(12, 0.3, 2.0, 2.0, 20, 5).unwrap();
        assert_eq!(v.len(), 42);
        assert_eq!(v[1], 0.0);
        assert!(v.chunks(2).collect::<Vec<_>>().windows(2).all(|w| w[0][1] <= w[1][1]));
    }
}

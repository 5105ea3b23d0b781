//! Monte Carlo output against exact small-chain oracles written here,
//! independently of the library's own solvers.

use trapflow::dynamics::{simulate, two_time_states, Ensemble, Mode, SimulationPlan, StopRule, TrapModel, TrapWalk};
use trapflow::graphs::{GraphSpec, VertexId};
use trapflow::landscape::LandscapeSpec;
use trapflow::rng::{derive_stream, Purpose};
use trapflow::scales::{ScaleSet, TrapThresholds};
use trapflow::stats::{exact_green_small, exact_occupation, mean_stderr, visits_before_hitting};

fn explicit_model(graph: GraphSpec, table: Vec<f64>, g: f64) -> TrapModel {
    let scales = ScaleSet::new(0.5, g, 0.5, 1.0).unwrap();
    TrapModel::new(graph, LandscapeSpec::explicit(table).unwrap(), scales, TrapThresholds::new(0.5, 4.0).unwrap())
        .unwrap()
}

/// `sum_x G_k(0, x) tau_x` by summing powers of the 4x4 transition matrix.
fn mean_clock_oracle(tau: &[f64; 4], k: usize) -> f64 {
    let mut dist = [1.0, 0.0, 0.0, 0.0];
    let mut total = 0.0;
    for _ in 0..k {
        total += dist.iter().zip(tau).map(|(p, t)| p * t).sum::<f64>();
        let mut next = [0.0; 4];
        for (x, p) in dist.iter().enumerate() {
            for (y, n) in next.iter_mut().enumerate() {
                if x != y {
                    *n += p / 3.0;
                }
            }
        }
        dist = next;
    }
    total
}

#[test]
fn mean_clock_matches_matrix_oracle() {
    let tau = [3.0, 1.0, 2.0, 5.0];
    let m = explicit_model(GraphSpec::complete(4).unwrap(), tau.to_vec(), 1.0);
    let k = 6;
    let exact = mean_clock_oracle(&tau, k);
    let occ = exact_occupation(m.graph(), VertexId(0), k as u64).unwrap();
    let via_lib: f64 = occ.iter().zip(&tau).map(|(g, t)| g * t).sum();
    assert!((exact - via_lib).abs() < 1e-12);

    let reps = 100_000u64;
    let clocks: Vec<f64> = (0..reps)
        .map(|r| {
            let mut w =
                TrapWalk::new(&m, derive_stream(1, r, Purpose::Hold), derive_stream(1, r, Purpose::Walk)).unwrap();
            for _ in 0..k {
                w.advance().unwrap();
            }
            w.log_clock().exp()
        })
        .collect();
    let (mean, se) = mean_stderr(&clocks);
    assert!((mean - exact).abs() < 3.0 * se, "{mean} +- {se} vs {exact}");
}

/// Two-state trap model as a CTMC with rates `1/tau_0` and `1/tau_1`.
fn two_state_same(tau0: f64, tau1: f64, t1: f64, t2: f64) -> f64 {
    let (a, b) = (1.0 / tau0, 1.0 / tau1);
    let (pi0, pi1) = (b / (a + b), a / (a + b));
    let p00 = |s: f64| pi0 + pi1 * (-(a + b) * s).exp();
    let p11 = |s: f64| pi1 + pi0 * (-(a + b) * s).exp();
    let at0 = p00(t1);
    at0 * p00(t2 - t1) + (1.0 - at0) * p11(t2 - t1)
}

#[test]
fn two_time_states_match_two_state_chain() {
    let (tau0, tau1) = (4.0, 0.5);
    let m = explicit_model(GraphSpec::complete(2).unwrap(), vec![tau0, tau1], 1.0);
    let reps = 40_000u64;
    for (t1, t2) in [(1.0, 2.0), (0.5, 6.0), (3.0, 3.5)] {
        let same = (0..reps)
            .filter(|&r| {
                let (x, y) = two_time_states(
                    &m,
                    derive_stream(5, r, Purpose::Hold),
                    derive_stream(5, r, Purpose::Walk),
                    f64::ln(t1),
                    f64::ln(t2),
                    1 << 20,
                )
                .unwrap();
                x == y
            })
            .count() as f64
            / reps as f64;
        let exact = two_state_same(tau0, tau1, t1, t2);
        let se = (exact * (1.0 - exact) / reps as f64).sqrt();
        assert!((same - exact).abs() < 3.0 * se, "({t1},{t2}): {same} vs {exact}");
    }
}

#[test]
fn score_mean_is_depth_times_green() {
    // Complete(8), g = 10, alpha = 0.5: Deep is [2.5, 160]. Vertices 1, 2, 3
    // are deep, the rest shallow.
    let tau = vec![1.0, 5.0, 20.0, 80.0, 1.0, 1.0, 1.0, 1.0];
    let m = explicit_model(GraphSpec::complete(8).unwrap(), tau.clone(), 10.0);
    let deep = [1u64, 2, 3];
    let plan = SimulationPlan { horizon: 100.0, stop: StopRule::Steps(200), grid: vec![], observe: false };
    let mut scores: Vec<Vec<f64>> = vec![Vec::new(); 8];
    for r in 0..20_000u64 {
        let t = simulate(&m, &plan, derive_stream(2, r, Purpose::Hold), derive_stream(2, r, Purpose::Walk)).unwrap();
        // Events found by step 100 close long before the stop at 200, so
        // the truncation does not bias the kept scores.
        for e in t.deep_events.iter().filter(|e| e.step <= 100) {
            assert!(e.closed);
            scores[e.vertex.0 as usize].push(e.score());
        }
    }
    for &x in &deep {
        let green = exact_green_small(m.graph(), |v| v.0 != x && deep.contains(&v.0), VertexId(x)).unwrap();
        // G = 1 + (5/7) H and H = G/7 + (4/7) H, so H = G/3 and G = 21/16.
        assert!((green - 21.0 / 16.0).abs() < 1e-12, "{green}");
        let (mean, se) = mean_stderr(&scores[x as usize]);
        let expected = tau[x as usize] * green;
        assert!((mean - expected).abs() < 3.0 * se, "x={x}: {mean} +- {se} vs {expected}");
    }
}

#[test]
fn exact_green_against_monte_carlo() {
    let cases =
        [(GraphSpec::complete(4).unwrap(), VertexId(3), 1.5), (GraphSpec::hypercube(3).unwrap(), VertexId(7), 2.5)];
    for (g, target, hand) in cases {
        let exact = exact_green_small(&g, |v| v == target, VertexId(0)).unwrap();
        assert!((exact - hand).abs() < 1e-12);
        let visits: Vec<f64> = (0..200_000u64)
            .map(|r| {
                let mut w = derive_stream(4, r, Purpose::Walk);
                visits_before_hitting(&g, |v| v == target, VertexId(0), &mut w, 1 << 20).unwrap().visits as f64
            })
            .collect();
        let (mean, se) = mean_stderr(&visits);
        assert!((mean - exact).abs() < 3.0 * se, "{g}: {mean} +- {se} vs {exact}");
    }
}

#[test]
fn replay_reproduces_jump_chain() {
    // X(S(k)) = Y(k) for every k, checked through full observed traces.
    let e = Ensemble {
        graph: GraphSpec::hypercube(6).unwrap(),
        landscape: LandscapeSpec::rem(6, 1.0, 3).unwrap(),
        scales: ScaleSet::new(0.5, 4.0, 0.1, 1.0).unwrap(),
        thresholds: TrapThresholds::new(0.5, 4.0).unwrap(),
        mode: Mode::Annealed,
        seed: 12,
    };
    for rep in 0..20 {
        let m = e.model(rep).unwrap();
        let (h, w) = e.streams(rep);
        let plan = SimulationPlan { horizon: 5.0, stop: StopRule::Steps(50), grid: vec![], observe: true };
        let trace = simulate(&m, &plan, h.clone(), w.clone()).unwrap();
        let holds = trace.observed.unwrap();
        for hold in holds.iter().skip(1) {
            let x = trapflow::dynamics::state_at_time(&m, h.clone(), w.clone(), hold.log_clock_before, 1000).unwrap();
            assert_eq!(x, hold.vertex);
        }
    }
}

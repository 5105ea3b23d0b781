use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphs::{GraphSpec, VertexId};
use crate::rng::{derive_stream, philox4x64_10, unit_open_closed, Purpose, RngStream};

use super::mean_stderr;

/// Largest graph handed to the dense linear solver.
pub const EXACT_GREEN_LIMIT: u64 = 4096;
/// Largest graph for occupation-vector work and empty-cloud checks.
pub const OCCUPATION_LIMIT: u64 = 1 << 20;

const MAX_CLOUD_ATTEMPTS: u64 = 1000;

/// Independent site percolation, each vertex kept with probability
/// `density`, evaluated lazily by hashing `(vertex, attempt)` under `key`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercolationCloud {
    pub density: f64,
    pub key: [u64; 2],
    pub attempt: u64,
}

impl PercolationCloud {
    pub fn new(density: f64, key: [u64; 2]) -> Result<Self> {
        if !(density > 0.0 && density <= 1.0) {
            return Err(Error::InvalidParameter(format!("cloud density must be in (0, 1], got {density}")));
        }
        Ok(Self { density, key, attempt: 0 })
    }

    /// Draws a cloud whose part outside `x` is nonempty. On graphs up to
    /// [`OCCUPATION_LIMIT`] vertices an empty draw is redrawn with the next
    /// attempt index; larger graphs are not checked.
    pub fn draw(g: &GraphSpec, density: f64, key: [u64; 2], x: VertexId) -> Result<Self> {
        let mut cloud = Self::new(density, key)?;
        if g.vertex_count() > OCCUPATION_LIMIT {
            return Ok(cloud);
        }
        while !(0..g.vertex_count()).any(|v| v != x.0 && cloud.contains(VertexId(v))) {
            cloud.attempt += 1;
            if cloud.attempt >= MAX_CLOUD_ATTEMPTS {
                return Err(Error::InvalidParameter(format!("density {density} keeps giving empty clouds")));
            }
        }
        Ok(cloud)
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        unit_open_closed(philox4x64_10([v.0, self.attempt, 0, 0], self.key)[0]) <= self.density
    }
}

/// One excursion from `x` until the walk enters `target` away from `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Excursion {
    /// Visits to `x`, the initial one included.
    pub visits: u64,
    /// Hitting time in steps.
    pub steps: u64,
}

pub fn visits_before_hitting(
    g: &GraphSpec,
    target: impl Fn(VertexId) -> bool,
    x: VertexId,
    walk: &mut RngStream,
    budget: u64,
) -> Result<Excursion> {
    let mut v = x;
    let mut visits = 1;
    for step in 1..=budget {
        v = g.random_neighbor(v, walk);
        if v == x {
            visits += 1;
        } else if target(v) {
            return Ok(Excursion { visits, steps: step });
        }
    }
    Err(Error::BudgetExhausted { budget })
}

fn default_budget(density: f64) -> u64 {
    ((1e4 / density).ceil() as u64).max(1_000_000)
}

fn excursions(g: &GraphSpec, density: f64, x: VertexId, replicas: u64, seed: u64) -> Result<Vec<Excursion>> {
    if replicas == 0 {
        return Err(Error::EmptySample);
    }
    let budget = default_budget(density);
    (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let key = derive_stream(seed, rep, Purpose::Cloud).key();
            let cloud = PercolationCloud::draw(g, density, key, x)?;
            visits_before_hitting(g, |v| cloud.contains(v), x, &mut derive_stream(seed, rep, Purpose::Walk), budget)
        })
        .collect()
}

/// Monte Carlo `G_{A \ x}(x, x)` over fresh clouds: `(mean, stderr)`.
pub fn estimate_green(g: &GraphSpec, density: f64, x: VertexId, replicas: u64, seed: u64) -> Result<(f64, f64)> {
    let visits: Vec<f64> = excursions(g, density, x, replicas, seed)?.iter().map(|e| e.visits as f64).collect();
    Ok(mean_stderr(&visits))
}

/// Hitting times of the cloud minus `x`, one fresh cloud per replica.
pub fn hitting_times(g: &GraphSpec, density: f64, x: VertexId, replicas: u64, seed: u64) -> Result<Vec<u64>> {
    Ok(excursions(g, density, x, replicas, seed)?.iter().map(|e| e.steps).collect())
}

/// Expected visits to `x`, started at `x`, before the walk enters the
/// absorbing set. Solved exactly as `(I - Q) g = e_x` over the transient
/// states reachable from `x`.
pub fn exact_green_small(g: &GraphSpec, absorbing: impl Fn(VertexId) -> bool, x: VertexId) -> Result<f64> {
    let count = g.vertex_count();
    if count > EXACT_GREEN_LIMIT {
        return Err(Error::GraphTooLarge { count, limit: EXACT_GREEN_LIMIT });
    }
    if !g.contains(x) {
        return Err(Error::InvalidVertex { vertex: x.0, count });
    }
    if absorbing(x) {
        return Err(Error::StartAbsorbed(x.0));
    }
    let mut index = vec![usize::MAX; count as usize];
    let mut states = vec![x];
    index[x.0 as usize] = 0;
    let mut queue = VecDeque::from([x]);
    let mut reaches_absorbing = false;
    while let Some(v) = queue.pop_front() {
        for w in g.neighbors(v) {
            if absorbing(w) {
                reaches_absorbing = true;
            } else if index[w.0 as usize] == usize::MAX {
                index[w.0 as usize] = states.len();
                states.push(w);
                queue.push_back(w);
            }
        }
    }
    if !reaches_absorbing {
        return Err(Error::Singular(x.0));
    }
    let m = states.len();
    let p = 1.0 / g.uniform_degree() as f64;
    let mut a = DMatrix::<f64>::identity(m, m);
    for (i, &v) in states.iter().enumerate() {
        for w in g.neighbors(v) {
            let j = index[w.0 as usize];
            if j != usize::MAX {
                a[(i, j)] -= p;
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(m);
    rhs[0] = 1.0;
    let sol = a.lu().solve(&rhs).ok_or(Error::Singular(x.0))?;
    Ok(sol[0])
}

/// `G_L(start, y) = sum_{i < L} P(Y(i) = y)` for every vertex `y`, by
/// propagating the exact distribution `steps` times.
pub fn exact_occupation(g: &GraphSpec, start: VertexId, steps: u64) -> Result<Vec<f64>> {
    let count = g.vertex_count();
    if count > OCCUPATION_LIMIT {
        return Err(Error::GraphTooLarge { count, limit: OCCUPATION_LIMIT });
    }
    if !g.contains(start) {
        return Err(Error::InvalidVertex { vertex: start.0, count });
    }
    let n = count as usize;
    let mut dist = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut occupation = vec![0.0; n];
    dist[start.0 as usize] = 1.0;
    let degree = g.uniform_degree() as f64;
    for _ in 0..steps {
        for (o, d) in occupation.iter_mut().zip(&dist) {
            *o += d;
        }
        match *g {
            // Mass arriving at y is everything not already at y, spread evenly.
            GraphSpec::Complete { .. } => {
                let total: f64 = dist.iter().sum();
                for (nx, d) in next.iter_mut().zip(&dist) {
                    *nx = (total - d) / degree;
                }
            }
            GraphSpec::Hypercube { n: dim } => {
                for (y, nx) in next.iter_mut().enumerate() {
                    *nx = (0..dim).map(|k| dist[y ^ (1 << k)]).sum::<f64>() / degree;
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    Ok(occupation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u64) -> GraphSpec {
        GraphSpec::complete(n).unwrap()
    }

    #[test]
    fn green_complete_four_single_absorber() {
        // G = G(x,x), H = G(z,x) for either other transient z:
        // G = 1 + (2/3) H and H = G/3 + H/3, so H = G/2 and G = 3/2.
        let g = exact_green_small(&complete(4), |v| v == VertexId(3), VertexId(0)).unwrap();
        assert!((g - 1.5).abs() < 1e-12, "{g}");
    }

    #[test]
    fn green_trivial_cases() {
        let cube = GraphSpec::hypercube(4).unwrap();
        let g = exact_green_small(&cube, |v| v != VertexId(5), VertexId(5)).unwrap();
        assert!((g - 1.0).abs() < 1e-15);
        assert_eq!(exact_green_small(&cube, |v| v == VertexId(5), VertexId(5)), Err(Error::StartAbsorbed(5)));
        assert_eq!(exact_green_small(&cube, |_| false, VertexId(0)), Err(Error::Singular(0)));
        let big = GraphSpec::hypercube(13).unwrap();
        assert!(matches!(exact_green_small(&big, |_| true, VertexId(0)), Err(Error::GraphTooLarge { .. })));
    }

    #[test]
    fn green_matches_path_enumeration() {
        // Hypercube(3) with the antipode absorbing: push the distribution of
        // the killed walk forward until its mass is negligible.
        let g = GraphSpec::hypercube(3).unwrap();
        let x = VertexId(0);
        let target = VertexId(7);
        let exact = exact_green_small(&g, |v| v == target, x).unwrap();
        let mut dist = [0.0f64; 8];
        dist[0] = 1.0;
        let mut visits = 0.0;
        let mut depth = 0;
        while dist.iter().sum::<f64>() > 1e-13 {
            visits += dist[0];
            let mut next = [0.0; 8];
            for v in 0..8u64 {
                for w in g.neighbors(VertexId(v)) {
                    if w != target {
                        next[w.0 as usize] += dist[v as usize] / 3.0;
                    }
                }
            }
            dist = next;
            depth += 1;
        }
        assert!((exact - visits).abs() < 1e-6, "{exact} vs {visits} after {depth} steps");
        // By distance levels: h0 = 1 + h1, h1 = h0/3 + 2h2/3, h2 = 2h1/3.
        assert!((exact - 2.5).abs() < 1e-12, "{exact}");
    }

    #[test]
    fn occupation_sums_to_steps() {
        for g in [complete(4), complete(256), GraphSpec::hypercube(6).unwrap()] {
            let occ = exact_occupation(&g, VertexId(1), 37).unwrap();
            assert!((occ.iter().sum::<f64>() - 37.0).abs() < 1e-10);
            assert_eq!(occ[1], occ.iter().cloned().fold(0.0, f64::max));
        }
        let occ = exact_occupation(&complete(2), VertexId(0), 5).unwrap();
        assert_eq!(occ, vec![3.0, 2.0]);
    }

    #[test]
    fn cloud_density_and_redraw() {
        let c = PercolationCloud::new(0.25, [1, 2]).unwrap();
        let n = 100_000u64;
        let hits = (0..n).filter(|&v| c.contains(VertexId(v))).count() as f64 / n as f64;
        assert!((hits - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / n as f64).sqrt());
        let g = complete(4);
        for seed in 0..50 {
            let c = PercolationCloud::draw(&g, 0.05, [seed, 0], VertexId(0)).unwrap();
            assert!((1..4).any(|v| c.contains(VertexId(v))));
        }
        assert!(PercolationCloud::new(0.0, [0, 0]).is_err());
    }

    #[test]
    fn full_cloud_gives_single_visit() {
        let g = GraphSpec::hypercube(5).unwrap();
        let (mean, se) = estimate_green(&g, 1.0, VertexId(3), 100, 1).unwrap();
        assert_eq!((mean, se), (1.0, 0.0));
    }
}

//! Deterministic random instance generation.
//!
//! Euclidean instances place cities on an integer grid and round distances
//! up (rounding up preserves the triangle inequality); random-metric
//! instances draw a symmetric matrix and take its shortest-path closure.
//! Self-loop costs are clamped to twice the cheapest incident edge, so
//! every generated instance passes metric validation.

use crate::instance::Instance;
use crate::rational::{Int, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Euclidean,
    RandomMetric,
}

impl std::str::FromStr for MetricKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(MetricKind::Euclidean),
            "random-metric" => Ok(MetricKind::RandomMetric),
            other => Err(format!("unknown metric kind {other:?}")),
        }
    }
}

/// Integer ceiling of the Euclidean distance between grid points.
fn ceil_dist(a: (i64, i64), b: (i64, i64)) -> i64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    let sq = (dx * dx + dy * dy) as u64;
    let mut root = (sq as f64).sqrt() as u64;
    while root * root > sq {
        root -= 1;
    }
    while (root + 1) * (root + 1) <= sq {
        root += 1;
    }
    // root = floor(sqrt(sq)); round up unless exact.
    if root * root == sq {
        root as i64
    } else {
        root as i64 + 1
    }
}

/// Generates a metric instance with `n` cities and requests uniform in
/// `1..=r_max`. Path instances use `s = 0`, `t = n - 1`; closed instances
/// leave `t` unset. Deterministic in the seed.
pub fn generate(n: usize, r_max: u64, seed: u64, kind: MetricKind, path: bool) -> Instance {
    assert!(n >= 2, "instances need at least two cities");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cost = vec![vec![0i64; n]; n];
    match kind {
        MetricKind::Euclidean => {
            let pts: Vec<(i64, i64)> = (0..n)
                .map(|_| (rng.gen_range(0..=60), rng.gen_range(0..=60)))
                .collect();
            for u in 0..n {
                for v in (u + 1)..n {
                    let d = ceil_dist(pts[u], pts[v]);
                    cost[u][v] = d;
                    cost[v][u] = d;
                }
            }
        }
        MetricKind::RandomMetric => {
            for u in 0..n {
                for v in (u + 1)..n {
                    let d = rng.gen_range(1..=20);
                    cost[u][v] = d;
                    cost[v][u] = d;
                }
            }
            // Shortest-path closure enforces the triangle inequality.
            for k in 0..n {
                for u in 0..n {
                    for v in 0..n {
                        if u != v && u != k && v != k {
                            let via = cost[u][k] + cost[k][v];
                            if via < cost[u][v] {
                                cost[u][v] = via;
                            }
                        }
                    }
                }
            }
        }
    }
    for v in 0..n {
        let min_leave = (0..n)
            .filter(|&u| u != v)
            .map(|u| cost[u][v])
            .min()
            .unwrap();
        let sample = rng.gen_range(0..=2 * min_leave);
        cost[v][v] = sample.min(2 * min_leave);
    }
    let requests: Vec<Int> = (0..n)
        .map(|_| Int::from(rng.gen_range(1..=r_max)))
        .collect();
    let cost_rat: Vec<Vec<Rat>> = cost
        .into_iter()
        .map(|row| row.into_iter().map(|c| Rat::from_integer(Int::from(c))).collect())
        .collect();
    let t = if path { Some(n - 1) } else { None };
    Instance::new(cost_rat, requests, 0, t).expect("generated instance is structurally valid")
}

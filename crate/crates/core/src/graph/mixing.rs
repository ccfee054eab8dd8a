//! Sampled check of the edge-count deviation bound for expanders:
//! `|e(S) - θ²dn/2| <= (λ/2)·θ(1-θ)·n` with `θ = |S|/n`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub samples: usize,
    pub violations: usize,
    /// Spectral value used in the bound.
    pub lambda: f64,
    /// Largest observed `deviation / bound`; at most 1 when nothing fails.
    pub worst_ratio: f64,
}

/// The bound value the check uses: the measured `λ`, except on bipartite
/// graphs, where the excluded `-d` eigenvalue also drives the deviation and
/// only `d` is a valid bound.
pub fn mixing_lambda(g: &Graph) -> f64 {
    if g.is_bipartite() {
        g.degree() as f64
    } else {
        g.lambda()
    }
}

/// Samples `samples` sets, each of a uniform size in `1..n` and then
/// uniform among sets of that size, and counts bound violations for
/// spectral value `lambda`.
pub fn sample_mixing(g: &Graph, samples: usize, seed: u64, lambda: f64) -> Result<MixingReport> {
    let n = g.n();
    if n < 2 {
        return Err(Error::validation("need at least two nodes"));
    }
    let d = g.degree() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mask = vec![false; n];
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let size = rng.gen_range(1..n);
        mask.fill(false);
        for v in sample(&mut rng, n, size) {
            mask[v] = true;
        }
        let theta = size as f64 / n as f64;
        let deviation = (g.internal_edges_masked(&mask) as f64 - theta * theta * d * n as f64 / 2.0).abs();
        let bound = lambda / 2.0 * theta * (1.0 - theta) * n as f64;
        if deviation > bound {
            violations += 1;
        }
        if bound > 0.0 {
            worst = worst.max(deviation / bound);
        } else if deviation > 0.0 {
            worst = f64::INFINITY;
        }
    }
    Ok(MixingReport {
        samples,
        violations,
        lambda,
        worst_ratio: worst,
    })
}

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Graph, Origin};
use crate::error::{Error, Result};

/// Attempts at a complete simple pairing before giving up.
const MAX_ATTEMPTS: usize = 1000;
/// Reshuffles of the leftover stubs within one attempt.
const MAX_ROUNDS: usize = 10_000;

/// Seeded simple connected `d`-regular graph on `n` nodes.
///
/// Pairing model with local rejection: the open stubs are shuffled and paired
/// off, pairs that would create a loop or repeated edge go back to the pool,
/// and the attempt restarts only when no admissible pair remains. Whole
/// outcomes that are disconnected are rejected as well.
pub fn build_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::validation(format!("n·d = {} is odd", n * d)));
    }
    if d >= n {
        return Err(Error::validation(format!("degree {d} must be below n = {n}")));
    }
    if d < 3 {
        return Err(Error::validation(format!("degree {d} below 3")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let Some(edges) = try_pairing(n, d, &mut rng) else {
            continue;
        };
        let mut adjacency = vec![Vec::with_capacity(d); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        match Graph::from_adjacency(adjacency, Origin::Random { n, d, seed }) {
            Ok(g) => return Ok(g),
            Err(Error::Validation(msg)) if msg.contains("not connected") => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Construction(format!(
        "no simple connected {d}-regular graph on {n} nodes after {MAX_ATTEMPTS} attempts"
    )))
}

fn try_pairing(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut edges: HashSet<(usize, usize)> = HashSet::with_capacity(n * d / 2);
    let mut ordered = Vec::with_capacity(n * d / 2);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    for _ in 0..MAX_ROUNDS {
        if stubs.is_empty() {
            return Some(ordered);
        }
        // Leftover stub counts, ordered for determinism.
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && !edges.contains(&(a, b)) {
                edges.insert((a, b));
                ordered.push((a, b));
            } else {
                *leftover.entry(a).or_default() += 1;
                *leftover.entry(b).or_default() += 1;
            }
        }
        if !admissible_pair_exists(&leftover, &edges) {
            return None;
        }
        stubs = leftover
            .iter()
            .flat_map(|(&v, &c)| std::iter::repeat_n(v, c))
            .collect();
    }
    None
}

fn admissible_pair_exists(
    leftover: &BTreeMap<usize, usize>,
    edges: &HashSet<(usize, usize)>,
) -> bool {
    if leftover.is_empty() {
        return true;
    }
    let nodes: Vec<usize> = leftover.keys().copied().collect();
    nodes.iter().enumerate().any(|(k, &a)| {
        nodes[k + 1..]
            .iter()
            .any(|&b| !edges.contains(&(a.min(b), a.max(b))))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance_has_handshake_edge_count() {
        let g = build_random_regular(10, 3, 7).unwrap();
        assert_eq!(g.edge_count(), 15);
        assert!((0..10).all(|i| g.neighbors(i).len() == 3));
    }

    #[test]
    fn odd_degree_sum_rejected() {
        for seed in [0, 1, 99] {
            assert!(matches!(
                build_random_regular(9, 3, seed),
                Err(Error::Validation(_))
            ));
        }
        assert!(build_random_regular(4, 4, 0).is_err());
        assert!(build_random_regular(10, 2, 0).is_err());
    }

    #[test]
    fn seed_determines_graph() {
        let a = build_random_regular(64, 6, 11).unwrap();
        let b = build_random_regular(64, 6, 11).unwrap();
        let c = build_random_regular(64, 6, 12).unwrap();
        assert_eq!(a.adjacency(), b.adjacency());
        assert_ne!(a.adjacency(), c.adjacency());
    }

    #[test]
    fn dense_regime_still_constructs() {
        let g = build_random_regular(40, 30, 3).unwrap();
        assert_eq!(g.degree(), 30);
    }
}

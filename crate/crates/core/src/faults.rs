//! Fault sets and the closure they induce.
//!
//! For a fault set `T` the closure `Z(T)` is the least superset of `T` such
//! that no node outside it has `ceil(beta0·d)` or more neighbours inside it.
//! Its complement `P` holds the "not poor" correct nodes where broadcast
//! guarantees are claimed. A node outside `Z` contributes nothing to its own
//! count, so whether the node counts itself as a neighbour is irrelevant.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::params::threshold;

fn check_beta0(beta0: f64) -> Result<()> {
    if beta0 > 0.0 && beta0 < 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("beta0 = {beta0} outside (0, 1)")))
    }
}

/// Closure `Z(T, beta0)`, ascending.
pub fn compute_z(g: &Graph, t: &[usize], beta0: f64) -> Result<Vec<usize>> {
    check_beta0(beta0)?;
    let mask = g.mask(t)?;
    let mut closure = Closure::new(g, threshold(beta0, g.degree()));
    for (v, &m) in mask.iter().enumerate() {
        if m {
            closure.add(v, None);
        }
    }
    Ok(closure.members())
}

/// Partition of the nodes into the closure `Z` and its complement `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultPartition {
    #[serde(rename = "T")]
    pub t: Vec<usize>,
    #[serde(rename = "Z")]
    pub z: Vec<usize>,
    #[serde(rename = "P")]
    pub p: Vec<usize>,
    /// `|Z ∪ T| / |T|`; 1.0 with `mu_undefined` set when `T` is empty.
    pub mu_achieved: f64,
    pub mu_undefined: bool,
    pub beta0: f64,
}

impl FaultPartition {
    pub fn n(&self) -> usize {
        self.z.len() + self.p.len()
    }

    pub fn faulty_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n()];
        for &v in &self.t {
            m[v] = true;
        }
        m
    }

    pub fn npc_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n()];
        for &v in &self.p {
            m[v] = true;
        }
        m
    }

    /// Correct nodes inside the closure.
    pub fn poor_count(&self) -> usize {
        self.z.len() - self.t.len()
    }
}

pub fn compute_p(g: &Graph, t: &[usize], beta0: f64) -> Result<FaultPartition> {
    let z = compute_z(g, t, beta0)?;
    let mut t = t.to_vec();
    t.sort_unstable();
    t.dedup();
    let mut in_z = vec![false; g.n()];
    for &v in &z {
        in_z[v] = true;
    }
    let p = (0..g.n()).filter(|&v| !in_z[v]).collect();
    let (mu_achieved, mu_undefined) = if t.is_empty() {
        (1.0, true)
    } else {
        (z.len() as f64 / t.len() as f64, false)
    };
    Ok(FaultPartition {
        t,
        z,
        p,
        mu_achieved,
        mu_undefined,
        beta0,
    })
}

/// Incremental closure with an optional undo log.
struct Closure<'g> {
    g: &'g Graph,
    threshold: u32,
    in_z: Vec<bool>,
    count: Vec<u32>,
    size: usize,
    /// `sum of count²` over nodes outside the closure: how close the
    /// remaining nodes are to being pulled in.
    pressure: u64,
    stack: Vec<usize>,
}

enum Change {
    Joined(usize),
    Counted(usize),
}

impl<'g> Closure<'g> {
    fn new(g: &'g Graph, threshold: usize) -> Self {
        Closure {
            g,
            threshold: threshold as u32,
            in_z: vec![false; g.n()],
            count: vec![0; g.n()],
            size: 0,
            pressure: 0,
            stack: Vec::new(),
        }
    }

    fn join(&mut self, v: usize, log: &mut Option<&mut Vec<Change>>) {
        self.in_z[v] = true;
        self.size += 1;
        let c = self.count[v] as u64;
        self.pressure -= c * c;
        self.stack.push(v);
        if let Some(log) = log {
            log.push(Change::Joined(v));
        }
    }

    fn add(&mut self, v: usize, mut log: Option<&mut Vec<Change>>) {
        if self.in_z[v] {
            return;
        }
        self.join(v, &mut log);
        while let Some(w) = self.stack.pop() {
            for &x in self.g.neighbors(w) {
                let c = self.count[x];
                self.count[x] = c + 1;
                if let Some(log) = log.as_deref_mut() {
                    log.push(Change::Counted(x));
                }
                if !self.in_z[x] {
                    self.pressure += 2 * c as u64 + 1;
                    if c + 1 >= self.threshold {
                        self.join(x, &mut log);
                    }
                }
            }
        }
    }

    fn undo(&mut self, log: Vec<Change>) {
        for change in log.into_iter().rev() {
            match change {
                Change::Counted(x) => {
                    self.count[x] -= 1;
                    if !self.in_z[x] {
                        let c = self.count[x] as u64;
                        self.pressure -= 2 * c + 1;
                    }
                }
                Change::Joined(v) => {
                    self.in_z[v] = false;
                    self.size -= 1;
                    let c = self.count[v] as u64;
                    self.pressure += c * c;
                }
            }
        }
    }

    fn members(&self) -> Vec<usize> {
        (0..self.in_z.len()).filter(|&v| self.in_z[v]).collect()
    }
}

/// How the adversary chooses its fault set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[derive(Default)]
pub enum FaultStrategy {
    /// Uniform without replacement.
    Random,
    /// The first `f` nodes in BFS order from `center` (seeded when absent).
    Ball {
        #[serde(default)]
        center: Option<usize>,
    },
    /// Repeatedly adds the node that maximises the closure size; ties go to
    /// the larger closure pressure, then to a seeded node order.
    #[default]
    GreedyClosure,
    /// The `f` nodes nearest to `anchor` in BFS order; the anchor itself is
    /// included only when `include_anchor` is set. The experiment runner
    /// fills in the General for a missing anchor.
    AroundInitiation {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor: Option<usize>,
        #[serde(default)]
        include_anchor: bool,
    },
    /// A fixed list.
    Explicit { nodes: Vec<usize> },
}


impl FaultStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            FaultStrategy::Random => "random",
            FaultStrategy::Ball { .. } => "ball",
            FaultStrategy::GreedyClosure => "greedy-closure",
            FaultStrategy::AroundInitiation { .. } => "around-initiation",
            FaultStrategy::Explicit { .. } => "explicit",
        }
    }
}

/// Chooses `f` faulty nodes. `beta0` is used only by the greedy strategy.
/// Returns the set ascending.
pub fn place_faults(
    g: &Graph,
    strategy: &FaultStrategy,
    f: usize,
    seed: u64,
    beta0: f64,
) -> Result<Vec<usize>> {
    let n = g.n();
    if f > n {
        return Err(Error::validation(format!("f = {f} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = match strategy {
        FaultStrategy::Random => rand::seq::index::sample(&mut rng, n, f).into_vec(),
        FaultStrategy::Ball { center } => {
            let c = match center {
                Some(c) => {
                    g.check_node(*c)?;
                    *c
                }
                None => rng.gen_range(0..n),
            };
            g.bfs_order(&[c], None).into_iter().take(f).collect()
        }
        FaultStrategy::GreedyClosure => greedy_closure(g, f, beta0, &mut rng)?,
        FaultStrategy::AroundInitiation {
            anchor,
            include_anchor,
        } => {
            let anchor = anchor.ok_or_else(|| Error::validation("around-initiation needs an anchor"))?;
            g.check_node(anchor)?;
            g.bfs_order(&[anchor], None)
                .into_iter()
                .filter(|&v| *include_anchor || v != anchor)
                .take(f)
                .collect()
        }
        FaultStrategy::Explicit { nodes } => {
            g.mask(nodes)?;
            let mut t = nodes.clone();
            t.sort_unstable();
            t.dedup();
            if t.len() != f {
                return Err(Error::validation(format!(
                    "explicit fault list has {} distinct nodes, expected f = {f}",
                    t.len()
                )));
            }
            t
        }
    };
    t.sort_unstable();
    Ok(t)
}

fn greedy_closure(g: &Graph, f: usize, beta0: f64, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    check_beta0(beta0)?;
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(rng);
    let mut closure = Closure::new(g, threshold(beta0, g.degree()));
    let mut chosen = vec![false; g.n()];
    let mut t = Vec::with_capacity(f);
    let mut log = Vec::new();
    for _ in 0..f {
        let mut best: Option<(usize, u64, usize)> = None;
        for &v in &order {
            if chosen[v] {
                continue;
            }
            // Nodes already absorbed add nothing to the closure.
            let score = if closure.in_z[v] {
                (closure.size, closure.pressure)
            } else {
                log.clear();
                closure.add(v, Some(&mut log));
                let s = (closure.size, closure.pressure);
                closure.undo(std::mem::take(&mut log));
                s
            };
            if best.is_none_or(|(size, pressure, _)| score > (size, pressure)) {
                best = Some((score.0, score.1, v));
            }
        }
        let (_, _, v) = best.expect("f <= n leaves a candidate");
        chosen[v] = true;
        closure.add(v, None);
        t.push(v);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_random_regular;
    use proptest::prelude::*;
    use rand::Rng;

    /// Fixpoint by full rescans, independent of the worklist.
    fn naive_closure(g: &Graph, t: &[usize], beta0: f64) -> Vec<usize> {
        let th = (beta0 * g.degree() as f64 - 1e-9).ceil() as usize;
        let mut in_z = vec![false; g.n()];
        for &v in t {
            in_z[v] = true;
        }
        loop {
            let grow: Vec<usize> = (0..g.n())
                .filter(|&i| !in_z[i] && g.neighbors(i).iter().filter(|&&j| in_z[j]).count() >= th)
                .collect();
            if grow.is_empty() {
                break;
            }
            for i in grow {
                in_z[i] = true;
            }
        }
        (0..g.n()).filter(|&i| in_z[i]).collect()
    }

    #[test]
    fn complete_graph_examples() {
        let k4 = Graph::complete(4).unwrap();
        assert!(compute_z(&k4, &[], 0.4).unwrap().is_empty());
        assert_eq!(compute_z(&k4, &[0], 0.4).unwrap(), vec![0]);
        assert_eq!(compute_z(&k4, &[0], 0.3).unwrap(), vec![0, 1, 2, 3]);

        let part = compute_p(&k4, &[], 0.4).unwrap();
        assert_eq!(part.p, vec![0, 1, 2, 3]);
        assert!(part.mu_undefined);
        let part = compute_p(&k4, &[0], 0.4).unwrap();
        assert_eq!(part.p, vec![1, 2, 3]);
        assert_eq!(part.mu_achieved, 1.0);
        let part = compute_p(&k4, &[0], 0.3).unwrap();
        assert!(part.p.is_empty());
        assert_eq!(part.mu_achieved, 4.0);
    }

    #[test]
    fn ball_on_cycle() {
        let c6 = Graph::cycle(6).unwrap();
        let t = place_faults(&c6, &FaultStrategy::Ball { center: Some(0) }, 3, 0, 0.5).unwrap();
        assert_eq!(t, vec![0, 1, 5]);
    }

    #[test]
    fn placement_sizes_and_errors() {
        let g = Graph::petersen();
        for s in [
            FaultStrategy::Random,
            FaultStrategy::Ball { center: None },
            FaultStrategy::GreedyClosure,
            FaultStrategy::AroundInitiation { anchor: Some(3), include_anchor: false },
        ] {
            assert!(place_faults(&g, &s, 0, 1, 0.5).unwrap().is_empty());
            let t = place_faults(&g, &s, 4, 1, 0.5).unwrap();
            assert_eq!(t.len(), 4, "{s:?}");
            assert!(place_faults(&g, &s, 11, 1, 0.5).is_err());
        }
        let t = place_faults(
            &g,
            &FaultStrategy::AroundInitiation { anchor: Some(0), include_anchor: false },
            3,
            0,
            0.5,
        )
        .unwrap();
        assert_eq!(t, vec![1, 4, 5]);
        let explicit = FaultStrategy::Explicit { nodes: vec![2, 7] };
        assert_eq!(place_faults(&g, &explicit, 2, 0, 0.5).unwrap(), vec![2, 7]);
        assert!(place_faults(&g, &explicit, 3, 0, 0.5).is_err());
    }

    #[test]
    fn undo_restores_state() {
        let g = build_random_regular(60, 4, 2).unwrap();
        let mut c = Closure::new(&g, 2);
        c.add(0, None);
        c.add(1, None);
        let before = (c.in_z.clone(), c.count.clone(), c.size, c.pressure);
        let mut log = Vec::new();
        c.add(7, Some(&mut log));
        c.undo(log);
        assert_eq!(before, (c.in_z.clone(), c.count.clone(), c.size, c.pressure));
    }

    #[test]
    fn greedy_beats_random_on_expander() {
        let g = build_random_regular(256, 8, 4).unwrap();
        let mut wins = 0;
        for seed in 0..20 {
            let greedy = place_faults(&g, &FaultStrategy::GreedyClosure, 12, seed, 0.25).unwrap();
            let random = place_faults(&g, &FaultStrategy::Random, 12, seed, 0.25).unwrap();
            let zg = compute_z(&g, &greedy, 0.25).unwrap().len();
            let zr = compute_z(&g, &random, 0.25).unwrap().len();
            wins += (zg >= zr) as usize;
        }
        assert_eq!(wins, 20);
    }

    #[test]
    fn worklist_matches_rescans_on_small_graphs() {
        for seed in 0..30 {
            let g = build_random_regular(20, [3, 4, 6][seed as usize % 3], seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for beta0 in [0.2, 0.4, 0.6] {
                let k = rng.gen_range(0..8);
                let t = rand::seq::index::sample(&mut rng, g.n(), k).into_vec();
                assert_eq!(compute_z(&g, &t, beta0).unwrap(), naive_closure(&g, &t, beta0));
            }
        }
    }

    fn small_instance() -> impl Strategy<Value = (u64, Vec<usize>, Vec<usize>, f64, f64)> {
        (
            0u64..1000,
            proptest::collection::vec(0usize..40, 0..8),
            proptest::collection::vec(0usize..40, 0..6),
            0.05f64..0.95,
            0.05f64..0.95,
        )
            .prop_map(|(seed, t, extra, a, b)| (seed, t, extra, a.min(b), a.max(b)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closure_invariants((seed, t, extra, lo, hi) in small_instance()) {
            let g = build_random_regular(40, 6, seed).unwrap();
            let part = compute_p(&g, &t, lo).unwrap();
            let in_z = {
                let mut m = vec![false; 40];
                for &v in &part.z { m[v] = true; }
                m
            };
            let th = threshold(lo, 6);
            // T ⊆ Z, P = V \ Z, closed
            prop_assert!(t.iter().all(|&v| in_z[v]));
            prop_assert_eq!(part.p.len() + part.z.len(), 40);
            prop_assert!(part.p.iter().all(|&v| !in_z[v]));
            for &i in &part.p {
                prop_assert!(g.neighbors(i).iter().filter(|&&j| in_z[j]).count() < th);
            }
            // minimality: dropping any node of Z \ T and re-closing
            // from the remainder never yields a smaller closed set
            let mut tt = t.clone();
            tt.sort_unstable();
            tt.dedup();
            for &v in part.z.iter().filter(|v| tt.binary_search(v).is_err()) {
                let rest: Vec<usize> = part.z.iter().copied().filter(|&w| w != v).collect();
                let mut rest_mask = [false; 40];
                for &w in &rest { rest_mask[w] = true; }
                let closed = (0..40).all(|i| rest_mask[i]
                    || g.neighbors(i).iter().filter(|&&j| rest_mask[j]).count() < th);
                prop_assert!(!closed, "removing {v} leaves a closed superset of T");
            }
            // monotone in T and in beta0
            let mut bigger = t.clone();
            bigger.extend(extra);
            let zb = compute_z(&g, &bigger, lo).unwrap();
            prop_assert!(part.z.iter().all(|v| zb.binary_search(v).is_ok()));
            let zh = compute_z(&g, &t, hi).unwrap();
            prop_assert!(zh.iter().all(|v| part.z.binary_search(v).is_ok()));
        }
    }
}

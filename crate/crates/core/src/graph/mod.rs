//! Bounded-degree network topologies.
//!
//! A [`Graph`] is an immutable, simple, connected, `d`-regular undirected
//! graph. Adjacency lists exclude the node itself; call sites that need the
//! closed neighbourhood (node plus neighbours) add the node explicitly.
//!
//! Constructions:
//! - [`build_lps_graph`]: explicit Lubotzky–Phillips–Sarnak Ramanujan graphs.
//! - [`build_random_regular`]: seeded random regular graphs (pairing model).
//! - [`Graph::complete`], [`Graph::cycle`], [`Graph::petersen`]: small graphs
//!   with closed-form spectra, used as anchors.
//! - [`read_adjacency`]: the plain-text adjacency format in [`io`].

mod io;
mod lps;
mod mixing;
mod random;
mod spectral;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_adjacency, write_adjacency};
pub use lps::{build_lps_graph, is_prime, legendre_symbol};
pub use mixing::{mixing_lambda, sample_mixing, MixingReport};
pub use random::build_random_regular;
pub use spectral::{spectral_bound, spectral_estimate, SpectralEstimate, DEFAULT_SPECTRAL_TOL};

/// How a graph was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Origin {
    Lps { p: u64, q: u64 },
    Random { n: usize, d: usize, seed: u64 },
    File { path: String },
    Complete { n: usize },
    Cycle { n: usize },
    Petersen,
    Explicit,
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    d: usize,
    adjacency: Vec<Vec<usize>>,
    lambda: f64,
    bipartite: bool,
    origin: Origin,
}

impl Graph {
    /// Validates `adjacency` as a simple connected regular graph and measures
    /// its spectral bound.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>, origin: Origin) -> Result<Self> {
        let mut g = Self::validated(adjacency, origin)?;
        g.lambda = spectral::measure(&g, DEFAULT_SPECTRAL_TOL)?.lambda;
        Ok(g)
    }

    /// Like [`Graph::from_adjacency`] but records a previously measured
    /// `lambda` instead of re-measuring it.
    pub fn with_known_lambda(
        adjacency: Vec<Vec<usize>>,
        origin: Origin,
        lambda: f64,
    ) -> Result<Self> {
        let mut g = Self::validated(adjacency, origin)?;
        if !(lambda.is_finite() && (0.0..=g.d as f64 + 1e-9).contains(&lambda)) {
            return Err(Error::validation(format!(
                "lambda {lambda} outside [0, d={}]",
                g.d
            )));
        }
        g.lambda = lambda;
        Ok(g)
    }

    fn validated(mut adjacency: Vec<Vec<usize>>, origin: Origin) -> Result<Self> {
        let n = adjacency.len();
        if n < 2 {
            return Err(Error::validation("graph needs at least two nodes"));
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        let d = adjacency[0].len();
        if d == 0 {
            return Err(Error::validation("graph has no edges"));
        }
        for (i, list) in adjacency.iter().enumerate() {
            if list.len() != d {
                return Err(Error::validation(format!(
                    "node {i} has degree {}, expected {d}",
                    list.len()
                )));
            }
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::validation(format!("node {i} has a repeated edge")));
            }
            for &j in list {
                if j >= n {
                    return Err(Error::validation(format!(
                        "node {i} lists neighbour {j} outside 0..{n}"
                    )));
                }
                if j == i {
                    return Err(Error::validation(format!("node {i} has a self-loop")));
                }
                if adjacency[j].binary_search(&i).is_err() {
                    return Err(Error::validation(format!(
                        "edge {i}-{j} is not symmetric"
                    )));
                }
            }
        }
        let mut g = Graph {
            n,
            d,
            adjacency,
            lambda: f64::NAN,
            bipartite: false,
            origin,
        };
        if g.bfs_order(&[0], None).len() != n {
            return Err(Error::validation("graph is not connected"));
        }
        g.bipartite = g.two_coloring().is_some();
        Ok(g)
    }

    /// The complete graph `K_n`.
    pub fn complete(n: usize) -> Result<Self> {
        let adj = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        Self::from_adjacency(adj, Origin::Complete { n })
    }

    /// The cycle `C_n`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::validation("a cycle needs at least three nodes"));
        }
        let adj = (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect();
        Self::from_adjacency(adj, Origin::Cycle { n })
    }

    /// The Petersen graph: outer cycle 0..5, inner pentagram 5..10, spokes
    /// `i - i+5`.
    pub fn petersen() -> Self {
        let mut adj = vec![Vec::new(); 10];
        let mut link = |a: usize, b: usize| {
            adj[a].push(b);
            adj[b].push(a);
        };
        for i in 0..5 {
            link(i, (i + 1) % 5);
            link(i, i + 5);
            link(5 + i, 5 + (i + 2) % 5);
        }
        Self::from_adjacency(adj, Origin::Petersen).expect("petersen graph is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Neighbours of `i`, ascending, without `i` itself.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    /// Largest absolute non-trivial adjacency eigenvalue.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartite
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn edge_count(&self) -> usize {
        self.n * self.d / 2
    }

    /// `2·sqrt(d-1)`.
    pub fn ramanujan_bound(&self) -> f64 {
        2.0 * ((self.d - 1) as f64).sqrt()
    }

    pub fn is_ramanujan(&self, tol: f64) -> bool {
        self.lambda <= self.ramanujan_bound() + tol
    }

    pub fn check_node(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "node {i} outside 0..{}",
                self.n
            )))
        }
    }

    /// Membership mask for `nodes`; rejects out-of-range ids.
    pub fn mask(&self, nodes: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.n];
        for &i in nodes {
            self.check_node(i)?;
            mask[i] = true;
        }
        Ok(mask)
    }

    /// Number of undirected edges with both endpoints in `set`.
    pub fn internal_edges(&self, set: &[usize]) -> Result<usize> {
        let mask = self.mask(set)?;
        Ok(self.internal_edges_masked(&mask))
    }

    pub(crate) fn internal_edges_masked(&self, mask: &[bool]) -> usize {
        let mut twice = 0;
        for (i, list) in self.adjacency.iter().enumerate() {
            if mask[i] {
                twice += list.iter().filter(|&&j| mask[j]).count();
            }
        }
        twice / 2
    }

    /// Ball of radius `radius` around `i`, including `i`, ascending.
    pub fn neighborhood(&self, i: usize, radius: usize) -> Result<Vec<usize>> {
        self.check_node(i)?;
        let mut ball = self.bfs_order(&[i], Some(radius));
        ball.sort_unstable();
        Ok(ball)
    }

    /// Breadth-first visiting order from `sources` (in the given order),
    /// expanding neighbours in ascending id order, optionally truncated at
    /// `radius` hops.
    pub fn bfs_order(&self, sources: &[usize], radius: Option<usize>) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == usize::MAX {
                dist[s] = 0;
                order.push(s);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            if radius.is_some_and(|r| dist[v] >= r) {
                continue;
            }
            for &w in &self.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    order.push(w);
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// A proper 2-colouring as `±1` signs, if the graph is bipartite.
    pub fn two_coloring(&self) -> Option<Vec<i8>> {
        let mut color = vec![0i8; self.n];
        color[0] = 1;
        for v in self.bfs_order(&[0], None) {
            for &w in &self.adjacency[v] {
                if color[w] == 0 {
                    color[w] = -color[v];
                } else if color[w] == color[v] {
                    return None;
                }
            }
        }
        Some(color)
    }

    /// Longest shortest-path distance. Runs one BFS per node.
    pub fn diameter(&self) -> usize {
        (0..self.n)
            .map(|s| {
                let mut dist = vec![usize::MAX; self.n];
                dist[s] = 0;
                let mut queue = VecDeque::from([s]);
                let mut far = 0;
                while let Some(v) = queue.pop_front() {
                    far = far.max(dist[v]);
                    for &w in &self.adjacency[v] {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[v] + 1;
                            queue.push_back(w);
                        }
                    }
                }
                far
            })
            .max()
            .unwrap_or(0)
    }
}

//! Plain-text adjacency format.
//!
//! ```text
//! <n> <d> <bipartite|nonbipartite> <lambda>
//! 0: 3 7 12
//! 1: ...
//! ```
//!
//! One line per node in id order; neighbours ascending. `lambda` is written
//! with full round-trip precision.

use std::fmt::Write as _;

use super::{Graph, Origin};
use crate::error::{Error, Result};

pub fn write_adjacency(g: &Graph) -> String {
    let mut out = String::with_capacity(g.n() * (g.degree() * 7 + 8));
    let kind = if g.is_bipartite() { "bipartite" } else { "nonbipartite" };
    writeln!(out, "{} {} {} {:?}", g.n(), g.degree(), kind, g.lambda()).unwrap();
    for i in 0..g.n() {
        write!(out, "{i}:").unwrap();
        for j in g.neighbors(i) {
            write!(out, " {j}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_adjacency(text: &str, origin: Origin) -> Result<Graph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty adjacency file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [n, d, kind, lambda] = fields[..] else {
        return Err(Error::Parse(format!("bad header line {header:?}")));
    };
    let n: usize = n.parse().map_err(|_| Error::Parse(format!("bad node count {n:?}")))?;
    let d: usize = d.parse().map_err(|_| Error::Parse(format!("bad degree {d:?}")))?;
    let bipartite = match kind {
        "bipartite" => true,
        "nonbipartite" => false,
        other => return Err(Error::Parse(format!("bad bipartite flag {other:?}"))),
    };
    let lambda: f64 = lambda
        .parse()
        .map_err(|_| Error::Parse(format!("bad lambda {lambda:?}")))?;

    let mut adjacency = vec![None; n];
    for line in lines {
        let (id, rest) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in {line:?}")))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad node id in {line:?}")))?;
        if id >= n {
            return Err(Error::Parse(format!("node id {id} outside 0..{n}")));
        }
        let neighbours = rest
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad neighbour {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if adjacency[id].replace(neighbours).is_some() {
            return Err(Error::Parse(format!("node {id} listed twice")));
        }
    }
    let adjacency = adjacency
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.ok_or_else(|| Error::Parse(format!("node {i} missing"))))
        .collect::<Result<Vec<_>>>()?;
    let g = Graph::with_known_lambda(adjacency, origin, lambda)?;
    if g.degree() != d {
        return Err(Error::validation(format!(
            "header degree {d} but lists have degree {}",
            g.degree()
        )));
    }
    if g.is_bipartite() != bipartite {
        return Err(Error::validation("header bipartite flag disagrees with the graph"));
    }
    Ok(g)
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-round signals of one execution, indexed `[round][node]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub correct: Vec<bool>,
    pub u: Vec<Vec<bool>>,
    pub x: Vec<Vec<bool>>,
    pub y: Vec<Vec<bool>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    round: usize,
    node: usize,
    u: u8,
    x: u8,
    y: u8,
    correct: u8,
}

impl Trace {
    pub fn n(&self) -> usize {
        self.correct.len()
    }

    /// Last round index.
    pub fn k_max(&self) -> usize {
        self.x.len().saturating_sub(1)
    }

    /// First round in which `y_i` is set.
    pub fn trigger_round(&self, i: usize) -> Option<usize> {
        self.y.iter().position(|row| row[i])
    }

    /// First round in which `x_i` is set.
    pub fn excitation_round(&self, i: usize) -> Option<usize> {
        self.x.iter().position(|row| row[i])
    }

    /// Number of `nodes` excited in round `k`.
    pub fn excited_among(&self, k: usize, nodes: &[usize]) -> usize {
        nodes.iter().filter(|&&i| self.x[k][i]).count()
    }

    /// CSV with header `round,node,u,x,y,correct`, one row per round and node.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::with_capacity(self.x.len() * self.n() * 16));
        for k in 0..self.x.len() {
            for i in 0..self.n() {
                w.serialize(Row {
                    round: k,
                    node: i,
                    u: self.u[k][i] as u8,
                    x: self.x[k][i] as u8,
                    y: self.y[k][i] as u8,
                    correct: self.correct[i] as u8,
                })
                .map_err(csv_error)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Execution(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }

    pub fn from_csv(text: &str) -> Result<Trace> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(csv_error)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["round", "node", "u", "x", "y", "correct"] {
            return Err(Error::Parse(format!("unexpected trace header {headers:?}")));
        }
        let rows = r
            .deserialize::<Row>()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(csv_error)?;
        let n = rows.iter().map(|r| r.node + 1).max().unwrap_or(0);
        let rounds = rows.iter().map(|r| r.round + 1).max().unwrap_or(0);
        if rows.len() != n * rounds {
            return Err(Error::Parse(format!(
                "{} rows do not cover {rounds} rounds of {n} nodes",
                rows.len()
            )));
        }
        let mut t = Trace {
            correct: vec![false; n],
            u: vec![vec![false; n]; rounds],
            x: vec![vec![false; n]; rounds],
            y: vec![vec![false; n]; rounds],
        };
        let mut seen = vec![false; n * rounds];
        let bit = |v: u8| match v {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::Parse(format!("signal value {other} is not 0 or 1"))),
        };
        for row in rows {
            let slot = row.round * n + row.node;
            if std::mem::replace(&mut seen[slot], true) {
                return Err(Error::Parse(format!(
                    "duplicate row for round {} node {}",
                    row.round, row.node
                )));
            }
            t.u[row.round][row.node] = bit(row.u)?;
            t.x[row.round][row.node] = bit(row.x)?;
            t.y[row.round][row.node] = bit(row.y)?;
            let c = bit(row.correct)?;
            if row.round > 0 && c != t.correct[row.node] {
                return Err(Error::Parse(format!("node {} changes correctness", row.node)));
            }
            t.correct[row.node] = c;
        }
        Ok(t)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Rounds at which excitation over `witness` fails to grow by at least one
/// node per round, checked from the first round any witness node triggers
/// until the witness set is fully excited.
pub fn growth_check(trace: &Trace, witness: &[usize]) -> Vec<usize> {
    let Some(start) = (0..trace.y.len()).find(|&k| witness.iter().any(|&i| trace.y[k][i])) else {
        return Vec::new();
    };
    let total = witness.len();
    let mut stalled = Vec::new();
    for k in start..trace.k_max() {
        let now = trace.excited_among(k, witness);
        if now == total {
            break;
        }
        if trace.excited_among(k + 1, witness) < (now + 1).min(total) {
            stalled.push(k);
        }
    }
    stalled
}

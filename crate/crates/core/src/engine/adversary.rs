//! What faulty nodes show to each observer.
//!
//! A faulty node may show a different bit to every observer in every round.
//! Scripts give that bit directly as a function of `(faulty, observer,
//! round)`; the per-round deviation from the honest value is implicit.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed::hash_words;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScriptKind {
    /// Always 0.
    Silent,
    /// Always 1.
    Blast,
    /// 1 to the lower half of the faulty node's neighbour list, 0 to the rest.
    SplitHalf,
    /// A seeded pseudo-random bit per observer and round.
    Flicker,
    /// Whatever a correct node in the same position would show.
    Honest,
    /// Explicit table with an optional fallback bit.
    CustomTable,
}

impl ScriptKind {
    pub const EQUIVOCATING: [ScriptKind; 4] = [
        ScriptKind::Silent,
        ScriptKind::Blast,
        ScriptKind::SplitHalf,
        ScriptKind::Flicker,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScriptKind::Silent => "silent",
            ScriptKind::Blast => "blast",
            ScriptKind::SplitHalf => "split-half",
            ScriptKind::Flicker => "flicker",
            ScriptKind::Honest => "honest",
            ScriptKind::CustomTable => "custom-table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub faulty: usize,
    pub observer: usize,
    pub round: usize,
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryScript {
    pub strategy: ScriptKind,
    /// Seed for `flicker`; defaults to the run seed when resolved by the
    /// experiment runner.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<TableEntry>,
    /// Bit for `(faulty, observer, round)` triples missing from the table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_bit: Option<u8>,
}

impl AdversaryScript {
    pub fn new(strategy: ScriptKind) -> Self {
        AdversaryScript {
            strategy,
            seed: None,
            table: Vec::new(),
            default_bit: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// A script prepared for lookups.
pub(crate) struct Adversary<'g> {
    g: &'g Graph,
    kind: ScriptKind,
    seed: u64,
    table: HashMap<(usize, usize, usize), bool>,
    default_bit: Option<bool>,
}

impl<'g> Adversary<'g> {
    pub(crate) fn new(g: &'g Graph, script: &AdversaryScript) -> Result<Self> {
        let mut table = HashMap::with_capacity(script.table.len());
        for e in &script.table {
            if e.bit > 1 {
                return Err(Error::validation(format!("table bit {} is not 0 or 1", e.bit)));
            }
            g.check_node(e.faulty)?;
            g.check_node(e.observer)?;
            table.insert((e.faulty, e.observer, e.round), e.bit == 1);
        }
        let default_bit = match script.default_bit {
            None => None,
            Some(b @ (0 | 1)) => Some(b == 1),
            Some(b) => return Err(Error::validation(format!("default bit {b} is not 0 or 1"))),
        };
        Ok(Adversary {
            g,
            kind: script.strategy,
            seed: script.seed.unwrap_or(0),
            table,
            default_bit,
        })
    }

    /// Bit that faulty node `j` shows observer `i` for round `k`; `honest` is
    /// the state a correct node would have.
    pub(crate) fn observe(&self, j: usize, i: usize, k: usize, honest: bool) -> Result<bool> {
        Ok(match self.kind {
            ScriptKind::Silent => false,
            ScriptKind::Blast => true,
            ScriptKind::SplitHalf => {
                // Rank of the observer among j's neighbours; observers that are
                // not neighbours take the rank they would have if inserted.
                let list = self.g.neighbors(j);
                let rank = list.partition_point(|&v| v < i);
                rank < list.len().div_ceil(2)
            }
            ScriptKind::Flicker => {
                hash_words(&[self.seed, j as u64, i as u64, k as u64]) & 1 == 1
            }
            ScriptKind::Honest => honest,
            ScriptKind::CustomTable => match self.table.get(&(j, i, k)) {
                Some(&b) => b,
                None => self.default_bit.ok_or_else(|| {
                    Error::Execution(format!(
                        "script has no entry for faulty {j}, observer {i}, round {k}"
                    ))
                })?,
            },
        })
    }
}

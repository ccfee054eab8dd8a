//! Propagation complemented by an idealised localized channel.
//!
//! The channel lets each node exchange values with up to `s` nodes of its
//! radius-`c` ball (its reach set, which contains the node itself). It is
//! modelled as an ideal functionality: the General's value reaches the
//! correct members of its reach set after `latency` rounds, and each node
//! can read the excitation state of its reach set with the same delay. Its
//! physical cost is only accounted for, as extra degree per node.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{InitiationSpec, TriggerRule};
use crate::error::{Error, Result};
use crate::faults::FaultPartition;
use crate::graph::Graph;

/// Delivery strength of the channel towards correct reach-set members.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Guarantee {
    /// Every `P` member of the General's reach set receives the value.
    #[default]
    NpcComplete,
    /// Only this fraction of the `P` members other than the General does,
    /// chosen by seed.
    Lossy(f64),
}

/// Inputs a faulty General hands to the channel.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaultyBits {
    /// 1 to the lower half (by id) of the receivers, 0 to the rest.
    #[default]
    SplitHalf,
    All,
    Nothing,
    /// A seeded fair coin per receiver.
    Random,
    /// 1 exactly to these nodes.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedProtocolModel {
    pub c_radius: usize,
    pub s_local: usize,
    pub latency_rounds: usize,
    pub guarantee: Guarantee,
    /// Reach sets, each ascending and containing its owner.
    pub sets: Vec<Vec<usize>>,
}

impl LocalizedProtocolModel {
    /// Reach sets: the first `s_local` nodes of the BFS order from each node
    /// within radius `c_radius`, neighbours expanded by ascending id.
    pub fn select(
        g: &Graph,
        c_radius: usize,
        s_local: usize,
        latency_rounds: usize,
        guarantee: Guarantee,
    ) -> Result<Self> {
        if s_local == 0 {
            return Err(Error::Config("reach s must be at least 1".into()));
        }
        if let Guarantee::Lossy(f) = guarantee {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::validation(format!("lossy fraction {f} outside [0, 1]")));
            }
        }
        let sets = (0..g.n())
            .map(|i| {
                let mut s: Vec<usize> = g
                    .bfs_order(&[i], Some(c_radius))
                    .into_iter()
                    .take(s_local)
                    .collect();
                s.sort_unstable();
                s
            })
            .collect();
        Ok(LocalizedProtocolModel {
            c_radius,
            s_local,
            latency_rounds,
            guarantee,
            sets,
        })
    }

    pub fn min_set_size(&self) -> usize {
        self.sets.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Extra links per node charged for the channel:
    /// `ceil(s / (max(c, 1) · d))`.
    pub fn degree_budget(&self, d: usize) -> usize {
        self.s_local.div_ceil(self.c_radius.max(1) * d.max(1))
    }

    /// Trigger rule firing once `u_trigger` reach-set members look excited.
    pub fn trigger_rule(&self, u_trigger: usize) -> TriggerRule {
        TriggerRule {
            sets: Some(self.sets.clone()),
            threshold: u_trigger,
            latency: self.latency_rounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageVerdict {
    pub pass: bool,
    pub c_radius: usize,
    pub target: f64,
    /// Smallest `|ball(i, c) ∩ P|` over `i` in `P`.
    pub min_count: usize,
    pub argmin: Option<usize>,
}

/// Checks that every `P` node sees at least `target_fraction · n` `P` nodes
/// within radius `c`.
pub fn verify_lemma6(
    g: &Graph,
    partition: &FaultPartition,
    c: usize,
    target_fraction: f64,
) -> Result<CoverageVerdict> {
    if partition.n() != g.n() {
        return Err(Error::validation("partition was computed on a different graph"));
    }
    let npc = partition.npc_mask();
    let mut min: Option<(usize, usize)> = None;
    for &i in &partition.p {
        let count = g
            .bfs_order(&[i], Some(c))
            .into_iter()
            .filter(|&j| npc[j])
            .count();
        if min.is_none_or(|(m, _)| count < m) {
            min = Some((count, i));
        }
    }
    let target = target_fraction * g.n() as f64;
    Ok(CoverageVerdict {
        pass: min.is_none_or(|(m, _)| m as f64 >= target),
        c_radius: c,
        target: target_fraction,
        min_count: min.map_or(0, |(m, _)| m),
        argmin: min.map(|(_, i)| i),
    })
}

/// Initiation through the channel. A General in `P` delivers 1 to the `P`
/// members of its reach set; a faulty General hands them `faulty_bits`.
/// Delivery happens `latency` rounds after `k0`.
pub fn ideal_localized_init(
    model: &LocalizedProtocolModel,
    general: usize,
    partition: &FaultPartition,
    k0: usize,
    faulty_bits: &FaultyBits,
    seed: u64,
) -> Result<InitiationSpec> {
    let Some(reach) = model.sets.get(general) else {
        return Err(Error::validation(format!("general {general} outside the graph")));
    };
    let npc = partition.npc_mask();
    let general_correct = if npc[general] {
        true
    } else if partition.t.binary_search(&general).is_ok() {
        false
    } else {
        return Err(Error::validation(format!(
            "general {general} is a poor correct node; choose a node of P or of T"
        )));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut receivers: Vec<usize> = reach.iter().copied().filter(|&j| npc[j]).collect();
    if let Guarantee::Lossy(fraction) = model.guarantee {
        let mut others: Vec<usize> = receivers.iter().copied().filter(|&j| j != general).collect();
        others.shuffle(&mut rng);
        others.truncate((fraction * others.len() as f64).floor() as usize);
        if general_correct {
            others.push(general);
        }
        others.sort_unstable();
        receivers = others;
    }
    let mut spec = InitiationSpec::correct(Some(general), receivers, k0);
    spec.delivery_round = k0 + model.latency_rounds;
    if !general_correct {
        spec.general_correct = false;
        spec.per_node_init_bits = faulty_assignment(&spec.nodes, faulty_bits, &mut rng)?;
    }
    Ok(spec)
}

/// Bits a faulty General hands to `nodes`.
pub fn faulty_assignment(
    nodes: &[usize],
    pattern: &FaultyBits,
    rng: &mut ChaCha8Rng,
) -> Result<BTreeMap<usize, u8>> {
    use rand::Rng;
    let half = nodes.len().div_ceil(2);
    Ok(match pattern {
        FaultyBits::SplitHalf => nodes.iter().enumerate().map(|(r, &i)| (i, (r < half) as u8)).collect(),
        FaultyBits::All => nodes.iter().map(|&i| (i, 1)).collect(),
        FaultyBits::Nothing => nodes.iter().map(|&i| (i, 0)).collect(),
        FaultyBits::Random => nodes.iter().map(|&i| (i, rng.gen_bool(0.5) as u8)).collect(),
        FaultyBits::Explicit(ones) => {
            if let Some(bad) = ones.iter().find(|i| nodes.binary_search(i).is_err()) {
                return Err(Error::validation(format!("node {bad} is not a receiver of the General")));
            }
            nodes.iter().map(|&i| (i, ones.contains(&i) as u8)).collect()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faults::compute_p;

    #[test]
    fn reach_sets_follow_bfs_order() {
        let c6 = Graph::cycle(6).unwrap();
        let m = LocalizedProtocolModel::select(&c6, 2, 4, 0, Guarantee::NpcComplete).unwrap();
        assert_eq!(m.sets[0], vec![0, 1, 2, 5]);
        let m = LocalizedProtocolModel::select(&c6, 1, 10, 0, Guarantee::NpcComplete).unwrap();
        assert_eq!(m.sets[3], vec![2, 3, 4]);
        assert!(LocalizedProtocolModel::select(&c6, 1, 0, 0, Guarantee::NpcComplete).is_err());
    }

    #[test]
    fn degree_budget_grows_with_reach() {
        let g = Graph::petersen();
        let budget = |c, s| LocalizedProtocolModel::select(&g, c, s, 0, Guarantee::NpcComplete).unwrap().degree_budget(3);
        assert_eq!(budget(1, 4), 2);
        assert_eq!(budget(2, 10), 2);
        assert!(budget(1, 10) >= budget(1, 4));
        assert!(budget(3, 10) <= budget(1, 10));
    }

    #[test]
    fn coverage_extremes() {
        let g = Graph::petersen();
        let part = compute_p(&g, &[], 0.5).unwrap();
        let v = verify_lemma6(&g, &part, 2, 1.0).unwrap();
        assert!(v.pass);
        assert_eq!(v.min_count, 10);
        let v = verify_lemma6(&g, &part, 0, 0.2).unwrap();
        assert!(!v.pass);
        assert_eq!((v.min_count, v.argmin), (1, Some(0)));
    }

    #[test]
    fn initiation_cases() {
        let g = Graph::petersen();
        let part = compute_p(&g, &[9], 0.9).unwrap();
        let solo = LocalizedProtocolModel::select(&g, 0, 1, 0, Guarantee::NpcComplete).unwrap();
        let spec = ideal_localized_init(&solo, 0, &part, 0, &FaultyBits::All, 0).unwrap();
        assert_eq!(spec.nodes, vec![0]);
        assert_eq!(spec.delivery_round, 0);

        let wide = LocalizedProtocolModel::select(&g, 1, 4, 3, Guarantee::NpcComplete).unwrap();
        let spec = ideal_localized_init(&wide, 0, &part, 2, &FaultyBits::All, 0).unwrap();
        assert_eq!(spec.nodes, vec![0, 1, 4, 5]);
        assert_eq!(spec.inputs(), vec![0, 1, 4, 5]);
        assert_eq!(spec.delivery_round, 5);

        // faulty General 9 (neighbours 6, 7, 4): its P-receivers get mixed bits
        let spec = ideal_localized_init(&wide, 9, &part, 0, &FaultyBits::SplitHalf, 0).unwrap();
        assert!(!spec.general_correct);
        assert_eq!(spec.nodes, vec![4, 6, 7]);
        assert_eq!(spec.inputs(), vec![4, 6]);
    }

    #[test]
    fn lossy_channel_keeps_the_general() {
        let g = Graph::complete(12).unwrap();
        let part = compute_p(&g, &[], 0.5).unwrap();
        let m = LocalizedProtocolModel::select(&g, 1, 12, 0, Guarantee::Lossy(0.5)).unwrap();
        let spec = ideal_localized_init(&m, 3, &part, 0, &FaultyBits::All, 9).unwrap();
        assert_eq!(spec.nodes.len(), 6);
        assert!(spec.nodes.contains(&3));
    }

    #[test]
    fn poor_general_is_rejected() {
        let k4 = Graph::complete(4).unwrap();
        let part = compute_p(&k4, &[0], 0.3).unwrap();
        let m = LocalizedProtocolModel::select(&k4, 1, 4, 0, Guarantee::NpcComplete).unwrap();
        assert!(ideal_localized_init(&m, 1, &part, 0, &FaultyBits::All, 0).is_err());
    }
}

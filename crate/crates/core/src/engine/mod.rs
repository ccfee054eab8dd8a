//! Synchronous threshold propagation under Byzantine observations.
//!
//! Every round each node reads its neighbours' previous-round excitation
//! state; faulty neighbours are read through the adversary script. A node
//! becomes excited (and stays excited) once enough neighbours look excited
//! or when it receives the General's input. Its decision output fires
//! (and stays fired) once enough members of its trigger set look excited.
//! Faulty nodes also carry the state a correct node would have; scripts may
//! replay it.

mod adversary;
mod trace;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use adversary::{AdversaryScript, ScriptKind, TableEntry};
pub(crate) use adversary::Adversary;
pub use trace::{growth_check, Trace};

/// Who receives the General's input and when.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitiationSpec {
    /// The initiation set, ascending.
    pub nodes: Vec<usize>,
    /// Round in which the General initiates.
    pub k0: usize,
    /// Round in which the initiation set receives the input; later than
    /// `k0` when delivery goes through a slower channel.
    pub delivery_round: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general: Option<usize>,
    pub general_correct: bool,
    /// Inputs chosen by a faulty General; members without an entry get 0.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_node_init_bits: BTreeMap<usize, u8>,
}

impl InitiationSpec {
    /// No General: nobody ever receives input.
    pub fn none() -> Self {
        InitiationSpec {
            nodes: Vec::new(),
            k0: 0,
            delivery_round: 0,
            general: None,
            general_correct: true,
            per_node_init_bits: BTreeMap::new(),
        }
    }

    /// A correct General delivering 1 to every node of `nodes` at `k0`.
    pub fn correct(general: Option<usize>, mut nodes: Vec<usize>, k0: usize) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        InitiationSpec {
            nodes,
            k0,
            delivery_round: k0,
            general,
            general_correct: true,
            per_node_init_bits: BTreeMap::new(),
        }
    }

    /// Nodes whose input is 1, ascending.
    pub fn inputs(&self) -> Vec<usize> {
        if self.general_correct {
            self.nodes.clone()
        } else {
            self.nodes
                .iter()
                .copied()
                .filter(|i| self.per_node_init_bits.get(i) == Some(&1))
                .collect()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(&bad) = self.nodes.iter().find(|&&i| i >= n) {
            return Err(Error::validation(format!("initiation node {bad} outside 0..{n}")));
        }
        if self.delivery_round < self.k0 {
            return Err(Error::validation("delivery precedes initiation"));
        }
        for (i, &b) in &self.per_node_init_bits {
            if b > 1 {
                return Err(Error::validation(format!("init bit {b} for node {i} is not 0 or 1")));
            }
            if self.nodes.binary_search(i).is_err() {
                return Err(Error::validation(format!("init bit for node {i} outside the initiation set")));
            }
        }
        Ok(())
    }
}

/// Reading of "at least `beta·d` excited neighbours".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Count neighbours other than the node itself against `ceil(beta·d)`.
    #[default]
    Prose,
    /// Count the node itself too, against `ceil(beta·d) + 1`.
    ThresholdIncludesSelf,
}

/// When the decision output fires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerRule {
    /// Per-node trigger sets, each containing the node itself. `None` means
    /// the closed neighbourhood.
    pub sets: Option<Vec<Vec<usize>>>,
    /// Members that must look excited.
    pub threshold: usize,
    /// Extra rounds before a member's state becomes visible.
    pub latency: usize,
}

impl TriggerRule {
    pub fn neighbours(threshold: usize) -> Self {
        TriggerRule {
            sets: None,
            threshold,
            latency: 0,
        }
    }
}

/// Thresholds and horizon of one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dynamics {
    /// Excited neighbours (self excluded) needed for excitation.
    pub excitation_threshold: usize,
    pub trigger: TriggerRule,
    pub k_max: usize,
}

impl Dynamics {
    /// Thresholds from coefficients, applying `mode`.
    pub fn from_counts(excitation: usize, trigger: TriggerRule, mode: ThresholdMode, k_max: usize) -> Self {
        // Under the literal reading the count includes the node itself, which
        // only matters while the node is still unexcited (it is 0 then), so a
        // raised threshold over the other neighbours is equivalent. Trigger
        // sets already contain the node.
        let bump = matches!(mode, ThresholdMode::ThresholdIncludesSelf) as usize;
        Dynamics {
            excitation_threshold: excitation + bump,
            trigger: TriggerRule {
                threshold: trigger.threshold + bump,
                ..trigger
            },
            k_max,
        }
    }
}

/// Step-by-step execution. Round `k` reads only round `k - 1` state.
pub struct Simulation<'g> {
    g: &'g Graph,
    faulty: Vec<bool>,
    faulty_nodes: Vec<usize>,
    adversary: Adversary<'g>,
    dynamics: Dynamics,
    inputs: Vec<usize>,
    delivery_round: usize,
    /// `members_of[j]` lists the nodes whose trigger set contains `j`.
    members_of: Vec<Vec<usize>>,
    trigger_sizes: Vec<usize>,
    /// Correct neighbours excited in the last completed round.
    correct_excited: Vec<u32>,
    /// Correct trigger-set members visible as excited.
    correct_visible: Vec<u32>,
    /// Correct nodes newly excited in each completed round.
    fresh: Vec<Vec<usize>>,
    trace: Trace,
    scratch: Vec<u32>,
}

impl<'g> Simulation<'g> {
    pub fn new(
        g: &'g Graph,
        faulty_nodes: &[usize],
        script: &AdversaryScript,
        initiation: &InitiationSpec,
        dynamics: Dynamics,
    ) -> Result<Self> {
        let n = g.n();
        let faulty = g.mask(faulty_nodes)?;
        initiation.validate(n)?;
        if dynamics.k_max < initiation.delivery_round {
            return Err(Error::validation(format!(
                "k_max = {} precedes the delivery round {}",
                dynamics.k_max, initiation.delivery_round
            )));
        }
        let mut members_of = vec![Vec::new(); n];
        let trigger_sizes = match &dynamics.trigger.sets {
            None => {
                for (i, m) in members_of.iter_mut().enumerate() {
                    m.push(i);
                    m.extend_from_slice(g.neighbors(i));
                }
                vec![g.degree() + 1; n]
            }
            Some(sets) => {
                if sets.len() != n {
                    return Err(Error::validation(format!(
                        "{} trigger sets for {n} nodes",
                        sets.len()
                    )));
                }
                for (i, set) in sets.iter().enumerate() {
                    if !set.contains(&i) {
                        return Err(Error::validation(format!("trigger set of {i} omits {i}")));
                    }
                    for &j in set {
                        g.check_node(j)?;
                        members_of[j].push(i);
                    }
                }
                sets.iter().map(Vec::len).collect()
            }
        };
        let rounds = dynamics.k_max + 1;
        Ok(Simulation {
            g,
            faulty_nodes: faulty_nodes.to_vec(),
            faulty: faulty.clone(),
            adversary: Adversary::new(g, script)?,
            dynamics,
            inputs: initiation.inputs(),
            delivery_round: initiation.delivery_round,
            members_of,
            trigger_sizes,
            correct_excited: vec![0; n],
            correct_visible: vec![0; n],
            fresh: Vec::with_capacity(rounds),
            trace: Trace {
                correct: faulty.iter().map(|&f| !f).collect(),
                u: Vec::with_capacity(rounds),
                x: Vec::with_capacity(rounds),
                y: Vec::with_capacity(rounds),
            },
            scratch: vec![0; n],
        })
    }

    /// Rounds completed so far.
    pub fn rounds_done(&self) -> usize {
        self.trace.x.len()
    }

    pub fn trigger_set_sizes(&self) -> &[usize] {
        &self.trigger_sizes
    }

    /// Computes the next round.
    pub fn step(&mut self) -> Result<()> {
        let n = self.g.n();
        let k = self.rounds_done();
        let mut u = vec![false; n];
        if k == self.delivery_round {
            for &i in &self.inputs {
                u[i] = true;
            }
        }
        let (x, y) = if k == 0 {
            (u.clone(), vec![self.dynamics.trigger.threshold == 0; n])
        } else {
            (self.next_x(k, &u)?, self.next_y(k)?)
        };
        let prev = self.trace.x.last();
        let fresh: Vec<usize> = (0..n)
            .filter(|&i| x[i] && !self.faulty[i] && prev.is_none_or(|p| !p[i]))
            .collect();
        for &j in &fresh {
            for &i in self.g.neighbors(j) {
                self.correct_excited[i] += 1;
            }
        }
        self.fresh.push(fresh);
        self.trace.u.push(u);
        self.trace.x.push(x);
        self.trace.y.push(y);
        Ok(())
    }

    fn next_x(&mut self, k: usize, u: &[bool]) -> Result<Vec<bool>> {
        let prev = &self.trace.x[k - 1];
        let counts = &mut self.scratch;
        counts.copy_from_slice(&self.correct_excited);
        for &j in &self.faulty_nodes {
            for &i in self.g.neighbors(j) {
                counts[i] += self.adversary.observe(j, i, k - 1, prev[j])? as u32;
            }
        }
        let th = self.dynamics.excitation_threshold as u32;
        Ok((0..self.g.n())
            .map(|i| prev[i] || counts[i] >= th || u[i])
            .collect())
    }

    fn next_y(&mut self, k: usize) -> Result<Vec<bool>> {
        let prev = &self.trace.y[k - 1];
        let lag = 1 + self.dynamics.trigger.latency;
        let th = self.dynamics.trigger.threshold as u32;
        if k < lag {
            return Ok(prev.clone());
        }
        let seen = k - lag;
        for &j in &self.fresh[seen] {
            for &i in &self.members_of[j] {
                self.correct_visible[i] += 1;
            }
        }
        let counts = &mut self.scratch;
        counts.copy_from_slice(&self.correct_visible);
        let state = &self.trace.x[seen];
        for &j in &self.faulty_nodes {
            for &i in &self.members_of[j] {
                let bit = if i == j {
                    state[j]
                } else {
                    self.adversary.observe(j, i, seen, state[j])?
                };
                counts[i] += bit as u32;
            }
        }
        Ok((0..self.g.n()).map(|i| prev[i] || counts[i] >= th).collect())
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn finish(self) -> Trace {
        self.trace
    }
}

/// Runs rounds `0..=k_max`.
pub fn run(
    g: &Graph,
    faulty_nodes: &[usize],
    script: &AdversaryScript,
    initiation: &InitiationSpec,
    dynamics: Dynamics,
) -> Result<Trace> {
    let k_max = dynamics.k_max;
    let mut sim = Simulation::new(g, faulty_nodes, script, initiation, dynamics)?;
    while sim.rounds_done() <= k_max {
        sim.step()?;
    }
    Ok(sim.finish())
}

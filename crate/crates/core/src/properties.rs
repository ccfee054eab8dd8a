//! Trace-level checks of the broadcast guarantees.
//!
//! All checks are made over a witness set of correct nodes, by default the
//! complement `P` of the fault closure.
//!
//! - Correctness: with a correct General initiating at `k0`, every witness
//!   node fires at some round in `[k0, k0 + kh_budget)`.
//! - Unforgeability: without initiation reaching the witness set, no
//!   witness node ever fires.
//! - Relay: either no witness node fires, or all do and the last fires
//!   strictly before `first + kdelta_budget`.

use serde::{Deserialize, Serialize};

use crate::engine::{InitiationSpec, Trace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeavisideBranch {
    /// Correct General whose input reaches the witness set.
    Correctness,
    /// No witness node receives input.
    Unforgeability,
    /// Faulty General whose input reaches the witness set; only the relay
    /// check applies.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavisideOutcome {
    pub branch: HeavisideBranch,
    pub pass: bool,
    /// No witness node fired before the General initiated (or at all, in
    /// the unforgeability branch).
    pub unforgeability_pass: bool,
    #[serde(rename = "measured_kH")]
    pub measured_kh: Option<usize>,
    pub first_uncovered: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracOutcome {
    pub pass: bool,
    pub k1_first_trigger: Option<usize>,
    pub km_last_trigger: Option<usize>,
    pub measured_kdelta: Option<usize>,
    pub first_uncovered: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub heaviside_branch: HeavisideBranch,
    pub heaviside_pass: bool,
    pub dirac_pass: bool,
    pub unforgeability_pass: bool,
    pub kh_budget: usize,
    pub kdelta_budget: usize,
    #[serde(rename = "witness_P")]
    pub witness_p: Vec<usize>,
    pub k1_first_trigger: Option<usize>,
    pub km_last_trigger: Option<usize>,
    #[serde(rename = "measured_kH")]
    pub measured_kh: Option<usize>,
    pub measured_kdelta: Option<usize>,
    /// `(n - |witness|) / n`.
    pub poor_fraction: f64,
    pub triggered: usize,
    /// First witness node (ascending id) that breaks a failing check.
    pub first_uncovered: Option<usize>,
    /// First round with the whole witness set excited.
    pub saturation_round: Option<usize>,
}

impl PropertyReport {
    pub fn pass(&self) -> bool {
        self.heaviside_pass && self.dirac_pass && self.unforgeability_pass
    }
}

fn check_witness(trace: &Trace, witness: &[usize]) -> Result<()> {
    for &i in witness {
        if i >= trace.n() || !trace.correct[i] {
            return Err(Error::validation(format!("witness node {i} is not a correct node")));
        }
    }
    Ok(())
}

pub fn check_heaviside(
    trace: &Trace,
    initiation: &InitiationSpec,
    kh_budget: usize,
    witness: &[usize],
) -> Result<HeavisideOutcome> {
    check_witness(trace, witness)?;
    let mut in_witness = vec![false; trace.n()];
    for &i in witness {
        in_witness[i] = true;
    }
    let reached = initiation.inputs().iter().any(|&i| i < trace.n() && in_witness[i]);
    let branch = match (reached, initiation.general_correct) {
        (false, _) => HeavisideBranch::Unforgeability,
        (true, true) => HeavisideBranch::Correctness,
        (true, false) => HeavisideBranch::NotApplicable,
    };
    let rounds: Vec<Option<usize>> = witness.iter().map(|&i| trace.trigger_round(i)).collect();
    let k0 = initiation.k0;
    Ok(match branch {
        HeavisideBranch::Unforgeability => {
            let forged = witness.iter().zip(&rounds).find(|(_, r)| r.is_some());
            HeavisideOutcome {
                branch,
                pass: forged.is_none(),
                unforgeability_pass: forged.is_none(),
                measured_kh: None,
                first_uncovered: forged.map(|(&i, _)| i),
            }
        }
        HeavisideBranch::Correctness => {
            let early = rounds.iter().any(|r| r.is_some_and(|k| k < k0));
            let uncovered = witness
                .iter()
                .zip(&rounds)
                .find(|(_, r)| !r.is_some_and(|k| k >= k0 && k - k0 < kh_budget))
                .map(|(&i, _)| i);
            HeavisideOutcome {
                branch,
                pass: uncovered.is_none(),
                unforgeability_pass: !early,
                measured_kh: rounds.iter().flatten().max().map(|&k| k.saturating_sub(k0)),
                first_uncovered: uncovered,
            }
        }
        HeavisideBranch::NotApplicable => HeavisideOutcome {
            branch,
            pass: true,
            unforgeability_pass: true,
            measured_kh: None,
            first_uncovered: None,
        },
    })
}

pub fn check_dirac(trace: &Trace, kdelta_budget: usize, witness: &[usize]) -> Result<DiracOutcome> {
    check_witness(trace, witness)?;
    let rounds: Vec<Option<usize>> = witness.iter().map(|&i| trace.trigger_round(i)).collect();
    let k1 = rounds.iter().flatten().min().copied();
    let km = rounds.iter().flatten().max().copied();
    let Some(first) = k1 else {
        return Ok(DiracOutcome {
            pass: true,
            k1_first_trigger: None,
            km_last_trigger: None,
            measured_kdelta: None,
            first_uncovered: None,
        });
    };
    let uncovered = witness
        .iter()
        .zip(&rounds)
        .find(|(_, r)| !r.is_some_and(|k| k < first + kdelta_budget))
        .map(|(&i, _)| i);
    Ok(DiracOutcome {
        pass: uncovered.is_none(),
        k1_first_trigger: k1,
        km_last_trigger: km,
        measured_kdelta: km.map(|m| m - first + 1),
        first_uncovered: uncovered,
    })
}

pub fn summarize(
    trace: &Trace,
    initiation: &InitiationSpec,
    kh_budget: usize,
    kdelta_budget: usize,
    witness: &[usize],
) -> Result<PropertyReport> {
    let h = check_heaviside(trace, initiation, kh_budget, witness)?;
    let d = check_dirac(trace, kdelta_budget, witness)?;
    let n = trace.n();
    Ok(PropertyReport {
        heaviside_branch: h.branch,
        heaviside_pass: h.pass,
        dirac_pass: d.pass,
        unforgeability_pass: h.unforgeability_pass,
        kh_budget,
        kdelta_budget,
        witness_p: witness.to_vec(),
        k1_first_trigger: d.k1_first_trigger,
        km_last_trigger: d.km_last_trigger,
        measured_kh: h.measured_kh,
        measured_kdelta: d.measured_kdelta,
        poor_fraction: if n == 0 { 0.0 } else { (n - witness.len()) as f64 / n as f64 },
        triggered: witness.iter().filter(|&&i| trace.trigger_round(i).is_some()).count(),
        first_uncovered: h.first_uncovered.or(d.first_uncovered),
        saturation_round: (0..trace.x.len()).find(|&k| trace.excited_among(k, witness) == witness.len()),
    })
}

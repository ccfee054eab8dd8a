//! Parameter inequalities for fault-tolerant propagation.
//!
//! Every check returns a [`Verdict`] carrying both sides of each inequality
//! so borderline cases can be audited. Comparisons are exact floating-point
//! evaluations with no slack. Wherever the classical form uses
//! `sqrt(d-1)/d`, the spectral form `lambda/(2d)` is used instead; passing
//! `lambda = 2·sqrt(d-1)` recovers the Ramanujan form exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values within this relative distance of an integer are treated as that
/// integer before rounding, so that e.g. `0.1 · 30` counts as 3.
const ROUNDING_SNAP: f64 = 1e-9;

/// `ceil(x)`, snapping `x` to a nearby integer first.
pub fn ceil_count(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= ROUNDING_SNAP * r.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// `floor(x)`, snapping `x` to a nearby integer first.
pub fn floor_count(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= ROUNDING_SNAP * r.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.floor().max(0.0) as usize
    }
}

/// Neighbour-count threshold `ceil(coefficient · d)`.
pub fn threshold(coefficient: f64, d: usize) -> usize {
    ceil_count(coefficient * d as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n: usize,
    pub alpha: f64,
    /// `floor(alpha · n)`.
    pub f: usize,
    pub seed: u64,
}

impl SystemParams {
    pub fn new(n: usize, alpha: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::validation(format!("alpha {alpha} outside [0, 1)")));
        }
        Ok(SystemParams {
            n,
            alpha,
            f: floor_count(alpha * n as f64),
            seed,
        })
    }
}

/// Coefficients of a broadcast system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolParams {
    /// Propagation coefficient: neighbour fraction needed for excitation.
    pub beta: f64,
    /// Immunity coefficient defining the fault closure.
    pub beta0: f64,
    /// Triggering coefficient for the decision output.
    pub beta2: f64,
    /// Initial-excitation fraction. Derived in pure mode, user-set otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    /// Expansion-rate constant of the logarithmic-time propagation bound;
    /// 0.5 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

pub const DEFAULT_EPS: f64 = 0.5;

impl ProtocolParams {
    pub fn new(beta: f64, beta0: f64, beta2: f64) -> Self {
        ProtocolParams {
            beta,
            beta0,
            beta2,
            theta0: None,
            eps: None,
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps.unwrap_or(DEFAULT_EPS)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} = {v} outside (0, 1)")))
            }
        };
        open("beta", self.beta)?;
        open("beta0", self.beta0)?;
        open("beta2", self.beta2)?;
        open("eps", self.eps())?;
        if let Some(t) = self.theta0 {
            open("theta0", t)?;
        }
        Ok(())
    }

    /// Excited neighbours needed to become excited: `ceil(beta · d)`.
    pub fn excitation_threshold(&self, d: usize) -> usize {
        threshold(self.beta, d)
    }

    /// Neighbours in the closure that pull a node into it: `ceil(beta0 · d)`.
    pub fn immunity_threshold(&self, d: usize) -> usize {
        threshold(self.beta0, d)
    }

    /// Pure-mode decision threshold: `ceil(beta2 · d)`.
    pub fn trigger_threshold(&self, d: usize) -> usize {
        threshold(self.beta2, d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    pub fn new(label: &str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let holds = match relation {
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Lt => lhs < rhs,
        };
        Inequality {
            label: label.to_string(),
            lhs,
            relation,
            rhs,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub checks: Vec<Inequality>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Verdict {
    fn of(checks: Vec<Inequality>) -> Self {
        Verdict {
            holds: checks.iter().all(|c| c.holds),
            checks,
            theta0: None,
            reason: None,
        }
    }

    pub fn check(&self, label: &str) -> Option<&Inequality> {
        self.checks.iter().find(|c| c.label == label)
    }
}

/// Supremum `sqrt(2·beta0/alpha)` of the achievable closure ratio; infinite
/// when there are no faults.
pub fn mu_bound(alpha: f64, beta0: f64) -> f64 {
    if alpha == 0.0 {
        f64::INFINITY
    } else {
        (2.0 * beta0 / alpha).sqrt()
    }
}

fn immunity_inequality(alpha: f64, beta0: f64, d: usize, lambda: f64) -> Inequality {
    Inequality::new(
        "immunity",
        beta0 - (2.0 * alpha * beta0).sqrt(),
        Relation::Ge,
        lambda / (2.0 * d as f64),
    )
}

fn propagation_inequality(alpha: f64, beta: f64, beta0: f64, theta0: f64) -> Inequality {
    Inequality::new(
        "propagation",
        beta + 3.0 * (beta0 - (2.0 * beta0 * alpha).sqrt()),
        Relation::Lt,
        theta0,
    )
}

/// Closure bound condition: `beta0 - sqrt(2·alpha·beta0) >= lambda/(2d)`.
pub fn lemma2_holds(alpha: f64, beta0: f64, d: usize, lambda: f64) -> Verdict {
    Verdict::of(vec![immunity_inequality(alpha, beta0, d, lambda)])
}

/// Propagation from a `theta0` fraction of excited good nodes:
/// `beta + 3(beta0 - sqrt(2·beta0·alpha)) < theta0`, together with the
/// closure bound condition.
pub fn lemma3_holds(
    alpha: f64,
    beta: f64,
    beta0: f64,
    theta0: f64,
    d: usize,
    lambda: f64,
) -> Verdict {
    Verdict::of(vec![
        immunity_inequality(alpha, beta0, d, lambda),
        propagation_inequality(alpha, beta, beta0, theta0),
    ])
}

/// Pure-propagation broadcast: `theta0 = ((beta2 - beta0)·d + 1)/n`, then
/// `min{beta, beta2, 1 - beta2} >= beta0` plus both conditions above.
pub fn lemma4_holds(
    alpha: f64,
    beta: f64,
    beta0: f64,
    beta2: f64,
    n: usize,
    d: usize,
    lambda: f64,
) -> Verdict {
    let theta0 = ((beta2 - beta0) * d as f64 + 1.0) / n as f64;
    let mut v = Verdict::of(vec![
        Inequality::new(
            "coefficients",
            beta.min(beta2).min(1.0 - beta2),
            Relation::Ge,
            beta0,
        ),
        immunity_inequality(alpha, beta0, d, lambda),
        propagation_inequality(alpha, beta, beta0, theta0),
    ]);
    v.theta0 = Some(theta0);
    v
}

/// Logarithmic-time propagation from a large initial area:
/// `sqrt(d) > 4/(theta0 + 6·alpha - 4·sqrt(2·alpha))` and
/// `theta0 > beta + 3·beta0/(1-eps) - ((3-eps)/(1-eps))·sqrt(2·alpha·beta0)`.
pub fn lemma5_holds(
    alpha: f64,
    theta0: f64,
    d: usize,
    eps: f64,
    beta: f64,
    beta0: f64,
) -> Verdict {
    let denom = theta0 + 6.0 * alpha - 4.0 * (2.0 * alpha).sqrt();
    let degree = if denom > 0.0 {
        Inequality::new("degree", (d as f64).sqrt(), Relation::Gt, 4.0 / denom)
    } else {
        Inequality {
            label: "degree".into(),
            lhs: (d as f64).sqrt(),
            relation: Relation::Gt,
            rhs: f64::INFINITY,
            holds: false,
        }
    };
    let rate = Inequality::new(
        "initial-area",
        theta0,
        Relation::Gt,
        beta + 3.0 * beta0 / (1.0 - eps) - ((3.0 - eps) / (1.0 - eps)) * (2.0 * alpha * beta0).sqrt(),
    );
    let mut v = Verdict::of(vec![degree, rate]);
    if denom <= 0.0 {
        v.reason = Some(format!(
            "theta0 + 6·alpha - 4·sqrt(2·alpha) = {denom} is not positive"
        ));
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem1Params {
    /// Decision threshold `u`.
    pub u_trigger: usize,
    /// Localized-protocol reach `s`.
    pub s_local: usize,
}

/// `u = ceil(mu·alpha·n + 4·sqrt(2·alpha)·n)`, `s = u + ceil(mu·alpha·n)`.
/// Fails when `u >= n`, where the constants say nothing at this scale.
pub fn theorem1_params(alpha: f64, n: usize, mu: f64) -> Result<Theorem1Params> {
    if mu < 1.0 {
        return Err(Error::validation(format!("mu = {mu} below 1")));
    }
    if alpha < 0.0 {
        return Err(Error::validation(format!("alpha = {alpha} is negative")));
    }
    let n_f = n as f64;
    let slack = mu * alpha * n_f;
    let u = ceil_count(slack + 4.0 * (2.0 * alpha).sqrt() * n_f);
    if alpha > 0.0 && u >= n {
        return Err(Error::Config(format!(
            "trigger threshold u = {u} is not below n = {n}; the constants are vacuous at this scale"
        )));
    }
    Ok(Theorem1Params {
        u_trigger: u,
        s_local: u + ceil_count(slack),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub alpha: f64,
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub grid_step: f64,
    /// Serialised as `null` when there are no faults.
    pub mu_bound: f64,
    /// `d + 1 > 2·alpha·n`.
    pub barrier: Inequality,
    pub barrier_violated: bool,
    pub grid_points: usize,
    /// Grid points satisfying each inequality on its own.
    pub satisfied: SatisfiedCounts,
    /// Feasible `(beta, beta0, beta2)` in lexicographic order, with the
    /// derived `theta0`.
    pub feasible_assignments: Vec<ProtocolParams>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatisfiedCounts {
    pub coefficients: usize,
    pub immunity: usize,
    pub propagation: usize,
}

/// Grid values `step, 2·step, ... < 1`. When `1/step` is an integer the
/// values are computed as `k/m` so they coincide with decimal literals.
fn grid(step: f64) -> Vec<f64> {
    let m = (1.0 / step).round();
    if (m * step - 1.0).abs() < 1e-9 {
        (1..m as usize).map(|k| k as f64 / m).collect()
    } else {
        (1..)
            .map(|k| k as f64 * step)
            .take_while(|&v| v < 1.0)
            .collect()
    }
}

/// Grid search over `(beta, beta0, beta2)` for pure-propagation broadcast.
pub fn pure_propagation_feasible(
    alpha: f64,
    n: usize,
    d: usize,
    lambda: f64,
    grid_step: f64,
) -> Result<FeasibilityReport> {
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(Error::validation(format!("grid step {grid_step} outside (0, 0.1]")));
    }
    if n == 0 || d == 0 {
        return Err(Error::validation("n and d must be positive"));
    }
    let values = grid(grid_step);
    let barrier = Inequality::new("barrier", d as f64 + 1.0, Relation::Gt, 2.0 * alpha * n as f64);

    let per_beta: Vec<(SatisfiedCounts, Vec<ProtocolParams>)> = values
        .par_iter()
        .map(|&beta| {
            let mut counts = SatisfiedCounts::default();
            let mut found = Vec::new();
            for &beta0 in &values {
                let immunity = immunity_inequality(alpha, beta0, d, lambda).holds;
                for &beta2 in &values {
                    let v = lemma4_holds(alpha, beta, beta0, beta2, n, d, lambda);
                    counts.coefficients += v.checks[0].holds as usize;
                    counts.immunity += immunity as usize;
                    counts.propagation += v.checks[2].holds as usize;
                    if v.holds {
                        found.push(ProtocolParams {
                            theta0: v.theta0,
                            ..ProtocolParams::new(beta, beta0, beta2)
                        });
                    }
                }
            }
            (counts, found)
        })
        .collect();

    let mut satisfied = SatisfiedCounts::default();
    let mut feasible_assignments = Vec::new();
    for (c, found) in per_beta {
        satisfied.coefficients += c.coefficients;
        satisfied.immunity += c.immunity;
        satisfied.propagation += c.propagation;
        feasible_assignments.extend(found);
    }
    Ok(FeasibilityReport {
        alpha,
        n,
        d,
        lambda,
        grid_step,
        mu_bound: mu_bound(alpha, feasible_assignments.first().map_or(0.0, |p| p.beta0)),
        barrier_violated: !barrier.holds,
        barrier,
        grid_points: values.len().pow(3),
        satisfied,
        feasible_assignments,
    })
}

//! Browser demo bindings. Each operation has a plain Rust form returning
//! JSON (testable natively) and a thin exported wrapper.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use relaycast::experiment::{run_config, RunConfig};
use relaycast::faults::{compute_p, place_faults, FaultStrategy};
use relaycast::graph::build_random_regular;
use relaycast::params::pure_propagation_feasible;

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

#[derive(Serialize)]
struct Curve {
    n: usize,
    witness_size: usize,
    /// Fraction of the witness set excited, per round.
    excited: Vec<f64>,
    /// Fraction of the witness set that has fired, per round.
    fired: Vec<f64>,
    heaviside_pass: bool,
    dirac_pass: bool,
    unforgeability_pass: bool,
    notes: Vec<String>,
}

/// Runs a config and returns per-round excitation and firing curves.
pub fn propagation_curve(config_json: &str) -> Result<String, String> {
    let cfg = RunConfig::from_json(config_json).map_err(text)?;
    let (trace, report) = run_config(&cfg).map_err(text)?;
    let witness = &report.properties.witness_p;
    let share = |count: usize| if witness.is_empty() { 0.0 } else { count as f64 / witness.len() as f64 };
    let curve = Curve {
        n: trace.n(),
        witness_size: witness.len(),
        excited: (0..trace.x.len()).map(|k| share(trace.excited_among(k, witness))).collect(),
        fired: trace
            .y
            .iter()
            .map(|row| share(witness.iter().filter(|&&i| row[i]).count()))
            .collect(),
        heaviside_pass: report.properties.heaviside_pass,
        dirac_pass: report.properties.dirac_pass,
        unforgeability_pass: report.properties.unforgeability_pass,
        notes: report.notes,
    };
    serde_json::to_string(&curve).map_err(text)
}

/// For each `(beta, beta0)` cell, how many `beta2` values admit pure
/// propagation. A non-positive `lambda` selects the Ramanujan value.
pub fn feasibility_map(alpha: f64, n: usize, d: usize, lambda: f64, grid_step: f64) -> Result<String, String> {
    if d < 2 {
        return Err("degree must be at least 2".into());
    }
    let lambda = if lambda > 0.0 { lambda } else { 2.0 * ((d - 1) as f64).sqrt() };
    let report = pure_propagation_feasible(alpha, n, d, lambda, grid_step).map_err(text)?;
    let mut cells: BTreeMap<(u64, u64), (f64, f64, usize)> = BTreeMap::new();
    for p in &report.feasible_assignments {
        cells.entry((p.beta.to_bits(), p.beta0.to_bits())).or_insert((p.beta, p.beta0, 0)).2 += 1;
    }
    let cells: Vec<_> = cells
        .values()
        .map(|&(beta, beta0, count)| json!({"beta": beta, "beta0": beta0, "beta2_count": count}))
        .collect();
    Ok(json!({
        "lambda": lambda,
        "grid_step": grid_step,
        "barrier_violated": report.barrier_violated,
        "mu_bound": report.mu_bound,
        "feasible_triples": report.feasible_assignments.len(),
        "cells": cells,
    })
    .to_string())
}

/// Closure size `|Z|` as the number of faults grows, for one placement
/// strategy (`random`, `ball`, `greedy-closure`).
pub fn closure_curve(n: usize, d: usize, seed: u64, beta0: f64, strategy: &str, f_max: usize) -> Result<String, String> {
    let g = build_random_regular(n, d, seed).map_err(text)?;
    let strategy = match strategy {
        "random" => FaultStrategy::Random,
        "ball" => FaultStrategy::Ball { center: None },
        "greedy-closure" => FaultStrategy::GreedyClosure,
        other => return Err(format!("unknown strategy {other:?}")),
    };
    let mut points = Vec::new();
    for f in 0..=f_max.min(n) {
        let t = place_faults(&g, &strategy, f, seed, beta0).map_err(text)?;
        let part = compute_p(&g, &t, beta0).map_err(text)?;
        points.push(json!({"f": f, "z": part.z.len(), "p": part.p.len()}));
    }
    Ok(json!({"n": n, "d": d, "lambda": g.lambda(), "points": points}).to_string())
}

#[wasm_bindgen(js_name = propagationCurve)]
pub fn propagation_curve_js(config_json: &str) -> Result<String, JsError> {
    propagation_curve(config_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = feasibilityMap)]
pub fn feasibility_map_js(alpha: f64, n: usize, d: usize, lambda: f64, grid_step: f64) -> Result<String, JsError> {
    feasibility_map(alpha, n, d, lambda, grid_step).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = closureCurve)]
pub fn closure_curve_js(n: usize, d: usize, seed: u64, beta0: f64, strategy: &str, f_max: usize) -> Result<String, JsError> {
    closure_curve(n, d, seed, beta0, strategy, f_max).map_err(|e| JsError::new(&e))
}

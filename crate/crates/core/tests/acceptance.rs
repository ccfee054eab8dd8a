//! Acceptance criteria 1–10. Prints one line per criterion and exits
//! non-zero if any fails.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use relaycast::complementary::LocalizedProtocolModel;
use relaycast::engine::{self, AdversaryScript, Dynamics, InitiationSpec, ScriptKind, ThresholdMode, TriggerRule};
use relaycast::experiment::{run_config, run_on, RunConfig};
use relaycast::faults::{compute_p, compute_z, place_faults, FaultStrategy};
use relaycast::graph::{build_lps_graph, build_random_regular, sample_mixing, spectral_bound, Graph, DEFAULT_SPECTRAL_TOL};
use relaycast::params::{lemma2_holds, mu_bound, pure_propagation_feasible, threshold};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn spectral_anchors() -> Outcome {
    let start = Instant::now();
    let cases = [
        ("K5", Graph::complete(5).unwrap(), 1.0),
        ("C5", Graph::cycle(5).unwrap(), (1.0 + 5f64.sqrt()) / 2.0),
        ("Petersen", Graph::petersen(), 2.0),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (name, g, exact) in &cases {
        let got = spectral_bound(g, DEFAULT_SPECTRAL_TOL).unwrap();
        worst = worst.max((got - exact).abs() / exact);
        parts.push(format!("{name}={got:.7}"));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && elapsed < Duration::from_secs(1),
        format!("{} worst rel err {worst:.1e}, {elapsed:.2?}", parts.join(" ")),
    )
}

fn lps_construction(lps: &Graph, elapsed: Duration) -> Outcome {
    let bound = 2.0 * 5f64.sqrt() + 1e-3;
    let regular = (0..lps.n()).all(|i| lps.neighbors(i).len() == 6);
    outcome(
        lps.n() == 12180 && lps.degree() == 6 && regular && !lps.is_bipartite() && lps.lambda() <= bound
            && elapsed < Duration::from_secs(60),
        format!("n={} d={} lambda={:.6} <= {bound:.6}, {elapsed:.2?}", lps.n(), lps.degree(), lps.lambda()),
    )
}

fn mixing_bound(lps: &Graph) -> Outcome {
    let exact = 2.0 * ((lps.degree() - 1) as f64).sqrt();
    let mut total = 0;
    let mut parts = vec![];
    let r = sample_mixing(lps, 1000, 11, exact).unwrap();
    total += r.violations;
    parts.push(format!("lps worst {:.3}", r.worst_ratio));
    for seed in 1..=5 {
        let g = build_random_regular(1024, 32, seed).unwrap();
        let r = sample_mixing(&g, 1000, 100 + seed, g.lambda()).unwrap();
        total += r.violations;
        parts.push(format!("rr{seed} lambda {:.3} worst {:.3}", g.lambda(), r.worst_ratio));
    }
    outcome(total == 0, format!("{total} violations in 6000 samples ({})", parts.join(", ")))
}

/// Least closed superset of `t` by enumerating every superset.
fn closure_by_enumeration(g: &Graph, t: &[usize], beta0: f64) -> Vec<usize> {
    let n = g.n();
    let th = threshold(beta0, g.degree());
    let t_bits = t.iter().fold(0u32, |acc, &v| acc | 1 << v);
    let mut best: Option<u32> = None;
    for set in 0u32..1 << n {
        if set & t_bits != t_bits {
            continue;
        }
        let closed = (0..n).all(|i| {
            set >> i & 1 == 1 || g.neighbors(i).iter().filter(|&&j| set >> j & 1 == 1).count() < th
        });
        if closed && best.is_none_or(|b| set.count_ones() < b.count_ones()) {
            best = Some(set);
        }
    }
    let best = best.expect("the full set is closed");
    (0..n).filter(|&i| best >> i & 1 == 1).collect()
}

/// Fixpoint by full rescans.
fn closure_by_rescans(g: &Graph, t: &[usize], beta0: f64) -> Vec<usize> {
    let th = threshold(beta0, g.degree());
    let mut in_z = vec![false; g.n()];
    for &v in t {
        in_z[v] = true;
    }
    loop {
        let add: Vec<usize> = (0..g.n())
            .filter(|&i| !in_z[i] && g.neighbors(i).iter().filter(|&&j| in_z[j]).count() >= th)
            .collect();
        if add.is_empty() {
            return (0..g.n()).filter(|&i| in_z[i]).collect();
        }
        for i in add {
            in_z[i] = true;
        }
    }
}

fn closure_oracle() -> Outcome {
    let betas = [0.2, 0.4, 0.6];
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    let (mut checks, mut mismatches, mut small_graphs) = (0, 0, 0);
    for mask in 0u32..1 << pairs.len() {
        let mut adj = vec![Vec::new(); 4];
        for (k, &(a, b)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        // only connected regular graphs are networks in this model
        let Ok(g) = Graph::from_adjacency(adj, relaycast::graph::Origin::Explicit) else {
            continue;
        };
        small_graphs += 1;
        for t_bits in 0u32..16 {
            let t: Vec<usize> = (0..4).filter(|&i| t_bits >> i & 1 == 1).collect();
            for beta0 in betas {
                checks += 1;
                mismatches += (compute_z(&g, &t, beta0).unwrap() != closure_by_enumeration(&g, &t, beta0)) as usize;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..100 {
        let (n, d) = loop {
            let n = rng.gen_range(8..=64);
            let d = rng.gen_range(3..=8.min(n - 1));
            if n * d % 2 == 0 {
                break (n, d);
            }
        };
        let g = build_random_regular(n, d, k).unwrap();
        for beta0 in betas {
            let size = rng.gen_range(0..=n / 3);
            let t = sample(&mut rng, n, size).into_vec();
            checks += 1;
            mismatches += (compute_z(&g, &t, beta0).unwrap() != closure_by_rescans(&g, &t, beta0)) as usize;
        }
        if n <= 16 {
            for beta0 in betas {
                let t = sample(&mut rng, n, 2).into_vec();
                checks += 1;
                mismatches += (compute_z(&g, &t, beta0).unwrap() != closure_by_enumeration(&g, &t, beta0)) as usize;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checks} closures ({small_graphs} connected regular 4-node graphs, all fault sets; 100 random graphs), {mismatches} mismatches"),
    )
}

fn closure_bound() -> Outcome {
    let (alpha, beta0) = (0.02, 0.4);
    let g = build_random_regular(1024, 32, 7).unwrap();
    let feasible = lemma2_holds(alpha, beta0, g.degree(), g.lambda());
    let bound = mu_bound(alpha, beta0);
    let f = (alpha * 1024.0) as usize;
    let strategies = [
        FaultStrategy::Random,
        FaultStrategy::Ball { center: None },
        FaultStrategy::GreedyClosure,
        FaultStrategy::AroundInitiation { anchor: Some(0), include_anchor: true },
        FaultStrategy::AroundInitiation { anchor: Some(500), include_anchor: false },
    ];
    let mut failures = 0;
    let mut worst_mu: f64 = 0.0;
    for k in 0..50u64 {
        let s = &strategies[k as usize % strategies.len()];
        let t = place_faults(&g, s, f, k, beta0).unwrap();
        let part = compute_p(&g, &t, beta0).unwrap();
        worst_mu = worst_mu.max(part.mu_achieved);
        if part.p.len() as f64 <= g.n() as f64 - bound * t.len() as f64 {
            failures += 1;
        }
    }
    outcome(
        feasible.holds && failures == 0,
        format!(
            "alpha={alpha} beta0={beta0} lambda={:.3}: condition {:.4} >= {:.4}; 50 placements, worst mu {worst_mu:.3} < {bound:.3}, {failures} failures",
            g.lambda(),
            feasible.checks[0].lhs,
            feasible.checks[0].rhs
        ),
    )
}

fn barrier() -> Outcome {
    let mut probes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    while probes.len() < 20 {
        let alpha = rng.gen_range(0.01..0.3);
        let n = rng.gen_range(100..5000usize);
        let limit = (2.0 * alpha * n as f64).floor() as usize;
        if limit < 4 {
            continue;
        }
        let d = rng.gen_range(3..limit); // d + 1 <= 2·alpha·n
        probes.push((alpha, n, d));
    }
    let nonempty: usize = probes
        .par_iter()
        .map(|&(alpha, n, d)| {
            let r = pure_propagation_feasible(alpha, n, d, 2.0 * ((d - 1) as f64).sqrt(), 0.01).unwrap();
            (!r.feasible_assignments.is_empty() || !r.barrier_violated) as usize
        })
        .sum();
    let witness = pure_propagation_feasible(0.0001, 2000, 1500, 2.0 * 1499f64.sqrt(), 0.01).unwrap();
    outcome(
        nonempty == 0 && !witness.feasible_assignments.is_empty(),
        format!(
            "20 probes below the barrier: {nonempty} non-empty; linear-degree witness: {} feasible triples",
            witness.feasible_assignments.len()
        ),
    )
}

fn broadcast_matrix() -> Outcome {
    let start = Instant::now();
    let graph = json!({"kind": "random", "n": 1024, "d": 32, "seed": 1});
    let g = build_random_regular(1024, 32, 1).unwrap();
    let strategies = [
        json!({"kind": "random"}),
        json!({"kind": "ball"}),
        json!({"kind": "greedy-closure"}),
        json!({"kind": "around-initiation"}),
    ];
    let mut configs = Vec::new();
    for strategy in &strategies {
        for script in ScriptKind::EQUIVOCATING {
            for mode in ["correct", "faulty", "none"] {
                for seed in 0..25u64 {
                    let doc = json!({
                        "graph": graph,
                        "system": {"alpha": 16.0 / 1024.0, "seed": seed},
                        "protocol": {"beta": 0.25, "beta0": 0.25, "beta2": 0.5},
                        "faults": {"strategy": strategy, "f": 16},
                        "initiation": {"general": (seed * 41) % 1024, "mode": mode},
                        "adversary": {"strategy": script},
                        "complementary": {"c": 3, "s": 256, "u": 128, "latency": 3}
                    });
                    configs.push((mode, serde_json::from_value::<RunConfig>(doc).unwrap()));
                }
            }
        }
    }
    let results: Vec<(&str, bool, Option<usize>, String)> = configs
        .par_iter()
        .map(|(mode, cfg)| {
            let (_, r) = run_on(cfg, &g).unwrap();
            let p = &r.properties;
            let (ok, measured) = match *mode {
                "correct" => (p.heaviside_pass && p.measured_kh.is_some_and(|k| k <= 30), p.measured_kh),
                "none" => (p.unforgeability_pass && p.triggered == 0, None),
                _ => (p.dirac_pass && p.measured_kdelta.is_none_or(|k| k <= 30), p.measured_kdelta),
            };
            let tag = format!(
                "{} {} seed {}",
                cfg.faults.strategy.name(),
                cfg.adversary.strategy.name(),
                cfg.system.seed
            );
            (*mode, ok, measured, tag)
        })
        .collect();
    let elapsed = start.elapsed();
    let mut parts = Vec::new();
    let mut all = true;
    for mode in ["correct", "faulty", "none"] {
        let rows: Vec<_> = results.iter().filter(|r| r.0 == mode).collect();
        let passed = rows.iter().filter(|r| r.1).count();
        let worst = rows.iter().filter_map(|r| r.2).max();
        all &= passed == rows.len();
        parts.push(format!("{mode} {passed}/{} (worst {worst:?})", rows.len()));
        if let Some(bad) = rows.iter().find(|r| !r.1) {
            parts.push(format!("first failure: {}", bad.3));
        }
    }
    let fired = results.iter().filter(|r| r.0 == "faulty" && r.2.is_some()).count();
    outcome(
        all && elapsed < Duration::from_secs(600),
        format!(
            "lambda={:.4}; {}; faulty Generals that led to decisions: {fired}/400; {elapsed:.1?}",
            g.lambda(),
            parts.join(", ")
        ),
    )
}

fn reduction_identity() -> Outcome {
    let mut identical = 0;
    let mut total = 0;
    for seed in 0..20u64 {
        let d = [4usize, 6, 8][seed as usize % 3];
        let n = 40 + 2 * seed as usize;
        let beta2 = [0.3, 0.5, 0.7][seed as usize % 3];
        let base = json!({
            "graph": {"kind": "random", "n": n, "d": d, "seed": seed},
            "system": {"alpha": 0.0, "seed": seed},
            "protocol": {"beta": 0.3, "beta0": 0.3, "beta2": beta2},
            "initiation": {"general": seed as usize % n},
            "run": {"k_max": 30}
        });
        let pure: RunConfig = serde_json::from_value(base.clone()).unwrap();
        let mut doc = base;
        doc["complementary"] = json!({"c": 1, "s": d + 1, "u": threshold(beta2, d), "latency": 0});
        let comp: RunConfig = serde_json::from_value(doc).unwrap();
        let (tp, _) = run_config(&pure).unwrap();
        let (tc, _) = run_config(&comp).unwrap();
        total += 1;
        identical += (tp == tc) as usize;

        // with faults: same initiation, trigger sets built by the channel model
        let g = build_random_regular(n, d, seed).unwrap();
        let t = place_faults(&g, &FaultStrategy::Random, n / 10, seed, 0.3).unwrap();
        let general = (0..n).find(|i| !t.contains(i)).unwrap();
        let mut closed = vec![general];
        closed.extend_from_slice(g.neighbors(general));
        let init = InitiationSpec::correct(Some(general), closed, 0);
        let script = AdversaryScript::new(ScriptKind::EQUIVOCATING[seed as usize % 4]).with_seed(seed);
        let u = threshold(beta2, d);
        let model = LocalizedProtocolModel::select(&g, 1, d + 1, 0, Default::default()).unwrap();
        let dynamics = |rule| Dynamics::from_counts(threshold(0.3, d), rule, ThresholdMode::Prose, 30);
        let a = engine::run(&g, &t, &script, &init, dynamics(TriggerRule::neighbours(u))).unwrap();
        let b = engine::run(&g, &t, &script, &init, dynamics(model.trigger_rule(u))).unwrap();
        total += 1;
        identical += (a == b) as usize;
    }
    outcome(identical == total, format!("{identical}/{total} trace pairs identical"))
}

fn determinism() -> Outcome {
    let docs = [
        json!({
            "graph": {"kind": "random", "n": 256, "d": 16, "seed": 2},
            "system": {"alpha": 0.02, "seed": 5},
            "protocol": {"beta": 0.25, "beta0": 0.25, "beta2": 0.5},
            "initiation": {"mode": "faulty", "faulty_bits": "random"},
            "adversary": {"strategy": "flicker"},
            "complementary": {"c": 2, "s": 64, "u": 32}
        }),
        json!({
            "graph": {"kind": "petersen"},
            "system": {"alpha": 0.1, "seed": 1},
            "protocol": {"beta": 0.3, "beta0": 0.6, "beta2": 0.6},
            "adversary": {"strategy": "split-half"}
        }),
    ];
    let mut same = 0;
    for doc in &docs {
        let cfg: RunConfig = serde_json::from_value(doc.clone()).unwrap();
        let (t1, r1) = run_config(&cfg).unwrap();
        let (t2, r2) = run_config(&cfg).unwrap();
        let (t3, r3) = run_config(&r1.config).unwrap();
        let csv = [t1.to_csv().unwrap(), t2.to_csv().unwrap(), t3.to_csv().unwrap()];
        let rerun = csv[0] == csv[1] && r1.to_json().unwrap() == r2.to_json().unwrap();
        // the echo already holds the placed General, so only relocation notes may differ
        let echo = csv[1] == csv[2] && r3.config == r1.config && r3.properties == r1.properties;
        same += (rerun && echo) as usize;
    }
    outcome(
        same == docs.len(),
        format!("{same}/{} configs: reruns byte-identical, echo reruns reproduce trace and verdicts", docs.len()),
    )
}

/// Bootstrap percolation on its own terms: active nodes stay active, and a
/// node activates once `th` neighbours were active the round before.
fn percolation(g: &Graph, seeds: &[usize], th: usize, rounds: usize) -> Vec<Vec<bool>> {
    let mut state = vec![false; g.n()];
    for &s in seeds {
        state[s] = true;
    }
    let mut out = vec![state.clone()];
    for _ in 0..rounds {
        state = (0..g.n())
            .map(|i| state[i] || g.neighbors(i).iter().filter(|&&j| state[j]).count() >= th)
            .collect();
        out.push(state.clone());
    }
    out
}

fn percolation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut rounds, mut matching) = (0, 0);
    for k in 0..100u64 {
        let (n, d) = loop {
            let n = rng.gen_range(8..=64);
            let d = rng.gen_range(3..=10.min(n - 1));
            if n * d % 2 == 0 {
                break (n, d);
            }
        };
        let g = build_random_regular(n, d, k).unwrap();
        let beta = rng.gen_range(0.1..0.6);
        let count = rng.gen_range(1..=n / 4);
        let seeds = sample(&mut rng, n, count).into_vec();
        let init = InitiationSpec::correct(None, seeds.clone(), 0);
        let th = threshold(beta, d);
        let dynamics = Dynamics::from_counts(th, TriggerRule::neighbours(1), ThresholdMode::Prose, 20);
        let t = engine::run(&g, &[], &AdversaryScript::new(ScriptKind::Blast), &init, dynamics).unwrap();
        let oracle = percolation(&g, &seeds, th, 20);
        rounds += oracle.len();
        matching += t.x.iter().zip(&oracle).filter(|(a, b)| a == b).count();
    }
    outcome(matching == rounds, format!("{matching}/{rounds} rounds match over 100 graphs"))
}

fn main() {
    let start = Instant::now();
    let lps_start = Instant::now();
    let lps = build_lps_graph(5, 29).expect("LPS(5, 29)");
    let lps_time = lps_start.elapsed();

    let criteria: Vec<Criterion> = vec![
        ("spectral anchors", Box::new(spectral_anchors)),
        ("LPS construction", Box::new(|| lps_construction(&lps, lps_time))),
        ("edge-count deviation bound", Box::new(|| mixing_bound(&lps))),
        ("closure oracle equivalence", Box::new(closure_oracle)),
        ("closure size bound", Box::new(closure_bound)),
        ("linear-degree barrier", Box::new(barrier)),
        ("broadcast property matrix", Box::new(broadcast_matrix)),
        ("reduction identity", Box::new(reduction_identity)),
        ("determinism", Box::new(determinism)),
        ("percolation oracle", Box::new(percolation_oracle)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += !o.pass as usize;
        println!(
            "criterion {:>2} {:<28} {}  {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} of {} passed in {:.1?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}

use relaycast_wasm::{closure_curve, feasibility_map, propagation_curve};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn curve_saturates_on_a_complete_graph() {
    let cfg = r#"{
        "graph": {"kind": "complete", "n": 4},
        "system": {"alpha": 0.0, "seed": 1},
        "protocol": {"beta": 0.3, "beta0": 0.3, "beta2": 0.3},
        "initiation": {"general": 0}
    }"#;
    let v = parse(&propagation_curve(cfg).unwrap());
    assert_eq!(v["witness_size"], 4);
    assert_eq!(v["excited"][1], 1.0);
    assert_eq!(v["heaviside_pass"], true);
    assert!(propagation_curve("{}").is_err());
}

#[test]
fn map_is_empty_below_the_barrier() {
    let v = parse(&feasibility_map(0.1, 1000, 64, 0.0, 0.05).unwrap());
    assert_eq!(v["barrier_violated"], true);
    assert_eq!(v["cells"].as_array().unwrap().len(), 0);
    let v = parse(&feasibility_map(0.0, 100, 99, 1.0, 0.1).unwrap());
    assert!(v["feasible_triples"].as_u64().unwrap() > 0);
}

#[test]
fn closure_curve_starts_empty_and_grows() {
    let v = parse(&closure_curve(128, 8, 3, 0.4, "greedy-closure", 10).unwrap());
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 11);
    assert_eq!(points[0]["z"], 0);
    let zs: Vec<u64> = points.iter().map(|p| p["z"].as_u64().unwrap()).collect();
    assert!(zs.iter().enumerate().all(|(f, &z)| z >= f as u64));
    assert!(closure_curve(128, 8, 3, 0.4, "nope", 3).is_err());
}

#[test]
fn page_defaults_run() {
    let html = include_str!("../www/index.html");
    let start = html.find("<textarea id=\"run-config\">").unwrap() + "<textarea id=\"run-config\">".len();
    let end = html[start..].find("</textarea>").unwrap() + start;
    let v = parse(&propagation_curve(&html[start..end]).unwrap());
    assert_eq!(v["heaviside_pass"], true);
    assert!(parse(&feasibility_map(0.0001, 2000, 1500, 0.0, 0.02).unwrap())["feasible_triples"].as_u64().unwrap() > 0);
}

use confdesign_web::{gibbs_vs_exact, repair_random, run_trap_pairs};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn repaired_designs_are_feasible() {
    for seed in 0..20 {
        let v = parse(repair_random(seed));
        assert_eq!(v["after"]["feasible"], true, "seed {seed}: {v}");
        assert_eq!(v["after"]["violations"].as_array().unwrap().len(), 0);
        assert_eq!(v["before"]["values"].as_array().unwrap().len(), 29);
    }
    assert_eq!(repair_random(3), repair_random(3));
}

#[test]
fn trap_pairs_run_reports_a_curve() {
    let v = parse(run_trap_pairs("bmda", 60, 8, 100, 1));
    let curve = v["curve"].as_array().unwrap();
    assert!(!curve.is_empty() && curve.len() <= 9);
    let best: Vec<f64> = curve.iter().map(|r| r["best"].as_f64().unwrap()).collect();
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(v["optimum"], -20.0);
    assert_eq!(v["planted_pairs"].as_array().unwrap().len(), 10);
}

#[test]
fn unknown_algorithm_is_reported() {
    let v = parse(run_trap_pairs("moa", 10, 1, 10, 0));
    assert!(v["error"].as_str().unwrap().contains("unsupported algorithm"));
}

#[test]
fn gibbs_tracks_the_exact_law() {
    let v = parse(gibbs_vs_exact(200, 5000, 2));
    let exact: Vec<f64> = serde_json::from_value(v["exact"].clone()).unwrap();
    assert_eq!(exact.len(), 8);
    assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(v["total_variation"].as_f64().unwrap() <= 0.05, "{v}");
}

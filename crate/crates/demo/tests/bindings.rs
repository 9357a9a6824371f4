use serde_json::Value;
use zne_demo::{error_matrix_json, fold_circuit_json, zne_curve_json};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn fold_reports_inserted_gates() {
    let v = parse(&fold_circuit_json("cnot-chain:3", "uniform:0.01", "left", 3.0, 2.0, 1));
    assert_eq!(v["gates"], 9);
    assert_eq!(v["inserted"], 6);
    assert!(v["pairs"].is_null());
}

#[test]
fn noise_aware_fold_carries_threshold() {
    let text = "qubits 3\nh 0\ncx 0 1\ncx 1 2\ncx 1 2\ncx 1 2\nmeasure\n";
    let v = parse(&fold_circuit_json(text, "uniform:0.01", "noise-aware", 3.0, 2.0, 0));
    assert_eq!(v["threshold"]["epsilon_max"].as_f64().unwrap(), 0.06);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 2);
}

#[test]
fn curve_is_perfect_without_noise() {
    let v = parse(&zne_curve_json("bv:101", "uniform:0", "noise-aware", "1,2,3", 500, 2, 2.0, 4));
    assert_eq!(v["target"], "101");
    assert_eq!(v["linear"]["intercept"], 1.0);
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
}

#[test]
fn matrix_of_bundled_device() {
    let v = parse(&error_matrix_json("cnot-chain:2", "ibmq_mumbai"));
    assert_eq!(v["qubits"], serde_json::json!([25, 26]));
    assert_eq!(v["max_rate"].as_f64().unwrap(), 4.25e-3);
}

#[test]
fn errors_are_json() {
    let v = parse(&error_matrix_json("cnot-chain:4", "/etc/model.csv"));
    assert!(v["error"].as_str().unwrap().contains("no file access"));
    let v = parse(&zne_curve_json("circuit.txt", "uniform:0.01", "left", "1,2", 10, 1, 2.0, 0));
    assert!(v["error"].as_str().unwrap().contains("expected circuit text"));
    let v = parse(&fold_circuit_json("cnot-chain:2", "uniform:0.01", "sideways", 2.0, 2.0, 0));
    assert!(v["error"].is_string());
}

use std::io::Write;

use zne_core::{NoiseModel, ZneError};

#[test]
fn csv_and_json_files_round_trip() {
    let model = NoiseModel::ibmq_mumbai();
    let dir = tempfile::tempdir().unwrap();
    let json_path = dir.path().join("model.json");
    std::fs::write(&json_path, model.to_json().unwrap()).unwrap();
    assert_eq!(NoiseModel::load(&json_path).unwrap(), model);

    let csv_path = dir.path().join("small_device.csv");
    let mut f = std::fs::File::create(&csv_path).unwrap();
    writeln!(f, "Qubit,Prob meas0 prep1,Prob meas1 prep0,Pauli-X error,CNOT error,Readout length (ns)").unwrap();
    writeln!(f, "0,0.02,0.01,3e-4,0_1:0.011,700").unwrap();
    writeln!(f, "1,0.03,0.02,2e-4,1_0:0.011; 1_2:0.02,700").unwrap();
    writeln!(f, "2,0.01,0.01,1e-4,2_1:0.02,700").unwrap();
    drop(f);
    let small = NoiseModel::load(&csv_path).unwrap();
    assert_eq!(small.backend, "small_device");
    assert_eq!(small.num_qubits(), 3);
    assert_eq!(small.error(2, 1).unwrap(), 0.02);
    assert_eq!(small.one_qubit_error(1), 2e-4);
    assert_eq!(small.properties(0).unwrap()["readout length (ns)"], 700.0);
    assert!(matches!(small.error(0, 2), Err(ZneError::NoCoupling(0, 2))));
    assert_eq!(NoiseModel::from_json_str(&small.to_json().unwrap()).unwrap(), small);
}

#[test]
fn malformed_calibration_is_rejected() {
    let bad_number = "Qubit,CNOT error\n0,0_1:abc\n";
    assert!(matches!(NoiseModel::from_csv_str(bad_number), Err(ZneError::Calibration(_))));
    let out_of_range = "Qubit,Prob meas0 prep1,Prob meas1 prep0\n0,1.5,0.1\n";
    assert!(NoiseModel::from_csv_str(out_of_range).is_err());
    let no_qubit = "Name,CNOT error\n0,0_1:0.01\n";
    assert!(NoiseModel::from_csv_str(no_qubit).is_err());
    let conflicting = "Qubit,CNOT error\n0,0_1:0.01; 0_1:0.02\n";
    assert!(NoiseModel::from_csv_str(conflicting).is_err());
    assert!(NoiseModel::from_json_str("{\"backend\": 3}").is_err());
    assert!(NoiseModel::load("/nonexistent/calibration.csv").is_err());
}

#[test]
fn readout_can_be_switched_off() {
    let m = NoiseModel::ibmq_mumbai();
    assert!(m.has_readout_error());
    let quiet = m.without_readout();
    assert!(!quiet.has_readout_error());
    assert_eq!(quiet.error(0, 1).unwrap(), m.error(0, 1).unwrap());
}

#[test]
fn restriction_relabels() {
    let m = NoiseModel::ibmq_mumbai();
    let r = m.restrict(&[5, 8, 11]);
    assert_eq!(r.num_qubits(), 3);
    assert_eq!(r.error(0, 1).unwrap(), m.error(5, 8).unwrap());
    assert_eq!(r.error(1, 2).unwrap(), m.error(8, 11).unwrap());
    assert!(!r.is_coupled(0, 2));
    assert_eq!(r.readout(2), m.readout(11));
}

//! Browser bindings. Each export takes plain strings and numbers and returns
//! a JSON document; errors come back as `{"error": "..."}`.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

use zne_core::folding::{fold, FoldOptions, NoiseAwareOptions};
use zne_core::mapper::{map_circuit, MappedCircuit};
use zne_core::runner::{CircuitSource, ModelSource, RunConfig};
use zne_core::{accumulate, run, FitMethod, FoldMethod, NoiseModel, Result, ZneError};

/// Circuit text, or a generator such as `cnot-chain:4` / `bv:101`.
fn circuit_source(spec: &str) -> Result<CircuitSource> {
    let spec = spec.trim();
    if spec.contains('\n') || spec.starts_with("qubits") {
        Ok(CircuitSource::Text(spec.to_string()))
    } else {
        match spec.parse()? {
            CircuitSource::File(_) => Err(ZneError::InvalidArgument(format!(
                "expected circuit text, cnot-chain:N or bv:SECRET (got `{spec}`)"
            ))),
            s => Ok(s),
        }
    }
}

/// Model spec as accepted by the CLI, or calibration JSON.
fn model_source(spec: &str) -> Result<ModelSource> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        Ok(ModelSource::Inline(NoiseModel::from_json_str(spec)?))
    } else {
        match spec.parse()? {
            ModelSource::File(_) => Err(ZneError::InvalidArgument(format!(
                "no file access here; use ibmq_mumbai, uniform:P, line:E0,E1,... or JSON (got `{spec}`)"
            ))),
            m => Ok(m),
        }
    }
}

fn mapped(circuit: &str, model: &str) -> Result<MappedCircuit> {
    let logical = circuit_source(circuit)?.build()?;
    let model = model_source(model)?.load(logical.num_qubits())?;
    map_circuit(&logical, &model)
}

fn respond<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string()),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

pub fn fold_circuit_json(circuit: &str, model: &str, method: &str, lambda: f64, gamma: f64, seed: u64) -> String {
    respond((|| {
        let m = mapped(circuit, model)?;
        let method: FoldMethod = method.parse()?;
        let options = FoldOptions {
            seed,
            noise_aware: NoiseAwareOptions {
                gamma,
                ..NoiseAwareOptions::default()
            },
        };
        let folded = fold(method, &m.circuit, lambda, &m.model, &options)?;
        let ops: Vec<_> = folded
            .circuit
            .instructions()
            .iter()
            .map(|op| json!({ "gate": op.gate.to_string(), "folded": op.fold_inserted }))
            .collect();
        Ok(json!({
            "physical": m.physical,
            "gates": folded.circuit.unitary_part().len(),
            "inserted": folded.circuit.fold_inserted_count(),
            "text": folded.circuit.to_text(),
            "ops": ops,
            "threshold": folded.noise_aware.as_ref().map(|na| na.threshold),
            "pairs": folded.noise_aware.as_ref().map(|na| &na.pairs),
        }))
    })())
}

#[allow(clippy::too_many_arguments)]
pub fn zne_curve_json(
    circuit: &str,
    model: &str,
    method: &str,
    scales: &str,
    shots: u32,
    reps: u32,
    gamma: f64,
    seed: u64,
) -> String {
    respond((|| {
        let mut cfg = RunConfig::new(circuit_source(circuit)?, model_source(model)?, method.parse()?);
        cfg.scales = scales
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| ZneError::InvalidArgument(format!("bad scale `{s}`")))
            })
            .collect::<Result<_>>()?;
        cfg.shots = shots.into();
        cfg.reps = reps as usize;
        cfg.gamma = gamma;
        cfg.seed = seed;
        let r = run(&cfg)?;
        let points: Vec<_> = r
            .scales
            .iter()
            .map(|s| json!({ "lambda": s.lambda, "mean": s.mean, "std_err": s.std_err, "inserted": s.fold.fold_inserted }))
            .collect();
        let fit = |m| r.fit(m).map(|f| json!({ "intercept": f.intercept, "coefficients": f.coefficients }));
        Ok(json!({
            "target": r.target,
            "layout": r.layout,
            "engine": r.engine,
            "points": points,
            "unmitigated": r.unmitigated,
            "linear": fit(FitMethod::Linear),
            "richardson": fit(FitMethod::Richardson),
            "degenerate": r.degenerate,
        }))
    })())
}

pub fn error_matrix_json(circuit: &str, model: &str) -> String {
    respond((|| {
        let m = mapped(circuit, model)?;
        let matrix = accumulate(&m.circuit, &m.model)?;
        Ok(json!({
            "qubits": m.physical,
            "matrix": matrix.to_rows(),
            "max_rate": matrix.max_rate(),
            "swaps": m.swaps,
        }))
    })())
}

/// Maps and folds a circuit; returns the folded gate list and fold bookkeeping.
#[wasm_bindgen]
pub fn fold_circuit(circuit: &str, model: &str, method: &str, lambda: f64, gamma: f64, seed: u32) -> String {
    fold_circuit_json(circuit, model, method, lambda, gamma, seed.into())
}

/// Runs the full pipeline; `scales` is comma separated.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn zne_curve(
    circuit: &str,
    model: &str,
    method: &str,
    scales: &str,
    shots: u32,
    reps: u32,
    gamma: f64,
    seed: u32,
) -> String {
    zne_curve_json(circuit, model, method, scales, shots, reps, gamma, seed.into())
}

/// Error-rate matrix of the mapped circuit at scale 1.
#[wasm_bindgen]
pub fn error_matrix(circuit: &str, model: &str) -> String {
    error_matrix_json(circuit, model)
}

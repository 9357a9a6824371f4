//! Noiseless and noisy circuit execution.
//!
//! Basis index bit `q` is qubit `q`. Bitstrings are written with qubit 0
//! first, so `"100"` means qubit 0 measured 1.
//!
//! Noise model: every gate is followed by a depolarizing channel whose
//! strength is the gate's calibration error (one-qubit error for one-qubit
//! gates, symmetric CX error for CX). A SWAP runs as three CX, each with its
//! own channel. Readout confusion is applied per qubit at the end.

mod density;
mod expectation;
mod statevector;
mod trajectory;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Result, ZneError};
use crate::noise_model::NoiseModel;

pub use density::{simulate_density_matrix, DensityMatrix, MAX_DENSITY_QUBITS};
pub use expectation::{expectation, ExpectationEstimate, Observable};
pub use statevector::{simulate_exact, StateVector, MAX_STATEVECTOR_QUBITS};
pub use trajectory::{simulate_trajectories, MAX_TRAJECTORY_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NoisyStep {
    pub gate: Gate,
    pub error: f64,
}

/// Expands `circuit` into unitary steps with their depolarizing strength.
pub(crate) fn noisy_steps(circuit: &Circuit, model: &NoiseModel) -> Result<Vec<NoisyStep>> {
    let mut steps = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        match *g {
            Gate::MeasureAll => {}
            Gate::Cx(a, b) => steps.push(NoisyStep {
                gate: *g,
                error: model.error(a, b)?,
            }),
            Gate::Swap(a, b) => {
                let error = model.error(a, b)?;
                for gate in [Gate::Cx(a, b), Gate::Cx(b, a), Gate::Cx(a, b)] {
                    steps.push(NoisyStep { gate, error });
                }
            }
            ref one => steps.push(NoisyStep {
                gate: *one,
                error: model.one_qubit_error(one.qubits()[0]),
            }),
        }
    }
    Ok(steps)
}

pub fn bitstring(index: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn bitstring_index(bits: &str) -> Result<usize> {
    bits.chars().enumerate().try_fold(0usize, |acc, (q, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << q),
        other => Err(ZneError::InvalidArgument(format!(
            "bitstring contains `{other}`"
        ))),
    })
}

/// Outcome probabilities over all `2^n` basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    num_qubits: usize,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(num_qubits: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), 1 << num_qubits);
        Self { num_qubits, probs }
    }

    pub fn from_state(sv: &StateVector) -> Self {
        Self::new(sv.num_qubits(), sv.probabilities())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, bits: &str) -> Result<f64> {
        if bits.len() != self.num_qubits {
            return Err(ZneError::WidthMismatch {
                expected: self.num_qubits,
                got: bits.len(),
            });
        }
        Ok(self.probs[bitstring_index(bits)?])
    }

    /// Probability that the qubits at `positions` read `target`.
    pub fn marginal(&self, positions: &[usize], target: &[bool]) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                positions
                    .iter()
                    .zip(target)
                    .all(|(&q, &b)| (i >> q & 1 == 1) == b)
            })
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total_variation(&self, other: &Distribution) -> f64 {
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub fn most_likely(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Per-qubit readout confusion.
    pub fn apply_readout(&mut self, model: &NoiseModel) {
        for q in 0..self.num_qubits {
            let r = model.readout(q);
            if r.meas0_prep1 == 0.0 && r.meas1_prep0 == 0.0 {
                continue;
            }
            let bit = 1usize << q;
            for i in (0..self.probs.len()).filter(|i| i & bit == 0) {
                let (p0, p1) = (self.probs[i], self.probs[i | bit]);
                self.probs[i] = p0 * (1.0 - r.meas1_prep0) + p1 * r.meas0_prep1;
                self.probs[i | bit] = p0 * r.meas1_prep0 + p1 * (1.0 - r.meas0_prep1);
            }
        }
    }

    /// Draws `shots` samples.
    pub fn sample<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Counts {
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for p in &self.probs {
            acc += p;
            cdf.push(acc);
        }
        let total = acc;
        let mut tally = vec![0u64; self.probs.len()];
        for _ in 0..shots {
            let u = rng.gen::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(self.probs.len() - 1);
            tally[idx] += 1;
        }
        Counts::from_tally(self.num_qubits, &tally)
    }
}

/// Measurement histogram keyed by bitstring (qubit 0 first).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Counts(pub BTreeMap<String, u64>);

impl Counts {
    pub(crate) fn from_tally(num_qubits: usize, tally: &[u64]) -> Self {
        Counts(
            tally
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (bitstring(i, num_qubits), c))
                .collect(),
        )
    }

    pub fn shots(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.0.get(bits).copied().unwrap_or(0)
    }

    /// Reads each bitstring through `positions`: output character `i` is
    /// input character `positions[i]`.
    pub fn project(&self, positions: &[usize]) -> Counts {
        let mut out = BTreeMap::new();
        for (bits, &c) in &self.0 {
            let b = bits.as_bytes();
            let key: String = positions.iter().map(|&p| b[p] as char).collect();
            *out.entry(key).or_insert(0) += c;
        }
        Counts(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.0)?)
    }
}

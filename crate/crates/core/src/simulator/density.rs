//! Exact density-matrix simulation with depolarizing gate noise.
//!
//! The `2^n x 2^n` matrix is stored as a vector over `2n` bits: the row
//! index occupies bits `n..2n` and the column index bits `0..n`, so
//! `U rho U†` is `U` on the row bit and `conj(U)` on the column bit.

use num_complex::Complex64 as C64;

use super::statevector::{apply_cx, apply_matrix, apply_swap, conj, one_qubit_matrix};
use super::{noisy_steps, Distribution};
use crate::circuit::{Circuit, Gate};
use crate::error::{Result, ZneError};
use crate::noise_model::NoiseModel;

pub const MAX_DENSITY_QUBITS: usize = 10;

const TRACE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_DENSITY_QUBITS {
            return Err(ZneError::TooManyQubits {
                what: "density-matrix simulation",
                max: MAX_DENSITY_QUBITS,
                got: num_qubits,
            });
        }
        let mut data = vec![C64::new(0.0, 0.0); 1 << (2 * num_qubits)];
        data[0] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits, data })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Element `rho[row][col]`.
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row << self.num_qubits) | col]
    }

    pub fn apply(&mut self, g: &Gate) {
        let n = self.num_qubits;
        match *g {
            Gate::Cx(c, t) => {
                apply_cx(&mut self.data, n + c, n + t);
                apply_cx(&mut self.data, c, t);
            }
            Gate::Swap(a, b) => {
                apply_swap(&mut self.data, n + a, n + b);
                apply_swap(&mut self.data, a, b);
            }
            Gate::MeasureAll => {}
            ref one => {
                let m = one_qubit_matrix(one).expect("one-qubit gate");
                let q = one.qubits()[0];
                apply_matrix(&mut self.data, n + q, &m);
                apply_matrix(&mut self.data, q, &conj(&m));
            }
        }
    }

    /// Depolarizing channel on `qubits` (one or two):
    /// `rho -> (1 - p) rho + p / (4^k - 1) * sum_{P != I} P rho P`.
    ///
    /// Uses `sum_{all P} P rho P = 2^k Tr_q(rho) (x) I`, so only entries whose
    /// row and column agree on the affected qubits receive the traced term.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let n = self.num_qubits;
        let k = qubits.len() as u32;
        let others = (4f64.powi(k as i32) - 1.0).recip();
        let keep = 1.0 - p - p * others;
        let mix = p * others * 2f64.powi(k as i32);

        let row_mask: usize = qubits.iter().map(|q| 1usize << (n + q)).sum();
        let col_mask: usize = qubits.iter().map(|q| 1usize << q).sum();
        let both = row_mask | col_mask;
        let settings: Vec<usize> = (0..1usize << k)
            .map(|bits| {
                qubits
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| bits >> i & 1 == 1)
                    .map(|(_, q)| (1usize << (n + q)) | (1usize << q))
                    .sum()
            })
            .collect();

        let old = self.data.clone();
        for (idx, value) in self.data.iter_mut().enumerate() {
            let row_bits = (idx & row_mask) >> n;
            let col_bits = idx & col_mask;
            *value = old[idx] * keep;
            if row_bits == col_bits {
                let base = idx & !both;
                let traced: C64 = settings.iter().map(|s| old[base | s]).sum();
                *value += traced * mix;
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..1usize << self.num_qubits)
            .map(|i| self.get(i, i).re)
            .sum()
    }

    /// Diagonal, clamped at zero.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..1usize << self.num_qubits)
            .map(|i| self.get(i, i).re.max(0.0))
            .collect()
    }
}

/// Exact outcome distribution of `circuit` under `model`: each gate is
/// followed by depolarizing noise at its calibration error, then per-qubit
/// readout confusion is applied to the final populations.
pub fn simulate_density_matrix(circuit: &Circuit, model: &NoiseModel) -> Result<Distribution> {
    let steps = noisy_steps(circuit, model)?;
    let mut rho = DensityMatrix::zero(circuit.num_qubits())?;
    for step in &steps {
        rho.apply(&step.gate);
        if step.error > 0.0 {
            rho.depolarize(&step.gate.qubits(), step.error);
            let tr = rho.trace();
            if (tr - 1.0).abs() > TRACE_TOLERANCE {
                return Err(ZneError::InvalidArgument(format!(
                    "density matrix trace drifted to {tr}"
                )));
            }
        }
    }
    let mut dist = Distribution::new(circuit.num_qubits(), rho.probabilities());
    dist.apply_readout(model);
    Ok(dist)
}

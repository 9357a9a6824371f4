//! Error-rate matrix of a mapped circuit.
//!
//! Off-diagonal cell `(i, j)` sums the calibration CX error of every
//! two-qubit gate on the pair `{i, j}` (a SWAP counts as three CX). Diagonal
//! cell `(i, i)` sums the one-qubit error of every one-qubit gate on `i`.
//! Values are plain sums and can exceed 1 for long circuits; treat them as
//! scores rather than probabilities.

use serde::Serialize;

use crate::circuit::{Circuit, Gate};
use crate::error::{Result, ZneError};
use crate::noise_model::NoiseModel;

/// CX-equivalents charged for a SWAP.
pub const SWAP_CX_COST: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRateMatrix {
    n: usize,
    /// Row-major upper triangle, `i <= j`.
    cells: Vec<f64>,
}

impl ErrorRateMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            cells: vec![0.0; n * (n + 1) / 2],
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        debug_assert!(j < self.n);
        i * self.n - i * (i + 1) / 2 + j
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Cell lookup; `(i, j)` and `(j, i)` address the same cell.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[self.index(i, j)]
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let idx = self.index(i, j);
        self.cells[idx] += value;
    }

    /// Elementwise scaling.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            cells: self.cells.iter().map(|c| c * factor).collect(),
        }
    }

    /// Highest off-diagonal cell; 0 for an all-zero matrix.
    pub fn max_rate(&self) -> f64 {
        self.upper_pairs()
            .map(|(i, j)| self.get(i, j))
            .fold(0.0, f64::max)
    }

    /// Highest cell including the diagonal.
    pub fn max_rate_with_diagonal(&self) -> f64 {
        self.cells.iter().copied().fold(0.0, f64::max)
    }

    /// Off-diagonal `(i, j)` with `i < j`, row-major.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j)))
    }

    /// Full symmetric `n x n` rows, for display and JSON dumps.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn to_json(&self, labels: Option<&[usize]>) -> Result<String> {
        #[derive(Serialize)]
        struct Dump {
            qubits: Vec<usize>,
            matrix: Vec<Vec<f64>>,
            max_rate: f64,
        }
        let qubits = labels.map_or_else(|| (0..self.n).collect(), <[usize]>::to_vec);
        Ok(serde_json::to_string_pretty(&Dump {
            qubits,
            matrix: self.to_rows(),
            max_rate: self.max_rate(),
        })?)
    }
}

/// Error-rate matrix of `circuit` at scale factor 1.
pub fn accumulate(circuit: &Circuit, model: &NoiseModel) -> Result<ErrorRateMatrix> {
    let mut m = ErrorRateMatrix::zeros(circuit.num_qubits());
    for g in circuit.gates() {
        match *g {
            Gate::Cx(a, b) | Gate::Swap(a, b) => {
                let e = model.error(a, b).map_err(|_| ZneError::NonConformant(a, b))?;
                let units = if matches!(g, Gate::Swap(..)) {
                    SWAP_CX_COST
                } else {
                    1.0
                };
                m.add(a, b, units * e);
            }
            Gate::MeasureAll => {}
            ref one => {
                let q = one.qubits()[0];
                m.add(q, q, model.one_qubit_error(q));
            }
        }
    }
    Ok(m)
}

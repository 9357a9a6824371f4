//! Dense statevector simulation.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use crate::circuit::{Circuit, Gate};
use crate::error::{Result, ZneError};

pub const MAX_STATEVECTOR_QUBITS: usize = 20;

pub(crate) type Matrix2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Pauli operators, indexed 0..4 as I, X, Y, Z.
pub(crate) const PAULIS: [Matrix2; 4] = [
    [[ONE, ZERO], [ZERO, ONE]],
    [[ZERO, ONE], [ONE, ZERO]],
    [[ZERO, C64::new(0.0, -1.0)], [I, ZERO]],
    [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]],
];

/// 2x2 matrix of a one-qubit gate. `RZ(t) = diag(e^{-it/2}, e^{it/2})`.
pub(crate) fn one_qubit_matrix(g: &Gate) -> Option<Matrix2> {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    Some(match *g {
        Gate::X(_) => PAULIS[1],
        Gate::Z(_) => PAULIS[3],
        Gate::H(_) => [[h, h], [h, -h]],
        Gate::S(_) => [[ONE, ZERO], [ZERO, I]],
        Gate::T(_) => [[ONE, ZERO], [ZERO, C64::from_polar(1.0, FRAC_PI_4)]],
        Gate::Rz(_, t) => [
            [C64::from_polar(1.0, -t / 2.0), ZERO],
            [ZERO, C64::from_polar(1.0, t / 2.0)],
        ],
        _ => return None,
    })
}

pub(crate) fn conj(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[0][1].conj()],
        [m[1][0].conj(), m[1][1].conj()],
    ]
}

/// Applies `m` to bit `bit` of an amplitude vector.
pub(crate) fn apply_matrix(amps: &mut [C64], bit: usize, m: &Matrix2) {
    let stride = 1usize << bit;
    for base in (0..amps.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let (a0, a1) = (amps[i], amps[i + stride]);
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

pub(crate) fn apply_cx(amps: &mut [C64], control: usize, target: usize) {
    let (cm, tm) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

pub(crate) fn apply_swap(amps: &mut [C64], a: usize, b: usize) {
    let (am, bm) = (1usize << a, 1usize << b);
    for i in 0..amps.len() {
        if i & am != 0 && i & bm == 0 {
            amps.swap(i, (i & !am) | bm);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(ZneError::TooManyQubits {
                what: "statevector simulation",
                max: MAX_STATEVECTOR_QUBITS,
                got: num_qubits,
            });
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Applies a unitary gate; `MeasureAll` is a no-op here.
    pub fn apply(&mut self, g: &Gate) {
        match *g {
            Gate::Cx(c, t) => apply_cx(&mut self.amps, c, t),
            Gate::Swap(a, b) => apply_swap(&mut self.amps, a, b),
            Gate::MeasureAll => {}
            ref one => {
                let m = one_qubit_matrix(one).expect("one-qubit gate");
                apply_matrix(&mut self.amps, one.qubits()[0], &m);
            }
        }
    }

    /// Applies Pauli `index` (0..4 = I, X, Y, Z) to qubit `q`.
    pub(crate) fn apply_pauli(&mut self, q: usize, index: usize) {
        if index != 0 {
            apply_matrix(&mut self.amps, q, &PAULIS[index]);
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Noiseless statevector of `circuit` from `|0...0>`.
pub fn simulate_exact(circuit: &Circuit) -> Result<StateVector> {
    let mut sv = StateVector::zero(circuit.num_qubits())?;
    for g in circuit.gates() {
        sv.apply(g);
    }
    Ok(sv)
}

#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use zne_core::{Circuit, Gate, NoiseModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Random measured circuit over the full gate set.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Circuit {
    random_circuit_with(rng, n, len, true)
}

/// `phase_gates = false` restricts to gates whose dagger is themselves or an
/// `rz`, so inverses compare gate for gate.
pub fn random_circuit_with(rng: &mut ChaCha8Rng, n: usize, len: usize, phase_gates: bool) -> Circuit {
    let mut gates = Vec::with_capacity(len + 1);
    for _ in 0..len {
        let q = rng.gen_range(0..n);
        let kinds = if n > 1 { 8 } else { 6 };
        let g = match rng.gen_range(0..kinds) {
            0 => Gate::X(q),
            1 => Gate::H(q),
            2 => Gate::Z(q),
            3 if phase_gates => Gate::S(q),
            4 if phase_gates => Gate::T(q),
            3..=5 => Gate::Rz(q, rng.gen_range(-3.2..3.2)),
            6 | 7 => {
                let mut r = rng.gen_range(0..n - 1);
                if r >= q {
                    r += 1;
                }
                if rng.gen_bool(0.8) {
                    Gate::Cx(q, r)
                } else {
                    Gate::Swap(q, r)
                }
            }
            _ => unreachable!(),
        };
        gates.push(g);
    }
    gates.push(Gate::MeasureAll);
    Circuit::from_gates(n, gates).unwrap()
}

/// Every pair coupled with an error drawn from `[lo, hi)`.
pub fn complete_model(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> NoiseModel {
    let mut m = NoiseModel::new("complete", "", n);
    for a in 0..n {
        for b in a + 1..n {
            m.set_two_qubit_error(a, b, rng.gen_range(lo..hi)).unwrap();
        }
    }
    m
}

pub type Dense = Vec<Vec<C64>>;

fn one_qubit(g: &Gate) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phase = |t: f64| C64::from_polar(1.0, t);
    match *g {
        Gate::X(_) => [[z, o], [o, z]],
        Gate::H(_) => [[o * h, o * h], [o * h, -o * h]],
        Gate::Z(_) => [[o, z], [z, -o]],
        Gate::S(_) => [[o, z], [z, C64::new(0.0, 1.0)]],
        Gate::T(_) => [[o, z], [z, phase(std::f64::consts::FRAC_PI_4)]],
        Gate::Rz(_, t) => [[phase(-t / 2.0), z], [z, phase(t / 2.0)]],
        _ => unreachable!(),
    }
}

/// Full `2^n x 2^n` matrix of one gate; bit `q` of a basis index is qubit `q`.
pub fn gate_matrix(g: &Gate, n: usize) -> Dense {
    let dim = 1 << n;
    let mut m = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for col in 0..dim {
        match *g {
            Gate::Cx(c, t) => {
                let row = if col >> c & 1 == 1 { col ^ (1 << t) } else { col };
                m[row][col] = C64::new(1.0, 0.0);
            }
            Gate::Swap(a, b) => {
                let (ba, bb) = (col >> a & 1, col >> b & 1);
                let row = (col & !(1 << a) & !(1 << b)) | (bb << a) | (ba << b);
                m[row][col] = C64::new(1.0, 0.0);
            }
            _ => {
                let q = g.qubits()[0];
                let u = one_qubit(g);
                let bit = col >> q & 1;
                for out in 0..2 {
                    let row = (col & !(1 << q)) | (out << q);
                    m[row][col] = u[out][bit];
                }
            }
        }
    }
    m
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = vec![vec![C64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

/// Product of the gate matrices of the unitary part.
pub fn dense_unitary(c: &Circuit) -> Dense {
    let dim = 1 << c.num_qubits();
    let mut u: Dense = (0..dim)
        .map(|i| (0..dim).map(|j| C64::new((i == j) as u8 as f64, 0.0)).collect())
        .collect();
    for op in c.unitary_part() {
        u = matmul(&gate_matrix(&op.gate, c.num_qubits()), &u);
    }
    u
}

/// `|<a|b>|^2`.
pub fn overlap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

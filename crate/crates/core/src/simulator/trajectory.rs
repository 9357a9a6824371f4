//! Monte Carlo Pauli-trajectory sampling.
//!
//! Every shot runs the statevector and, after each gate, injects a uniformly
//! random non-identity Pauli on the gate's qubits with probability equal to
//! the gate's calibration error. Shot `i` draws from its own ChaCha stream
//! (`stream = i`) under the run seed, so counts do not depend on how shots
//! are spread over threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::statevector::StateVector;
use super::{noisy_steps, Counts, NoisyStep};
use crate::circuit::Circuit;
use crate::error::{Result, ZneError};
use crate::noise_model::NoiseModel;

pub const MAX_TRAJECTORY_QUBITS: usize = 20;

fn run_shot(
    n: usize,
    steps: &[NoisyStep],
    model: &NoiseModel,
    seed: u64,
    shot: u64,
) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    let mut sv = StateVector::zero(n).expect("size checked by caller");
    for step in steps {
        sv.apply(&step.gate);
        if step.error > 0.0 && rng.gen::<f64>() < step.error {
            let qubits = step.gate.qubits();
            let choices = 1usize << (2 * qubits.len());
            let pauli = rng.gen_range(1..choices);
            for (i, &q) in qubits.iter().enumerate() {
                sv.apply_pauli(q, (pauli >> (2 * i)) & 3);
            }
        }
    }
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut outcome = (1usize << n) - 1;
    for (i, a) in sv.amplitudes().iter().enumerate() {
        acc += a.norm_sqr();
        if u < acc {
            outcome = i;
            break;
        }
    }
    for q in 0..n {
        let r = model.readout(q);
        let flip = if outcome >> q & 1 == 1 {
            r.meas0_prep1
        } else {
            r.meas1_prep0
        };
        if flip > 0.0 && rng.gen::<f64>() < flip {
            outcome ^= 1 << q;
        }
    }
    outcome
}

/// Samples `shots` noisy executions of `circuit`. Deterministic for a fixed
/// `seed`.
pub fn simulate_trajectories(
    circuit: &Circuit,
    model: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Counts> {
    if shots == 0 {
        return Err(ZneError::InvalidArgument("shots must be positive".into()));
    }
    let n = circuit.num_qubits();
    if n > MAX_TRAJECTORY_QUBITS {
        return Err(ZneError::TooManyQubits {
            what: "trajectory simulation",
            max: MAX_TRAJECTORY_QUBITS,
            got: n,
        });
    }
    let steps = noisy_steps(circuit, model)?;

    #[cfg(feature = "parallel")]
    let outcomes: Vec<usize> = {
        use rayon::prelude::*;
        (0..shots)
            .into_par_iter()
            .map(|s| run_shot(n, &steps, model, seed, s))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<usize> = (0..shots)
        .map(|s| run_shot(n, &steps, model, seed, s))
        .collect();

    let mut tally = vec![0u64; 1 << n];
    for o in outcomes {
        tally[o] += 1;
    }
    Ok(Counts::from_tally(n, &tally))
}

//! Noise scaling by unitary folding.
//!
//! Four methods are provided:
//!
//! * [`fold_global`]: `U -> U (U†U)^n` followed by a partial fold of the last
//!   `s` gates.
//! * [`fold_from_left`]: every gate `G -> G (G†G)^n`, with one extra fold on
//!   the first `s` gates.
//! * [`fold_random`]: as above, with the extra folds on a seeded random
//!   subset of `s` gates.
//! * [`fold_noise_aware`]: inserts `CX·CX` pairs per coupled qubit pair
//!   until the pair's accumulated calibration error reaches the scaled
//!   threshold `eps_max = (eps_circuit + eps_circuit * lambda) / gamma`.
//!
//! For the first three, `k = round(d (lambda - 1) / 2)`, `n = k / d` and
//! `s = k % d`, giving `d (2n + 1) + 2s` gates. Halves round up.
//!
//! Noise-aware folding never lets a pair exceed `eps_max`: a fold is added
//! only when the pair total plus `2 * error` stays within the threshold.
//! At `lambda = 1` the circuit is returned untouched, since that scale is
//! the unfolded reference point.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::accumulation::{accumulate, ErrorRateMatrix};
use crate::circuit::{inverse, Circuit, Gate, Instruction};
use crate::error::{Result, ZneError};
use crate::noise_model::NoiseModel;

/// Relative slack on threshold comparisons, absorbing rounding in the sums.
pub const THRESHOLD_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldMethod {
    Global,
    Left,
    Random,
    NoiseAware,
}

impl FoldMethod {
    pub const ALL: [FoldMethod; 4] = [
        FoldMethod::Global,
        FoldMethod::Left,
        FoldMethod::Random,
        FoldMethod::NoiseAware,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FoldMethod::Global => "global",
            FoldMethod::Left => "left",
            FoldMethod::Random => "random",
            FoldMethod::NoiseAware => "noise-aware",
        }
    }
}

impl fmt::Display for FoldMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FoldMethod {
    type Err = ZneError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "global" => Ok(FoldMethod::Global),
            "left" | "from-left" | "fold-from-left" => Ok(FoldMethod::Left),
            "random" | "at-random" => Ok(FoldMethod::Random),
            "noise-aware" | "noise_aware" | "noiseaware" => Ok(FoldMethod::NoiseAware),
            other => Err(ZneError::InvalidArgument(format!(
                "unknown folding method `{other}` (expected global, left, random or noise-aware)"
            ))),
        }
    }
}

/// Whole and partial fold counts for a gate-count based fold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldPlan {
    pub lambda: f64,
    pub depth: usize,
    /// Total single folds, `k = n * depth + s`.
    pub k: usize,
    pub n: usize,
    pub s: usize,
    /// Gate positions receiving the extra fold; `subset.len() == s`.
    pub subset: Vec<usize>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 1.0 {
        Ok(())
    } else {
        Err(ZneError::InvalidArgument(format!(
            "scale factor must be >= 1, got {lambda}"
        )))
    }
}

/// Closest integer to `depth * (lambda - 1) / 2`, halves rounded up.
pub fn fold_count(depth: usize, lambda: f64) -> usize {
    let x = depth as f64 * (lambda - 1.0) / 2.0;
    // Snap values within rounding noise of a half-integer so that e.g.
    // lambda = 1.2 on 5 gates counts as exactly 0.5.
    let twice = (2.0 * x).round();
    let x = if (2.0 * x - twice).abs() < 1e-9 { twice / 2.0 } else { x };
    (x + 0.5).floor().max(0.0) as usize
}

impl FoldPlan {
    pub fn new(depth: usize, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if depth == 0 {
            return Err(ZneError::InvalidArgument(
                "cannot fold a circuit without gates".into(),
            ));
        }
        let k = fold_count(depth, lambda);
        Ok(Self {
            lambda,
            depth,
            k,
            n: k / depth,
            s: k % depth,
            subset: Vec::new(),
        })
    }

    /// `d (2n + 1) + 2s`.
    pub fn folded_gate_count(&self) -> usize {
        self.depth * (2 * self.n + 1) + 2 * self.s
    }
}

pub fn fold_global(circuit: &Circuit, lambda: f64) -> Result<Circuit> {
    let plan = FoldPlan::new(circuit.depth(), lambda)?;
    let unitary = circuit.unitary_part();
    let dagger: Vec<Instruction> = inverse(unitary)?
        .into_iter()
        .map(|op| Instruction::folded(op.gate))
        .collect();
    let forward: Vec<Instruction> = unitary.iter().map(|op| Instruction::folded(op.gate)).collect();

    let mut out: Vec<Instruction> = unitary.to_vec();
    for _ in 0..plan.n {
        out.extend_from_slice(&dagger);
        out.extend_from_slice(&forward);
    }
    // Partial fold: L_d† ... L_{d-s+1}† L_{d-s+1} ... L_d
    let tail = plan.depth - plan.s;
    out.extend_from_slice(&dagger[..plan.s]);
    out.extend_from_slice(&forward[tail..]);
    circuit.with_unitary(out)
}

pub fn fold_from_left(circuit: &Circuit, lambda: f64) -> Result<Circuit> {
    let mut plan = FoldPlan::new(circuit.depth(), lambda)?;
    plan.subset = (0..plan.s).collect();
    fold_locally(circuit, &plan)
}

pub fn fold_random(circuit: &Circuit, lambda: f64, seed: u64) -> Result<Circuit> {
    let mut plan = FoldPlan::new(circuit.depth(), lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subset = rand::seq::index::sample(&mut rng, plan.depth, plan.s).into_vec();
    subset.sort_unstable();
    plan.subset = subset;
    fold_locally(circuit, &plan)
}

/// Folds every gate `plan.n` times and the gates in `plan.subset` once more.
pub fn fold_locally(circuit: &Circuit, plan: &FoldPlan) -> Result<Circuit> {
    let unitary = circuit.unitary_part();
    if unitary.len() != plan.depth {
        return Err(ZneError::InvalidArgument(format!(
            "plan is for depth {}, circuit has depth {}",
            plan.depth,
            unitary.len()
        )));
    }
    let mut extra = vec![false; plan.depth];
    for &j in &plan.subset {
        if j >= plan.depth || std::mem::replace(&mut extra[j], true) {
            return Err(ZneError::InvalidArgument(format!(
                "invalid or repeated fold position {j}"
            )));
        }
    }
    let mut out = Vec::with_capacity(plan.folded_gate_count());
    for (j, op) in unitary.iter().enumerate() {
        out.push(*op);
        let dagger = op.gate.dagger()?;
        let folds = plan.n + usize::from(extra[j]);
        for _ in 0..folds {
            out.push(Instruction::folded(dagger));
            out.push(Instruction::folded(op.gate));
        }
    }
    circuit.with_unitary(out)
}

/// Threshold of the noise-aware fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledThreshold {
    pub epsilon_circuit: f64,
    pub epsilon_lambda: f64,
    pub gamma: f64,
    pub epsilon_max: f64,
}

impl ScaledThreshold {
    pub fn new(epsilon_circuit: f64, lambda: f64, gamma: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(ZneError::InvalidArgument(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let epsilon_lambda = epsilon_circuit * lambda;
        Ok(Self {
            epsilon_circuit,
            epsilon_lambda,
            gamma,
            epsilon_max: (epsilon_circuit + epsilon_lambda) / gamma,
        })
    }

    /// `epsilon_max` plus the rounding slack used by every comparison.
    pub fn limit(&self) -> f64 {
        self.epsilon_max * (1.0 + THRESHOLD_RTOL)
    }
}

/// Where noise-aware folds go.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldPlacement {
    /// Right after the last two-qubit gate on the pair.
    #[default]
    Inline,
    /// At the end of the circuit, before the measurement.
    Append,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseAwareOptions {
    pub gamma: f64,
    pub placement: FoldPlacement,
    /// Let one-qubit (diagonal) rates set `eps_circuit`.
    pub include_one_qubit_rates: bool,
}

impl Default for NoiseAwareOptions {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            placement: FoldPlacement::Inline,
            include_one_qubit_rates: false,
        }
    }
}

/// Fold bookkeeping for one qubit pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFold {
    pub pair: (usize, usize),
    pub gate_error: f64,
    /// Accumulated rate before folding.
    pub base_rate: f64,
    /// Number of inserted `CX·CX` pairs.
    pub folds: usize,
    pub final_rate: f64,
}

impl PairFold {
    /// Within the threshold, and one more fold would overshoot it.
    pub fn is_maximal(&self, threshold: &ScaledThreshold) -> bool {
        let limit = threshold.limit();
        self.final_rate <= limit && self.final_rate + 2.0 * self.gate_error > limit
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseAwareFold {
    pub circuit: Circuit,
    pub threshold: ScaledThreshold,
    pub pairs: Vec<PairFold>,
    #[serde(skip)]
    pub matrix: ErrorRateMatrix,
}

impl NoiseAwareFold {
    pub fn total_folds(&self) -> usize {
        self.pairs.iter().map(|p| p.folds).sum()
    }
}

fn folds_within(base: f64, gate_error: f64, limit: f64) -> usize {
    if gate_error <= 0.0 || base + 2.0 * gate_error > limit {
        return 0;
    }
    let mut folds = ((limit - base) / (2.0 * gate_error)).floor() as usize;
    while folds > 0 && base + 2.0 * gate_error * folds as f64 > limit {
        folds -= 1;
    }
    while base + 2.0 * gate_error * (folds + 1) as f64 <= limit {
        folds += 1;
    }
    folds
}

/// Noise-aware folding of a topology-conformant circuit.
pub fn fold_noise_aware(
    circuit: &Circuit,
    lambda: f64,
    model: &NoiseModel,
    options: &NoiseAwareOptions,
) -> Result<NoiseAwareFold> {
    let matrix = accumulate(circuit, model)?;
    let epsilon_circuit = if options.include_one_qubit_rates {
        matrix.max_rate_with_diagonal()
    } else {
        matrix.max_rate()
    };
    let threshold = ScaledThreshold::new(epsilon_circuit, lambda, options.gamma)?;
    let unitary = circuit.unitary_part();

    // Last two-qubit gate on each pair, and the CX orientation to reuse.
    let mut anchor: std::collections::BTreeMap<(usize, usize), (usize, Gate)> =
        std::collections::BTreeMap::new();
    for (pos, op) in unitary.iter().enumerate() {
        if let Some(pair) = op.gate.pair() {
            let cx = match op.gate {
                Gate::Cx(a, b) => Gate::Cx(a, b),
                _ => anchor
                    .get(&pair)
                    .map(|&(_, g)| g)
                    .unwrap_or(Gate::Cx(pair.0, pair.1)),
            };
            anchor.insert(pair, (pos, cx));
        }
    }

    let mut pairs = Vec::new();
    let mut inserts: Vec<Vec<Instruction>> = vec![Vec::new(); unitary.len() + 1];
    for (i, j) in matrix.upper_pairs() {
        let base = matrix.get(i, j);
        let Some(&(pos, cx)) = anchor.get(&(i, j)) else {
            continue;
        };
        if base <= 0.0 {
            continue;
        }
        let gate_error = model.error(i, j)?;
        let folds = if lambda == 1.0 {
            0
        } else {
            folds_within(base, gate_error, threshold.limit())
        };
        let slot = match options.placement {
            FoldPlacement::Inline => pos,
            FoldPlacement::Append => unitary.len(),
        };
        for _ in 0..folds {
            inserts[slot].push(Instruction::folded(cx));
            inserts[slot].push(Instruction::folded(cx));
        }
        pairs.push(PairFold {
            pair: (i, j),
            gate_error,
            base_rate: base,
            folds,
            final_rate: base + 2.0 * gate_error * folds as f64,
        });
    }

    let mut out = Vec::with_capacity(unitary.len() + inserts.iter().map(Vec::len).sum::<usize>());
    for (pos, op) in unitary.iter().enumerate() {
        out.push(*op);
        out.extend_from_slice(&inserts[pos]);
    }
    out.extend_from_slice(&inserts[unitary.len()]);

    Ok(NoiseAwareFold {
        circuit: circuit.with_unitary(out)?,
        threshold,
        pairs,
        matrix,
    })
}

/// Parameters shared by the method dispatcher.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FoldOptions {
    pub seed: u64,
    pub noise_aware: NoiseAwareOptions,
}

#[derive(Debug, Clone)]
pub struct Folded {
    pub circuit: Circuit,
    pub noise_aware: Option<NoiseAwareFold>,
}

/// Applies `method` at scale `lambda`. `model` is only consulted by the
/// noise-aware method.
pub fn fold(
    method: FoldMethod,
    circuit: &Circuit,
    lambda: f64,
    model: &NoiseModel,
    options: &FoldOptions,
) -> Result<Folded> {
    let plain = |circuit| Folded {
        circuit,
        noise_aware: None,
    };
    Ok(match method {
        FoldMethod::Global => plain(fold_global(circuit, lambda)?),
        FoldMethod::Left => plain(fold_from_left(circuit, lambda)?),
        FoldMethod::Random => plain(fold_random(circuit, lambda, options.seed)?),
        FoldMethod::NoiseAware => {
            let na = fold_noise_aware(circuit, lambda, model, &options.noise_aware)?;
            Folded {
                circuit: na.circuit.clone(),
                noise_aware: Some(na),
            }
        }
    })
}

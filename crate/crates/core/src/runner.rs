//! End-to-end pipeline: build, map, fold at each scale, simulate, reduce to
//! expectation values, average repetitions and extrapolate.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::accumulation::{accumulate, ErrorRateMatrix};
use crate::circuit::{bernstein_vazirani, cnot_chain, parse_circuit, Circuit};
use crate::error::{Result, StageExt, ZneError};
use crate::extrapolation::{extrapolate, ExtrapolationFit, ExtrapolationInput, FitMethod, Point};
use crate::folding::{fold, FoldMethod, FoldOptions, FoldPlacement, NoiseAwareOptions};
use crate::mapper::{map_circuit, premapped, MappedCircuit};
use crate::noise_model::NoiseModel;
use crate::simulator::{
    bitstring, expectation, simulate_density_matrix, simulate_exact, simulate_trajectories,
    Distribution, ExpectationEstimate, Observable, MAX_DENSITY_QUBITS,
};

/// Scale factors used when none are given.
pub const DEFAULT_SCALES: [f64; 4] = [1.0, 1.5, 2.0, 2.5];
pub const DEFAULT_REPS: usize = 5;
pub const DEFAULT_SHOTS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitSource {
    File(PathBuf),
    /// Inline circuit text.
    Text(String),
    CnotChain(usize),
    BernsteinVazirani(String),
}

impl CircuitSource {
    pub fn build(&self) -> Result<Circuit> {
        match self {
            CircuitSource::File(path) => parse_circuit(&crate::error::read_file(path)?),
            CircuitSource::Text(text) => parse_circuit(text),
            CircuitSource::CnotChain(n) => cnot_chain(*n),
            CircuitSource::BernsteinVazirani(secret) => bernstein_vazirani(secret),
        }
    }

    /// Qubits whose outcome defines success. The BV ancilla is excluded.
    fn data_qubits(&self, circuit: &Circuit) -> usize {
        match self {
            CircuitSource::BernsteinVazirani(secret) => secret.len(),
            _ => circuit.num_qubits(),
        }
    }

    /// The same generator at a total width of `qubits`.
    pub fn resized(&self, qubits: usize) -> Result<Self> {
        match self {
            CircuitSource::CnotChain(_) => Ok(CircuitSource::CnotChain(qubits)),
            CircuitSource::BernsteinVazirani(_) if qubits >= 2 => {
                Ok(CircuitSource::BernsteinVazirani("1".repeat(qubits - 1)))
            }
            CircuitSource::BernsteinVazirani(_) => Err(ZneError::InvalidArgument(
                "bv needs at least 2 qubits".into(),
            )),
            _ => Err(ZneError::InvalidArgument(
                "sweeps need a generated circuit (cnot-chain or bv)".into(),
            )),
        }
    }
}

impl FromStr for CircuitSource {
    type Err = ZneError;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(n) = s.strip_prefix("cnot-chain:") {
            let n = n
                .parse()
                .map_err(|_| ZneError::InvalidArgument(format!("bad qubit count in `{s}`")))?;
            Ok(CircuitSource::CnotChain(n))
        } else if let Some(secret) = s.strip_prefix("bv:") {
            Ok(CircuitSource::BernsteinVazirani(secret.to_string()))
        } else {
            Ok(CircuitSource::File(PathBuf::from(s)))
        }
    }
}

impl fmt::Display for CircuitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitSource::File(p) => write!(f, "{}", p.display()),
            CircuitSource::Text(_) => f.write_str("<inline>"),
            CircuitSource::CnotChain(n) => write!(f, "cnot-chain:{n}"),
            CircuitSource::BernsteinVazirani(s) => write!(f, "bv:{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    File(PathBuf),
    IbmqMumbai,
    /// Line of fixed length with one CX error on every edge.
    UniformLine { qubits: usize, cx_error: f64 },
    /// Line sized to the circuit with one CX error on every edge.
    Uniform(f64),
    /// Line with per-edge errors; edge `i` joins qubits `i` and `i + 1`.
    Line(Vec<f64>),
    Inline(NoiseModel),
}

impl ModelSource {
    pub fn load(&self, circuit_qubits: usize) -> Result<NoiseModel> {
        match self {
            ModelSource::File(path) => NoiseModel::load(path),
            ModelSource::IbmqMumbai => Ok(NoiseModel::ibmq_mumbai()),
            ModelSource::UniformLine { qubits, cx_error } => NoiseModel::uniform_line(*qubits, *cx_error),
            ModelSource::Uniform(p) => NoiseModel::uniform_line(circuit_qubits, *p),
            ModelSource::Line(errors) => NoiseModel::line(errors),
            ModelSource::Inline(model) => Ok(model.clone()),
        }
    }
}

impl FromStr for ModelSource {
    type Err = ZneError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || ZneError::InvalidArgument(format!("bad noise model spec `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        if s == "ibmq_mumbai" {
            Ok(ModelSource::IbmqMumbai)
        } else if let Some(rest) = s.strip_prefix("uniform-line:") {
            let (n, p) = rest.split_once(':').ok_or_else(bad)?;
            Ok(ModelSource::UniformLine {
                qubits: n.parse().map_err(|_| bad())?,
                cx_error: num(p)?,
            })
        } else if let Some(p) = s.strip_prefix("uniform:") {
            Ok(ModelSource::Uniform(num(p)?))
        } else if let Some(list) = s.strip_prefix("line:") {
            Ok(ModelSource::Line(list.split(',').map(num).collect::<Result<_>>()?))
        } else {
            Ok(ModelSource::File(PathBuf::from(s)))
        }
    }
}

impl fmt::Display for ModelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSource::File(p) => write!(f, "{}", p.display()),
            ModelSource::IbmqMumbai => f.write_str("ibmq_mumbai"),
            ModelSource::UniformLine { qubits, cx_error } => {
                write!(f, "uniform-line:{qubits}:{cx_error}")
            }
            ModelSource::Uniform(p) => write!(f, "uniform:{p}"),
            ModelSource::Line(errors) => {
                let list: Vec<String> = errors.iter().map(f64::to_string).collect();
                write!(f, "line:{}", list.join(","))
            }
            ModelSource::Inline(m) => write!(f, "<inline {}>", m.backend),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Density matrix up to its qubit limit, trajectories beyond.
    #[default]
    Auto,
    Density,
    Trajectory,
}

impl FromStr for Engine {
    type Err = ZneError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Engine::Auto),
            "density" => Ok(Engine::Density),
            "traj" | "trajectory" => Ok(Engine::Trajectory),
            _ => Err(ZneError::InvalidArgument(format!(
                "unknown engine `{s}` (expected auto, density or traj)"
            ))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Auto => "auto",
            Engine::Density => "density",
            Engine::Trajectory => "traj",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub circuit: CircuitSource,
    pub model: ModelSource,
    pub method: FoldMethod,
    /// Ascending, starting at 1.
    pub scales: Vec<f64>,
    pub gamma: f64,
    pub shots: u64,
    pub reps: usize,
    pub seed: u64,
    pub engine: Engine,
    /// Run the noise-adaptive layout and router. When off, the circuit must
    /// already be written on coupled device qubits.
    pub map: bool,
    pub placement: FoldPlacement,
    /// Keep readout confusion from the model.
    pub readout: bool,
    /// Fits beyond linear and Richardson.
    pub extra_fits: Vec<FitMethod>,
    /// Also fit each repetition on its own.
    pub per_rep_fits: bool,
}

impl RunConfig {
    pub fn new(circuit: CircuitSource, model: ModelSource, method: FoldMethod) -> Self {
        Self {
            circuit,
            model,
            method,
            scales: DEFAULT_SCALES.to_vec(),
            gamma: 2.0,
            shots: DEFAULT_SHOTS,
            reps: DEFAULT_REPS,
            seed: 0,
            engine: Engine::Auto,
            map: true,
            placement: FoldPlacement::Inline,
            readout: true,
            extra_fits: Vec::new(),
            per_rep_fits: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ZneError::InvalidArgument(m));
        if self.scales.first() != Some(&1.0) {
            return bad("scale factors must start at 1".into());
        }
        if let Some(w) = self.scales.windows(2).find(|w| !(w[1] > w[0] && w[1].is_finite())) {
            return bad(format!("scale factors must be strictly ascending ({} then {})", w[0], w[1]));
        }
        if self.reps == 0 || self.shots == 0 {
            return bad("repetitions and shots must be positive".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        Ok(())
    }

    /// SHA-256 over the configuration and the fully loaded model.
    pub fn hash(&self, model: &NoiseModel) -> Result<String> {
        let mut h = Sha256::new();
        h.update(self.canonical().as_bytes());
        h.update(model.to_json()?.as_bytes());
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }

    fn canonical(&self) -> String {
        let circuit = match &self.circuit {
            CircuitSource::Text(t) => t.clone(),
            other => other.to_string(),
        };
        format!(
            "circuit={circuit}\nmodel={}\nmethod={}\nscales={:?}\ngamma={}\nshots={}\nreps={}\n\
             seed={}\nengine={}\nmap={}\nplacement={:?}\nreadout={}\nfits={:?}\n",
            self.model,
            self.method,
            self.scales,
            self.gamma,
            self.shots,
            self.reps,
            self.seed,
            self.engine,
            self.map,
            self.placement,
            self.readout,
            self.extra_fits,
        )
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent seed for a labelled sub-task of a run.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix(base), |acc, &p| splitmix(acc ^ splitmix(p)))
}

const SIM_STREAM: u64 = 0;
const FOLD_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSummary {
    pub pair: (usize, usize),
    pub folds: usize,
    pub base_rate: f64,
    pub final_rate: f64,
    pub maximal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldSummary {
    pub gates: usize,
    pub two_qubit_gates: usize,
    pub fold_inserted: usize,
    pub epsilon_circuit: Option<f64>,
    pub epsilon_max: Option<f64>,
    /// Noise-aware pairs, in compact register labels.
    pub pairs: Vec<PairSummary>,
}

impl FoldSummary {
    /// Every noise-aware pair sits at its threshold.
    pub fn all_maximal(&self) -> bool {
        self.pairs.iter().all(|p| p.maximal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepEstimate {
    pub rep: usize,
    pub seed: u64,
    pub estimate: ExpectationEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleResult {
    pub lambda: f64,
    pub reps: Vec<RepEstimate>,
    /// Mean of the per-repetition means.
    pub mean: f64,
    /// Standard error of `mean`.
    pub std_err: f64,
    pub shots: u64,
    pub fold: FoldSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub backend: String,
    pub calibration_date: String,
    pub device_qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    /// Fold method name, or `unmitigated`.
    pub method: String,
    pub qubits: usize,
    pub engine: Engine,
    pub target: String,
    /// `(logical, device)` placement before and after routing.
    pub layout: Vec<(usize, usize)>,
    pub final_layout: Vec<(usize, usize)>,
    pub swaps: usize,
    pub scales: Vec<ScaleResult>,
    /// Averaged λ = 1 mean.
    pub unmitigated: f64,
    pub fits: Vec<ExtrapolationFit>,
    /// Linear intercept of each repetition, when requested.
    pub rep_intercepts: Vec<f64>,
    /// Some averaged point has zero successes.
    pub degenerate: bool,
    pub provenance: Provenance,
    #[serde(skip)]
    pub matrix: ErrorRateMatrix,
    /// Device qubit behind each compact register index of `matrix`.
    pub physical: Vec<usize>,
}

impl RunResult {
    pub fn fit(&self, method: FitMethod) -> Option<&ExtrapolationFit> {
        self.fits.iter().find(|f| f.method == method)
    }

    pub fn intercept(&self, method: FitMethod) -> Option<f64> {
        self.fit(method).map(|f| f.intercept)
    }

    pub fn matrix_json(&self) -> Result<String> {
        self.matrix.to_json(Some(&self.physical))
    }
}

/// A circuit ready for the scale loop.
struct Prepared {
    mapped: MappedCircuit,
    observable: Observable,
    target: String,
    qubits: usize,
    engine: Engine,
    hash: String,
}

fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate().stage("config")?;
    let logical = config.circuit.build().stage("circuit")?;
    let mut model = config.model.load(logical.num_qubits()).stage("noise-model")?;
    if !config.readout {
        model = model.without_readout();
    }
    let hash = config.hash(&model).stage("noise-model")?;
    let mapped = if config.map {
        map_circuit(&logical, &model)
    } else {
        premapped(&logical, &model)
    }
    .stage("mapping")?;

    let data = config.circuit.data_qubits(&logical);
    let ideal = Distribution::from_state(&simulate_exact(&logical).stage("simulation")?);
    let target: String = bitstring(ideal.most_likely(), logical.num_qubits())
        .chars()
        .take(data)
        .collect();
    let positions = mapped.readout_positions()[..data].to_vec();
    let observable = Observable::success_on(&target, positions).stage("expectation")?;

    let device = mapped.circuit.num_qubits();
    let engine = match config.engine {
        Engine::Auto if device <= MAX_DENSITY_QUBITS => Engine::Density,
        Engine::Auto => Engine::Trajectory,
        e => e,
    };
    Ok(Prepared {
        qubits: logical.num_qubits(),
        mapped,
        observable,
        target,
        engine,
        hash,
    })
}

fn summarize(folded: &crate::folding::Folded) -> FoldSummary {
    let c = &folded.circuit;
    let mut summary = FoldSummary {
        gates: c.unitary_part().len(),
        two_qubit_gates: c.two_qubit_count(),
        fold_inserted: c.fold_inserted_count(),
        epsilon_circuit: None,
        epsilon_max: None,
        pairs: Vec::new(),
    };
    if let Some(na) = &folded.noise_aware {
        summary.epsilon_circuit = Some(na.threshold.epsilon_circuit);
        summary.epsilon_max = Some(na.threshold.epsilon_max);
        summary.pairs = na
            .pairs
            .iter()
            .map(|p| PairSummary {
                pair: p.pair,
                folds: p.folds,
                base_rate: p.base_rate,
                final_rate: p.final_rate,
                maximal: p.is_maximal(&na.threshold),
            })
            .collect();
    }
    summary
}

fn combine(reps: &[RepEstimate]) -> (f64, f64, u64) {
    let r = reps.len() as f64;
    let mean = reps.iter().map(|e| e.estimate.mean).sum::<f64>() / r;
    let std_err = reps.iter().map(|e| e.estimate.std_err.powi(2)).sum::<f64>().sqrt() / r;
    let shots = reps.iter().map(|e| e.estimate.shots).sum();
    (mean, std_err, shots)
}

fn fit_all(points: Vec<Point>, methods: &[FitMethod]) -> Result<Vec<ExtrapolationFit>> {
    if points.len() < 2 {
        return Ok(Vec::new());
    }
    let input = ExtrapolationInput::new(points)?;
    methods.iter().map(|&m| extrapolate(&input, m)).collect()
}

/// Runs the full pipeline for one configuration.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    run_labelled(config, config.method.name())
}

fn run_labelled(config: &RunConfig, label: &str) -> Result<RunResult> {
    let prep = prepare(config)?;
    let mapped = &prep.mapped;
    let model = &mapped.model;
    let matrix = accumulate(&mapped.circuit, model).stage("accumulation")?;

    let mut scales = Vec::with_capacity(config.scales.len());
    for (li, &lambda) in config.scales.iter().enumerate() {
        let li = li as u64;
        let mut reps = Vec::with_capacity(config.reps);
        let mut summary = None;
        let mut density: Option<(Circuit, Distribution)> = None;
        for rep in 0..config.reps {
            let options = FoldOptions {
                seed: derive_seed(config.seed, &[rep as u64, li, FOLD_STREAM]),
                noise_aware: NoiseAwareOptions {
                    gamma: config.gamma,
                    placement: config.placement,
                    ..NoiseAwareOptions::default()
                },
            };
            let folded = fold(config.method, &mapped.circuit, lambda, model, &options).stage("folding")?;
            if lambda == 1.0 && folded.circuit != mapped.circuit {
                return Err(ZneError::InvalidArgument(
                    "scale 1 changed the circuit".into(),
                ))
                .stage("folding");
            }
            if summary.is_none() {
                summary = Some(summarize(&folded));
            }

            let seed = derive_seed(config.seed, &[rep as u64, li, SIM_STREAM]);
            let counts = match prep.engine {
                Engine::Trajectory => {
                    simulate_trajectories(&folded.circuit, model, config.shots, seed)
                }
                _ => {
                    // Folds are deterministic except for random folding, so
                    // the exact distribution is usually shared across reps.
                    let reuse = matches!(&density, Some((c, _)) if *c == folded.circuit);
                    if !reuse {
                        let dist = simulate_density_matrix(&folded.circuit, model);
                        density = Some((folded.circuit.clone(), dist.stage("simulation")?));
                    }
                    let dist = &density.as_ref().expect("filled above").1;
                    Ok(dist.sample(config.shots, &mut ChaCha8Rng::seed_from_u64(seed)))
                }
            }
            .stage("simulation")?;
            let estimate = expectation(&counts, &prep.observable, lambda).stage("expectation")?;
            reps.push(RepEstimate {
                rep,
                seed,
                estimate,
            });
        }
        let (mean, std_err, shots) = combine(&reps);
        scales.push(ScaleResult {
            lambda,
            reps,
            mean,
            std_err,
            shots,
            fold: summary.expect("at least one repetition"),
        });
    }

    let mut methods = vec![FitMethod::Linear, FitMethod::Richardson];
    for &m in &config.extra_fits {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let averaged = scales
        .iter()
        .map(|s| Point {
            lambda: s.lambda,
            y: s.mean,
            std_err: s.std_err,
        })
        .collect();
    let fits = fit_all(averaged, &methods).stage("extrapolation")?;
    let rep_intercepts = if config.per_rep_fits && scales.len() >= 2 {
        (0..config.reps)
            .map(|r| {
                let pts = scales
                    .iter()
                    .map(|s| Point {
                        lambda: s.lambda,
                        y: s.reps[r].estimate.mean,
                        std_err: s.reps[r].estimate.std_err,
                    })
                    .collect();
                fit_all(pts, &[FitMethod::Linear]).map(|f| f[0].intercept)
            })
            .collect::<Result<_>>()
            .stage("extrapolation")?
    } else {
        Vec::new()
    };

    Ok(RunResult {
        method: label.to_string(),
        qubits: prep.qubits,
        engine: prep.engine,
        target: prep.target,
        layout: mapped.initial.pairs(),
        final_layout: mapped.final_layout.pairs(),
        swaps: mapped.swaps,
        unmitigated: scales[0].mean,
        degenerate: scales.iter().any(|s| s.mean == 0.0),
        scales,
        fits,
        rep_intercepts,
        provenance: Provenance {
            seed: config.seed,
            config_hash: prep.hash,
            backend: model.backend.clone(),
            calibration_date: model.date.clone(),
            device_qubits: mapped.physical.len(),
        },
        matrix,
        physical: mapped.physical.clone(),
    })
}

/// A sweep column: a folding method, or the λ = 1 baseline alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMethod {
    Unmitigated,
    Fold(FoldMethod),
}

impl SweepMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SweepMethod::Unmitigated => "unmitigated",
            SweepMethod::Fold(m) => m.name(),
        }
    }
}

impl FromStr for SweepMethod {
    type Err = ZneError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "unmitigated" {
            Ok(SweepMethod::Unmitigated)
        } else {
            s.parse().map(SweepMethod::Fold)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub method: SweepMethod,
    pub qubits: usize,
    pub seed: u64,
    pub outcome: std::result::Result<RunResult, String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Ordered by qubit count, then method as given.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn results(&self) -> impl Iterator<Item = &RunResult> {
        self.cells.iter().filter_map(|c| c.outcome.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.outcome.is_err())
    }
}

fn sweep_cell(template: &RunConfig, method: SweepMethod, qubits: usize) -> SweepCell {
    // Methods at one width share seeds, so their λ = 1 runs coincide.
    let seed = derive_seed(template.seed, &[qubits as u64]);
    let outcome = (|| {
        let mut config = template.clone();
        config.circuit = template.circuit.resized(qubits).stage("config")?;
        config.seed = seed;
        if let SweepMethod::Fold(m) = method {
            config.method = m;
        } else {
            config.scales = vec![1.0];
        }
        run_labelled(&config, method.name())
    })()
    .map_err(|e| e.to_string());
    SweepCell {
        method,
        qubits,
        seed,
        outcome,
    }
}

/// Runs `template` for every `(qubits, method)` cell. Cell failures are
/// recorded and the sweep carries on. `workers` bounds the thread pool; the
/// output does not depend on it.
pub fn sweep(
    template: &RunConfig,
    qubits: std::ops::RangeInclusive<usize>,
    methods: &[SweepMethod],
    workers: usize,
) -> Result<SweepResult> {
    if qubits.is_empty() || methods.is_empty() {
        return Err(ZneError::InvalidArgument("empty sweep".into()));
    }
    let jobs: Vec<(usize, SweepMethod)> = qubits
        .flat_map(|q| methods.iter().map(move |&m| (q, m)))
        .collect();

    #[cfg(feature = "parallel")]
    let cells = {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| ZneError::InvalidArgument(e.to_string()))?;
        pool.install(|| {
            jobs.par_iter()
                .map(|&(q, m)| sweep_cell(template, m, q))
                .collect()
        })
    };
    #[cfg(not(feature = "parallel"))]
    let cells = {
        let _ = workers;
        jobs.iter().map(|&(q, m)| sweep_cell(template, m, q)).collect()
    };
    Ok(SweepResult { cells })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Detail rows, a blank line, then one summary row per result.
pub fn results_csv<'a>(results: impl IntoIterator<Item = &'a RunResult> + Clone) -> Result<String> {
    let mut detail = csv::Writer::from_writer(Vec::new());
    detail.write_record(["method", "qubits", "lambda", "rep", "mean", "std_err", "shots", "seed"])?;
    for r in results.clone() {
        let q = r.qubits.to_string();
        for s in &r.scales {
            let lambda = s.lambda.to_string();
            for e in &s.reps {
                detail.write_record([
                    r.method.as_str(),
                    &q,
                    &lambda,
                    &e.rep.to_string(),
                    &e.estimate.mean.to_string(),
                    &e.estimate.std_err.to_string(),
                    &e.estimate.shots.to_string(),
                    &e.seed.to_string(),
                ])?;
            }
            detail.write_record([
                r.method.as_str(),
                &q,
                &lambda,
                "mean",
                &s.mean.to_string(),
                &s.std_err.to_string(),
                &s.shots.to_string(),
                &r.provenance.seed.to_string(),
            ])?;
        }
    }
    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(["method", "qubits", "intercept_linear", "intercept_richardson", "unmitigated"])?;
    for r in results {
        summary.write_record([
            r.method.clone(),
            r.qubits.to_string(),
            opt(r.intercept(FitMethod::Linear)),
            opt(r.intercept(FitMethod::Richardson)),
            r.unmitigated.to_string(),
        ])?;
    }
    let into = |w: csv::Writer<Vec<u8>>| -> Result<String> {
        let bytes = w.into_inner().map_err(|e| ZneError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    };
    Ok(format!("{}\n{}", into(detail)?, into(summary)?))
}

/// CSV for a sweep; failed cells follow in a third section.
pub fn sweep_csv(sweep: &SweepResult) -> Result<String> {
    let ok: Vec<&RunResult> = sweep.results().collect();
    let mut out = results_csv(ok.iter().copied())?;
    let failures: Vec<&SweepCell> = sweep.failures().collect();
    if !failures.is_empty() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "qubits", "error"])?;
        for c in failures {
            let msg = c.outcome.as_ref().err().map(String::as_str).unwrap_or_default();
            w.write_record([c.method.name(), &c.qubits.to_string(), msg])?;
        }
        let bytes = w.into_inner().map_err(|e| ZneError::Io(e.into_error()))?;
        out.push('\n');
        out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    }
    Ok(out)
}

/// gnuplot data: one indexed block per result with `lambda mean std_err`
/// rows, then one block per method with `qubits unmitigated linear richardson`.
pub fn gnuplot_data<'a>(results: impl IntoIterator<Item = &'a RunResult> + Clone) -> String {
    let mut out = String::new();
    for r in results.clone() {
        out.push_str(&format!("# {} qubits={}\n# lambda mean std_err\n", r.method, r.qubits));
        for s in &r.scales {
            out.push_str(&format!("{} {} {}\n", s.lambda, s.mean, s.std_err));
        }
        out.push_str("\n\n");
    }
    let mut methods: Vec<&str> = Vec::new();
    for r in results.clone() {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let nan = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |x| x.to_string());
    for m in methods {
        out.push_str(&format!("# {m} by width\n# qubits unmitigated intercept_linear intercept_richardson\n"));
        for r in results.clone().into_iter().filter(|r| r.method == m) {
            out.push_str(&format!(
                "{} {} {} {}\n",
                r.qubits,
                r.unmitigated,
                nan(r.intercept(FitMethod::Linear)),
                nan(r.intercept(FitMethod::Richardson)),
            ));
        }
        out.push_str("\n\n");
    }
    out
}

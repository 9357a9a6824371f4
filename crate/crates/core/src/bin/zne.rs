use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zne_core::folding::{fold, FoldOptions, FoldPlacement, NoiseAwareOptions};
use zne_core::mapper::{map_circuit, premapped};
use zne_core::runner::{
    gnuplot_data, results_csv, sweep, sweep_csv, CircuitSource, Engine, ModelSource, RunConfig,
    SweepMethod,
};
use zne_core::{run, FitMethod, FoldMethod, Result, ZneError};

#[derive(Parser)]
#[command(name = "zne", version, about = "Zero-noise extrapolation with noise-aware folding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fold, simulate and extrapolate one circuit.
    Run(RunArgs),
    /// Run a generated circuit over a range of widths and methods.
    Sweep(SweepArgs),
    /// Print the mapped circuit folded at one scale factor.
    Fold(FoldArgs),
}

#[derive(Args)]
struct Common {
    /// Circuit file, `cnot-chain:N` or `bv:SECRET`.
    #[arg(long)]
    circuit: String,
    /// Calibration file (CSV or JSON), `ibmq_mumbai`, `uniform-line:N:P`,
    /// `uniform:P` or `line:E0,E1,...`.
    #[arg(long, default_value = "ibmq_mumbai")]
    noise_model: String,
    /// Noise-aware threshold divisor.
    #[arg(long, default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat the circuit as already placed on device qubits.
    #[arg(long)]
    no_map: bool,
    /// Put noise-aware folds at the end instead of after each pair's last gate.
    #[arg(long)]
    append_folds: bool,
    /// Drop readout confusion from the model.
    #[arg(long)]
    no_readout: bool,
}

#[derive(Args)]
struct Experiment {
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,2.5")]
    scales: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    shots: u64,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// auto, density or traj.
    #[arg(long, default_value = "auto")]
    engine: String,
    /// Extra fits, e.g. `poly2`.
    #[arg(long, value_delimiter = ',')]
    fits: Vec<String>,
    /// Also report a linear intercept per repetition.
    #[arg(long)]
    per_rep_fits: bool,
    /// Results CSV. A gnuplot `.dat` file is written next to it. Prints to
    /// stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    experiment: Experiment,
    #[arg(long, default_value = "noise-aware")]
    fold: String,
    /// Write the error-rate matrix of the mapped circuit as JSON.
    #[arg(long)]
    dump_matrix: bool,
    /// Write the full result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    experiment: Experiment,
    /// Width range, `2..8` (inclusive) or a single width.
    #[arg(long, default_value = "2..8")]
    qubits: String,
    #[arg(long, value_delimiter = ',', default_value = "unmitigated,left,random,noise-aware")]
    methods: Vec<String>,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 4)]
    workers: usize,
}

#[derive(Args)]
struct FoldArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "noise-aware")]
    fold: String,
    #[arg(long)]
    scale: f64,
}

fn stage<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ ZneError::Stage { .. } => e,
        e => ZneError::Stage {
            stage,
            source: Box::new(e),
        },
    })
}

fn config(common: &Common, exp: &Experiment, method: FoldMethod) -> Result<RunConfig> {
    let mut c = stage(
        "config",
        (|| {
            Ok(RunConfig::new(
                common.circuit.parse()?,
                common.noise_model.parse()?,
                method,
            ))
        })(),
    )?;
    c.gamma = common.gamma;
    c.seed = common.seed;
    c.map = !common.no_map;
    c.readout = !common.no_readout;
    c.placement = placement(common);
    c.scales = exp.scales.clone();
    c.shots = exp.shots;
    c.reps = exp.reps;
    c.per_rep_fits = exp.per_rep_fits;
    c.engine = stage("config", exp.engine.parse::<Engine>())?;
    c.extra_fits = stage(
        "config",
        exp.fits.iter().map(|f| f.parse::<FitMethod>()).collect(),
    )?;
    Ok(c)
}

fn placement(common: &Common) -> FoldPlacement {
    if common.append_folds {
        FoldPlacement::Append
    } else {
        FoldPlacement::Inline
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    stage("output", fs::write(path, contents).map_err(ZneError::from))
}

fn emit(out: Option<&Path>, csv: &str, dat: &str) -> Result<()> {
    match out {
        Some(path) => {
            write(path, csv)?;
            write(&path.with_extension("dat"), dat)
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>> {
    let bad = || ZneError::InvalidArgument(format!("bad qubit range `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once("..") {
        Some((a, b)) => Ok(num(a)?..=num(b.trim_start_matches('='))?),
        None => {
            let n = num(s)?;
            Ok(n..=n)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let method = stage("config", args.fold.parse::<FoldMethod>())?;
    let cfg = config(&args.common, &args.experiment, method)?;
    let result = run(&cfg)?;
    let csv = stage("output", results_csv([&result]))?;
    emit(args.experiment.out.as_deref(), &csv, &gnuplot_data([&result]))?;

    eprintln!(
        "{} on {} qubits ({} engine), layout {:?}, {} swaps",
        result.method, result.qubits, result.engine, result.layout, result.swaps
    );
    for f in &result.fits {
        eprintln!("  {:<10} E(0) = {:.6}", f.method.to_string(), f.intercept);
    }
    eprintln!("  unmitigated     = {:.6}", result.unmitigated);
    if result.degenerate {
        eprintln!("  warning: a scaled circuit never succeeded; extrapolation is unreliable");
    }
    if args.dump_matrix {
        let json = stage("output", result.matrix_json())?;
        match &args.experiment.out {
            Some(out) => write(&out.with_extension("matrix.json"), &json)?,
            None => eprintln!("{json}"),
        }
    }
    if let Some(path) = &args.json {
        let json = stage("output", serde_json::to_string_pretty(&result).map_err(ZneError::from))?;
        write(path, &json)?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let range = stage("config", parse_range(&args.qubits))?;
    let methods: Vec<SweepMethod> = stage(
        "config",
        args.methods.iter().map(|m| m.parse()).collect(),
    )?;
    let cfg = config(&args.common, &args.experiment, FoldMethod::NoiseAware)?;
    let result = sweep(&cfg, range, &methods, args.workers)?;
    let csv = stage("output", sweep_csv(&result))?;
    let ok: Vec<_> = result.results().collect();
    emit(args.experiment.out.as_deref(), &csv, &gnuplot_data(ok.iter().copied()))?;
    for c in result.failures() {
        eprintln!(
            "cell {} / {} qubits failed: {}",
            c.method.name(),
            c.qubits,
            c.outcome.as_ref().err().map(String::as_str).unwrap_or_default()
        );
    }
    Ok(())
}

fn cmd_fold(args: FoldArgs) -> Result<()> {
    let common = &args.common;
    let method = stage("config", args.fold.parse::<FoldMethod>())?;
    let source: CircuitSource = stage("config", common.circuit.parse())?;
    let logical = stage("circuit", source.build())?;
    let model_source: ModelSource = stage("config", common.noise_model.parse())?;
    let mut model = stage("noise-model", model_source.load(logical.num_qubits()))?;
    if common.no_readout {
        model = model.without_readout();
    }
    let mapped = stage(
        "mapping",
        if common.no_map {
            premapped(&logical, &model)
        } else {
            map_circuit(&logical, &model)
        },
    )?;
    let options = FoldOptions {
        seed: common.seed,
        noise_aware: NoiseAwareOptions {
            gamma: common.gamma,
            placement: placement(common),
            ..NoiseAwareOptions::default()
        },
    };
    let folded = stage(
        "folding",
        fold(method, &mapped.circuit, args.scale, &mapped.model, &options),
    )?;
    print!("{}", folded.circuit.to_text());
    eprintln!("# device qubits {:?}", mapped.physical);
    eprintln!(
        "# {} gates, {} inserted by folding",
        folded.circuit.unitary_part().len(),
        folded.circuit.fold_inserted_count()
    );
    if let Some(na) = &folded.noise_aware {
        eprintln!(
            "# eps_circuit {} eps_max {}",
            na.threshold.epsilon_circuit, na.threshold.epsilon_max
        );
        for p in &na.pairs {
            eprintln!(
                "# pair {:?}: {} folds, rate {} -> {}",
                p.pair, p.folds, p.base_rate, p.final_rate
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fold(a) => cmd_fold(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zne: error: {e}");
            ExitCode::FAILURE
        }
    }
}

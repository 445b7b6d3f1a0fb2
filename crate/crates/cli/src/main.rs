//! `punn`: batch driver for integral inspection, pUCCD VQE, and network
//! training. Every artifact is JSON with a `format_version` field and an
//! echo of the run configuration; per-step traces are CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use punn_core::hamiltonian::build_sz_hamiltonian;
use punn_core::integrals::hf_reference_energy;
use punn_core::oracles::{doci_ground_energy, fci_energy_slater_condon};
use punn_core::solvers::{baseline_compare, train_punn, vqe_puccd, StepStats, TrainReport};
use punn_core::{CircuitKind, IntegralSet, Mode, TrainConfig};

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] punn_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("VQE did not converge within the iteration cap")]
    NotConverged,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        fn core(e: &punn_core::Error) -> u8 {
            use punn_core::Error::*;
            match e {
                Parse { .. } | OpenShell { .. } | Io(_) | Json(_) => 2,
                InvalidArgument(_) | TooLarge(..) => 1,
                Seed { source, .. } => core(source),
                _ => 3,
            }
        }
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => core(e),
            CliError::Io { .. } | CliError::Json { .. } | CliError::Csv(_) => 2,
            CliError::NotConverged => 3,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "punn", version, about = "Hybrid pUCCD circuit + neural network ground-state solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for independent seeds (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Global seed; seed i of a multi-seed run uses SEED + i.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Orbital counts, HF reference, and FCI/DOCI oracle energies.
    Inspect(InspectArgs),
    /// Optimize the pUCCD circuit angles.
    Vqe(VqeArgs),
    /// Train the amplitude network on top of a circuit.
    Train(TrainArgs),
}

#[derive(Args, Debug, Serialize)]
struct InspectArgs {
    #[arg(long)]
    fcidump: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Exact,
    Shots,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CircuitArg {
    Puccd,
    Hadamard,
}

#[derive(Args, Debug, Serialize)]
struct VqeArgs {
    #[arg(long)]
    fcidump: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[arg(long)]
    fcidump: PathBuf,
    /// Circuit-angle artifact from `punn vqe`; exact VQE runs when absent.
    #[arg(long)]
    theta: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1024)]
    shots: usize,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// `hadamard` runs the pUCCD-vs-Hadamard comparison.
    #[arg(long, value_enum, default_value_t = CircuitArg::Puccd)]
    circuit: CircuitArg,
    /// Network steps in exact mode (default 64000).
    #[arg(long)]
    steps: Option<u64>,
    /// Steps between resamples in shot mode.
    #[arg(long, default_value_t = 30)]
    resample_interval: u64,
    /// Sampling rounds in shot mode.
    #[arg(long, default_value_t = 15)]
    macro_iterations: u64,
    /// Enumerate the perturbation-circuit distribution instead of sampling it.
    #[arg(long)]
    exact_phi: bool,
    /// Interleave circuit finite-difference passes with network training.
    #[arg(long)]
    joint: bool,
    /// Report path; the trace CSV goes next to it as `<stem>.trace.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Explicit trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn load_integrals(path: &Path) -> CliResult<IntegralSet> {
    match IntegralSet::from_fcidump_file(path) {
        Err(punn_core::Error::Io(source)) => Err(CliError::Io { path: path.to_path_buf(), source }),
        other => Ok(other?),
    }
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    match out {
        Some(p) => fs::write(p, text + "\n").map_err(|source| CliError::Io { path: p.to_path_buf(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn config_echo(command: &str, args: &impl Serialize, cli: &Cli) -> serde_json::Value {
    json!({ "command": command, "args": args, "seed": cli.seed, "threads": cli.threads })
}

fn cmd_inspect(args: &InspectArgs, cli: &Cli) -> CliResult<()> {
    let ints = load_integrals(&args.fcidump)?;
    let sz = build_sz_hamiltonian(&ints)?;
    let report = json!({
        "format_version": FORMAT_VERSION,
        "config": config_echo("inspect", args, cli),
        "n_orb": ints.n_orb,
        "n_alpha": ints.n_elec_alpha,
        "n_beta": ints.n_elec_beta,
        "e_nuc": ints.e_nuc,
        "hf_energy": hf_reference_energy(&ints)?,
        "fci_energy": fci_energy_slater_condon(&ints)?,
        "doci_energy": doci_ground_energy(&sz, ints.n_pairs()?)?,
    });
    emit(&report, args.out.as_deref())
}

fn mode(arg: ModeArg, shots: usize) -> CliResult<Mode> {
    match arg {
        ModeArg::Exact => Ok(Mode::Exact),
        ModeArg::Shots if shots == 0 => Err(CliError::Usage("--shots must be at least 1".into())),
        ModeArg::Shots => Ok(Mode::Shots(shots)),
    }
}

fn cmd_vqe(args: &VqeArgs, cli: &Cli) -> CliResult<()> {
    let ints = load_integrals(&args.fcidump)?;
    let sz = build_sz_hamiltonian(&ints)?;
    let n_pairs = ints.n_pairs()?;
    let result = vqe_puccd(&sz, n_pairs, mode(args.mode, args.shots)?, cli.seed)?;
    let report = json!({
        "format_version": FORMAT_VERSION,
        "config": config_echo("vqe", args, cli),
        "theta": result.theta,
        "energy": result.energy,
        "exact_energy": result.exact_energy,
        "doci_energy": doci_ground_energy(&sz, n_pairs)?,
        "converged": result.converged,
        "evaluations": result.evaluations,
        "mode": result.mode,
        "seed": result.seed,
    });
    emit(&report, args.out.as_deref())?;
    if !result.converged {
        return Err(CliError::NotConverged);
    }
    Ok(())
}

#[derive(Deserialize)]
struct ThetaArtifact {
    theta: Vec<f64>,
}

fn read_theta(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let art: ThetaArtifact =
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    Ok(art.theta)
}

fn trace_path(args: &TrainArgs) -> Option<PathBuf> {
    args.trace.clone().or_else(|| {
        args.out.as_ref().map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            p.with_file_name(format!("{stem}.trace.csv"))
        })
    })
}

/// One row per step, one column per run, plus across-seed mean and std.
fn write_trace(path: &Path, reports: &[(&str, &TrainReport)]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["step".to_string()];
    let mut stats = Vec::new();
    for (name, rep) in reports {
        header.extend(rep.runs.iter().map(|r| format!("{name}_seed_{}", r.seed)));
        header.push(format!("{name}_mean"));
        header.push(format!("{name}_std"));
        stats.push(StepStats::from_report(rep));
    }
    w.write_record(&header)?;
    let rows = reports.iter().flat_map(|(_, r)| r.runs.iter().map(|x| x.trace.len())).min().unwrap_or(0);
    for step in 0..rows {
        let mut rec = vec![step.to_string()];
        for ((_, rep), st) in reports.iter().zip(&stats) {
            rec.extend(rep.runs.iter().map(|r| format!("{:.12}", r.trace[step])));
            rec.push(format!("{:.12}", st.mean[step]));
            rec.push(format!("{:.12}", st.std[step]));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(())
}

fn cmd_train(args: &TrainArgs, cli: &Cli) -> CliResult<()> {
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    let ints = load_integrals(&args.fcidump)?;
    let theta = match &args.theta {
        Some(p) => read_theta(p)?,
        None => {
            let sz = build_sz_hamiltonian(&ints)?;
            vqe_puccd(&sz, ints.n_pairs()?, Mode::Exact, cli.seed)?.theta
        }
    };
    let mode = mode(args.mode, args.shots)?;
    let base = match mode {
        Mode::Exact => TrainConfig::exact(),
        Mode::Shots(n) => TrainConfig::shots(n),
    };
    let cfg = TrainConfig {
        max_nn_steps: args.steps.unwrap_or(base.max_nn_steps),
        resample_interval: args.resample_interval,
        macro_iterations: args.macro_iterations,
        seeds: args.seeds,
        k: args.k,
        joint_finetune: args.joint,
        seed: cli.seed,
        exact_phi: args.exact_phi,
        threads: cli.threads,
        ..base
    };
    let fci = fci_energy_slater_condon(&ints)?;
    let config = config_echo("train", args, cli);
    let trace = trace_path(args);
    let report = match args.circuit {
        CircuitArg::Puccd => {
            let rep = train_punn(&ints, &theta, &TrainConfig { circuit: CircuitKind::Puccd, ..cfg.clone() })?;
            if let Some(p) = &trace {
                write_trace(p, &[("puccd", &rep)])?;
            }
            json!({
                "format_version": FORMAT_VERSION,
                "config": config,
                "train_config": cfg,
                "theta": theta,
                "fci_energy": fci,
                "e_best": rep.e_best,
                "error": rep.e_best - fci,
                "best_seed": rep.best_seed,
                "runs": summarize(&rep, fci),
            })
        }
        CircuitArg::Hadamard => {
            let cmp = baseline_compare(&ints, &theta, &cfg)?;
            if let Some(p) = &trace {
                write_trace(p, &[("puccd", &cmp.puccd), ("hadamard", &cmp.hadamard)])?;
            }
            json!({
                "format_version": FORMAT_VERSION,
                "config": config,
                "train_config": cfg,
                "theta": theta,
                "fci_energy": fci,
                "puccd": { "e_best": cmp.puccd.e_best, "spread": cmp.puccd_spread, "runs": summarize(&cmp.puccd, fci) },
                "hadamard": { "e_best": cmp.hadamard.e_best, "spread": cmp.hadamard_spread, "runs": summarize(&cmp.hadamard, fci) },
            })
        }
    };
    emit(&report, args.out.as_deref())
}

fn summarize(rep: &TrainReport, fci: f64) -> Vec<serde_json::Value> {
    rep.runs
        .iter()
        .map(|r| {
            json!({
                "seed": r.seed,
                "e_best": r.e_best,
                "e_final": r.e_final,
                "e_final_stderr": r.e_final_stderr,
                "e_final_exact": r.e_final_exact,
                "error": r.e_best - fci,
                "steps": r.trace.len() - 1,
                "theta": r.theta,
            })
        })
        .collect()
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Inspect(a) => cmd_inspect(a, cli),
        Command::Vqe(a) => cmd_vqe(a, cli),
        Command::Train(a) => cmd_train(a, cli),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("punn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

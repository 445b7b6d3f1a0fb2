//! Optimization drivers: pUCCD VQE, network training, and the Hadamard
//! baseline comparison.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::ansatz::{hadamard_state, perturbation_state, puccd_state, PuccdAnsatz};
use crate::error::{Error, Result};
use crate::hamiltonian::{full_jw_hamiltonian, sz_to_pauli, SzHamiltonian};
use crate::integrals::IntegralSet;
use crate::measurement::{estimate_energy_with_form, exact_form, AmplitudeTable, ConjugatedHamiltonian, ShotOptions};
use crate::neural::{energy_gradient, AdaMaxState, BilinearForm, NetworkShape, NeuralAmplitudeModel};
use crate::oracles::{SectorBasis, SectorOperator};
use crate::pauli::PauliSum;
use crate::statevector::{exact_expectation, stream_rng, GateOp, State};

/// Finite-difference step for circuit gradients, in radians.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "shots")]
pub enum Mode {
    Exact,
    Shots(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitKind {
    Puccd,
    Hadamard,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VqeResult {
    pub theta: Vec<f64>,
    /// Objective value at `theta`: exact, or a fresh shot estimate.
    pub energy: f64,
    /// Exact pair-Hamiltonian energy at `theta`.
    pub exact_energy: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub mode: Mode,
    pub seed: u64,
}

/// Shot-mode coordinate optimizer settings.
const COORD_SWEEPS: usize = 8;
const COORD_DELTA: f64 = 0.2;
const COORD_SHRINK: f64 = 0.7;

fn pair_energy_exact(h: &PauliSum, n_orb: usize, n_pairs: usize, theta: &[f64]) -> Result<f64> {
    let ansatz = PuccdAnsatz::new(n_orb, n_pairs, theta.to_vec())?;
    exact_expectation(&puccd_state(&ansatz)?, h)
}

/// Three-basis shot estimate of a pair Hamiltonian whose strings are
/// Z-type, all-X, or all-Y.
pub fn estimate_pair_energy(psi: &State, h: &PauliSum, shots: usize, seed: u64, stream: u64) -> Result<(f64, f64)> {
    let n = psi.n_qubits;
    let mut energy = 0.0;
    let mut var = 0.0;
    let mut groups: [Vec<(u64, f64)>; 3] = Default::default();
    for t in &h.terms {
        let c = t.coeff.re;
        if t.is_identity() {
            energy += c;
        } else if t.x == 0 {
            groups[0].push((t.z, c));
        } else if t.z == 0 {
            groups[1].push((t.x, c));
        } else if t.x == t.z {
            groups[2].push((t.x, c));
        } else {
            return Err(Error::InvalidArgument(format!("{} is not a pair-Hamiltonian string", t.letters())));
        }
    }
    for (b, group) in groups.iter().enumerate() {
        if group.is_empty() {
            continue;
        }
        let mut rotated = psi.clone();
        for q in 0..n {
            if b == 2 {
                rotated.apply(&GateOp::Sdg { target: q })?;
            }
            if b > 0 {
                rotated.apply(&GateOp::H { target: q })?;
            }
        }
        let draws = crate::statevector::sample(&rotated, shots, seed, stream * 3 + b as u64);
        let values: Vec<f64> = draws
            .iter()
            .map(|&x| {
                group
                    .iter()
                    .map(|&(m, c)| if (x as u64 & m).count_ones() % 2 == 1 { -c } else { c })
                    .sum()
            })
            .collect();
        let est = crate::measurement::TermEstimate::from_values(&values);
        energy += est.mean;
        var += est.stderr.powi(2);
    }
    Ok((energy, var.sqrt()))
}

fn fd_gradient(f: &mut impl FnMut(&[f64]) -> Result<f64>, x: &[f64], step: f64) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + step;
        let fp = f(&y)?;
        y[i] = x[i] - step;
        let fm = f(&y)?;
        y[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    Ok(g)
}

/// BFGS with Armijo backtracking and finite-difference gradients.
/// Returns `(x, f(x), converged, evaluations)`.
pub fn bfgs_minimize(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    gtol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64, bool, usize)> {
    let n = x0.len();
    let mut evals = 0usize;
    let mut counted = |x: &[f64]| {
        evals += 1;
        f(x)
    };
    let mut x = x0.to_vec();
    let mut fx = counted(&x)?;
    let mut g = fd_gradient(&mut counted, &x, FD_STEP)?;
    let mut hinv = nalgebra::DMatrix::<f64>::identity(n, n);
    let mut converged = false;
    for _ in 0..max_iter {
        if g.iter().all(|v| v.abs() < gtol) {
            converged = true;
            break;
        }
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut dir = -(&hinv * &gv);
        if dir.dot(&gv) >= 0.0 {
            hinv = nalgebra::DMatrix::identity(n, n);
            dir = -gv.clone();
        }
        let slope = dir.dot(&gv);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let trial: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            let ft = counted(&trial)?;
            if ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else { break };
        let gn = fd_gradient(&mut counted, &xn, FD_STEP)?;
        let s = nalgebra::DVector::from_iterator(n, xn.iter().zip(&x).map(|(a, b)| a - b));
        let yv = nalgebra::DVector::from_iterator(n, gn.iter().zip(&g).map(|(a, b)| a - b));
        let sy = s.dot(&yv);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let id = nalgebra::DMatrix::<f64>::identity(n, n);
            let left = &id - rho * &s * yv.transpose();
            let right = &id - rho * &yv * s.transpose();
            hinv = &left * &hinv * &right + rho * &s * s.transpose();
        }
        let small_change = (fx - fnew).abs() < 1e-15;
        x = xn;
        fx = fnew;
        g = gn;
        if small_change {
            converged = g.iter().all(|v| v.abs() < gtol.sqrt());
            break;
        }
    }
    Ok((x, fx, converged, evals))
}

/// Sequential single-parameter quadratic fits on noisy energies.
fn coordinate_minimize(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
) -> Result<(Vec<f64>, usize)> {
    let mut x = x0.to_vec();
    let mut evals = 0;
    let mut delta = COORD_DELTA;
    for _ in 0..COORD_SWEEPS {
        for i in 0..x.len() {
            let base = x[i];
            let f0 = f(&x)?;
            x[i] = base + delta;
            let fp = f(&x)?;
            x[i] = base - delta;
            let fm = f(&x)?;
            evals += 3;
            let curv = (fp + fm - 2.0 * f0) / (2.0 * delta * delta);
            let slope = (fp - fm) / (2.0 * delta);
            let step = if curv > 0.0 {
                (-slope / (2.0 * curv)).clamp(-2.0 * delta, 2.0 * delta)
            } else if fp < fm {
                delta
            } else {
                -delta
            };
            x[i] = base + step;
        }
        delta *= COORD_SHRINK;
    }
    Ok((x, evals))
}

/// Optimizes the pUCCD angles for the pair Hamiltonian `h` with `n_pairs`
/// electron pairs, starting from the reference state.
pub fn vqe_puccd(h: &SzHamiltonian, n_pairs: usize, mode: Mode, seed: u64) -> Result<VqeResult> {
    let n = h.n_orb();
    let hp = sz_to_pauli(h);
    let start = PuccdAnsatz::zeros(n, n_pairs)?.theta;
    match mode {
        Mode::Exact => {
            let (theta, energy, converged, evaluations) =
                bfgs_minimize(|t| pair_energy_exact(&hp, n, n_pairs, t), &start, 1e-8, 1000)?;
            Ok(VqeResult { theta, energy, exact_energy: energy, converged, evaluations, mode, seed })
        }
        Mode::Shots(shots) => {
            let mut calls = 0u64;
            let (theta, evaluations) = coordinate_minimize(
                |t| {
                    calls += 1;
                    let psi = puccd_state(&PuccdAnsatz::new(n, n_pairs, t.to_vec())?)?;
                    Ok(estimate_pair_energy(&psi, &hp, shots, seed, calls)?.0)
                },
                &start,
            )?;
            let psi = puccd_state(&PuccdAnsatz::new(n, n_pairs, theta.clone())?)?;
            let (energy, _) = estimate_pair_energy(&psi, &hp, shots, seed, 0)?;
            let exact_energy = exact_expectation(&psi, &hp)?;
            Ok(VqeResult { theta, energy, exact_energy, converged: true, evaluations, mode, seed })
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: Mode,
    /// Network steps in exact mode.
    pub max_nn_steps: u64,
    /// Steps per macro iteration in shot mode.
    pub resample_interval: u64,
    pub macro_iterations: u64,
    pub seeds: usize,
    pub k: usize,
    pub joint_finetune: bool,
    /// Base seed; run `i` uses `seed + i`.
    pub seed: u64,
    pub circuit: CircuitKind,
    /// Enumerate the `phi` distribution in shot mode.
    pub exact_phi: bool,
    /// Worker threads for seeds; 0 uses every available core.
    pub threads: usize,
}

impl TrainConfig {
    pub fn exact() -> Self {
        Self {
            mode: Mode::Exact,
            max_nn_steps: 64000,
            resample_interval: 30,
            macro_iterations: 15,
            seeds: 5,
            k: 2,
            joint_finetune: false,
            seed: 0,
            circuit: CircuitKind::Puccd,
            exact_phi: false,
            threads: 0,
        }
    }

    pub fn shots(shots: usize) -> Self {
        Self { mode: Mode::Shots(shots), max_nn_steps: 450, ..Self::exact() }
    }

    /// Network steps per seed.
    pub fn total_steps(&self) -> u64 {
        match self.mode {
            Mode::Exact => self.max_nn_steps,
            Mode::Shots(_) => self.resample_interval * self.macro_iterations,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    /// Reported energy: the lowest exact energy in exact mode, the final
    /// fresh-sample estimate in shot mode.
    pub e_best: f64,
    pub e_final: f64,
    /// Standard error of `e_final` (0 in exact mode).
    pub e_final_stderr: f64,
    /// Exact hybrid energy of the final model, when computable.
    pub e_final_exact: Option<f64>,
    /// Energy before each step plus the final energy: `steps + 1` entries.
    pub trace: Vec<f64>,
    pub running_min: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub circuit: CircuitKind,
    pub runs: Vec<SeedRun>,
    pub e_best: f64,
    pub best_seed: u64,
}

/// Everything one training run needs that does not depend on the seed.
struct Problem {
    n: usize,
    n_alpha: usize,
    n_beta: usize,
    op: Option<SectorOperator>,
    conj: ConjugatedHamiltonian,
    phi: State,
}

impl Problem {
    fn new(ints: &IntegralSet, need_op: bool) -> Result<Self> {
        let n = ints.n_orb;
        let h_full = full_jw_hamiltonian(ints)?;
        let conj = ConjugatedHamiltonian::new(&h_full)?;
        let op = if need_op {
            let basis = SectorBasis::new(n, ints.n_elec_alpha, ints.n_elec_beta)?;
            Some(SectorOperator::from_pauli(&h_full, basis)?)
        } else {
            None
        };
        Ok(Self { n, n_alpha: ints.n_elec_alpha, n_beta: ints.n_elec_beta, op, conj, phi: perturbation_state(n) })
    }

    fn psi(&self, circuit: CircuitKind, theta: &[f64], n_pairs: usize) -> Result<State> {
        match circuit {
            CircuitKind::Puccd => puccd_state(&PuccdAnsatz::new(self.n, n_pairs, theta.to_vec())?),
            CircuitKind::Hadamard => Ok(hadamard_state(self.n)),
        }
    }

    fn exact_energy(&self, psi: &State, model: &NeuralAmplitudeModel) -> Result<Option<f64>> {
        match &self.op {
            Some(op) => {
                let form = exact_form(op, psi, &self.phi)?;
                Ok(Some(crate::neural::energy(model, &form)?))
            }
            None => Ok(None),
        }
    }
}

fn running_min(trace: &[f64]) -> Vec<f64> {
    trace
        .iter()
        .scan(f64::INFINITY, |m, &e| {
            *m = m.min(e);
            Some(*m)
        })
        .collect()
}

/// Sub-seed of macro iteration `m` for run seed `seed`.
fn macro_seed(seed: u64, m: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, 1 << 32 | m).next_u64()
}

fn train_one(problem: &Problem, theta: &[f64], n_pairs: usize, cfg: &TrainConfig, seed: u64) -> Result<SeedRun> {
    let shape = NetworkShape::for_orbitals(problem.n, cfg.k)?;
    let mut model = NeuralAmplitudeModel::new(shape, problem.n_alpha, problem.n_beta, seed);
    let mut opt = AdaMaxState::new(model.params.len());
    let mut theta = theta.to_vec();
    let mut psi = problem.psi(cfg.circuit, &theta, n_pairs)?;
    let mut trace = Vec::with_capacity(cfg.total_steps() as usize + 1);

    match cfg.mode {
        Mode::Exact => {
            let op = problem.op.as_ref().expect("exact mode builds the sector operator");
            let mut form = exact_form(op, &psi, &problem.phi)?;
            for step in 0..cfg.max_nn_steps {
                if cfg.joint_finetune && cfg.circuit == CircuitKind::Puccd && step > 0 && step % 1000 == 0 {
                    theta = circuit_pass(problem, op, &model, &theta, n_pairs)?;
                    psi = problem.psi(cfg.circuit, &theta, n_pairs)?;
                    form = exact_form(op, &psi, &problem.phi)?;
                }
                let (e, g) = energy_gradient(&model, &form)?;
                trace.push(e);
                opt.step(&mut model.params, &g)?;
            }
            let e_final = crate::neural::energy(&model, &form)?;
            trace.push(e_final);
            let running_min = running_min(&trace);
            let e_best = *running_min.last().unwrap();
            Ok(SeedRun {
                seed,
                e_best,
                e_final,
                e_final_stderr: 0.0,
                e_final_exact: Some(e_final),
                trace,
                running_min,
                theta,
            })
        }
        Mode::Shots(shots) => {
            let opts = |m: u64| ShotOptions { shots, seed: macro_seed(seed, m), exact_phi: cfg.exact_phi };
            for m in 0..cfg.macro_iterations {
                let table = AmplitudeTable::from_model(&model);
                let mut form = BilinearForm::new();
                estimate_energy_with_form(&psi, &problem.phi, &table, &problem.conj, opts(m), Some(&mut form))?;
                for _ in 0..cfg.resample_interval {
                    let (e, g) = energy_gradient(&model, &form)?;
                    trace.push(e);
                    opt.step(&mut model.params, &g)?;
                }
            }
            let table = AmplitudeTable::from_model(&model);
            let fin = estimate_energy_with_form(
                &psi,
                &problem.phi,
                &table,
                &problem.conj,
                opts(cfg.macro_iterations),
                None,
            )?;
            trace.push(fin.energy);
            let running_min = running_min(&trace);
            Ok(SeedRun {
                seed,
                e_best: fin.energy,
                e_final: fin.energy,
                e_final_stderr: fin.stderr,
                e_final_exact: problem.exact_energy(&psi, &model)?,
                trace,
                running_min,
                theta,
            })
        }
    }
}

/// One finite-difference gradient step on the circuit angles with the
/// network held fixed; kept only if the exact energy decreases.
fn circuit_pass(
    problem: &Problem,
    op: &SectorOperator,
    model: &NeuralAmplitudeModel,
    theta: &[f64],
    n_pairs: usize,
) -> Result<Vec<f64>> {
    let b = model.forward_batch(&op.basis.configs);
    let energy = |t: &[f64]| -> Result<f64> {
        let psi = problem.psi(CircuitKind::Puccd, t, n_pairs)?;
        let form = exact_form(op, &psi, &problem.phi)?;
        let (a, nrm) = form.evaluate(&b);
        if !(nrm > 0.0) {
            return Err(Error::DegenerateEstimate(nrm));
        }
        Ok(a / nrm)
    };
    let mut f = energy;
    let e0 = f(theta)?;
    let g = fd_gradient(&mut f, theta, FD_STEP)?;
    let mut t = 0.1;
    for _ in 0..20 {
        let trial: Vec<f64> = theta.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
        if f(&trial)? < e0 {
            return Ok(trial);
        }
        t *= 0.5;
    }
    Ok(theta.to_vec())
}

/// Trains one network per seed on top of the circuit state with angles
/// `theta` and reports the lowest energy across seeds.
pub fn train_punn(ints: &IntegralSet, theta: &[f64], cfg: &TrainConfig) -> Result<TrainReport> {
    let n_pairs = ints.n_pairs()?;
    let need_op = matches!(cfg.mode, Mode::Exact) || 2 * ints.n_orb <= crate::measurement::MAX_DENSE_QUBITS;
    let problem = Problem::new(ints, need_op)?;
    train_with_problem(&problem, theta, n_pairs, cfg)
}

fn train_with_problem(problem: &Problem, theta: &[f64], n_pairs: usize, cfg: &TrainConfig) -> Result<TrainReport> {
    if cfg.seeds == 0 {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    if cfg.joint_finetune && !matches!(cfg.mode, Mode::Exact) {
        return Err(Error::InvalidArgument("joint fine-tuning needs exact mode".into()));
    }
    let workers = match cfg.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(cfg.seeds);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<SeedRun>>>> = (0..cfg.seeds).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cfg.seeds {
                    break;
                }
                let seed = cfg.seed + i as u64;
                let run = train_one(problem, theta, n_pairs, cfg, seed)
                    .map_err(|e| Error::Seed { seed, source: Box::new(e) });
                *slots[i].lock().expect("slot lock") = Some(run);
            });
        }
    });
    let runs = slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every seed ran"))
        .collect::<Result<Vec<_>>>()?;
    let best = runs.iter().min_by(|a, b| a.e_best.total_cmp(&b.e_best)).expect("nonempty");
    Ok(TrainReport { circuit: cfg.circuit, e_best: best.e_best, best_seed: best.seed, runs: runs.clone() })
}

/// Mean and standard deviation across seeds at every step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StepStats {
    pub fn from_report(report: &TrainReport) -> Self {
        let len = report.runs.iter().map(|r| r.trace.len()).min().unwrap_or(0);
        let s = report.runs.len() as f64;
        let mut mean = Vec::with_capacity(len);
        let mut std = Vec::with_capacity(len);
        for i in 0..len {
            let m = report.runs.iter().map(|r| r.trace[i]).sum::<f64>() / s;
            let v = report.runs.iter().map(|r| (r.trace[i] - m).powi(2)).sum::<f64>() / s;
            mean.push(m);
            std.push(v.sqrt());
        }
        Self { mean, std }
    }
}

/// Across-seed summary of the reported energies.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeedSpread {
    pub mean: f64,
    pub std: f64,
    pub best: f64,
}

impl SeedSpread {
    pub fn from_report(report: &TrainReport) -> Self {
        let e: Vec<f64> = report.runs.iter().map(|r| r.e_best).collect();
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        let std = (e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / e.len() as f64).sqrt();
        Self { mean, std, best: report.e_best }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineReport {
    pub puccd: TrainReport,
    pub hadamard: TrainReport,
    pub puccd_steps: StepStats,
    pub hadamard_steps: StepStats,
    pub puccd_spread: SeedSpread,
    pub hadamard_spread: SeedSpread,
}

/// Runs the same training protocol on the pUCCD state and on the uniform
/// superposition.
pub fn baseline_compare(ints: &IntegralSet, theta: &[f64], cfg: &TrainConfig) -> Result<BaselineReport> {
    let n_pairs = ints.n_pairs()?;
    let need_op = matches!(cfg.mode, Mode::Exact) || 2 * ints.n_orb <= crate::measurement::MAX_DENSE_QUBITS;
    let problem = Problem::new(ints, need_op)?;
    let puccd = train_with_problem(&problem, theta, n_pairs, &TrainConfig { circuit: CircuitKind::Puccd, ..cfg.clone() })?;
    let hadamard =
        train_with_problem(&problem, theta, n_pairs, &TrainConfig { circuit: CircuitKind::Hadamard, ..cfg.clone() })?;
    Ok(BaselineReport {
        puccd_steps: StepStats::from_report(&puccd),
        hadamard_steps: StepStats::from_report(&hadamard),
        puccd_spread: SeedSpread::from_report(&puccd),
        hadamard_spread: SeedSpread::from_report(&hadamard),
        puccd,
        hadamard,
    })
}

/// Exact energy of the hybrid state for a given circuit and network.
pub fn hybrid_energy(ints: &IntegralSet, psi: &State, model: &NeuralAmplitudeModel) -> Result<f64> {
    let h = full_jw_hamiltonian(ints)?;
    let basis = SectorBasis::new(ints.n_orb, ints.n_elec_alpha, ints.n_elec_beta)?;
    let op = SectorOperator::from_pauli(&h, basis)?;
    let form = exact_form(&op, psi, &perturbation_state(ints.n_orb))?;
    crate::neural::energy(model, &form)
}

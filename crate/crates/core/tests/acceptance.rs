//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Set `PUNN_ACCEPT_FULL=1` to train the cubic H8 fixture with the full
//! step budget instead of the reduced default.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use punn_core::ansatz::{puccd_param_count, puccd_state, PuccdAnsatz};
use punn_core::hamiltonian::{build_sz_hamiltonian, full_jw_hamiltonian, sz_to_pauli};
use punn_core::measurement::{estimate_energy, exact_hybrid_expectation, AmplitudeTable, ShotOptions};
use punn_core::neural::{energy, energy_gradient, nn_param_count};
use punn_core::oracles::{doci_matrix, project_to_seniority_zero};
use punn_core::pauli::{companion_operator, conjugate_by_entangler, PauliSum};
use punn_core::solvers::{baseline_compare, train_punn, vqe_puccd, SeedRun, TrainConfig};
use punn_core::statevector::{exact_expectation, stream_rng, State};
use punn_core::{Mode, NetworkShape, NeuralAmplitudeModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHEMICAL_ACCURACY: f64 = 1.6e-3;
const STRETCH_TOLERANCE: f64 = 1e-2;
const H8_REDUCED_STEPS: u64 = 4000;

type Outcome = Result<String, String>;

/// `|E - FCI|` for pUCCD and pUNN on one fixture.
#[derive(Clone, Copy)]
struct FixtureErrors {
    name: &'static str,
    puccd: f64,
    punn: f64,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1() -> Outcome {
    let table = [("H5+", 5, 2, 661, 6), ("H6", 6, 3, 1537, 9), ("H7+", 7, 3, 2885, 12), ("H8", 8, 4, 4801, 16)];
    let mut bad = Vec::new();
    for (label, n_orb, n_pairs, nn, pu) in table {
        let got = (nn_param_count(n_orb, 2).map_err(|e| e.to_string())?, puccd_param_count(n_orb, n_pairs));
        if got != (nn, pu) {
            bad.push(format!("{label}: {got:?} != ({nn}, {pu})"));
        }
    }
    check(bad.is_empty(), if bad.is_empty() { "4 rows exact".into() } else { bad.join("; ") })
}

fn c2() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in ["h4_chain_1.0", "h6_chain_1.0"] {
        let (ints, _) = load(name);
        let np = ints.n_pairs().map_err(|e| e.to_string())?;
        let sz = build_sz_hamiltonian(&ints).map_err(|e| e.to_string())?;
        let full = full_jw_hamiltonian(&ints).map_err(|e| e.to_string())?;
        let proj = project_to_seniority_zero(&full, np).map_err(|e| e.to_string())?;
        worst = worst.max((proj - doci_matrix(&sz, np)).abs().max());
    }
    check(worst < 1e-10, format!("max |diff| {worst:.2e}"))
}

fn c3() -> Outcome {
    const SHOTS: usize = 100_000;
    let mut rng = stream_rng(2024, 0);
    let mut worst: f64 = 0.0;
    for trial in 0..20u64 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let psi = random_real_state(n, &mut rng);
        let phi = random_real_state(n, &mut rng);
        let (na, nb) = (rng.gen_range(0..=n), rng.gen_range(0..=n));
        let amps = AmplitudeTable::from_model(&random_masked_model(n, na, nb, trial));
        for kind in 0..TERM_KINDS.len() {
            let p = random_term(n, kind, &mut rng);
            let mut h = PauliSum::new(2 * n);
            h.push(conjugate_by_entangler(&p, n));
            let (oracle, _) = exact_hybrid_expectation(&psi, &phi, &amps, &h).map_err(|e| e.to_string())?;
            let est = estimate_term(&psi, &phi, &amps, &p, n, kind, SHOTS, 1000 + trial);
            let z = (est.mean * p.coeff.re - oracle).abs() / (est.stderr + 1e-300);
            if (est.mean * p.coeff.re - oracle).abs() > 1e-12 {
                worst = worst.max(z);
            }
        }
    }
    check(worst < 5.0, format!("100 estimates, worst deviation {worst:.2} stderr"))
}

fn c4() -> Outcome {
    let (mut companions, mut diagonalizers) = (0, 0);
    for n in 1..=4 {
        for p in all_strings(n).into_iter().filter(|p| p.x != 0) {
            if p.weight() <= 4 && p.y_count() % 2 == 0 {
                verify_companion(&p)?;
                companions += 1;
            }
            verify_diagonalizer(&p)?;
            verify_diagonalizer(&companion_operator(&p).map_err(|e| e.to_string())?)?;
            diagonalizers += 2;
        }
    }
    Ok(format!("{companions} companions, {diagonalizers} diagonalizers"))
}

fn train_fixture(name: &'static str, steps: u64) -> Result<FixtureErrors, String> {
    let (ints, side) = load(name);
    let sz = build_sz_hamiltonian(&ints).map_err(|e| e.to_string())?;
    let np = ints.n_pairs().map_err(|e| e.to_string())?;
    let vqe = vqe_puccd(&sz, np, Mode::Exact, 0).map_err(|e| e.to_string())?;
    let cfg = TrainConfig { max_nn_steps: steps, ..TrainConfig::exact() };
    let report = train_punn(&ints, &vqe.theta, &cfg).map_err(|e| e.to_string())?;
    Ok(FixtureErrors {
        name,
        puccd: (vqe.energy - side.fci_energy).abs(),
        punn: (report.e_best - side.fci_energy).abs(),
    })
}

fn c5(errors: &[FixtureErrors]) -> Outcome {
    let parts: Vec<String> = errors.iter().map(|e| format!("{} {:.2e}", e.name, e.punn)).collect();
    check(errors.iter().all(|e| e.punn < CHEMICAL_ACCURACY), format!("|E - FCI|: {}", parts.join(", ")))
}

fn c6(errors: &[FixtureErrors]) -> Outcome {
    let parts: Vec<String> =
        errors.iter().map(|e| format!("{} pUNN {:.2e} < pUCCD {:.2e}", e.name, e.punn, e.puccd)).collect();
    check(errors.iter().all(|e| e.punn < e.puccd), parts.join(", "))
}

fn c7(h8: &FixtureErrors, steps: u64) -> Outcome {
    check(h8.punn < STRETCH_TOLERANCE, format!("|E - FCI| {:.3e} after {steps} steps x 5 seeds", h8.punn))
}

fn c8() -> Outcome {
    let (ints, side) = load("h4_chain_1.0");
    let sz = build_sz_hamiltonian(&ints).map_err(|e| e.to_string())?;
    let theta = vqe_puccd(&sz, 2, Mode::Exact, 0).map_err(|e| e.to_string())?.theta;
    let cfg = TrainConfig { exact_phi: true, ..TrainConfig::shots(1024) };
    let rep = baseline_compare(&ints, &theta, &cfg).map_err(|e| e.to_string())?;
    let err = |runs: &[SeedRun]| runs.iter().map(|r| (r.e_final - side.fci_energy).abs()).sum::<f64>() / runs.len() as f64;
    let (pe, he) = (err(&rep.puccd.runs), err(&rep.hadamard.runs));
    let (ps, hs) = (rep.puccd_spread.std, rep.hadamard_spread.std);
    check(
        he > pe && hs > ps,
        format!("exact-phi; mean |E - FCI| pUCCD {pe:.3e} vs Hadamard {he:.3e}; spread {ps:.3e} vs {hs:.3e}"),
    )
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for trial in 0..10 {
        let (na, nb) = [(2, 2), (1, 2), (2, 1), (3, 1)][trial % 4];
        let mut m = random_model(4, na, nb, 100 + trial as u64);
        let form = random_form(4, na, nb, &mut rng);
        let (_, grad) = energy_gradient(&m, &form).map_err(|e| e.to_string())?;
        let mut diff = 0.0;
        let mut scale = 0.0;
        for i in 0..grad.len() {
            let p = m.params[i];
            m.params[i] = p + h;
            let ep = energy(&m, &form).map_err(|e| e.to_string())?;
            m.params[i] = p - h;
            let em = energy(&m, &form).map_err(|e| e.to_string())?;
            m.params[i] = p;
            let fd = (ep - em) / (2.0 * h);
            diff += (grad[i] - fd).powi(2);
            scale += fd * fd;
        }
        worst = worst.max((diff / scale).sqrt());
    }
    check(worst < 1e-5, format!("10 instances, worst relative error {worst:.2e}"))
}

fn c10() -> Outcome {
    let (ints, _) = load("h4_chain_1.0");
    let sz = build_sz_hamiltonian(&ints).map_err(|e| e.to_string())?;
    let theta = vqe_puccd(&sz, 2, Mode::Exact, 0).map_err(|e| e.to_string())?.theta;
    let psi = puccd_state(&PuccdAnsatz::new(4, 2, theta).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let e_puccd = exact_expectation(&psi, &sz_to_pauli(&sz)).map_err(|e| e.to_string())?;
    let shape = NetworkShape::for_orbitals(4, 2).map_err(|e| e.to_string())?;
    let model = NeuralAmplitudeModel::constant_mask(shape, 2, 2);
    let zero = State::zero(4);
    let h = full_jw_hamiltonian(&ints).map_err(|e| e.to_string())?;
    let (num, den) =
        exact_hybrid_expectation(&psi, &zero, &AmplitudeTable::from_model(&model), &h).map_err(|e| e.to_string())?;
    let exact_gap = (num / den - e_puccd).abs();
    let shots = estimate_energy(&psi, &zero, &model, &h, ShotOptions::new(10_000, 7)).map_err(|e| e.to_string())?;
    let z = (shots.energy - e_puccd).abs() / shots.stderr;
    check(exact_gap < 1e-10 && z < 5.0, format!("exact gap {exact_gap:.2e}, shot deviation {z:.2} stderr"))
}

fn run(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(d) => {
            println!("PASS criterion {n:>2}: {d} ({secs:.1}s)");
            true
        }
        Err(d) => {
            println!("FAIL criterion {n:>2}: {d} ({secs:.1}s)");
            false
        }
    }
}

fn main() {
    let full = std::env::var("PUNN_ACCEPT_FULL").is_ok_and(|v| v == "1");
    let h8_steps = if full { TrainConfig::exact().max_nn_steps } else { H8_REDUCED_STEPS };
    let mut passed = vec![run(1, c1), run(2, c2), run(3, c3), run(4, c4)];

    let trained = |name, steps| catch_unwind(AssertUnwindSafe(|| train_fixture(name, steps)));
    let weak: Vec<_> = ["h4_chain_1.0", "h6_chain_1.0"].map(|n| trained(n, TrainConfig::exact().max_nn_steps)).into();
    let h8 = trained("h8_cube_2.5", h8_steps);
    let collect = |rs: Vec<&std::thread::Result<Result<FixtureErrors, String>>>| -> Result<Vec<FixtureErrors>, String> {
        rs.into_iter()
            .map(|r| match r {
                Ok(Ok(e)) => Ok(*e),
                Ok(Err(e)) => Err(e.clone()),
                Err(_) => Err("training panicked".into()),
            })
            .collect()
    };

    passed.push(run(5, || c5(&collect(weak.iter().collect())?)));
    passed.push(run(6, || c6(&collect(weak.iter().chain([&h8]).collect())?)));
    passed.push(run(7, || c7(&collect(vec![&h8])?[0], h8_steps)));
    passed.push(run(8, c8));
    passed.push(run(9, c9));
    passed.push(run(10, c10));

    let n_pass = passed.iter().filter(|p| **p).count();
    println!("{n_pass}/{} criteria passed", passed.len());
    if n_pass != passed.len() {
        std::process::exit(1);
    }
}

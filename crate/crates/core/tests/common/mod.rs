#![allow(dead_code)]

use std::path::PathBuf;

use punn_core::IntegralSet;
use serde::Deserialize;
use num_complex::Complex64;
use punn_core::measurement::{
    build_diagonalizer, estimate_mixed_term, estimate_xy_term, estimate_z_term, AmplitudeTable, PhiDraws, TermEstimate,
    XyBases, XyDraws, XySide,
};
use punn_core::neural::{mask, BilinearForm, Config, NetworkShape, NeuralAmplitudeModel};
use punn_core::pauli::{companion_operator, pivot_qubit, Pauli, PauliString};
use punn_core::statevector::{sample, stream_rng, GateOp, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Deserialize)]
pub struct Sidecar {
    pub name: String,
    pub n_orb: usize,
    pub n_elec: usize,
    pub scf_energy: f64,
    pub fci_energy: f64,
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub const FIXTURES: [&str; 3] = ["h4_chain_1.0", "h6_chain_1.0", "h8_cube_2.5"];

pub fn load(name: &str) -> (IntegralSet, Sidecar) {
    let dir = data_dir();
    let ints = IntegralSet::from_fcidump_file(dir.join(format!("{name}.fcidump"))).expect("fixture parses");
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).expect("sidecar exists");
    (ints, serde_json::from_str(&text).expect("sidecar parses"))
}

/// Every Pauli string on `n` qubits.
pub fn all_strings(n: usize) -> Vec<PauliString> {
    (0..4usize.pow(n as u32))
        .map(|mut code| {
            let mut p = PauliString::identity(n);
            for q in 0..n {
                p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][code % 4]);
                code /= 4;
            }
            p
        })
        .collect()
}

pub fn random_real_state(n: usize, rng: &mut impl Rng) -> State {
    let v: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    State::from_real(&v.iter().map(|x| x / norm).collect::<Vec<_>>()).unwrap()
}

/// Masked model with a randomized output layer so that `B` is not constant.
pub fn random_masked_model(n: usize, na: usize, nb: usize, seed: u64) -> NeuralAmplitudeModel {
    let shape = NetworkShape::with_layers(n, 2, 1).unwrap();
    let mut m = NeuralAmplitudeModel::new(shape, na, nb, seed);
    let mut rng = stream_rng(seed, 99);
    let len = m.params.len();
    let out = shape.width() + 1;
    for p in &mut m.params[len - out..] {
        *p = rng.gen_range(-1.0..1.0);
    }
    m
}

pub const TERM_KINDS: [&str; 5] = ["z", "mixed-psi", "mixed-phi", "xy-even", "xy-odd"];

/// Random even-Y string on `2n` qubits of the given routing kind.
pub fn random_term(n: usize, kind: usize, rng: &mut impl Rng) -> PauliString {
    loop {
        let mut p = PauliString::identity(2 * n);
        for q in 0..2 * n {
            p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..4)]);
        }
        let (a, b) = p.split(n);
        let ok = p.y_count() % 2 == 0
            && match kind {
                0 => a.x == 0 && b.x == 0,
                1 => a.x != 0 && b.x == 0,
                2 => a.x == 0 && b.x != 0,
                3 => a.x != 0 && b.x != 0 && a.y_count() % 2 == 0,
                _ => a.x != 0 && b.x != 0 && a.y_count() % 2 == 1,
            };
        if ok {
            return p;
        }
    }
}

/// Shot estimate of the conjugated term `p = p_psi ⊗ p_phi` through the
/// estimator its support routes to, with coefficient 1.
pub fn estimate_term(
    psi: &State,
    phi: &State,
    amps: &AmplitudeTable,
    p: &PauliString,
    n: usize,
    kind: usize,
    shots: usize,
    seed: u64,
) -> TermEstimate {
    let (pk, pj) = p.split(n);
    match kind {
        0 => {
            let ks = sample(psi, shots, seed, 0);
            let js = PhiDraws::Shots(sample(phi, shots, seed, 1));
            estimate_z_term(&ks, &js, amps, &pk, &pj).unwrap()
        }
        1 => {
            let b = build_diagonalizer(&pk).unwrap();
            let ks = sample(&b.rotate(psi).unwrap(), shots, seed, 0);
            let js = PhiDraws::Shots(sample(phi, shots, seed, 1));
            estimate_mixed_term(&ks, &js, amps, XySide::Psi, &b, &pj).unwrap()
        }
        2 => {
            let b = build_diagonalizer(&pj).unwrap();
            let ks = sample(psi, shots, seed, 0);
            let js = PhiDraws::Shots(sample(&b.rotate(phi).unwrap(), shots, seed, 1));
            estimate_mixed_term(&ks, &js, amps, XySide::Phi, &b, &pk).unwrap()
        }
        _ => {
            let bases = XyBases::new(&pk, &pj).unwrap();
            let draws = XyDraws {
                psi_h: sample(&bases.h_psi.rotate(psi).unwrap(), shots, seed, 0),
                phi_h: PhiDraws::Shots(sample(&bases.h_phi.rotate(phi).unwrap(), shots, seed, 1)),
                psi_j: sample(&bases.j_psi.rotate(psi).unwrap(), shots, seed, 2),
                phi_j: PhiDraws::Shots(sample(&bases.j_phi.rotate(phi).unwrap(), shots, seed, 3)),
            };
            estimate_xy_term(&draws, amps, &bases).unwrap()
        }
    }
}

/// Dense check that `V†|x>` is the decoded `±1` eigenvector of `p` for
/// every outcome `x`, and that `V` has `m - 1` two-qubit gates.
pub fn verify_diagonalizer(p: &PauliString) -> Result<(), String> {
    let n = p.n_qubits;
    let b = build_diagonalizer(p).map_err(|e| e.to_string())?;
    if b.two_qubit_gates() as u32 != p.x.count_ones() - 1 {
        return Err(format!("{}: {} two-qubit gates", p.letters(), b.two_qubit_gates()));
    }
    let dense = p.to_dense();
    for x in 0..1usize << n {
        let mut s = State::basis(n, x);
        for g in b.gates.iter().rev() {
            let inv = match *g {
                GateOp::Sdg { target } => GateOp::S { target },
                other => other,
            };
            s.apply(&inv).unwrap();
        }
        let (k, sigma) = b.decode(x);
        if k & (1 << (n - 1 - b.pivot)) != 0 {
            return Err(format!("{}: decoded k outside Omega", p.letters()));
        }
        let (kt, sk) = p.action(k);
        let sk = sk * p.coeff;
        let mut want = vec![Complex64::new(0.0, 0.0); 1 << n];
        want[k] += sigma / 2f64.sqrt();
        want[kt] += sk / 2f64.sqrt();
        if s.amps.iter().zip(&want).any(|(a, w)| (a - w * sigma).norm() >= 1e-12) {
            return Err(format!("{} x={x}: wrong eigenvector", p.letters()));
        }
        let v = nalgebra::DVector::from_column_slice(&s.amps);
        if (&dense * &v - v * Complex64::new(sigma, 0.0)).norm() >= 1e-12 {
            return Err(format!("{} x={x}: eigenvalue is not {sigma}", p.letters()));
        }
    }
    Ok(())
}

/// `J|k> = i P|k>` on the pivot-zero half of the basis.
pub fn verify_companion(p: &PauliString) -> Result<(), String> {
    let n = p.n_qubits;
    let j = companion_operator(p).map_err(|e| e.to_string())?;
    let pivot_bit = 1usize << (n - 1 - pivot_qubit(p).ok_or("no X/Y support")?);
    for k in (0..1usize << n).filter(|k| k & pivot_bit == 0) {
        let (kt, s) = p.action(k);
        let (jt, sj) = j.action(k);
        if kt != jt || (j.coeff * sj - Complex64::i() * s).norm() >= 1e-15 {
            return Err(format!("{}: companion mismatch at k={k}", p.letters()));
        }
    }
    Ok(())
}

/// Default-shape model with every parameter jittered.
pub fn random_model(n: usize, na: usize, nb: usize, seed: u64) -> NeuralAmplitudeModel {
    let mut m = NeuralAmplitudeModel::new(NetworkShape::for_orbitals(n, 2).unwrap(), na, nb, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for p in m.params.iter_mut() {
        *p += rng.gen_range(-0.3..0.3);
    }
    m
}

/// Random bilinear form over unmasked configurations.
pub fn random_form(n: usize, na: usize, nb: usize, rng: &mut ChaCha8Rng) -> BilinearForm {
    let live: Vec<Config> = (0..1usize << n)
        .flat_map(|k| (0..1usize << n).map(move |j| (k, j)))
        .filter(|&(k, j)| mask(k, j, na, nb) == 1.0)
        .collect();
    let mut form = BilinearForm::new();
    for _ in 0..40 {
        let x = live[rng.gen_range(0..live.len())];
        let y = live[rng.gen_range(0..live.len())];
        form.add_pair(x, y, rng.gen_range(-1.0..1.0));
    }
    for _ in 0..12 {
        let x = live[rng.gen_range(0..live.len())];
        form.add_norm(x, rng.gen_range(0.1..1.0));
    }
    form
}

//! Shared setup for the benchmarks in `benches/`.

use std::path::PathBuf;

use punn_core::ansatz::{perturbation_state, puccd_state, PuccdAnsatz};
use punn_core::hamiltonian::{build_sz_hamiltonian, full_jw_hamiltonian};
use punn_core::measurement::{exact_form, ConjugatedHamiltonian};
use punn_core::oracles::{SectorBasis, SectorOperator};
use punn_core::solvers::{vqe_puccd, Mode};
use punn_core::{BilinearForm, IntegralSet, NetworkShape, NeuralAmplitudeModel, State};

pub struct Setup {
    pub ints: IntegralSet,
    pub psi: State,
    pub phi: State,
    pub model: NeuralAmplitudeModel,
    pub form: BilinearForm,
    pub conjugated: ConjugatedHamiltonian,
}

pub fn fixture_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", &format!("{name}.fcidump")].iter().collect()
}

/// Optimized pUCCD state, a fresh network, and the exact training form.
pub fn setup(name: &str) -> Setup {
    let ints = IntegralSet::from_fcidump_file(fixture_path(name)).expect("fixture parses");
    let n = ints.n_orb;
    let n_pairs = ints.n_pairs().expect("closed shell");
    let sz = build_sz_hamiltonian(&ints).expect("pair Hamiltonian");
    let theta = vqe_puccd(&sz, n_pairs, Mode::Exact, 0).expect("vqe").theta;
    let psi = puccd_state(&PuccdAnsatz::new(n, n_pairs, theta).expect("ansatz")).expect("state");
    let phi = perturbation_state(n);
    let h = full_jw_hamiltonian(&ints).expect("qubit Hamiltonian");
    let basis = SectorBasis::new(n, ints.n_elec_alpha, ints.n_elec_beta).expect("sector");
    let op = SectorOperator::from_pauli(&h, basis).expect("sector operator");
    let form = exact_form(&op, &psi, &phi).expect("form");
    let model = NeuralAmplitudeModel::new(
        NetworkShape::for_orbitals(n, 2).expect("shape"),
        ints.n_elec_alpha,
        ints.n_elec_beta,
        0,
    );
    let conjugated = ConjugatedHamiltonian::new(&h).expect("conjugation");
    Setup { ints, psi, phi, model, form, conjugated }
}

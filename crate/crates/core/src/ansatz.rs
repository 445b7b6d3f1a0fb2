//! Circuit builders: the paired-doubles ansatz, the perturbation circuit, and
//! the Hadamard baseline.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pauli::bit;
use crate::statevector::{GateOp, State};

/// Rotation angle of every perturbation-circuit `R_y`.
pub const PERTURBATION_ANGLE: f64 = 0.2;

/// Number of paired double excitations.
pub fn puccd_param_count(n_orb: usize, n_pairs: usize) -> usize {
    n_pairs * (n_orb - n_pairs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PuccdAnsatz {
    pub n_orb: usize,
    pub n_pairs: usize,
    /// One angle per (occupied, virtual) pair, occupied-major.
    pub theta: Vec<f64>,
}

/// Gate list of a swap-network circuit plus the classical relabeling that
/// undoes its net track permutation.
#[derive(Debug, Clone, Serialize)]
pub struct NetworkCircuit {
    pub n_qubits: usize,
    /// Basis index of the reference bitstring the gates act on.
    pub initial_index: usize,
    pub layers: Vec<Vec<GateOp>>,
    /// `layout[q]` is the orbital held by qubit `q` after the last layer.
    pub layout: Vec<usize>,
}

impl NetworkCircuit {
    pub fn gates(&self) -> impl Iterator<Item = &GateOp> {
        self.layers.iter().flatten()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }
}

impl PuccdAnsatz {
    pub fn new(n_orb: usize, n_pairs: usize, theta: Vec<f64>) -> Result<Self> {
        if n_pairs == 0 || n_pairs >= n_orb {
            return Err(Error::InvalidArgument(format!(
                "need 0 < n_pairs < n_orb, got n_pairs={n_pairs}, n_orb={n_orb}"
            )));
        }
        let want = puccd_param_count(n_orb, n_pairs);
        if theta.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: theta.len() });
        }
        Ok(Self { n_orb, n_pairs, theta })
    }

    pub fn zeros(n_orb: usize, n_pairs: usize) -> Result<Self> {
        Self::new(n_orb, n_pairs, vec![0.0; puccd_param_count(n_orb, n_pairs)])
    }

    pub fn param_index(&self, occ: usize, virt: usize) -> usize {
        occ * (self.n_orb - self.n_pairs) + (virt - self.n_pairs)
    }

    /// Odd-even transposition network: `N` layers of nearest-neighbour
    /// gates in which every pair of orbital tracks meets exactly once. A
    /// meeting of an occupied and a virtual track is a Givens-SWAP carrying
    /// that excitation's angle; all other meetings are plain SWAPs.
    pub fn circuit(&self) -> NetworkCircuit {
        let n = self.n_orb;
        let mut track: Vec<usize> = (0..n).collect();
        let mut layers = Vec::with_capacity(n);
        for layer in 0..n {
            let mut gates = Vec::new();
            let mut q = layer % 2;
            while q + 1 < n {
                let (t1, t2) = (track[q], track[q + 1]);
                let occ1 = t1 < self.n_pairs;
                let occ2 = t2 < self.n_pairs;
                let gate = if occ1 != occ2 {
                    let (a, b, o, v) = if occ1 { (q, q + 1, t1, t2) } else { (q + 1, q, t2, t1) };
                    GateOp::GivensSwap { a, b, angle: self.theta[self.param_index(o, v)] }
                } else {
                    GateOp::Swap { a: q, b: q + 1 }
                };
                gates.push(gate);
                track.swap(q, q + 1);
                q += 2;
            }
            layers.push(gates);
        }
        let initial_index = (0..self.n_pairs).fold(0usize, |acc, q| acc | 1 << (n - 1 - q));
        NetworkCircuit { n_qubits: n, initial_index, layers, layout: track }
    }
}

/// Relabels qubits so that orbital `layout[q]` moves from qubit `q` to qubit
/// `layout[q]`.
fn relabel(state: &State, layout: &[usize]) -> State {
    let n = state.n_qubits;
    let mut out = State { n_qubits: n, amps: vec![Default::default(); state.dim()] };
    for (k, &a) in state.amps.iter().enumerate() {
        let mut idx = 0;
        for (q, &orb) in layout.iter().enumerate() {
            idx |= bit(k, n, q) << (n - 1 - orb);
        }
        out.amps[idx] = a;
    }
    out
}

/// Prepares the ansatz state with orbital `p` on qubit `p`.
pub fn puccd_state(ansatz: &PuccdAnsatz) -> Result<State> {
    let circuit = ansatz.circuit();
    let mut state = State::basis(ansatz.n_orb, circuit.initial_index);
    state.apply_all(circuit.gates())?;
    Ok(relabel(&state, &circuit.layout))
}

pub fn perturbation_gates(n: usize) -> Vec<GateOp> {
    (0..n).map(|q| GateOp::Ry { target: q, angle: PERTURBATION_ANGLE }).collect()
}

/// `prod_q R_y(0.2)|0>` on `n` qubits.
pub fn perturbation_state(n: usize) -> State {
    let mut s = State::zero(n);
    s.apply_all(&perturbation_gates(n)).expect("targets in range");
    s
}

/// Uniform superposition on `n` qubits.
pub fn hadamard_state(n: usize) -> State {
    let mut s = State::zero(n);
    for q in 0..n {
        s.apply(&GateOp::H { target: q }).expect("targets in range");
    }
    s
}

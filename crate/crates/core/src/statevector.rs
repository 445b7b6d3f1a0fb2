//! Dense statevector simulation.
//!
//! Basis index bit `n - 1 - q` holds qubit `q` (qubit 0 is most significant).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{qubit_mask, PauliSum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub n_qubits: usize,
    pub amps: Vec<Complex64>,
}

/// Gates used by the circuits in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateOp {
    /// `exp(-i θ Y / 2)`.
    Ry { target: usize, angle: f64 },
    H { target: usize },
    S { target: usize },
    Sdg { target: usize },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
    /// Rotation by `angle` in span{|01>, |10>} of qubits `(a, b)`:
    /// `|10> -> cos|10> + sin|01>`, `|01> -> cos|01> - sin|10>`.
    Givens { a: usize, b: usize, angle: f64 },
    /// `SWAP · GIVENS(angle)`.
    GivensSwap { a: usize, b: usize, angle: f64 },
}

impl GateOp {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::Ry { target, .. }
            | GateOp::H { target }
            | GateOp::S { target }
            | GateOp::Sdg { target } => vec![target],
            GateOp::Cnot { control, target } => vec![control, target],
            GateOp::Swap { a, b } | GateOp::Givens { a, b, .. } | GateOp::GivensSwap { a, b, .. } => {
                vec![a, b]
            }
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().len() == 2
    }
}

impl State {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        Ok(Self { n_qubits: n, amps: amps.iter().map(|&a| Complex64::new(a, 0.0)).collect() })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Real parts of the amplitudes (for states known to be real).
    pub fn real_amplitudes(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }

    fn check_target(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::IndexOutOfRange { what: "qubits", index: q, limit: self.n_qubits });
        }
        Ok(())
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let mask = qubit_mask(self.n_qubits, q) as usize;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// Applies `m` to the (|01>, |10>) pair of qubits `(a, b)`, where the
    /// first component has `a = 0, b = 1`.
    fn apply_mixing(&mut self, a: usize, b: usize, m: [[f64; 2]; 2]) {
        let (ma, mb) = (qubit_mask(self.n_qubits, a) as usize, qubit_mask(self.n_qubits, b) as usize);
        for i in 0..self.amps.len() {
            if i & ma == 0 && i & mb != 0 {
                let j = i ^ ma ^ mb;
                let (x01, x10) = (self.amps[i], self.amps[j]);
                self.amps[i] = x01 * m[0][0] + x10 * m[0][1];
                self.amps[j] = x01 * m[1][0] + x10 * m[1][1];
            }
        }
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        let qs = gate.qubits();
        for &q in &qs {
            self.check_target(q)?;
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::InvalidArgument(format!("two-qubit gate on repeated qubit {}", qs[0])));
        }
        let r = |x: f64| Complex64::new(x, 0.0);
        match *gate {
            GateOp::Ry { target, angle } => {
                let (s, c) = (0.5 * angle).sin_cos();
                self.apply_1q(target, [[r(c), r(-s)], [r(s), r(c)]]);
            }
            GateOp::H { target } => {
                let h = r(std::f64::consts::FRAC_1_SQRT_2);
                self.apply_1q(target, [[h, h], [h, -h]]);
            }
            GateOp::S { target } => {
                self.apply_1q(target, [[r(1.0), ZERO], [ZERO, Complex64::new(0.0, 1.0)]])
            }
            GateOp::Sdg { target } => {
                self.apply_1q(target, [[r(1.0), ZERO], [ZERO, Complex64::new(0.0, -1.0)]])
            }
            GateOp::Cnot { control, target } => {
                let (mc, mt) = (
                    qubit_mask(self.n_qubits, control) as usize,
                    qubit_mask(self.n_qubits, target) as usize,
                );
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
            GateOp::Swap { a, b } => self.apply_mixing(a, b, [[0.0, 1.0], [1.0, 0.0]]),
            GateOp::Givens { a, b, angle } => {
                let (s, c) = angle.sin_cos();
                self.apply_mixing(a, b, [[c, s], [-s, c]]);
            }
            GateOp::GivensSwap { a, b, angle } => {
                let (s, c) = angle.sin_cos();
                self.apply_mixing(a, b, [[-s, c], [c, s]]);
            }
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateOp>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// Returns a copy with `gate` applied.
    pub fn with_gate(&self, gate: &GateOp) -> Result<State> {
        let mut out = self.clone();
        out.apply(gate)?;
        Ok(out)
    }

    /// Basis indices with `|amp| > threshold`, for debug dumps.
    pub fn significant(&self, threshold: f64) -> Vec<(usize, Complex64)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > threshold)
            .map(|(i, &a)| (i, a))
            .collect()
    }

    /// Formats basis index `k` as a bitstring, qubit 0 first.
    pub fn bitstring(&self, k: usize) -> String {
        format!("{:0width$b}", k, width = self.n_qubits)
    }
}

/// `<state|h|state>`; the imaginary part must vanish.
pub fn exact_expectation(state: &State, h: &PauliSum) -> Result<f64> {
    if state.n_qubits != h.n_qubits {
        return Err(Error::DimensionMismatch { expected: h.n_qubits, got: state.n_qubits });
    }
    let hv = h.apply(&state.amps);
    let e: Complex64 = state.amps.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
    if e.im.abs() > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "expectation has imaginary part {:e}; operator not Hermitian",
            e.im
        )));
    }
    Ok(e.re)
}

/// `a ⊗ b` with `a` on the leading qubits.
pub fn tensor_product(a: &State, b: &State) -> State {
    let mut amps = Vec::with_capacity(a.dim() * b.dim());
    for x in &a.amps {
        for y in &b.amps {
            amps.push(x * y);
        }
    }
    State { n_qubits: a.n_qubits + b.n_qubits, amps }
}

/// Seeded generator for sample stream `stream` under global `seed`.
///
/// Streams are ChaCha8 keyed by `seed` (via `seed_from_u64`) with the
/// 64-bit stream id selecting an independent keystream, so outputs are
/// identical on every platform.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `shots` i.i.d. basis indices from the distribution `probs`.
pub fn sample_distribution(probs: &[f64], shots: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    (0..shots)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect()
}

/// Samples computational-basis outcomes from `state`.
pub fn sample(state: &State, shots: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut rng = stream_rng(seed, stream);
    sample_distribution(&state.probabilities(), shots, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < 1e-14
    }

    #[test]
    fn ry_convention() {
        let s = State::zero(1).with_gate(&GateOp::Ry { target: 0, angle: 0.2 }).unwrap();
        assert!(close(s.amps[0], 0.1f64.cos()));
        assert!(close(s.amps[1], 0.1f64.sin()));
    }

    #[test]
    fn cnot_on_10() {
        let s = State::basis(2, 0b10).with_gate(&GateOp::Cnot { control: 0, target: 1 }).unwrap();
        assert!(close(s.amps[0b11], 1.0));
    }

    #[test]
    fn givens_quarter_turn_transfers() {
        let s = State::basis(2, 0b01)
            .with_gate(&GateOp::Givens { a: 0, b: 1, angle: FRAC_PI_2 })
            .unwrap();
        assert!((s.amps[0b10].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn givens_dense_matrix() {
        let theta = 0.37;
        let (sn, cs) = f64::sin_cos(theta);
        // Columns are images of |00>, |01>, |10>, |11>.
        let want = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, cs, sn, 0.0],
            [0.0, -sn, cs, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        for (col, &k) in [0b00, 0b01, 0b10, 0b11].iter().enumerate() {
            let s = State::basis(2, k).with_gate(&GateOp::Givens { a: 0, b: 1, angle: theta }).unwrap();
            for row in 0..4 {
                assert!(close(s.amps[row], want[row][col]), "row {row} col {col}");
            }
        }
    }

    #[test]
    fn givens_swap_is_swap_after_givens() {
        let theta = 0.81;
        for k in 0..4 {
            let mut a = State::basis(2, k);
            a.apply(&GateOp::Givens { a: 0, b: 1, angle: theta }).unwrap();
            a.apply(&GateOp::Swap { a: 0, b: 1 }).unwrap();
            let b = State::basis(2, k).with_gate(&GateOp::GivensSwap { a: 0, b: 1, angle: theta }).unwrap();
            for (x, y) in a.amps.iter().zip(&b.amps) {
                assert!((x - y).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let mut s = State::zero(2);
        assert!(s.apply(&GateOp::H { target: 2 }).is_err());
        assert!(s.apply(&GateOp::Cnot { control: 1, target: 1 }).is_err());
    }

    #[test]
    fn expectation_examples() {
        let z = PauliSum::from_text("1 Z").unwrap();
        assert_eq!(exact_expectation(&State::zero(1), &z).unwrap(), 1.0);
        let plus = State::zero(1).with_gate(&GateOp::H { target: 0 }).unwrap();
        assert!(exact_expectation(&plus, &z).unwrap().abs() < 1e-15);
        assert!(exact_expectation(&State::zero(2), &z).is_err());
    }

    #[test]
    fn tensor_product_layout() {
        let s = tensor_product(&State::basis(1, 0), &State::basis(1, 1));
        assert!(close(s.amps[0b01], 1.0));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sample_deterministic_outcome() {
        let draws = sample(&State::basis(1, 1), 1000, 3, 0);
        assert!(draws.iter().all(|&d| d == 1));
    }

    #[test]
    fn sample_binomial_concentration() {
        let plus = State::zero(1).with_gate(&GateOp::H { target: 0 }).unwrap();
        let shots = 100_000;
        let zeros = sample(&plus, shots, 11, 0).iter().filter(|&&d| d == 0).count();
        let freq = zeros as f64 / shots as f64;
        assert!((freq - 0.5).abs() < 5.0 * (0.25 / shots as f64).sqrt());
    }

    #[test]
    fn sample_reproducible_and_stream_separated() {
        let plus = State::zero(3).with_gate(&GateOp::H { target: 0 }).unwrap();
        assert_eq!(sample(&plus, 500, 42, 0), sample(&plus, 500, 42, 0));
        assert_ne!(sample(&plus, 500, 42, 0), sample(&plus, 500, 42, 1));
    }

    #[test]
    fn gate_json_shape() {
        let g = GateOp::Ry { target: 1, angle: 0.2 };
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, r#"{"kind":"RY","target":1,"angle":0.2}"#);
        assert_eq!(serde_json::from_str::<GateOp>(&js).unwrap(), g);
    }
}

//! Fermion-to-qubit mapping and the qubit Hamiltonians built from integrals.
//!
//! The full Hamiltonian lives on `2N` qubits with alpha orbital `p` on qubit
//! `p` and beta orbital `p` on qubit `N + p`. The seniority-zero (pair)
//! Hamiltonian lives on `N` qubits, one per spatial orbital.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrals::IntegralSet;
use crate::pauli::{Pauli, PauliString, PauliSum};

const DROP_TOL: f64 = 1e-14;
const REAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LadderOp {
    pub index: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(index: usize) -> Self {
        Self { index, dagger: true }
    }

    pub fn annihilate(index: usize) -> Self {
        Self { index, dagger: false }
    }
}

/// A coefficient times an ordered product of ladder operators.
#[derive(Debug, Clone)]
pub struct FermionTerm {
    pub coeff: f64,
    pub ops: Vec<LadderOp>,
}

fn ladder_to_pauli(op: LadderOp, n: usize) -> PauliSum {
    let mut zs = PauliString::identity(n);
    for q in 0..op.index {
        zs.set(q, Pauli::Z);
    }
    let mut x = zs;
    x.set(op.index, Pauli::X);
    x.coeff = Complex64::new(0.5, 0.0);
    let mut y = zs;
    y.set(op.index, Pauli::Y);
    // a† = (X - iY)/2, a = (X + iY)/2
    y.coeff = Complex64::new(0.0, if op.dagger { -0.5 } else { 0.5 });
    PauliSum { n_qubits: n, terms: vec![x, y] }
}

/// Jordan–Wigner image of a sum of ladder-operator products on
/// `n_spin_orb` qubits. Like terms are merged; imaginary coefficients are kept
/// (Hermitian inputs produce real ones).
pub fn jordan_wigner(terms: &[FermionTerm], n_spin_orb: usize) -> Result<PauliSum> {
    let mut out = PauliSum::new(n_spin_orb);
    for term in terms {
        if let Some(op) = term.ops.iter().find(|op| op.index >= n_spin_orb) {
            return Err(Error::IndexOutOfRange {
                what: "spin orbitals",
                index: op.index,
                limit: n_spin_orb,
            });
        }
        let mut prod = PauliSum::constant(n_spin_orb, term.coeff);
        for &op in &term.ops {
            prod = prod.mul(&ladder_to_pauli(op, n_spin_orb)).simplify(0.0);
        }
        out.extend(&prod);
    }
    Ok(out.simplify(DROP_TOL))
}

/// The full molecular Hamiltonian in the fermionic operator basis.
pub fn fermion_hamiltonian(ints: &IntegralSet) -> Vec<FermionTerm> {
    let n = ints.n_orb;
    let so = |p: usize, spin: usize| p + spin * n;
    let mut terms = vec![FermionTerm { coeff: ints.e_nuc, ops: vec![] }];
    for spin in 0..2 {
        for p in 0..n {
            for q in 0..n {
                let h = ints.h1(p, q);
                if h != 0.0 {
                    terms.push(FermionTerm {
                        coeff: h,
                        ops: vec![LadderOp::create(so(p, spin)), LadderOp::annihilate(so(q, spin))],
                    });
                }
            }
        }
    }
    // 1/2 sum (ps|qr) a†_p a†_q a_r a_s over spin orbitals; p and s share a
    // spin, as do q and r.
    for s1 in 0..2 {
        for s2 in 0..2 {
            for p in 0..n {
                for q in 0..n {
                    if s1 == s2 && p == q {
                        continue;
                    }
                    for r in 0..n {
                        for s in 0..n {
                            if s1 == s2 && r == s {
                                continue;
                            }
                            let v = ints.eri(p, s, q, r);
                            if v == 0.0 {
                                continue;
                            }
                            terms.push(FermionTerm {
                                coeff: 0.5 * v,
                                ops: vec![
                                    LadderOp::create(so(p, s1)),
                                    LadderOp::create(so(q, s2)),
                                    LadderOp::annihilate(so(r, s2)),
                                    LadderOp::annihilate(so(s, s1)),
                                ],
                            });
                        }
                    }
                }
            }
        }
    }
    terms
}

/// The full Hamiltonian on `2N` qubits with real coefficients.
pub fn full_jw_hamiltonian(ints: &IntegralSet) -> Result<PauliSum> {
    let h = jordan_wigner(&fermion_hamiltonian(ints), 2 * ints.n_orb)?;
    h.into_real(REAL_TOL)
}

/// Coefficients of the seniority-zero Hamiltonian
/// `sum h_p n_p + sum_pq v_pq c†_p c_q + sum_{p!=q} w_pq n_p n_q + E_nuc`.
#[derive(Debug, Clone, PartialEq)]
pub struct SzHamiltonian {
    pub h: Vec<f64>,
    pub v: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub e_nuc: f64,
}

impl SzHamiltonian {
    pub fn n_orb(&self) -> usize {
        self.h.len()
    }

    /// Dense matrix in the hard-core-boson basis, built directly from the
    /// occupation-number definition.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n_orb();
        let dim = 1usize << n;
        let occ = |k: usize, p: usize| crate::pauli::bit(k, n, p) == 1;
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let mut diag = self.e_nuc;
            for p in 0..n {
                if occ(k, p) {
                    diag += self.h[p] + self.v[(p, p)];
                    for q in 0..n {
                        if q != p && occ(k, q) {
                            diag += self.w[(p, q)];
                        }
                    }
                }
            }
            m[(k, k)] = diag;
            for p in 0..n {
                for q in 0..n {
                    if p != q && !occ(k, p) && occ(k, q) {
                        let out = k ^ crate::pauli::qubit_mask(n, p) as usize
                            ^ crate::pauli::qubit_mask(n, q) as usize;
                        m[(out, k)] += self.v[(p, q)];
                    }
                }
            }
        }
        m
    }
}

/// Pair Hamiltonian coefficients from closed-shell integrals.
pub fn build_sz_hamiltonian(ints: &IntegralSet) -> Result<SzHamiltonian> {
    ints.n_pairs()?;
    let n = ints.n_orb;
    let h = (0..n).map(|p| 2.0 * ints.h1(p, p)).collect();
    let v = DMatrix::from_fn(n, n, |p, q| ints.eri(p, q, p, q));
    let w = DMatrix::from_fn(n, n, |p, q| {
        if p == q {
            0.0
        } else {
            2.0 * ints.eri(p, p, q, q) - ints.eri(p, q, p, q)
        }
    });
    Ok(SzHamiltonian { h, v, w, e_nuc: ints.e_nuc })
}

/// Maps the pair Hamiltonian onto `N` qubits using `n_p = (1 - Z_p)/2` and
/// `c†_p c_q + c†_q c_p = (X_p X_q + Y_p Y_q)/2`.
pub fn sz_to_pauli(h: &SzHamiltonian) -> PauliSum {
    let n = h.n_orb();
    let mut out = PauliSum::constant(n, h.e_nuc);
    let term = |letters: &[(usize, Pauli)], c: f64| {
        let mut s = PauliString::identity(n);
        for &(q, p) in letters {
            s.set(q, p);
        }
        s.with_coeff(Complex64::new(c, 0.0))
    };
    for p in 0..n {
        // v_pp c†_p c_p is a number operator.
        let a = h.h[p] + h.v[(p, p)];
        out.push(term(&[], 0.5 * a));
        out.push(term(&[(p, Pauli::Z)], -0.5 * a));
    }
    for p in 0..n {
        for q in p + 1..n {
            let hop = 0.25 * (h.v[(p, q)] + h.v[(q, p)]);
            out.push(term(&[(p, Pauli::X), (q, Pauli::X)], hop));
            out.push(term(&[(p, Pauli::Y), (q, Pauli::Y)], hop));
            let ww = 0.25 * (h.w[(p, q)] + h.w[(q, p)]);
            out.push(term(&[], ww));
            out.push(term(&[(p, Pauli::Z)], -ww));
            out.push(term(&[(q, Pauli::Z)], -ww));
            out.push(term(&[(p, Pauli::Z), (q, Pauli::Z)], ww));
        }
    }
    out.simplify(DROP_TOL)
}

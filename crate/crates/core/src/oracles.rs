//! Brute-force references: sector-restricted exact diagonalization by two
//! independent routes, DOCI, and the seniority-zero projection.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::SzHamiltonian;
use crate::integrals::IntegralSet;
use crate::neural::Config;
use crate::pauli::PauliSum;

/// Sector dimension up to which eigenproblems are solved densely.
pub const DENSE_LIMIT: usize = 1000;

/// Residual tolerance of the Lanczos eigensolver.
pub const LANCZOS_TOL: f64 = 1e-10;

/// Largest qubit count accepted by dense projections.
pub const MAX_PROJECTION_QUBITS: usize = 20;

/// Determinants `(alpha bits, beta bits)` with fixed electron counts, in
/// increasing order of the `2N`-qubit basis index.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub configs: Vec<Config>,
    index: HashMap<Config, u32>,
}

/// `N`-bit strings with `weight` bits set, ascending.
pub fn strings_with_weight(n: usize, weight: usize) -> Vec<usize> {
    (0..1usize << n).filter(|k| k.count_ones() as usize == weight).collect()
}

impl SectorBasis {
    pub fn new(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > n_orb || n_beta > n_orb {
            return Err(Error::InvalidArgument(format!(
                "empty sector: {n_alpha} alpha / {n_beta} beta electrons in {n_orb} orbitals"
            )));
        }
        let alphas = strings_with_weight(n_orb, n_alpha);
        let betas = strings_with_weight(n_orb, n_beta);
        let configs: Vec<Config> = alphas.iter().flat_map(|&k| betas.iter().map(move |&j| (k, j))).collect();
        let index = configs.iter().enumerate().map(|(i, &c)| (c, i as u32)).collect();
        Ok(Self { n_orb, n_alpha, n_beta, configs, index })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn position(&self, c: Config) -> Option<usize> {
        self.index.get(&c).map(|&i| i as usize)
    }

    /// Basis index on `2N` qubits, alpha register first.
    pub fn qubit_index(&self, c: Config) -> usize {
        (c.0 << self.n_orb) | c.1
    }

    pub fn split_index(&self, x: usize) -> Config {
        (x >> self.n_orb, x & ((1 << self.n_orb) - 1))
    }
}

/// A real symmetric operator restricted to a sector, stored by columns.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub basis: SectorBasis,
    /// `columns[x]` lists `(y, H_yx)`.
    pub columns: Vec<Vec<(u32, f64)>>,
}

impl SectorOperator {
    /// Restricts a real `2N`-qubit Pauli sum to the sector via the per-term
    /// basis action.
    pub fn from_pauli(h: &PauliSum, basis: SectorBasis) -> Result<Self> {
        if h.n_qubits != 2 * basis.n_orb {
            return Err(Error::DimensionMismatch { expected: 2 * basis.n_orb, got: h.n_qubits });
        }
        if h.max_imag() > 1e-12 {
            return Err(Error::InvalidArgument("Hamiltonian has complex coefficients".into()));
        }
        let mut columns = Vec::with_capacity(basis.len());
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for &c in &basis.configs {
            acc.clear();
            let x = basis.qubit_index(c);
            for term in &h.terms {
                let (y, s) = term.action(x);
                let v = (term.coeff * s).re;
                if let Some(pos) = basis.position(basis.split_index(y)) {
                    *acc.entry(pos as u32).or_insert(0.0) += v;
                }
            }
            let mut col: Vec<(u32, f64)> = acc.iter().filter(|(_, v)| **v != 0.0).map(|(&y, &v)| (y, v)).collect();
            col.sort_by_key(|e| e.0);
            columns.push(col);
        }
        Ok(Self { basis, columns })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (x, col) in self.columns.iter().enumerate() {
            let vx = v[x];
            if vx == 0.0 {
                continue;
            }
            for &(y, h) in col {
                out[y as usize] += h * vx;
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (x, col) in self.columns.iter().enumerate() {
            for &(y, h) in col {
                m[(y as usize, x)] = h;
            }
        }
        m
    }

    pub fn ground_energy(&self) -> Result<f64> {
        lowest_eigenvalue(self.dim(), |v, out| self.matvec(v, out), || self.to_dense())
    }
}

/// Lowest eigenvalue of a symmetric operator: dense for small dimensions,
/// Lanczos otherwise.
pub fn lowest_eigenvalue(
    dim: usize,
    matvec: impl Fn(&[f64], &mut [f64]),
    dense: impl FnOnce() -> DMatrix<f64>,
) -> Result<f64> {
    if dim == 0 {
        return Err(Error::InvalidArgument("empty sector".into()));
    }
    if dim <= DENSE_LIMIT {
        return Ok(dense_lowest(dense()));
    }
    Ok(lanczos_lowest(dim, matvec, LANCZOS_TOL, 1))
}

pub fn dense_lowest(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Restarted Lanczos with full reorthogonalization. Stops when the residual
/// norm of the lowest Ritz pair drops below `tol`.
pub fn lanczos_lowest(dim: usize, matvec: impl Fn(&[f64], &mut [f64]), tol: f64, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let max_krylov = dim.min(120);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut start: DVector<f64> = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
    let mut best = f64::INFINITY;
    let mut w = vec![0.0; dim];
    for _restart in 0..200 {
        start /= start.norm();
        let mut basis: Vec<DVector<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz = (best, start.clone());
        let mut converged = false;
        for m in 0..max_krylov {
            matvec(basis[m].as_slice(), &mut w);
            let mut r = DVector::from_column_slice(&w);
            let a = basis[m].dot(&r);
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&r);
                    r.axpy(-c, b, 1.0);
                }
            }
            let bnorm = r.norm();
            let size = alpha.len();
            let t = DMatrix::from_fn(size, size, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (imin, &theta) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("nonempty");
            let y = eig.eigenvectors.column(imin);
            let residual = (bnorm * y[size - 1]).abs();
            let mut v = DVector::zeros(dim);
            for (i, b) in basis.iter().enumerate() {
                v.axpy(y[i], b, 1.0);
            }
            ritz = (theta, v);
            if residual < tol || bnorm < 1e-14 || size == dim {
                converged = true;
                break;
            }
            beta.push(bnorm);
            basis.push(r / bnorm);
        }
        best = ritz.0;
        if converged {
            break;
        }
        start = ritz.1;
    }
    best
}

/// Lowest eigenvalue of a real `2N`-qubit Hamiltonian within the sector.
pub fn fci_ground_energy(h: &PauliSum, n_alpha: usize, n_beta: usize) -> Result<f64> {
    if h.n_qubits % 2 != 0 {
        return Err(Error::InvalidArgument("expected an even qubit count".into()));
    }
    let basis = SectorBasis::new(h.n_qubits / 2, n_alpha, n_beta)?;
    SectorOperator::from_pauli(h, basis)?.ground_energy()
}

/// Sector Hamiltonian built directly from integrals with the Slater–Condon
/// rules, independently of the qubit mapping.
pub fn slater_condon_operator(ints: &IntegralSet) -> Result<SectorOperator> {
    let basis = SectorBasis::new(ints.n_orb, ints.n_elec_alpha, ints.n_elec_beta)?;
    let n = ints.n_orb;
    // Spin orbital `s`: alpha p -> p, beta p -> n + p; occupation bitmask
    // uses bit `s` for spin orbital `s`.
    let spin_occ = |c: Config| -> u64 {
        let mut m = 0u64;
        for p in 0..n {
            if (c.0 >> (n - 1 - p)) & 1 == 1 {
                m |= 1 << p;
            }
            if (c.1 >> (n - 1 - p)) & 1 == 1 {
                m |= 1 << (n + p);
            }
        }
        m
    };
    let spatial = |s: usize| s % n;
    let spin = |s: usize| s / n;
    let h1 = |a: usize, b: usize| if spin(a) == spin(b) { ints.h1(spatial(a), spatial(b)) } else { 0.0 };
    // <ab|cd> in physicists' notation over spin orbitals.
    let phys = |a: usize, b: usize, c: usize, d: usize| {
        if spin(a) == spin(c) && spin(b) == spin(d) {
            ints.eri(spatial(a), spatial(c), spatial(b), spatial(d))
        } else {
            0.0
        }
    };
    let anti = |a: usize, b: usize, c: usize, d: usize| phys(a, b, c, d) - phys(a, b, d, c);
    let bits = |m: u64| (0..2 * n).filter(move |&s| m >> s & 1 == 1);
    // Sign of moving an annihilation/creation past occupied lower orbitals.
    let parity_below = |m: u64, s: usize| if (m & ((1u64 << s) - 1)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };

    let occs: Vec<u64> = basis.configs.iter().map(|&c| spin_occ(c)).collect();
    let mut columns = vec![Vec::new(); basis.len()];
    for (x, &dx) in occs.iter().enumerate() {
        for (y, &dy) in occs.iter().enumerate() {
            let diff = (dx ^ dy).count_ones();
            let value = match diff {
                0 => {
                    let occ: Vec<usize> = bits(dx).collect();
                    let mut e = ints.e_nuc;
                    for &a in &occ {
                        e += h1(a, a);
                        for &b in &occ {
                            e += 0.5 * anti(a, b, a, b);
                        }
                    }
                    e
                }
                2 => {
                    // |y> = sgn a†_r a_p |x>
                    let p = (dx & !dy).trailing_zeros() as usize;
                    let r = (dy & !dx).trailing_zeros() as usize;
                    let mid = dx & !(1u64 << p);
                    let sgn = parity_below(dx, p) * parity_below(mid, r);
                    let mut e = h1(r, p);
                    for q in bits(mid) {
                        e += anti(r, q, p, q);
                    }
                    sgn * e
                }
                4 => {
                    // |y> = sgn a†_r a†_s a_q a_p |x>, p < q, r < s
                    let gone = dx & !dy;
                    let came = dy & !dx;
                    let p = gone.trailing_zeros() as usize;
                    let q = 63 - gone.leading_zeros() as usize;
                    let r = came.trailing_zeros() as usize;
                    let s = 63 - came.leading_zeros() as usize;
                    let m1 = dx & !(1u64 << p);
                    let mut sgn = parity_below(dx, p);
                    let m2 = m1 & !(1u64 << q);
                    sgn *= parity_below(m1, q);
                    let m3 = m2 | (1u64 << s);
                    sgn *= parity_below(m2, s);
                    sgn *= parity_below(m3, r);
                    sgn * anti(r, s, p, q)
                }
                _ => 0.0,
            };
            if value != 0.0 {
                columns[x].push((y as u32, value));
            }
        }
    }
    Ok(SectorOperator { basis, columns })
}

/// FCI energy from the determinant-rule operator.
pub fn fci_energy_slater_condon(ints: &IntegralSet) -> Result<f64> {
    slater_condon_operator(ints)?.ground_energy()
}

/// Pair configurations with `n_pairs` occupied orbitals, ascending.
pub fn pair_basis(n_orb: usize, n_pairs: usize) -> Vec<usize> {
    strings_with_weight(n_orb, n_pairs)
}

/// Hard-core-boson matrix restricted to `n_pairs` pairs, in
/// [`pair_basis`] order.
pub fn doci_matrix(h: &SzHamiltonian, n_pairs: usize) -> DMatrix<f64> {
    let full = h.to_dense();
    let idx = pair_basis(h.n_orb(), n_pairs);
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| full[(idx[a], idx[b])])
}

pub fn doci_ground_energy(h: &SzHamiltonian, n_pairs: usize) -> Result<f64> {
    if n_pairs > h.n_orb() {
        return Err(Error::InvalidArgument(format!("{n_pairs} pairs in {} orbitals", h.n_orb())));
    }
    Ok(dense_lowest(doci_matrix(h, n_pairs)))
}

/// `<k,k| H |k',k'>` over paired determinants, in [`pair_basis`] order.
pub fn project_to_seniority_zero(h: &PauliSum, n_pairs: usize) -> Result<DMatrix<f64>> {
    if h.n_qubits > MAX_PROJECTION_QUBITS {
        return Err(Error::TooLarge(h.n_qubits, MAX_PROJECTION_QUBITS));
    }
    if h.n_qubits % 2 != 0 {
        return Err(Error::InvalidArgument("expected an even qubit count".into()));
    }
    let n = h.n_qubits / 2;
    let pairs = pair_basis(n, n_pairs);
    let pos: HashMap<usize, usize> = pairs.iter().enumerate().map(|(i, &k)| ((k << n) | k, i)).collect();
    let mut m = DMatrix::zeros(pairs.len(), pairs.len());
    for (col, &k) in pairs.iter().enumerate() {
        let x = (k << n) | k;
        for term in &h.terms {
            let (y, s) = term.action(x);
            if let Some(&row) = pos.get(&y) {
                m[(row, col)] += (term.coeff * s).re;
            }
        }
    }
    Ok(m)
}

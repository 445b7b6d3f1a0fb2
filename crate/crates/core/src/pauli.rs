//! Pauli-string algebra over at most 64 qubits.
//!
//! Bit ordering: qubit 0 is the most significant bit of a basis-state index,
//! so on `n` qubits qubit `q` lives at bit `n - 1 - q`. The `x`/`z` masks of a
//! [`PauliString`] use the same layout, which lets a string act on an index
//! with a couple of bit operations.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bit `q` of basis index `k` on `n` qubits.
#[inline]
pub fn bit(k: usize, n: usize, q: usize) -> usize {
    (k >> (n - 1 - q)) & 1
}

/// Mask selecting qubit `q` on `n` qubits.
#[inline]
pub fn qubit_mask(n: usize, q: usize) -> u64 {
    1u64 << (n - 1 - q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-letter product `self * other = phase * letter`.
    fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (ONE, p),
            (a, b) if a == b => (ONE, I),
            (X, Y) => (Complex64::i(), Z),
            (Y, Z) => (Complex64::i(), X),
            (Z, X) => (Complex64::i(), Y),
            (Y, X) => (-Complex64::i(), Z),
            (Z, Y) => (-Complex64::i(), X),
            (X, Z) => (-Complex64::i(), Y),
            _ => unreachable!(),
        }
    }
}

/// A weighted tensor product of single-qubit Paulis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliString {
    pub n_qubits: usize,
    pub x: u64,
    pub z: u64,
    pub coeff: Complex64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self::new(n_qubits, 0, 0, ONE)
    }

    pub fn new(n_qubits: usize, x: u64, z: u64, coeff: Complex64) -> Self {
        assert!(n_qubits <= MAX_QUBITS, "at most {MAX_QUBITS} qubits");
        Self { n_qubits, x, z, coeff }
    }

    /// Parses a letter string such as `"XIZY"`.
    pub fn from_letters(letters: &str, coeff: f64) -> Result<Self> {
        let n = letters.chars().count();
        if n > MAX_QUBITS {
            return Err(Error::TooLarge(n, MAX_QUBITS));
        }
        let mut s = Self::identity(n);
        s.coeff = Complex64::new(coeff, 0.0);
        for (q, c) in letters.chars().enumerate() {
            let p = match c.to_ascii_uppercase() {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(Error::InvalidArgument(format!("bad Pauli letter '{other}'")))
                }
            };
            s.set(q, p);
        }
        Ok(s)
    }

    /// A single letter on qubit `q`.
    pub fn single(n_qubits: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n_qubits);
        s.set(q, p);
        s
    }

    pub fn get(&self, q: usize) -> Pauli {
        let m = qubit_mask(self.n_qubits, q);
        Pauli::from_bits(self.x & m != 0, self.z & m != 0)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let m = qubit_mask(self.n_qubits, q);
        let (x, z) = p.bits();
        self.x = if x { self.x | m } else { self.x & !m };
        self.z = if z { self.z | m } else { self.z & !m };
    }

    pub fn letters(&self) -> String {
        (0..self.n_qubits).map(|q| self.get(q).as_char()).collect()
    }

    pub fn with_coeff(mut self, coeff: Complex64) -> Self {
        self.coeff = coeff;
        self
    }

    /// Letters-only key for term merging.
    pub fn key(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    /// Mask of X/Y positions (the bits flipped by the string).
    pub fn xy_support(&self) -> u64 {
        self.x
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Action of the letters (coefficient excluded) on basis state `k`:
    /// `P|k> = s |k~>`.
    #[inline]
    pub fn action(&self, k: usize) -> (usize, Complex64) {
        let kt = k ^ self.x as usize;
        let sign = if (k as u64 & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let phase = match self.y_count() % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        };
        (kt, phase)
    }

    /// Real-valued action for strings with even Y-count.
    #[inline]
    pub fn action_real(&self, k: usize) -> (usize, f64) {
        let (kt, s) = self.action(k);
        debug_assert!(s.im == 0.0);
        (kt, s.re)
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut out = PauliString::identity(self.n_qubits);
        let mut phase = self.coeff * other.coeff;
        let support = self.support() | other.support();
        for q in 0..self.n_qubits {
            if support & qubit_mask(self.n_qubits, q) == 0 {
                continue;
            }
            let (ph, p) = self.get(q).mul(other.get(q));
            phase *= ph;
            out.set(q, p);
        }
        out.coeff = phase;
        out
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &PauliString) -> PauliString {
        let n = self.n_qubits + other.n_qubits;
        assert!(n <= MAX_QUBITS);
        PauliString::new(
            n,
            (self.x << other.n_qubits) | other.x,
            (self.z << other.n_qubits) | other.z,
            self.coeff * other.coeff,
        )
    }

    /// Splits into unit-coefficient factors on the first `n_first` qubits and
    /// the remainder.
    pub fn split(&self, n_first: usize) -> (PauliString, PauliString) {
        let n_rest = self.n_qubits - n_first;
        let lo = (1u64 << n_rest) - 1;
        (
            PauliString::new(n_first, self.x >> n_rest, self.z >> n_rest, ONE),
            PauliString::new(n_rest, self.x & lo, self.z & lo, ONE),
        )
    }

    /// Dense matrix including the coefficient.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let (kt, s) = self.action(k);
            m[(kt, k)] = self.coeff * s;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff.im == 0.0 {
            write!(f, "{:?} {}", self.coeff.re, self.letters())
        } else {
            write!(f, "({:?}{:+?}i) {}", self.coeff.re, self.coeff.im, self.letters())
        }
    }
}

/// Returns `(k~, s)` with `P|k> = s|k~>` for the letters of `p`.
pub fn pauli_action(p: &PauliString, k: usize) -> (usize, Complex64) {
    p.action(k)
}

/// Conjugates `p` on `2 * n_pairs` qubits by the entangler
/// `E = prod_i CNOT(i, i + n_pairs)`, returning `E† P E`.
pub fn conjugate_by_entangler(p: &PauliString, n_pairs: usize) -> PauliString {
    assert_eq!(p.n_qubits, 2 * n_pairs, "entangler acts on 2N qubits");
    let mut out = *p;
    for i in 0..n_pairs {
        conjugate_cnot(&mut out, i, i + n_pairs);
    }
    out
}

/// In-place CNOT conjugation using the stabilizer-tableau update rule.
pub fn conjugate_cnot(p: &mut PauliString, control: usize, target: usize) {
    let n = p.n_qubits;
    let (mc, mt) = (qubit_mask(n, control), qubit_mask(n, target));
    let xc = p.x & mc != 0;
    let zc = p.z & mc != 0;
    let xt = p.x & mt != 0;
    let zt = p.z & mt != 0;
    if xc && zt && (xt == zc) {
        p.coeff = -p.coeff;
    }
    if xc {
        p.x ^= mt;
    }
    if zt {
        p.z ^= mc;
    }
}

/// Qubit index of the pivot: the most significant X/Y position.
pub fn pivot_qubit(p: &PauliString) -> Option<usize> {
    (p.x != 0).then(|| p.n_qubits - 1 - (63 - p.x.leading_zeros() as usize))
}

/// The companion string `J` of `p`: identical except at the pivot, where
/// `X -> Y` and `Y -> -X`. For every `k` whose pivot bit is 0 (the set Ω),
/// `J|k> = i P|k>`.
pub fn companion_operator(p: &PauliString) -> Result<PauliString> {
    let q = pivot_qubit(p).ok_or(Error::NoXySupport)?;
    let mut j = *p;
    match p.get(q) {
        Pauli::X => j.set(q, Pauli::Y),
        Pauli::Y => {
            j.set(q, Pauli::X);
            j.coeff = -j.coeff;
        }
        _ => unreachable!("pivot carries X or Y"),
    }
    Ok(j)
}

/// A sum of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn constant(n_qubits: usize, c: f64) -> Self {
        let mut s = Self::new(n_qubits);
        s.push(PauliString::identity(n_qubits).with_coeff(Complex64::new(c, 0.0)));
        s
    }

    pub fn push(&mut self, term: PauliString) {
        assert_eq!(term.n_qubits, self.n_qubits);
        self.terms.push(term);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merges duplicate letter strings and drops coefficients below `tol`.
    /// Output order is deterministic: first appearance of each key.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        let mut order: Vec<(u64, u64)> = Vec::new();
        let mut acc: HashMap<(u64, u64), Complex64> = HashMap::new();
        for t in &self.terms {
            let e = acc.entry(t.key()).or_insert_with(|| {
                order.push(t.key());
                Complex64::new(0.0, 0.0)
            });
            *e += t.coeff;
        }
        let terms = order
            .into_iter()
            .filter_map(|key| {
                let c = acc[&key];
                (c.norm() > tol).then(|| PauliString::new(self.n_qubits, key.0, key.1, c))
            })
            .collect();
        PauliSum { n_qubits: self.n_qubits, terms }
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        let mut out = PauliSum::new(self.n_qubits);
        for a in &self.terms {
            for b in &other.terms {
                out.push(a.mul(b));
            }
        }
        out
    }

    pub fn extend(&mut self, other: &PauliSum) {
        for t in &other.terms {
            self.push(*t);
        }
    }

    pub fn scaled(&self, c: Complex64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|t| t.with_coeff(t.coeff * c)).collect(),
        }
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.im.abs()).fold(0.0, f64::max)
    }

    /// Drops imaginary parts, which must be below `tol`.
    pub fn into_real(mut self, tol: f64) -> Result<PauliSum> {
        let m = self.max_imag();
        if m > tol {
            return Err(Error::InvalidArgument(format!(
                "operator is not Hermitian-real: imaginary coefficient {m:e}"
            )));
        }
        for t in &mut self.terms {
            t.coeff.im = 0.0;
        }
        Ok(self)
    }

    /// Coefficient of the identity string.
    pub fn identity_coeff(&self) -> f64 {
        self.terms.iter().filter(|t| t.is_identity()).map(|t| t.coeff.re).sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            for k in 0..dim {
                let (kt, s) = t.action(k);
                m[(kt, k)] += t.coeff * s;
            }
        }
        m
    }

    /// `H v` for a complex vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for t in &self.terms {
            for (k, &a) in v.iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (kt, s) = t.action(k);
                out[kt] += t.coeff * s * a;
            }
        }
        out
    }

    /// One `"coeff letters"` line per term.
    pub fn to_text(&self) -> String {
        self.terms.iter().map(|t| format!("{t}\n")).collect()
    }

    /// Parses the output of [`PauliSum::to_text`] (real coefficients only).
    pub fn from_text(text: &str) -> Result<PauliSum> {
        let mut out: Option<PauliSum> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (c, letters) = line.split_once(char::is_whitespace).ok_or_else(|| {
                Error::InvalidArgument(format!("line {}: expected 'coeff letters'", lineno + 1))
            })?;
            let c: f64 = c.parse().map_err(|_| {
                Error::InvalidArgument(format!("line {}: bad coefficient '{c}'", lineno + 1))
            })?;
            let p = PauliString::from_letters(letters.trim(), c)?;
            let sum = out.get_or_insert_with(|| PauliSum::new(p.n_qubits));
            if p.n_qubits != sum.n_qubits {
                return Err(Error::DimensionMismatch { expected: sum.n_qubits, got: p.n_qubits });
            }
            sum.push(p);
        }
        out.ok_or_else(|| Error::InvalidArgument("empty Pauli sum".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pauli_dense(p: Pauli) -> DMatrix<Complex64> {
        let z = Complex64::new(0.0, 0.0);
        match p {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c(1.0)]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -Complex64::i(), Complex64::i(), z]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c(-1.0)]),
        }
    }

    /// Kronecker product with qubit 0 leftmost.
    fn kron_dense(p: &PauliString) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, p.coeff);
        for q in 0..p.n_qubits {
            m = m.kronecker(&pauli_dense(p.get(q)));
        }
        m
    }

    fn cnot_dense(n: usize, ctl: usize, t: usize) -> DMatrix<Complex64> {
        let dim = 1 << n;
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..dim {
            let out = if bit(k, n, ctl) == 1 { k ^ (qubit_mask(n, t) as usize) } else { k };
            m[(out, k)] = c(1.0);
        }
        m
    }

    fn all_strings(n: usize) -> impl Iterator<Item = PauliString> {
        (0..4usize.pow(n as u32)).map(move |mut code| {
            let mut p = PauliString::identity(n);
            for q in 0..n {
                p.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][code % 4]);
                code /= 4;
            }
            p
        })
    }

    #[test]
    fn action_matches_kronecker() {
        for n in 1..=3 {
            for p in all_strings(n) {
                assert!((kron_dense(&p) - p.to_dense()).norm() < 1e-14, "{}", p.letters());
            }
        }
    }

    #[test]
    fn action_examples() {
        let x = PauliString::from_letters("X", 1.0).unwrap();
        assert_eq!(x.action(0), (1, c(1.0)));
        let z = PauliString::from_letters("Z", 1.0).unwrap();
        assert_eq!(z.action(1), (1, c(-1.0)));
        let yy = PauliString::from_letters("YY", 1.0).unwrap();
        assert_eq!(yy.action(0b01), (0b10, c(1.0)));
    }

    #[test]
    fn products_match_dense() {
        for a in all_strings(2) {
            for b in all_strings(2) {
                let prod = a.mul(&b);
                assert!((prod.to_dense() - a.to_dense() * b.to_dense()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn entangler_conjugation_matches_dense() {
        for n_pairs in 1..=2 {
            let n = 2 * n_pairs;
            let mut e = DMatrix::identity(1 << n, 1 << n);
            for i in 0..n_pairs {
                e = cnot_dense(n, i, i + n_pairs) * e;
            }
            for p in all_strings(n) {
                let conj = conjugate_by_entangler(&p, n_pairs);
                let want = e.adjoint() * p.to_dense() * &e;
                assert!((conj.to_dense() - want).norm() < 1e-13, "{}", p.letters());
            }
        }
    }

    #[test]
    fn entangler_examples() {
        let conj = |s: &str| conjugate_by_entangler(&PauliString::from_letters(s, 1.0).unwrap(), 1);
        assert_eq!(conj("XI").letters(), "XX");
        assert_eq!(conj("IZ").letters(), "ZZ");
        assert_eq!(conj("ZI").letters(), "ZI");
        assert_eq!(conj("ZI").coeff, c(1.0));
    }

    #[test]
    fn entangler_is_involution() {
        for p in all_strings(4) {
            let twice = conjugate_by_entangler(&conjugate_by_entangler(&p, 2), 2);
            assert_eq!(twice, p);
        }
    }

    #[test]
    fn companion_examples() {
        let j = companion_operator(&PauliString::from_letters("X", 1.0).unwrap()).unwrap();
        assert_eq!(j.letters(), "Y");
        assert_eq!(j.coeff, c(1.0));
        let j = companion_operator(&PauliString::from_letters("XX", 1.0).unwrap()).unwrap();
        assert_eq!(j.letters(), "YX");
        let j = companion_operator(&PauliString::from_letters("YY", 1.0).unwrap()).unwrap();
        assert_eq!(j.letters(), "XY");
        assert_eq!(j.coeff, c(-1.0));
        assert!(matches!(
            companion_operator(&PauliString::from_letters("ZI", 1.0).unwrap()),
            Err(Error::NoXySupport)
        ));
    }

    #[test]
    fn pivot_is_most_significant_xy() {
        let p = PauliString::from_letters("ZIXY", 1.0).unwrap();
        assert_eq!(pivot_qubit(&p), Some(2));
        assert_eq!(pivot_qubit(&PauliString::from_letters("ZZ", 1.0).unwrap()), None);
    }

    #[test]
    fn split_and_tensor_invert() {
        for p in all_strings(3) {
            let (a, b) = p.split(1);
            assert_eq!(a.tensor(&b), p);
        }
    }

    #[test]
    fn simplify_merges_duplicates() {
        let mut s = PauliSum::new(2);
        s.push(PauliString::from_letters("XX", 0.25).unwrap());
        s.push(PauliString::from_letters("ZI", 1.0).unwrap());
        s.push(PauliString::from_letters("XX", 0.25).unwrap());
        s.push(PauliString::from_letters("ZI", -1.0).unwrap());
        let m = s.simplify(1e-12);
        assert_eq!(m.len(), 1);
        assert_eq!(m.terms[0].coeff, c(0.5));
        assert!((m.to_dense() - s.to_dense()).norm() < 1e-14);
    }

    #[test]
    fn text_roundtrip() {
        let mut s = PauliSum::new(4);
        s.push(PauliString::from_letters("XIXZ", 0.5).unwrap());
        s.push(PauliString::from_letters("IIII", -1.25).unwrap());
        assert_eq!(s.to_text(), "0.5 XIXZ\n-1.25 IIII\n");
        assert_eq!(PauliSum::from_text(&s.to_text()).unwrap(), s);
    }
}

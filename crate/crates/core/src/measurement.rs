//! Shot-based energy estimation of the hybrid state `N E (|psi> ⊗ |phi>)`.
//!
//! Every Hamiltonian term is conjugated by the entangler and split into a
//! `psi` factor and a `phi` factor. Diagonal factors are read out in the
//! computational basis; factors with X/Y support are rotated by a
//! diagonalizer whose outcomes decode to `(k, sigma)`: the member `k` of the
//! pair `{k, k~}` with pivot bit 0 and the eigenvalue `sigma`. The network
//! enters only through the permuted query `b'(k, j) = B(k, k xor j)`.
//!
//! The estimators assume real amplitudes, which holds for every circuit in
//! this crate.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::neural::{BilinearForm, Config, NeuralAmplitudeModel};
use crate::oracles::SectorOperator;
use crate::pauli::{companion_operator, conjugate_by_entangler, pivot_qubit, qubit_mask, PauliString, PauliSum};
use crate::statevector::{sample, GateOp, State};

/// Largest total qubit count of the dense hybrid path.
pub const MAX_DENSE_QUBITS: usize = 16;

/// Tolerance on imaginary parts treated as zero.
const IMAG_TOL: f64 = 1e-12;

/// A measurement circuit for one Pauli string and its outcome decoder.
#[derive(Debug, Clone)]
pub struct DiagonalizedBasis {
    pub source: PauliString,
    pub gates: Vec<GateOp>,
    pub pivot: usize,
}

/// Builds `V` with `m - 1` CNOTs fanning out of the pivot, then `S†` on the
/// pivot for odd Y-count, then `H` on the pivot. `V†|x>` is the eigenvector
/// `(sigma|k> + s|k~>)/sqrt 2` up to sign, with `P|k> = s|k~>`. The sign of
/// a real coefficient is kept; its magnitude is dropped.
pub fn build_diagonalizer(p: &PauliString) -> Result<DiagonalizedBasis> {
    let pivot = pivot_qubit(p).ok_or(Error::NoXySupport)?;
    if p.coeff.im.abs() > IMAG_TOL || p.coeff.re == 0.0 {
        return Err(Error::InvalidArgument(format!("{} needs a real nonzero coefficient", p.letters())));
    }
    let n = p.n_qubits;
    let mut gates: Vec<GateOp> = (0..n)
        .filter(|&q| q != pivot && p.x & qubit_mask(n, q) != 0)
        .map(|q| GateOp::Cnot { control: pivot, target: q })
        .collect();
    if p.y_count() % 2 == 1 {
        gates.push(GateOp::Sdg { target: pivot });
    }
    gates.push(GateOp::H { target: pivot });
    let source = p.with_coeff(Complex64::new(p.coeff.re.signum(), 0.0));
    Ok(DiagonalizedBasis { source, gates, pivot })
}

impl DiagonalizedBasis {
    pub fn n_qubits(&self) -> usize {
        self.source.n_qubits
    }

    pub fn two_qubit_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Partner `k~ = k xor x-mask`.
    pub fn partner(&self, k: usize) -> usize {
        k ^ self.source.x as usize
    }

    /// Measured bitstring to `(k, sigma)` with `k` in Ω.
    pub fn decode(&self, x: usize) -> (usize, f64) {
        let pm = qubit_mask(self.n_qubits(), self.pivot) as usize;
        let k = x & !pm;
        let s = self.source.coeff * self.source.action(k).1;
        // Remove the odd factor of i so that `t` is a real sign.
        let t = if self.source.y_count() % 2 == 1 { (s / Complex64::i()).re } else { s.re };
        let flip = if x & pm != 0 { -1.0 } else { 1.0 };
        (k, flip * t)
    }

    /// Applies `V` to a copy of `state`.
    pub fn rotate(&self, state: &State) -> Result<State> {
        let mut s = state.clone();
        s.apply_all(&self.gates)?;
        Ok(s)
    }
}

/// Mean, standard error and shot count of one estimated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub shots: usize,
}

impl TermEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, shots: n }
    }

    /// Same statistics as [`TermEstimate::from_values`] for `(value, count)`
    /// pairs.
    pub fn from_counts(values: &[(f64, f64)]) -> Self {
        let n: f64 = values.iter().map(|v| v.1).sum();
        let mean = values.iter().map(|&(v, c)| v * c).sum::<f64>() / n;
        let stderr = if n > 1.0 {
            let var = values.iter().map(|&(v, c)| c * (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, shots: n as usize }
    }

    /// Sum of two independent estimates.
    pub fn plus(self, other: TermEstimate) -> Self {
        Self { mean: self.mean + other.mean, stderr: self.stderr.hypot(other.stderr), shots: self.shots }
    }
}

/// Physical network values `B(k, l)` over all `4^N` configurations.
#[derive(Debug, Clone)]
pub struct AmplitudeTable {
    pub n: usize,
    values: Vec<f64>,
}

impl AmplitudeTable {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let dim = 1usize << n;
        let values = (0..dim * dim).map(|x| f(x >> n, x & (dim - 1))).collect();
        Self { n, values }
    }

    pub fn ones(n: usize) -> Self {
        Self::from_fn(n, |_, _| 1.0)
    }

    /// Evaluates the model on every unmasked configuration.
    pub fn from_model(model: &NeuralAmplitudeModel) -> Self {
        let n = model.n_orb();
        let dim = 1usize << n;
        let live: Vec<Config> = (0..dim)
            .flat_map(|k| (0..dim).map(move |l| (k, l)))
            .filter(|&(k, l)| model.mask(k, l) != 0.0)
            .collect();
        let vals = model.raw_batch(&live);
        let mut values = vec![0.0; dim * dim];
        for (&(k, l), v) in live.iter().zip(vals) {
            values[(k << n) | l] = v;
        }
        Self { n, values }
    }

    #[inline]
    pub fn get(&self, c: Config) -> f64 {
        self.values[(c.0 << self.n) | c.1]
    }

    /// Permuted query `b'(k, j) = B(k, k xor j)`.
    #[inline]
    pub fn permuted(&self, k: usize, j: usize) -> f64 {
        self.get((k, k ^ j))
    }
}

/// Outcomes on the `phi` side: paired shots, or the exact distribution.
#[derive(Debug, Clone)]
pub enum PhiDraws {
    Shots(Vec<usize>),
    Exact(Vec<(usize, f64)>),
}

impl PhiDraws {
    /// Samples or enumerates the computational-basis distribution.
    pub fn draw(state: &State, shots: usize, exact: bool, seed: u64, stream: u64) -> Self {
        if exact {
            let probs = state.probabilities();
            PhiDraws::Exact(probs.into_iter().enumerate().filter(|&(_, p)| p > 0.0).collect())
        } else {
            PhiDraws::Shots(sample(state, shots, seed, stream))
        }
    }
}

/// One weighted product `w b(x) b(y)` over physical configurations.
type Product = (Config, Config, f64);

/// Where the sampled products of a term are accumulated for training.
enum Sink<'a> {
    None,
    /// Numerator with a term coefficient.
    Numerator(&'a mut BilinearForm, f64),
    /// Denominator, plus the identity coefficient on the numerator side.
    Norm(&'a mut BilinearForm, f64),
}

/// Averages `f` over the paired draws. `f(x_psi, x_phi, out)` pushes the
/// products contributed by one joint outcome.
fn run_term(
    psi: &[usize],
    phi: &PhiDraws,
    amps: &AmplitudeTable,
    mut sink: Sink<'_>,
    f: impl Fn(usize, usize, &mut Vec<Product>),
) -> Result<TermEstimate> {
    if psi.is_empty() {
        return Err(Error::InvalidArgument("empty sample stream".into()));
    }
    if let PhiDraws::Shots(v) = phi {
        if v.len() != psi.len() {
            return Err(Error::DimensionMismatch { expected: psi.len(), got: v.len() });
        }
    }
    let shots = psi.len() as f64;
    // Identical joint outcomes contribute identical products; visit each
    // distinct outcome once, in sorted order so sums are reproducible.
    let mut joint: Vec<(usize, usize)> = match phi {
        PhiDraws::Shots(v) => psi.iter().copied().zip(v.iter().copied()).collect(),
        PhiDraws::Exact(_) => psi.iter().map(|&k| (k, 0)).collect(),
    };
    joint.sort_unstable();
    let mut values = Vec::new();
    let mut buf = Vec::new();
    let mut scratch = Vec::new();
    let mut start = 0;
    while start < joint.len() {
        let (xk, xj) = joint[start];
        let mut end = start + 1;
        while end < joint.len() && joint[end] == (xk, xj) {
            end += 1;
        }
        let count = (end - start) as f64;
        start = end;
        buf.clear();
        match phi {
            PhiDraws::Shots(_) => f(xk, xj, &mut buf),
            PhiDraws::Exact(dist) => {
                for &(xj, p) in dist {
                    scratch.clear();
                    f(xk, xj, &mut scratch);
                    buf.extend(scratch.iter().map(|&(x, y, w)| (x, y, w * p)));
                }
            }
        }
        let v: f64 = buf.iter().map(|&(x, y, w)| w * amps.get(x) * amps.get(y)).sum();
        values.push((v, count));
        let scale = count / shots;
        match &mut sink {
            Sink::None => {}
            Sink::Numerator(form, c) => {
                for &(x, y, w) in &buf {
                    form.add_pair(x, y, *c * w * scale);
                }
            }
            Sink::Norm(form, c) => {
                for &(x, y, w) in &buf {
                    debug_assert_eq!(x, y);
                    form.add_norm(x, w * scale);
                    form.add_pair(x, y, *c * w * scale);
                }
            }
        }
    }
    Ok(TermEstimate::from_counts(&values))
}

fn numerator_sink<'a, 'b: 'a>(form: &'a mut Option<&'b mut BilinearForm>, coeff: f64) -> Sink<'a> {
    match form {
        Some(f) => Sink::Numerator(&mut **f, coeff),
        None => Sink::None,
    }
}

fn z_sign(z: u64, k: usize) -> f64 {
    if (k as u64 & z).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[inline]
fn phys(k: usize, j: usize) -> Config {
    (k, k ^ j)
}

fn check_z_only(p: &PauliString) -> Result<()> {
    if p.x != 0 {
        return Err(Error::InvalidArgument(format!("{} is not diagonal", p.letters())));
    }
    Ok(())
}

/// Diagonal term `P = P_psi ⊗ P_phi`: mean of `S(k, j) b'(k, j)^2`. The
/// identity string gives the norm.
pub fn estimate_z_term(
    psi: &[usize],
    phi: &PhiDraws,
    amps: &AmplitudeTable,
    p_psi: &PauliString,
    p_phi: &PauliString,
) -> Result<TermEstimate> {
    z_term(psi, phi, amps, p_psi, p_phi, Sink::None)
}

fn z_term(
    psi: &[usize],
    phi: &PhiDraws,
    amps: &AmplitudeTable,
    p_psi: &PauliString,
    p_phi: &PauliString,
    sink: Sink<'_>,
) -> Result<TermEstimate> {
    check_z_only(p_psi)?;
    check_z_only(p_phi)?;
    let (zk, zj) = (p_psi.z, p_phi.z);
    run_term(psi, phi, amps, sink, |k, j, out| {
        let c = phys(k, j);
        out.push((c, c, z_sign(zk, k) * z_sign(zj, j)));
    })
}

/// Which factor carries the X/Y support in a mixed term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XySide {
    Psi,
    Phi,
}

/// One factor with X/Y support, measured through `basis`; the other is
/// diagonal with Z-mask `z_other`. Draws on the X/Y side are raw rotated
/// outcomes.
pub fn estimate_mixed_term(
    psi: &[usize],
    phi: &PhiDraws,
    amps: &AmplitudeTable,
    side: XySide,
    basis: &DiagonalizedBasis,
    diag: &PauliString,
) -> Result<TermEstimate> {
    mixed_term(psi, phi, amps, side, basis, diag, Sink::None)
}

fn mixed_term(
    psi: &[usize],
    phi: &PhiDraws,
    amps: &AmplitudeTable,
    side: XySide,
    basis: &DiagonalizedBasis,
    diag: &PauliString,
    sink: Sink<'_>,
) -> Result<TermEstimate> {
    check_z_only(diag)?;
    let z = diag.z;
    match side {
        XySide::Psi => run_term(psi, phi, amps, sink, |x, j, out| {
            let (k, sigma) = basis.decode(x);
            let kt = basis.partner(k);
            out.push((phys(k, j), phys(kt, j), sigma * z_sign(z, j)));
        }),
        XySide::Phi => run_term(psi, phi, amps, sink, |k, x, out| {
            let (j, sigma) = basis.decode(x);
            let jt = basis.partner(j);
            out.push((phys(k, j), phys(k, jt), sigma * z_sign(z, k)));
        }),
    }
}

/// Rotated draws for one X/Y term: `H`-basis streams and companion
/// (`J`-basis) streams on both sides.
#[derive(Debug, Clone)]
pub struct XyDraws {
    pub psi_h: Vec<usize>,
    pub phi_h: PhiDraws,
    pub psi_j: Vec<usize>,
    pub phi_j: PhiDraws,
}

/// Decoders for an X/Y term: `(H_psi, H_phi, J_psi, J_phi)`.
pub struct XyBases {
    pub h_psi: DiagonalizedBasis,
    pub h_phi: DiagonalizedBasis,
    pub j_psi: DiagonalizedBasis,
    pub j_phi: DiagonalizedBasis,
}

impl XyBases {
    pub fn new(p_psi: &PauliString, p_phi: &PauliString) -> Result<Self> {
        Ok(Self {
            h_psi: build_diagonalizer(p_psi)?,
            h_phi: build_diagonalizer(p_phi)?,
            j_psi: build_diagonalizer(&companion_operator(p_psi)?)?,
            j_phi: build_diagonalizer(&companion_operator(p_phi)?)?,
        })
    }
}

/// Both factors with X/Y support: `term1 + term2`, with
/// `term1 = <(b'_kj b'_k~j~ + b'_kj~ b'_k~j) sigma_k sigma_j / 2>` over the
/// `H` streams and
/// `term2 = <(-b'_kj b'_k~j~ + b'_kj~ b'_k~j) sigma_k sigma_j / 2>` over the
/// companion streams.
pub fn estimate_xy_term(draws: &XyDraws, amps: &AmplitudeTable, bases: &XyBases) -> Result<TermEstimate> {
    xy_term(draws, amps, bases, None, 0.0)
}

/// Products of one joint X/Y outcome; `sign` is `+1` for the `H` streams and
/// `-1` for the companion streams.
fn xy_products<'a>(
    sign: f64,
    bk: &'a DiagonalizedBasis,
    bj: &'a DiagonalizedBasis,
) -> impl Fn(usize, usize, &mut Vec<Product>) + 'a {
    move |xk, xj, out| {
        let (k, sk) = bk.decode(xk);
        let (j, sj) = bj.decode(xj);
        let (kt, jt) = (bk.partner(k), bj.partner(j));
        let s = 0.5 * sk * sj;
        out.push((phys(k, j), phys(kt, jt), sign * s));
        out.push((phys(k, jt), phys(kt, j), s));
    }
}

fn xy_term(
    draws: &XyDraws,
    amps: &AmplitudeTable,
    bases: &XyBases,
    mut form: Option<&mut BilinearForm>,
    coeff: f64,
) -> Result<TermEstimate> {
    let h_sink = numerator_sink(&mut form, coeff);
    let t1 = run_term(&draws.psi_h, &draws.phi_h, amps, h_sink, xy_products(1.0, &bases.h_psi, &bases.h_phi))?;
    let j_sink = numerator_sink(&mut form, coeff);
    let t2 = run_term(&draws.psi_j, &draws.phi_j, amps, j_sink, xy_products(-1.0, &bases.j_psi, &bases.j_phi))?;
    Ok(t1.plus(t2))
}

/// Sampling options of [`estimate_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotOptions {
    pub shots: usize,
    pub seed: u64,
    /// Enumerate the `phi` distribution instead of sampling it.
    pub exact_phi: bool,
}

impl ShotOptions {
    pub fn new(shots: usize, seed: u64) -> Self {
        Self { shots, seed, exact_phi: false }
    }
}

/// Stream tags within a term.
const TAG_PSI: u64 = 0;
const TAG_PHI: u64 = 1;
const TAG_PSI_J: u64 = 2;
const TAG_PHI_J: u64 = 3;
const TAGS_PER_TERM: u64 = 8;

fn stream(term: usize, tag: u64) -> u64 {
    term as u64 * TAGS_PER_TERM + tag
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Identity,
    Z,
    Mixed,
    Xy,
}

/// Per-term record of an energy estimate.
#[derive(Debug, Clone, Serialize)]
pub struct TermTrace {
    pub index: usize,
    /// Conjugated string.
    pub pauli: String,
    pub kind: TermKind,
    pub coeff: f64,
    pub mean: f64,
    pub stderr: f64,
    pub shots: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyEstimate {
    pub energy: f64,
    pub stderr: f64,
    /// `A' = sum_t c_t <P_t>` without the identity term.
    pub numerator: TermEstimate,
    pub norm: TermEstimate,
    pub identity: f64,
    pub terms: Vec<TermTrace>,
}

/// A conjugated Hamiltonian ready for repeated estimation.
#[derive(Debug, Clone)]
pub struct ConjugatedHamiltonian {
    pub n: usize,
    pub identity: f64,
    /// `(original index, conjugated string with real coefficient)`.
    pub terms: Vec<(usize, PauliString, f64)>,
}

impl ConjugatedHamiltonian {
    pub fn new(h_full: &PauliSum) -> Result<Self> {
        if h_full.n_qubits % 2 != 0 {
            return Err(Error::InvalidArgument("expected an even qubit count".into()));
        }
        let n = h_full.n_qubits / 2;
        let mut identity = 0.0;
        let mut terms = Vec::new();
        for (i, t) in h_full.terms.iter().enumerate() {
            if t.coeff.im.abs() > IMAG_TOL {
                return Err(Error::InvalidArgument(format!("term {i} has a complex coefficient")));
            }
            let c = conjugate_by_entangler(t, n);
            if c.y_count() % 2 == 1 {
                return Err(Error::OddYCount);
            }
            if c.is_identity() {
                identity += c.coeff.re;
            } else if c.coeff.re != 0.0 {
                terms.push((i, c, c.coeff.re));
            }
        }
        Ok(Self { n, identity, terms })
    }
}

fn check_real(s: &State, what: &str) -> Result<()> {
    if s.amps.iter().any(|a| a.im.abs() > IMAG_TOL) {
        return Err(Error::InvalidArgument(format!("{what} has complex amplitudes")));
    }
    Ok(())
}

/// Shot estimate of `<Psi|H|Psi> / <Psi|Psi>` with per-term sub-seeded
/// streams. The identity coefficient multiplies the norm estimate, so
/// `E = c_I + A'/B`. When `form` is given, every sampled product is also
/// accumulated into it so that `form` evaluates to the same energy.
pub fn estimate_energy_with_form(
    psi: &State,
    phi: &State,
    amps: &AmplitudeTable,
    h: &ConjugatedHamiltonian,
    opts: ShotOptions,
    mut form: Option<&mut BilinearForm>,
) -> Result<EnergyEstimate> {
    let n = h.n;
    if psi.n_qubits != n || phi.n_qubits != n || amps.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.n_qubits });
    }
    check_real(psi, "psi")?;
    check_real(phi, "phi")?;
    let shots = opts.shots;
    let seed = opts.seed;
    let phi_draw = |s: &State, st: u64| PhiDraws::draw(s, shots, opts.exact_phi, seed, st);

    let mut traces = Vec::with_capacity(h.terms.len());
    let mut num_mean = 0.0;
    let mut num_var = 0.0;
    for (t, (orig, p, c)) in h.terms.iter().enumerate() {
        let (pk, pj) = p.split(n);
        let (kind, est) = match (pk.x != 0, pj.x != 0) {
            (false, false) => {
                let ks = sample(psi, shots, seed, stream(t, TAG_PSI));
                let js = phi_draw(phi, stream(t, TAG_PHI));
                (TermKind::Z, z_term(&ks, &js, amps, &pk, &pj, numerator_sink(&mut form, *c))?)
            }
            (true, false) => {
                let b = build_diagonalizer(&pk)?;
                let ks = sample(&b.rotate(psi)?, shots, seed, stream(t, TAG_PSI));
                let js = phi_draw(phi, stream(t, TAG_PHI));
                (TermKind::Mixed, mixed_term(&ks, &js, amps, XySide::Psi, &b, &pj, numerator_sink(&mut form, *c))?)
            }
            (false, true) => {
                let b = build_diagonalizer(&pj)?;
                let ks = sample(psi, shots, seed, stream(t, TAG_PSI));
                let js = phi_draw(&b.rotate(phi)?, stream(t, TAG_PHI));
                (TermKind::Mixed, mixed_term(&ks, &js, amps, XySide::Phi, &b, &pk, numerator_sink(&mut form, *c))?)
            }
            (true, true) => {
                let bases = XyBases::new(&pk, &pj)?;
                let draws = XyDraws {
                    psi_h: sample(&bases.h_psi.rotate(psi)?, shots, seed, stream(t, TAG_PSI)),
                    phi_h: phi_draw(&bases.h_phi.rotate(phi)?, stream(t, TAG_PHI)),
                    psi_j: sample(&bases.j_psi.rotate(psi)?, shots, seed, stream(t, TAG_PSI_J)),
                    phi_j: phi_draw(&bases.j_phi.rotate(phi)?, stream(t, TAG_PHI_J)),
                };
                (TermKind::Xy, xy_term(&draws, amps, &bases, form.as_deref_mut(), *c)?)
            }
        };
        num_mean += c * est.mean;
        num_var += (c * est.stderr).powi(2);
        traces.push(TermTrace {
            index: *orig,
            pauli: p.letters(),
            kind,
            coeff: *c,
            mean: est.mean,
            stderr: est.stderr,
            shots: est.shots,
        });
    }

    let t = h.terms.len();
    let ks = sample(psi, shots, seed, stream(t, TAG_PSI));
    let js = phi_draw(phi, stream(t, TAG_PHI));
    let id = PauliString::identity(n);
    let norm_sink = match form {
        Some(f) => Sink::Norm(f, h.identity),
        None => Sink::None,
    };
    let norm = z_term(&ks, &js, amps, &id, &id, norm_sink)?;
    if !(norm.mean > 0.0) {
        return Err(Error::DegenerateEstimate(norm.mean));
    }
    let ratio = num_mean / norm.mean;
    let var = num_var / norm.mean.powi(2) + (ratio / norm.mean).powi(2) * norm.stderr.powi(2);
    Ok(EnergyEstimate {
        energy: h.identity + ratio,
        stderr: var.sqrt(),
        numerator: TermEstimate { mean: num_mean, stderr: num_var.sqrt(), shots },
        norm,
        identity: h.identity,
        terms: traces,
    })
}

/// [`estimate_energy_with_form`] for a model and a physical Hamiltonian.
pub fn estimate_energy(
    psi: &State,
    phi: &State,
    model: &NeuralAmplitudeModel,
    h_full: &PauliSum,
    opts: ShotOptions,
) -> Result<EnergyEstimate> {
    let h = ConjugatedHamiltonian::new(h_full)?;
    estimate_energy_with_form(psi, phi, &AmplitudeTable::from_model(model), &h, opts, None)
}

/// Dense `|Psi> = N E (|psi> ⊗ |phi>)` over `4^N` amplitudes.
pub fn hybrid_state(psi: &State, phi: &State, amps: &AmplitudeTable) -> Result<State> {
    let n = psi.n_qubits;
    if phi.n_qubits != n || amps.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: phi.n_qubits });
    }
    if 2 * n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge(2 * n, MAX_DENSE_QUBITS));
    }
    let dim = 1usize << n;
    let mut amps_out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        for j in 0..dim {
            let l = k ^ j;
            amps_out[(k << n) | l] = psi.amps[k] * phi.amps[j] * amps.get((k, l));
        }
    }
    Ok(State { n_qubits: 2 * n, amps: amps_out })
}

/// `(<Psi|H|Psi>, <Psi|Psi>)` by direct contraction.
pub fn exact_hybrid_expectation(
    psi: &State,
    phi: &State,
    amps: &AmplitudeTable,
    h_full: &PauliSum,
) -> Result<(f64, f64)> {
    let state = hybrid_state(psi, phi, amps)?;
    if h_full.n_qubits != state.n_qubits {
        return Err(Error::DimensionMismatch { expected: state.n_qubits, got: h_full.n_qubits });
    }
    let hv = h_full.apply(&state.amps);
    let num: Complex64 = state.amps.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
    Ok((num.re, state.norm_sqr()))
}

/// The exact hybrid energy as a bilinear form in `B` over the sector:
/// `A = sum_xy (u_x H_xy u_y) B_x B_y`, `norm = sum_x u_x^2 B_x^2`, where
/// `u(k, l) = a_k e_(k xor l)`.
pub fn exact_form(op: &SectorOperator, psi: &State, phi: &State) -> Result<BilinearForm> {
    let n = op.basis.n_orb;
    if psi.n_qubits != n || phi.n_qubits != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.n_qubits });
    }
    check_real(psi, "psi")?;
    check_real(phi, "phi")?;
    let u: Vec<f64> = op.basis.configs.iter().map(|&(k, l)| psi.amps[k].re * phi.amps[k ^ l].re).collect();
    let mut form = BilinearForm::new();
    for &c in &op.basis.configs {
        form.intern(c);
    }
    for (x, col) in op.columns.iter().enumerate() {
        if u[x] == 0.0 {
            continue;
        }
        let cx = op.basis.configs[x];
        for &(y, h) in col {
            let w = u[x] * h * u[y as usize];
            form.add_pair(cx, op.basis.configs[y as usize], w);
        }
        form.add_norm(cx, u[x] * u[x]);
    }
    Ok(form)
}

//! Masked MLP amplitude modulator `b(k, j)`, its reverse-mode gradient, and
//! the AdaMax optimizer.
//!
//! A configuration is a pair `(k, j)` of `N`-bit occupation strings for the
//! alpha and beta spin sectors. It is embedded as a `±1` vector of length
//! `2N` (k bits first), passed through `L` ReLU layers of width `2KN`, and a
//! final linear layer produces one scalar, multiplied by the particle-number
//! mask.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::bit;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// `(alpha bits, beta bits)`, each an `N`-bit basis index.
pub type Config = (usize, usize);

/// `±1` embedding of `(k, j)`.
pub fn embed(k: usize, j: usize, n: usize) -> Vec<f64> {
    let to_pm = |b: usize| if b == 1 { 1.0 } else { -1.0 };
    (0..n).map(|q| to_pm(bit(k, n, q))).chain((0..n).map(|q| to_pm(bit(j, n, q)))).collect()
}

/// Embedding of bitstrings given as `'0'/'1'` text (qubit 0 first).
pub fn embed_bits(k: &str, j: &str) -> Result<Vec<f64>> {
    if k.len() != j.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), got: j.len() });
    }
    let parse = |s: &str| {
        usize::from_str_radix(s, 2).map_err(|_| Error::InvalidArgument(format!("bad bitstring '{s}'")))
    };
    Ok(embed(parse(k)?, parse(j)?, k.len()))
}

/// 1 iff `popcount(k) = n_alpha` and `popcount(j) = n_beta`.
pub fn mask(k: usize, j: usize, n_alpha: usize, n_beta: usize) -> f64 {
    if k.count_ones() as usize == n_alpha && j.count_ones() as usize == n_beta {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub n_orb: usize,
    pub k: usize,
    /// Number of hidden ReLU layers `L`.
    pub layers: usize,
}

impl NetworkShape {
    /// Default depth `L = N - 3`, which needs `N >= 4`.
    pub fn for_orbitals(n_orb: usize, k: usize) -> Result<Self> {
        if n_orb < 4 {
            return Err(Error::InvalidArgument(format!(
                "default depth N-3 needs at least 4 orbitals, got {n_orb}"
            )));
        }
        Self::with_layers(n_orb, k, n_orb - 3)
    }

    pub fn with_layers(n_orb: usize, k: usize, layers: usize) -> Result<Self> {
        if n_orb == 0 || k == 0 || layers == 0 {
            return Err(Error::InvalidArgument("network dimensions must be positive".into()));
        }
        Ok(Self { n_orb, k, layers })
    }

    pub fn width(&self) -> usize {
        2 * self.k * self.n_orb
    }

    pub fn input(&self) -> usize {
        2 * self.n_orb
    }

    /// `(rows, cols)` of `W_0 .. W_L`.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let h = self.width();
        let mut shapes = vec![(h, self.input())];
        shapes.extend(std::iter::repeat((h, h)).take(self.layers - 1));
        shapes.push((1, h));
        shapes
    }

    pub fn param_count(&self) -> usize {
        self.layer_shapes().iter().map(|(r, c)| r * c + r).sum()
    }
}

/// Parameter count of the default-depth network.
pub fn nn_param_count(n_orb: usize, k: usize) -> Result<usize> {
    Ok(NetworkShape::for_orbitals(n_orb, k)?.param_count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuralAmplitudeModel {
    pub shape: NetworkShape,
    pub n_alpha: usize,
    pub n_beta: usize,
    /// Flat parameters, layer by layer: `W_i` row-major then `c_i`.
    pub params: Vec<f64>,
}

/// Cached activations of a batched forward pass.
struct Tape {
    /// Inputs to each layer: `x_0 .. x_L`, columns are configurations.
    inputs: Vec<DMatrix<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<DMatrix<f64>>,
    out: DVector<f64>,
}

impl NeuralAmplitudeModel {
    /// He-uniform hidden layers; the output layer starts at `W_L = 0`,
    /// `c_L = 1` so that `b` equals the mask.
    pub fn new(shape: NetworkShape, n_alpha: usize, n_beta: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(shape.param_count());
        let shapes = shape.layer_shapes();
        for (i, &(rows, cols)) in shapes.iter().enumerate() {
            if i + 1 == shapes.len() {
                params.extend(std::iter::repeat(0.0).take(rows * cols));
                params.extend(std::iter::repeat(1.0).take(rows));
            } else {
                let limit = (6.0 / cols as f64).sqrt();
                params.extend((0..rows * cols).map(|_| rng.gen_range(-limit..limit)));
                params.extend(std::iter::repeat(0.0).take(rows));
            }
        }
        Self { shape, n_alpha, n_beta, params }
    }

    /// Model whose output is identically the mask.
    pub fn constant_mask(shape: NetworkShape, n_alpha: usize, n_beta: usize) -> Self {
        let mut m = Self::new(shape, n_alpha, n_beta, 0);
        m.params.iter_mut().for_each(|p| *p = 0.0);
        let last = m.params.len() - 1;
        m.params[last] = 1.0;
        m
    }

    pub fn n_orb(&self) -> usize {
        self.shape.n_orb
    }

    pub fn mask(&self, k: usize, j: usize) -> f64 {
        mask(k, j, self.n_alpha, self.n_beta)
    }

    /// Dense `(W_i, c_i)` for every layer.
    pub fn layers(&self) -> Vec<(DMatrix<f64>, DVector<f64>)> {
        let mut off = 0;
        self.shape
            .layer_shapes()
            .into_iter()
            .map(|(r, c)| {
                let w = DMatrix::from_row_slice(r, c, &self.params[off..off + r * c]);
                off += r * c;
                let b = DVector::from_column_slice(&self.params[off..off + r]);
                off += r;
                (w, b)
            })
            .collect()
    }

    fn run(&self, configs: &[Config]) -> Tape {
        let n = self.n_orb();
        let mut x = DMatrix::zeros(self.shape.input(), configs.len());
        for (col, &(k, j)) in configs.iter().enumerate() {
            x.set_column(col, &DVector::from_vec(embed(k, j, n)));
        }
        let layers = self.layers();
        let mut inputs = Vec::with_capacity(layers.len());
        let mut pre = Vec::with_capacity(layers.len() - 1);
        for (w, c) in &layers[..layers.len() - 1] {
            let mut z = w * &x;
            for mut col in z.column_iter_mut() {
                col += c;
            }
            let a = z.map(|v| v.max(0.0));
            inputs.push(x);
            pre.push(z);
            x = a;
        }
        let (w, c) = &layers[layers.len() - 1];
        let out = (w * &x).row(0).transpose().add_scalar(c[0]);
        inputs.push(x);
        Tape { inputs, pre, out }
    }

    /// Unmasked network output for each configuration.
    pub fn raw_batch(&self, configs: &[Config]) -> Vec<f64> {
        if configs.is_empty() {
            return Vec::new();
        }
        self.run(configs).out.iter().copied().collect()
    }

    /// `b(k, j)` for each configuration, mask applied.
    pub fn forward_batch(&self, configs: &[Config]) -> Vec<f64> {
        let live: Vec<Config> = configs.iter().copied().filter(|&(k, j)| self.mask(k, j) != 0.0).collect();
        let raw = self.raw_batch(&live);
        let mut it = raw.into_iter();
        configs
            .iter()
            .map(|&(k, j)| if self.mask(k, j) != 0.0 { it.next().unwrap() } else { 0.0 })
            .collect()
    }

    pub fn forward(&self, k: usize, j: usize) -> f64 {
        self.forward_batch(&[(k, j)])[0]
    }

    /// Gradient of `sum_i upstream[i] * b(configs[i])` with respect to the
    /// parameters. Masked-out configurations contribute nothing.
    pub fn backward(&self, configs: &[Config], upstream: &[f64]) -> Vec<f64> {
        let (live, g): (Vec<Config>, Vec<f64>) = configs
            .iter()
            .zip(upstream)
            .filter(|(&(k, j), _)| self.mask(k, j) != 0.0)
            .map(|(&c, &u)| (c, u))
            .unzip();
        if live.is_empty() {
            return vec![0.0; self.params.len()];
        }
        let tape = self.run(&live);
        self.backward_tape(&tape, &g)
    }

    fn backward_tape(&self, tape: &Tape, g: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.len()];
        let layers = self.layers();
        let shapes = self.shape.layer_shapes();
        let mut offsets = Vec::with_capacity(shapes.len());
        let mut off = 0;
        for &(r, c) in &shapes {
            offsets.push(off);
            off += r * c + r;
        }

        let write = |grad: &mut [f64], layer: usize, dw: &DMatrix<f64>, dc: &DVector<f64>| {
            let (r, c) = shapes[layer];
            let o = offsets[layer];
            for i in 0..r {
                for jj in 0..c {
                    grad[o + i * c + jj] = dw[(i, jj)];
                }
            }
            grad[o + r * c..o + r * c + r].copy_from_slice(dc.as_slice());
        };

        let last = layers.len() - 1;
        // Output layer: upstream is a row vector over the batch.
        let g_row = DMatrix::from_row_slice(1, g.len(), g);
        let dw = &g_row * tape.inputs[last].transpose();
        let dc = DVector::from_element(1, g.iter().sum());
        write(&mut grad, last, &dw, &dc);
        let mut delta = layers[last].0.transpose() * g_row;
        for layer in (0..last).rev() {
            delta.zip_apply(&tape.pre[layer], |d, z| {
                if z <= 0.0 {
                    *d = 0.0
                }
            });
            let dw = &delta * tape.inputs[layer].transpose();
            write(&mut grad, layer, &dw, &delta.column_sum());
            if layer > 0 {
                delta = layers[layer].0.transpose() * &delta;
            }
        }
        grad
    }

    /// `b` over `configs` together with the gradient of
    /// `sum_i upstream(b)[i] * b[i]`, sharing one forward pass.
    fn forward_backward(&self, configs: &[Config], upstream: impl FnOnce(&[f64]) -> Vec<f64>) -> (Vec<f64>, Vec<f64>) {
        let live: Vec<usize> = (0..configs.len()).filter(|&i| self.mask(configs[i].0, configs[i].1) != 0.0).collect();
        let cs: Vec<Config> = live.iter().map(|&i| configs[i]).collect();
        let mut b = vec![0.0; configs.len()];
        if cs.is_empty() {
            let _ = upstream(&b);
            return (b, vec![0.0; self.params.len()]);
        }
        let tape = self.run(&cs);
        for (&i, &v) in live.iter().zip(tape.out.iter()) {
            b[i] = v;
        }
        let up = upstream(&b);
        let g: Vec<f64> = live.iter().map(|&i| up[i]).collect();
        let grad = self.backward_tape(&tape, &g);
        (b, grad)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let layers = self.layers();
        Checkpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            n_orb: self.shape.n_orb,
            k: self.shape.k,
            layers: self.shape.layers,
            n_alpha: self.n_alpha,
            n_beta: self.n_beta,
            shapes: self.shape.layer_shapes().iter().map(|&(r, c)| [r, c]).collect(),
            weights: layers
                .iter()
                .map(|(w, _)| {
                    let mut row_major = Vec::with_capacity(w.len());
                    for row in w.row_iter() {
                        row_major.extend(row.iter());
                    }
                    row_major
                })
                .collect(),
            biases: layers.iter().map(|(_, c)| c.as_slice().to_vec()).collect(),
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let shape = NetworkShape::with_layers(ck.n_orb, ck.k, ck.layers)?;
        let shapes = shape.layer_shapes();
        let bad = |msg: String| Error::InvalidArgument(format!("checkpoint: {msg}"));
        if ck.shapes.len() != shapes.len() || ck.weights.len() != shapes.len() || ck.biases.len() != shapes.len() {
            return Err(bad("layer count mismatch".into()));
        }
        let mut params = Vec::with_capacity(shape.param_count());
        for (i, &(r, c)) in shapes.iter().enumerate() {
            if ck.shapes[i] != [r, c] || ck.weights[i].len() != r * c || ck.biases[i].len() != r {
                return Err(bad(format!("layer {i} has the wrong shape")));
            }
            params.extend(&ck.weights[i]);
            params.extend(&ck.biases[i]);
        }
        Ok(Self { shape, n_alpha: ck.n_alpha, n_beta: ck.n_beta, params })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.to_checkpoint())?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_checkpoint(&ck)
    }
}

/// JSON checkpoint: header fields plus row-major weights per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub n_orb: usize,
    pub k: usize,
    pub layers: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    pub shapes: Vec<[usize; 2]>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// The energy ratio as a bilinear form in the network outputs:
/// `A = sum w_xy b_x b_y`, `B = sum n_x b_x^2`, `E = A / B`.
#[derive(Debug, Clone, Default)]
pub struct BilinearForm {
    pub configs: Vec<Config>,
    /// `(x, y, w)` over indices into `configs`, with `x <= y`.
    pub pairs: Vec<(u32, u32, f64)>,
    /// Per-config weight of `b_x^2` in the denominator.
    pub norm: Vec<f64>,
    index: HashMap<Config, u32>,
    pair_index: HashMap<(u32, u32), usize>,
}

impl BilinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, c: Config) -> u32 {
        if let Some(&i) = self.index.get(&c) {
            return i;
        }
        let i = self.configs.len() as u32;
        self.configs.push(c);
        self.norm.push(0.0);
        self.index.insert(c, i);
        i
    }

    /// Adds `w b_x b_y`, merging with an existing entry for the same pair.
    pub fn add_pair(&mut self, x: Config, y: Config, w: f64) {
        if w == 0.0 {
            return;
        }
        let (a, b) = (self.intern(x), self.intern(y));
        let key = (a.min(b), a.max(b));
        match self.pair_index.get(&key) {
            Some(&slot) => self.pairs[slot].2 += w,
            None => {
                self.pair_index.insert(key, self.pairs.len());
                self.pairs.push((key.0, key.1, w));
            }
        }
    }

    pub fn add_norm(&mut self, x: Config, w: f64) {
        if w == 0.0 {
            return;
        }
        let a = self.intern(x);
        self.norm[a as usize] += w;
    }

    /// Builds the form from numerator terms `(k, j, k~, j~, weight)` and
    /// denominator terms `(k, j, weight)`.
    pub fn from_terms(weighted: &[(usize, usize, usize, usize, f64)], norm: &[(usize, usize, f64)]) -> Self {
        let mut f = Self::new();
        for &(k, j, kt, jt, w) in weighted {
            f.add_pair((k, j), (kt, jt), w);
        }
        for &(k, j, w) in norm {
            f.add_norm((k, j), w);
        }
        f
    }

    /// Multiplies every numerator and denominator weight by `c`.
    pub fn scale(&mut self, c: f64) {
        self.pairs.iter_mut().for_each(|p| p.2 *= c);
        self.norm.iter_mut().for_each(|n| *n *= c);
    }

    /// `(A, B)` for the given per-config outputs.
    pub fn evaluate(&self, b: &[f64]) -> (f64, f64) {
        let a = self.pairs.iter().map(|&(x, y, w)| w * b[x as usize] * b[y as usize]).sum();
        let n = self.norm.iter().zip(b).map(|(n, b)| n * b * b).sum();
        (a, n)
    }
}

/// `E = A / B` and `dE/dparams`, accumulated in reverse mode through the
/// network.
pub fn energy_gradient(model: &NeuralAmplitudeModel, form: &BilinearForm) -> Result<(f64, Vec<f64>)> {
    let mut result = Ok(0.0);
    let (_, grad) = model.forward_backward(&form.configs, |b| {
        let (a, nrm) = form.evaluate(b);
        let mut upstream = vec![0.0; b.len()];
        if !(nrm > 0.0) {
            result = Err(Error::DegenerateEstimate(nrm));
            return upstream;
        }
        let e = a / nrm;
        result = Ok(e);
        for &(x, y, w) in &form.pairs {
            upstream[x as usize] += w * b[y as usize];
            upstream[y as usize] += w * b[x as usize];
        }
        for (i, u) in upstream.iter_mut().enumerate() {
            *u = (*u - e * 2.0 * form.norm[i] * b[i]) / nrm;
        }
        upstream
    });
    Ok((result?, grad))
}

/// Energy only.
pub fn energy(model: &NeuralAmplitudeModel, form: &BilinearForm) -> Result<f64> {
    let b = model.forward_batch(&form.configs);
    let (a, nrm) = form.evaluate(&b);
    if !(nrm > 0.0) {
        return Err(Error::DegenerateEstimate(nrm));
    }
    Ok(a / nrm)
}

/// AdaMax with a piecewise-linear learning-rate schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaMaxState {
    pub step: u64,
    pub m: Vec<f64>,
    pub u: Vec<f64>,
    pub alpha0: f64,
    pub alpha_final: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub decay_start: u64,
    pub decay_end: u64,
    pub eps: f64,
}

impl AdaMaxState {
    pub fn new(n_params: usize) -> Self {
        Self {
            step: 0,
            m: vec![0.0; n_params],
            u: vec![0.0; n_params],
            alpha0: 0.01,
            alpha_final: 0.001,
            beta1: 0.8,
            beta2: 0.99,
            decay_start: 8000,
            decay_end: 32000,
            eps: 1e-8,
        }
    }

    /// Constant `alpha0` before `decay_start`, linear to `alpha_final` at
    /// `decay_end`, constant after.
    pub fn learning_rate(&self, t: u64) -> f64 {
        if t < self.decay_start {
            self.alpha0
        } else if t >= self.decay_end {
            self.alpha_final
        } else {
            let frac = (t - self.decay_start) as f64 / (self.decay_end - self.decay_start) as f64;
            self.alpha0 + (self.alpha_final - self.alpha0) * frac
        }
    }

    /// One update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), got: grads.len() });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(i));
        }
        let lr = self.learning_rate(self.step);
        self.step += 1;
        let bias = 1.0 - self.beta1.powi(self.step.min(i32::MAX as u64) as i32);
        let scale = lr / bias;
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.u[i] = (self.beta2 * self.u[i]).max(grads[i].abs());
            params[i] -= scale * self.m[i] / (self.u[i] + self.eps);
        }
        Ok(())
    }
}

/// Functional form of [`AdaMaxState::step`].
pub fn adamax_step(opt: &AdaMaxState, params: &[f64], grads: &[f64]) -> Result<(AdaMaxState, Vec<f64>)> {
    let mut opt = opt.clone();
    let mut params = params.to_vec();
    opt.step(&mut params, grads)?;
    Ok((opt, params))
}

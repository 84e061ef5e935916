//! Per-pixel two-layer autoencoder with hand-derived gradients and ADAM.
//!
//! The network maps every spectrum independently:
//! `x̂ = W2 · relu(W1 · x + b1) + b2`. Spatial structure never enters the
//! network; it only appears in the training loss.
//!
//! Pixel loops run on the rayon pool. Gradients are reduced over fixed-size
//! pixel chunks in chunk order, so results do not depend on the thread count.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cube::HsiCube;
use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN: usize = 100;
pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;
pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_ADAM_EPS: f64 = 1e-8;

/// Pixels per gradient partial sum.
const CHUNK: usize = 128;

/// Anything that maps a cube to an estimated background cube of the same
/// shape and can be trained by gradient descent on its output.
pub trait Reconstructor {
    /// Stateless reconstruction.
    fn reconstruct(&self, input: &HsiCube) -> Result<HsiCube>;

    /// Reconstruction that keeps what [`Reconstructor::accumulate_grad`] needs.
    fn forward(&mut self, input: &HsiCube) -> Result<HsiCube>;

    /// Adds the parameter gradients for `∂loss/∂output` of the last forward.
    fn accumulate_grad(&mut self, grad_out: &HsiCube) -> Result<()>;

    /// Applies the accumulated gradients with the model's optimizer and
    /// clears them.
    fn apply_update(&mut self) -> Result<()>;
}

/// Weights and biases; matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AeParams {
    pub bands: usize,
    pub hidden: usize,
    /// `hidden × bands`
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `bands × hidden`
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Gradients (and ADAM moments), shaped like [`AeParams`].
pub type AeGrads = AeParams;

impl AeParams {
    pub fn zeros(bands: usize, hidden: usize) -> Self {
        Self {
            bands,
            hidden,
            w1: vec![0.0; hidden * bands],
            b1: vec![0.0; hidden],
            w2: vec![0.0; bands * hidden],
            b2: vec![0.0; bands],
        }
    }

    pub fn tensors(&self) -> [(&'static str, &[f64]); 4] {
        [("w1", &self.w1), ("b1", &self.b1), ("w2", &self.w2), ("b2", &self.b2)]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All entries concatenated as `w1, b1, w2, b2`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }

    pub fn from_flat(bands: usize, hidden: usize, flat: &[f64]) -> Result<Self> {
        let mut p = Self::zeros(bands, hidden);
        if flat.len() != p.len() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", p.len(), flat.len())));
        }
        let mut off = 0;
        for t in p.tensors_mut() {
            let n = t.len();
            t.copy_from_slice(&flat[off..off + n]);
            off += n;
        }
        Ok(p)
    }

    fn same_shape(&self, other: &AeParams) -> bool {
        self.bands == other.bands && self.hidden == other.hidden
    }

    fn add_assign(&mut self, other: &AeParams) {
        for (dst, (_, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
}

/// Fan-balanced uniform initialization, zero biases.
pub fn init_params(bands: usize, hidden: usize, seed: u64) -> Result<AeParams> {
    if bands == 0 || hidden == 0 {
        return Err(Error::InvalidInput(format!("bands and hidden must be positive ({bands}, {hidden})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (6.0 / (bands + hidden) as f64).sqrt();
    let mut p = AeParams::zeros(bands, hidden);
    p.w1.iter_mut().for_each(|w| *w = rng.random_range(-a..=a));
    p.w2.iter_mut().for_each(|w| *w = rng.random_range(-a..=a));
    Ok(p)
}

/// Activations kept from a forward pass.
#[derive(Debug, Clone)]
pub struct AeCache {
    height: usize,
    width: usize,
    bands: usize,
    hidden: usize,
    /// pixel-major input
    input: Vec<f64>,
    /// pixel-major hidden pre-activations
    pre: Vec<f64>,
}

fn check_bands(params: &AeParams, cube: &HsiCube) -> Result<()> {
    if cube.bands() != params.bands {
        return Err(Error::Shape(format!(
            "autoencoder expects {} bands, cube has {}",
            params.bands,
            cube.bands()
        )));
    }
    Ok(())
}

fn forward_pixel(params: &AeParams, x: &[f64], pre: &mut [f64], out: &mut [f64]) {
    let (l, hdim) = (params.bands, params.hidden);
    for k in 0..hdim {
        let row = &params.w1[k * l..(k + 1) * l];
        pre[k] = params.b1[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
    }
    for b in 0..l {
        let row = &params.w2[b * hdim..(b + 1) * hdim];
        out[b] = params.b2[b] + row.iter().zip(pre.iter()).map(|(w, z)| w * z.max(0.0)).sum::<f64>();
    }
}

fn forward_pixels(params: &AeParams, input: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (l, hdim) = (params.bands, params.hidden);
    let n = input.len() / l;
    let mut pre = vec![0.0; n * hdim];
    let mut out = vec![0.0; n * l];
    input
        .par_chunks(CHUNK * l)
        .zip(pre.par_chunks_mut(CHUNK * hdim))
        .zip(out.par_chunks_mut(CHUNK * l))
        .for_each(|((x, z), y)| {
            for ((xp, zp), yp) in x.chunks(l).zip(z.chunks_mut(hdim)).zip(y.chunks_mut(l)) {
                forward_pixel(params, xp, zp, yp);
            }
        });
    (pre, out)
}

pub fn ae_forward(params: &AeParams, cube: &HsiCube) -> Result<(HsiCube, AeCache)> {
    check_bands(params, cube)?;
    let input = cube.to_pixel_major();
    let (pre, out) = forward_pixels(params, &input);
    let recon = HsiCube::from_pixel_major(cube.height(), cube.width(), cube.bands(), &out)?;
    let cache = AeCache {
        height: cube.height(),
        width: cube.width(),
        bands: cube.bands(),
        hidden: params.hidden,
        input,
        pre,
    };
    Ok((recon, cache))
}

/// Parameter gradients given `∂loss/∂x̂`, summed over pixels.
/// The ReLU derivative at exactly zero is taken as 0.
pub fn ae_backward(params: &AeParams, cache: &AeCache, grad_out: &HsiCube) -> Result<AeGrads> {
    if cache.bands != params.bands || cache.hidden != params.hidden {
        return Err(Error::Shape("forward cache does not match the parameters".into()));
    }
    if grad_out.height() != cache.height || grad_out.width() != cache.width || grad_out.bands() != cache.bands {
        return Err(Error::Shape(format!(
            "output gradient is {}x{}x{}, last forward was {}x{}x{}",
            grad_out.height(),
            grad_out.width(),
            grad_out.bands(),
            cache.height,
            cache.width,
            cache.bands
        )));
    }
    let (l, hdim) = (params.bands, params.hidden);
    let g = grad_out.to_pixel_major();
    let partials: Vec<AeGrads> = g
        .par_chunks(CHUNK * l)
        .zip(cache.input.par_chunks(CHUNK * l))
        .zip(cache.pre.par_chunks(CHUNK * hdim))
        .map(|((gc, xc), zc)| {
            let mut acc = AeParams::zeros(l, hdim);
            let mut dz = vec![0.0; hdim];
            for ((dy, x), z) in gc.chunks(l).zip(xc.chunks(l)).zip(zc.chunks(hdim)) {
                for b in 0..l {
                    acc.b2[b] += dy[b];
                    let row = &mut acc.w2[b * hdim..(b + 1) * hdim];
                    for k in 0..hdim {
                        row[k] += dy[b] * z[k].max(0.0);
                    }
                }
                for k in 0..hdim {
                    dz[k] = if z[k] > 0.0 {
                        (0..l).map(|b| params.w2[b * hdim + k] * dy[b]).sum()
                    } else {
                        0.0
                    };
                }
                for k in 0..hdim {
                    if dz[k] == 0.0 {
                        continue;
                    }
                    acc.b1[k] += dz[k];
                    let row = &mut acc.w1[k * l..(k + 1) * l];
                    for j in 0..l {
                        row[j] += dz[k] * x[j];
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = AeParams::zeros(l, hdim);
    for p in &partials {
        total.add_assign(p);
    }
    Ok(total)
}

/// Moments and hyper-parameters of the ADAM optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: AeParams,
    pub v: AeParams,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub lr: f64,
}

impl AdamState {
    pub fn new(bands: usize, hidden: usize, lr: f64) -> Self {
        Self {
            m: AeParams::zeros(bands, hidden),
            v: AeParams::zeros(bands, hidden),
            t: 0,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_ADAM_EPS,
            lr,
        }
    }
}

/// One bias-corrected ADAM update in place.
pub fn adam_step(params: &mut AeParams, grads: &AeGrads, state: &mut AdamState) -> Result<()> {
    if !params.same_shape(grads) || !params.same_shape(&state.m) || !params.same_shape(&state.v) {
        return Err(Error::Shape("parameters, gradients and optimizer state differ in shape".into()));
    }
    for (name, t) in grads.tensors() {
        if let Some(i) = t.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient tensor {name} at index {i}")));
        }
    }
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    let (lr, eps) = (state.lr, state.eps);
    let grads = grads.tensors();
    for (((p, m), v), (_, g)) in params
        .tensors_mut()
        .into_iter()
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut())
        .zip(grads)
    {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

/// The autoencoder used throughout: 100 hidden ReLU units by default,
/// optimized with ADAM.
#[derive(Debug, Clone)]
pub struct VanillaAe {
    pub params: AeParams,
    pub adam: AdamState,
    cache: Option<AeCache>,
    grads: AeGrads,
}

impl VanillaAe {
    pub fn new(bands: usize, hidden: usize, lr: f64, seed: u64) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::InvalidInput(format!("learning rate must be positive, got {lr}")));
        }
        let params = init_params(bands, hidden, seed)?;
        Ok(Self::from_params(params, AdamState::new(bands, hidden, lr)))
    }

    pub fn from_params(params: AeParams, adam: AdamState) -> Self {
        let grads = AeParams::zeros(params.bands, params.hidden);
        Self { params, adam, cache: None, grads }
    }

    pub fn pending_grads(&self) -> &AeGrads {
        &self.grads
    }
}

impl Reconstructor for VanillaAe {
    fn reconstruct(&self, input: &HsiCube) -> Result<HsiCube> {
        check_bands(&self.params, input)?;
        let (_, out) = forward_pixels(&self.params, &input.to_pixel_major());
        HsiCube::from_pixel_major(input.height(), input.width(), input.bands(), &out)
    }

    fn forward(&mut self, input: &HsiCube) -> Result<HsiCube> {
        let (recon, cache) = ae_forward(&self.params, input)?;
        self.cache = Some(cache);
        Ok(recon)
    }

    fn accumulate_grad(&mut self, grad_out: &HsiCube) -> Result<()> {
        let cache = self
            .cache
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("accumulate_grad called before forward".into()))?;
        let g = ae_backward(&self.params, cache, grad_out)?;
        self.grads.add_assign(&g);
        Ok(())
    }

    fn apply_update(&mut self) -> Result<()> {
        adam_step(&mut self.params, &self.grads, &mut self.adam)?;
        self.grads = AeParams::zeros(self.params.bands, self.params.hidden);
        Ok(())
    }
}

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"BGAE";

/// Checkpoint bytes: magic, `L` and `hidden` as `u32`, then `w1, b1, w2, b2`
/// as `f64`; optionally followed by the ADAM state (`t` as `u64`, `lr`,
/// `β1`, `β2`, `eps`, first moments, second moments). All little-endian.
pub fn encode_checkpoint(params: &AeParams, adam: Option<&AdamState>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&(params.bands as u32).to_le_bytes());
    out.extend_from_slice(&(params.hidden as u32).to_le_bytes());
    let put = |out: &mut Vec<u8>, vals: &[f64]| vals.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
    put(&mut out, &params.to_flat());
    if let Some(s) = adam {
        out.extend_from_slice(&s.t.to_le_bytes());
        put(&mut out, &[s.lr, s.beta1, s.beta2, s.eps]);
        put(&mut out, &s.m.to_flat());
        put(&mut out, &s.v.to_flat());
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8], path: &Path) -> Result<(AeParams, Option<AdamState>)> {
    if bytes.len() < 12 || bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::format(path, "not an autoencoder checkpoint"));
    }
    let bands = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let hidden = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = AeParams::zeros(bands, hidden).len();
    let floats = |b: &[u8]| -> Vec<f64> {
        b.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
    };
    let params_end = 12 + count * 8;
    if bytes.len() < params_end {
        return Err(Error::format(path, "checkpoint is truncated"));
    }
    let params = AeParams::from_flat(bands, hidden, &floats(&bytes[12..params_end]))?;
    let rest = &bytes[params_end..];
    if rest.is_empty() {
        return Ok((params, None));
    }
    if rest.len() != 8 + 4 * 8 + 2 * count * 8 {
        return Err(Error::format(path, "trailing optimizer state has the wrong length"));
    }
    let t = u64::from_le_bytes(rest[..8].try_into().unwrap());
    let hyper = floats(&rest[8..40]);
    let m = AeParams::from_flat(bands, hidden, &floats(&rest[40..40 + count * 8]))?;
    let v = AeParams::from_flat(bands, hidden, &floats(&rest[40 + count * 8..]))?;
    let adam = AdamState { m, v, t, lr: hyper[0], beta1: hyper[1], beta2: hyper[2], eps: hyper[3] };
    Ok((params, Some(adam)))
}

pub fn save_checkpoint(path: impl AsRef<Path>, params: &AeParams, adam: Option<&AdamState>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(params, adam)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(AeParams, Option<AdamState>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes, path)
}

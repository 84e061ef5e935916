//! Mask-guided separation training.
//!
//! Background pixels (mask 0) are reconstructed under a mean squared error;
//! pixels flagged as potential anomalies (mask 1) are pushed towards a smooth
//! background by penalizing their LoG response. Every `epochs_per_iter`
//! epochs the reconstruction errors are re-binarized with the proportion
//! threshold `τ`, which is estimated once from the cube's RX statistics.

use std::fmt::Write as _;

use crate::cube::{BinaryMask, ErrorMap, GroundTruth, HsiCube};
use crate::error::{Error, Result};
use crate::laplacian::{suppression_grad, suppression_value};
use crate::metrics::auc_score;
use crate::nn::{AeParams, Reconstructor, VanillaAe, DEFAULT_HIDDEN, DEFAULT_LEARNING_RATE};
use crate::threshold::{estimate_tau, TauEstimate, DEFAULT_BINS, DEFAULT_GAMMA};

pub const DEFAULT_LAMBDA: f64 = 1e-4;
pub const DEFAULT_ITERATIONS: usize = 5;
pub const DEFAULT_EPOCHS_PER_ITER: usize = 150;
pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_AUC_EVERY: usize = 10;

/// Per-pixel squared spectral distance `‖x̂ − x‖²`.
pub fn error_map(recon: &HsiCube, original: &HsiCube) -> Result<ErrorMap> {
    recon.ensure_same_shape(original, "error map")?;
    let n = recon.pixels();
    let mut values = vec![0.0; n];
    for b in 0..recon.bands() {
        for ((acc, r), x) in values.iter_mut().zip(recon.band(b)).zip(original.band(b)) {
            let d = r - x;
            *acc += d * d;
        }
    }
    ErrorMap::new(recon.height(), recon.width(), values)
}

fn check_mask(cube: &HsiCube, mask: &BinaryMask) -> Result<()> {
    cube.ensure_spatial(mask.height(), mask.width(), "mask")
}

/// Background reconstruction loss: squared error over unmasked pixels
/// (all bands) divided by the number of unmasked pixels.
pub fn loss_br(recon: &HsiCube, original: &HsiCube, mask: &BinaryMask) -> Result<f64> {
    recon.ensure_same_shape(original, "background loss")?;
    check_mask(recon, mask)?;
    let background = mask.count_zeros();
    if background == 0 {
        return Err(Error::Degenerate("every pixel is masked; no background left to reconstruct".into()));
    }
    let mut sum = 0.0;
    for b in 0..recon.bands() {
        for ((r, x), &m) in recon.band(b).iter().zip(original.band(b)).zip(mask.bits()) {
            if !m {
                sum += (r - x) * (r - x);
            }
        }
    }
    Ok(sum / background as f64)
}

/// Anomaly suppression loss: masked LoG energy over `S(M) + eps`.
pub fn loss_as(recon: &HsiCube, mask: &BinaryMask, eps: f64) -> Result<f64> {
    Ok(suppression_value(recon, mask)? / (mask.count_ones() as f64 + eps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub br: f64,
    pub as_: f64,
}

/// `L_BR + λ · L_AS`, with both parts for tracing.
pub fn total_loss(recon: &HsiCube, original: &HsiCube, mask: &BinaryMask, lambda: f64, eps: f64) -> Result<LossParts> {
    let br = loss_br(recon, original, mask)?;
    let as_ = loss_as(recon, mask, eps)?;
    Ok(LossParts { total: br + lambda * as_, br, as_ })
}

/// Loss parts and `∂L/∂x̂`.
pub fn separation_loss_grad(
    recon: &HsiCube,
    original: &HsiCube,
    mask: &BinaryMask,
    lambda: f64,
    eps: f64,
) -> Result<(LossParts, HsiCube)> {
    let parts = total_loss(recon, original, mask, lambda, eps)?;
    let br_scale = 2.0 / mask.count_zeros() as f64;
    let mut grad = HsiCube::zeros(recon.height(), recon.width(), recon.bands())?;
    for b in 0..recon.bands() {
        let (r, x) = (recon.band(b), original.band(b));
        for (p, g) in grad.band_mut(b).iter_mut().enumerate() {
            if !mask.get(p) {
                *g = br_scale * (r[p] - x[p]);
            }
        }
    }
    if lambda != 0.0 && !mask.is_all_zero() {
        let scale = lambda / (mask.count_ones() as f64 + eps);
        let sg = suppression_grad(recon, mask)?;
        for (g, s) in grad.data_mut().iter_mut().zip(sg.data()) {
            *g += scale * s;
        }
    }
    Ok((parts, grad))
}

/// Number of sorted errors counted as background: `ceil(τ·N)`, clamped to
/// `1..=N`. Products within 1e-9 of an integer are snapped first so that,
/// e.g., `τ = 0.7` over 10 pixels selects 7 rather than 8.
pub fn background_count(tau: f64, n: usize) -> usize {
    let x = tau * n as f64;
    let k = if (x - x.round()).abs() < 1e-9 { x.round() } else { x.ceil() };
    (k as usize).clamp(1, n)
}

/// Flags pixels whose error is strictly above the `ceil(τ·N)`-th smallest
/// error. Ties with that value stay background.
pub fn update_mask(errors: &ErrorMap, tau: f64) -> Result<BinaryMask> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidInput(format!("proportion threshold must lie in (0, 1], got {tau}")));
    }
    let values = errors.values();
    let k = background_count(tau, values.len());
    let mut sorted = values.to_vec();
    let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, f64::total_cmp);
    let threshold = *kth;
    BinaryMask::from_bits(errors.height(), errors.width(), values.iter().map(|&v| v > threshold).collect())
}

/// Zeroes every band at masked pixels (`X ⊙ M̄`).
pub fn mask_input(cube: &HsiCube, mask: &BinaryMask) -> Result<HsiCube> {
    check_mask(cube, mask)?;
    let mut out = cube.clone();
    for b in 0..out.bands() {
        for (v, &m) in out.band_mut(b).iter_mut().zip(mask.bits()) {
            if m {
                *v = 0.0;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Weight of the suppression loss. Zero disables it.
    pub lambda: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub epochs_per_iter: usize,
    pub learning_rate: f64,
    /// Guard in the suppression-loss denominator.
    pub eps: f64,
    pub seed: u64,
    pub hidden: usize,
    pub bins: usize,
    /// Min-max scale the cube to `[0, 1]` before anything else.
    pub normalize: bool,
    /// Skip threshold estimation and use this `τ`.
    pub tau_override: Option<f64>,
    /// AUC trace period in epochs (only with ground truth).
    pub auc_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            gamma: DEFAULT_GAMMA,
            iterations: DEFAULT_ITERATIONS,
            epochs_per_iter: DEFAULT_EPOCHS_PER_ITER,
            learning_rate: DEFAULT_LEARNING_RATE,
            eps: DEFAULT_EPS,
            seed: 0,
            hidden: DEFAULT_HIDDEN,
            bins: DEFAULT_BINS,
            normalize: true,
            tau_override: None,
            auc_every: DEFAULT_AUC_EVERY,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be >= 1, got {}", self.gamma));
        }
        if self.iterations == 0 || self.epochs_per_iter == 0 {
            return bad("iterations and epochs must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.hidden == 0 {
            return bad("hidden units must be at least 1".into());
        }
        if self.bins < 2 {
            return bad(format!("histogram bins must be at least 2, got {}", self.bins));
        }
        if let Some(t) = self.tau_override {
            if !(t > 0.0 && t <= 1.0) {
                return bad(format!("tau override must lie in (0, 1], got {t}"));
            }
        }
        if self.auc_every == 0 {
            return bad("auc period must be at least 1".into());
        }
        Ok(())
    }

    pub fn total_epochs(&self) -> usize {
        self.iterations * self.epochs_per_iter
    }

    /// The same schedule with the mask pinned to zero and no suppression:
    /// ordinary reconstruction training.
    pub fn plain(&self) -> TrainConfig {
        TrainConfig { lambda: 0.0, tau_override: Some(1.0), ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRecord {
    pub epoch: usize,
    pub l_br: f64,
    pub l_as: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucRecord {
    pub epoch: usize,
    pub auc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainResult<M = VanillaAe> {
    /// Reconstruction errors after the last iteration.
    pub detection: ErrorMap,
    /// Mask produced at the end of each iteration.
    pub masks: Vec<BinaryMask>,
    pub loss_trace: Vec<LossRecord>,
    /// AUC of the current error map every `auc_every` epochs, measured
    /// after that epoch's update. Empty without ground truth.
    pub auc_trace: Vec<AucRecord>,
    pub tau: f64,
    pub tau_estimate: Option<TauEstimate>,
    pub model: M,
}

impl TrainResult<VanillaAe> {
    pub fn params(&self) -> &AeParams {
        &self.model.params
    }
}

impl<M> TrainResult<M> {
    /// `epoch,l_br,l_as,total[,auc]`; the AUC cell is empty between samples.
    pub fn trace_csv(&self) -> String {
        let with_auc = !self.auc_trace.is_empty();
        let mut s = String::from(if with_auc { "epoch,l_br,l_as,total,auc\n" } else { "epoch,l_br,l_as,total\n" });
        let mut aucs = self.auc_trace.iter().peekable();
        for r in &self.loss_trace {
            write!(s, "{},{:e},{:e},{:e}", r.epoch, r.l_br, r.l_as, r.total).expect("String write");
            if with_auc {
                s.push(',');
                if let Some(a) = aucs.next_if(|a| a.epoch == r.epoch) {
                    write!(s, "{}", a.auc).expect("String write");
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Runs the iterative separation training.
#[derive(Debug, Clone)]
pub struct Trainer<'a> {
    cfg: TrainConfig,
    ground_truth: Option<&'a GroundTruth>,
}

impl<'a> Trainer<'a> {
    pub fn new(cfg: TrainConfig) -> Self {
        Self { cfg, ground_truth: None }
    }

    /// Labels used only to record the AUC trace; they never influence training.
    pub fn with_ground_truth(mut self, gt: &'a GroundTruth) -> Self {
        self.ground_truth = Some(gt);
        self
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    /// Trains a fresh [`VanillaAe`] seeded from the config.
    pub fn run(&self, cube: &HsiCube) -> Result<TrainResult> {
        self.cfg.validate()?;
        let model = VanillaAe::new(cube.bands(), self.cfg.hidden, self.cfg.learning_rate, self.cfg.seed)?;
        self.run_with(cube, model)
    }

    pub fn run_with<M: Reconstructor>(&self, cube: &HsiCube, mut model: M) -> Result<TrainResult<M>> {
        let cfg = &self.cfg;
        cfg.validate()?;
        if let Some(gt) = self.ground_truth {
            if gt.height() != cube.height() || gt.width() != cube.width() {
                return Err(Error::Shape("ground truth does not match the cube".into()));
            }
        }
        let x = if cfg.normalize { cube.normalized() } else { cube.clone() };

        let (tau, tau_estimate) = match cfg.tau_override {
            Some(t) => (t, None),
            None => {
                let est = estimate_tau(&x, cfg.gamma, cfg.bins)?;
                (est.tau, Some(est))
            }
        };
        log::info!("proportion threshold tau = {tau:.4}");

        let (h, w) = (x.height(), x.width());
        let mut mask = BinaryMask::zeros(h, w);
        let mut masks = Vec::with_capacity(cfg.iterations);
        let mut loss_trace = Vec::with_capacity(cfg.total_epochs());
        let mut auc_trace = Vec::new();
        let mut detection = None;
        let mut epoch = 0;

        for iteration in 1..=cfg.iterations {
            let input = mask_input(&x, &mask)?;
            for _ in 0..cfg.epochs_per_iter {
                epoch += 1;
                let recon = model.forward(&input)?;
                let (parts, grad) = separation_loss_grad(&recon, &x, &mask, cfg.lambda, cfg.eps)?;
                loss_trace.push(LossRecord { epoch, l_br: parts.br, l_as: parts.as_, total: parts.total });
                let diverged = |detail: String| Error::Diverged {
                    epoch,
                    detail,
                    trace: loss_trace.iter().map(|r| r.total).collect(),
                };
                if !parts.total.is_finite() {
                    return Err(diverged(format!("loss is {}", parts.total)));
                }
                model.accumulate_grad(&grad)?;
                model.apply_update().map_err(|e| match e {
                    Error::NonFinite(what) => diverged(format!("non-finite value in {what}")),
                    other => other,
                })?;
                if let Some(gt) = self.ground_truth {
                    if epoch % cfg.auc_every == 0 {
                        let errors = error_map(&model.reconstruct(&input)?, &x)?;
                        auc_trace.push(AucRecord { epoch, auc: auc_score(&errors, gt)? });
                    }
                }
            }
            let errors = error_map(&model.reconstruct(&input)?, &x)?;
            mask = update_mask(&errors, tau)?;
            log::debug!(
                "iteration {iteration}: loss {:.6e}, {} pixels masked",
                loss_trace.last().map_or(f64::NAN, |r| r.total),
                mask.count_ones()
            );
            masks.push(mask.clone());
            detection = Some(errors);
        }

        Ok(TrainResult {
            detection: detection.expect("at least one iteration"),
            masks,
            loss_trace,
            auc_trace,
            tau,
            tau_estimate,
            model,
        })
    }
}

/// Separation training with a fresh autoencoder.
pub fn train(cube: &HsiCube, cfg: &TrainConfig) -> Result<TrainResult> {
    Trainer::new(cfg.clone()).run(cube)
}

/// Plain reconstruction training for `iterations × epochs_per_iter` epochs.
pub fn train_plain(cube: &HsiCube, cfg: &TrainConfig) -> Result<TrainResult> {
    Trainer::new(cfg.plain()).run(cube)
}

//! Seeded synthetic scenes with known anomaly locations.
//!
//! The background is a mosaic of regions, each drawn from one Gaussian
//! mixture component: a smooth mean spectrum plus a per-pixel random
//! multiple of the component's scale spectrum. Anomalies are isolated
//! single pixels and 2×2 blobs (alternating, blob first) whose spectra are
//! the local component mean displaced by `contrast × scale` along a random
//! sign pattern. White noise is added everywhere.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cube::{GroundTruth, HsiCube};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Average reflectance of the component's mean spectrum.
    pub mean: f64,
    /// Average amplitude of the within-component variation.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub height: usize,
    pub width: usize,
    pub bands: usize,
    pub components: Vec<Component>,
    pub anomalies: usize,
    pub contrast: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            height: 30,
            width: 30,
            bands: 20,
            components: vec![
                Component { mean: 0.25, scale: 0.1 },
                Component { mean: 0.45, scale: 0.1 },
                Component { mean: 0.65, scale: 0.1 },
            ],
            anomalies: 9,
            contrast: 5.0,
            noise_std: 0.01,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.height * self.width;
        if self.height == 0 || self.width == 0 || self.bands == 0 {
            return Err(Error::Config(format!(
                "scene dimensions must be positive, got {}x{}x{}",
                self.height, self.width, self.bands
            )));
        }
        if self.components.is_empty() {
            return Err(Error::Config("at least one background component is required".into()));
        }
        if self.anomalies >= n {
            return Err(Error::Config(format!("{} anomalies do not fit in {n} pixels", self.anomalies)));
        }
        if self.anomalies as f64 >= 0.1 * n as f64 {
            return Err(Error::Config(format!(
                "{} anomalies exceed 10% of the {n}-pixel scene",
                self.anomalies
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config(format!("noise std must be >= 0, got {}", self.noise_std)));
        }
        if !self.contrast.is_finite() {
            return Err(Error::Config("contrast must be finite".into()));
        }
        for (k, c) in self.components.iter().enumerate() {
            if !(c.mean.is_finite() && c.scale.is_finite() && c.scale >= 0.0) {
                return Err(Error::Config(format!("component {k} has invalid mean/scale")));
            }
        }
        Ok(())
    }
}

struct Spectra {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

fn component_spectra(rng: &mut ChaCha8Rng, c: &Component, bands: usize) -> Spectra {
    let freq = rng.random_range(0.5..2.0);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let tilt = rng.random_range(-0.3..0.3);
    let scale_phase = rng.random_range(0.0..std::f64::consts::TAU);
    let denom = (bands.max(2) - 1) as f64;
    let mut mean = Vec::with_capacity(bands);
    let mut scale = Vec::with_capacity(bands);
    for b in 0..bands {
        let t = b as f64 / denom;
        mean.push(c.mean * (1.0 + 0.25 * (std::f64::consts::TAU * freq * t + phase).sin() + tilt * (t - 0.5)));
        scale.push(c.scale * (1.0 + 0.5 * (std::f64::consts::TAU * t + scale_phase).sin()));
    }
    Spectra { mean, scale }
}

/// Anomaly footprints; no two objects touch, diagonals included.
fn place_anomalies(rng: &mut ChaCha8Rng, h: usize, w: usize, count: usize) -> Result<Vec<Vec<usize>>> {
    let mut taken = vec![false; h * w];
    // occupied pixels plus their 8-neighbourhood
    let mut blocked = vec![false; h * w];
    let mut objects = Vec::new();
    let mut remaining = count;
    let mut k = 0;
    while remaining > 0 {
        let size = if k % 2 == 0 && remaining >= 4 && h >= 2 && w >= 2 { 2 } else { 1 };
        let mut placed = false;
        for _ in 0..10_000 {
            let r = rng.random_range(0..=h - size);
            let c = rng.random_range(0..=w - size);
            let cells: Vec<usize> =
                (0..size).flat_map(|dr| (0..size).map(move |dc| (r + dr) * w + c + dc)).collect();
            if cells.iter().any(|&p| blocked[p]) {
                continue;
            }
            for &p in &cells {
                taken[p] = true;
                let (pr, pc) = ((p / w) as isize, (p % w) as isize);
                for dr in -1..=1 {
                    for dc in -1..=1 {
                        let (nr, nc) = (pr + dr, pc + dc);
                        if nr >= 0 && nc >= 0 && (nr as usize) < h && (nc as usize) < w {
                            blocked[nr as usize * w + nc as usize] = true;
                        }
                    }
                }
            }
            objects.push(cells);
            placed = true;
            break;
        }
        if !placed {
            return Err(Error::Config(format!(
                "could not place {count} isolated anomaly pixels in a {h}x{w} scene"
            )));
        }
        remaining -= size * size;
        k += 1;
    }
    debug_assert_eq!(taken.iter().filter(|&&t| t).count(), count);
    Ok(objects)
}

/// Generates a scene and its labels. Pure function of `cfg`.
pub fn synth_scene(cfg: &SynthConfig) -> Result<(HsiCube, GroundTruth)> {
    cfg.validate()?;
    let (h, w, l) = (cfg.height, cfg.width, cfg.bands);
    let n = h * w;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    let spectra: Vec<Spectra> = cfg.components.iter().map(|c| component_spectra(&mut rng, c, l)).collect();

    // Voronoi mosaic: two sites per component, shuffled so regions interleave.
    let mut site_labels: Vec<usize> = (0..2 * spectra.len()).map(|i| i % spectra.len()).collect();
    site_labels.shuffle(&mut rng);
    let sites: Vec<(f64, f64, usize)> = site_labels
        .into_iter()
        .map(|k| (rng.random_range(0.0..h as f64), rng.random_range(0.0..w as f64), k))
        .collect();
    let region: Vec<usize> = (0..n)
        .map(|p| {
            let (r, c) = ((p / w) as f64 + 0.5, (p % w) as f64 + 0.5);
            sites
                .iter()
                .min_by(|a, b| {
                    let da = (a.0 - r).powi(2) + (a.1 - c).powi(2);
                    let db = (b.0 - r).powi(2) + (b.1 - c).powi(2);
                    da.total_cmp(&db)
                })
                .map(|s| s.2)
                .unwrap_or(0)
        })
        .collect();

    let mut pixels = vec![0.0; n * l];
    for p in 0..n {
        let s = &spectra[region[p]];
        let t: f64 = std_normal.sample(&mut rng);
        for b in 0..l {
            pixels[p * l + b] = s.mean[b] + t * s.scale[b];
        }
    }

    let objects = place_anomalies(&mut rng, h, w, cfg.anomalies)?;
    let mut labels = vec![false; n];
    for cells in &objects {
        let s = &spectra[region[cells[0]]];
        let signs: Vec<f64> = (0..l).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        for &p in cells {
            labels[p] = true;
            for b in 0..l {
                pixels[p * l + b] = s.mean[b] + cfg.contrast * s.scale[b] * signs[b];
            }
        }
    }

    if cfg.noise_std > 0.0 {
        for v in pixels.iter_mut() {
            *v += cfg.noise_std * std_normal.sample(&mut rng);
        }
    }

    let cube = HsiCube::from_pixel_major(h, w, l, &pixels)?;
    let gt = GroundTruth::new(h, w, labels)?;
    Ok((cube, gt))
}

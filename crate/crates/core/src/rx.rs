//! Global background statistics and Mahalanobis (RX) scoring.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;

use crate::cube::{DistanceMap, ErrorMap, HsiCube};
use crate::error::{Error, Result};

/// Relative ridge used by [`rx_detect`]: `δ = 1e-6 · trace(Σ) / L`.
pub const DEFAULT_RELATIVE_RIDGE: f64 = 1e-6;
/// Floor for the default ridge when the covariance is identically zero.
pub const MIN_RIDGE: f64 = 1e-12;

/// Mean spectrum, sample covariance and the inverse of the ridged covariance.
#[derive(Debug, Clone)]
pub struct BackgroundStats {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub precision: DMatrix<f64>,
    pub ridge: f64,
}

impl BackgroundStats {
    pub fn bands(&self) -> usize {
        self.mean.len()
    }
}

fn mean_and_covariance(cube: &HsiCube) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = cube.pixels();
    if n < 2 {
        return Err(Error::InvalidInput("background statistics need at least two pixels".into()));
    }
    let l = cube.bands();
    let mean = DVector::from_iterator(l, (0..l).map(|b| cube.band(b).iter().sum::<f64>() / n as f64));
    let centered: Vec<Vec<f64>> = (0..l).map(|b| cube.band(b).iter().map(|v| v - mean[b]).collect()).collect();
    let mut cov = DMatrix::zeros(l, l);
    for i in 0..l {
        for j in i..l {
            let s: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            let c = s / (n - 1) as f64;
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    Ok((mean, cov))
}

/// Default ridge for a covariance matrix.
pub fn default_ridge(covariance: &DMatrix<f64>) -> f64 {
    let l = covariance.nrows().max(1) as f64;
    (DEFAULT_RELATIVE_RIDGE * covariance.trace() / l).max(MIN_RIDGE)
}

pub fn background_stats(cube: &HsiCube, ridge: f64) -> Result<BackgroundStats> {
    if !(ridge > 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidInput(format!("ridge must be positive, got {ridge}")));
    }
    let (mean, covariance) = mean_and_covariance(cube)?;
    precision_from(mean, covariance, ridge)
}

/// [`background_stats`] with the scale-aware [`default_ridge`].
pub fn background_stats_default(cube: &HsiCube) -> Result<BackgroundStats> {
    let (mean, covariance) = mean_and_covariance(cube)?;
    let ridge = default_ridge(&covariance);
    precision_from(mean, covariance, ridge)
}

fn precision_from(mean: DVector<f64>, covariance: DMatrix<f64>, ridge: f64) -> Result<BackgroundStats> {
    let l = covariance.nrows();
    let ridged = &covariance + DMatrix::identity(l, l) * ridge;
    let chol = Cholesky::new(ridged).ok_or(Error::Singular { ridge })?;
    let mut precision = chol.inverse();
    // symmetrize away round-off
    for i in 0..l {
        for j in i + 1..l {
            let v = 0.5 * (precision[(i, j)] + precision[(j, i)]);
            precision[(i, j)] = v;
            precision[(j, i)] = v;
        }
    }
    if precision.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular { ridge });
    }
    Ok(BackgroundStats { mean, covariance, precision, ridge })
}

/// Squared Mahalanobis distance `(x−μ)ᵀ P (x−μ)` for every pixel.
pub fn mahalanobis_map(cube: &HsiCube, stats: &BackgroundStats) -> Result<DistanceMap> {
    let l = cube.bands();
    if stats.bands() != l {
        return Err(Error::Shape(format!("cube has {l} bands, statistics have {}", stats.bands())));
    }
    let pixels = cube.to_pixel_major();
    let mean = stats.mean.as_slice();
    // row-major copy of P for contiguous access
    let p: Vec<f64> = (0..l).flat_map(|i| (0..l).map(move |j| (i, j))).map(|(i, j)| stats.precision[(i, j)]).collect();
    let values: Vec<f64> = pixels
        .par_chunks(l)
        .map(|x| {
            let d: Vec<f64> = x.iter().zip(mean).map(|(a, m)| a - m).collect();
            let mut acc = 0.0;
            for i in 0..l {
                let row = &p[i * l..(i + 1) * l];
                let pd: f64 = row.iter().zip(&d).map(|(a, b)| a * b).sum();
                acc += d[i] * pd;
            }
            acc.max(0.0)
        })
        .collect();
    ErrorMap::new(cube.height(), cube.width(), values)
}

/// Scales a distance map by its maximum so it lies in `[0, 1]`.
/// An all-zero map stays all zero.
pub fn relative_distance(map: &DistanceMap) -> DistanceMap {
    let max = map.max();
    if max > 0.0 {
        map.map(|v| v / max).expect("scaling finite non-negative values stays finite")
    } else {
        map.map(|_| 0.0).expect("zeros are finite")
    }
}

/// Global RX detector: higher score = more anomalous.
pub fn rx_detect(cube: &HsiCube) -> Result<ErrorMap> {
    let stats = background_stats_default(cube)?;
    mahalanobis_map(cube, &stats)
}

//! Proportion-threshold estimation.
//!
//! Relative RX distances are sharpened by a gamma curve, binned, and the
//! corner of the descending flank (the bin farthest from the chord joining
//! the peak to the last non-empty bin) separates the dominant background
//! from the tail. The estimate is the fraction of pixels left of the corner.

use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::rx::{relative_distance, rx_detect};

pub const DEFAULT_GAMMA: f64 = 2.0;
pub const DEFAULT_BINS: usize = 200;

/// Elementwise `v^gamma` on values in `[0, 1]`.
pub fn gamma_transform(values: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("gamma must be >= 1, got {gamma}")));
    }
    values
        .iter()
        .map(|&v| {
            if (0.0..=1.0).contains(&v) {
                Ok(v.powf(gamma))
            } else {
                Err(Error::InvalidInput(format!("gamma transform input {v} outside [0, 1]")))
            }
        })
        .collect()
}

/// Uniform histogram on `[0, 1]`; bins are left-closed and the last bin also
/// holds `1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn center(&self, bin: usize) -> f64 {
        0.5 * (self.edges[bin] + self.edges[bin + 1])
    }

    /// Builds a histogram directly from counts (edges uniform on `[0, 1]`).
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidInput("a histogram needs at least two bins".into()));
        }
        Ok(Self { edges: uniform_edges(counts.len()), counts })
    }

    fn bin_of(&self, v: f64) -> usize {
        let bins = self.counts.len();
        let mut idx = ((v * bins as f64).floor() as usize).min(bins - 1);
        // keep the float index consistent with the stored edges
        while idx + 1 < bins && v >= self.edges[idx + 1] {
            idx += 1;
        }
        while idx > 0 && v < self.edges[idx] {
            idx -= 1;
        }
        idx
    }
}

fn uniform_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| i as f64 / bins as f64).collect()
}

pub fn build_histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::InvalidInput(format!("histogram needs at least 2 bins, got {bins}")));
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("cannot build a histogram of no samples".into()));
    }
    let mut hist = Histogram { edges: uniform_edges(bins), counts: vec![0; bins] };
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("histogram sample {v} outside [0, 1]")));
        }
        let b = hist.bin_of(v);
        hist.counts[b] += 1;
    }
    Ok(hist)
}

/// Cross-product numerator of the distance from bin `b` to the peak–tail
/// chord, in bin-index units. Proportional to the perpendicular distance in
/// (bin center, count) coordinates with the same factor for every bin.
fn chord_offset(counts: &[u64], peak: usize, last: usize, b: usize) -> i128 {
    let (yp, ye, yb) = (counts[peak] as i128, counts[last] as i128, counts[b] as i128);
    let (dx_e, dx_b) = ((last - peak) as i128, (b - peak) as i128);
    (dx_e * (yp - yb) - dx_b * (yp - ye)).abs()
}

/// Corner bin of a unimodal histogram.
///
/// Searches bins after the unique peak up to the last non-empty bin for the
/// point farthest from the peak–tail chord; ties go to the smaller index.
pub fn unimodal_corner(hist: &Histogram) -> Result<usize> {
    let counts = hist.counts();
    let max = *counts.iter().max().expect("histogram has bins");
    let peaks: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] == max).collect();
    if peaks.len() > 1 {
        return Err(Error::Degenerate(format!(
            "ambiguous histogram peak: {} bins share the maximum count {max}",
            peaks.len()
        )));
    }
    let peak = peaks[0];
    let last = counts.iter().rposition(|&c| c > 0).expect("maximum bin is non-empty");
    if last == peak {
        return Err(Error::Degenerate(format!(
            "histogram peak at bin {peak} has no descending flank"
        )));
    }
    let mut best = peak + 1;
    let mut best_offset = chord_offset(counts, peak, last, best);
    for b in peak + 2..=last {
        let off = chord_offset(counts, peak, last, b);
        if off > best_offset {
            best = b;
            best_offset = off;
        }
    }
    Ok(best)
}

/// Proportion threshold and the quantities it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct TauEstimate {
    pub tau: f64,
    /// Threshold on the gamma-adjusted distances (right edge of the corner bin).
    pub corner_value: f64,
    pub corner_bin: usize,
    pub gamma: f64,
    pub histogram: Histogram,
}

impl TauEstimate {
    /// `tau == 1` marks every pixel as background, so the mask never changes.
    pub fn is_saturated(&self) -> bool {
        self.tau >= 1.0
    }
}

/// Threshold estimation on relative distances already in `[0, 1]`.
pub fn estimate_tau_from_distances(relative: &[f64], gamma: f64, bins: usize) -> Result<TauEstimate> {
    let adjusted = gamma_transform(relative, gamma)?;
    let histogram = build_histogram(&adjusted, bins)?;
    let corner_bin = unimodal_corner(&histogram)?;
    let corner_value = histogram.edges()[corner_bin + 1];
    let below = adjusted.iter().filter(|&&v| v <= corner_value).count();
    let tau = below as f64 / adjusted.len() as f64;
    let est = TauEstimate { tau, corner_value, corner_bin, gamma, histogram };
    if est.is_saturated() {
        log::warn!("estimated proportion threshold is 1.0; no pixel will ever be masked");
    }
    Ok(est)
}

/// RX relative distance → gamma → histogram → corner → proportion.
pub fn estimate_tau(cube: &HsiCube, gamma: f64, bins: usize) -> Result<TauEstimate> {
    let rel = relative_distance(&rx_detect(cube)?);
    estimate_tau_from_distances(rel.values(), gamma, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gamma_basics() {
        let v = [0.0, 0.25, 0.5, 1.0];
        assert_eq!(gamma_transform(&v, 1.0).unwrap(), v.to_vec());
        assert_eq!(gamma_transform(&[0.5], 2.0).unwrap(), vec![0.25]);
        assert!(gamma_transform(&[1.5], 2.0).is_err());
        assert!(gamma_transform(&[0.5], 0.5).is_err());
    }

    #[test]
    fn histogram_edges_and_closure() {
        let h = build_histogram(&[0.0, 0.5, 1.0], 2).unwrap();
        assert_eq!(h.counts(), &[1, 2]);
        assert_eq!(h.edges(), &[0.0, 0.5, 1.0]);
        let z = build_histogram(&[0.0; 7], 4).unwrap();
        assert_eq!(z.counts(), &[7, 0, 0, 0]);
        assert!(build_histogram(&[], 4).is_err());
        assert!(build_histogram(&[0.1], 1).is_err());
        assert!(build_histogram(&[-0.1], 4).is_err());
    }

    #[test]
    fn values_on_edges_go_right() {
        let bins = 10;
        let vals: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let h = build_histogram(&vals, bins).unwrap();
        let mut expect = vec![1u64; bins];
        expect[bins - 1] = 2;
        assert_eq!(h.counts(), expect.as_slice());
    }

    #[test]
    fn corner_examples() {
        let h = Histogram::from_counts(vec![100, 1, 1, 1, 1]).unwrap();
        assert_eq!(unimodal_corner(&h).unwrap(), 1);
        let lin = Histogram::from_counts(vec![50, 40, 30, 20, 10]).unwrap();
        assert_eq!(unimodal_corner(&lin).unwrap(), 1);
    }

    #[test]
    fn corner_errors() {
        let flat = Histogram::from_counts(vec![5, 5, 1]).unwrap();
        assert!(matches!(unimodal_corner(&flat), Err(Error::Degenerate(m)) if m.contains("ambiguous")));
        let rising = Histogram::from_counts(vec![1, 2, 9, 0]).unwrap();
        assert!(matches!(unimodal_corner(&rising), Err(Error::Degenerate(m)) if m.contains("flank")));
    }

    #[test]
    fn identical_cube_surfaces_an_error() {
        let cube = HsiCube::new(4, 4, 3, vec![0.3; 48]).unwrap();
        assert!(matches!(estimate_tau(&cube, 2.0, 200), Err(Error::Degenerate(_))));
    }

    proptest! {
        #[test]
        fn conservation(values in proptest::collection::vec(0.0f64..=1.0, 1..300), bins in 2usize..50) {
            let h = build_histogram(&values, bins).unwrap();
            prop_assert_eq!(h.total() as usize, values.len());
        }

        #[test]
        fn gamma_is_monotone(mut values in proptest::collection::vec(0.0f64..=1.0, 1..100), gamma in 1.0f64..5.0) {
            values.sort_by(f64::total_cmp);
            let out = gamma_transform(&values, gamma).unwrap();
            prop_assert!(out.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn corner_lies_after_peak(counts in proptest::collection::vec(0u64..1000, 3..40)) {
            let h = Histogram::from_counts(counts.clone()).unwrap();
            if let Ok(c) = unimodal_corner(&h) {
                let max = *counts.iter().max().unwrap();
                let peak = counts.iter().position(|&v| v == max).unwrap();
                let last = counts.iter().rposition(|&v| v > 0).unwrap();
                prop_assert!(c > peak && c <= last);
            }
        }
    }
}

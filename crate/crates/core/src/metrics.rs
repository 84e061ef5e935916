//! ROC curves of detection probability against false-alarm rate, their AUC,
//! and detection-map export.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cube::{ErrorMap, GroundTruth};
use crate::error::{Error, Result};
use crate::hsi::maps::{scale_to_u8, write_pgm};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// False-alarm rate `P_f`.
    pub p_f: f64,
    /// Detection probability `P_d`.
    pub p_d: f64,
}

/// Operating points from `(0, 0)` to `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    points: Vec<RocPoint>,
    /// Cumulative `(false positives, true positives)` per point, with the
    /// class totals, when the curve came from counted scores.
    counts: Option<(Vec<(u64, u64)>, u64, u64)>,
}

impl RocCurve {
    /// Validates a hand-built curve.
    pub fn from_points(points: Vec<RocPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("a ROC curve needs at least two points".into()));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if (first.p_f, first.p_d) != (0.0, 0.0) || (last.p_f, last.p_d) != (1.0, 1.0) {
            return Err(Error::InvalidInput("a ROC curve must run from (0,0) to (1,1)".into()));
        }
        for w in points.windows(2) {
            if w[1].p_f < w[0].p_f || w[1].p_d < w[0].p_d {
                return Err(Error::InvalidInput("ROC points must be non-decreasing".into()));
            }
        }
        Ok(Self { points, counts: None })
    }

    pub fn points(&self) -> &[RocPoint] {
        &self.points
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("p_f,p_d\n");
        for p in &self.points {
            writeln!(s, "{},{}", p.p_f, p.p_d).expect("writing to a String");
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Sweeps the threshold down through the distinct scores; a pixel is
/// declared anomalous when its score is strictly above the threshold.
pub fn roc_curve(scores: &ErrorMap, gt: &GroundTruth) -> Result<RocCurve> {
    if scores.height() != gt.height() || scores.width() != gt.width() {
        return Err(Error::Shape(format!(
            "scores are {}x{}, ground truth is {}x{}",
            scores.height(),
            scores.width(),
            gt.height(),
            gt.width()
        )));
    }
    roc_from_slices(scores.values(), gt.labels())
}

pub(crate) fn roc_from_slices(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    let positives = labels.iter().filter(|&&l| l).count() as u64;
    let negatives = labels.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Degenerate(
            "ground truth must contain both anomaly and background pixels".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut counts = vec![(0u64, 0u64)];
    let (mut fp, mut tp) = (0u64, 0u64);
    let mut i = 0;
    while i < order.len() {
        let level = scores[order[i]];
        while i < order.len() && scores[order[i]] == level {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        counts.push((fp, tp));
    }
    let points = counts
        .iter()
        .map(|&(f, t)| RocPoint { p_f: f as f64 / negatives as f64, p_d: t as f64 / positives as f64 })
        .collect();
    Ok(RocCurve { points, counts: Some((counts, positives, negatives)) })
}

/// Trapezoidal area under `P_d(P_f)`.
///
/// Counted curves are integrated in integer arithmetic, which makes the
/// result identical to the tie-aware Mann–Whitney statistic.
pub fn auc(curve: &RocCurve) -> f64 {
    if let Some((counts, pos, neg)) = &curve.counts {
        let twice_area: u128 = counts
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) as u128 * (w[1].1 + w[0].1) as u128)
            .sum();
        return twice_area as f64 / (2 * *pos as u128 * *neg as u128) as f64;
    }
    curve
        .points
        .windows(2)
        .map(|w| (w[1].p_f - w[0].p_f) * (w[1].p_d + w[0].p_d) * 0.5)
        .sum()
}

/// `auc(roc_curve(scores, gt))`.
pub fn auc_score(scores: &ErrorMap, gt: &GroundTruth) -> Result<f64> {
    Ok(auc(&roc_curve(scores, gt)?))
}

/// Writes a min-max scaled 8-bit PGM rendering of the map.
pub fn export_map(map: &ErrorMap, path: impl AsRef<Path>) -> Result<()> {
    write_pgm(path, map.width(), map.height(), &scale_to_u8(map))
}

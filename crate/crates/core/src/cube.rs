//! In-memory containers shared by every stage of the pipeline.
//!
//! Cubes are band-sequential: all of band 0 in row-major order, then band 1,
//! and so on. Spatial maps (errors, masks, labels) are row-major `H×W`.

use crate::error::{Error, Result};

/// Dense `H×W×L` hyperspectral cube stored band-sequential in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct HsiCube {
    height: usize,
    width: usize,
    bands: usize,
    data: Vec<f64>,
}

impl HsiCube {
    pub fn new(height: usize, width: usize, bands: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || bands == 0 {
            return Err(Error::InvalidInput(format!(
                "cube dimensions must be positive, got {height}x{width}x{bands}"
            )));
        }
        let expected = height * width * bands;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "cube {height}x{width}x{bands} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("cube value at flat index {pos}")));
        }
        Ok(Self { height, width, bands, data })
    }

    pub fn zeros(height: usize, width: usize, bands: usize) -> Result<Self> {
        Self::new(height, width, bands, vec![0.0; height * width * bands])
    }

    /// Builds a cube from pixel-major spectra (`pixels[p][band]`, `p = i·W + j`).
    pub fn from_pixel_major(height: usize, width: usize, bands: usize, pixels: &[f64]) -> Result<Self> {
        let n = height * width;
        if pixels.len() != n * bands {
            return Err(Error::Shape(format!(
                "expected {} pixel-major values, got {}",
                n * bands,
                pixels.len()
            )));
        }
        let mut data = vec![0.0; n * bands];
        for p in 0..n {
            for b in 0..bands {
                data[b * n + p] = pixels[p * bands + b];
            }
        }
        Self::new(height, width, bands, data)
    }

    pub(crate) fn from_parts_unchecked(height: usize, width: usize, bands: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width * bands);
        Self { height, width, bands, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn band(&self, b: usize) -> &[f64] {
        let n = self.pixels();
        &self.data[b * n..(b + 1) * n]
    }

    pub fn band_mut(&mut self, b: usize) -> &mut [f64] {
        let n = self.pixels();
        &mut self.data[b * n..(b + 1) * n]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, band: usize) -> f64 {
        self.data[band * self.pixels() + row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, band: usize, value: f64) {
        let n = self.pixels();
        self.data[band * n + row * self.width + col] = value;
    }

    /// Spectrum of the pixel at flat index `p = row·W + col`.
    pub fn spectrum(&self, p: usize) -> Vec<f64> {
        let n = self.pixels();
        (0..self.bands).map(|b| self.data[b * n + p]).collect()
    }

    /// Copies the cube into pixel-major order (`out[p·L + b]`).
    pub fn to_pixel_major(&self) -> Vec<f64> {
        let n = self.pixels();
        let l = self.bands;
        let mut out = vec![0.0; n * l];
        for b in 0..l {
            let band = self.band(b);
            for (p, &v) in band.iter().enumerate() {
                out[p * l + b] = v;
            }
        }
        out
    }

    pub fn same_shape(&self, other: &HsiCube) -> bool {
        self.height == other.height && self.width == other.width && self.bands == other.bands
    }

    pub(crate) fn ensure_same_shape(&self, other: &HsiCube, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.height, self.width, self.bands, other.height, other.width, other.bands
            )))
        }
    }

    pub(crate) fn ensure_spatial(&self, height: usize, width: usize, what: &str) -> Result<()> {
        if self.height == height && self.width == width {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: cube is {}x{}, map is {height}x{width}",
                self.height, self.width
            )))
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Global min/max scaling to `[0, 1]`. A constant cube maps to all zeros.
    pub fn normalized(&self) -> HsiCube {
        let (lo, hi) = self.min_max();
        let span = hi - lo;
        let data = if span > 0.0 {
            self.data.iter().map(|&v| (v - lo) / span).collect()
        } else {
            vec![0.0; self.data.len()]
        };
        Self::from_parts_unchecked(self.height, self.width, self.bands, data)
    }
}

/// Non-negative `H×W` map: reconstruction errors, detector scores or
/// Mahalanobis distances.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ErrorMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput("map dimensions must be positive".into()));
        }
        if values.len() != height * width {
            return Err(Error::Shape(format!(
                "map {height}x{width} needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("map value at index {pos}")));
        }
        Ok(Self { height, width, values })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the largest value (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ErrorMap> {
        ErrorMap::new(self.height, self.width, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Wraps the map as an `H×W×1` cube (for the raw container).
    pub fn to_cube(&self) -> HsiCube {
        HsiCube::from_parts_unchecked(self.height, self.width, 1, self.values.clone())
    }

    /// Reads a single-band cube back as a map.
    pub fn from_cube(cube: &HsiCube) -> Result<Self> {
        if cube.bands() != 1 {
            return Err(Error::Shape(format!(
                "score map must have exactly one band, got {}",
                cube.bands()
            )));
        }
        ErrorMap::new(cube.height(), cube.width(), cube.data().to_vec())
    }
}

/// Relative or squared Mahalanobis distances, one per pixel.
pub type DistanceMap = ErrorMap;

/// `H×W` indicator of potential anomalies (`true`) versus background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self { height, width, bits: vec![false; height * width] }
    }

    pub fn ones(height: usize, width: usize) -> Self {
        Self { height, width, bits: vec![true; height * width] }
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::Shape(format!(
                "mask {height}x{width} needs {} bits, got {}",
                height * width,
                bits.len()
            )));
        }
        Ok(Self { height, width, bits })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, p: usize) -> bool {
        self.bits[p]
    }

    pub fn set(&mut self, p: usize, value: bool) {
        self.bits[p] = value;
    }

    /// `S(M)`: number of pixels flagged as potential anomalies.
    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `S(M̄)`: number of background pixels.
    pub fn count_zeros(&self) -> usize {
        self.bits.len() - self.count_ones()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> BinaryMask {
        Self { height: self.height, width: self.width, bits: self.bits.iter().map(|b| !b).collect() }
    }
}

/// Pixel-level labels used only for evaluation: `true` = anomaly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    height: usize,
    width: usize,
    labels: Vec<bool>,
}

impl GroundTruth {
    pub fn new(height: usize, width: usize, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != height * width {
            return Err(Error::Shape(format!(
                "ground truth {height}x{width} needs {} labels, got {}",
                height * width,
                labels.len()
            )));
        }
        Ok(Self { height, width, labels })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn anomaly_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Swaps the roles of anomaly and background.
    pub fn inverted(&self) -> GroundTruth {
        Self { height: self.height, width: self.width, labels: self.labels.iter().map(|l| !l).collect() }
    }
}

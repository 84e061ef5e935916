//! 5×5 Laplacian-of-Gaussian filtering with reflect padding, the masked
//! suppression penalty built on it, and that penalty's exact gradient.

use crate::cube::{BinaryMask, HsiCube};
use crate::error::{Error, Result};

/// The integer LoG template. Zero-sum and symmetric under every flip, so
/// convolution and correlation coincide.
pub const LOG_KERNEL: [[i32; 5]; 5] = [
    [-2, -4, -4, -4, -2],
    [-4, 0, 8, 0, -4],
    [-4, 8, 24, 8, -4],
    [-4, 0, 8, 0, -4],
    [-2, -4, -4, -4, -2],
];

pub const PAD: usize = 2;

/// Mirror index without repeating the edge sample: `-1 → 1`, `n → n-2`.
/// Repeats the reflection for axes shorter than the pad.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    if m >= n as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// Reflect-pads a row-major `h×w` band by [`PAD`] on every side.
pub fn reflect_pad(band: &[f64], height: usize, width: usize) -> Vec<f64> {
    assert_eq!(band.len(), height * width, "band length does not match its shape");
    let (ph, pw) = (height + 2 * PAD, width + 2 * PAD);
    let mut out = Vec::with_capacity(ph * pw);
    for r in 0..ph {
        let src_r = reflect_index(r as isize - PAD as isize, height);
        for c in 0..pw {
            let src_c = reflect_index(c as isize - PAD as isize, width);
            out.push(band[src_r * width + src_c]);
        }
    }
    out
}

fn conv_band(band: &[f64], height: usize, width: usize, out: &mut [f64]) {
    let padded = reflect_pad(band, height, width);
    let pw = width + 2 * PAD;
    for r in 0..height {
        for c in 0..width {
            // the taps sum to zero, so offsets from the centre give the same
            // response and an exact zero on flat neighbourhoods
            let centre = band[r * width + c];
            let mut acc = 0.0;
            for (u, krow) in LOG_KERNEL.iter().enumerate() {
                let prow = &padded[(r + u) * pw + c..(r + u) * pw + c + 5];
                for (k, p) in krow.iter().zip(prow) {
                    acc += *k as f64 * (p - centre);
                }
            }
            out[r * width + c] = acc;
        }
    }
}

/// Transpose of [`conv_band`]: correlate with the (self-symmetric) kernel and
/// fold each padded tap back onto the interior pixel it was copied from.
fn conv_band_adjoint(response: &[f64], height: usize, width: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for r in 0..height {
        for c in 0..width {
            let g = response[r * width + c];
            if g == 0.0 {
                continue;
            }
            for (u, krow) in LOG_KERNEL.iter().enumerate() {
                let src_r = reflect_index(r as isize + u as isize - PAD as isize, height);
                for (v, &k) in krow.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let src_c = reflect_index(c as isize + v as isize - PAD as isize, width);
                    out[src_r * width + src_c] += k as f64 * g;
                }
            }
        }
    }
}

/// Band-wise LoG response with output size equal to the input size.
pub fn log_conv(cube: &HsiCube) -> HsiCube {
    let (h, w) = (cube.height(), cube.width());
    let mut out = HsiCube::from_parts_unchecked(h, w, cube.bands(), vec![0.0; cube.data().len()]);
    for b in 0..cube.bands() {
        conv_band(cube.band(b), h, w, out.band_mut(b));
    }
    out
}

/// Adjoint of [`log_conv`] with respect to the entrywise inner product.
pub fn log_conv_adjoint(cube: &HsiCube) -> HsiCube {
    let (h, w) = (cube.height(), cube.width());
    let mut out = HsiCube::from_parts_unchecked(h, w, cube.bands(), vec![0.0; cube.data().len()]);
    for b in 0..cube.bands() {
        conv_band_adjoint(cube.band(b), h, w, out.band_mut(b));
    }
    out
}

fn check_mask(recon: &HsiCube, mask: &BinaryMask) -> Result<()> {
    if mask.height() != recon.height() || mask.width() != recon.width() {
        return Err(Error::Shape(format!(
            "mask is {}x{}, cube is {}x{}",
            mask.height(),
            mask.width(),
            recon.height(),
            recon.width()
        )));
    }
    Ok(())
}

/// Masked LoG response: every band zeroed outside the mask.
fn masked_response(recon: &HsiCube, mask: &BinaryMask) -> HsiCube {
    let mut resp = log_conv(recon);
    for b in 0..resp.bands() {
        for (v, &m) in resp.band_mut(b).iter_mut().zip(mask.bits()) {
            if !m {
                *v = 0.0;
            }
        }
    }
    resp
}

/// `‖LoG(X̂) ⊙ M‖²_F`, the mask broadcast over bands.
pub fn suppression_value(recon: &HsiCube, mask: &BinaryMask) -> Result<f64> {
    check_mask(recon, mask)?;
    if mask.is_all_zero() {
        return Ok(0.0);
    }
    Ok(masked_response(recon, mask).data().iter().map(|v| v * v).sum())
}

/// Gradient of [`suppression_value`] with respect to `recon`.
pub fn suppression_grad(recon: &HsiCube, mask: &BinaryMask) -> Result<HsiCube> {
    check_mask(recon, mask)?;
    if mask.is_all_zero() {
        return HsiCube::zeros(recon.height(), recon.width(), recon.bands());
    }
    let mut grad = log_conv_adjoint(&masked_response(recon, mask));
    grad.data_mut().iter_mut().for_each(|v| *v *= 2.0);
    Ok(grad)
}

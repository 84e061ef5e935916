//! 8-bit PGM and single-column CSV I/O for masks, labels and score maps.

use std::fs;
use std::path::Path;

use crate::cube::{BinaryMask, ErrorMap, GroundTruth};
use crate::error::{Error, Result};

/// Encodes a binary `P5` image with maxval 255.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(width, height, pixels)).map_err(|e| Error::io(path, e))
}

/// Parsed PGM: `(width, height, pixels)`. Accepts `P5` with maxval ≤ 255
/// and ASCII `P2`.
pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let mut pos = 0;
    let mut token = || -> Result<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(path, "truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let num = |s: String| s.parse::<usize>().map_err(|_| Error::format(path, format!("bad PGM field {s:?}")));
    let width = num(token()?)?;
    let height = num(token()?)?;
    let maxval = num(token()?)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(path, format!("only 8-bit PGM is supported (maxval {maxval})")));
    }
    let n = width * height;
    match magic.as_str() {
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let start = pos + 1;
            if bytes.len() < start + n {
                return Err(Error::format(path, "PGM raster is truncated"));
            }
            Ok((width, height, bytes[start..start + n].to_vec()))
        }
        "P2" => {
            let mut px = Vec::with_capacity(n);
            for _ in 0..n {
                let v = num(token()?)?;
                px.push(v.min(255) as u8);
            }
            Ok((width, height, px))
        }
        other => Err(Error::format(path, format!("not a PGM file (magic {other:?})"))),
    }
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

pub fn write_ground_truth_pgm(gt: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let px: Vec<u8> = gt.labels().iter().map(|&l| if l { 255 } else { 0 }).collect();
    write_pgm(path, gt.width(), gt.height(), &px)
}

/// Any non-zero pixel is an anomaly.
pub fn read_ground_truth_pgm(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let (w, h, px) = read_pgm(path)?;
    GroundTruth::new(h, w, px.iter().map(|&v| v != 0).collect())
}

/// Single column of `0`/`1`, row-major, with the spatial size supplied by the caller.
pub fn read_ground_truth_csv(path: impl AsRef<Path>, height: usize, width: usize) -> Result<GroundTruth> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::with_capacity(height * width);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "0" => labels.push(false),
            "1" => labels.push(true),
            other => {
                return Err(Error::format(path, format!("line {}: expected 0 or 1, got {other:?}", lineno + 1)))
            }
        }
    }
    if labels.len() != height * width {
        return Err(Error::format(
            path,
            format!("{} labels for a {height}x{width} scene", labels.len()),
        ));
    }
    GroundTruth::new(height, width, labels)
}

pub fn write_ground_truth_csv(gt: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::with_capacity(gt.labels().len() * 2);
    for &l in gt.labels() {
        text.push_str(if l { "1\n" } else { "0\n" });
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_mask_pgm(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let px: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write_pgm(path, mask.width(), mask.height(), &px)
}

/// Min-max scaling of a score map to `0..=255`; a constant map renders black.
pub fn scale_to_u8(map: &ErrorMap) -> Vec<u8> {
    let (lo, hi) = map
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    map.values()
        .iter()
        .map(|&v| if span > 0.0 { ((v - lo) / span * 255.0).round() as u8 } else { 0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_roundtrip_with_comment_and_ascii() {
        let p = Path::new("t.pgm");
        let bytes = encode_pgm(3, 2, &[0, 1, 2, 3, 4, 255]);
        assert_eq!(decode_pgm(&bytes, p).unwrap(), (3, 2, vec![0, 1, 2, 3, 4, 255]));
        let ascii = b"P2\n# made by hand\n2 1\n255\n0 255\n";
        assert_eq!(decode_pgm(ascii, p).unwrap(), (2, 1, vec![0, 255]));
        assert!(decode_pgm(b"P6\n1 1\n255\n\0\0\0", p).is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\0", p).is_err());
    }

    #[test]
    fn ground_truth_files() {
        let dir = tempfile::tempdir().unwrap();
        let gt = GroundTruth::new(2, 3, vec![false, true, false, false, false, true]).unwrap();
        let pgm = dir.path().join("gt.pgm");
        write_ground_truth_pgm(&gt, &pgm).unwrap();
        assert_eq!(read_ground_truth_pgm(&pgm).unwrap(), gt);
        let csv = dir.path().join("gt.csv");
        write_ground_truth_csv(&gt, &csv).unwrap();
        assert_eq!(read_ground_truth_csv(&csv, 2, 3).unwrap(), gt);
        assert!(read_ground_truth_csv(&csv, 3, 3).is_err());
        fs::write(&csv, "0\n2\n").unwrap();
        assert!(read_ground_truth_csv(&csv, 1, 2).is_err());
    }

    #[test]
    fn scaling() {
        let m = ErrorMap::new(1, 2, vec![0.0, 1.0]).unwrap();
        assert_eq!(scale_to_u8(&m), vec![0, 255]);
        let c = ErrorMap::new(1, 3, vec![4.0; 3]).unwrap();
        assert_eq!(scale_to_u8(&c), vec![0, 0, 0]);
    }
}

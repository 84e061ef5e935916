//! ENVI-style raster input: a plain-text `.hdr` plus a flat binary data file.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cube::HsiCube;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interleave {
    Bsq,
    Bil,
    Bip,
}

impl Interleave {
    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bsq" => Some(Interleave::Bsq),
            "bil" => Some(Interleave::Bil),
            "bip" => Some(Interleave::Bip),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Interleave::Bsq => "bsq",
            Interleave::Bil => "bil",
            Interleave::Bip => "bip",
        }
    }

    /// Position in the file of sample (`row`, `col`, `band`).
    fn offset(self, row: usize, col: usize, band: usize, width: usize, height: usize, bands: usize) -> usize {
        match self {
            Interleave::Bsq => (band * height + row) * width + col,
            Interleave::Bil => (row * bands + band) * width + col,
            Interleave::Bip => (row * width + col) * bands + band,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnviDataType {
    /// ENVI code 4.
    Float32,
    /// ENVI code 12.
    Uint16,
}

impl EnviDataType {
    fn from_code(code: u32) -> Option<Self> {
        match code {
            4 => Some(EnviDataType::Float32),
            12 => Some(EnviDataType::Uint16),
            _ => None,
        }
    }

    fn code(self) -> u32 {
        match self {
            EnviDataType::Float32 => 4,
            EnviDataType::Uint16 => 12,
        }
    }

    fn size(self) -> usize {
        match self {
            EnviDataType::Float32 => 4,
            EnviDataType::Uint16 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnviHeader {
    pub samples: usize,
    pub lines: usize,
    pub bands: usize,
    pub data_type: EnviDataType,
    pub interleave: Interleave,
    pub big_endian: bool,
    pub header_offset: usize,
}

impl EnviHeader {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let fields = parse_fields(text);
        let get = |key: &str| -> Result<&str> {
            fields
                .get(key)
                .map(String::as_str)
                .ok_or_else(|| Error::format(path, format!("header is missing `{key}`")))
        };
        let number = |key: &str| -> Result<usize> {
            let raw = get(key)?;
            raw.parse::<usize>()
                .map_err(|_| Error::format(path, format!("`{key}` is not an integer: {raw:?}")))
        };

        let samples = number("samples")?;
        let lines = number("lines")?;
        let bands = number("bands")?;
        if samples == 0 || lines == 0 || bands == 0 {
            return Err(Error::format(path, "samples, lines and bands must be positive"));
        }
        let code = number("data type")?;
        let data_type = EnviDataType::from_code(code as u32).ok_or_else(|| {
            Error::format(path, format!("unsupported data type {code} (only 4 = float32 and 12 = uint16)"))
        })?;
        let interleave_raw = get("interleave")?;
        let interleave = Interleave::parse(interleave_raw)
            .ok_or_else(|| Error::format(path, format!("unsupported interleave {interleave_raw:?}")))?;
        let big_endian = match fields.get("byte order").map(String::as_str) {
            None | Some("0") => false,
            Some("1") => true,
            Some(other) => return Err(Error::format(path, format!("bad byte order {other:?}"))),
        };
        let header_offset = if fields.contains_key("header offset") { number("header offset")? } else { 0 };

        Ok(Self { samples, lines, bands, data_type, interleave, big_endian, header_offset })
    }

    pub fn to_text(&self) -> String {
        format!(
            "ENVI\nsamples = {}\nlines = {}\nbands = {}\nheader offset = {}\nfile type = ENVI Standard\n\
             data type = {}\ninterleave = {}\nbyte order = {}\n",
            self.samples,
            self.lines,
            self.bands,
            self.header_offset,
            self.data_type.code(),
            self.interleave.as_str(),
            u8::from(self.big_endian),
        )
    }

    fn data_len(&self) -> usize {
        self.samples * self.lines * self.bands * self.data_type.size()
    }
}

/// `key = value` pairs with lower-cased keys; brace blocks may span lines.
fn parse_fields(text: &str) -> HashMap<String, String> {
    let mut fields = HashMap::new();
    let mut lines = text.lines();
    while let Some(line) = lines.next() {
        let Some((key, value)) = line.split_once('=') else { continue };
        let key = key.trim().to_ascii_lowercase();
        let mut value = value.trim().to_string();
        if value.starts_with('{') {
            while !value.contains('}') {
                match lines.next() {
                    Some(more) => {
                        value.push(' ');
                        value.push_str(more.trim());
                    }
                    None => break,
                }
            }
        }
        fields.insert(key, value);
    }
    fields
}

/// Finds the binary file paired with a header: the header path without its
/// extension, or with one of the usual raster extensions.
fn companion_data_path(header_path: &Path) -> Option<PathBuf> {
    let stem = header_path.with_extension("");
    if stem != header_path && stem.is_file() {
        return Some(stem);
    }
    ["img", "dat", "raw", "bsq", "bil", "bip"]
        .iter()
        .map(|ext| header_path.with_extension(ext))
        .find(|p| p.is_file())
}

pub fn load_envi(header_path: impl AsRef<Path>) -> Result<HsiCube> {
    let header_path = header_path.as_ref();
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header = EnviHeader::parse(&text, header_path)?;
    let data_path = companion_data_path(header_path)
        .ok_or_else(|| Error::format(header_path, "no companion data file found next to header"))?;
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    decode(&header, &bytes, &data_path)
}

fn decode(header: &EnviHeader, bytes: &[u8], path: &Path) -> Result<HsiCube> {
    let expected = header.header_offset + header.data_len();
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!(
                "data file holds {} bytes but header declares {}x{}x{} {:?} ({} bytes)",
                bytes.len(),
                header.lines,
                header.samples,
                header.bands,
                header.data_type,
                expected
            ),
        ));
    }
    let payload = &bytes[header.header_offset..];
    let (h, w, l) = (header.lines, header.samples, header.bands);
    let size = header.data_type.size();
    let read = |idx: usize| -> f64 {
        let s = &payload[idx * size..(idx + 1) * size];
        match (header.data_type, header.big_endian) {
            (EnviDataType::Float32, false) => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
            (EnviDataType::Float32, true) => f32::from_be_bytes([s[0], s[1], s[2], s[3]]) as f64,
            (EnviDataType::Uint16, false) => u16::from_le_bytes([s[0], s[1]]) as f64,
            (EnviDataType::Uint16, true) => u16::from_be_bytes([s[0], s[1]]) as f64,
        }
    };
    let mut data = vec![0.0; h * w * l];
    for band in 0..l {
        for row in 0..h {
            for col in 0..w {
                data[(band * h + row) * w + col] = read(header.interleave.offset(row, col, band, w, h, l));
            }
        }
    }
    HsiCube::new(h, w, l, data).map_err(|e| match e {
        Error::NonFinite(m) => Error::format(path, format!("non-finite sample ({m})")),
        other => other,
    })
}

/// Writes `cube` as little-endian float32 with the given interleave:
/// `<stem>.hdr` and `<stem>.img`. Returns the header path.
pub fn save_envi(cube: &HsiCube, stem: impl AsRef<Path>, interleave: Interleave) -> Result<PathBuf> {
    let stem = stem.as_ref();
    let header = EnviHeader {
        samples: cube.width(),
        lines: cube.height(),
        bands: cube.bands(),
        data_type: EnviDataType::Float32,
        interleave,
        big_endian: false,
        header_offset: 0,
    };
    let (h, w, l) = (cube.height(), cube.width(), cube.bands());
    let mut bytes = vec![0u8; header.data_len()];
    for band in 0..l {
        for row in 0..h {
            for col in 0..w {
                let idx = interleave.offset(row, col, band, w, h, l);
                bytes[idx * 4..idx * 4 + 4].copy_from_slice(&(cube.get(row, col, band) as f32).to_le_bytes());
            }
        }
    }
    let hdr_path = stem.with_extension("hdr");
    let img_path = stem.with_extension("img");
    fs::write(&img_path, bytes).map_err(|e| Error::io(&img_path, e))?;
    fs::write(&hdr_path, header.to_text()).map_err(|e| Error::io(&hdr_path, e))?;
    Ok(hdr_path)
}

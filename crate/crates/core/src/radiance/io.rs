//! PFM (portable float map) and 16-bit PNG storage for [`RadianceMap`].
//!
//! PFM files are written little-endian with rows stored bottom-to-top, as the
//! format prescribes. Samples are `f32` on disk, so a map whose values are
//! representable as `f32` round-trips bit-exactly.
//!
//! PNG files hold linear values quantised against a maximum that is recorded
//! in a JSON sidecar next to the image (`image.png` -> `image.json`).

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma, Rgb};
use serde::{Deserialize, Serialize};

use super::RadianceMap;
use crate::error::{Error, Result};

/// Contents of the JSON sidecar written next to a 16-bit PNG.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PngSidecar {
    pub max: f64,
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Loads a `.pfm` or `.png` file (PNG requires its sidecar).
pub fn load_image(path: impl AsRef<Path>) -> Result<RadianceMap> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("pfm") => load_pfm(path),
        Some("png") => load_png16(path),
        _ => Err(Error::Format(format!("unsupported image extension: {}", path.display()))),
    }
}

/// Saves as PFM, or as 16-bit PNG scaled by the image maximum.
pub fn save_image(img: &RadianceMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_deref() {
        Some("pfm") => save_pfm(img, path),
        Some("png") => {
            let max = img.max();
            save_png16(img, path, if max > 0.0 { max } else { 1.0 })
        }
        _ => Err(Error::Format(format!("unsupported image extension: {}", path.display()))),
    }
}

/// Prefixes an I/O error with the file it concerns.
fn at(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

pub fn save_pfm(img: &RadianceMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut out = Vec::with_capacity(32 + w * h * ch * 4);
    let tag = if ch == 3 { "PF" } else { "Pf" };
    write!(out, "{tag}\n{w} {h}\n-1.0\n")?;
    for y in (0..h).rev() {
        let row = &img.data()[y * w * ch..(y + 1) * w * ch];
        for v in row {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    fs::write(path, out).map_err(at(path))?;
    Ok(())
}

fn read_token(reader: &mut impl BufRead) -> Result<String> {
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if reader.read(&mut byte)? == 0 {
            break;
        }
        if byte[0].is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(byte[0]);
        if token.len() > 64 {
            return Err(Error::Format("PFM header token too long".into()));
        }
    }
    if token.is_empty() {
        return Err(Error::Format("truncated PFM header".into()));
    }
    String::from_utf8(token).map_err(|_| Error::Format("non-ASCII PFM header".into()))
}

pub fn load_pfm(path: impl AsRef<Path>) -> Result<RadianceMap> {
    let path = path.as_ref();
    let mut reader = BufReader::new(fs::File::open(path).map_err(at(path))?);
    let channels = match read_token(&mut reader)?.as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(Error::Format(format!("bad PFM magic `{other}`"))),
    };
    let parse_dim = |s: String| s.parse::<usize>().map_err(|_| Error::Format(format!("bad PFM dimension `{s}`")));
    let w = parse_dim(read_token(&mut reader)?)?;
    let h = parse_dim(read_token(&mut reader)?)?;
    let scale_tok = read_token(&mut reader)?;
    let scale: f32 = scale_tok.parse().map_err(|_| Error::Format(format!("bad PFM scale `{scale_tok}`")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Format(format!("bad PFM scale `{scale_tok}`")));
    }
    let little = scale < 0.0;
    if w == 0 || h == 0 {
        return Err(Error::Format(format!("empty PFM {w}x{h}")));
    }
    let n = w
        .checked_mul(h)
        .and_then(|v| v.checked_mul(channels))
        .ok_or_else(|| Error::Format("PFM dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != n * 4 {
        return Err(Error::Format(format!("PFM payload has {} bytes, header implies {}", bytes.len(), n * 4)));
    }
    let mut data = vec![0.0f64; n];
    let row_len = w * channels;
    for (file_row, chunk) in bytes.chunks_exact(row_len * 4).enumerate() {
        let y = h - 1 - file_row;
        for (i, b) in chunk.chunks_exact(4).enumerate() {
            let raw = [b[0], b[1], b[2], b[3]];
            let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
            if v.is_nan() {
                return Err(Error::Format(format!("NaN at row {y}, sample {i}")));
            }
            data[y * row_len + i] = v as f64;
        }
    }
    RadianceMap::new(w, h, channels, data).map_err(|e| Error::Format(e.to_string()))
}

/// Writes a 16-bit PNG with `stored = round(v / max * 65535)` and the sidecar.
pub fn save_png16(img: &RadianceMap, path: impl AsRef<Path>, max: f64) -> Result<()> {
    let path = path.as_ref();
    if !(max.is_finite() && max > 0.0) {
        return Err(Error::Argument(format!("PNG max scale must be positive, got {max}")));
    }
    let quant: Vec<u16> = img.data().iter().map(|v| ((v / max).clamp(0.0, 1.0) * 65535.0).round() as u16).collect();
    let (w, h) = (img.width() as u32, img.height() as u32);
    let result = if img.channels() == 3 {
        ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, quant).map(|b| b.save(path))
    } else {
        ImageBuffer::<Luma<u16>, _>::from_raw(w, h, quant).map(|b| b.save(path))
    };
    result.ok_or_else(|| Error::Dimension("buffer size mismatch".into()))?.map_err(|e| Error::Format(e.to_string()))?;
    let side = sidecar_path(path);
    fs::write(&side, serde_json::to_vec(&PngSidecar { max })?).map_err(at(&side))?;
    Ok(())
}

pub fn load_png16(path: impl AsRef<Path>) -> Result<RadianceMap> {
    let path = path.as_ref();
    let sidecar: PngSidecar = {
        let side = sidecar_path(path);
        serde_json::from_slice(&fs::read(&side).map_err(at(&side))?)?
    };
    if !(sidecar.max.is_finite() && sidecar.max > 0.0) {
        return Err(Error::Format(format!("sidecar max {} must be positive", sidecar.max)));
    }
    let dynimg = image::open(path).map_err(|e| Error::Format(e.to_string()))?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    let (channels, raw): (usize, Vec<u16>) = match dynimg.color().channel_count() {
        1 => (1, dynimg.into_luma16().into_raw()),
        3 => (3, dynimg.into_rgb16().into_raw()),
        n => return Err(Error::Format(format!("unsupported PNG channel count {n}"))),
    };
    let data = raw.iter().map(|&q| q as f64 / 65535.0 * sidecar.max).collect();
    RadianceMap::new(w, h, channels, data)
}

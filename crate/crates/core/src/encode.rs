//! Transfer functions, quantisation and the encoded-domain sharpening
//! baseline.
//!
//! Gamma and linear encodings act on values normalised by a caller-supplied
//! ceiling; the logarithmic encoding works on raw digital values of an
//! `N`-bit signal and needs no ceiling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::gaussian_blur;
use crate::radiance::RadianceMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum TransferFunction {
    /// `V_out = V_in^(1/gamma)`.
    Gamma { gamma: f64 },
    /// `log2(Y) / log2(2^N - 1)` for `Y >= 1`, else 0.
    Log { n_bits: u32 },
    /// `V_out = m * V_in + c`, clamped to `[0, 1]`.
    Linear { m: f64, c: f64 },
}

impl Default for TransferFunction {
    fn default() -> Self {
        TransferFunction::Gamma { gamma: 2.2 }
    }
}

impl TransferFunction {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TransferFunction::Gamma { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            TransferFunction::Log { n_bits } if (8..=16).contains(&n_bits) => Ok(()),
            TransferFunction::Linear { m, c } if m > 0.0 && m.is_finite() && c.is_finite() => Ok(()),
            tf => Err(Error::Argument(format!("invalid transfer function {tf:?}"))),
        }
    }

    fn log_denominator(n_bits: u32) -> f64 {
        (((1u64 << n_bits) - 1) as f64).log2()
    }

    /// Encodes one value. `v` is normalised for gamma/linear, raw for log.
    pub fn apply(&self, v: f64) -> Result<f64> {
        match *self {
            TransferFunction::Gamma { gamma } => {
                if v < 0.0 {
                    return Err(Error::Argument(format!("gamma encoding of negative value {v}")));
                }
                Ok(v.min(1.0).powf(1.0 / gamma))
            }
            TransferFunction::Log { n_bits } => {
                Ok(if v >= 1.0 { (v.log2() / Self::log_denominator(n_bits)).min(1.0) } else { 0.0 })
            }
            TransferFunction::Linear { m, c } => Ok((m * v + c).clamp(0.0, 1.0)),
        }
    }

    /// Functional inverse of [`TransferFunction::apply`] on its invertible
    /// domain.
    pub fn invert(&self, e: f64) -> f64 {
        match *self {
            TransferFunction::Gamma { gamma } => e.max(0.0).powf(gamma),
            TransferFunction::Log { n_bits } => {
                if e > 0.0 {
                    (e * Self::log_denominator(n_bits)).exp2()
                } else {
                    0.0
                }
            }
            TransferFunction::Linear { m, c } => ((e - c) / m).max(0.0),
        }
    }

    fn needs_ceiling(&self) -> bool {
        !matches!(self, TransferFunction::Log { .. })
    }
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransferFunction::Gamma { gamma } => write!(f, "gamma:{gamma}"),
            TransferFunction::Log { n_bits } => write!(f, "log:{n_bits}"),
            TransferFunction::Linear { m, c } => write!(f, "linear:{m},{c}"),
        }
    }
}

impl FromStr for TransferFunction {
    type Err = Error;

    /// Parses `gamma:2.2`, `log:16` or `linear:m,c`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Argument(format!("cannot parse transfer function `{s}`"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let tf = match kind {
            "gamma" => TransferFunction::Gamma { gamma: args.parse().map_err(|_| bad())? },
            "log" => TransferFunction::Log { n_bits: args.parse().map_err(|_| bad())? },
            "linear" => {
                let (m, c) = args.split_once(',').ok_or_else(bad)?;
                TransferFunction::Linear {
                    m: m.trim().parse().map_err(|_| bad())?,
                    c: c.trim().parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(bad()),
        };
        tf.validate()?;
        Ok(tf)
    }
}

/// Image after a transfer function, values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedImage {
    width: usize,
    height: usize,
    channels: usize,
    values: Vec<f64>,
    tf: TransferFunction,
    /// Normalisation ceiling (gamma/linear only).
    ceiling: Option<f64>,
    quant_bits: Option<u32>,
}

impl EncodedImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tf(&self) -> TransferFunction {
        self.tf
    }

    pub fn ceiling(&self) -> Option<f64> {
        self.ceiling
    }

    pub fn quant_bits(&self) -> Option<u32> {
        self.quant_bits
    }

    /// Encoded values viewed as an image (for storage).
    pub fn to_map(&self) -> Result<RadianceMap> {
        RadianceMap::new(self.width, self.height, self.channels, self.values.clone())
    }
}

/// Applies `tf` per sample. `ceiling` normalises gamma/linear inputs and
/// defaults to the image maximum (or 1 for an all-zero image).
pub fn encode(img: &RadianceMap, tf: TransferFunction, ceiling: Option<f64>) -> Result<EncodedImage> {
    tf.validate()?;
    let ceiling = if tf.needs_ceiling() {
        let c = ceiling.unwrap_or_else(|| if img.max() > 0.0 { img.max() } else { 1.0 });
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!("ceiling must be positive, got {c}")));
        }
        Some(c)
    } else {
        None
    };
    let scale = ceiling.map_or(1.0, |c| 1.0 / c);
    let values = img.data().iter().map(|&v| tf.apply(v * scale)).collect::<Result<Vec<_>>>()?;
    Ok(EncodedImage {
        width: img.width(),
        height: img.height(),
        channels: img.channels(),
        values,
        tf,
        ceiling,
        quant_bits: None,
    })
}

/// Maps encoded values back to linear radiance.
pub fn decode(enc: &EncodedImage) -> Result<RadianceMap> {
    let scale = enc.ceiling.unwrap_or(1.0);
    let data = enc.values.iter().map(|&e| enc.tf.invert(e) * scale).collect();
    RadianceMap::from_clamped(enc.width, enc.height, enc.channels, data)
}

/// Rounds to the nearest multiple of `1 / (2^bits - 1)`.
pub fn quantize(enc: &EncodedImage, bits: u32) -> Result<EncodedImage> {
    if !(1..=16).contains(&bits) {
        return Err(Error::Argument(format!("quantisation depth {bits} outside 1..=16")));
    }
    let levels = ((1u32 << bits) - 1) as f64;
    let values = enc.values.iter().map(|v| (v * levels).round() / levels).collect();
    Ok(EncodedImage { values, quant_bits: Some(bits), ..enc.clone() })
}

/// Unsharp masking on encoded values: `v + amount * (v - blur(v))`, clamped.
///
/// This is the encoded-domain glare-reduction baseline; it keeps the
/// quantisation tag of the input but the output is generally off-grid.
pub fn unsharp_mask(enc: &EncodedImage, sigma: f64, amount: f64) -> Result<EncodedImage> {
    if !(sigma > 0.0 && amount >= 0.0) {
        return Err(Error::Argument("unsharp mask needs sigma > 0, amount >= 0".into()));
    }
    let (w, h, ch) = (enc.width, enc.height, enc.channels);
    let mut values = enc.values.clone();
    for c in 0..ch {
        let plane: Vec<f64> = enc.values.iter().skip(c).step_by(ch).copied().collect();
        let blurred = gaussian_blur(&plane, w, h, sigma);
        for i in 0..w * h {
            values[i * ch + c] = (plane[i] + amount * (plane[i] - blurred[i])).clamp(0.0, 1.0);
        }
    }
    Ok(EncodedImage { values, quant_bits: None, ..enc.clone() })
}

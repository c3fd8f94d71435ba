//! MELF: the binary log-mel dump exchanged with the CLI and external vocoders.
//!
//! ```text
//! "MELF" | u32 version=1 | u32 n_frames | u32 n_bins | u32 sample_rate | u32 hop_size
//! n_frames * n_bins f32, row-major, time-major
//! ```
//! All integers and floats little-endian.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{MelSpectrogram, SpectralConfig};
use crate::error::{Error, Result};

pub const MELF_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

pub fn encode_melf(m: &MelSpectrogram) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + m.logmels.len() * 4);
    out.extend_from_slice(b"MELF");
    for v in [
        MELF_VERSION,
        m.n_frames() as u32,
        m.n_mels() as u32,
        m.config.sample_rate,
        m.config.hop_size as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in m.logmels.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

/// Decodes a MELF image. The header carries only the frame geometry, so the
/// remaining analysis settings come from `base` (sample rate, hop and mel
/// count are overridden; `fmax` is capped at the new Nyquist). Values below
/// the log floor, e.g. from f32 rounding, are raised to it.
pub fn decode_melf(bytes: &[u8], base: &SpectralConfig) -> Result<MelSpectrogram> {
    if bytes.len() < HEADER_LEN || &bytes[0..4] != b"MELF" {
        return Err(Error::MalformedContainer("missing MELF magic".into()));
    }
    let field = |i: usize| {
        let at = 4 + 4 * i;
        u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
    };
    let version = field(0);
    if version != MELF_VERSION {
        return Err(Error::UnsupportedFormat(format!("MELF version {version}")));
    }
    let (n_frames, n_bins) = (field(1) as usize, field(2) as usize);
    let config = SpectralConfig {
        n_mels: n_bins,
        sample_rate: field(3),
        hop_size: field(4) as usize,
        fmax: base.fmax.min(field(3) as f64 / 2.0),
        ..*base
    };
    config.validate()?;

    let expected = n_frames
        .checked_mul(n_bins)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::MalformedContainer("MELF dimensions overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::MalformedContainer(format!(
            "MELF payload is {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let floor = config.log_floor_ln();
    let values = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .map(|v| {
            if v.is_finite() {
                Ok(v.max(floor))
            } else {
                Err(Error::NonFinite("MELF payload".into()))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let logmels = Array2::from_shape_vec((n_frames, n_bins), values)
        .map_err(|e| Error::MalformedContainer(e.to_string()))?;
    MelSpectrogram::new(logmels, config)
}

pub fn write_melf(path: impl AsRef<Path>, m: &MelSpectrogram) -> Result<()> {
    fs::write(path, encode_melf(m))?;
    Ok(())
}

pub fn read_melf(path: impl AsRef<Path>, base: &SpectralConfig) -> Result<MelSpectrogram> {
    decode_melf(&fs::read(path)?, base)
}

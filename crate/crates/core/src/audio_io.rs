//! Mono waveforms, RIFF/WAVE I/O and sample-rate conversion.
//!
//! Reading accepts PCM-16, PCM-24 and IEEE float-32 data (format codes 1 and
//! 3, plus `WAVE_FORMAT_EXTENSIBLE` wrapping either), mono or stereo. Stereo
//! is averaged down to mono. Writing always produces 16-bit mono PCM.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// A mono signal with nominal range [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(format!("waveform sample {i}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|s| s * gain).collect(), self.sample_rate)
    }
}

struct FmtChunk {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let bytes = fs::read(path)?;
    decode_wav(&bytes)
}

pub fn read_wav_from<R: Read>(mut reader: R) -> Result<Waveform> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode_wav(&bytes)
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decodes a complete RIFF/WAVE byte image into a mono waveform.
pub fn decode_wav(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedContainer("missing RIFF/WAVE header".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let declared = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        // Streaming writers may leave the size at 0xFFFFFFFF; clamp to what exists.
        let body_end = body_start.saturating_add(declared).min(bytes.len());
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::MalformedContainer(
                        "fmt chunk shorter than 16 bytes".into(),
                    ));
                }
                let mut format = u16_at(body, 0);
                if format == FORMAT_EXTENSIBLE {
                    if body.len() < 26 {
                        return Err(Error::MalformedContainer(
                            "extensible fmt chunk missing sub-format".into(),
                        ));
                    }
                    format = u16_at(body, 24);
                }
                fmt = Some(FmtChunk {
                    format,
                    channels: u16_at(body, 2),
                    sample_rate: u32_at(body, 4),
                    bits: u16_at(body, 14),
                });
            }
            b"data" => data = Some(body),
            _ => {}
        }
        pos = body_start.saturating_add(declared).saturating_add(declared & 1);
    }

    let fmt = fmt.ok_or_else(|| Error::MalformedContainer("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::MalformedContainer("no data chunk".into()))?;

    if fmt.format != FORMAT_PCM && fmt.format != FORMAT_IEEE_FLOAT {
        return Err(Error::UnsupportedFormat(format!("format code {}", fmt.format)));
    }
    if fmt.channels != 1 && fmt.channels != 2 {
        return Err(Error::UnsupportedFormat(format!("{} channels", fmt.channels)));
    }
    if fmt.sample_rate == 0 {
        return Err(Error::MalformedContainer("sample rate is zero".into()));
    }
    let decode: fn(&[u8]) -> f64 = match (fmt.format, fmt.bits) {
        (FORMAT_PCM, 16) => |b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        (FORMAT_PCM, 24) => |b| {
            let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
            v as f64 / 8_388_608.0
        },
        (FORMAT_IEEE_FLOAT, 32) => |b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
        (code, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "{bits}-bit samples with format code {code}"
            )))
        }
    };

    let width = fmt.bits as usize / 8;
    let channels = fmt.channels as usize;
    let frame = width * channels;
    let samples: Vec<f64> = data
        .chunks_exact(frame)
        .map(|f| {
            let sum: f64 = f.chunks_exact(width).map(decode).sum();
            sum / channels as f64
        })
        .collect();
    Waveform::new(samples, fmt.sample_rate)
}

pub fn write_wav(path: impl AsRef<Path>, w: &Waveform) -> Result<()> {
    fs::write(path, encode_wav(w))?;
    Ok(())
}

pub fn write_wav_to<W: Write>(mut writer: W, w: &Waveform) -> Result<()> {
    writer.write_all(&encode_wav(w))?;
    Ok(())
}

/// Quantizes one sample exactly as [`write_wav`] stores it.
pub fn quantize_pcm16(sample: f64) -> i16 {
    let scaled = sample.clamp(-1.0, 1.0) * 32768.0;
    // f64::round is half-away-from-zero.
    scaled.round().clamp(-32768.0, 32767.0) as i16
}

/// Encodes as a 16-bit mono PCM RIFF/WAVE image.
pub fn encode_wav(w: &Waveform) -> Vec<u8> {
    let data_len = (w.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&w.sample_rate().to_le_bytes());
    out.extend_from_slice(&(w.sample_rate() * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in w.samples() {
        out.extend_from_slice(&quantize_pcm16(s).to_le_bytes());
    }
    out
}

const KAISER_BETA: f64 = 12.0;
const ZERO_CROSSINGS: usize = 64;
const TABLE_DENSITY: usize = 1024;

/// Zeroth-order modified Bessel function of the first kind, by power series.
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc sampled at `TABLE_DENSITY` points per zero crossing,
/// from 0 to `ZERO_CROSSINGS` (inclusive, plus one guard entry).
fn sinc_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = ZERO_CROSSINGS * TABLE_DENSITY;
        let norm = bessel_i0(KAISER_BETA);
        (0..=n + 1)
            .map(|i| {
                let u = i as f64 / TABLE_DENSITY as f64;
                if i > n {
                    return 0.0;
                }
                let v = u / ZERO_CROSSINGS as f64;
                let window = bessel_i0(KAISER_BETA * (1.0 - v * v).max(0.0).sqrt()) / norm;
                let sinc = if i == 0 {
                    1.0
                } else {
                    let a = std::f64::consts::PI * u;
                    a.sin() / a
                };
                sinc * window
            })
            .collect()
    })
}

fn kernel(table: &[f64], u: f64) -> f64 {
    let pos = u.abs() * TABLE_DENSITY as f64;
    let i = pos as usize;
    if i >= ZERO_CROSSINGS * TABLE_DENSITY {
        return 0.0;
    }
    let frac = pos - i as f64;
    table[i] + (table[i + 1] - table[i]) * frac
}

/// Band-limited sample-rate conversion with a Kaiser-windowed sinc
/// (beta 12, 64 zero crossings per side). The cutoff sits at the lower of the
/// two Nyquist frequencies.
pub fn resample(w: &Waveform, target_rate: u32) -> Result<Waveform> {
    if target_rate == 0 {
        return Err(Error::InvalidArgument("target rate must be positive".into()));
    }
    let source_rate = w.sample_rate();
    if source_rate == target_rate {
        return Ok(w.clone());
    }
    let src = w.samples();
    let (s, t) = (source_rate as u128, target_rate as u128);
    let out_len = ((src.len() as u128 * t * 2 + s) / (2 * s)) as usize;

    let cutoff = (target_rate as f64 / source_rate as f64).min(1.0);
    let half_width = ZERO_CROSSINGS as f64 / cutoff;
    let table = sinc_table();

    let out = (0..out_len)
        .map(|n| {
            let num = n as u128 * s;
            let centre = (num / t) as f64 + (num % t) as f64 / t as f64;
            let lo = (centre - half_width).ceil().max(0.0) as usize;
            let hi = ((centre + half_width).floor() as usize).min(src.len().saturating_sub(1));
            if src.is_empty() || lo > hi {
                return 0.0;
            }
            let acc: f64 = (lo..=hi)
                .map(|i| src[i] * kernel(table, cutoff * (centre - i as f64)))
                .sum();
            acc * cutoff
        })
        .collect();
    Waveform::new(out, target_rate)
}

//! Spectral analysis: STFT/iSTFT, mel filterbanks, log-mel extraction and the
//! approximate mel-to-linear inversion used before phase recovery.
//!
//! All matrices are time-major: one row per frame. The "vertical" axis of a
//! mel image is the column index of a row.

mod mel;
mod melf;
mod stft;

use ndarray::Array2;
use realfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mel::{mel_filterbank, mel_spectrogram, mel_to_linear, MelFilterbank, MEL_INVERSION_ITERS};
pub use melf::{decode_melf, encode_melf, read_melf, write_melf, MELF_VERSION};
pub use stft::{istft, linear_spectrogram, stft, StftPlan};

/// Hz -> mel, HTK formula.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub n_fft: usize,
    pub win_size: usize,
    pub hop_size: usize,
    pub n_mels: usize,
    pub sample_rate: u32,
    pub fmin: f64,
    pub fmax: f64,
    pub log_floor: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            n_fft: 1280,
            win_size: 1280,
            hop_size: 320,
            n_mels: 80,
            sample_rate: 16000,
            fmin: 0.0,
            fmax: 8000.0,
            log_floor: 1e-5,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_fft < 2 || !self.n_fft.is_multiple_of(2) {
            return bad(format!("n_fft must be even and >= 2, got {}", self.n_fft));
        }
        if self.win_size == 0 || self.win_size > self.n_fft {
            return bad(format!("win_size {} not in 1..=n_fft", self.win_size));
        }
        if self.hop_size == 0 || self.hop_size > self.win_size {
            return bad(format!("hop_size {} not in 1..=win_size", self.hop_size));
        }
        if self.n_mels == 0 {
            return bad("n_mels must be positive".into());
        }
        if self.sample_rate == 0 {
            return bad("sample_rate must be positive".into());
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        if !(0.0 <= self.fmin && self.fmin < self.fmax && self.fmax <= nyquist) {
            return bad(format!(
                "need 0 <= fmin < fmax <= {nyquist}, got fmin={} fmax={}",
                self.fmin, self.fmax
            ));
        }
        if !(self.log_floor > 0.0 && self.log_floor.is_finite()) {
            return bad(format!("log_floor must be positive, got {}", self.log_floor));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    pub fn log_floor_ln(&self) -> f64 {
        self.log_floor.ln()
    }

    /// Frames produced by a centred STFT of `len` samples.
    pub fn n_frames(&self, len: usize) -> usize {
        len / self.hop_size + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    pub frames: Array2<Complex64>,
    pub config: SpectralConfig,
}

impl ComplexSpectrogram {
    pub fn n_frames(&self) -> usize {
        self.frames.nrows()
    }

    pub fn magnitude(&self) -> LinearSpectrogram {
        LinearSpectrogram {
            mags: self.frames.mapv(|c| c.norm()),
            config: self.config,
        }
    }
}

/// STFT magnitudes, `[n_frames x (n_fft/2 + 1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSpectrogram {
    pub mags: Array2<f64>,
    pub config: SpectralConfig,
}

impl LinearSpectrogram {
    pub fn new(mags: Array2<f64>, config: SpectralConfig) -> Result<Self> {
        config.validate()?;
        if mags.ncols() != config.n_bins() {
            return Err(Error::DimensionMismatch(format!(
                "linear spectrogram has {} bins, config expects {}",
                mags.ncols(),
                config.n_bins()
            )));
        }
        if mags.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "linear magnitudes must be finite and non-negative".into(),
            ));
        }
        Ok(Self { mags, config })
    }

    pub fn n_frames(&self) -> usize {
        self.mags.nrows()
    }

    /// RMS of the waveform whose centred STFT would have these magnitudes,
    /// from Parseval's relation over the Hann-windowed frames.
    pub fn implied_rms(&self) -> f64 {
        let n = self.config.n_fft as f64;
        let bins = self.config.n_bins();
        let energy: f64 = self
            .mags
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let weight = if k == 0 || k == bins - 1 { 1.0 } else { 2.0 };
                        weight * m * m
                    })
                    .sum::<f64>()
            })
            .sum();
        let window_power = 3.0 * self.config.win_size as f64 / 8.0;
        let len = (self.n_frames().max(1) * self.config.hop_size) as f64;
        (energy * self.config.hop_size as f64 / (n * window_power * len)).sqrt()
    }
}

/// Natural-log mel magnitudes, `[n_frames x n_mels]`, floored at `ln(log_floor)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub logmels: Array2<f64>,
    pub config: SpectralConfig,
}

impl MelSpectrogram {
    pub fn new(logmels: Array2<f64>, config: SpectralConfig) -> Result<Self> {
        config.validate()?;
        if logmels.ncols() != config.n_mels {
            return Err(Error::DimensionMismatch(format!(
                "mel spectrogram has {} bins, config expects {}",
                logmels.ncols(),
                config.n_mels
            )));
        }
        if logmels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("log-mel matrix".into()));
        }
        let floor = config.log_floor_ln();
        if logmels.iter().any(|&v| v < floor) {
            return Err(Error::InvalidArgument(format!(
                "log-mel entries must be >= ln(log_floor) = {floor}"
            )));
        }
        Ok(Self { logmels, config })
    }

    pub fn n_frames(&self) -> usize {
        self.logmels.nrows()
    }

    pub fn n_mels(&self) -> usize {
        self.logmels.ncols()
    }
}

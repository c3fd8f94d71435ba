//! F0 tracking (YIN) and the F0 Pearson-correlation metric.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::audio_io::{resample, Waveform};
use crate::error::{Error, Result};

/// Frames voiced in both tracks required by [`f0_pcc`].
pub const MIN_COVOICED_FRAMES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchConfig {
    pub f0_min: f64,
    pub f0_max: f64,
    pub frame_size: usize,
    pub hop_size: usize,
    pub yin_threshold: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            f0_min: 50.0,
            f0_max: 600.0,
            frame_size: 1280,
            hop_size: 320,
            yin_threshold: 0.15,
        }
    }
}

impl PitchConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        if !(0.0 < self.f0_min && self.f0_min < self.f0_max && self.f0_max < nyquist) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < f0_min < f0_max < {nyquist}, got {} and {}",
                self.f0_min, self.f0_max
            )));
        }
        if self.hop_size == 0 {
            return Err(Error::InvalidArgument("hop_size must be positive".into()));
        }
        if !(self.yin_threshold > 0.0 && self.yin_threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "yin_threshold {} outside (0, 1)",
                self.yin_threshold
            )));
        }
        let max_lag = (sample_rate as f64 / self.f0_min).ceil() as usize;
        if self.frame_size <= max_lag + 1 {
            return Err(Error::InvalidArgument(format!(
                "frame_size {} too short for f0_min {} Hz (needs > {} samples)",
                self.frame_size,
                self.f0_min,
                max_lag + 1
            )));
        }
        Ok(())
    }
}

/// Per-frame F0 in Hz; `0.0` marks an unvoiced frame.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    pub f0: Vec<f64>,
    pub hop_size: usize,
    pub frame_size: usize,
    pub sample_rate: u32,
}

impl F0Track {
    pub fn voiced(&self) -> impl Iterator<Item = f64> + '_ {
        self.f0.iter().copied().filter(|&f| f > 0.0)
    }

    pub fn voiced_fraction(&self) -> f64 {
        if self.f0.is_empty() {
            return 0.0;
        }
        self.voiced().count() as f64 / self.f0.len() as f64
    }

    /// Median over voiced frames, `None` if nothing is voiced.
    pub fn median_voiced(&self) -> Option<f64> {
        let mut v: Vec<f64> = self.voiced().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        Some(if v.len() % 2 == 1 {
            v[mid]
        } else {
            (v[mid - 1] + v[mid]) / 2.0
        })
    }

    /// Centre time of frame `i`.
    pub fn frame_time(&self, i: usize) -> f64 {
        (i * self.hop_size) as f64 / self.sample_rate as f64
            + self.frame_size as f64 / (2.0 * self.sample_rate as f64)
    }

    /// `frame,time_sec,f0_hz` with six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,time_sec,f0_hz\n");
        for (i, f) in self.f0.iter().enumerate() {
            let _ = writeln!(out, "{i},{:.6},{:.6}", self.frame_time(i), f);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// YIN on one frame. Returns F0 in Hz or `None` when no lag dips below the
/// threshold.
fn yin_frame(frame: &[f64], sample_rate: f64, cfg: &PitchConfig, diff: &mut [f64]) -> Option<f64> {
    let min_lag = ((sample_rate / cfg.f0_max).floor() as usize).max(2);
    let max_lag = (sample_rate / cfg.f0_min).ceil() as usize;
    let window = frame.len() - max_lag - 1;

    // Difference function d(tau) for tau in 1..=max_lag+1.
    diff[0] = 0.0;
    for tau in 1..=max_lag + 1 {
        diff[tau] = frame[..window]
            .iter()
            .zip(&frame[tau..tau + window])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
    }
    // Cumulative-mean normalisation, in place.
    let mut running = 0.0;
    diff[0] = 1.0;
    for (tau, d) in diff.iter_mut().enumerate().take(max_lag + 2).skip(1) {
        running += *d;
        *d = if running > 0.0 {
            *d * tau as f64 / running
        } else {
            1.0
        };
    }

    let mut tau = min_lag;
    while tau <= max_lag {
        if diff[tau] < cfg.yin_threshold {
            while tau < max_lag && diff[tau + 1] < diff[tau] {
                tau += 1;
            }
            let (a, b, c) = (diff[tau - 1], diff[tau], diff[tau + 1]);
            let curvature = a - 2.0 * b + c;
            let shift = if curvature > 0.0 {
                (0.5 * (a - c) / curvature).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            let f0 = sample_rate / (tau as f64 + shift);
            return (cfg.f0_min..=cfg.f0_max).contains(&f0).then_some(f0);
        }
        tau += 1;
    }
    None
}

/// Frame-wise YIN: `floor((len − frame_size)/hop) + 1` frames.
pub fn yin_f0(w: &Waveform, cfg: &PitchConfig) -> Result<F0Track> {
    cfg.validate(w.sample_rate())?;
    if w.len() < cfg.frame_size {
        return Err(Error::InputTooShort {
            needed: cfg.frame_size,
            got: w.len(),
        });
    }
    let n_frames = (w.len() - cfg.frame_size) / cfg.hop_size + 1;
    let rate = w.sample_rate() as f64;
    let mut diff = vec![0.0; (rate / cfg.f0_min).ceil() as usize + 2];
    let f0 = (0..n_frames)
        .map(|i| {
            let frame = &w.samples()[i * cfg.hop_size..i * cfg.hop_size + cfg.frame_size];
            yin_frame(frame, rate, cfg, &mut diff).unwrap_or(0.0)
        })
        .collect();
    Ok(F0Track {
        f0,
        hop_size: cfg.hop_size,
        frame_size: cfg.frame_size,
        sample_rate: w.sample_rate(),
    })
}

fn is_constant(v: &[f64]) -> bool {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    hi - lo <= 1e-12 * scale
}

/// Pearson correlation coefficient, clamped to [-1, 1].
///
/// A sequence whose spread is within 1e-12 of its magnitude counts as
/// constant and yields `DegenerateVariance`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "pearson inputs have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InputTooShort {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("pearson input".into()));
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::DegenerateVariance("constant sequence".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of two F0 contours over the frames voiced in both.
///
/// Tracks are truncated to the shorter one; `converted` is resampled to the
/// source rate first if the rates differ.
pub fn f0_pcc(source: &Waveform, converted: &Waveform, cfg: &PitchConfig) -> Result<f64> {
    let converted = if converted.sample_rate() != source.sample_rate() {
        resample(converted, source.sample_rate())?
    } else {
        converted.clone()
    };
    let a = yin_f0(source, cfg)?;
    let b = yin_f0(&converted, cfg)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        a.f0.iter()
            .zip(&b.f0)
            .filter(|(x, y)| **x > 0.0 && **y > 0.0)
            .map(|(x, y)| (*x, *y))
            .unzip();
    if xs.len() < MIN_COVOICED_FRAMES {
        return Err(Error::InsufficientVoicedOverlap {
            found: xs.len(),
            needed: MIN_COVOICED_FRAMES,
        });
    }
    pearson(&xs, &ys)
}

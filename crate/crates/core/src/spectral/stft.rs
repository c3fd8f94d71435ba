use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::{ComplexSpectrogram, LinearSpectrogram, SpectralConfig};
use crate::audio_io::Waveform;
use crate::error::{Error, Result};

const MIN_WINDOW_SUM: f64 = 1e-9;

/// Periodic Hann window of `win_size`, zero-padded symmetrically to `n_fft`.
fn padded_hann(win_size: usize, n_fft: usize) -> Vec<f64> {
    let mut window = vec![0.0; n_fft];
    let offset = (n_fft - win_size) / 2;
    for i in 0..win_size {
        window[offset + i] = 0.5 - 0.5 * (2.0 * PI * i as f64 / win_size as f64).cos();
    }
    window
}

/// Maps an index into the centre-padded signal back onto the source with
/// reflection (no edge repeat), folding as many times as needed.
fn reflect_index(padded: usize, pad: usize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len - 1) as isize;
    let j = (padded as isize - pad as isize).rem_euclid(period);
    if j < len as isize {
        j as usize
    } else {
        (period - j) as usize
    }
}

/// Planned forward/inverse transforms for one [`SpectralConfig`], reusable
/// across many analysis/synthesis passes.
pub struct StftPlan {
    config: SpectralConfig,
    window: Vec<f64>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl StftPlan {
    pub fn new(config: SpectralConfig) -> Result<Self> {
        config.validate()?;
        let mut planner = RealFftPlanner::<f64>::new();
        Ok(Self {
            config,
            window: padded_hann(config.win_size, config.n_fft),
            forward: planner.plan_fft_forward(config.n_fft),
            inverse: planner.plan_fft_inverse(config.n_fft),
        })
    }

    pub fn config(&self) -> &SpectralConfig {
        &self.config
    }

    /// Centred STFT of raw samples: reflect-pad `n_fft/2` on both sides,
    /// `floor(len/hop) + 1` frames.
    pub fn analyze(&self, samples: &[f64]) -> Result<Array2<Complex64>> {
        if samples.is_empty() {
            return Err(Error::InputTooShort { needed: 1, got: 0 });
        }
        let n_fft = self.config.n_fft;
        let hop = self.config.hop_size;
        let pad = n_fft / 2;
        let n_frames = self.config.n_frames(samples.len());
        let padded: Vec<f64> = (0..samples.len() + 2 * pad)
            .map(|p| samples[reflect_index(p, pad, samples.len())])
            .collect();

        let bins = self.config.n_bins();
        let mut out = Array2::<Complex64>::zeros((n_frames, bins));
        let mut frame = self.forward.make_input_vec();
        let mut spectrum = self.forward.make_output_vec();
        let mut scratch = self.forward.make_scratch_vec();
        for (t, mut row) in out.rows_mut().into_iter().enumerate() {
            let seg = &padded[t * hop..t * hop + n_fft];
            for ((f, s), w) in frame.iter_mut().zip(seg).zip(&self.window) {
                *f = s * w;
            }
            self.forward
                .process_with_scratch(&mut frame, &mut spectrum, &mut scratch)
                .expect("buffer sizes come from the plan");
            for (o, c) in row.iter_mut().zip(&spectrum) {
                *o = *c;
            }
        }
        Ok(out)
    }

    /// Windowed overlap-add with squared-window normalisation, trimmed of the
    /// centre padding: `(n_frames - 1) * hop` samples.
    pub fn synthesize(&self, frames: &Array2<Complex64>) -> Result<Vec<f64>> {
        let n_fft = self.config.n_fft;
        let hop = self.config.hop_size;
        let bins = self.config.n_bins();
        if frames.ncols() != bins {
            return Err(Error::DimensionMismatch(format!(
                "spectrogram has {} bins, plan expects {bins}",
                frames.ncols()
            )));
        }
        let n_frames = frames.nrows();
        if n_frames == 0 {
            return Ok(Vec::new());
        }
        let full_len = n_fft + (n_frames - 1) * hop;
        let mut acc = vec![0.0; full_len];
        let mut norm = vec![0.0; full_len];

        let mut spectrum = self.inverse.make_input_vec();
        let mut frame = self.inverse.make_output_vec();
        let mut scratch = self.inverse.make_scratch_vec();
        let scale = 1.0 / n_fft as f64;
        for (t, row) in frames.rows().into_iter().enumerate() {
            for (s, c) in spectrum.iter_mut().zip(row.iter()) {
                *s = *c;
            }
            // A real signal has purely real DC and Nyquist bins.
            spectrum[0].im = 0.0;
            spectrum[bins - 1].im = 0.0;
            self.inverse
                .process_with_scratch(&mut spectrum, &mut frame, &mut scratch)
                .expect("buffer sizes come from the plan");
            let start = t * hop;
            for (i, (&x, &w)) in frame.iter().zip(&self.window).enumerate() {
                acc[start + i] += x * scale * w;
                norm[start + i] += w * w;
            }
        }

        let pad = n_fft / 2;
        let out_len = (n_frames - 1) * hop;
        let mut out = Vec::with_capacity(out_len);
        for i in pad..pad + out_len {
            if norm[i] < MIN_WINDOW_SUM {
                return Err(Error::DegenerateWindowSum {
                    index: i - pad,
                    min_sum: norm[i],
                });
            }
            out.push(acc[i] / norm[i]);
        }
        Ok(out)
    }
}

pub fn stft(w: &Waveform, cfg: &SpectralConfig) -> Result<ComplexSpectrogram> {
    if w.sample_rate() != cfg.sample_rate {
        return Err(Error::ConfigMismatch(format!(
            "waveform is {} Hz, config expects {} Hz",
            w.sample_rate(),
            cfg.sample_rate
        )));
    }
    let plan = StftPlan::new(*cfg)?;
    Ok(ComplexSpectrogram {
        frames: plan.analyze(w.samples())?,
        config: *cfg,
    })
}

pub fn istft(s: &ComplexSpectrogram) -> Result<Waveform> {
    if s.frames.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("complex spectrogram".into()));
    }
    let plan = StftPlan::new(s.config)?;
    Waveform::new(plan.synthesize(&s.frames)?, s.config.sample_rate)
}

pub fn linear_spectrogram(w: &Waveform, cfg: &SpectralConfig) -> Result<LinearSpectrogram> {
    Ok(stft(w, cfg)?.magnitude())
}

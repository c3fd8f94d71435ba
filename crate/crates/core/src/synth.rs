//! Deterministic test signals: tones, glides, vowel-like harmonic tones and
//! seeded speech-like utterances built from formant-shaped syllables.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::audio_io::Waveform;

/// First three formants (Hz) of a few vowels.
const VOWELS: [[f64; 3]; 5] = [
    [730.0, 1090.0, 2440.0], // a
    [530.0, 1840.0, 2480.0], // e
    [270.0, 2290.0, 3010.0], // i
    [570.0, 840.0, 2410.0],  // o
    [300.0, 870.0, 2240.0],  // u
];
const FORMANT_BANDWIDTHS: [f64; 3] = [90.0, 110.0, 170.0];

pub fn sine(freq: f64, amplitude: f64, secs: f64, sample_rate: u32) -> Waveform {
    let n = (secs * sample_rate as f64).round() as usize;
    let sr = sample_rate as f64;
    let samples = (0..n)
        .map(|i| amplitude * (2.0 * PI * freq * i as f64 / sr).sin())
        .collect();
    Waveform::new(samples, sample_rate).expect("finite samples")
}

/// Sine whose instantaneous frequency moves linearly from `f_start` to `f_end`.
pub fn glide(f_start: f64, f_end: f64, amplitude: f64, secs: f64, sample_rate: u32) -> Waveform {
    let n = (secs * sample_rate as f64).round() as usize;
    let sr = sample_rate as f64;
    let mut phase: f64 = 0.0;
    let samples = (0..n)
        .map(|i| {
            let f = f_start + (f_end - f_start) * i as f64 / n.max(1) as f64;
            let v = amplitude * phase.sin();
            phase = (phase + 2.0 * PI * f / sr) % (2.0 * PI);
            v
        })
        .collect();
    Waveform::new(samples, sample_rate).expect("finite samples")
}

pub fn white_noise(amplitude: f64, secs: f64, sample_rate: u32, seed: u64) -> Waveform {
    let n = (secs * sample_rate as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n).map(|_| amplitude * rng.random_range(-1.0..1.0)).collect();
    Waveform::new(samples, sample_rate).expect("finite samples")
}

/// Magnitude of a second-order resonator with unit gain at DC.
fn resonance(f: f64, centre: f64, bandwidth: f64) -> f64 {
    let c2 = centre * centre;
    c2 / ((c2 - f * f).powi(2) + (bandwidth * f).powi(2)).sqrt()
}

/// Cascade-formant vocal tract with a −6 dB/octave source-plus-radiation tilt.
fn envelope(f: f64, formants: &[f64; 3]) -> f64 {
    let tilt = 100.0 / f.max(100.0);
    formants
        .iter()
        .zip(FORMANT_BANDWIDTHS)
        .map(|(&c, b)| resonance(f, c, b))
        .product::<f64>()
        * tilt
}

/// Harmonic source at `f0` shaped by the formants of `vowel` (index into a
/// small table of five vowels), normalised to `peak`.
pub fn vowel(f0: f64, vowel: usize, secs: f64, peak: f64, sample_rate: u32) -> Waveform {
    let formants = VOWELS[vowel % VOWELS.len()];
    let n = (secs * sample_rate as f64).round() as usize;
    let sr = sample_rate as f64;
    let harmonics: Vec<(f64, f64)> = (1..)
        .map(|h| h as f64 * f0)
        .take_while(|&f| f < sr / 2.0 * 0.95)
        .map(|f| (f, envelope(f, &formants)))
        .collect();
    let mut samples: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / sr;
            harmonics.iter().map(|&(f, a)| a * (2.0 * PI * f * t).sin()).sum()
        })
        .collect();
    normalise(&mut samples, peak);
    Waveform::new(samples, sample_rate).expect("finite samples")
}

fn normalise(samples: &mut [f64], peak: f64) {
    let max = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max > 0.0 {
        let g = peak / max;
        samples.iter_mut().for_each(|v| *v *= g);
    }
}

/// Parameters of [`speech_like`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtteranceStyle {
    /// Mean F0 of the speaker in Hz.
    pub base_f0: f64,
    pub secs: f64,
    pub sample_rate: u32,
}

impl Default for UtteranceStyle {
    fn default() -> Self {
        Self {
            base_f0: 140.0,
            secs: 2.0,
            sample_rate: 16000,
        }
    }
}

/// Seeded speech-like signal.
///
/// A sequence of voiced syllables with a declining, wobbling F0 contour and
/// vowel-to-vowel formant transitions, separated by short fricative noise
/// bursts and pauses. Peak amplitude is 0.5.
pub fn speech_like(style: &UtteranceStyle, seed: u64) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sr = style.sample_rate as f64;
    let n = (style.secs * sr).round() as usize;
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let mut out = vec![0.0; n];

    let mut pos = (0.05 * sr) as usize;
    let mut phase: f64 = 0.0;
    while pos < n {
        // Syllable: fricative onset, voiced nucleus, optional pause.
        if rng.random_bool(0.4) {
            let len = (rng.random_range(0.03..0.07) * sr) as usize;
            let amp = rng.random_range(0.02..0.05);
            for s in out.iter_mut().skip(pos).take(len) {
                *s += amp * noise.sample(&mut rng);
            }
            pos += len;
        }
        let len = (rng.random_range(0.15..0.3) * sr) as usize;
        let v_from = VOWELS[rng.random_range(0..VOWELS.len())];
        let v_to = VOWELS[rng.random_range(0..VOWELS.len())];
        let f0_start = style.base_f0 * rng.random_range(0.85..1.2);
        let f0_end = style.base_f0 * rng.random_range(0.8..1.1);
        let wobble_rate = rng.random_range(3.0..6.0);
        for k in 0..len.min(n.saturating_sub(pos)) {
            let u = k as f64 / len as f64;
            let t = (pos + k) as f64 / sr;
            let f0 = (f0_start + (f0_end - f0_start) * u) * (1.0 + 0.03 * (2.0 * PI * wobble_rate * t).sin());
            let formants = [
                v_from[0] + (v_to[0] - v_from[0]) * u,
                v_from[1] + (v_to[1] - v_from[1]) * u,
                v_from[2] + (v_to[2] - v_from[2]) * u,
            ];
            phase = (phase + 2.0 * PI * f0 / sr) % (2.0 * PI);
            // Raised-cosine attack and release over the first/last 10%.
            let gate = if u < 0.1 {
                0.5 - 0.5 * (PI * u / 0.1).cos()
            } else if u > 0.9 {
                0.5 - 0.5 * (PI * (1.0 - u) / 0.1).cos()
            } else {
                1.0
            };
            let mut v = 0.0;
            let mut h = 1.0;
            while h * f0 < sr * 0.45 {
                v += envelope(h * f0, &formants) * (h * phase).sin();
                h += 1.0;
            }
            out[pos + k] += gate * v;
        }
        pos += len;
        if rng.random_bool(0.3) {
            pos += (rng.random_range(0.05..0.15) * sr) as usize;
        }
    }
    normalise(&mut out, 0.5);
    Waveform::new(out, style.sample_rate).expect("finite samples")
}

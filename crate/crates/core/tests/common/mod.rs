#![allow(dead_code)]

use std::path::{Path, PathBuf};

use sraug::audio_io::{write_wav, Waveform};
use sraug::synth::{speech_like, UtteranceStyle};

/// Ten seeded speech-like utterances with speaker F0 between 100 and 235 Hz.
pub fn mini_corpus() -> Vec<Waveform> {
    (0..10)
        .map(|i| {
            let style = UtteranceStyle {
                base_f0: 100.0 + 15.0 * i as f64,
                secs: 1.5 + 0.1 * i as f64,
                sample_rate: 16000,
            };
            speech_like(&style, 1000 + i as u64)
        })
        .collect()
}

/// Writes `waves` as `utt_XX.wav` into `dir` and returns their paths.
pub fn write_corpus(dir: &Path, waves: &[Waveform]) -> Vec<PathBuf> {
    std::fs::create_dir_all(dir).unwrap();
    waves
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let p = dir.join(format!("utt_{i:02}.wav"));
            write_wav(&p, w).unwrap();
            p
        })
        .collect()
}

pub fn snr_db(reference: &[f64], estimate: &[f64]) -> f64 {
    let signal: f64 = reference.iter().map(|v| v * v).sum();
    let noise: f64 = reference.iter().zip(estimate).map(|(a, b)| (a - b).powi(2)).sum();
    10.0 * (signal / noise).log10()
}

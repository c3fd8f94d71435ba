//! Spectrogram-resize (SR) augmentation for speech.
//!
//! Takes a waveform to a log-mel spectrogram, stretches or squeezes it along
//! the frequency or time axis, and resynthesises audio with Griffin-Lim or an
//! external vocoder. Also provides YIN-based F0 tracking, the F0 Pearson
//! correlation metric and the loss functions of a VAE-GAN voice-conversion
//! model.

pub mod audio_io;
pub mod error;
pub mod pipeline;
pub mod pitch_eval;
pub mod spectral;
pub mod sr_ops;
pub mod synth;
pub mod vc_losses;
pub mod vocoder;

pub use error::{Error, Result};

//! Waveform reconstruction from magnitude and log-mel spectrograms.
//!
//! The built-in path is fast Griffin-Lim (momentum-accelerated projections
//! between the set of consistent STFTs and the set of spectrograms with the
//! requested magnitude). [`external_vocoder`] hands a MELF file to any program,
//! e.g. a neural vocoder, and reads back the WAV it writes.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use realfft::num_complex::Complex64;

use crate::audio_io::{read_wav, resample, Waveform};
use crate::error::{Error, Result};
use crate::spectral::{
    mel_filterbank, mel_to_linear, write_melf, LinearSpectrogram, MelSpectrogram, StftPlan,
};

pub const PEAK_LIMIT: f64 = 0.95;
pub const DEFAULT_VOCODER_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseInit {
    Zero,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GriffinLimConfig {
    pub n_iters: usize,
    pub init: PhaseInit,
    /// Momentum in [0, 1); 0 is the classic algorithm.
    pub momentum: f64,
    /// Seeds the random phase init; ignored for zero-phase.
    pub seed: u64,
}

impl Default for GriffinLimConfig {
    fn default() -> Self {
        Self {
            n_iters: 60,
            init: PhaseInit::Zero,
            momentum: 0.99,
            seed: 0,
        }
    }
}

impl GriffinLimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iters == 0 {
            return Err(Error::InvalidArgument(
                "Griffin-Lim needs at least one iteration".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidArgument(format!(
                "momentum {} outside [0, 1)",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// Recovers a waveform whose STFT magnitude approximates `s`.
///
/// Output length is `(n_frames − 1)·hop`; if the result peaks above
/// [`PEAK_LIMIT`] it is scaled down to exactly that peak.
pub fn griffin_lim(s: &LinearSpectrogram, cfg: &GriffinLimConfig) -> Result<Waveform> {
    cfg.validate()?;
    let plan = StftPlan::new(s.config)?;
    let target = &s.mags;

    let mut phases: Array2<Complex64> = match cfg.init {
        PhaseInit::Zero => Array2::from_elem(target.raw_dim(), Complex64::new(1.0, 0.0)),
        PhaseInit::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Array2::from_shape_simple_fn(target.raw_dim(), || {
                Complex64::from_polar(1.0, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            })
        }
    };

    let mut estimate = target.mapv(|m| Complex64::new(m, 0.0));
    let mut previous: Option<Array2<Complex64>> = None;
    let accel = cfg.momentum / (1.0 + cfg.momentum);

    if target.nrows() >= 2 {
        for _ in 0..cfg.n_iters {
            estimate.zip_mut_with(&phases, |e, p| *e = *p);
            estimate.zip_mut_with(target, |e, &m| *e *= m);
            let signal = plan.synthesize(&estimate)?;
            if signal.is_empty() {
                break;
            }
            let rebuilt = plan.analyze(&signal)?;
            // analyze() of (T-1)·hop samples yields T frames again.
            debug_assert_eq!(rebuilt.dim(), target.dim());
            phases.assign(&rebuilt);
            if let Some(prev) = &previous {
                phases.zip_mut_with(prev, |p, q| *p -= *q * accel);
            }
            phases.mapv_inplace(|c| {
                let n = c.norm();
                if n > 1e-16 {
                    c / n
                } else {
                    Complex64::new(1.0, 0.0)
                }
            });
            previous = Some(rebuilt);
        }
    }

    estimate.zip_mut_with(&phases, |e, p| *e = *p);
    estimate.zip_mut_with(target, |e, &m| *e *= m);
    let mut out = plan.synthesize(&estimate)?;
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > PEAK_LIMIT {
        let gain = PEAK_LIMIT / peak;
        out.iter_mut().for_each(|v| *v *= gain);
    }
    Waveform::new(out, s.config.sample_rate)
}

/// `‖ |STFT(w)| − s ‖ / ‖s‖` over the frames both cover.
pub fn spectral_convergence(s: &LinearSpectrogram, w: &Waveform) -> Result<f64> {
    let plan = StftPlan::new(s.config)?;
    let rebuilt = plan.analyze(w.samples())?;
    let frames = rebuilt.nrows().min(s.n_frames());
    let (mut err, mut norm) = (0.0, 0.0);
    for t in 0..frames {
        for (c, &m) in rebuilt.row(t).iter().zip(s.mags.row(t)) {
            err += (c.norm() - m).powi(2);
            norm += m * m;
        }
    }
    if norm == 0.0 {
        return Ok(if err == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((err / norm).sqrt())
}

/// exp → non-negative mel inversion → Griffin-Lim, at the mel's sample rate.
pub fn reconstruct_from_mel(m: &MelSpectrogram, gl: &GriffinLimConfig) -> Result<Waveform> {
    let fb = mel_filterbank(&m.config)?;
    let linear = mel_to_linear(m, &fb)?;
    griffin_lim(&linear, gl)
}

/// Quotes a path for `sh -c`.
fn shell_quote(p: &Path) -> String {
    let s = p.to_string_lossy();
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// Runs an external vocoder.
///
/// `template` is a shell command containing `{mel}` and `{wav}`; they are
/// replaced by quoted paths of a MELF input and the WAV the command must
/// write. Both live in a private temporary directory. The result is
/// resampled to the mel's sample rate when needed.
pub fn external_vocoder(m: &MelSpectrogram, template: &str, timeout: Duration) -> Result<Waveform> {
    if !template.contains("{mel}") || !template.contains("{wav}") {
        return Err(Error::InvalidArgument(
            "vocoder command template needs both {mel} and {wav} placeholders".into(),
        ));
    }
    let dir = tempfile::Builder::new().prefix("sraug-vocoder-").tempdir()?;
    let mel_path = dir.path().join("input.melf");
    let wav_path = dir.path().join("output.wav");
    write_melf(&mel_path, m)?;

    let command = template
        .replace("{mel}", &shell_quote(&mel_path))
        .replace("{wav}", &shell_quote(&wav_path));
    let mut child = shell(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()?;

    // Drain both pipes so a chatty child cannot block on a full buffer.
    let mut stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let out_reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout.read_to_end(&mut buf);
        buf
    });
    let err_reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr.read_to_end(&mut buf);
        buf
    });

    let started = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if started.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Error::VocoderTimeout(timeout.as_secs()));
        }
        std::thread::sleep(Duration::from_millis(10));
    };
    let _ = out_reader.join();
    let stderr = String::from_utf8_lossy(&err_reader.join().unwrap_or_default()).into_owned();

    if !status.success() {
        return Err(Error::VocoderProcessFailure {
            status: status.to_string(),
            stderr: stderr.trim().to_string(),
        });
    }
    if !wav_path.exists() {
        return Err(Error::VocoderOutputMissing(wav_path));
    }
    let wav = read_wav(&wav_path)?;
    if wav.sample_rate() != m.config.sample_rate {
        resample(&wav, m.config.sample_rate)
    } else {
        Ok(wav)
    }
}

#[cfg(unix)]
fn shell(command: &str) -> Command {
    let mut c = Command::new("sh");
    c.arg("-c").arg(command);
    c
}

#[cfg(windows)]
fn shell(command: &str) -> Command {
    let mut c = Command::new("cmd");
    c.arg("/C").arg(command);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{linear_spectrogram, SpectralConfig};

    #[test]
    fn zero_spectrogram_gives_silence() {
        let cfg = SpectralConfig::default();
        let s = LinearSpectrogram::new(Array2::zeros((20, 641)), cfg).unwrap();
        let w = griffin_lim(&s, &GriffinLimConfig::default()).unwrap();
        assert_eq!(w.len(), 19 * 320);
        assert!(w.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn config_validation() {
        let bad = GriffinLimConfig {
            n_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = GriffinLimConfig {
            momentum: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn peak_is_limited() {
        let cfg = SpectralConfig::default();
        let loud: Vec<f64> = (0..8000)
            .map(|i| (2.0 * std::f64::consts::PI * 300.0 * i as f64 / 16000.0).sin())
            .collect();
        let s = linear_spectrogram(&Waveform::new(loud, 16000).unwrap(), &cfg).unwrap();
        let w = griffin_lim(
            &s,
            &GriffinLimConfig {
                n_iters: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(w.peak() <= PEAK_LIMIT + 1e-12);
    }

    #[test]
    fn random_init_is_seeded() {
        let cfg = SpectralConfig::default();
        let x: Vec<f64> = (0..6400).map(|i| (i as f64 * 0.05).sin() * 0.3).collect();
        let s = linear_spectrogram(&Waveform::new(x, 16000).unwrap(), &cfg).unwrap();
        let gl = |seed| GriffinLimConfig {
            n_iters: 4,
            init: PhaseInit::Random,
            seed,
            ..Default::default()
        };
        let a = griffin_lim(&s, &gl(9)).unwrap();
        let b = griffin_lim(&s, &gl(9)).unwrap();
        let c = griffin_lim(&s, &gl(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn template_needs_both_placeholders() {
        let cfg = SpectralConfig::default();
        let m = MelSpectrogram::new(Array2::zeros((3, 80)), cfg).unwrap();
        assert!(matches!(
            external_vocoder(&m, "cp {mel} out.wav", DEFAULT_VOCODER_TIMEOUT),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn shell_quoting_survives_quotes() {
        assert_eq!(shell_quote(Path::new("/tmp/a'b")), r"'/tmp/a'\''b'");
    }
}

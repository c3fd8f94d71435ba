use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sraug::audio_io::{read_wav, resample, write_wav, Waveform};
use sraug::pipeline::{run, FileConfig, PipelineConfig};
use sraug::pitch_eval::{f0_pcc, yin_f0, PitchConfig};
use sraug::spectral::{mel_spectrogram, read_melf, write_melf, SpectralConfig};
use sraug::sr_ops::{apply_resize, RatioRange, ResizeAxis, ResizeSpec, DEFAULT_PAD_NOISE_STD};
use sraug::vc_losses::{kl_diag_gaussian, DiagGaussian};
use sraug::vocoder::{external_vocoder, reconstruct_from_mel, GriffinLimConfig, DEFAULT_VOCODER_TIMEOUT};
use sraug::{Error, Result};

#[derive(Parser)]
#[command(name = "sraug", version, about = "Spectrogram-resize speech augmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Augment a WAV file or a directory tree of WAV files.
    Augment(AugmentArgs),
    /// Write the log-mel spectrogram of a WAV file as MELF.
    Mel { wav: PathBuf, melf: PathBuf },
    /// Resize a MELF spectrogram.
    Resize {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "vertical")]
        axis: ResizeAxis,
        #[arg(long, default_value_t = DEFAULT_PAD_NOISE_STD)]
        noise_std: f64,
    },
    /// Synthesise a WAV file from a MELF spectrogram.
    Reconstruct {
        melf: PathBuf,
        wav: PathBuf,
        #[arg(long, default_value_t = 60)]
        gl_iters: usize,
        #[arg(long)]
        vocoder_cmd: Option<String>,
    },
    /// Write the F0 track of a WAV file as CSV.
    F0 { wav: PathBuf, csv: PathBuf },
    /// Print the F0 Pearson correlation between two WAV files.
    F0pcc { wav_a: PathBuf, wav_b: PathBuf },
    /// Print KL(q || p) for two diagonal Gaussians stored as JSON
    /// `{"mean": [...], "log_std": [...]}`.
    Kl { q: PathBuf, p: PathBuf },
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    ratio_min: Option<f64>,
    #[arg(long)]
    ratio_max: Option<f64>,
    #[arg(long)]
    variants: Option<usize>,
    #[arg(long)]
    axis: Option<ResizeAxis>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    gl_iters: Option<usize>,
    #[arg(long)]
    vocoder_cmd: Option<String>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML file of `key = value` defaults; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl AugmentArgs {
    fn into_config(self) -> Result<PipelineConfig> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let input = self
            .input
            .or(file.input)
            .ok_or_else(|| Error::InvalidArgument("--in is required".into()))?;
        let out = self
            .out
            .or(file.out)
            .ok_or_else(|| Error::InvalidArgument("--out is required".into()))?;
        let mut cfg = PipelineConfig::new(input, out);
        let defaults = RatioRange::default();
        cfg.ratio_range = RatioRange {
            lo: self.ratio_min.or(file.ratio_min).unwrap_or(defaults.lo),
            hi: self.ratio_max.or(file.ratio_max).unwrap_or(defaults.hi),
        };
        cfg.variants_per_file = self.variants.or(file.variants).unwrap_or(1);
        cfg.axis = self.axis.or(file.axis).unwrap_or(ResizeAxis::Vertical);
        cfg.master_seed = self.seed.or(file.seed).unwrap_or(0);
        cfg.pad_noise_std = self.noise_std.or(file.noise_std).unwrap_or(DEFAULT_PAD_NOISE_STD);
        cfg.gl.n_iters = self.gl_iters.or(file.gl_iters).unwrap_or(cfg.gl.n_iters);
        cfg.vocoder_cmd = self.vocoder_cmd.or(file.vocoder_cmd);
        cfg.jobs = self.jobs.or(file.jobs).unwrap_or(1);
        Ok(cfg)
    }
}

fn read_at_rate(path: &Path, rate: u32) -> Result<Waveform> {
    let w = read_wav(path)?;
    if w.sample_rate() == rate {
        Ok(w)
    } else {
        resample(&w, rate)
    }
}

fn read_gaussian(path: &Path) -> Result<DiagGaussian> {
    let g: DiagGaussian = serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    g.validate()?;
    Ok(g)
}

fn augment(args: AugmentArgs) -> Result<bool> {
    let cfg = args.into_config()?;
    let report = run(&cfg)?;
    for (path, err) in &report.failures {
        eprintln!("failed: {} ({err})", path.display());
    }
    eprintln!(
        "{} input files, {} outputs, {} failures; manifest at {}",
        report.n_inputs,
        report.manifest.len(),
        report.failures.len(),
        cfg.output_dir.join("manifest.jsonl").display()
    );
    Ok(!report.has_failures())
}

fn execute(command: Command) -> Result<bool> {
    let spectral = SpectralConfig::default();
    match command {
        Command::Augment(args) => return augment(args),
        Command::Mel { wav, melf } => {
            let w = read_at_rate(&wav, spectral.sample_rate)?;
            write_melf(melf, &mel_spectrogram(&w, &spectral)?)?;
        }
        Command::Resize {
            input,
            output,
            ratio,
            seed,
            axis,
            noise_std,
        } => {
            let m = read_melf(input, &spectral)?;
            let spec = ResizeSpec {
                ratio,
                axis,
                pad_noise_std: noise_std,
                seed,
            };
            write_melf(output, &apply_resize(&m, &spec)?)?;
        }
        Command::Reconstruct {
            melf,
            wav,
            gl_iters,
            vocoder_cmd,
        } => {
            let m = read_melf(melf, &spectral)?;
            let audio = match vocoder_cmd {
                Some(template) => external_vocoder(&m, &template, DEFAULT_VOCODER_TIMEOUT)?,
                None => reconstruct_from_mel(
                    &m,
                    &GriffinLimConfig {
                        n_iters: gl_iters,
                        ..Default::default()
                    },
                )?,
            };
            write_wav(wav, &audio)?;
        }
        Command::F0 { wav, csv } => {
            let w = read_at_rate(&wav, spectral.sample_rate)?;
            yin_f0(&w, &PitchConfig::default())?.write_csv(csv)?;
        }
        Command::F0pcc { wav_a, wav_b } => {
            let a = read_at_rate(&wav_a, spectral.sample_rate)?;
            let b = read_at_rate(&wav_b, spectral.sample_rate)?;
            println!("{}", f0_pcc(&a, &b, &PitchConfig::default())?);
        }
        Command::Kl { q, p } => {
            println!("{}", kl_diag_gaussian(&read_gaussian(&q)?, &read_gaussian(&p)?)?);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

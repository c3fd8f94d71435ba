//! Batch corpus augmentation.
//!
//! Each WAV file is read, resampled to the analysis rate and turned into a
//! log-mel spectrogram once; every variant then draws its own ratio, resizes
//! and is resynthesised. Randomness is keyed by `(master_seed, item, variant)`
//! so results do not depend on scheduling or thread count.

mod file_config;
mod manifest;

use std::fs;
use std::path::{Component, Path, PathBuf};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use walkdir::WalkDir;

use crate::audio_io::{read_wav, resample, write_wav, Waveform};
use crate::error::{Error, Result};
use crate::spectral::{mel_spectrogram, MelSpectrogram, SpectralConfig};
use crate::sr_ops::{
    horizontal_sr, sample_ratio, vertical_sr, RatioRange, ResizeAxis, ResizeSpec, DEFAULT_PAD_NOISE_STD,
};
use crate::vocoder::{external_vocoder, reconstruct_from_mel, GriffinLimConfig, DEFAULT_VOCODER_TIMEOUT};

pub use file_config::FileConfig;
pub use manifest::{AugmentManifest, ManifestRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// A WAV file or a directory searched recursively.
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub ratio_range: RatioRange,
    pub variants_per_file: usize,
    pub axis: ResizeAxis,
    pub master_seed: u64,
    pub spectral: SpectralConfig,
    pub gl: GriffinLimConfig,
    /// Shell template with `{mel}` and `{wav}`; Griffin-Lim when `None`.
    pub vocoder_cmd: Option<String>,
    pub vocoder_timeout: Duration,
    pub pad_noise_std: f64,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            output_dir: output_dir.into(),
            ratio_range: RatioRange::default(),
            variants_per_file: 1,
            axis: ResizeAxis::Vertical,
            master_seed: 0,
            spectral: SpectralConfig::default(),
            gl: GriffinLimConfig::default(),
            vocoder_cmd: None,
            vocoder_timeout: DEFAULT_VOCODER_TIMEOUT,
            pad_noise_std: DEFAULT_PAD_NOISE_STD,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants_per_file == 0 {
            return Err(Error::InvalidArgument("variants_per_file must be >= 1".into()));
        }
        self.ratio_range.validate()?;
        self.spectral.validate()?;
        self.gl.validate()?;
        ResizeSpec {
            pad_noise_std: self.pad_noise_std,
            ..ResizeSpec::new(1.0, self.axis)
        }
        .validate()?;
        if same_location(&self.input, &self.output_dir) {
            return Err(Error::InvalidArgument(format!(
                "output directory {} must differ from the input directory",
                self.output_dir.display()
            )));
        }
        Ok(())
    }

    fn input_root(&self) -> &Path {
        if self.input.is_dir() {
            &self.input
        } else {
            self.input.parent().unwrap_or(Path::new(""))
        }
    }
}

fn same_location(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(a), Ok(b)) => a == b,
        _ => a == b,
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit seed for one `(item, variant)` work unit.
pub fn derive_seed(master_seed: u64, item_index: u64, variant: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ item_index) ^ variant)
}

/// `<stem>_sr<ratio, 3 decimals>_<variant>.wav`
pub fn output_file_name(stem: &str, ratio: f64, variant: usize) -> String {
    format!("{stem}_sr{ratio:.3}_{variant}.wav")
}

fn slash_path(p: &Path) -> String {
    p.components()
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            _ => None,
        })
        .collect::<Vec<_>>()
        .join("/")
}

fn is_wav(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

/// WAV files under `cfg.input`, sorted by path relative to the input root.
/// Anything inside the output directory is skipped.
pub fn discover(cfg: &PipelineConfig) -> Result<Vec<PathBuf>> {
    if !cfg.input.exists() {
        return Err(Error::IoFailure(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("input {} does not exist", cfg.input.display()),
        )));
    }
    if cfg.input.is_file() {
        return Ok(vec![cfg.input.clone()]);
    }
    let out_dir = fs::canonicalize(&cfg.output_dir).ok();
    let mut found = Vec::new();
    let walker = WalkDir::new(&cfg.input)
        .follow_links(true)
        .into_iter()
        .filter_entry(|e| match (&out_dir, e.file_type().is_dir()) {
            (Some(out), true) => fs::canonicalize(e.path()).map_or(true, |p| &p != out),
            _ => true,
        });
    for entry in walker {
        let entry = entry.map_err(|e| Error::IoFailure(e.into()))?;
        if entry.file_type().is_file() && is_wav(entry.path()) {
            found.push(entry.into_path());
        }
    }
    let root = cfg.input.clone();
    found.sort_by_cached_key(|p| slash_path(p.strip_prefix(&root).unwrap_or(p)));
    Ok(found)
}

/// Loads a file as a log-mel spectrogram at the analysis rate.
fn analyse(path: &Path, spectral: &SpectralConfig) -> Result<(Waveform, MelSpectrogram)> {
    let source = read_wav(path).map_err(|e| e.at_stage(path, "read"))?;
    let at_rate = if source.sample_rate() == spectral.sample_rate {
        source.clone()
    } else {
        resample(&source, spectral.sample_rate).map_err(|e| e.at_stage(path, "resample"))?
    };
    let mel = mel_spectrogram(&at_rate, spectral).map_err(|e| e.at_stage(path, "mel"))?;
    Ok((source, mel))
}

/// Augments one file into `cfg.variants_per_file` outputs.
///
/// Every variant owns a ChaCha8 generator seeded with
/// [`derive_seed`]`(master_seed, item_index, variant)`; the ratio is drawn
/// first, then the padding noise. The same seed drives random-phase
/// Griffin-Lim. Errors carry the file path and the failing stage.
pub fn augment_file(path: &Path, cfg: &PipelineConfig, item_index: usize) -> Result<Vec<ManifestRecord>> {
    let root = cfg.input_root();
    let rel = path.strip_prefix(root).unwrap_or(path);
    let rel_dir = rel.parent().unwrap_or(Path::new(""));
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "audio".into());
    let (source, mel) = analyse(path, &cfg.spectral)?;

    let dest_dir = cfg.output_dir.join(rel_dir);
    fs::create_dir_all(&dest_dir).map_err(|e| Error::from(e).at_stage(path, "write"))?;

    let mut records = Vec::with_capacity(cfg.variants_per_file);
    for variant in 0..cfg.variants_per_file {
        let seed = derive_seed(cfg.master_seed, item_index as u64, variant as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ratio = sample_ratio(&cfg.ratio_range, &mut rng).map_err(|e| e.at_stage(path, "resize"))?;
        let spec = ResizeSpec {
            ratio,
            axis: cfg.axis,
            pad_noise_std: cfg.pad_noise_std,
            seed,
        };
        let resized = match cfg.axis {
            ResizeAxis::Vertical => vertical_sr(&mel, &spec, &mut rng),
            ResizeAxis::Horizontal => horizontal_sr(&mel, &spec),
        }
        .map_err(|e| e.at_stage(path, "resize"))?;

        let audio = match &cfg.vocoder_cmd {
            Some(template) => external_vocoder(&resized, template, cfg.vocoder_timeout),
            None => reconstruct_from_mel(&resized, &GriffinLimConfig { seed, ..cfg.gl }),
        }
        .map_err(|e| e.at_stage(path, "vocoder"))?;

        let name = output_file_name(&stem, ratio, variant);
        write_wav(dest_dir.join(&name), &audio).map_err(|e| e.at_stage(path, "write"))?;
        records.push(ManifestRecord {
            source_path: slash_path(rel),
            output_path: slash_path(&rel_dir.join(&name)),
            ratio,
            axis: cfg.axis,
            seed,
            n_frames_in: mel.n_frames(),
            n_frames_out: resized.n_frames(),
            duration_sec_in: source.duration_secs(),
            duration_sec_out: audio.duration_secs(),
        });
    }
    Ok(records)
}

/// Outcome of [`run`]: the manifest of everything written plus the files
/// that failed.
#[derive(Debug)]
pub struct RunReport {
    pub manifest: AugmentManifest,
    pub failures: Vec<(PathBuf, Error)>,
    pub n_inputs: usize,
}

impl RunReport {
    pub fn has_failures(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Augments every discovered file and writes `manifest.jsonl` to the output
/// directory. A failing file is reported in [`RunReport::failures`] and does
/// not stop the others.
pub fn run(cfg: &PipelineConfig) -> Result<RunReport> {
    cfg.validate()?;
    let files = discover(cfg)?;
    if files.is_empty() {
        return Err(Error::EmptyCorpus(cfg.input.clone()));
    }
    fs::create_dir_all(&cfg.output_dir)?;

    let work = |(i, path): (usize, &PathBuf)| (path.clone(), augment_file(path, cfg, i));
    let results: Vec<(PathBuf, Result<Vec<ManifestRecord>>)> = if cfg.jobs == 1 {
        files.iter().enumerate().map(work).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| files.par_iter().enumerate().map(work).collect())
    };

    let mut manifest = AugmentManifest::default();
    let mut failures = Vec::new();
    for (path, result) in results {
        match result {
            Ok(records) => manifest.records.extend(records),
            Err(e) => failures.push((path, e)),
        }
    }
    manifest.write(cfg.output_dir.join(AugmentManifest::FILE_NAME))?;
    Ok(RunReport {
        manifest,
        failures,
        n_inputs: files.len(),
    })
}

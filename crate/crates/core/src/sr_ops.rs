//! Spectrogram-resize (SR) operations on log-mel images.
//!
//! Vertical SR stretches or squeezes the frequency axis of every frame by a
//! ratio `r` with linear interpolation, then restores the original bin count:
//! for `r < 1` the missing top rows are filled with the frame's highest
//! resized bin plus Gaussian noise, for `r > 1` the overflow at the top is cut.
//! On reconstruction `r < 1` lowers pitch and narrows formant spacing, `r > 1`
//! raises both. Horizontal SR resizes the time axis and keeps the new length.

use ndarray::{s, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::MelSpectrogram;

pub const MIN_RATIO: f64 = 0.5;
pub const MAX_RATIO: f64 = 2.0;
pub const DEFAULT_PAD_NOISE_STD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResizeAxis {
    /// Frequency bins (columns of a time-major matrix).
    Vertical,
    /// Frames (rows).
    Horizontal,
}

impl ResizeAxis {
    fn ndarray_axis(self) -> Axis {
        match self {
            ResizeAxis::Vertical => Axis(1),
            ResizeAxis::Horizontal => Axis(0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ResizeAxis::Vertical => "vertical",
            ResizeAxis::Horizontal => "horizontal",
        }
    }
}

impl std::str::FromStr for ResizeAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vertical" => Ok(ResizeAxis::Vertical),
            "horizontal" => Ok(ResizeAxis::Horizontal),
            other => Err(Error::InvalidArgument(format!(
                "axis must be vertical or horizontal, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResizeSpec {
    pub ratio: f64,
    pub axis: ResizeAxis,
    /// Standard deviation of the padding noise, in log-mel units.
    pub pad_noise_std: f64,
    pub seed: u64,
}

impl ResizeSpec {
    pub fn new(ratio: f64, axis: ResizeAxis) -> Self {
        Self {
            ratio,
            axis,
            pad_noise_std: DEFAULT_PAD_NOISE_STD,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_RATIO..=MAX_RATIO).contains(&self.ratio) {
            return Err(Error::InvalidArgument(format!(
                "resize ratio {} outside [{MIN_RATIO}, {MAX_RATIO}]",
                self.ratio
            )));
        }
        if !(self.pad_noise_std.is_finite() && self.pad_noise_std >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "pad noise std must be finite and >= 0, got {}",
                self.pad_noise_std
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRange {
    pub lo: f64,
    pub hi: f64,
}

impl Default for RatioRange {
    fn default() -> Self {
        Self { lo: 0.85, hi: 1.15 }
    }
}

impl RatioRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let range = Self { lo, hi };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_RATIO <= self.lo && self.lo <= self.hi && self.hi <= MAX_RATIO) {
            return Err(Error::InvalidArgument(format!(
                "ratio range [{}, {}] must satisfy {MIN_RATIO} <= lo <= hi <= {MAX_RATIO}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, r: f64) -> bool {
        self.lo <= r && r <= self.hi
    }
}

/// `floor(x + 0.5)`: ties go up, so target sizes are reproducible.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Linear interpolation of every line along `axis` to `new_len` samples,
/// align-corners: output `j` reads input position `j·(L−1)/(L'−1)`. Results
/// never leave the range of their two source samples.
pub fn resize_axis(mat: &Array2<f64>, new_len: usize, axis: ResizeAxis) -> Result<Array2<f64>> {
    if new_len == 0 {
        return Err(Error::InvalidArgument("resize target length must be >= 1".into()));
    }
    if mat.is_empty() {
        return Err(Error::InvalidArgument("cannot resize an empty matrix".into()));
    }
    let ax = axis.ndarray_axis();
    let old_len = mat.len_of(ax);
    if new_len == old_len {
        return Ok(mat.clone());
    }

    // (lower index, upper weight) per output position.
    let taps: Vec<(usize, f64)> = (0..new_len)
        .map(|j| {
            if new_len == 1 || old_len == 1 {
                return (0, 0.0);
            }
            let pos = (j * (old_len - 1)) as f64 / (new_len - 1) as f64;
            let i = (pos.floor() as usize).min(old_len - 1);
            if i == old_len - 1 {
                (i, 0.0)
            } else {
                (i, pos - i as f64)
            }
        })
        .collect();

    let mut shape = [mat.nrows(), mat.ncols()];
    shape[ax.index()] = new_len;
    let mut out = Array2::<f64>::zeros(shape);
    for (src, mut dst) in mat.lanes(ax).into_iter().zip(out.lanes_mut(ax)) {
        for (o, &(i, frac)) in dst.iter_mut().zip(&taps) {
            *o = if frac == 0.0 {
                src[i]
            } else {
                let (a, b) = (src[i], src[i + 1]);
                (a * (1.0 - frac) + b * frac).clamp(a.min(b), a.max(b))
            };
        }
    }
    Ok(out)
}

/// Vertical SR. Output shape always equals input shape; rows `0..H'` are the
/// resized content and only the padded rows (when `H' < H`) consume `rng`,
/// one normal draw per cell in frame-major order.
pub fn vertical_sr<R: Rng + ?Sized>(
    m: &MelSpectrogram,
    spec: &ResizeSpec,
    rng: &mut R,
) -> Result<MelSpectrogram> {
    spec.validate()?;
    if spec.axis != ResizeAxis::Vertical {
        return Err(Error::InvalidArgument(
            "vertical_sr needs a vertical ResizeSpec".into(),
        ));
    }
    if spec.ratio == 1.0 {
        return Ok(m.clone());
    }
    let h = m.n_mels();
    let h_new = round_half_up(h as f64 * spec.ratio).max(1);
    let resized = resize_axis(&m.logmels, h_new, ResizeAxis::Vertical)?;

    let logmels = if h_new >= h {
        resized.slice(s![.., ..h]).to_owned()
    } else {
        let noise =
            Normal::new(0.0, spec.pad_noise_std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let floor = m.config.log_floor_ln();
        let mut out = Array2::<f64>::zeros((m.n_frames(), h));
        out.slice_mut(s![.., ..h_new]).assign(&resized);
        for mut row in out.rows_mut() {
            let top = row[h_new - 1];
            for v in row.iter_mut().skip(h_new) {
                *v = (top + noise.sample(rng)).max(floor);
            }
        }
        out
    };
    MelSpectrogram::new(logmels, m.config)
}

/// Horizontal SR: `T' = round_half_up(T·r)` frames, no pad or cut.
pub fn horizontal_sr(m: &MelSpectrogram, spec: &ResizeSpec) -> Result<MelSpectrogram> {
    spec.validate()?;
    if spec.axis != ResizeAxis::Horizontal {
        return Err(Error::InvalidArgument(
            "horizontal_sr needs a horizontal ResizeSpec".into(),
        ));
    }
    if m.n_frames() < 2 {
        return Err(Error::InputTooShort {
            needed: 2,
            got: m.n_frames(),
        });
    }
    if spec.ratio == 1.0 {
        return Ok(m.clone());
    }
    let t_new = round_half_up(m.n_frames() as f64 * spec.ratio).max(1);
    MelSpectrogram::new(resize_axis(&m.logmels, t_new, ResizeAxis::Horizontal)?, m.config)
}

/// Applies `spec` along its axis, seeding the padding noise from `spec.seed`.
pub fn apply_resize(m: &MelSpectrogram, spec: &ResizeSpec) -> Result<MelSpectrogram> {
    match spec.axis {
        ResizeAxis::Vertical => vertical_sr(m, spec, &mut ChaCha8Rng::seed_from_u64(spec.seed)),
        ResizeAxis::Horizontal => horizontal_sr(m, spec),
    }
}

/// Uniform draw from `[lo, hi]`.
pub fn sample_ratio<R: Rng + ?Sized>(range: &RatioRange, rng: &mut R) -> Result<f64> {
    range.validate()?;
    if range.lo == range.hi {
        return Ok(range.lo);
    }
    Ok(rng.random_range(range.lo..=range.hi))
}

use ndarray::Array2;

use super::stft::stft;
use super::{hz_to_mel, mel_to_hz, LinearSpectrogram, MelSpectrogram, SpectralConfig};
use crate::audio_io::Waveform;
use crate::error::{Error, Result};

/// Multiplicative-update iterations used by [`mel_to_linear`].
pub const MEL_INVERSION_ITERS: usize = 50;

/// Triangular mel filters, `[n_mels x (n_fft/2 + 1)]`, area-normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    weights: Array2<f64>,
    // Non-zero span of each row: (first bin, weights).
    spans: Vec<(usize, Vec<f64>)>,
    centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn n_mels(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_bins(&self) -> usize {
        self.weights.ncols()
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    /// `W · x` for one linear-magnitude frame.
    pub fn apply(&self, linear: &[f64], out: &mut [f64]) {
        for ((start, w), o) in self.spans.iter().zip(out.iter_mut()) {
            *o = w.iter().zip(linear.iter().skip(*start)).map(|(a, b)| a * b).sum();
        }
    }

    /// `Wᵀ · y` for one mel frame.
    fn apply_transpose(&self, mel: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for ((start, w), &y) in self.spans.iter().zip(mel) {
            for (o, a) in out[*start..].iter_mut().zip(w) {
                *o += a * y;
            }
        }
    }
}

/// Triangles with centres equally spaced on the HTK mel scale between `fmin`
/// and `fmax`, each scaled by `2 / (upper_edge - lower_edge)` (Slaney
/// area normalisation).
pub fn mel_filterbank(cfg: &SpectralConfig) -> Result<MelFilterbank> {
    cfg.validate()?;
    let n_bins = cfg.n_bins();
    let (mel_lo, mel_hi) = (hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax));
    let edges: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();
    let bin_hz = |k: usize| k as f64 * cfg.sample_rate as f64 / cfg.n_fft as f64;

    let mut weights = Array2::<f64>::zeros((cfg.n_mels, n_bins));
    for m in 0..cfg.n_mels {
        let (lo, centre, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        let enorm = 2.0 / (hi - lo);
        for k in 0..n_bins {
            let f = bin_hz(k);
            let rising = (f - lo) / (centre - lo);
            let falling = (hi - f) / (hi - centre);
            weights[[m, k]] = rising.min(falling).max(0.0) * enorm;
        }
        // Filters narrower than one FFT bin would otherwise be empty.
        if weights.row(m).iter().all(|&v| v == 0.0) {
            let nearest =
                ((centre * cfg.n_fft as f64 / cfg.sample_rate as f64).round() as usize).min(n_bins - 1);
            weights[[m, nearest]] = enorm;
        }
    }

    let spans = weights
        .rows()
        .into_iter()
        .map(|row| {
            let first = row.iter().position(|&v| v > 0.0).unwrap_or(0);
            let last = row.iter().rposition(|&v| v > 0.0).unwrap_or(0);
            (
                first,
                row.iter().skip(first).take(last + 1 - first).copied().collect(),
            )
        })
        .collect();

    Ok(MelFilterbank {
        weights,
        spans,
        centers_hz: edges[1..=cfg.n_mels].to_vec(),
    })
}

/// `ln(max(W · |STFT|, log_floor))` on magnitude (not power) spectra.
pub fn mel_spectrogram(w: &Waveform, cfg: &SpectralConfig) -> Result<MelSpectrogram> {
    let mags = stft(w, cfg)?.magnitude().mags;
    let fb = mel_filterbank(cfg)?;
    let floor = cfg.log_floor;
    let mut logmels = Array2::<f64>::zeros((mags.nrows(), cfg.n_mels));
    for (lin, mut mel) in mags.rows().into_iter().zip(logmels.rows_mut()) {
        let out = mel.as_slice_mut().expect("fresh arrays are contiguous");
        fb.apply(lin.as_slice().expect("fresh arrays are contiguous"), out);
        out.iter_mut().for_each(|v| *v = v.max(floor).ln());
    }
    Ok(MelSpectrogram {
        logmels,
        config: *cfg,
    })
}

/// Approximate non-negative inverse of the mel projection.
///
/// Per frame, fits `W·x ≈ b = exp(logmel)` over `x ≥ 0` with
/// [`MEL_INVERSION_ITERS`] multiplicative updates started from `Wᵀ·b`. Each
/// mel row's squared residual is weighted by `1 / max(b, floor)`, so quiet
/// bands are fitted in relative rather than absolute terms; where an exact
/// non-negative solution exists it is also the unweighted least-squares
/// minimiser. Mel entries sitting at the log floor carry no magnitude
/// information and are solved for as zero energy.
pub fn mel_to_linear(m: &MelSpectrogram, fb: &MelFilterbank) -> Result<LinearSpectrogram> {
    if m.n_mels() != fb.n_mels() {
        return Err(Error::DimensionMismatch(format!(
            "mel spectrogram has {} bins, filterbank has {} rows",
            m.n_mels(),
            fb.n_mels()
        )));
    }
    let n_bins = fb.n_bins();
    if n_bins != m.config.n_bins() {
        return Err(Error::DimensionMismatch(format!(
            "filterbank has {n_bins} columns, config expects {}",
            m.config.n_bins()
        )));
    }
    let floor = m.config.log_floor_ln();
    let mut mags = Array2::<f64>::zeros((m.n_frames(), n_bins));
    let mut target = vec![0.0; fb.n_mels()];
    let mut weight = vec![0.0; fb.n_mels()];
    let mut weighted = vec![0.0; fb.n_mels()];
    let mut numer = vec![0.0; n_bins];
    let mut x = vec![0.0; n_bins];
    let mut wx = vec![0.0; fb.n_mels()];
    let mut denom = vec![0.0; n_bins];

    for (logmel, mut out) in m.logmels.rows().into_iter().zip(mags.rows_mut()) {
        for ((t, w), &v) in target.iter_mut().zip(weight.iter_mut()).zip(logmel.iter()) {
            *t = if v > floor + 1e-6 { v.exp() } else { 0.0 };
            *w = 1.0 / t.max(m.config.log_floor);
        }
        fb.apply_transpose(&target, &mut x);
        for ((o, &t), &w) in weighted.iter_mut().zip(&target).zip(&weight) {
            *o = t * w;
        }
        fb.apply_transpose(&weighted, &mut numer);
        for _ in 0..MEL_INVERSION_ITERS {
            fb.apply(&x, &mut wx);
            wx.iter_mut().zip(&weight).for_each(|(v, &w)| *v *= w);
            fb.apply_transpose(&wx, &mut denom);
            for ((xi, &n), &d) in x.iter_mut().zip(&numer).zip(&denom) {
                *xi = if d > 0.0 { *xi * n / d } else { 0.0 };
            }
        }
        for (o, &xi) in out.iter_mut().zip(&x) {
            *o = xi;
        }
    }
    LinearSpectrogram::new(mags, m.config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_filterbank_shape_and_ordering() {
        let fb = mel_filterbank(&SpectralConfig::default()).unwrap();
        assert_eq!(fb.weights().dim(), (80, 641));
        let c = fb.centers_hz();
        assert!(c[0] > 0.0 && c[0] < c[1]);
        assert!(c.windows(2).all(|p| p[0] < p[1]));
        for row in fb.weights().rows() {
            assert!(row.iter().any(|&v| v > 0.0));
        }
    }

    #[test]
    fn filters_tile_between_first_and_last_centres() {
        let cfg = SpectralConfig::default();
        let fb = mel_filterbank(&cfg).unwrap();
        let c = fb.centers_hz();
        for k in 0..cfg.n_bins() {
            let f = k as f64 * 16000.0 / 1280.0;
            if f >= c[0] && f <= c[79] {
                let total: f64 = fb.weights().column(k).sum();
                assert!(total > 0.0, "bin {k} ({f} Hz) uncovered");
            }
        }
    }

    #[test]
    fn each_filter_has_unit_area_in_hz() {
        let cfg = SpectralConfig::default();
        let fb = mel_filterbank(&cfg).unwrap();
        let bin_hz = 16000.0 / 1280.0;
        // Riemann sum of a triangle with height 2/(hi-lo) and base hi-lo.
        for m in 20..80 {
            let area: f64 = fb.weights().row(m).sum() * bin_hz;
            assert!((area - 1.0).abs() < 0.02, "filter {m}: area {area}");
        }
    }

    #[test]
    fn silence_maps_to_floor() {
        let cfg = SpectralConfig::default();
        let w = Waveform::new(vec![0.0; 16000], 16000).unwrap();
        let m = mel_spectrogram(&w, &cfg).unwrap();
        assert_eq!(m.logmels.dim(), (51, 80));
        assert!(m.logmels.iter().all(|&v| v == 1e-5f64.ln()));
        assert!((1e-5f64.ln() + 11.5129).abs() < 1e-4);
    }

    #[test]
    fn silence_inverts_to_near_zero() {
        let cfg = SpectralConfig::default();
        let fb = mel_filterbank(&cfg).unwrap();
        let m = MelSpectrogram::new(Array2::from_elem((5, 80), cfg.log_floor_ln()), cfg).unwrap();
        let lin = mel_to_linear(&m, &fb).unwrap();
        assert!(lin.mags.iter().all(|&v| v <= 1e-4));
    }

    #[test]
    fn single_band_stays_inside_its_support() {
        let cfg = SpectralConfig::default();
        let fb = mel_filterbank(&cfg).unwrap();
        let mut logmels = Array2::from_elem((1, 80), cfg.log_floor_ln());
        logmels[[0, 30]] = 0.0;
        let m = MelSpectrogram::new(logmels, cfg).unwrap();
        let lin = mel_to_linear(&m, &fb).unwrap();
        let support = fb.weights().row(30);
        let inside: f64 = lin
            .mags
            .row(0)
            .iter()
            .zip(support)
            .filter(|(_, &w)| w > 0.0)
            .map(|(x, _)| x)
            .sum();
        let total: f64 = lin.mags.row(0).sum();
        assert!(total > 0.0);
        assert!(inside / total > 0.999);
    }

    #[test]
    fn rejects_mismatched_filterbank() {
        let cfg = SpectralConfig::default();
        let small = SpectralConfig { n_mels: 40, ..cfg };
        let fb = mel_filterbank(&small).unwrap();
        let m = MelSpectrogram::new(Array2::zeros((2, 80)), cfg).unwrap();
        assert!(matches!(mel_to_linear(&m, &fb), Err(Error::DimensionMismatch(_))));
    }
}

//! Training objectives for a conditional-VAE voice-conversion model with
//! adversarial vocoder training. Pure functions; no autodiff.
//!
//! Every term uses a mean reduction internally so values do not depend on
//! batch or sequence size.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::MelSpectrogram;

/// Diagonal Gaussian parameterised by mean and log standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagGaussian {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl DiagGaussian {
    pub fn new(mean: Vec<f64>, log_std: Vec<f64>) -> Result<Self> {
        let g = Self { mean, log_std };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.len() != self.log_std.len() {
            return Err(Error::DimensionMismatch(format!(
                "mean has {} entries, log_std has {}",
                self.mean.len(),
                self.log_std.len()
            )));
        }
        if self.mean.iter().chain(&self.log_std).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Gaussian parameters".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// `KL(q ‖ p)` between diagonal Gaussians, summed over dimensions.
///
/// `p` must already be the prior as seen after any volume-preserving flow:
/// such a flow has unit Jacobian, so no log-determinant term is added.
/// Passing pre-flow prior parameters gives a wrong answer without error.
pub fn kl_diag_gaussian(q: &DiagGaussian, p: &DiagGaussian) -> Result<f64> {
    q.validate()?;
    p.validate()?;
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch(format!(
            "KL between {}-dim and {}-dim Gaussians",
            q.dim(),
            p.dim()
        )));
    }
    let mut total = 0.0;
    for i in 0..q.dim() {
        // ln σp − ln σq + σq²/(2σp²) − ½  ==  ½(e^{2d} − 1 − 2d),  d = ln σq − ln σp
        let d = q.log_std[i] - p.log_std[i];
        let spread = (0.5 * ((2.0 * d).exp_m1() - 2.0 * d)).max(0.0);
        let shift = (q.mean[i] - p.mean[i]) / p.log_std[i].exp();
        total += spread + 0.5 * shift * shift;
    }
    Ok(total)
}

/// Mean absolute difference between two log-mel spectrograms.
pub fn recon_l1(target: &MelSpectrogram, pred: &MelSpectrogram) -> Result<f64> {
    mean_abs_diff(&target.logmels, &pred.logmels)
}

fn mean_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "shapes {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.len() as f64)
}

/// Discriminator outputs, one matrix per sub-discriminator.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub scores: Vec<Array2<f64>>,
}

impl ScoreSet {
    pub fn new(scores: Vec<Array2<f64>>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidArgument(
                "score set needs at least one scale".into(),
            ));
        }
        if scores.iter().any(|s| s.is_empty()) {
            return Err(Error::InvalidArgument("empty score matrix".into()));
        }
        if scores.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("discriminator scores".into()));
        }
        Ok(Self { scores })
    }
}

/// Discriminator intermediate activations, flattened over sub-discriminators.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub layers: Vec<Array2<f64>>,
}

impl FeatureSet {
    pub fn new(layers: Vec<Array2<f64>>) -> Result<Self> {
        if layers.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("discriminator features".into()));
        }
        Ok(Self { layers })
    }
}

fn mean_sq_offset(m: &Array2<f64>, target: f64) -> f64 {
    m.iter().map(|v| (v - target).powi(2)).sum::<f64>() / m.len() as f64
}

/// Least-squares GAN losses `(L_D, L_G)`.
///
/// `L_D = Σ_s mean((real_s − 1)²) + mean(fake_s²)`,
/// `L_G = Σ_s mean((fake_s − 1)²)`.
pub fn lsgan_losses(real: &ScoreSet, fake: &ScoreSet) -> Result<(f64, f64)> {
    if real.scores.len() != fake.scores.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} real scales vs {} fake scales",
            real.scores.len(),
            fake.scores.len()
        )));
    }
    let mut d = 0.0;
    let mut g = 0.0;
    for (r, f) in real.scores.iter().zip(&fake.scores) {
        d += mean_sq_offset(r, 1.0) + mean_sq_offset(f, 0.0);
        g += mean_sq_offset(f, 1.0);
    }
    Ok((d, g))
}

/// Weight applied inside [`feature_matching`].
pub const FEATURE_MATCHING_SCALE: f64 = 2.0;

/// `2 · (1/L) Σ_l mean|real_l − fake_l|`; zero for an empty set.
pub fn feature_matching(real: &FeatureSet, fake: &FeatureSet) -> Result<f64> {
    if real.layers.len() != fake.layers.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} real layers vs {} fake layers",
            real.layers.len(),
            fake.layers.len()
        )));
    }
    if real.layers.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (r, f) in real.layers.iter().zip(&fake.layers) {
        total += mean_abs_diff(r, f)?;
    }
    Ok(FEATURE_MATCHING_SCALE * total / real.layers.len() as f64)
}

/// Per-term weights for [`generator_total`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub rec: f64,
    pub kl: f64,
    pub adv: f64,
    pub fm: f64,
}

impl Default for LossWeights {
    /// Plain sum of the four terms.
    fn default() -> Self {
        Self {
            rec: 1.0,
            kl: 1.0,
            adv: 1.0,
            fm: 1.0,
        }
    }
}

impl LossWeights {
    /// Reconstruction weighted by 45, as in common HiFi-GAN-style recipes.
    /// The factor 2 on feature matching is already inside
    /// [`feature_matching`], so `fm` stays 1.
    pub fn conventional() -> Self {
        Self {
            rec: 45.0,
            ..Self::default()
        }
    }
}

pub fn generator_total(l_rec: f64, l_kl: f64, l_adv_g: f64, l_fm: f64, weights: &LossWeights) -> Result<f64> {
    let terms = [
        l_rec,
        l_kl,
        l_adv_g,
        l_fm,
        weights.rec,
        weights.kl,
        weights.adv,
        weights.fm,
    ];
    if terms.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("generator loss term".into()));
    }
    Ok(weights.rec * l_rec + weights.kl * l_kl + weights.adv * l_adv_g + weights.fm * l_fm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralConfig;
    use ndarray::array;

    fn g(mean: &[f64], log_std: &[f64]) -> DiagGaussian {
        DiagGaussian::new(mean.to_vec(), log_std.to_vec()).unwrap()
    }

    #[test]
    fn kl_closed_forms() {
        let std = g(&[0.0], &[0.0]);
        assert_eq!(kl_diag_gaussian(&std, &std).unwrap(), 0.0);
        assert!((kl_diag_gaussian(&std, &g(&[1.0], &[0.0])).unwrap() - 0.5).abs() < 1e-12);
        let wide = g(&[0.0], &[2f64.ln()]);
        let expected = 2f64.ln() + 0.125 - 0.5;
        assert!((kl_diag_gaussian(&std, &wide).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.318147).abs() < 1e-6);
    }

    #[test]
    fn kl_dimension_mismatch() {
        assert!(matches!(
            kl_diag_gaussian(&g(&[0.0], &[0.0]), &g(&[0.0, 1.0], &[0.0, 0.0])),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(DiagGaussian::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn recon_examples() {
        let cfg = SpectralConfig {
            n_mels: 2,
            ..Default::default()
        };
        let mel = |a: Array2<f64>| MelSpectrogram::new(a, cfg).unwrap();
        let t = mel(array![[0.0, 1.0], [2.0, 3.0]]);
        assert_eq!(recon_l1(&t, &t).unwrap(), 0.0);
        assert_eq!(recon_l1(&t, &mel(array![[1.0, 1.0], [2.0, 2.0]])).unwrap(), 0.5);
        assert_eq!(recon_l1(&t, &mel(&t.logmels + 0.5)).unwrap(), 0.5);
    }

    #[test]
    fn lsgan_examples() {
        let ones = ScoreSet::new(vec![Array2::ones((2, 3)), Array2::ones((1, 4))]).unwrap();
        let zeros = ScoreSet::new(vec![Array2::zeros((2, 3)), Array2::zeros((1, 4))]).unwrap();
        assert_eq!(lsgan_losses(&ones, &zeros).unwrap(), (0.0, 2.0));
        assert_eq!(lsgan_losses(&ones, &ones).unwrap(), (2.0, 0.0));
        let real = ScoreSet::new(vec![array![[1.0, 0.5]]]).unwrap();
        let fake = ScoreSet::new(vec![array![[0.5]]]).unwrap();
        assert_eq!(lsgan_losses(&real, &fake).unwrap(), (0.375, 0.25));
        let single = ScoreSet::new(vec![array![[0.5]]]).unwrap();
        assert!(lsgan_losses(&ones, &single).is_err());
        assert!(ScoreSet::new(vec![]).is_err());
    }

    #[test]
    fn feature_matching_examples() {
        let a = FeatureSet::new(vec![Array2::zeros((2, 2))]).unwrap();
        let b = FeatureSet::new(vec![Array2::ones((2, 2))]).unwrap();
        assert_eq!(feature_matching(&a, &a).unwrap(), 0.0);
        assert_eq!(feature_matching(&a, &b).unwrap(), 2.0);
        let two_a = FeatureSet::new(vec![Array2::zeros((1, 3)), Array2::zeros((2, 1))]).unwrap();
        let two_b = FeatureSet::new(vec![Array2::ones((1, 3)), Array2::zeros((2, 1))]).unwrap();
        assert_eq!(feature_matching(&two_a, &two_b).unwrap(), 1.0);
        let bad = FeatureSet::new(vec![Array2::zeros((3, 3))]).unwrap();
        assert!(matches!(
            feature_matching(&a, &bad),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn generator_total_examples() {
        let unit = LossWeights::default();
        assert_eq!(generator_total(0.0, 0.0, 0.0, 0.0, &unit).unwrap(), 0.0);
        assert_eq!(generator_total(1.0, 2.0, 3.0, 4.0, &unit).unwrap(), 10.0);
        let conv = LossWeights::conventional();
        assert_eq!(generator_total(1.0, 0.0, 0.0, 0.0, &conv).unwrap(), 45.0);
        assert!(matches!(
            generator_total(f64::NAN, 0.0, 0.0, 0.0, &unit),
            Err(Error::NonFinite(_))
        ));
    }
}

use ndarray::Array2;
use proptest::prelude::*;
use sraug::spectral::{MelSpectrogram, SpectralConfig};
use sraug::vc_losses::*;

fn gaussian(dim: usize) -> impl Strategy<Value = DiagGaussian> {
    (
        prop::collection::vec(-5.0f64..5.0, dim),
        prop::collection::vec(-3.0f64..3.0, dim),
    )
        .prop_map(|(mean, log_std)| DiagGaussian::new(mean, log_std).unwrap())
}

fn pair() -> impl Strategy<Value = (DiagGaussian, DiagGaussian)> {
    (1usize..16).prop_flat_map(|d| (gaussian(d), gaussian(d)))
}

/// Textbook per-dimension form, evaluated directly.
fn kl_reference(q: &DiagGaussian, p: &DiagGaussian) -> f64 {
    (0..q.dim())
        .map(|i| {
            let (sq, sp) = (q.log_std[i].exp(), p.log_std[i].exp());
            p.log_std[i] - q.log_std[i] + (sq * sq + (q.mean[i] - p.mean[i]).powi(2)) / (2.0 * sp * sp) - 0.5
        })
        .sum()
}

fn mel(values: Vec<f64>) -> MelSpectrogram {
    let cfg = SpectralConfig {
        n_mels: 4,
        ..Default::default()
    };
    MelSpectrogram::new(
        Array2::from_shape_vec((values.len() / 4, 4), values).unwrap(),
        cfg,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn kl_is_nonnegative_and_matches_textbook_form((q, p) in pair()) {
        let kl = kl_diag_gaussian(&q, &p).unwrap();
        prop_assert!(kl >= 0.0);
        let reference = kl_reference(&q, &p);
        prop_assert!((kl - reference).abs() <= 1e-9 * (1.0 + reference.abs()), "{} vs {}", kl, reference);
    }

    #[test]
    fn kl_vanishes_only_for_identical_distributions((q, p) in pair()) {
        prop_assert_eq!(kl_diag_gaussian(&q, &q).unwrap(), 0.0);
        let distinct = q
            .mean
            .iter()
            .zip(&p.mean)
            .chain(q.log_std.iter().zip(&p.log_std))
            .any(|(a, b)| (a - b).abs() > 1e-6);
        if distinct {
            prop_assert!(kl_diag_gaussian(&q, &p).unwrap() > 1e-12);
        }
    }

    #[test]
    fn kl_adds_over_independent_blocks((q1, p1) in pair(), (q2, p2) in pair()) {
        let cat = |a: &DiagGaussian, b: &DiagGaussian| DiagGaussian::new(
            [a.mean.clone(), b.mean.clone()].concat(),
            [a.log_std.clone(), b.log_std.clone()].concat(),
        ).unwrap();
        let whole = kl_diag_gaussian(&cat(&q1, &q2), &cat(&p1, &p2)).unwrap();
        let parts = kl_diag_gaussian(&q1, &p1).unwrap() + kl_diag_gaussian(&q2, &p2).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9 * (1.0 + whole.abs()));
    }

    #[test]
    fn recon_l1_is_a_metric(n in 1usize..6, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || mel((0..4 * n).map(|_| rng.random_range(-11.0..4.0)).collect());
        let (a, b, c) = (draw(), draw(), draw());
        let d = |x: &MelSpectrogram, y: &MelSpectrogram| recon_l1(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-9);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn unit_weights_give_the_plain_sum(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3) {
        prop_assert_eq!(generator_total(a, b, c, d, &LossWeights::default()).unwrap(), a + b + c + d);
    }
}

#[test]
fn lsgan_optima_by_grid_search() {
    let grid: Vec<f64> = (-20..=30).map(|i| i as f64 * 0.1).collect();
    let constant =
        |v: f64| ScoreSet::new(vec![Array2::from_elem((2, 3), v), Array2::from_elem((1, 5), v)]).unwrap();
    let mut best_d = (f64::INFINITY, 0.0, 0.0);
    let mut best_g = (f64::INFINITY, 0.0);
    for &r in &grid {
        for &f in &grid {
            let (d, g) = lsgan_losses(&constant(r), &constant(f)).unwrap();
            if d < best_d.0 {
                best_d = (d, r, f);
            }
            if g < best_g.0 {
                best_g = (g, f);
            }
        }
    }
    assert!(
        (best_d.1 - 1.0).abs() < 1e-9 && best_d.2.abs() < 1e-9,
        "{best_d:?}"
    );
    assert!((best_g.1 - 1.0).abs() < 1e-9, "{best_g:?}");
}

#[test]
fn kl_reference_values() {
    let g = |m: f64, s: f64| DiagGaussian::new(vec![m], vec![s]).unwrap();
    assert_eq!(kl_diag_gaussian(&g(0.0, 0.0), &g(0.0, 0.0)).unwrap(), 0.0);
    assert!((kl_diag_gaussian(&g(0.0, 0.0), &g(1.0, 0.0)).unwrap() - 0.5).abs() <= 1e-6);
    assert!((kl_diag_gaussian(&g(0.0, 0.0), &g(0.0, 2f64.ln())).unwrap() - 0.318147).abs() <= 1e-6);
}

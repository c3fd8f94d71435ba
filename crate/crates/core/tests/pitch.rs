mod common;

use proptest::prelude::*;
use sraug::pitch_eval::*;
use sraug::synth;
use sraug::Error;

fn cfg() -> PitchConfig {
    PitchConfig::default()
}

#[test]
fn white_noise_is_mostly_unvoiced() {
    let w = synth::white_noise(0.5, 2.0, 16000, 11);
    let track = yin_f0(&w, &cfg()).unwrap();
    assert!(
        1.0 - track.voiced_fraction() >= 0.9,
        "voiced {}",
        track.voiced_fraction()
    );
}

#[test]
fn pure_tones_have_no_octave_errors() {
    for f in [100.0, 137.0, 180.0, 220.0, 263.0, 310.0, 400.0] {
        let track = yin_f0(&synth::sine(f, 0.4, 1.0, 16000), &cfg()).unwrap();
        assert!(track.voiced_fraction() > 0.9);
        for v in track.voiced() {
            assert!((0.9 * f..=1.1 * f).contains(&v), "{f} Hz tone reported {v}");
        }
    }
}

#[test]
fn voiced_values_respect_search_range() {
    for w in common::mini_corpus().iter().take(3) {
        let c = cfg();
        for v in yin_f0(w, &c).unwrap().f0 {
            assert!(v == 0.0 || (c.f0_min..=c.f0_max).contains(&v));
        }
    }
}

#[test]
fn frame_count_formula() {
    for n in [1280usize, 1599, 1600, 16000, 16001] {
        let w = sraug::audio_io::Waveform::new(vec![0.0; n], 16000).unwrap();
        assert_eq!(yin_f0(&w, &cfg()).unwrap().f0.len(), (n - 1280) / 320 + 1);
    }
}

#[test]
fn self_correlation_is_one() {
    for w in common::mini_corpus().iter().take(4) {
        let r = f0_pcc(w, w, &cfg()).unwrap();
        assert!((r - 1.0).abs() <= 1e-6, "{r}");
    }
}

#[test]
fn scaled_glide_correlates() {
    let a = synth::glide(150.0, 300.0, 0.4, 2.0, 16000);
    let b = synth::glide(180.0, 360.0, 0.4, 2.0, 16000);
    let r = f0_pcc(&a, &b, &cfg()).unwrap();
    assert!(r > 0.99, "{r}");
}

#[test]
fn constant_pitch_tones_are_degenerate() {
    // Periods of 80 and 64 samples divide the hop, so every frame sees the
    // same waveform and the tracks are exactly constant.
    let a = synth::sine(200.0, 0.4, 1.0, 16000);
    let b = synth::sine(250.0, 0.4, 1.0, 16000);
    assert!(matches!(
        f0_pcc(&a, &b, &cfg()),
        Err(Error::DegenerateVariance(_))
    ));
}

#[test]
fn too_little_overlap_is_reported() {
    let a = synth::glide(150.0, 300.0, 0.4, 1.0, 16000);
    let silence = sraug::audio_io::Waveform::new(vec![0.0; 16000], 16000).unwrap();
    assert!(matches!(
        f0_pcc(&a, &silence, &cfg()),
        Err(Error::InsufficientVoicedOverlap { found: 0, needed: 10 })
    ));
}

#[test]
fn other_rates_are_resampled_before_comparison() {
    let a = synth::glide(150.0, 300.0, 0.4, 2.0, 16000);
    let b = synth::glide(150.0, 300.0, 0.4, 2.0, 22050);
    assert!(f0_pcc(&a, &b, &cfg()).unwrap() > 0.99);
}

#[test]
fn pearson_hand_example() {
    // Σdxdy = 3, Σdx² = 2, Σdy² = 42/9  →  3 / sqrt(84/9)
    let expected = 3.0 / (84.0f64 / 9.0).sqrt();
    let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
    assert!((r - expected).abs() < 1e-12);
    assert!((r - 0.9820).abs() <= 1e-4);
}

#[test]
fn csv_export_has_one_row_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let track = yin_f0(&synth::sine(220.0, 0.4, 0.5, 16000), &cfg()).unwrap();
    let p = dir.path().join("f0.csv");
    track.write_csv(&p).unwrap();
    let text = std::fs::read_to_string(p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "frame,time_sec,f0_hz");
    assert_eq!(lines.len(), track.f0.len() + 1);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').nth(2).unwrap().split('.').nth(1).unwrap().len() == 6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pearson_of_affine_image(x in prop::collection::vec(-100.0f64..100.0, 3..40), a in 0.1f64..10.0, b in -50.0f64..50.0, neg in any::<bool>()) {
        prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-3));
        let a = if neg { -a } else { a };
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let r = pearson(&x, &y).unwrap();
        prop_assert!((r - a.signum()).abs() < 1e-9, "{}", r);
    }

    #[test]
    fn pearson_is_symmetric(x in prop::collection::vec(-10.0f64..10.0, 2..30), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|_| rng.random_range(-10.0..10.0)).collect();
        match (pearson(&x, &y), pearson(&y, &x)) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.to_bits(), b.to_bits());
                prop_assert!((-1.0..=1.0).contains(&a));
            }
            (Err(_), Err(_)) => {}
            other => prop_assert!(false, "asymmetric outcome {:?}", other),
        }
    }
}

#[test]
fn amplitude_does_not_change_f0_pcc() {
    let corpus = common::mini_corpus();
    let (a, b) = (&corpus[2], &corpus[5]);
    let b = sraug::audio_io::Waveform::new(b.samples()[..a.len().min(b.len())].to_vec(), 16000).unwrap();
    let base = f0_pcc(a, &b, &cfg()).unwrap();
    for g in [0.1, 0.35, 1.0] {
        let r = f0_pcc(&a.scaled(g).unwrap(), &b, &cfg()).unwrap();
        assert!((r - base).abs() < 1e-6, "gain {g}: {r} vs {base}");
        let r = f0_pcc(a, &b.scaled(g).unwrap(), &cfg()).unwrap();
        assert!((r - base).abs() < 1e-6, "gain {g}: {r} vs {base}");
    }
}

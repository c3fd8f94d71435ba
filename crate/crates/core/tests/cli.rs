mod common;

use std::fs;
use std::process::{Command, Output};

use sraug::audio_io::{read_wav, write_wav};
use sraug::pipeline::AugmentManifest;
use sraug::spectral::{read_melf, SpectralConfig};
use sraug::synth;

fn sraug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sraug"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &std::path::Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn single_file_tools_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_wav(d.join("a.wav"), &synth::vowel(180.0, 0, 1.0, 0.5, 16000)).unwrap();

    ok(&sraug(&["mel", p(&d.join("a.wav")), p(&d.join("a.melf"))]));
    let m = read_melf(d.join("a.melf"), &SpectralConfig::default()).unwrap();
    assert_eq!(m.logmels.dim(), (51, 80));

    ok(&sraug(&[
        "resize",
        p(&d.join("a.melf")),
        p(&d.join("b.melf")),
        "--ratio",
        "0.9",
        "--seed",
        "3",
    ]));
    let b = read_melf(d.join("b.melf"), &SpectralConfig::default()).unwrap();
    assert_eq!(b.logmels.dim(), (51, 80));
    ok(&sraug(&[
        "resize",
        p(&d.join("a.melf")),
        p(&d.join("b2.melf")),
        "--ratio",
        "0.9",
        "--seed",
        "3",
    ]));
    assert_eq!(
        fs::read(d.join("b.melf")).unwrap(),
        fs::read(d.join("b2.melf")).unwrap()
    );

    ok(&sraug(&[
        "reconstruct",
        p(&d.join("b.melf")),
        p(&d.join("b.wav")),
        "--gl-iters",
        "20",
    ]));
    assert_eq!(read_wav(d.join("b.wav")).unwrap().len(), 50 * 320);

    ok(&sraug(&["f0", p(&d.join("a.wav")), p(&d.join("a.csv"))]));
    let csv = fs::read_to_string(d.join("a.csv")).unwrap();
    assert!(csv.starts_with("frame,time_sec,f0_hz\n0,0.040000,"));
    assert_eq!(csv.lines().count(), 1 + (16000 - 1280) / 320 + 1);
}

#[test]
fn f0pcc_prints_one_number() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_wav(d.join("a.wav"), &synth::glide(150.0, 300.0, 0.4, 2.0, 16000)).unwrap();
    write_wav(d.join("b.wav"), &synth::glide(180.0, 360.0, 0.4, 2.0, 16000)).unwrap();
    let text = ok(&sraug(&["f0pcc", p(&d.join("a.wav")), p(&d.join("b.wav"))]));
    assert_eq!(text.lines().count(), 1);
    let r: f64 = text.trim().parse().unwrap();
    assert!(r > 0.99);
}

#[test]
fn kl_reads_json_gaussians() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("q.json"), r#"{"mean": [0.0], "log_std": [0.0]}"#).unwrap();
    fs::write(
        d.join("p.json"),
        format!(r#"{{"mean": [0.0], "log_std": [{}]}}"#, 2f64.ln()),
    )
    .unwrap();
    let kl: f64 = ok(&sraug(&["kl", p(&d.join("q.json")), p(&d.join("p.json"))]))
        .trim()
        .parse()
        .unwrap();
    assert!((kl - 0.318147).abs() < 1e-6);
    fs::write(d.join("bad.json"), r#"{"mean": [0.0, 1.0], "log_std": [0.0]}"#).unwrap();
    assert!(!sraug(&["kl", p(&d.join("q.json")), p(&d.join("bad.json"))])
        .status
        .success());
}

#[test]
fn augment_with_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_corpus(&d.join("corpus"), &common::mini_corpus()[..2]);
    fs::write(
        d.join("aug.toml"),
        "in = \"corpus\"\nout = \"from_file\"\nvariants = 2\nratio_min = 0.9\nratio-max = 0.95\nseed = 5\ngl-iters = 10\n",
    )
    .unwrap();
    ok(&sraug(&["augment", "--config", p(&d.join("aug.toml"))]));
    let m = AugmentManifest::parse_jsonl(&fs::read_to_string(d.join("from_file/manifest.jsonl")).unwrap())
        .unwrap();
    assert_eq!(m.len(), 4);
    assert!(m.records.iter().all(|r| (0.9..=0.95).contains(&r.ratio)));

    ok(&sraug(&[
        "augment",
        "--config",
        p(&d.join("aug.toml")),
        "--out",
        p(&d.join("flags")),
        "--variants",
        "1",
        "--ratio-min",
        "1.1",
        "--ratio-max",
        "1.1",
    ]));
    let m =
        AugmentManifest::parse_jsonl(&fs::read_to_string(d.join("flags/manifest.jsonl")).unwrap()).unwrap();
    assert_eq!(m.len(), 2);
    assert!(m.records.iter().all(|r| r.ratio == 1.1));
}

#[test]
fn augment_exit_status_reflects_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_corpus(&d.join("corpus"), &common::mini_corpus()[..1]);
    fs::write(d.join("corpus/zz_bad.wav"), b"not a wav at all").unwrap();
    let out = sraug(&[
        "augment",
        "--in",
        p(&d.join("corpus")),
        "--out",
        p(&d.join("out")),
        "--gl-iters",
        "5",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz_bad.wav"));
    let m = AugmentManifest::parse_jsonl(&fs::read_to_string(d.join("out/manifest.jsonl")).unwrap()).unwrap();
    assert_eq!(m.len(), 1);

    let empty = d.join("empty");
    fs::create_dir(&empty).unwrap();
    assert!(!sraug(&["augment", "--in", p(&empty), "--out", p(&d.join("o2"))])
        .status
        .success());
}

#[test]
fn bad_arguments_are_rejected() {
    assert!(
        !sraug(&["augment", "--in", "x", "--out", "y", "--axis", "diagonal"])
            .status
            .success()
    );
    assert!(!sraug(&["resize", "a.melf", "b.melf"]).status.success());
    assert!(!sraug(&["augment", "--out", "y"]).status.success());
}

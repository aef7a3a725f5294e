use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_instrument-eval"))
        .args(args)
        .env_remove("INSTRUMENT_EVAL_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn synth(dir: &Path, mode: &str, extra: &[&str]) -> String {
    let path = dir.join(mode).to_str().unwrap().to_owned();
    let mut args = vec!["synth", "--mode", mode, "--out", &path, "--seed", "7"];
    args.extend_from_slice(extra);
    if !extra.contains(&"--duration") {
        args.extend_from_slice(&["--duration", "0.5"]);
    }
    let out = cli(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn consistent_scores_below_inconsistent() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--pitches", "60:69", "--velocities", "100,127"];
    let cons = synth(dir.path(), "consistent", &grid);
    let inc = synth(dir.path(), "inconsistent", &grid);
    let a = json(&cli(&["tc", &cons]));
    let b = json(&cli(&["tc", &inc]));
    assert_eq!(a["K"], 20);
    assert_eq!(a["normalization"], "mean");
    let (a, b) = (a["tc"].as_f64().unwrap(), b["tc"].as_f64().unwrap());
    assert!(b >= 2.0 * a, "consistent {a}, inconsistent {b}");
}

#[test]
fn pair_matrix_export() {
    let dir = tempfile::tempdir().unwrap();
    let inst = synth(
        dir.path(),
        "consistent",
        &["--pitches", "60,64", "--velocities", "127"],
    );
    let csv = dir.path().join("pairs.csv");
    let out = json(&cli(&["tc", &inst, "--pair-matrix", csv.to_str().unwrap()]));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "key,p60_v127,p64_v127");
    assert!(lines[1].starts_with("p60_v127,0,"));
    let d: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(d, out["tc"].as_f64().unwrap());
}

#[test]
fn exact_synth_has_small_mad() {
    let dir = tempfile::tempdir().unwrap();
    let inst = synth(
        dir.path(),
        "consistent",
        &["--pitches", "40:76", "--velocities", "127"],
    );
    let out = json(&cli(&["mad", &inst]));
    assert!(out["mad"].as_f64().unwrap() < 0.02, "{out}");
    assert_eq!(out["unvoiced"], 0);
    assert_eq!(out["per_sample"].as_array().unwrap().len(), 37);
}

#[test]
fn detuned_synth_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    let inst = synth(
        dir.path(),
        "detuned",
        &[
            "--pitches",
            "48:60",
            "--velocities",
            "100",
            "--detune",
            "0.1",
        ],
    );
    let mad = json(&cli(&["mad", &inst, "--mode", "median"]))["mad"]
        .as_f64()
        .unwrap();
    assert!((mad - 0.1).abs() < 0.02, "{mad}");
}

#[test]
fn liftering_brings_distant_pitches_closer() {
    // C1 against C#3 rendered with one shared harmonic envelope.
    let dir = tempfile::tempdir().unwrap();
    let inst = synth(
        dir.path(),
        "consistent",
        &[
            "--pitches",
            "24,49",
            "--velocities",
            "100",
            "--duration",
            "1.0",
        ],
    );
    let a = Path::new(&inst).join("synthlead_synthetic_000-024-100.wav");
    let b = Path::new(&inst).join("synthlead_synthetic_000-049-100.wav");
    let gram = |file: &Path, m: &str| -> Vec<f64> {
        let out = cli(&["liftergram", file.to_str().unwrap(), "--m", m]);
        assert!(out.status.success());
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .flat_map(|l| {
                l.split(',')
                    .map(|v| v.parse::<f64>().unwrap())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let dist = |m: &str| -> f64 {
        let (x, y) = (gram(&a, m), gram(&b, m));
        x.iter().zip(&y).map(|(p, q)| (p - q).abs()).sum::<f64>() / x.len() as f64
    };
    let (liftered, raw) = (dist("13"), dist("80"));
    assert!(liftered < raw, "m=13 {liftered}, m=80 {raw}");
}

#[test]
fn liftergram_header() {
    let dir = tempfile::tempdir().unwrap();
    let inst = synth(
        dir.path(),
        "consistent",
        &["--pitches", "60", "--velocities", "100"],
    );
    let file = Path::new(&inst).join("synthlead_synthetic_000-060-100.wav");
    let out = cli(&["liftergram", file.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.lines().next().unwrap();
    assert_eq!(
        first,
        "# bands=80 frames=40 m=13 fft=2048 hop=512 rate=44100"
    );
    assert_eq!(text.lines().count(), 81);
}

#[test]
fn report_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let inst = synth(
        dir.path(),
        "inconsistent",
        &["--pitches", "50:57", "--velocities", "25,127"],
    );
    let outputs: Vec<Vec<u8>> = ["1", "4", "16"]
        .iter()
        .map(|t| {
            let out = cli(&["--threads", t, "report", &inst]);
            assert!(out.status.success());
            out.stdout
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let report: Value = serde_json::from_slice(&outputs[0]).unwrap();
    for field in ["tc", "mad", "K", "config", "per_sample", "tool", "version"] {
        assert!(report.get(field).is_some(), "missing {field}");
    }
}

#[test]
fn pitch_of_single_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = synth(
        dir.path(),
        "consistent",
        &["--pitches", "69", "--velocities", "127"],
    );
    let file = Path::new(&inst).join("synthlead_synthetic_000-069-127.wav");
    let out = json(&cli(&["pitch", file.to_str().unwrap()]));
    assert!(
        (out["f0_hz"].as_f64().unwrap() - 440.0).abs() < 0.5,
        "{out}"
    );
    assert!((out["midi_est"].as_f64().unwrap() - 69.0).abs() < 0.02);
}

#[test]
fn print_config_exits_early() {
    let out = cli(&["--print-config", "tc", "/does/not/exist", "--mfcc", "20"]);
    assert!(out.status.success());
    let cfg = json(&out);
    assert_eq!(cfg["config"]["tc"]["scales"][0]["lifter_order"], 20);
}

#[test]
fn usage_errors_exit_2() {
    let out = cli(&["tc", "somewhere", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cli(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluation_errors_exit_1_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["tc", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "EmptyInstrument");
    assert!(err["message"].as_str().unwrap().len() > 5);

    std::fs::write(dir.path().join("bass-synth-oops.wav"), b"RIFF").unwrap();
    std::fs::write(dir.path().join("guitar_acoustic_010-024-100.wav"), b"RIFF").unwrap();
    let out = cli(&["tc", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "MalformedName");
}

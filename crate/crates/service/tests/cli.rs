use std::path::Path;
use std::process::{Command, Output};

use blurcap_core::raster::{read_pgm, read_png, write_pgm};
use blurcap_core::ImageGray;
use serde_json::Value;

fn blurcap(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blurcap"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn fixtures() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = blurcap(
            &["gen", "--n", "2", "--radius", "0", "--seed", "1", "--out", out],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in [
        "challenge_0.pgm",
        "challenge_1.pgm",
        "challenge_0.png",
        "challenge_1.png",
        "manifest.json",
    ] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let manifest: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["items"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["items"][1]["seed"], 2);
}

#[test]
fn gen_honours_confusable_exclusion() {
    let tmp = tempfile::tempdir().unwrap();
    let o = blurcap(
        &[
            "gen",
            "--n",
            "40",
            "--radius",
            "1",
            "--seed",
            "3",
            "--exclude-confusables",
            "--out",
            "c",
        ],
        tmp.path(),
    );
    assert!(o.status.success());
    let manifest: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("c/manifest.json")).unwrap()).unwrap();
    for item in manifest["items"].as_array().unwrap() {
        let truth = item["truth"].as_str().unwrap();
        assert!(!truth.contains(['0', 'O', 'o', '1', 'l', 'I']), "{truth}");
    }
}

#[test]
fn blur_radius_zero_is_identity_across_formats() {
    let tmp = tempfile::tempdir().unwrap();
    let px: Vec<u8> = (0..20 * 10).map(|i| (i * 37 % 256) as u8).collect();
    let img = ImageGray::from_pixels(20, 10, px).unwrap();
    std::fs::write(tmp.path().join("in.pgm"), write_pgm(&img)).unwrap();

    let o = blurcap(
        &["blur", "--in", "in.pgm", "--radius", "0", "--out", "out.png"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        read_png(&std::fs::read(tmp.path().join("out.png")).unwrap()).unwrap(),
        img
    );

    let o = blurcap(
        &["blur", "--in", "out.png", "--radius", "2", "--out", "soft.pgm"],
        tmp.path(),
    );
    assert!(o.status.success());
    let soft = read_pgm(&std::fs::read(tmp.path().join("soft.pgm")).unwrap()).unwrap();
    assert_eq!((soft.width(), soft.height()), (20, 10));
    assert_ne!(soft, img);
}

#[test]
fn contract_violations_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["gen", "--n", "0", "--radius", "1", "--seed", "1", "--out", "x"],
        &["gen", "--n", "2", "--radius", "-1", "--seed", "1", "--out", "x"],
        &["blur", "--in", "missing.pgm", "--radius", "1", "--out", "y.pgm"],
        &["blur", "--in", "a.pgm", "--radius", "1", "--out", "y.jpg"],
        &["eval", "report", "--transcript", "missing.jsonl"],
        &["eval", "run", "--n", "1", "--radii", "0", "--seed", "1", "--out", "e"],
        &["serve", "--config", "missing.json"],
    ];
    for args in cases {
        let o = blurcap(args, tmp.path());
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(!o.stderr.is_empty(), "{args:?} printed no message");
    }
}

#[test]
fn eval_report_matches_the_oracle_fixture() {
    let o = blurcap(
        &[
            "eval",
            "report",
            "--transcript",
            fixtures().join("transcript_30.jsonl").to_str().unwrap(),
        ],
        Path::new("."),
    );
    assert!(o.status.success());
    let ours: Value = serde_json::from_slice(&o.stdout).unwrap();
    let oracle: Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("expected_report_30.json")).unwrap()).unwrap();
    assert_eq!(
        ours["buckets"].as_array().unwrap().len(),
        oracle["buckets"].as_array().unwrap().len()
    );
    for (a, b) in ours["buckets"]
        .as_array()
        .unwrap()
        .iter()
        .zip(oracle["buckets"].as_array().unwrap())
    {
        assert_eq!(a["responder"], b["responder"]);
        assert_eq!(a["n"], b["n"]);
        for field in ["radius", "avg_char_similarity", "exact_match_pct", "readable_pct"] {
            let (x, y) = (a[field].as_f64().unwrap(), b[field].as_f64().unwrap());
            assert!((x - y).abs() <= 1e-9, "{field}: {x} vs {y}");
        }
    }

    let table = blurcap(
        &[
            "eval",
            "report",
            "--table",
            "--transcript",
            fixtures().join("transcript_30.jsonl").to_str().unwrap(),
        ],
        Path::new("."),
    );
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("responder"));
    assert!(text.contains("total human"));
}

#[test]
fn eval_run_with_a_stub_adapter() {
    let tmp = tempfile::tempdir().unwrap();
    let adapters = r#"{"adapters":[{"name":"echo","command":"echo abcd efgh {image}","timeout_ms":5000}]}"#;
    std::fs::write(tmp.path().join("adapters.json"), adapters).unwrap();
    let o = blurcap(
        &[
            "eval",
            "run",
            "--n",
            "3",
            "--radii",
            "0,1",
            "--adapters",
            "adapters.json",
            "--seed",
            "9",
            "--out",
            "run",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let transcript = std::fs::read_to_string(tmp.path().join("run/transcript.jsonl")).unwrap();
    assert_eq!(transcript.lines().count(), 6);
    assert!(tmp.path().join("run/r1/manifest.json").exists());
    let report: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("run/report.json")).unwrap()).unwrap();
    assert_eq!(report["totals"]["ocr"]["n"], 6);
    assert!(String::from_utf8(o.stdout).unwrap().contains("ocr:echo"));
}

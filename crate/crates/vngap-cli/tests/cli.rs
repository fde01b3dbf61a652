//! End-to-end tests of the `vngap` binary: exit codes, file artifacts,
//! config precedence, and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use vngap_core::linalg::ComplexMatrix;
use vngap_core::poly::{MatrixPolynomial, MultiIndex};
use vngap_core::schema::{BPairJson, PolynomialJson, TupleJson};
use vngap_core::tuples::random_commuting_tuple;

fn vngap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vngap"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

/// Small but violation-finding search arguments.
const FAST_SEARCH: &[&str] = &[
    "search",
    "--n",
    "2",
    "--restarts",
    "6",
    "--budget",
    "1800",
    "--seed",
    "7",
    "--grid",
    "32",
    "--fine-grid",
    "128",
];

#[test]
fn search_writes_a_certificate_and_certify_reverifies_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = vngap(dir.path(), &[FAST_SEARCH, &["--out", "cert.json"]].concat());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("violation = true"));
    assert!(text.contains("seed = 7"));
    assert!(dir.path().join("cert.json").exists());

    let out = vngap(dir.path(), &["certify", "--cert", "cert.json", "--fine-grid", "256"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("verdict = VIOLATION"));
}

#[test]
fn search_rejects_scalar_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = vngap(dir.path(), &["search", "--n", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn search_with_commuting_pair_reports_no_violation() {
    let dir = tempfile::tempdir().unwrap();
    let sx = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let pair = BPairJson {
        b1: sx.clone(),
        b2: sx,
    };
    std::fs::write(
        dir.path().join("commuting.json"),
        serde_json::to_string(&pair).unwrap(),
    )
    .unwrap();
    let out = vngap(
        dir.path(),
        &[
            "search",
            "--n",
            "2",
            "--restarts",
            "4",
            "--budget",
            "1000",
            "--seed",
            "3",
            "--grid",
            "32",
            "--fine-grid",
            "64",
            "--b-pair",
            "commuting.json",
        ],
    );
    assert_eq!(code(&out), 3, "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("violation = false"));
}

#[test]
fn certify_rejects_truncated_files_and_ignores_stored_claims() {
    let dir = tempfile::tempdir().unwrap();
    let out = vngap(dir.path(), &[FAST_SEARCH, &["--out", "cert.json"]].concat());
    assert_eq!(code(&out), 0);

    // truncated file: parse error
    let full = std::fs::read_to_string(dir.path().join("cert.json")).unwrap();
    std::fs::write(dir.path().join("broken.json"), &full[..full.len() / 2]).unwrap();
    let out = vngap(dir.path(), &["certify", "--cert", "broken.json"]);
    assert_eq!(code(&out), 2);

    // the stored ratio plays no part in the verdict
    let mut cert: serde_json::Value = serde_json::from_str(&full).unwrap();
    cert["ratio_lower"] = serde_json::json!(0.0);
    cert["violation"] = serde_json::json!(false);
    std::fs::write(
        dir.path().join("edited.json"),
        serde_json::to_string(&cert).unwrap(),
    )
    .unwrap();
    let out = vngap(dir.path(), &["certify", "--cert", "edited.json", "--fine-grid", "128"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("verdict = VIOLATION"));
}

#[test]
fn identical_seed_and_config_give_identical_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let a = vngap(dir.path(), &[FAST_SEARCH, &["--out", "a.json"]].concat());
    let b = vngap(dir.path(), &[FAST_SEARCH, &["--out", "b.json"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let mut a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    let mut b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("b.json")).unwrap()).unwrap();
    a["search_meta"]["wall_time_ms"] = serde_json::json!(0);
    b["search_meta"]["wall_time_ms"] = serde_json::json!(0);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn worker_count_does_not_change_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let one = vngap(
        dir.path(),
        &[FAST_SEARCH, &["--workers", "1", "--out", "w1.json"]].concat(),
    );
    let two = vngap(
        dir.path(),
        &[FAST_SEARCH, &["--workers", "2", "--out", "w2.json"]].concat(),
    );
    assert_eq!(code(&one), 0);
    assert_eq!(code(&two), 0);
    let mut a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("w1.json")).unwrap())
            .unwrap();
    let mut b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("w2.json")).unwrap())
            .unwrap();
    a["search_meta"]["wall_time_ms"] = serde_json::json!(0);
    b["search_meta"]["wall_time_ms"] = serde_json::json!(0);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn config_file_is_used_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "n = 2\nrestarts = 4\nbudget = 1200\nseed = 5\ngrid = 32\nfine_grid = 64\nout = \"from-config.json\"\n",
    )
    .unwrap();
    let out = vngap(dir.path(), &["search", "--config", "run.toml"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from-config.json").exists());

    // flag beats config
    let out = vngap(
        dir.path(),
        &["search", "--config", "run.toml", "--out", "flag.json", "--seed", "6"],
    );
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("flag.json").exists());
    assert!(stdout(&out).contains("seed = 6"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "n = 2\nbogus_key = 1\n").unwrap();
    let out = vngap(dir.path(), &["search", "--config", "bad.toml"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));
}

#[test]
fn verify_reports_without_judging() {
    let dir = tempfile::tempdir().unwrap();
    let p = MatrixPolynomial::new(
        1,
        1,
        [(MultiIndex::unit(1, 0), ComplexMatrix::identity(1))],
    )
    .unwrap();
    let t = random_commuting_tuple(1, 3, 5).unwrap();
    std::fs::write(
        dir.path().join("p.json"),
        serde_json::to_string(&PolynomialJson::from(&p)).unwrap(),
    )
    .unwrap();
    std::fs::write(
        dir.path().join("t.json"),
        serde_json::to_string(&TupleJson::from(&t)).unwrap(),
    )
    .unwrap();
    let out = vngap(
        dir.path(),
        &[
            "verify",
            "--polynomial",
            "p.json",
            "--tuple",
            "t.json",
            "--grid",
            "64",
            "--out",
            "report.json",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("holds = true"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report["ratio"].as_f64().unwrap() <= 1.0);

    let out = vngap(dir.path(), &["verify", "--polynomial", "missing.json", "--tuple", "t.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_reports_a_broken_inequality_without_judging() {
    // an explicit violating instance: the pencil with coefficients
    // (σx, σz, I) evaluated at the Parrott triple over the Pauli pair
    let dir = tempfile::tempdir().unwrap();
    let (b1, b2) = vngap_core::tuples::pauli_pair();
    let pencil = MatrixPolynomial::linear_pencil(&[
        b1.clone(),
        b2.clone(),
        ComplexMatrix::identity(2),
    ])
    .unwrap();
    let triple = vngap_core::tuples::parrott_triple(&b1, &b2).unwrap();
    std::fs::write(
        dir.path().join("pencil.json"),
        serde_json::to_string(&PolynomialJson::from(&pencil)).unwrap(),
    )
    .unwrap();
    std::fs::write(
        dir.path().join("triple.json"),
        serde_json::to_string(&TupleJson::from(&triple)).unwrap(),
    )
    .unwrap();
    let out = vngap(
        dir.path(),
        &[
            "verify",
            "--polynomial",
            "pencil.json",
            "--tuple",
            "triple.json",
            "--grid",
            "32",
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("holds = false"));
}

#[test]
fn suite_command_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = vngap(
        dir.path(),
        &["suite", "--trials", "10", "--seed", "1", "--out", "suites.json"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for name in ["remark1", "n1", "ando"] {
        assert!(text.contains(&format!("{name}:")), "missing {name} in {text}");
    }
    let bundle: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("suites.json")).unwrap())
            .unwrap();
    assert_eq!(bundle["schema"], "vn-suite-report/1");
    assert_eq!(bundle["suites"].as_array().unwrap().len(), 3);

    let out = vngap(dir.path(), &["suite", "--suite", "nonsense"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn norm_command_handles_all_ops() {
    let dir = tempfile::tempdir().unwrap();
    let m = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
    std::fs::write(dir.path().join("m.json"), serde_json::to_string(&m).unwrap()).unwrap();
    let out = vngap(dir.path(), &["norm", "--op", "op-norm", "--input", "m.json"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("op_norm = 2.000000000000"));

    // diagonal pencil: the certified scan reaches exactly two
    let a1 = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
    let a2 = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let p = MatrixPolynomial::new(
        2,
        2,
        [
            (MultiIndex::unit(2, 0), a1),
            (MultiIndex::unit(2, 1), a2),
            (MultiIndex::zero(2), ComplexMatrix::identity(2)),
        ],
    )
    .unwrap();
    std::fs::write(
        dir.path().join("p.json"),
        serde_json::to_string(&PolynomialJson::from(&p)).unwrap(),
    )
    .unwrap();
    let out = vngap(
        dir.path(),
        &[
            "norm", "--op", "torus-sup", "--input", "p.json", "--grid", "64", "--out",
            "sup.json",
        ],
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("best_value = 2.000000000000"));
    let sup: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sup.json")).unwrap())
            .unwrap();
    assert_eq!(sup["schema"], "vn-sup-result/1");
    assert!(sup["result"]["certified_upper"].as_f64().unwrap() >= 2.0);

    let out = vngap(dir.path(), &["norm", "--op", "what", "--input", "m.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn zeroed_complex_entries_survive_the_full_json_path() {
    // matrices with exact zeros keep them bit-exact through write/read
    let dir = tempfile::tempdir().unwrap();
    let m = ComplexMatrix::new(
        1,
        2,
        vec![Complex64::new(0.0, -0.0), Complex64::new(1.5, 2.5)],
    )
    .unwrap();
    std::fs::write(dir.path().join("m.json"), serde_json::to_string(&m).unwrap()).unwrap();
    let back: ComplexMatrix =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(back.get(0, 1), Complex64::new(1.5, 2.5));
}

//! Cross-module consistency: a certificate accepted by the auditor must
//! reassemble into a counterexample that the inequality checker also
//! rejects, and everything stays reproducible through serialization.

use num_complex::Complex64;

use vngap_core::gap::{self, GapCertificate, SearchMeta, CERT_SCHEMA};
use vngap_core::linalg::ComplexMatrix;
use vngap_core::tuples::pauli_pair;
use vngap_core::verify::{check_inequality, remark1_suite};

/// Builds the fixed violating certificate from the anchor triple
/// A = (σx, σz, I) through public entry points only: the right side is
/// certified, the triple rescaled so that bound is one, and the witness
/// taken from the assembled left side.
fn anchor_certificate(fine_grid: usize) -> GapCertificate {
    let (b1, b2) = pauli_pair();
    let (a1, a2, a3) = (b1.clone(), b2.clone(), ComplexMatrix::identity(2));
    let first = gap::rhs_norm(&a1, &a2, &a3, fine_grid).unwrap();
    let s = Complex64::new(1.0 / first.certified_upper, 0.0);
    let (a1, a2, a3) = (a1.scale(s), a2.scale(s), a3.scale(s));
    let rhs_result = gap::rhs_norm(&a1, &a2, &a3, fine_grid).unwrap();
    let (lhs_lower, witness) = gap::lhs_norm(&a1, &a2, &a3, &b1, &b2).unwrap();
    let ratio_lower = lhs_lower / rhs_result.certified_upper;
    GapCertificate {
        schema: CERT_SCHEMA.to_string(),
        n: 2,
        d: 2,
        violation: lhs_lower > rhs_result.certified_upper,
        a1,
        a2,
        a3,
        b1,
        b2,
        witness,
        lhs_lower,
        rhs_result,
        ratio_lower,
        seed: 0,
        search_meta: SearchMeta {
            restarts: 0,
            iterations: 0,
            wall_time_ms: 0,
        },
    }
}

#[test]
fn certified_violation_breaks_the_inequality_checker_too() {
    let cert = anchor_certificate(256);
    let verdict = gap::certify(&cert, 512).unwrap();
    assert!(verdict.violation);

    let (tuple, pencil, report) = gap::assemble_counterexample(&cert, 48).unwrap();
    let ineq = check_inequality(&pencil, &tuple, 1e-8, 48).unwrap();
    assert!(!ineq.holds, "ratio {}", ineq.ratio);
    assert!((ineq.lhs - report.lhs_block_norm).abs() < 1e-9);
    assert!(ineq.ratio > 1.0);
}

#[test]
fn certificate_survives_serialization_before_audit() {
    let cert = anchor_certificate(128);
    let json = serde_json::to_string_pretty(&cert).unwrap();
    let parsed: GapCertificate = serde_json::from_str(&json).unwrap();
    let direct = gap::certify(&cert, 256).unwrap();
    let through_json = gap::certify(&parsed, 256).unwrap();
    assert_eq!(direct, through_json);
}

#[test]
fn suite_reports_are_reproducible_per_seed() {
    let a = remark1_suite(20, 9, 1e-8).unwrap();
    let b = remark1_suite(20, 9, 1e-8).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    let c = remark1_suite(20, 10, 1e-8).unwrap();
    assert_ne!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&c).unwrap()
    );
}

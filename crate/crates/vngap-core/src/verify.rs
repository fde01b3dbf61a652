//! The inequality checker and the property suites for every regime where
//! the generalized von Neumann inequality provably holds. These suites are
//! the regression gate protecting the gap search from numerical
//! self-deception: a violation reported by the search is only credible
//! while the known-good regimes keep verifying.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::norms::{polydisk_sup, DEFAULT_GRID};
use crate::poly::{MatrixPolynomial, MultiIndex};
use crate::schema::{digest_inputs, PolynomialJson, TupleJson};
use crate::tuples::{random_commuting_tuple, ContractionTuple};

/// Default acceptance tolerance on the ratio for the scalar affine suite.
pub const REMARK1_TOL: f64 = 1e-8;
/// Default acceptance tolerance for the one- and two-variable suites.
pub const SUITE_TOL: f64 = 1e-6;

/// One inequality check: `lhs = ‖P(T)‖` against the certified polydisk
/// upper bound. Using the certified upper bound for the right side makes
/// `holds = false` conservative: a reported violation can never be an
/// artifact of under-estimating the supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub schema: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub holds: bool,
    pub tol: f64,
    /// SHA-256 of the canonical serialization of `(P, T)`.
    pub inputs_digest: String,
}

/// A replayable suite failure: the trial seed and the exact inputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub trial_seed: u64,
    pub ratio: f64,
    pub polynomial: PolynomialJson,
    pub tuple: TupleJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_ratio: f64,
    pub failures: Vec<TrialFailure>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: &str, trials: usize, seed: u64, tol: f64) -> Self {
        Self {
            suite: suite.to_string(),
            trials,
            seed,
            tol,
            max_ratio: 0.0,
            failures: Vec::new(),
            passed: true,
        }
    }

    fn record(
        &mut self,
        trial: usize,
        trial_seed: u64,
        ratio: f64,
        p: &MatrixPolynomial,
        t: &ContractionTuple,
    ) {
        if ratio > self.max_ratio {
            self.max_ratio = ratio;
        }
        if ratio > 1.0 + self.tol {
            self.passed = false;
            self.failures.push(TrialFailure {
                trial,
                trial_seed,
                ratio,
                polynomial: PolynomialJson::from(p),
                tuple: TupleJson::from(t),
            });
        }
    }
}

/// Checks `‖P(T)‖ ≤ (1 + tol) · certified polydisk bound` for a validated
/// tuple. `grid` sets the scan resolution per dimension.
pub fn check_inequality(
    p: &MatrixPolynomial,
    t: &ContractionTuple,
    tol: f64,
    grid: usize,
) -> Result<InequalityReport> {
    if p.is_zero() {
        return Err(Error::DegenerateInput("zero polynomial".into()));
    }
    let report = t.validate()?;
    if !report.accepted {
        return Err(Error::InvalidTuple(format!(
            "norms {:?}, commutators {:?}",
            report.operator_norms, report.commutators
        )));
    }
    let lhs = p.eval_tuple(t)?.op_norm()?;
    let rhs = polydisk_sup(p, grid)?.certified_upper;
    let ratio = lhs / rhs;
    Ok(InequalityReport {
        schema: crate::schema::REPORT_SCHEMA.to_string(),
        lhs,
        rhs,
        ratio,
        holds: ratio <= 1.0 + tol,
        tol,
        inputs_digest: digest_inputs(p, t),
    })
}

/// Scalar affine functions `a₀ + Σ a_k z_k` evaluated at arbitrary (not
/// necessarily commuting) contraction tuples never beat the polydisk
/// bound. Uses a per-dimension grid fitted to the scan cost: the affine
/// evaluation is order-free, so no commutativity is required of the draws.
pub fn remark1_suite(trials: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("remark1", trials, seed, tol);
    for trial in 0..trials {
        let trial_seed = derive_seed(seed, trial as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let n_vars = rng.gen_range(1..=4usize);
        let dim = rng.gen_range(2..=6usize);

        let mut terms = vec![(MultiIndex::zero(n_vars), random_scalar(&mut rng))];
        for k in 0..n_vars {
            terms.push((MultiIndex::unit(n_vars, k), random_scalar(&mut rng)));
        }
        let p = MatrixPolynomial::new(n_vars, 1, terms)?;
        if p.is_zero() {
            continue; // all coefficients drew exactly zero; nothing to check
        }

        // arbitrary contractions: seeded matrices scaled inside the ball;
        // the claimed commutativity tolerance is 2, the largest commutator
        // norm a contraction pair can reach, since commuting is not asked
        let ops: Vec<ComplexMatrix> = (0..n_vars)
            .map(|_| random_contraction(&mut rng, dim))
            .collect::<Result<_>>()?;
        let t = ContractionTuple::new(ops, 2.0, 1e-10)?;

        let lhs = p.eval_tuple(&t)?.op_norm()?;
        let rhs = polydisk_sup(&p, scalar_grid(n_vars))?.certified_upper;
        report.record(trial, trial_seed, lhs / rhs, &p, &t);
    }
    Ok(report)
}

/// Single-variable matrix polynomials at a single contraction: the
/// original one-variable inequality, exercised across degrees and
/// coefficient sizes.
pub fn n1_suite(trials: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("n1", trials, seed, tol);
    for trial in 0..trials {
        let trial_seed = derive_seed(seed.wrapping_add(0x1), trial as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let coeff_dim = rng.gen_range(1..=3usize);
        let degree = rng.gen_range(1..=5u32);
        let dim = rng.gen_range(2..=6usize);

        let terms = (0..=degree)
            .map(|k| (MultiIndex::new(vec![k]), random_matrix(&mut rng, coeff_dim)));
        let p = MatrixPolynomial::new(1, coeff_dim, terms.collect::<Vec<_>>())?;
        if p.is_zero() {
            continue;
        }
        let t = ContractionTuple::new(vec![random_contraction(&mut rng, dim)?], 1e-8, 1e-10)?;
        let rep = check_inequality(&p, &t, tol, 512)?;
        report.record(trial, trial_seed, rep.ratio, &p, &t);
    }
    Ok(report)
}

/// Pairs of commuting contractions against two-variable matrix
/// polynomials: the two-variable inequality, with commutativity guaranteed
/// by construction of the tuples.
pub fn ando_suite(trials: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("ando", trials, seed, tol);
    for trial in 0..trials {
        let trial_seed = derive_seed(seed.wrapping_add(0x2), trial as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let coeff_dim = rng.gen_range(1..=2usize);
        let degree = rng.gen_range(1..=3u32);
        let dim = rng.gen_range(2..=5usize);

        let mut terms = Vec::new();
        for i in 0..=degree {
            for j in 0..=(degree - i) {
                terms.push((MultiIndex::new(vec![i, j]), random_matrix(&mut rng, coeff_dim)));
            }
        }
        let p = MatrixPolynomial::new(2, coeff_dim, terms)?;
        if p.is_zero() {
            continue;
        }
        let t = random_commuting_tuple(2, dim, derive_seed(trial_seed, 0xc0))?;
        let rep = check_inequality(&p, &t, tol, DEFAULT_GRID)?;
        report.record(trial, trial_seed, rep.ratio, &p, &t);
    }
    Ok(report)
}

/// Grid sizes for the scalar affine suite, scaled down with dimension so
/// the scan stays cheap; the certified slack only loosens the bound being
/// asserted, never tightens it.
fn scalar_grid(n_vars: usize) -> usize {
    match n_vars {
        1 => 512,
        2 => 64,
        3 => 32,
        _ => 16,
    }
}

fn random_scalar(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::new(
        1,
        1,
        vec![Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))],
    )
    .expect("finite draw")
}

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let entries = (0..dim * dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(dim, dim, entries).expect("finite draw")
}

/// A seeded matrix scaled to a uniformly drawn norm in `[0, 1]`.
fn random_contraction(rng: &mut ChaCha8Rng, dim: usize) -> Result<ComplexMatrix> {
    let m = random_matrix(rng, dim);
    let norm = m.op_norm()?;
    if norm == 0.0 {
        return Ok(m);
    }
    let target = rng.gen_range(0.0..=1.0);
    Ok(m.scale(Complex64::new(target / norm, 0.0)))
}

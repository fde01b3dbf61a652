//! Search over coefficient triples for certified violations of the
//! generalized von Neumann inequality, and the audit machinery that makes
//! every found violation independently recomputable.
//!
//! The two sides being compared for a triple `(A₁, A₂, A₃)` and a unitary
//! pair `(B₁, B₂)`:
//!
//! * left: `‖A₁⊗B₁ + A₂⊗B₂ + A₃⊗I‖`, certified from below by a stored
//!   witness vector (`‖Mv‖ ≤ ‖M‖` needs no iteration);
//! * right: the certified upper bound for
//!   `max_{|λ₁|=|λ₂|=1} ‖A₁λ₁ + A₂λ₂ + A₃‖` from the torus grid scan.
//!
//! A certificate claims a violation exactly when the witness-certified
//! lower bound on the left strictly exceeds the grid-certified upper bound
//! on the right, so a claim can never be an artifact of the search
//! heuristics.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::norms::{self, TorusSupResult, DEFAULT_FINE_GRID, DEFAULT_GRID};
use crate::poly::{MatrixPolynomial, MultiIndex};
use crate::tuples::{parrott_triple, ContractionTuple};

/// Certificate schema identifier embedded in every serialized certificate.
pub const CERT_SCHEMA: &str = "vn-gap-cert/1";
/// Unitarity tolerance applied to the B pair.
pub const B_UNITARY_TOL: f64 = 1e-10;

pub const DEFAULT_RESTARTS: usize = 200;
pub const DEFAULT_BUDGET: u64 = 120_000;
/// n values tried in turn when the caller does not pin one.
pub const ESCALATION_SCHEDULE: [usize; 3] = [2, 3, 4];

const ASCENT_INITIAL_STEP: f64 = 0.25;
const ASCENT_MIN_STEP: f64 = 1e-6;

/// Tunable knobs for [`search`]. `budget` caps objective evaluations over
/// the whole run; each restart gets an equal share.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub restarts: usize,
    pub seed: u64,
    pub budget: u64,
    /// Grid for the fast uncertified objective during ascent.
    pub search_grid: usize,
    /// Grid for the fresh certification that builds the certificate.
    pub fine_grid: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            restarts: DEFAULT_RESTARTS,
            seed: 0,
            budget: DEFAULT_BUDGET,
            search_grid: DEFAULT_GRID,
            fine_grid: DEFAULT_FINE_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchMeta {
    pub restarts: usize,
    /// Total objective evaluations spent.
    pub iterations: u64,
    /// Wall time of the search; the only field two identical runs may
    /// disagree on.
    pub wall_time_ms: u64,
}

/// Self-contained, recomputable witness for one search outcome.
///
/// `violation` is claimed iff `lhs_lower > rhs_result.certified_upper`,
/// both sides recomputable from the stored matrices alone: the left from
/// the witness vector, the right from a fresh grid scan with the stored
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub schema: String,
    pub n: usize,
    pub d: usize,
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub a3: ComplexMatrix,
    pub b1: ComplexMatrix,
    pub b2: ComplexMatrix,
    #[serde(with = "cvec")]
    pub witness: Vec<Complex64>,
    pub lhs_lower: f64,
    pub rhs_result: TorusSupResult,
    pub ratio_lower: f64,
    pub violation: bool,
    pub seed: u64,
    pub search_meta: SearchMeta,
}

/// Outcome of an independent [`certify`] audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedVerdict {
    pub violation: bool,
    pub lhs_lower: f64,
    pub rhs: TorusSupResult,
    pub ratio_lower: f64,
}

/// Counterexample quantities recomputed through the operator-tuple route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    /// `‖L(T)‖` through the Parrott triple, equal to the assembled block
    /// norm of the left side.
    pub lhs_block_norm: f64,
    /// Witness-certified lower bound re-taken from the certificate.
    pub lhs_lower: f64,
    /// Certified upper bound for the two-variable reduction.
    pub rhs_certified_upper: f64,
    /// Direct three-variable polydisk scan of the pencil.
    pub polydisk3: TorusSupResult,
    pub ratio: f64,
}

/// `‖A₁⊗B₁ + A₂⊗B₂ + A₃⊗I‖` with the witness vector that attains it.
pub fn lhs_norm(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    a3: &ComplexMatrix,
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
) -> Result<(f64, Vec<Complex64>)> {
    check_a_triple(a1, a2, a3)?;
    check_b_pair(b1, b2)?;
    let m = assemble_lhs(a1, a2, a3, b1, b2);
    m.op_norm_with_vector()
}

/// Certified torus supremum of the affine pencil `A₁λ₁ + A₂λ₂ + A₃`.
pub fn rhs_norm(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    a3: &ComplexMatrix,
    grid: usize,
) -> Result<TorusSupResult> {
    check_a_triple(a1, a2, a3)?;
    let pencil = affine_pencil(a1, a2, a3)?;
    norms::torus_sup(&pencil, grid, true)
}

fn check_a_triple(a1: &ComplexMatrix, a2: &ComplexMatrix, a3: &ComplexMatrix) -> Result<()> {
    let n = a1.rows();
    for (name, a) in [("a1", a1), ("a2", a2), ("a3", a3)] {
        if !a.is_square() || a.rows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                a.rows(),
                a.cols()
            )));
        }
    }
    Ok(())
}

fn check_b_pair(b1: &ComplexMatrix, b2: &ComplexMatrix) -> Result<()> {
    if !b1.is_square() || !b2.is_square() || b1.rows() != b2.rows() {
        return Err(Error::DimensionMismatch(
            "B pair must be square matrices of equal size".into(),
        ));
    }
    for b in [b1, b2] {
        let defect = b.unitary_defect()?;
        if defect > B_UNITARY_TOL {
            return Err(Error::NotUnitary {
                defect,
                tol: B_UNITARY_TOL,
            });
        }
    }
    Ok(())
}

fn assemble_lhs(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    a3: &ComplexMatrix,
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
) -> ComplexMatrix {
    let id = ComplexMatrix::identity(b1.rows());
    let m = kron(a1, b1);
    let m = m.add(&kron(a2, b2)).expect("kron shapes agree");
    m.add(&kron(a3, &id)).expect("kron shapes agree")
}

/// The affine two-variable pencil `A₁λ₁ + A₂λ₂ + A₃` as a polynomial.
fn affine_pencil(
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    a3: &ComplexMatrix,
) -> Result<MatrixPolynomial> {
    MatrixPolynomial::new(
        2,
        a1.rows(),
        [
            (MultiIndex::unit(2, 0), a1.clone()),
            (MultiIndex::unit(2, 1), a2.clone()),
            (MultiIndex::zero(2), a3.clone()),
        ],
    )
}

/// Random-restart coordinate ascent over the `6n²` real parameters of the
/// coefficient triple, maximizing the uncertified ratio
/// `lhs / (rhs grid max)`; the best triple is then rescaled so the fresh
/// fine-grid certified upper bound is one and packaged as a certificate
/// with a fresh witness. Returns the best certificate whether or not it
/// violates; a violation is never fabricated and never suppressed.
///
/// Restarts run independently (and possibly concurrently) with seeds
/// derived from `(seed, restart index)`; ties on the objective go to the
/// lowest restart index, so the outcome is worker-count independent.
pub fn search(
    n: usize,
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
    params: &SearchParams,
) -> Result<GapCertificate> {
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "coefficient size n must be at least 2, got {n}"
        )));
    }
    search_any_n(n, b1, b2, params)
}

/// [`search`] over an escalating schedule of coefficient sizes; stops at
/// the first size that certifies a violation, otherwise returns the best
/// certificate seen (earliest size wins ties).
pub fn search_escalating(
    schedule: &[usize],
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
    params: &SearchParams,
) -> Result<GapCertificate> {
    if schedule.is_empty() {
        return Err(Error::DegenerateInput("empty escalation schedule".into()));
    }
    let mut best: Option<GapCertificate> = None;
    for &n in schedule {
        let cert = search(n, b1, b2, params)?;
        if cert.violation {
            return Ok(cert);
        }
        if best.as_ref().is_none_or(|b| cert.ratio_lower > b.ratio_lower) {
            best = Some(cert);
        }
    }
    Ok(best.expect("schedule is nonempty"))
}

/// Search body without the `n ≥ 2` gate, so the scalar floor (`n = 1`,
/// where the inequality provably holds) stays testable.
fn search_any_n(
    n: usize,
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
    params: &SearchParams,
) -> Result<GapCertificate> {
    check_b_pair(b1, b2)?;
    if params.restarts == 0 {
        return Err(Error::DegenerateInput("need at least one restart".into()));
    }
    let started = Instant::now();
    let per_restart_budget = (params.budget / params.restarts as u64).max(1);

    let outcomes: Vec<(f64, Vec<f64>, u64)> = (0..params.restarts)
        .into_par_iter()
        .map(|restart| {
            let restart_seed = derive_seed(params.seed, restart as u64);
            run_restart(n, b1, b2, params.search_grid, restart_seed, per_restart_budget)
        })
        .collect();

    let mut best_ratio = f64::NEG_INFINITY;
    let mut best_params: &[f64] = &[];
    let mut total_evals = 0u64;
    for (ratio, p, evals) in &outcomes {
        total_evals += evals;
        if *ratio > best_ratio {
            best_ratio = *ratio;
            best_params = p;
        }
    }
    if best_ratio <= 0.0 {
        return Err(Error::DegenerateInput(
            "every restart collapsed to a degenerate pencil".into(),
        ));
    }

    let [a1, a2, a3] = params_to_triple(n, best_params);
    let meta = SearchMeta {
        restarts: params.restarts,
        iterations: total_evals,
        wall_time_ms: 0,
    };
    let mut cert =
        build_certificate(n, &a1, &a2, &a3, b1, b2, params.fine_grid, params.seed, meta)?;
    cert.search_meta.wall_time_ms = started.elapsed().as_millis() as u64;
    Ok(cert)
}

/// One seeded restart: random start, greedy coordinate steps with halving.
fn run_restart(
    n: usize,
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
    grid: usize,
    seed: u64,
    budget: u64,
) -> (f64, Vec<f64>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params: Vec<f64> = (0..6 * n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut evals = 0u64;
    let eval = |p: &[f64], evals: &mut u64| -> f64 {
        *evals += 1;
        objective(n, p, b1, b2, grid).unwrap_or(0.0)
    };
    let mut best = eval(&params, &mut evals);
    let mut step = ASCENT_INITIAL_STEP;
    'outer: while step >= ASCENT_MIN_STEP && evals < budget {
        let mut improved = false;
        for i in 0..params.len() {
            for delta in [step, -step] {
                if evals >= budget {
                    break 'outer;
                }
                params[i] += delta;
                let cand = eval(&params, &mut evals);
                if cand > best {
                    best = cand;
                    improved = true;
                    break;
                }
                params[i] -= delta;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, params, evals)
}

/// Uncertified ratio `lhs / rhs-grid-max`; zero marks a useless candidate
/// (degenerate pencil or a transient convergence failure).
fn objective(
    n: usize,
    params: &[f64],
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
    grid: usize,
) -> Result<f64> {
    let [a1, a2, a3] = params_to_triple(n, params);
    let pencil = affine_pencil(&a1, &a2, &a3)?;
    let rhs = norms::torus_grid_max(&pencil, grid)?;
    if rhs < 1e-9 {
        return Ok(0.0);
    }
    let lhs = assemble_lhs(&a1, &a2, &a3, b1, b2).op_norm()?;
    Ok(lhs / rhs)
}

/// Packs `6n²` reals into the coefficient triple: `[re, im]` interleaved,
/// row-major, a1 then a2 then a3.
fn params_to_triple(n: usize, params: &[f64]) -> [ComplexMatrix; 3] {
    let per = 2 * n * n;
    let mk = |chunk: &[f64]| {
        let entries: Vec<Complex64> = chunk
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        ComplexMatrix::new(n, n, entries).expect("finite search parameters")
    };
    [
        mk(&params[0..per]),
        mk(&params[per..2 * per]),
        mk(&params[2 * per..3 * per]),
    ]
}

#[allow(clippy::too_many_arguments)]
fn build_certificate(
    n: usize,
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    a3: &ComplexMatrix,
    b1: &ComplexMatrix,
    b2: &ComplexMatrix,
    fine_grid: usize,
    seed: u64,
    meta: SearchMeta,
) -> Result<GapCertificate> {
    // normalize so the certified right side is one, then certify afresh on
    // the scaled triple
    let first = rhs_norm(a1, a2, a3, fine_grid)?;
    if first.certified_upper <= 1e-12 {
        return Err(Error::DegenerateInput("pencil certifies to zero".into()));
    }
    let s = Complex64::new(1.0 / first.certified_upper, 0.0);
    let (a1, a2, a3) = (a1.scale(s), a2.scale(s), a3.scale(s));
    let rhs_result = rhs_norm(&a1, &a2, &a3, fine_grid)?;
    let m = assemble_lhs(&a1, &a2, &a3, b1, b2);
    let (_, witness) = m.op_norm_with_vector()?;
    let lhs_lower = m.lower_bound_norm(&witness)?;
    let ratio_lower = lhs_lower / rhs_result.certified_upper;
    Ok(GapCertificate {
        schema: CERT_SCHEMA.to_string(),
        n,
        d: b1.rows(),
        violation: lhs_lower > rhs_result.certified_upper,
        a1,
        a2,
        a3,
        b1: b1.clone(),
        b2: b2.clone(),
        witness,
        lhs_lower,
        rhs_result,
        ratio_lower,
        seed,
        search_meta: meta,
    })
}

/// Deterministic audit of a certificate, independent of any search state:
/// the left side is re-taken from the stored witness (iteration-free), the
/// right side re-certified on a fresh grid. The verdict comes from those
/// two recomputed numbers alone; stored values are ignored.
pub fn certify(cert: &GapCertificate, fine_grid: usize) -> Result<CertifiedVerdict> {
    if cert.schema != CERT_SCHEMA {
        return Err(Error::MalformedCertificate(format!(
            "schema {:?}, expected {CERT_SCHEMA:?}",
            cert.schema
        )));
    }
    if cert.a1.rows() != cert.n || cert.b1.rows() != cert.d {
        return Err(Error::MalformedCertificate(
            "stored sizes disagree with stored matrices".into(),
        ));
    }
    check_a_triple(&cert.a1, &cert.a2, &cert.a3)?;
    check_b_pair(&cert.b1, &cert.b2)?;
    if cert.witness.len() != cert.n * cert.d {
        return Err(Error::MalformedCertificate(format!(
            "witness has {} entries, expected {}",
            cert.witness.len(),
            cert.n * cert.d
        )));
    }
    let m = assemble_lhs(&cert.a1, &cert.a2, &cert.a3, &cert.b1, &cert.b2);
    let lhs_lower = m.lower_bound_norm(&cert.witness)?;
    let rhs = rhs_norm(&cert.a1, &cert.a2, &cert.a3, fine_grid)?;
    let ratio_lower = lhs_lower / rhs.certified_upper;
    Ok(CertifiedVerdict {
        violation: lhs_lower > rhs.certified_upper,
        lhs_lower,
        rhs,
        ratio_lower,
    })
}

/// Reassembles a violating certificate as an explicit counterexample: the
/// Parrott triple over the stored unitaries and the homogeneous
/// three-variable pencil, with every certificate quantity recomputed
/// through the operator-tuple route and cross-checked. Fails loudly on any
/// inconsistency.
pub fn assemble_counterexample(
    cert: &GapCertificate,
    polydisk_grid: usize,
) -> Result<(ContractionTuple, MatrixPolynomial, CounterexampleReport)> {
    let verdict = certify(cert, cert.rhs_result.grid_points_per_dim)?;
    if !verdict.violation {
        return Err(Error::Inconsistency(
            "certificate does not certify a violation".into(),
        ));
    }
    let tuple = parrott_triple(&cert.b1, &cert.b2)?;
    let pencil = MatrixPolynomial::linear_pencil(&[
        cert.a1.clone(),
        cert.a2.clone(),
        cert.a3.clone(),
    ])?;

    let evaluated = pencil.eval_tuple(&tuple)?;
    let lhs_block_norm = evaluated.op_norm()?;

    // the evaluated operator inherits the strict block pattern of the
    // triple: within every 2d-block only the lower-left d-block may be
    // populated, exactly
    let d2 = tuple.dim();
    let d = d2 / 2;
    for r in 0..evaluated.rows() {
        for c in 0..evaluated.cols() {
            if (r % d2) < d || (c % d2) >= d {
                let e = evaluated.get(r, c);
                if e.re != 0.0 || e.im != 0.0 {
                    return Err(Error::Inconsistency(format!(
                        "upper block entry ({r}, {c}) is {e}, expected exact zero"
                    )));
                }
            }
        }
    }

    if lhs_block_norm < cert.lhs_lower - 1e-10 {
        return Err(Error::Inconsistency(format!(
            "‖L(T)‖ = {lhs_block_norm} under the certified lower bound {}",
            cert.lhs_lower
        )));
    }
    let (lhs_direct, _) = lhs_norm(&cert.a1, &cert.a2, &cert.a3, &cert.b1, &cert.b2)?;
    if (lhs_block_norm - lhs_direct).abs() > 1e-10 * lhs_direct.max(1.0) {
        return Err(Error::Inconsistency(format!(
            "‖L(T)‖ = {lhs_block_norm} disagrees with the assembled block norm {lhs_direct}"
        )));
    }

    let polydisk3 = norms::polydisk_sup(&pencil, polydisk_grid)?;
    // the three-variable scan can never observe more than the two-variable
    // certificate allows
    if polydisk3.best_value > verdict.rhs.certified_upper + 1e-9 {
        return Err(Error::Inconsistency(format!(
            "three-variable scan reached {} above the certified bound {}",
            polydisk3.best_value, verdict.rhs.certified_upper
        )));
    }
    if lhs_block_norm <= verdict.rhs.certified_upper {
        return Err(Error::Inconsistency(
            "reassembled left side does not exceed the certified right side".into(),
        ));
    }

    let report = CounterexampleReport {
        lhs_block_norm,
        lhs_lower: verdict.lhs_lower,
        rhs_certified_upper: verdict.rhs.certified_upper,
        ratio: lhs_block_norm / verdict.rhs.certified_upper,
        polydisk3,
    };
    Ok((tuple, pencil, report))
}

mod cvec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        v: &[Complex64],
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|e| [e.re, e.im]).collect();
        pairs.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        Ok(pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }
}

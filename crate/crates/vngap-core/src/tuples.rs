//! Commuting contraction tuples: the Parrott triple built from a pair of
//! non-commuting unitaries, and seeded random commuting tuples for the
//! property suites.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{commutator_norm, ComplexMatrix};

/// Default tolerance on `‖T_k‖ ≤ 1 + tol`.
pub const DEFAULT_CONTRACTION_TOL: f64 = 1e-10;
/// Default tolerance on pairwise commutator norms.
pub const DEFAULT_COMMUTATIVITY_TOL: f64 = 1e-8;
/// Unitarity tolerance applied to the blocks of a Parrott triple.
pub const PARROTT_UNITARY_TOL: f64 = 1e-10;

/// Norm shave applied by [`random_commuting_tuple`] so rounding can never
/// push an operator past norm one.
const RANDOM_TUPLE_MARGIN: f64 = 1e-6;

/// A tuple of operators on one finite-dimensional space, carrying the
/// tolerances it is expected to satisfy. Construction only checks shapes;
/// [`ContractionTuple::validate`] checks the norm and commutator bounds and
/// reports margins, so invalid tuples can be built and then rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionTuple {
    operators: Vec<ComplexMatrix>,
    commutativity_tol: f64,
    contraction_tol: f64,
}

/// Outcome of [`ContractionTuple::validate`]: per-operator norms and
/// per-pair commutator norms, with the overall accept/reject verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub operator_norms: Vec<f64>,
    /// `1 + contraction_tol − ‖T_k‖` per operator; negative means rejected.
    pub norm_margins: Vec<f64>,
    /// `((k, j), ‖T_kT_j − T_jT_k‖)` for every pair `k < j`.
    pub commutators: Vec<((usize, usize), f64)>,
    pub contraction_tol: f64,
    pub commutativity_tol: f64,
    pub accepted: bool,
}

impl ContractionTuple {
    /// Shape-checks only; run [`validate`](Self::validate) for the bounds.
    pub fn new(
        operators: Vec<ComplexMatrix>,
        commutativity_tol: f64,
        contraction_tol: f64,
    ) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::DegenerateInput("tuple needs at least one operator".into()));
        }
        let dim = operators[0].rows();
        for (k, op) in operators.iter().enumerate() {
            if !op.is_square() || op.rows() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "operator {k} is {}x{}, expected {dim}x{dim}",
                    op.rows(),
                    op.cols()
                )));
            }
        }
        Ok(Self {
            operators,
            commutativity_tol,
            contraction_tol,
        })
    }

    pub fn num_operators(&self) -> usize {
        self.operators.len()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn operator(&self, k: usize) -> &ComplexMatrix {
        &self.operators[k]
    }

    pub fn commutativity_tol(&self) -> f64 {
        self.commutativity_tol
    }

    pub fn contraction_tol(&self) -> f64 {
        self.contraction_tol
    }

    /// Checks every invariant the tuple claims and reports the margins.
    /// Pure and idempotent; validation failures live in the report, the
    /// error path is numerical non-convergence only.
    pub fn validate(&self) -> Result<ValidationReport> {
        let mut operator_norms = Vec::with_capacity(self.operators.len());
        let mut norm_margins = Vec::with_capacity(self.operators.len());
        for op in &self.operators {
            let n = op.op_norm()?;
            operator_norms.push(n);
            norm_margins.push(1.0 + self.contraction_tol - n);
        }
        let mut commutators = Vec::new();
        for k in 0..self.operators.len() {
            for j in k + 1..self.operators.len() {
                let c = commutator_norm(&self.operators[k], &self.operators[j])?;
                commutators.push(((k, j), c));
            }
        }
        let accepted = norm_margins.iter().all(|&m| m >= 0.0)
            && commutators.iter().all(|&(_, c)| c <= self.commutativity_tol);
        Ok(ValidationReport {
            operator_norms,
            norm_margins,
            commutators,
            contraction_tol: self.contraction_tol,
            commutativity_tol: self.commutativity_tol,
            accepted,
        })
    }
}

/// The Parrott triple over a pair of unitaries `b1, b2` on `ℂ^d`: three
/// operators on `ℂ^{2d}` of the block form `[[0, 0], [C_k, 0]]` with lower
/// blocks `b1`, `b2` and the identity. All pairwise products vanish exactly
/// (each product entry is a sum of terms with a zero factor), so the triple
/// commutes with tolerance zero, and each operator has norm one.
pub fn parrott_triple(b1: &ComplexMatrix, b2: &ComplexMatrix) -> Result<ContractionTuple> {
    for (name, b) in [("b1", b1), ("b2", b2)] {
        if !b.is_square() {
            return Err(Error::DimensionMismatch(format!("{name} must be square")));
        }
        let defect = b.unitary_defect()?;
        if defect > PARROTT_UNITARY_TOL {
            return Err(Error::NotUnitary {
                defect,
                tol: PARROTT_UNITARY_TOL,
            });
        }
    }
    if b1.rows() != b2.rows() {
        return Err(Error::DimensionMismatch(format!(
            "b1 is {}x{}, b2 is {}x{}",
            b1.rows(),
            b1.cols(),
            b2.rows(),
            b2.cols()
        )));
    }
    let d = b1.rows();
    if d < 2 {
        return Err(Error::DegenerateInput(
            "the block space must have dimension at least 2".into(),
        ));
    }
    let blocks = [b1.clone(), b2.clone(), ComplexMatrix::identity(d)];
    let operators = blocks.iter().map(lower_left_embed).collect();
    ContractionTuple::new(operators, 0.0, DEFAULT_CONTRACTION_TOL)
}

fn lower_left_embed(block: &ComplexMatrix) -> ComplexMatrix {
    let d = block.rows();
    let mut t = ComplexMatrix::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            t.set(d + r, c, block.get(r, c));
        }
    }
    t
}

/// The default non-commuting unitary pair: `[[0,1],[1,0]]` and
/// `[[1,0],[0,−1]]`. Both Hermitian and unitary, with commutator norm 2,
/// the largest possible among unitaries.
pub fn pauli_pair() -> (ComplexMatrix, ComplexMatrix) {
    let b1 = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
        .expect("fixed 2x2 literal");
    let b2 = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]])
        .expect("fixed 2x2 literal");
    (b1, b2)
}

/// Seeded commuting tuple: each operator is a random polynomial of degree
/// at most 3 in one shared random matrix, normalized to norm `1 − 1e-6`.
/// Polynomials of a single matrix commute exactly in exact arithmetic, so
/// commutativity holds by construction rather than by numerical repair.
/// Deterministic per seed.
pub fn random_commuting_tuple(n_vars: usize, dim: usize, seed: u64) -> Result<ContractionTuple> {
    if n_vars == 0 || dim == 0 {
        return Err(Error::DegenerateInput(
            "need at least one variable and dimension at least one".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shared = random_matrix(&mut rng, dim);
    let mut operators = Vec::with_capacity(n_vars);
    for _ in 0..n_vars {
        // redraw until the polynomial of `shared` is comfortably nonzero
        let op = loop {
            let coeffs: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut acc = ComplexMatrix::identity(dim).scale(coeffs[0]);
            let mut power = ComplexMatrix::identity(dim);
            for &c in &coeffs[1..] {
                power = power.matmul(&shared)?;
                acc = acc.add(&power.scale(c))?;
            }
            let norm = acc.op_norm()?;
            if norm > 1e-8 {
                break acc.scale(Complex64::new((1.0 - RANDOM_TUPLE_MARGIN) / norm, 0.0));
            }
        };
        operators.push(op);
    }
    ContractionTuple::new(
        operators,
        DEFAULT_COMMUTATIVITY_TOL,
        DEFAULT_CONTRACTION_TOL,
    )
}

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let entries = (0..dim * dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(dim, dim, entries).expect("finite random entries")
}

//! Matrix-valued polynomials in several complex variables, with evaluation
//! at scalar points and at operator tuples via Kronecker products.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix};
use crate::tuples::ContractionTuple;

/// Exponent vector `t` of a monomial `z^t = Π z_k^{t_k}`. Ordered
/// lexicographically so term maps iterate deterministically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        Self(components)
    }

    /// Unit index `e_k` in `n_vars` variables.
    pub fn unit(n_vars: usize, k: usize) -> Self {
        let mut v = vec![0; n_vars];
        v[k] = 1;
        Self(v)
    }

    pub fn zero(n_vars: usize) -> Self {
        Self(vec![0; n_vars])
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|t| = Σ t_k`.
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// `P(z) = Σ_t A_t z^t` with square matrix coefficients of one common size.
/// Canonical form: exactly-zero coefficients are never stored, so degree and
/// homogeneity queries are syntactic.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    num_vars: usize,
    coeff_dim: usize,
    terms: BTreeMap<MultiIndex, ComplexMatrix>,
}

impl MatrixPolynomial {
    /// Builds a polynomial from `(multi-index, coefficient)` pairs.
    /// Duplicate indices are summed; exact-zero coefficients are dropped.
    pub fn new(
        num_vars: usize,
        coeff_dim: usize,
        terms: impl IntoIterator<Item = (MultiIndex, ComplexMatrix)>,
    ) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::DegenerateInput("polynomial needs at least one variable".into()));
        }
        if coeff_dim == 0 {
            return Err(Error::DegenerateInput("coefficient dimension must be positive".into()));
        }
        let mut map: BTreeMap<MultiIndex, ComplexMatrix> = BTreeMap::new();
        for (idx, coeff) in terms {
            if idx.num_vars() != num_vars {
                return Err(Error::ArityMismatch(format!(
                    "multi-index has {} components, polynomial has {num_vars} variables",
                    idx.num_vars()
                )));
            }
            if !coeff.is_square() || coeff.rows() != coeff_dim {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient is {}x{}, expected {coeff_dim}x{coeff_dim}",
                    coeff.rows(),
                    coeff.cols()
                )));
            }
            match map.entry(idx) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(coeff);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let summed = e.get().add(&coeff)?;
                    *e.get_mut() = summed;
                }
            }
        }
        map.retain(|_, coeff| !coeff.is_zero());
        Ok(Self {
            num_vars,
            coeff_dim,
            terms: map,
        })
    }

    pub fn zero(num_vars: usize, coeff_dim: usize) -> Result<Self> {
        Self::new(num_vars, coeff_dim, [])
    }

    /// The homogeneous degree-one pencil `L(z) = Σ_k A_k z_k`. Rejects an
    /// all-zero coefficient list, which would be degenerate downstream.
    pub fn linear_pencil(coeffs: &[ComplexMatrix]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::DegenerateInput("pencil needs at least one coefficient".into()));
        }
        if coeffs.iter().all(ComplexMatrix::is_zero) {
            return Err(Error::DegenerateInput("all-zero pencil".into()));
        }
        let n = coeffs.len();
        let dim = coeffs[0].rows();
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| (MultiIndex::unit(n, k), a.clone()));
        Self::new(n, dim, terms)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn coeff_dim(&self) -> usize {
        self.coeff_dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &ComplexMatrix)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Max total degree over stored terms; the zero polynomial has none.
    pub fn degree(&self) -> Result<u32> {
        self.terms
            .keys()
            .map(MultiIndex::total_degree)
            .max()
            .ok_or_else(|| Error::DegenerateInput("degree of the zero polynomial".into()))
    }

    /// True iff every stored term has total degree exactly one.
    pub fn is_homogeneous_linear(&self) -> bool {
        self.terms.keys().all(|t| t.total_degree() == 1)
    }

    /// `Σ_t A_t z^t` at a scalar point. The zero polynomial evaluates to the
    /// zero matrix.
    pub fn eval_scalar(&self, z: &[Complex64]) -> Result<ComplexMatrix> {
        if z.len() != self.num_vars {
            return Err(Error::ArityMismatch(format!(
                "point has {} components, polynomial has {} variables",
                z.len(),
                self.num_vars
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.coeff_dim, self.coeff_dim);
        for (idx, coeff) in &self.terms {
            let mut factor = Complex64::ONE;
            for (&e, &zk) in idx.components().iter().zip(z) {
                factor *= zk.powu(e);
            }
            acc = acc.add(&coeff.scale(factor))?;
        }
        Ok(acc)
    }

    /// `P(T) = Σ_t A_t ⊗ T^t` with `T^t = Π_k T_k^{t_k}`, the monomials
    /// taken in fixed variable order with per-variable squaring.
    ///
    /// For degree two and above the monomials are only well defined when the
    /// tuple commutes, so validation is enforced; affine polynomials are
    /// order-free and evaluate on any tuple (which is exactly what the
    /// scalar-affine property suite needs).
    pub fn eval_tuple(&self, tuple: &ContractionTuple) -> Result<ComplexMatrix> {
        if tuple.num_operators() != self.num_vars {
            return Err(Error::ArityMismatch(format!(
                "tuple has {} operators, polynomial has {} variables",
                tuple.num_operators(),
                self.num_vars
            )));
        }
        if self.degree().unwrap_or(0) >= 2 {
            let report = tuple.validate()?;
            if !report.accepted {
                return Err(Error::InvalidTuple(format!(
                    "tuple fails validation (norms {:?}, commutators {:?})",
                    report.operator_norms, report.commutators
                )));
            }
        }
        let out_dim = self.coeff_dim * tuple.dim();
        let mut acc = ComplexMatrix::zeros(out_dim, out_dim);
        for (idx, coeff) in &self.terms {
            let monomial = tuple_monomial(tuple, idx)?;
            acc = acc.add(&kron(coeff, &monomial))?;
        }
        Ok(acc)
    }

    /// Coefficient-wise scaling; an exactly-zero result drops its terms.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(idx, coeff)| (idx.clone(), coeff.scale(c)));
        Self::new(self.num_vars, self.coeff_dim, terms.collect::<Vec<_>>())
    }

    /// Term-wise sum of two polynomials over the same variables and
    /// coefficient size.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.num_vars != other.num_vars {
            return Err(Error::ArityMismatch(format!(
                "{} vs {} variables",
                self.num_vars, other.num_vars
            )));
        }
        if self.coeff_dim != other.coeff_dim {
            return Err(Error::DimensionMismatch(format!(
                "coefficient sizes {} vs {}",
                self.coeff_dim, other.coeff_dim
            )));
        }
        let terms = self
            .terms
            .iter()
            .chain(other.terms.iter())
            .map(|(idx, coeff)| (idx.clone(), coeff.clone()))
            .collect::<Vec<_>>();
        Self::new(self.num_vars, self.coeff_dim, terms)
    }
}

fn tuple_monomial(tuple: &ContractionTuple, idx: &MultiIndex) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(tuple.dim());
    for (k, &e) in idx.components().iter().enumerate() {
        if e > 0 {
            acc = acc.matmul(&tuple.operator(k).pow(e)?)?;
        }
    }
    Ok(acc)
}

//! File-level JSON schemas shared between the library and the CLI:
//! polynomials, contraction tuples, and unitary pairs. Matrices embedded in
//! certificates serialize as nested `[re, im]` pair arrays; polynomial
//! coefficients split into separate real and imaginary matrices. Canonical
//! serialization (struct field order, shortest round-trip floats) makes the
//! SHA-256 input digests stable across platforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::poly::{MatrixPolynomial, MultiIndex};
use crate::tuples::ContractionTuple;

pub const POLYNOMIAL_SCHEMA: &str = "vn-polynomial/1";
pub const TUPLE_SCHEMA: &str = "vn-tuple/1";
pub const REPORT_SCHEMA: &str = "vn-inequality-report/1";
pub const SUITE_SCHEMA: &str = "vn-suite-report/1";
pub const SUP_RESULT_SCHEMA: &str = "vn-sup-result/1";

/// One polynomial term: the exponent vector and the coefficient split into
/// real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialTermJson {
    pub multi_index: Vec<u32>,
    pub coeff_real: Vec<Vec<f64>>,
    pub coeff_imag: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub num_vars: usize,
    pub coeff_dim: usize,
    pub terms: Vec<PolynomialTermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub num_operators: usize,
    pub dim: usize,
    pub operators: Vec<ComplexMatrix>,
    pub commutativity_tol: f64,
    pub contraction_tol: f64,
}

/// Input file for a caller-supplied unitary pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BPairJson {
    pub b1: ComplexMatrix,
    pub b2: ComplexMatrix,
}

impl From<&MatrixPolynomial> for PolynomialJson {
    fn from(p: &MatrixPolynomial) -> Self {
        let terms = p
            .terms()
            .map(|(idx, coeff)| {
                let n = coeff.rows();
                let part = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
                    (0..n)
                        .map(|r| (0..n).map(|c| f(&coeff.get(r, c))).collect())
                        .collect()
                };
                PolynomialTermJson {
                    multi_index: idx.components().to_vec(),
                    coeff_real: part(|e| e.re),
                    coeff_imag: part(|e| e.im),
                }
            })
            .collect();
        Self {
            schema: Some(POLYNOMIAL_SCHEMA.to_string()),
            num_vars: p.num_vars(),
            coeff_dim: p.coeff_dim(),
            terms,
        }
    }
}

impl PolynomialJson {
    pub fn to_polynomial(&self) -> Result<MatrixPolynomial> {
        if let Some(schema) = &self.schema {
            if schema != POLYNOMIAL_SCHEMA {
                return Err(Error::DegenerateInput(format!(
                    "polynomial schema {schema:?}, expected {POLYNOMIAL_SCHEMA:?}"
                )));
            }
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let rows = t.coeff_real.len();
                if t.coeff_imag.len() != rows
                    || t.coeff_real.iter().any(|r| r.len() != rows)
                    || t.coeff_imag.iter().any(|r| r.len() != rows)
                {
                    return Err(Error::DimensionMismatch(
                        "coefficient parts must be square and equally sized".into(),
                    ));
                }
                let entries = t
                    .coeff_real
                    .iter()
                    .flatten()
                    .zip(t.coeff_imag.iter().flatten())
                    .map(|(&re, &im)| Complex64::new(re, im))
                    .collect();
                Ok((
                    MultiIndex::new(t.multi_index.clone()),
                    ComplexMatrix::new(rows, rows, entries)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixPolynomial::new(self.num_vars, self.coeff_dim, terms)
    }
}

impl From<&ContractionTuple> for TupleJson {
    fn from(t: &ContractionTuple) -> Self {
        Self {
            schema: Some(TUPLE_SCHEMA.to_string()),
            num_operators: t.num_operators(),
            dim: t.dim(),
            operators: t.operators().to_vec(),
            commutativity_tol: t.commutativity_tol(),
            contraction_tol: t.contraction_tol(),
        }
    }
}

impl TupleJson {
    pub fn to_tuple(&self) -> Result<ContractionTuple> {
        if let Some(schema) = &self.schema {
            if schema != TUPLE_SCHEMA {
                return Err(Error::DegenerateInput(format!(
                    "tuple schema {schema:?}, expected {TUPLE_SCHEMA:?}"
                )));
            }
        }
        if self.operators.len() != self.num_operators {
            return Err(Error::ArityMismatch(format!(
                "{} operators stored, header says {}",
                self.operators.len(),
                self.num_operators
            )));
        }
        if self.operators.iter().any(|op| op.rows() != self.dim) {
            return Err(Error::DimensionMismatch(
                "operator size disagrees with the header dim".into(),
            ));
        }
        ContractionTuple::new(
            self.operators.clone(),
            self.commutativity_tol,
            self.contraction_tol,
        )
    }
}

/// SHA-256 hex digest of the canonical `(polynomial, tuple)` serialization.
pub fn digest_inputs(p: &MatrixPolynomial, t: &ContractionTuple) -> String {
    #[derive(Serialize)]
    struct Inputs<'a> {
        polynomial: &'a PolynomialJson,
        tuple: &'a TupleJson,
    }
    let inputs = Inputs {
        polynomial: &PolynomialJson::from(p),
        tuple: &TupleJson::from(t),
    };
    let canonical = serde_json::to_string(&inputs).expect("schema types always serialize");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

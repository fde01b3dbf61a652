//! Numerical construction, search, and certification of violations of the
//! generalized von Neumann inequality for linear matrix pencils of three
//! commuting contractions, together with the property suites for every
//! regime where the inequality provably holds.
//!
//! The inequality compares `‖P(T)‖`, a matrix polynomial applied to a
//! commuting contraction tuple via Kronecker products, against the
//! supremum of `‖P(z)‖` over the closed polydisk. It always holds in one
//! or two variables and for scalar affine polynomials in any number of
//! variables; in three variables it can fail already for homogeneous
//! degree-one pencils. This crate finds such failures and packages each
//! one as a self-contained, recomputable [`gap::GapCertificate`].

pub mod error;
pub mod gap;
pub mod linalg;
pub mod norms;
pub mod poly;
pub mod schema;
pub mod tuples;
pub mod verify;

pub use error::{Error, Result};

/// Deterministic per-task seed derivation (SplitMix64 step), so restarts
/// and trials can run concurrently with reproducible streams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

//! Suprema of matrix polynomials over the polydisk, computed on the torus
//! with a certified upper bound: grid maximum plus a Lipschitz slack term
//! that dominates whatever the grid missed.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MAX_POWER_ITERATIONS, RAYLEIGH_RTOL};
use crate::poly::{MatrixPolynomial, MultiIndex};

/// Angular resolution at which coordinate refinement stops.
pub const REFINE_ANGLE_TOL: f64 = 1e-10;
/// Default grid for search loops and inequality checks (points per dimension).
pub const DEFAULT_GRID: usize = 64;
/// Default grid for final certification of two-variable pencils.
pub const DEFAULT_FINE_GRID: usize = 512;

const MAX_REFINE_SWEEPS: usize = 50;
const PAR_SCAN_THRESHOLD: usize = 32_768;
const TAU: f64 = std::f64::consts::TAU;

/// A point on the torus, one angle in `[0, 2π)` per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub angles: Vec<f64>,
}

/// Which domain the supremum was requested over. The polydisk case is
/// reduced to the torus by the maximum principle; the result records that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupDomain {
    Torus,
    PolydiskViaTorus,
}

/// Result of a certified torus scan.
///
/// `certified_upper = grid_max + (grid_step / 2) · lipschitz_bound` is a
/// true upper bound for the supremum: every torus point lies within half a
/// grid step per coordinate of a scanned point, and the per-coordinate
/// angular derivative of the matrix function is bounded by the per-variable
/// Lipschitz constants summed in `lipschitz_bound`. `best_value` is the
/// largest actually evaluated value (grid, then refinement) and never
/// exceeds `certified_upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusSupResult {
    pub best_value: f64,
    pub best_point: TorusPoint,
    pub certified_upper: f64,
    pub grid_points_per_dim: usize,
    pub grid_step: f64,
    pub grid_max: f64,
    pub lipschitz_bound: f64,
    pub domain: SupDomain,
}

/// Certified supremum of `‖p(λ)‖` over the torus.
///
/// Scans the uniform angular grid (lexicographically smallest maximizer
/// wins ties), optionally refines the best point by coordinate-wise
/// golden-section ascent until the angular change drops below
/// [`REFINE_ANGLE_TOL`], and certifies via the Lipschitz slack. Refinement
/// can only raise `best_value`; the certificate depends on the grid alone.
pub fn torus_sup(p: &MatrixPolynomial, grid_points_per_dim: usize, refine: bool) -> Result<TorusSupResult> {
    torus_sup_impl(p, grid_points_per_dim, refine, SupDomain::Torus)
}

/// Supremum of `‖p(z)‖` over the closed polydisk. Polynomial entries are
/// analytic, so the supremum is attained on the torus and the scan is the
/// same; the result documents the reduction.
pub fn polydisk_sup(p: &MatrixPolynomial, grid_points_per_dim: usize) -> Result<TorusSupResult> {
    torus_sup_impl(p, grid_points_per_dim, true, SupDomain::PolydiskViaTorus)
}

/// Grid maximum only: the uncertified estimate search loops run on.
pub(crate) fn torus_grid_max(p: &MatrixPolynomial, grid_points_per_dim: usize) -> Result<f64> {
    check_scan_inputs(p, grid_points_per_dim)?;
    let (value, _) = scan_grid(p, grid_points_per_dim)?;
    Ok(value)
}

fn check_scan_inputs(p: &MatrixPolynomial, grid: usize) -> Result<()> {
    if p.is_zero() {
        return Err(Error::DegenerateInput(
            "supremum of the zero polynomial is a degenerate 0/0 downstream".into(),
        ));
    }
    if grid < 4 {
        return Err(Error::GridTooCoarse(grid));
    }
    Ok(())
}

fn torus_sup_impl(
    p: &MatrixPolynomial,
    grid: usize,
    refine: bool,
    domain: SupDomain,
) -> Result<TorusSupResult> {
    check_scan_inputs(p, grid)?;
    let h = TAU / grid as f64;

    // Per-coordinate derivative bounds D_k = Σ_t t_k ‖A_t‖.
    let mut per_coord = vec![0.0f64; p.num_vars()];
    for (idx, coeff) in p.terms() {
        let norm = coeff.op_norm()?;
        for (k, &e) in idx.components().iter().enumerate() {
            per_coord[k] += e as f64 * norm;
        }
    }
    let lipschitz_bound: f64 = per_coord.iter().sum();

    let (grid_max, argmax) = scan_grid(p, grid)?;
    let mut angles: Vec<f64> = argmax.iter().map(|&j| j as f64 * h).collect();
    let mut best_value = grid_max;

    if refine {
        let mut kernel = NormKernel::new(p);
        for _sweep in 0..MAX_REFINE_SWEEPS {
            let mut moved = false;
            for k in 0..angles.len() {
                let (angle, value) = golden_ascent(&mut kernel, &mut angles, k, h, best_value)?;
                if value > best_value {
                    best_value = value;
                }
                if (angle - angles[k]).abs() >= REFINE_ANGLE_TOL {
                    moved = true;
                }
                angles[k] = angle;
            }
            if !moved {
                break;
            }
        }
    }

    // Wrap into [0, 2π) and make best_value recomputable from the point.
    for a in angles.iter_mut() {
        *a = a.rem_euclid(TAU);
        if *a >= TAU {
            *a = 0.0;
        }
    }
    let z: Vec<Complex64> = angles.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
    best_value = p.eval_scalar(&z)?.op_norm()?;

    let certified_upper = grid_max + 0.5 * h * lipschitz_bound;
    // with zero slack (constant polynomials) the recomputation route can
    // land an ulp above the scan route; the certificate wins
    debug_assert!(best_value - certified_upper <= 1e-10 * certified_upper.max(1.0));
    if best_value > certified_upper {
        best_value = certified_upper;
    }
    Ok(TorusSupResult {
        best_value,
        best_point: TorusPoint { angles },
        certified_upper,
        grid_points_per_dim: grid,
        grid_step: h,
        grid_max,
        lipschitz_bound,
        domain,
    })
}

/// Drops the last variable of a homogeneous linear pencil by fixing its
/// phase to one: `Σ_k A_k z_k` becomes `Σ_{k<N} A_k λ_k + A_N`. The torus
/// supremum is unchanged because a common unit factor can be pulled out of
/// the pencil without moving the operator norm.
pub fn phase_reduction(pencil: &MatrixPolynomial) -> Result<MatrixPolynomial> {
    if !pencil.is_homogeneous_linear() {
        return Err(Error::DegenerateInput(
            "phase reduction needs a homogeneous linear pencil".into(),
        ));
    }
    let n = pencil.num_vars();
    if n < 2 {
        return Err(Error::DegenerateInput(
            "phase reduction needs at least two variables".into(),
        ));
    }
    let terms: Vec<(MultiIndex, ComplexMatrix)> = pencil
        .terms()
        .map(|(idx, coeff)| {
            let k = idx
                .components()
                .iter()
                .position(|&e| e == 1)
                .expect("homogeneous linear term has a unit exponent");
            let new_idx = if k == n - 1 {
                MultiIndex::zero(n - 1)
            } else {
                MultiIndex::unit(n - 1, k)
            };
            (new_idx, coeff.clone())
        })
        .collect();
    MatrixPolynomial::new(n - 1, pencil.coeff_dim(), terms)
}

/// Scans the full grid, returning the maximum and the lexicographically
/// smallest maximizing index tuple. Large multi-variable scans split on the
/// first coordinate; per-slice results are reduced in slice order, so worker
/// count never changes the outcome.
fn scan_grid(p: &MatrixPolynomial, grid: usize) -> Result<(f64, Vec<usize>)> {
    let n_vars = p.num_vars();
    let total = grid.checked_pow(n_vars as u32).ok_or_else(|| {
        Error::DegenerateInput(format!("grid {grid}^{n_vars} overflows the scan index"))
    })?;
    let roots: Vec<Complex64> = (0..grid)
        .map(|j| Complex64::from_polar(1.0, j as f64 * TAU / grid as f64))
        .collect();

    if n_vars >= 2 && total >= PAR_SCAN_THRESHOLD {
        let slices: Vec<Result<(f64, Vec<usize>)>> = (0..grid)
            .into_par_iter()
            .map(|j0| scan_slice(p, &roots, j0))
            .collect();
        let mut best = f64::NEG_INFINITY;
        let mut arg = vec![0usize; n_vars];
        for slice in slices {
            let (value, idx) = slice?;
            if value > best {
                best = value;
                arg = idx;
            }
        }
        Ok((best, arg))
    } else {
        let mut kernel = NormKernel::new(p);
        let mut idx = vec![0usize; n_vars];
        let mut best = f64::NEG_INFINITY;
        let mut arg = idx.clone();
        loop {
            let value = kernel.norm_at_grid(&roots, &idx)?;
            if value > best {
                best = value;
                arg = idx.clone();
            }
            if !odometer_step(&mut idx, grid) {
                break;
            }
        }
        Ok((best, arg))
    }
}

/// Serial scan of the sub-grid with the first coordinate fixed.
fn scan_slice(p: &MatrixPolynomial, roots: &[Complex64], j0: usize) -> Result<(f64, Vec<usize>)> {
    let n_vars = p.num_vars();
    let grid = roots.len();
    let mut kernel = NormKernel::new(p);
    let mut idx = vec![0usize; n_vars];
    idx[0] = j0;
    let mut best = f64::NEG_INFINITY;
    let mut arg = idx.clone();
    loop {
        let value = kernel.norm_at_grid(roots, &idx)?;
        if value > best {
            best = value;
            arg = idx.clone();
        }
        if !odometer_step(&mut idx[1..], grid) {
            break;
        }
    }
    Ok((best, arg))
}

/// Advances a little-endian-last odometer; false when it wraps around.
fn odometer_step(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Golden-section ascent for coordinate `k` on `[θ_k − h, θ_k + h]`.
/// Returns the bracket midpoint and its value if it improves on
/// `current_best`, otherwise the original angle.
fn golden_ascent(
    kernel: &mut NormKernel,
    angles: &mut [f64],
    k: usize,
    half_width: f64,
    current_best: f64,
) -> Result<(f64, f64)> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let original = angles[k];
    let mut lo = original - half_width;
    let mut hi = original + half_width;
    let eval = |kernel: &mut NormKernel, angles: &mut [f64], x: f64| -> Result<f64> {
        angles[k] = x;
        kernel.norm_at_angles(angles)
    };
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(kernel, angles, x1)?;
    let mut f2 = eval(kernel, angles, x2)?;
    while hi - lo > REFINE_ANGLE_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(kernel, angles, x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(kernel, angles, x1)?;
        }
    }
    let mid = 0.5 * (lo + hi);
    let fmid = eval(kernel, angles, mid)?;
    angles[k] = original;
    if fmid > current_best {
        Ok((mid, fmid))
    } else {
        Ok((original, current_best))
    }
}

/// Allocation-free evaluator for `‖p(λ)‖` at torus points: accumulates the
/// coefficient sum into a scratch buffer and runs the same Gram power
/// iteration as [`ComplexMatrix::op_norm`], warm-started from the previous
/// point's singular vector (plus a fixed ramp so the start is never trapped
/// near a stale eigenvector). Falls back to the full restart logic in
/// `linalg` on the rare stagnation failure.
struct NormKernel {
    dim: usize,
    n_vars: usize,
    coeffs: Vec<Complex64>,
    exps: Vec<u32>,
    value: Vec<Complex64>,
    gram: Vec<Complex64>,
    v: Vec<Complex64>,
    w: Vec<Complex64>,
    warm: Vec<Complex64>,
}

impl NormKernel {
    fn new(p: &MatrixPolynomial) -> Self {
        let dim = p.coeff_dim();
        let n_vars = p.num_vars();
        let mut coeffs = Vec::with_capacity(p.num_terms() * dim * dim);
        let mut exps = Vec::with_capacity(p.num_terms() * n_vars);
        for (idx, coeff) in p.terms() {
            coeffs.extend_from_slice(coeff.entries());
            exps.extend_from_slice(idx.components());
        }
        Self {
            dim,
            n_vars,
            coeffs,
            exps,
            value: vec![Complex64::ZERO; dim * dim],
            gram: vec![Complex64::ZERO; dim * dim],
            v: vec![Complex64::ZERO; dim],
            w: vec![Complex64::ZERO; dim],
            warm: Vec::new(),
        }
    }

    fn norm_at_grid(&mut self, roots: &[Complex64], idx: &[usize]) -> Result<f64> {
        let grid = roots.len();
        self.value.fill(Complex64::ZERO);
        let nsq = self.dim * self.dim;
        for t in 0..self.exps.len() / self.n_vars {
            // For grid points the monomial phase index is exact arithmetic:
            // (Π_k roots[j_k]^{e_k}) = roots[(Σ_k j_k e_k) mod grid].
            let mut phase = 0usize;
            for (k, &e) in self.exps[t * self.n_vars..(t + 1) * self.n_vars].iter().enumerate() {
                phase = (phase + idx[k] * e as usize) % grid;
            }
            let factor = roots[phase];
            let block = &self.coeffs[t * nsq..(t + 1) * nsq];
            for (acc, &a) in self.value.iter_mut().zip(block) {
                *acc += a * factor;
            }
        }
        self.norm_of_value()
    }

    fn norm_at_angles(&mut self, angles: &[f64]) -> Result<f64> {
        self.value.fill(Complex64::ZERO);
        let nsq = self.dim * self.dim;
        for t in 0..self.exps.len() / self.n_vars {
            let mut factor = Complex64::ONE;
            for (k, &e) in self.exps[t * self.n_vars..(t + 1) * self.n_vars].iter().enumerate() {
                if e > 0 {
                    factor *= Complex64::from_polar(1.0, angles[k] * e as f64);
                }
            }
            let block = &self.coeffs[t * nsq..(t + 1) * nsq];
            for (acc, &a) in self.value.iter_mut().zip(block) {
                *acc += a * factor;
            }
        }
        self.norm_of_value()
    }

    fn norm_of_value(&mut self) -> Result<f64> {
        let n = self.dim;
        // gram = value^H value
        for r in 0..n {
            for c in 0..n {
                let mut acc = Complex64::ZERO;
                for k in 0..n {
                    acc += self.value[k * n + r].conj() * self.value[k * n + c];
                }
                self.gram[r * n + c] = acc;
            }
        }
        if self.gram.iter().all(|e| e.re == 0.0 && e.im == 0.0) {
            return Ok(0.0);
        }

        // start: previous singular vector plus a ramp, or the ramp alone
        for (i, vi) in self.v.iter_mut().enumerate() {
            let ramp = Complex64::new(1.0 + 1e-3 * (i + 1) as f64, 1e-4 * (i + 1) as f64);
            *vi = match self.warm.get(i) {
                Some(&wv) => wv + ramp.scale(0.01),
                None => ramp,
            };
        }
        let vn = self.v.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
        for vi in self.v.iter_mut() {
            *vi /= vn;
        }

        let mut prev = f64::NAN;
        let mut hits = 0u32;
        for _ in 0..MAX_POWER_ITERATIONS {
            let mut rayleigh = 0.0;
            let mut wn_sq = 0.0;
            for r in 0..n {
                let mut acc = Complex64::ZERO;
                for k in 0..n {
                    acc += self.gram[r * n + k] * self.v[k];
                }
                self.w[r] = acc;
                rayleigh += (self.v[r].conj() * acc).re;
                wn_sq += acc.norm_sqr();
            }
            let wn = wn_sq.sqrt();
            if wn == 0.0 {
                break; // kernel hit, let the fallback restart
            }
            for (vi, wi) in self.v.iter_mut().zip(&self.w) {
                *vi = wi / wn;
            }
            if prev.is_finite() && (rayleigh - prev).abs() <= RAYLEIGH_RTOL * rayleigh.abs() {
                hits += 1;
                if hits >= 2 {
                    self.warm = self.v.clone();
                    return Ok(self.apply_norm());
                }
            } else {
                hits = 0;
            }
            prev = rayleigh;
        }

        // nearly degenerate spectrum: plain iteration cannot stagnate in
        // time, go straight to the squared-Gram rescue
        let m = ComplexMatrix::new(n, n, self.value.clone())?;
        let gram = ComplexMatrix::new(n, n, self.gram.clone())?;
        let (norm, vector) = m.squared_gram_rescue(&gram, MAX_POWER_ITERATIONS)?;
        self.warm = vector;
        Ok(norm)
    }

    /// `‖value · v‖` for the converged unit vector.
    fn apply_norm(&self) -> f64 {
        let n = self.dim;
        let mut total = 0.0;
        for r in 0..n {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                acc += self.value[r * n + k] * self.v[k];
            }
            total += acc.norm_sqr();
        }
        total.sqrt()
    }
}

//! Defect functions for the finite-dimensional determinant identities and
//! inequalities the measure relies on. Each returns a number that is zero
//! (identities) or non-negative (inequalities) in exact arithmetic.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HermitianEigen, Lu};
use super::{build_lambda, build_t, build_t_n};
use crate::error::{Error, Result};
use crate::symbol::Symbol;

/// Largest size accepted by [`expansion_defect`].
pub const EXPANSION_MAX: usize = 12;

fn det(m: &ComplexMatrix) -> Result<Complex64> {
    Ok(m.log_det()?.value())
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// `|det(I - AB) - det(I - BA)|`, relative, for `A` n×m and `B` m×n.
pub fn sylvester_defect(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.n_cols() != b.n_rows() || a.n_rows() != b.n_cols() {
        return Err(Error::InvalidArgument("Sylvester needs A n×m and B m×n".into()));
    }
    let ab = &ComplexMatrix::identity(a.n_rows()) - &a.matmul(b);
    let ba = &ComplexMatrix::identity(b.n_rows()) - &b.matmul(a);
    Ok(rel(det(&ab)?, det(&ba)?))
}

/// `|det(I + L) - Σ_J det L_J|`, relative, summing over all principal minors.
pub fn expansion_defect(l: &ComplexMatrix) -> Result<f64> {
    let n = l.n_rows();
    if !l.is_square() || n > EXPANSION_MAX {
        return Err(Error::CapExceeded {
            what: "expansion size",
            requested: n,
            cap: EXPANSION_MAX,
        });
    }
    let mut sum = Complex64::new(1.0, 0.0);
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        sum += det(&l.principal_submatrix(&idx))?;
    }
    let lhs = det(&(&ComplexMatrix::identity(n) + l))?;
    Ok(rel(lhs, sum))
}

/// `det A · det C - det M` for `M = [[A, B], [B*, C]]` split after row `k`.
pub fn fischer_margin(m: &ComplexMatrix, k: usize) -> Result<f64> {
    let n = m.n_rows();
    if !m.is_square() || k == 0 || k >= n {
        return Err(Error::InvalidArgument("Fischer split must satisfy 0 < k < n".into()));
    }
    let a: Vec<usize> = (0..k).collect();
    let c: Vec<usize> = (k..n).collect();
    let da = det(&m.principal_submatrix(&a))?.re;
    let dc = det(&m.principal_submatrix(&c))?.re;
    Ok(da * dc - det(m)?.re)
}

/// `exp(-tr A) - det(I - A)` for Hermitian `A` with spectrum in `[0, 1]`.
pub fn trace_exp_margin(a: &ComplexMatrix) -> Result<f64> {
    let n = a.n_rows();
    let lhs = det(&(&ComplexMatrix::identity(n) - a))?.re;
    Ok((-a.trace().re).exp() - lhs)
}

/// Relative gap between `det [[A, B], [C, D]] / (det A det D)` and
/// `det(I - D⁻¹ C A⁻¹ B)`.
pub fn schur_defect(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> Result<f64> {
    let block = ComplexMatrix::block2x2(a, b, c, d);
    let lhs = (block.log_det()?.log_abs - a.log_det()?.log_abs - d.log_det()?.log_abs).exp();
    let phase = det(&block)? / (det(a)? * det(d)?);
    let lhs = Complex64::from_polar(lhs, phase.arg());
    let ainv_b = Lu::new(a)?.solve(b)?;
    let dinv_c = Lu::new(d)?.solve(c)?;
    let rhs = det(&(&ComplexMatrix::identity(d.n_rows()) - &dinv_c.matmul(&ainv_b)))?;
    Ok(rel(lhs, rhs))
}

/// Smallest eigenvalue of `T_J(φ²) - T_J(φ)²`.
pub fn squared_section_min_eig(phi: &Symbol, index_set: &[i64]) -> Result<f64> {
    let t = build_t(phi, index_set)?;
    let t2 = build_t(&phi.product(phi), index_set)?;
    let diff = &t2 - &t.matmul(&t);
    Ok(HermitianEigen::new(&diff)?.values.first().copied().unwrap_or(0.0))
}

/// Spectrum range `(min, max)` of `T^{-1/2} Λ* T^{-1} Λ T^{-1/2}` with
/// `T = T_N(f)`.
pub fn contraction_spectrum(sym: &Symbol, n: usize, ell: usize) -> Result<(f64, f64)> {
    let t = build_t_n(sym, n);
    let eig = HermitianEigen::new(&t)?;
    if eig.values[0] <= 0.0 {
        return Err(Error::Singular("T_N(f) is not positive definite".into()));
    }
    let inv_sqrt = eig.apply(|l| 1.0 / l.sqrt());
    let lambda = build_lambda(sym, n, ell)?.matrix;
    let tinv = Lu::new(&t)?.inverse()?;
    let m = inv_sqrt
        .matmul(&lambda.adjoint())
        .matmul(&tinv)
        .matmul(&lambda)
        .matmul(&inv_sqrt);
    let vals = HermitianEigen::new(&m)?.values;
    Ok((vals[0], vals[vals.len() - 1]))
}

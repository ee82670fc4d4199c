//! Finite Toeplitz sections `T_J(φ) = [φ̂(i - j)]_{i,j ∈ J}`, the gap block
//! `Λ_{N,ℓ}`, and the Szegő log-integral.

mod identities;
mod matrix;

pub use identities::{
    contraction_spectrum, expansion_defect, fischer_margin, schur_defect, squared_section_min_eig,
    sylvester_defect, trace_exp_margin, EXPANSION_MAX,
};
pub use matrix::{trace_norm, ComplexMatrix, HermitianEigen, LogDet, Lu, SINGULAR_PIVOT};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::{Symbol, QUADRATURE_NODES};

/// Floor applied to `φ` inside the Szegő log-integral.
pub const SZEGO_CLAMP: f64 = 1e-14;

/// Coefficients `f̂(lo), ..., f̂(hi)` indexed from `lo`.
pub(crate) struct LagTable {
    lo: i64,
    values: Vec<Complex64>,
}

impl LagTable {
    pub(crate) fn new(sym: &Symbol, lo: i64, hi: i64) -> LagTable {
        let support = sym.support().map(|b| b as i64);
        let values = (lo..=hi)
            .map(|n| match support {
                Some(b) if n.abs() > b => Complex64::new(0.0, 0.0),
                _ => sym.coeff(n),
            })
            .collect();
        LagTable { lo, values }
    }

    #[inline]
    pub(crate) fn get(&self, n: i64) -> Complex64 {
        self.values[(n - self.lo) as usize]
    }
}

/// `T_J(f)` for a strictly increasing index set `J`. Empty `J` gives the 0×0
/// matrix, whose determinant is 1.
pub fn build_t(sym: &Symbol, index_set: &[i64]) -> Result<ComplexMatrix> {
    if index_set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "index set must be strictly increasing".into(),
        ));
    }
    let Some((&first, &last)) = index_set.first().zip(index_set.last()) else {
        return Ok(ComplexMatrix::zeros(0, 0));
    };
    let span = last - first;
    let lags = LagTable::new(sym, -span, span);
    Ok(ComplexMatrix::from_fn(index_set.len(), index_set.len(), |i, j| {
        lags.get(index_set[i] - index_set[j])
    }))
}

/// `T_N(f)` on `{1, ..., N}`.
pub fn build_t_n(sym: &Symbol, n: usize) -> ComplexMatrix {
    let lags = LagTable::new(sym, -(n as i64), n as i64);
    ComplexMatrix::from_fn(n, n, |i, j| lags.get(i as i64 - j as i64))
}

/// The index set `J_{N,ℓ} = {1..N} ∪ {N+ℓ+1 .. 2N+ℓ}`.
pub fn gap_index_set(n: usize, ell: usize) -> Vec<i64> {
    let (n, ell) = (n as i64, ell as i64);
    (1..=n).chain((n + ell + 1)..=(2 * n + ell)).collect()
}

/// `Λ_{N,ℓ}(f)` with entries `f̂(i - (j + N + ℓ))`; it is the upper-right
/// block of `T_{J_{N,ℓ}}(f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaBlock {
    pub n: usize,
    pub ell: usize,
    pub matrix: ComplexMatrix,
}

pub fn build_lambda(sym: &Symbol, n: usize, ell: usize) -> Result<LambdaBlock> {
    if n == 0 || ell == 0 {
        return Err(Error::InvalidArgument(format!(
            "Λ block needs N >= 1 and ell >= 1 (got N = {n}, ell = {ell})"
        )));
    }
    let off = (n + ell) as i64;
    let lags = LagTable::new(sym, -(off + n as i64), -off + n as i64);
    let matrix = ComplexMatrix::from_fn(n, n, |i, j| lags.get(i as i64 - j as i64 - off));
    Ok(LambdaBlock { n, ell, matrix })
}

/// Closed form of `‖Λ_{N,ℓ}‖²_HS`:
/// `Σ_{k=1}^{N} k |f̂(ℓ+k)|² + Σ_{k=N+1}^{2N-1} (2N-k) |f̂(ℓ+k)|²`.
pub fn hs_norm_sq_lambda(sym: &Symbol, n: usize, ell: usize) -> Result<f64> {
    if n == 0 || ell == 0 {
        return Err(Error::InvalidArgument("N and ell must be >= 1".into()));
    }
    let weight = |k: usize| if k <= n { k } else { 2 * n - k };
    Ok((1..2 * n)
        .map(|k| weight(k) as f64 * sym.coeff((ell + k) as i64).norm_sqr())
        .sum())
}

/// Result of a Szegő log-integral; `clamped` flags nodes where `φ` fell
/// below [`SZEGO_CLAMP`] (the exact integral may be `-inf` there).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SzegoIntegral {
    pub value: f64,
    pub clamped: bool,
}

/// Trapezoid rule for `∫_0^1 log φ(t) dt` on `nodes` equispaced nodes.
pub fn szego_log_integral(phi: impl Fn(f64) -> f64, nodes: usize) -> Result<SzegoIntegral> {
    let values: Vec<f64> = (0..nodes).map(|k| phi(k as f64 / nodes as f64)).collect();
    szego_log_integral_values(&values)
}

/// Same as [`szego_log_integral`] with the default node count.
pub fn szego_log_integral_default(phi: impl Fn(f64) -> f64) -> Result<SzegoIntegral> {
    szego_log_integral(phi, QUADRATURE_NODES)
}

/// Trapezoid rule from precomputed node values (periodic grid).
pub fn szego_log_integral_values(values: &[f64]) -> Result<SzegoIntegral> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
    }
    let mut clamped = false;
    let mut acc = 0.0;
    for (k, &v) in values.iter().enumerate() {
        // Rounding noise around an exact zero is let through to the clamp.
        if v < -1e-12 || v.is_nan() {
            return Err(Error::Hypothesis(format!(
                "log-integrand is negative ({v:e}) at node {k}"
            )));
        }
        let v = if v < SZEGO_CLAMP {
            clamped = true;
            SZEGO_CLAMP
        } else {
            v
        };
        acc += v.ln();
    }
    Ok(SzegoIntegral {
        value: acc / values.len() as f64,
        clamped,
    })
}

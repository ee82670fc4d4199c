//! ψ-mixing: analytic bounds on `ψ(ℓ)` and exhaustive finite-window values.
//!
//! `ψ(ℓ)` is a supremum over every window length, so nothing here computes it
//! exactly. The analytic pair is
//! `1 - exp(-tail/(ℓ+1)) <= ψ(ℓ) <= (tail/τ²) exp(1 + tail/τ²)` with
//! `tail = Σ_{n>ℓ} n |f̂(n)|²`, the upper bound requiring `τ <= f <= 1 - τ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{lu_nonsingular, ratio_from_h, Cylinder};
use crate::symbol::{Remainder, Symbol, TailSum, DEFAULT_TRUNCATION};
use crate::toeplitz::{build_lambda, build_t_n, trace_norm, ComplexMatrix};

/// Default largest window for the exhaustive search.
pub const DEFAULT_WINDOW_CAP: usize = 7;

/// Largest window the exhaustive search accepts at all.
pub const MAX_WINDOW_CAP: usize = 10;

/// Upper bound on `ψ(ℓ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum UpperBound {
    /// `τ <= 0`: the sufficient condition fails.
    NotApplicable,
    /// Tail includes an analytic remainder bound.
    Certified(f64),
    /// Truncated tail without remainder control.
    Approximate(f64),
}

impl UpperBound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            UpperBound::NotApplicable => None,
            UpperBound::Certified(v) | UpperBound::Approximate(v) => Some(v),
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, UpperBound::Certified(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsiBoundReport {
    pub ell: usize,
    pub lower_bound: f64,
    pub upper_bound: UpperBound,
    pub tau: f64,
    pub tail: TailSum,
}

/// Exhaustive `max |R_{N,ℓ}(ε, ε') - 1|` over all pairs of words of length `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteWindowPsi {
    pub ell: usize,
    pub n: usize,
    pub value: f64,
    pub argmax: (Cylinder, Cylinder),
    /// `max ‖H‖₁` over the pairs, when requested.
    pub max_h_trace_norm: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WindowOptions {
    pub cap: usize,
    pub trace_norms: bool,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            cap: DEFAULT_WINDOW_CAP,
            trace_norms: false,
        }
    }
}

fn check_ell(ell: usize) -> Result<()> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ell must be >= 1".into()));
    }
    Ok(())
}

fn tail(sym: &Symbol, ell: usize, truncation: usize) -> Result<TailSum> {
    sym.tail_sum(ell, truncation.max(ell + 1))
}

/// `1 - exp(-tail/(ℓ+1))` from the truncated tail, so still a lower bound.
pub fn psi_lower_bound(sym: &Symbol, ell: usize, truncation: usize) -> Result<f64> {
    check_ell(ell)?;
    Ok(lower_from_tail(&tail(sym, ell, truncation)?))
}

fn lower_from_tail(t: &TailSum) -> f64 {
    -(-t.value / (t.cutoff_ell as f64 + 1.0)).exp_m1()
}

/// `(tail/τ²) exp(1 + tail/τ²)` with `τ` the contraction margin.
pub fn psi_upper_bound(sym: &Symbol, ell: usize, truncation: usize) -> Result<UpperBound> {
    check_ell(ell)?;
    Ok(upper_from_tail(&tail(sym, ell, truncation)?, sym.contraction_margin()))
}

fn upper_from_tail(t: &TailSum, tau: f64) -> UpperBound {
    if tau <= 0.0 {
        return UpperBound::NotApplicable;
    }
    let x = |s: f64| s / (tau * tau);
    let bound = |s: f64| x(s) * (1.0 + x(s)).exp();
    match (t.remainder, t.upper()) {
        (Remainder::Unknown, _) | (_, None) => UpperBound::Approximate(bound(t.value)),
        (_, Some(s)) => UpperBound::Certified(bound(s)),
    }
}

pub fn psi_bounds(sym: &Symbol, ell: usize, truncation: usize) -> Result<PsiBoundReport> {
    check_ell(ell)?;
    let t = tail(sym, ell, truncation)?;
    let tau = sym.contraction_margin();
    Ok(PsiBoundReport {
        ell,
        lower_bound: lower_from_tail(&t),
        upper_bound: upper_from_tail(&t, tau),
        tau,
        tail: t,
    })
}

pub fn psi_bounds_default(sym: &Symbol, ell: usize) -> Result<PsiBoundReport> {
    psi_bounds(sym, ell, DEFAULT_TRUNCATION)
}

/// `1 - det(I - T_N^{-1} Λ* T_N^{-1} Λ)`, the all-ones word's deviation.
pub fn allones_lower_witness(sym: &Symbol, ell: usize, n: usize) -> Result<f64> {
    check_ell(ell)?;
    sym.check_range()?;
    let t = lu_nonsingular(&build_t_n(sym, n))?;
    let lambda = build_lambda(sym, n, ell)?.matrix;
    let h = t.solve(&lambda.adjoint().matmul(&t.solve(&lambda)?))?;
    Ok(1.0 - ratio_from_h(&h)?)
}

pub fn psi_finite_window(sym: &Symbol, ell: usize, n: usize) -> Result<FiniteWindowPsi> {
    psi_finite_window_with(sym, ell, n, WindowOptions::default())
}

struct WordFactor {
    /// `A_ε^{-1} Λ`.
    y: ComplexMatrix,
    /// `A_ε^{-1} Λ*`.
    x: ComplexMatrix,
}

pub fn psi_finite_window_with(sym: &Symbol, ell: usize, n: usize, opts: WindowOptions) -> Result<FiniteWindowPsi> {
    check_ell(ell)?;
    if opts.cap > MAX_WINDOW_CAP {
        return Err(Error::CapExceeded {
            what: "window cap",
            requested: opts.cap,
            cap: MAX_WINDOW_CAP,
        });
    }
    if n == 0 || n > opts.cap {
        return Err(Error::CapExceeded {
            what: "window length N",
            requested: n,
            cap: opts.cap,
        });
    }
    sym.check_range()?;
    let t = build_t_n(sym, n);
    let lambda = build_lambda(sym, n, ell)?.matrix;
    let lambda_adj = lambda.adjoint();
    let words = 1usize << n;
    let factors: Vec<WordFactor> = (0..words)
        .into_par_iter()
        .map(|w| {
            let eps = Cylinder::from_index(w as u64, n)?;
            let shift: Vec<f64> = eps.bits().iter().map(|&b| if b { 0.0 } else { -1.0 }).collect();
            let lu = lu_nonsingular(&t.add_real_diagonal(&shift))?;
            Ok(WordFactor {
                y: lu.solve(&lambda)?,
                x: lu.solve(&lambda_adj)?,
            })
        })
        .collect::<Result<_>>()?;

    // Per ε: (deviation, ε' index, max trace norm), reduced in index order.
    let rows: Vec<(f64, usize, f64)> = (0..words)
        .into_par_iter()
        .map(|e| {
            let mut best = (f64::NEG_INFINITY, 0usize);
            let mut max_tn = 0.0f64;
            for (ep, fp) in factors.iter().enumerate() {
                let h = fp.x.matmul(&factors[e].y);
                let dev = (ratio_from_h(&h)? - 1.0).abs();
                if dev > best.0 {
                    best = (dev, ep);
                }
                if opts.trace_norms {
                    max_tn = max_tn.max(trace_norm(&h)?);
                }
            }
            Ok((best.0, best.1, max_tn))
        })
        .collect::<Result<_>>()?;

    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for (e, &(dev, ep, _)) in rows.iter().enumerate() {
        if dev > best.0 {
            best = (dev, e, ep);
        }
    }
    let max_tn = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(FiniteWindowPsi {
        ell,
        n,
        value: best.0,
        argmax: (
            Cylinder::from_index(best.1 as u64, n)?,
            Cylinder::from_index(best.2 as u64, n)?,
        ),
        max_h_trace_norm: opts.trace_norms.then_some(max_tn),
    })
}

//! Cylinder probabilities of the Toeplitz determinantal measure `μ_f`.
//!
//! For a word `ε` of length `N`,
//! `μ([ε]) = det(D(2ε-1) T_N(f) + D(1-ε)) = 2^{-N} det(D(θ) T_N(g) + I)`
//! with `θ = 2ε - 1` and `g = 2f - 1`. The two-sided process and its
//! one-sided restriction share every finite-window formula, so one
//! implementation serves both. Words are indexed from 0 externally; by
//! stationarity the anchor of the window is irrelevant.
//!
//! The fast path factors the Hermitian matrix `K_ε = T_N(f) + D(ε - 1)` as
//! `L D L*` one row at a time. Its pivots are `p_k` or `p_k - 1` where
//! `p_k = P(x_k = 1 | x_0..x_{k-1})`, and the new row of `L` does not depend on
//! the bit being appended, so a depth-first walk over the cylinder tree costs
//! one row per node.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::{RangeInfo, Symbol};
use crate::toeplitz::{build_lambda, build_t, build_t_n, gap_index_set, trace_norm, ComplexMatrix, Lu};

/// Coefficients beyond the effective bandwidth at this tolerance are dropped
/// by the incremental factorization.
pub const EFFECTIVE_BANDWIDTH_TOL: f64 = 1e-16;

/// Coefficients cached per measure when the bandwidth is infinite.
pub const COEFF_TABLE: usize = 256;

/// Largest cached coefficient index for finite bandwidth.
const COEFF_TABLE_MAX: usize = 1 << 16;

/// Largest imaginary residue tolerated on a determinant that is a probability.
pub const IMAG_TOL: f64 = 1e-10;

/// Relative disagreement between the two ratio routes that is treated as a
/// numeric failure.
pub const RATIO_ROUTE_TOL: f64 = 1e-6;

/// A binary word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cylinder {
    bits: Vec<bool>,
}

impl Cylinder {
    pub fn new(bits: Vec<bool>) -> Result<Cylinder> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument("cylinder word must be nonempty".into()));
        }
        Ok(Cylinder { bits })
    }

    /// `len` bits of `index`, most significant first.
    pub fn from_index(index: u64, len: usize) -> Result<Cylinder> {
        if len == 0 || len > 64 || (len < 64 && index >> len != 0) {
            return Err(Error::InvalidArgument(format!(
                "index {index} does not fit a word of length {len}"
            )));
        }
        Cylinder::new((0..len).map(|k| (index >> (len - 1 - k)) & 1 == 1).collect())
    }

    pub fn ones(len: usize) -> Result<Cylinder> {
        Cylinder::new(vec![true; len])
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Inverse of [`Cylinder::from_index`].
    pub fn index(&self) -> u64 {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b))
    }

    pub fn complement(&self) -> Cylinder {
        Cylinder {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn concat(&self, other: &Cylinder) -> Cylinder {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Cylinder { bits }
    }

    pub fn count_zeros(&self) -> usize {
        self.bits.iter().filter(|b| !**b).count()
    }

    /// `θ = 2ε - 1`.
    pub fn theta(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect()
    }

    /// Diagonal of `D(ε - 1)`.
    fn shift(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { 0.0 } else { -1.0 }).collect()
    }
}

impl FromStr for Cylinder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Cylinder> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidArgument(format!("'{c}' is not a binary digit"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Cylinder::new(bits)
    }
}

impl fmt::Display for Cylinder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Two words of equal length `N` on the windows `{1..N}` and
/// `{N+ℓ+1 .. 2N+ℓ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderPair {
    pub eps: Cylinder,
    pub eps_prime: Cylinder,
    pub gap_ell: usize,
}

impl CylinderPair {
    pub fn new(eps: Cylinder, eps_prime: Cylinder, gap_ell: usize) -> Result<CylinderPair> {
        if eps.len() != eps_prime.len() {
            return Err(Error::InvalidArgument(format!(
                "cylinder pair needs equal lengths (got {} and {})",
                eps.len(),
                eps_prime.len()
            )));
        }
        if gap_ell == 0 {
            return Err(Error::InvalidArgument("gap must be >= 1".into()));
        }
        Ok(CylinderPair {
            eps,
            eps_prime,
            gap_ell,
        })
    }

    pub fn window(&self) -> usize {
        self.eps.len()
    }
}

/// Both routes to the correlation ratio `R = μ([ε] ∩ σ^{-(N+ℓ)}[ε']) / (μ[ε] μ[ε'])`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    /// `det(I - H)`.
    pub ratio: f64,
    /// Joint probability over the product of marginals.
    pub ratio_direct: f64,
    pub log_joint: f64,
    pub log_p_eps: f64,
    pub log_p_eps_prime: f64,
    /// `‖H‖₁`.
    pub h_trace_norm: f64,
    /// `‖H‖₁ exp(‖H‖₁ + 1)`.
    pub simon_bound: f64,
}

impl RatioReport {
    pub fn deviation(&self) -> f64 {
        (self.ratio - 1.0).abs()
    }
}

/// A validated symbol with a cached coefficient table.
#[derive(Clone, Debug)]
pub struct Measure {
    symbol: Symbol,
    range: RangeInfo,
    bandwidth: Option<usize>,
    table: Vec<Complex64>,
}

impl Measure {
    pub fn new(symbol: &Symbol) -> Result<Measure> {
        let range = symbol.check_range()?;
        let bandwidth = symbol.effective_bandwidth(EFFECTIVE_BANDWIDTH_TOL);
        let len = bandwidth.map_or(COEFF_TABLE, |b| b.min(COEFF_TABLE_MAX)) + 1;
        let table = (0..len as i64).map(|n| symbol.coeff(n)).collect();
        Ok(Measure {
            symbol: symbol.clone(),
            range,
            bandwidth,
            table,
        })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn range(&self) -> RangeInfo {
        self.range
    }

    /// Bandwidth used by the incremental factorization.
    pub fn bandwidth(&self) -> Option<usize> {
        self.bandwidth
    }

    /// `f̂(n)`, zero beyond the effective bandwidth.
    #[inline]
    pub fn lag(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        let c = if k < self.table.len() {
            self.table[k]
        } else if self.bandwidth.is_some_and(|b| k > b) {
            return Complex64::new(0.0, 0.0);
        } else {
            self.symbol.coeff(k as i64)
        };
        if n < 0 {
            c.conj()
        } else {
            c
        }
    }

    /// `f̂(0)`, the one-point intensity.
    pub fn intensity(&self) -> f64 {
        self.table[0].re
    }

    pub fn prefix(&self) -> PrefixFactor<'_> {
        PrefixFactor::new(self)
    }

    /// Factor for a given word.
    pub fn factor(&self, eps: &Cylinder) -> Result<PrefixFactor<'_>> {
        let mut pf = self.prefix();
        for &b in eps.bits() {
            pf.push(b)?;
        }
        Ok(pf)
    }

    /// `ln μ([ε])` through the incremental factorization.
    pub fn cylinder_log_prob(&self, eps: &Cylinder) -> Result<f64> {
        Ok(self.factor(eps)?.log_prob())
    }

    pub fn cylinder_prob(&self, eps: &Cylinder) -> Result<f64> {
        Ok(self.factor(eps)?.prob())
    }

    /// `ln μ([ε])` from a full determinant of `D(θ) T_N(g) + I`.
    pub fn cylinder_log_prob_dense(&self, eps: &Cylinder) -> Result<f64> {
        let g = self.symbol.centered();
        let t = build_t_n(&g, eps.len());
        let m = t.scale_rows(&eps.theta()).add_real_diagonal(&vec![1.0; eps.len()]);
        let ld = m.log_det()?;
        let log_p = ld.log_abs - eps.len() as f64 * std::f64::consts::LN_2;
        probability_from_log_det(log_p, ld.phase)
    }

    pub fn cylinder_prob_dense(&self, eps: &Cylinder) -> Result<f64> {
        Ok(self.cylinder_log_prob_dense(eps)?.exp())
    }

    /// `ln μ([ε] ∩ σ^{-(N+ℓ)}[ε'])` from the determinant over `J_{N,ℓ}`.
    pub fn joint_log_prob(&self, pair: &CylinderPair) -> Result<f64> {
        let word = pair.eps.concat(&pair.eps_prime);
        let t = build_t(&self.symbol, &gap_index_set(pair.window(), pair.gap_ell))?;
        let ones_minus: Vec<f64> = word.shift().iter().map(|s| -s).collect();
        let m = t.scale_rows(&word.theta()).add_real_diagonal(&ones_minus);
        let ld = m.log_det()?;
        probability_from_log_det(ld.log_abs, ld.phase)
    }

    pub fn joint_prob(&self, pair: &CylinderPair) -> Result<f64> {
        Ok(self.joint_log_prob(pair)?.exp())
    }

    /// `H = [T + D(ε'-1)]^{-1} Λ* [T + D(ε-1)]^{-1} Λ`.
    pub fn h_matrix(&self, pair: &CylinderPair) -> Result<ComplexMatrix> {
        let n = pair.window();
        let t = build_t_n(&self.symbol, n);
        let lambda = build_lambda(&self.symbol, n, pair.gap_ell)?.matrix;
        let a = lu_nonsingular(&t.add_real_diagonal(&pair.eps.shift()))?;
        let a_prime = lu_nonsingular(&t.add_real_diagonal(&pair.eps_prime.shift()))?;
        let y = a.solve(&lambda)?;
        a_prime.solve(&lambda.adjoint().matmul(&y))
    }

    pub fn correlation_ratio(&self, pair: &CylinderPair) -> Result<RatioReport> {
        let h = self.h_matrix(pair)?;
        let ratio = ratio_from_h(&h)?;
        let log_joint = self.joint_log_prob(pair)?;
        let log_p_eps = self.cylinder_log_prob_dense(&pair.eps)?;
        let log_p_eps_prime = self.cylinder_log_prob_dense(&pair.eps_prime)?;
        let ratio_direct = (log_joint - log_p_eps - log_p_eps_prime).exp();
        if (ratio - ratio_direct).abs() > RATIO_ROUTE_TOL * ratio_direct.abs().max(1.0) {
            return Err(Error::Numeric(format!(
                "ratio routes disagree: det(I - H) = {ratio:e}, direct = {ratio_direct:e}"
            )));
        }
        let h_trace_norm = trace_norm(&h)?;
        Ok(RatioReport {
            ratio,
            ratio_direct,
            log_joint,
            log_p_eps,
            log_p_eps_prime,
            h_trace_norm,
            simon_bound: simon_bound(h_trace_norm),
        })
    }

    /// `P(x_N = 1 | x_0..x_{N-1} = ε)`.
    pub fn conditional_next(&self, eps: &Cylinder) -> Result<f64> {
        self.factor(eps)?.next_one_prob()
    }

    /// Probabilities of all `2^n` words, in [`Cylinder::index`] order.
    pub fn all_cylinder_probs(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 || n > 30 {
            return Err(Error::CapExceeded {
                what: "word length",
                requested: n,
                cap: 30,
            });
        }
        let mut out = Vec::with_capacity(1 << n);
        self.prefix().for_each_leaf(n, &mut |pf| out.push(pf.prob()))?;
        Ok(out)
    }
}

/// `x exp(x + 1)`.
pub fn simon_bound(trace_norm: f64) -> f64 {
    trace_norm * (trace_norm + 1.0).exp()
}

pub(crate) fn lu_nonsingular(m: &ComplexMatrix) -> Result<Lu> {
    let lu = Lu::new(m)?;
    if lu.is_singular() {
        return Err(Error::Singular(
            "T_N(f) + D(ε - 1) is singular; the symbol is degenerate".into(),
        ));
    }
    Ok(lu)
}

/// `det(I - H)` as a real number.
pub(crate) fn ratio_from_h(h: &ComplexMatrix) -> Result<f64> {
    let n = h.n_rows();
    let m = &ComplexMatrix::identity(n) - h;
    let ld = m.log_det()?;
    let v = ld.value();
    if v.im.abs() > IMAG_TOL * v.norm().max(1.0) {
        return Err(Error::Numeric(format!("det(I - H) has imaginary part {:e}", v.im)));
    }
    Ok(v.re)
}

fn probability_from_log_det(log_abs: f64, phase: Complex64) -> Result<f64> {
    if log_abs == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let value = log_abs.exp();
    if (phase.im * value).abs() > IMAG_TOL {
        return Err(Error::Numeric(format!(
            "probability determinant has imaginary part {:e}",
            phase.im * value
        )));
    }
    if phase.re < 0.0 && value > IMAG_TOL {
        return Err(Error::Numeric(format!(
            "probability determinant is negative ({:e})",
            -value
        )));
    }
    Ok(log_abs)
}

/// Incremental `L D L*` factor of `T_k(f) + D(ε - 1)` for a growing prefix `ε`.
///
/// Rows are banded when the measure's bandwidth is finite, so extending a
/// prefix costs `O(B²)` for bandwidth `B` and `O(k²)` otherwise.
#[derive(Clone, Debug)]
pub struct PrefixFactor<'m> {
    measure: &'m Measure,
    /// Row `k` holds `L[k][s_k..k]` with `s_k = k - min(k, B)`; rows and
    /// pivots below `base` have been forgotten.
    rows: VecDeque<Vec<Complex64>>,
    d: VecDeque<f64>,
    base: usize,
    bits: Vec<bool>,
    log_prob: Vec<f64>,
    scaled: Vec<f64>,
    pending: Option<(Vec<Complex64>, f64)>,
}

impl<'m> PrefixFactor<'m> {
    pub fn new(measure: &'m Measure) -> PrefixFactor<'m> {
        PrefixFactor {
            measure,
            rows: VecDeque::new(),
            d: VecDeque::new(),
            base: 0,
            bits: Vec::new(),
            log_prob: Vec::new(),
            scaled: Vec::new(),
            pending: None,
        }
    }

    pub fn measure(&self) -> &'m Measure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// `ln μ([prefix])`; 0 for the empty prefix.
    pub fn log_prob(&self) -> f64 {
        self.log_prob.last().copied().unwrap_or(0.0)
    }

    /// `2^k μ([prefix])`, exact for the fair coin.
    pub fn scaled_prob(&self) -> f64 {
        self.scaled.last().copied().unwrap_or(1.0)
    }

    pub fn prob(&self) -> f64 {
        let k = self.len() as i32;
        if k < 1000 {
            self.scaled_prob() * 0.5f64.powi(k)
        } else {
            self.log_prob().exp()
        }
    }

    fn start(&self, k: usize) -> usize {
        match self.measure.bandwidth {
            Some(b) => k.saturating_sub(b),
            None => 0,
        }
    }

    fn compute_row(&self) -> (Vec<Complex64>, f64) {
        let k = self.len();
        let s = self.start(k);
        let mut row: Vec<Complex64> = Vec::with_capacity(k - s);
        for j in s..k {
            let row_j = &self.rows[j - self.base];
            let sj = self.start(j);
            let lo = s.max(sj);
            let mut acc = self.measure.lag((k - j) as i64);
            for m in lo..j {
                acc -= row[m - s] * self.d[m - self.base] * row_j[m - sj].conj();
            }
            row.push(acc / self.d[j - self.base]);
        }
        let mut p = self.measure.intensity();
        for (m, l) in (s..k).zip(&row) {
            p -= l.norm_sqr() * self.d[m - self.base];
        }
        (row, p)
    }

    fn ensure_pending(&mut self) -> f64 {
        if self.pending.is_none() {
            self.pending = Some(self.compute_row());
        }
        self.pending.as_ref().map(|(_, p)| *p).unwrap_or(f64::NAN)
    }

    /// `P(next bit = 1 | prefix)`, clamped to `[0, 1]`.
    pub fn next_one_prob(&mut self) -> Result<f64> {
        let p = self.ensure_pending();
        if !p.is_finite() {
            return Err(Error::Conditioning {
                position: self.len(),
            });
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Appends a bit; fails when its conditional probability vanishes.
    pub fn push(&mut self, bit: bool) -> Result<()> {
        let p = self.next_one_prob()?;
        let cond = if bit { p } else { 1.0 - p };
        if !(cond > f64::MIN_POSITIVE) {
            return Err(Error::Conditioning {
                position: self.len(),
            });
        }
        let (row, raw) = self.pending.take().expect("pending row");
        self.rows.push_back(row);
        self.d.push_back(if bit { raw } else { raw - 1.0 });
        self.bits.push(bit);
        self.log_prob.push(self.log_prob() + cond.ln());
        self.scaled.push(self.scaled_prob() * (2.0 * cond));
        Ok(())
    }

    /// Drops factor rows that no later row can reference. Only banded
    /// factors forget anything; once they have, [`PrefixFactor::pop`] is
    /// disabled.
    pub fn forget_history(&mut self) {
        let Some(b) = self.measure.bandwidth else {
            return;
        };
        let keep_from = self.len().saturating_sub(b);
        while self.base < keep_from {
            self.rows.pop_front();
            self.d.pop_front();
            self.base += 1;
        }
    }

    /// Removes the last bit; its row is kept for the next push. Returns
    /// `None` at the empty prefix or after history was forgotten.
    pub fn pop(&mut self) -> Option<bool> {
        if self.base > 0 {
            return None;
        }
        let bit = self.bits.pop()?;
        let row = self.rows.pop_back().expect("row");
        let d = self.d.pop_back().expect("pivot");
        self.log_prob.pop();
        self.scaled.pop();
        self.pending = Some((row, if bit { d } else { d + 1.0 }));
        Some(bit)
    }

    /// Visits every extension by `extra` bits in lexicographic order.
    pub fn for_each_leaf(&mut self, extra: usize, visit: &mut impl FnMut(&PrefixFactor<'m>)) -> Result<()> {
        if extra == 0 {
            visit(self);
            return Ok(());
        }
        for bit in [false, true] {
            self.push(bit)?;
            let r = self.for_each_leaf(extra - 1, visit);
            self.pop();
            r?;
        }
        Ok(())
    }
}

/// [`Measure::cylinder_prob`] for a bare symbol.
pub fn cylinder_prob(sym: &Symbol, eps: &Cylinder) -> Result<f64> {
    Measure::new(sym)?.cylinder_prob(eps)
}

pub fn cylinder_log_prob(sym: &Symbol, eps: &Cylinder) -> Result<f64> {
    Measure::new(sym)?.cylinder_log_prob(eps)
}

pub fn joint_cylinder_prob(sym: &Symbol, pair: &CylinderPair) -> Result<f64> {
    Measure::new(sym)?.joint_prob(pair)
}

pub fn correlation_ratio(sym: &Symbol, pair: &CylinderPair) -> Result<RatioReport> {
    Measure::new(sym)?.correlation_ratio(pair)
}

pub fn conditional_next(sym: &Symbol, eps: &Cylinder) -> Result<f64> {
    Measure::new(sym)?.conditional_next(eps)
}

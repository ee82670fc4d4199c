//! Symbols `f: T -> [0, 1]` and their Fourier data.
//!
//! Every downstream computation consumes a symbol only through its Fourier
//! coefficients `f̂(n) = ∫ f(t) e^{-2πint} dt`. Pointwise evaluation is kept for
//! range checks and for quadratures of functions of `f`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Grid size used for range checks of symbols without analytic extrema.
pub const RANGE_GRID: usize = 1 << 12;
/// Slack allowed when checking `0 <= f <= 1` and one-sidedness.
pub const RANGE_TOL: f64 = 1e-10;
/// Default truncation index for infinite tail sums.
pub const DEFAULT_TRUNCATION: usize = 100_000;
/// Default node count for trapezoid quadratures on the circle.
pub const QUADRATURE_NODES: usize = 1 << 14;
/// Convolution window for products of symbols without finite bandwidth.
pub const PRODUCT_TRUNCATION: usize = 4096;

/// A real-valued function on the circle `T = R/Z`, described by a closed-form
/// family or by composition of other symbols.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    /// `f ≡ a`.
    Constant { a: f64 },
    /// `f(t) = a + b cos(2πt)`.
    RaisedCosine { a: f64, b: f64 },
    /// `f(t) = c (1 - r²) / (1 - 2r cos(2πt) + r²)`, so `f̂(n) = c r^|n|`.
    Poisson { c: f64, r: f64 },
    /// Trigonometric polynomial; `coeffs[n] = f̂(n)` for `0 <= n <= B`,
    /// negative indices follow from Hermitian symmetry.
    TrigPoly { coeffs: Vec<Complex64> },
    /// `f̂(0) = a`, `f̂(n) = c / |n|^p` for `1 <= |n| <= cutoff`, zero beyond.
    PowerDecay { a: f64, c: f64, p: f64, cutoff: usize },
    /// Indicator of the arc `[alpha, beta)` (taken mod 1).
    ArcIndicator { alpha: f64, beta: f64 },
    /// `shift + scale * inner`.
    Affine {
        scale: f64,
        shift: f64,
        inner: Box<Symbol>,
    },
    /// Pointwise product; coefficients by discrete convolution.
    Product(Box<Symbol>, Box<Symbol>),
}

/// Extrema of a symbol, either exact or sampled on [`RANGE_GRID`] points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeInfo {
    pub min: f64,
    pub max: f64,
    pub analytic: bool,
}

/// Which side of 1/2 a symbol lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    AtLeastHalf,
    AtMostHalf,
}

/// What is known about the part of a tail sum beyond its truncation index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Remainder {
    /// Nothing is left beyond the truncation.
    Exact,
    /// The remainder is at most this value (exact for the closed-form families).
    Bound(f64),
    /// The full series diverges.
    Divergent,
    /// No analytic control is available; the value is approximate.
    Unknown,
}

/// One-sided H^{1/2} tail `Σ_{ell < n <= truncation} n |f̂(n)|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailSum {
    pub cutoff_ell: usize,
    pub truncation_n: usize,
    pub value: f64,
    pub remainder: Remainder,
}

impl TailSum {
    /// Upper bound on the untruncated series, `None` when no bound is known.
    pub fn upper(&self) -> Option<f64> {
        match self.remainder {
            Remainder::Exact => Some(self.value),
            Remainder::Bound(b) => Some(self.value + b),
            Remainder::Divergent => Some(f64::INFINITY),
            Remainder::Unknown => None,
        }
    }

    /// Two-sided variant `Σ_{|n| > ell} |n| |f̂(n)|²`; equals twice the
    /// one-sided value because `|f̂(-n)| = |f̂(n)|` for real symbols.
    pub fn symmetric_value(&self) -> f64 {
        2.0 * self.value
    }
}

/// Outcome of fitting `tail(ell) ≈ C ell^{-a}` on a grid of cutoffs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DecayFit {
    /// Tails vanish on the grid; the symbol has this bandwidth.
    ExactBandwidth { bandwidth: usize },
    /// Tails decay faster than any power; `log_rate` is the fitted slope of
    /// `log tail` against `ell`.
    Geometric { log_rate: f64 },
    /// Power-law tail with the fitted exponent `a` (slope of the log-log fit is `-a`).
    Power { exponent: f64 },
    /// The tail series diverges (the symbol is not in H^{1/2}).
    Divergent,
}

impl DecayFit {
    /// Whether the fit is consistent with membership in `H^{1/2 + ε}` for some ε > 0.
    pub fn beyond_half_sobolev(&self) -> bool {
        match *self {
            DecayFit::ExactBandwidth { .. } | DecayFit::Geometric { .. } => true,
            DecayFit::Power { exponent } => exponent > 0.0,
            DecayFit::Divergent => false,
        }
    }
}

impl Symbol {
    pub fn constant(a: f64) -> Result<Symbol> {
        finite(&[a])?;
        Ok(Symbol::Constant { a })
    }

    pub fn raised_cosine(a: f64, b: f64) -> Result<Symbol> {
        finite(&[a, b])?;
        Ok(Symbol::RaisedCosine { a, b })
    }

    pub fn poisson(c: f64, r: f64) -> Result<Symbol> {
        finite(&[c, r])?;
        if !(0.0..1.0).contains(&r) {
            return Err(Error::InvalidSymbol(format!(
                "poisson radius r must lie in [0, 1), got {r}"
            )));
        }
        Ok(Symbol::Poisson { c, r })
    }

    /// Builds a trigonometric polynomial from `(n, f̂(n))` pairs with `n >= 0`.
    /// Missing indices are zero; `f̂(0)` must be real.
    pub fn trig_poly(entries: &[(i64, Complex64)]) -> Result<Symbol> {
        let mut max_n = 0usize;
        for &(n, c) in entries {
            if n < 0 {
                return Err(Error::InvalidSymbol(format!(
                    "trig_poly accepts only n >= 0 (got n = {n}); negative indices follow by symmetry"
                )));
            }
            finite(&[c.re, c.im])?;
            max_n = max_n.max(n as usize);
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); max_n + 1];
        let mut seen = vec![false; max_n + 1];
        for &(n, c) in entries {
            let n = n as usize;
            if seen[n] {
                return Err(Error::InvalidSymbol(format!("duplicate coefficient n = {n}")));
            }
            seen[n] = true;
            coeffs[n] = c;
        }
        if coeffs[0].im != 0.0 {
            return Err(Error::InvalidSymbol(
                "f̂(0) must be real for a real-valued symbol".into(),
            ));
        }
        Ok(Symbol::TrigPoly { coeffs })
    }

    pub fn power_decay(a: f64, c: f64, p: f64, cutoff: usize) -> Result<Symbol> {
        finite(&[a, c, p])?;
        if p <= 0.0 {
            return Err(Error::InvalidSymbol(format!("power_decay needs p > 0, got {p}")));
        }
        Ok(Symbol::PowerDecay { a, c, p, cutoff })
    }

    pub fn arc_indicator(alpha: f64, beta: f64) -> Result<Symbol> {
        finite(&[alpha, beta])?;
        if !(alpha < beta) || beta - alpha > 1.0 {
            return Err(Error::InvalidSymbol(format!(
                "arc_indicator needs alpha < beta <= alpha + 1, got [{alpha}, {beta})"
            )));
        }
        Ok(Symbol::ArcIndicator { alpha, beta })
    }

    pub fn affine(&self, scale: f64, shift: f64) -> Symbol {
        Symbol::Affine {
            scale,
            shift,
            inner: Box::new(self.clone()),
        }
    }

    /// `g = 2f - 1`.
    pub fn centered(&self) -> Symbol {
        self.affine(2.0, -1.0)
    }

    /// `1 - f`.
    pub fn complement(&self) -> Symbol {
        self.affine(-1.0, 1.0)
    }

    pub fn product(&self, other: &Symbol) -> Symbol {
        Symbol::Product(Box::new(self.clone()), Box::new(other.clone()))
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Symbol::Constant { .. } => "constant",
            Symbol::RaisedCosine { .. } => "raised_cosine",
            Symbol::Poisson { .. } => "poisson",
            Symbol::TrigPoly { .. } => "trig_poly",
            Symbol::PowerDecay { .. } => "power_decay",
            Symbol::ArcIndicator { .. } => "arc_indicator",
            Symbol::Affine { .. } => "affine",
            Symbol::Product(..) => "product",
        }
    }

    /// Fourier coefficient `f̂(n)`. Negative indices are conjugated from the
    /// positive ones, so Hermitian symmetry holds bit-for-bit.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let c = self.coeff_nonneg(n.unsigned_abs());
        if n < 0 {
            c.conj()
        } else {
            c
        }
    }

    fn coeff_nonneg(&self, n: u64) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Symbol::Constant { a } => {
                if n == 0 {
                    Complex64::new(*a, 0.0)
                } else {
                    zero
                }
            }
            Symbol::RaisedCosine { a, b } => match n {
                0 => Complex64::new(*a, 0.0),
                1 => Complex64::new(b / 2.0, 0.0),
                _ => zero,
            },
            Symbol::Poisson { c, r } => {
                if n == 0 {
                    Complex64::new(*c, 0.0)
                } else {
                    Complex64::new(c * r.powf(n as f64), 0.0)
                }
            }
            Symbol::TrigPoly { coeffs } => coeffs.get(n as usize).copied().unwrap_or(zero),
            Symbol::PowerDecay { a, c, p, cutoff } => {
                if n == 0 {
                    Complex64::new(*a, 0.0)
                } else if n as usize <= *cutoff {
                    Complex64::new(c / (n as f64).powf(*p), 0.0)
                } else {
                    zero
                }
            }
            Symbol::ArcIndicator { alpha, beta } => {
                if n == 0 {
                    Complex64::new(beta - alpha, 0.0)
                } else {
                    let w = 2.0 * PI * n as f64;
                    let num = Complex64::from_polar(1.0, -w * alpha)
                        - Complex64::from_polar(1.0, -w * beta);
                    num / Complex64::new(0.0, w)
                }
            }
            Symbol::Affine { scale, shift, inner } => {
                let c = inner.coeff_nonneg(n) * *scale;
                if n == 0 {
                    c + *shift
                } else {
                    c
                }
            }
            Symbol::Product(a, b) => {
                let n = n as i64;
                let (lo, hi) = match (a.support(), b.support()) {
                    (Some(ba), Some(bb)) => {
                        let (ba, bb) = (ba as i64, bb as i64);
                        ((n - ba).max(-bb), (n + ba).min(bb))
                    }
                    _ => {
                        let k = PRODUCT_TRUNCATION as i64;
                        (-k, k)
                    }
                };
                let mut acc = zero;
                for k in lo..=hi {
                    acc += a.coeff(n - k) * b.coeff(k);
                }
                acc
            }
        }
    }

    /// Coefficients `f̂(0), ..., f̂(max)`.
    pub fn coeffs_upto(&self, max: usize) -> Vec<Complex64> {
        (0..=max as i64).map(|n| self.coeff(n)).collect()
    }

    /// Pointwise value `f(t)`; coefficient-defined families return the finite
    /// Fourier sum.
    pub fn eval(&self, t: f64) -> f64 {
        let w = 2.0 * PI * t;
        match self {
            Symbol::Constant { a } => *a,
            Symbol::RaisedCosine { a, b } => a + b * w.cos(),
            Symbol::Poisson { c, r } => c * (1.0 - r * r) / (1.0 - 2.0 * r * w.cos() + r * r),
            Symbol::TrigPoly { coeffs } => {
                let mut acc = coeffs[0].re;
                for (n, c) in coeffs.iter().enumerate().skip(1) {
                    acc += 2.0 * (c * Complex64::from_polar(1.0, w * n as f64)).re;
                }
                acc
            }
            Symbol::PowerDecay { a, c, p, cutoff } => {
                let mut acc = 0.0;
                for n in 1..=*cutoff {
                    acc += (w * n as f64).cos() / (n as f64).powf(*p);
                }
                a + 2.0 * c * acc
            }
            Symbol::ArcIndicator { alpha, beta } => {
                let x = (t - alpha).rem_euclid(1.0);
                if x < beta - alpha || beta - alpha >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Symbol::Affine { scale, shift, inner } => shift + scale * inner.eval(t),
            Symbol::Product(a, b) => a.eval(t) * b.eval(t),
        }
    }

    /// Values `f(k/m)` for `k = 0..m`. Band-limited symbols are synthesized by
    /// folding their coefficients modulo `m` and one inverse FFT, which is
    /// exact on the grid; the others are evaluated pointwise.
    pub fn grid_values(&self, m: usize) -> Vec<f64> {
        assert!(m > 0, "grid needs at least one node");
        match self.support() {
            Some(b) if !matches!(self, Symbol::Constant { .. } | Symbol::Product(..)) => {
                let mut folded = vec![Complex64::new(0.0, 0.0); m];
                for n in -(b as i64)..=(b as i64) {
                    folded[n.rem_euclid(m as i64) as usize] += self.coeff(n);
                }
                let mut planner = FftPlanner::<f64>::new();
                planner.plan_fft_inverse(m).process(&mut folded);
                folded.into_iter().map(|z| z.re).collect()
            }
            _ => (0..m).map(|k| self.eval(k as f64 / m as f64)).collect(),
        }
    }

    /// Exact bandwidth: the largest `n` with `f̂(n) != 0`, `None` when infinite.
    pub fn bandwidth(&self) -> Option<usize> {
        match self {
            Symbol::Constant { .. } => Some(0),
            Symbol::RaisedCosine { b, .. } => Some(usize::from(*b != 0.0)),
            Symbol::Poisson { c, r } => (*r == 0.0 || *c == 0.0).then_some(0),
            Symbol::TrigPoly { coeffs } => Some(
                coeffs
                    .iter()
                    .rposition(|c| c.norm_sqr() != 0.0)
                    .unwrap_or(0),
            ),
            Symbol::PowerDecay { c, cutoff, .. } => Some(if *c == 0.0 { 0 } else { *cutoff }),
            Symbol::ArcIndicator { alpha, beta } => (beta - alpha >= 1.0).then_some(0),
            Symbol::Affine { scale, inner, .. } => {
                if *scale == 0.0 {
                    Some(0)
                } else {
                    inner.bandwidth()
                }
            }
            Symbol::Product(a, b) => Some(a.bandwidth()? + b.bandwidth()?),
        }
    }

    /// Largest index at which [`Symbol::coeff`] can return a nonzero value.
    /// Differs from [`Symbol::bandwidth`] only for products of symbols with
    /// infinite bandwidth, whose convolution is truncated.
    pub fn support(&self) -> Option<usize> {
        match self {
            Symbol::Product(a, b) => {
                Some(a.support().unwrap_or(PRODUCT_TRUNCATION) + b.support().unwrap_or(PRODUCT_TRUNCATION))
            }
            Symbol::Affine { scale, inner, .. } if *scale != 0.0 => inner.support(),
            _ => self.bandwidth(),
        }
    }

    /// Smallest `B` such that zeroing every `f̂(n)` with `|n| > B` changes each
    /// Toeplitz section by at most `tol` in operator norm (bounded by
    /// `2 Σ_{n > B} |f̂(n)|`). Exact bandwidth when finite.
    pub fn effective_bandwidth(&self, tol: f64) -> Option<usize> {
        if let Some(b) = self.support() {
            return Some(b);
        }
        match self {
            Symbol::Poisson { c, r } => {
                // 2|c| r^{B+1} / (1 - r) <= tol
                let scale = 2.0 * c.abs() / (1.0 - r);
                let mut b = 0usize;
                let mut rb = *r;
                while scale * rb > tol && b < 1 << 20 {
                    b += 1;
                    rb *= r;
                }
                Some(b)
            }
            Symbol::Affine { scale, inner, .. } => inner.effective_bandwidth(tol / scale.abs()),
            _ => None,
        }
    }

    /// Extrema of `f`: closed form where available, otherwise a
    /// [`RANGE_GRID`]-point sample.
    pub fn range(&self) -> RangeInfo {
        if let Some((min, max)) = self.analytic_range() {
            return RangeInfo {
                min,
                max,
                analytic: true,
            };
        }
        let vals = self.grid_values(RANGE_GRID);
        let (min, max) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        RangeInfo {
            min,
            max,
            analytic: false,
        }
    }

    fn analytic_range(&self) -> Option<(f64, f64)> {
        match self {
            Symbol::Constant { a } => Some((*a, *a)),
            Symbol::RaisedCosine { a, b } => Some((a - b.abs(), a + b.abs())),
            Symbol::Poisson { c, r } => {
                let lo = c * (1.0 - r) / (1.0 + r);
                let hi = c * (1.0 + r) / (1.0 - r);
                Some((lo.min(hi), lo.max(hi)))
            }
            Symbol::ArcIndicator { alpha, beta } => {
                if beta - alpha >= 1.0 {
                    Some((1.0, 1.0))
                } else {
                    Some((0.0, 1.0))
                }
            }
            Symbol::Affine { scale, shift, inner } => {
                let (lo, hi) = inner.analytic_range()?;
                let (a, b) = (shift + scale * lo, shift + scale * hi);
                Some((a.min(b), a.max(b)))
            }
            _ => None,
        }
    }

    /// `τ = min(inf f, 1 - sup f)`; non-positive when `τ <= f <= 1 - τ` fails
    /// for every `τ > 0`.
    pub fn contraction_margin(&self) -> f64 {
        let r = self.range();
        r.min.min(1.0 - r.max)
    }

    /// `Some(side)` when `f >= 1/2` or `f <= 1/2` everywhere (up to [`RANGE_TOL`]).
    pub fn one_sided(&self) -> Option<Side> {
        let r = self.range();
        if r.min >= 0.5 - RANGE_TOL {
            Some(Side::AtLeastHalf)
        } else if r.max <= 0.5 + RANGE_TOL {
            Some(Side::AtMostHalf)
        } else {
            None
        }
    }

    /// Checks `0 <= f <= 1` up to [`RANGE_TOL`].
    pub fn check_range(&self) -> Result<RangeInfo> {
        let r = self.range();
        if r.min < -RANGE_TOL || r.max > 1.0 + RANGE_TOL || !r.min.is_finite() || !r.max.is_finite() {
            return Err(Error::Hypothesis(format!(
                "symbol range [{:.6e}, {:.6e}] is not contained in [0, 1]",
                r.min, r.max
            )));
        }
        Ok(r)
    }

    /// One-sided tail `Σ_{n=ell+1}^{truncation} n |f̂(n)|²` with remainder
    /// information for the part beyond `truncation`.
    pub fn tail_sum(&self, ell: usize, truncation: usize) -> Result<TailSum> {
        if ell >= truncation {
            return Err(Error::InvalidArgument(format!(
                "tail sum needs ell < truncation (got ell = {ell}, truncation = {truncation})"
            )));
        }
        let upper = self.support().map_or(truncation, |b| b.min(truncation));
        let value = self.weighted_energy(ell + 1, upper);
        Ok(TailSum {
            cutoff_ell: ell,
            truncation_n: truncation,
            value,
            remainder: self.remainder_beyond(truncation),
        })
    }

    fn weighted_energy(&self, from: usize, to: usize) -> f64 {
        (from..=to)
            .map(|n| n as f64 * self.coeff(n as i64).norm_sqr())
            .sum()
    }

    fn remainder_beyond(&self, truncation: usize) -> Remainder {
        if let Some(b) = self.bandwidth() {
            return if b <= truncation {
                Remainder::Exact
            } else {
                Remainder::Bound(self.weighted_energy(truncation + 1, b))
            };
        }
        match self {
            Symbol::Poisson { c, r } => {
                // c² Σ_{n > T} n x^n with x = r²
                let x = r * r;
                let t = truncation as f64;
                let v = c * c * x.powf(t + 1.0) * ((t + 1.0) - t * x) / ((1.0 - x) * (1.0 - x));
                Remainder::Bound(v)
            }
            Symbol::ArcIndicator { .. } => Remainder::Divergent,
            Symbol::Affine { scale, inner, .. } => match inner.remainder_beyond(truncation) {
                Remainder::Bound(b) => Remainder::Bound(scale * scale * b),
                other => other,
            },
            _ => Remainder::Unknown,
        }
    }

    /// Fits the decay of the H^{1/2} tail over `ell_grid`.
    pub fn tail_decay_exponent(&self, ell_grid: &[usize]) -> Result<DecayFit> {
        if ell_grid.len() < 3 || ell_grid.windows(2).any(|w| w[0] >= w[1]) || ell_grid[0] == 0 {
            return Err(Error::InvalidArgument(
                "decay fit needs at least 3 strictly increasing positive cutoffs".into(),
            ));
        }
        let mut tails = Vec::with_capacity(ell_grid.len());
        for &ell in ell_grid {
            let t = self.tail_sum(ell, DEFAULT_TRUNCATION.max(ell + 1))?;
            match t.upper() {
                Some(v) if v.is_infinite() => return Ok(DecayFit::Divergent),
                Some(v) => tails.push(v),
                None => tails.push(t.value),
            }
        }
        if tails.iter().any(|&v| v == 0.0) {
            return Ok(DecayFit::ExactBandwidth {
                bandwidth: self.bandwidth().unwrap_or(0),
            });
        }
        let ys: Vec<f64> = tails.iter().map(|v| v.ln()).collect();
        let log_x: Vec<f64> = ell_grid.iter().map(|&l| (l as f64).ln()).collect();
        let lin_x: Vec<f64> = ell_grid.iter().map(|&l| l as f64).collect();
        let (power_slope, power_rss) = least_squares(&log_x, &ys);
        let (geo_slope, geo_rss) = least_squares(&lin_x, &ys);
        if geo_rss < power_rss {
            Ok(DecayFit::Geometric { log_rate: geo_slope })
        } else {
            Ok(DecayFit::Power {
                exponent: -power_slope,
            })
        }
    }

    /// Parses the JSON description `{"family": ..., "params": {...}}` or
    /// `{"family": "trig_poly", "coeffs": [{"n":0,"re":..,"im":..}, ...]}`.
    pub fn from_json(text: &str) -> Result<Symbol> {
        let spec: SymbolSpec = serde_json::from_str(text)?;
        spec.build()
    }

    /// JSON description of a closed-form symbol; composites have none.
    pub fn to_json(&self) -> Result<String> {
        let spec = SymbolSpec::from_symbol(self).ok_or_else(|| {
            Error::InvalidArgument(format!("{} symbols have no JSON form", self.family_name()))
        })?;
        Ok(serde_json::to_string(&spec)?)
    }

    /// Short stable hash of the symbol parameters.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(format!("{self:?}").as_bytes());
        hex::encode(&digest[..8])
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Constant { a } => write!(f, "constant({a})"),
            Symbol::RaisedCosine { a, b } => write!(f, "raised_cosine({a}, {b})"),
            Symbol::Poisson { c, r } => write!(f, "poisson({c}, {r})"),
            Symbol::TrigPoly { coeffs } => write!(f, "trig_poly(B = {})", coeffs.len() - 1),
            Symbol::PowerDecay { a, c, p, cutoff } => {
                write!(f, "power_decay({a}, {c}, {p}, {cutoff})")
            }
            Symbol::ArcIndicator { alpha, beta } => write!(f, "arc_indicator({alpha}, {beta})"),
            Symbol::Affine { scale, shift, inner } => write!(f, "{shift} + {scale}·[{inner}]"),
            Symbol::Product(a, b) => write!(f, "[{a}]·[{b}]"),
        }
    }
}

/// Trapezoid estimate of `f̂(n)` from point values on `nodes` equispaced nodes.
/// Used for symbols that only exist pointwise.
pub fn trapezoid_coeff(f: impl Fn(f64) -> f64, n: i64, nodes: usize) -> Complex64 {
    let m = nodes as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let t = k as f64 / m;
        acc += Complex64::from_polar(f(t), -2.0 * PI * n as f64 * t);
    }
    acc / m
}

fn finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidSymbol("symbol parameters must be finite".into()))
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(b, residual sum of squares)`.
fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    (slope, rss)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum SymbolSpec {
    Constant { params: ConstantParams },
    RaisedCosine { params: RaisedCosineParams },
    Poisson { params: PoissonParams },
    TrigPoly { coeffs: Vec<CoeffEntry> },
    PowerDecay { params: PowerDecayParams },
    ArcIndicator { params: ArcParams },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    a: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RaisedCosineParams {
    a: f64,
    b: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoissonParams {
    c: f64,
    r: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerDecayParams {
    a: f64,
    c: f64,
    p: f64,
    cutoff: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArcParams {
    alpha: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffEntry {
    n: i64,
    re: f64,
    #[serde(default)]
    im: f64,
}

impl SymbolSpec {
    fn build(self) -> Result<Symbol> {
        match self {
            SymbolSpec::Constant { params } => Symbol::constant(params.a),
            SymbolSpec::RaisedCosine { params } => Symbol::raised_cosine(params.a, params.b),
            SymbolSpec::Poisson { params } => Symbol::poisson(params.c, params.r),
            SymbolSpec::TrigPoly { coeffs } => {
                let entries: Vec<_> = coeffs
                    .iter()
                    .map(|e| (e.n, Complex64::new(e.re, e.im)))
                    .collect();
                Symbol::trig_poly(&entries)
            }
            SymbolSpec::PowerDecay { params } => {
                Symbol::power_decay(params.a, params.c, params.p, params.cutoff)
            }
            SymbolSpec::ArcIndicator { params } => Symbol::arc_indicator(params.alpha, params.beta),
        }
    }

    fn from_symbol(sym: &Symbol) -> Option<SymbolSpec> {
        Some(match sym {
            Symbol::Constant { a } => SymbolSpec::Constant {
                params: ConstantParams { a: *a },
            },
            Symbol::RaisedCosine { a, b } => SymbolSpec::RaisedCosine {
                params: RaisedCosineParams { a: *a, b: *b },
            },
            Symbol::Poisson { c, r } => SymbolSpec::Poisson {
                params: PoissonParams { c: *c, r: *r },
            },
            Symbol::TrigPoly { coeffs } => SymbolSpec::TrigPoly {
                coeffs: coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| CoeffEntry {
                        n: n as i64,
                        re: c.re,
                        im: c.im,
                    })
                    .collect(),
            },
            Symbol::PowerDecay { a, c, p, cutoff } => SymbolSpec::PowerDecay {
                params: PowerDecayParams {
                    a: *a,
                    c: *c,
                    p: *p,
                    cutoff: *cutoff,
                },
            },
            Symbol::ArcIndicator { alpha, beta } => SymbolSpec::ArcIndicator {
                params: ArcParams {
                    alpha: *alpha,
                    beta: *beta,
                },
            },
            Symbol::Affine { .. } | Symbol::Product(..) => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Symbol::constant(0.5).unwrap().eval(0.3), 0.5);
        assert_eq!(Symbol::raised_cosine(0.5, 0.5).unwrap().eval(0.0), 1.0);
        let p = Symbol::poisson(0.5, 0.25).unwrap();
        assert!((p.eval(0.0) - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_examples() {
        let k = Symbol::constant(0.5).unwrap();
        assert_eq!(k.coeff(0), c(0.5));
        assert_eq!(k.coeff(3), c(0.0));
        let rc = Symbol::raised_cosine(0.5, 0.5).unwrap();
        assert_eq!(rc.coeff(1), c(0.25));
        assert_eq!(rc.coeff(-1), c(0.25));
        let p = Symbol::poisson(0.5, 0.25).unwrap();
        assert!((p.coeff(2) - c(1.0 / 32.0)).norm() < 1e-17);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        // Smooth symbols: trapezoid is spectrally accurate.
        for sym in [
            Symbol::poisson(0.5, 0.25).unwrap(),
            Symbol::raised_cosine(0.4, 0.3).unwrap(),
            Symbol::power_decay(0.5, 0.1, 2.0, 40).unwrap(),
        ] {
            for n in -6..=6 {
                let q = trapezoid_coeff(|t| sym.eval(t), n, 1 << 10);
                assert!((q - sym.coeff(n)).norm() < 1e-12, "{sym} n={n}");
            }
        }
        // Indicator: trapezoid converges like 1/m; closed form must sit in that window.
        let arc = Symbol::arc_indicator(0.1, 0.6).unwrap();
        for n in [-3i64, 1, 2, 5] {
            let q = trapezoid_coeff(|t| arc.eval(t), n, QUADRATURE_NODES);
            assert!((q - arc.coeff(n)).norm() < 2.0 / QUADRATURE_NODES as f64);
        }
    }

    #[test]
    fn hermitian_symmetry_exact() {
        let syms = [
            Symbol::arc_indicator(0.13, 0.71).unwrap(),
            Symbol::trig_poly(&[(0, c(0.5)), (2, Complex64::new(0.1, -0.07))]).unwrap(),
            Symbol::poisson(0.3, 0.6).unwrap(),
        ];
        for s in &syms {
            for n in 0..=50 {
                assert_eq!(s.coeff(n), s.coeff(-n).conj());
            }
        }
    }

    #[test]
    fn parseval_for_band_limited() {
        let s = Symbol::trig_poly(&[(0, c(0.5)), (1, Complex64::new(0.1, 0.05)), (3, c(-0.08))])
            .unwrap();
        let b = s.bandwidth().unwrap() as i64;
        let energy: f64 = (-b..=b).map(|n| s.coeff(n).norm_sqr()).sum();
        let m = 1 << 12;
        let vals: Vec<f64> = (0..m).map(|k| s.eval(k as f64 / m as f64)).collect();
        let l2 = vals.iter().map(|v| v * v).sum::<f64>() / m as f64;
        let l1 = vals.iter().sum::<f64>() / m as f64;
        assert!((energy - l2).abs() < 1e-8);
        assert!(l2 <= l1 + 1e-8 && l1 <= 1.0 + 1e-8);
    }

    #[test]
    fn grid_values_agree_with_eval() {
        let s = Symbol::power_decay(0.5, 0.1, 2.0, 300).unwrap();
        let vals = s.grid_values(256);
        for (k, v) in vals.iter().enumerate() {
            assert!((v - s.eval(k as f64 / 256.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_sum_examples() {
        let rc = Symbol::raised_cosine(0.5, 0.5).unwrap();
        assert_eq!(rc.tail_sum(1, 100).unwrap().value, 0.0);
        let p = Symbol::poisson(0.5, 0.25).unwrap();
        let t = p.tail_sum(0, 100).unwrap();
        // (1/4) · (1/16) / (15/16)²
        assert!((t.value - 0.25 * (1.0 / 16.0) / (225.0 / 256.0)).abs() < 1e-15);
        assert!(matches!(t.remainder, Remainder::Bound(b) if b < 1e-100));
        assert_eq!(Symbol::constant(0.3).unwrap().tail_sum(4, 10).unwrap().value, 0.0);
        assert!(p.tail_sum(5, 5).is_err());
    }

    #[test]
    fn tail_sum_monotone_and_remainders() {
        let p = Symbol::poisson(0.5, 0.8).unwrap();
        let full = p.tail_sum(0, 2000).unwrap().value;
        let short = p.tail_sum(0, 20).unwrap();
        let Remainder::Bound(rem) = short.remainder else { panic!() };
        assert!((short.value + rem - full).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for ell in 0..30 {
            let v = p.tail_sum(ell, 500).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
        let pd = Symbol::power_decay(0.5, 0.1, 2.0, 1000).unwrap();
        let cut = pd.tail_sum(0, 100).unwrap();
        let exact = pd.tail_sum(0, 1000).unwrap();
        assert_eq!(exact.remainder, Remainder::Exact);
        assert!((cut.upper().unwrap() - exact.value).abs() < 1e-14);
        assert_eq!(
            Symbol::arc_indicator(0.0, 0.5).unwrap().tail_sum(1, 10).unwrap().remainder,
            Remainder::Divergent
        );
    }

    #[test]
    fn margins() {
        assert_eq!(Symbol::constant(0.5).unwrap().contraction_margin(), 0.5);
        let p = Symbol::poisson(0.5, 0.25).unwrap();
        assert!((p.contraction_margin() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(Symbol::arc_indicator(0.0, 0.5).unwrap().contraction_margin(), 0.0);
    }

    #[test]
    fn decay_fits() {
        let pd = Symbol::power_decay(0.5, 0.1, 2.0, 10_000).unwrap();
        match pd.tail_decay_exponent(&[8, 16, 32, 64]).unwrap() {
            DecayFit::Power { exponent } => assert!((exponent - 2.0).abs() < 0.1, "{exponent}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Symbol::raised_cosine(0.5, 0.5).unwrap().tail_decay_exponent(&[2, 4, 8]).unwrap(),
            DecayFit::ExactBandwidth { bandwidth: 1 }
        ));
        assert!(matches!(
            Symbol::poisson(0.5, 0.25).unwrap().tail_decay_exponent(&[2, 4, 8]).unwrap(),
            DecayFit::Geometric { .. }
        ));
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let s = Symbol::from_json(r#"{"family":"poisson","params":{"c":0.5,"r":0.25}}"#).unwrap();
        assert_eq!(s, Symbol::poisson(0.5, 0.25).unwrap());
        let t = Symbol::from_json(
            r#"{"family":"trig_poly","coeffs":[{"n":0,"re":0.5,"im":0.0},{"n":2,"re":0.1,"im":0.2}]}"#,
        )
        .unwrap();
        assert_eq!(t.coeff(-2), Complex64::new(0.1, -0.2));
        assert_eq!(Symbol::from_json(&t.to_json().unwrap()).unwrap(), t);
        assert!(Symbol::from_json(
            r#"{"family":"trig_poly","coeffs":[{"n":-1,"re":0.5,"im":0.0}]}"#
        )
        .is_err());
        assert!(Symbol::from_json(r#"{"family":"constant","params":{"a":0.5,"z":1}}"#).is_err());
        assert!(Symbol::from_json(r#"{"family":"constant","params":{"a":0.5},"x":1}"#).is_err());
        assert!(Symbol::from_json(r#"{"family":"poisson","params":{"c":0.5,"r":1.5}}"#).is_err());
    }

    #[test]
    fn effective_bandwidth_of_poisson() {
        let p = Symbol::poisson(0.5, 0.25).unwrap();
        let b = p.effective_bandwidth(1e-16).unwrap();
        let tail: f64 = ((b + 1)..(b + 200)).map(|n| 2.0 * p.coeff(n as i64).norm()).sum();
        assert!(tail <= 1e-16);
        assert!(b < 40);
    }

    #[test]
    fn composites() {
        let f = Symbol::poisson(0.5, 0.25).unwrap();
        let g = f.centered();
        assert!((g.coeff(0).re - 0.0).abs() < 1e-16);
        assert_eq!(g.coeff(3), f.coeff(3) * 2.0);
        let one_minus = f.complement();
        assert!((one_minus.range().max - (1.0 - 0.3)).abs() < 1e-15);
        let rc = Symbol::raised_cosine(0.5, 0.5).unwrap();
        let sq = rc.product(&rc);
        // (1/2 + cos/2)² = 3/8 + cos/2 + cos(4πt)/8
        assert!((sq.coeff(0).re - 0.375).abs() < 1e-15);
        assert!((sq.coeff(1).re - 0.25).abs() < 1e-15);
        assert!((sq.coeff(2).re - 0.0625).abs() < 1e-15);
        assert_eq!(sq.bandwidth(), Some(2));
    }
}

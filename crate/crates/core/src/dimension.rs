//! Moment sums `S_N^{(q)} = Σ_ε μ([ε])^q` and the `L^q`-dimension estimates
//! built on them.
//!
//! With `g = 2f - 1` and `a_J = det T_J(g)`,
//! `S_N^{(q)} = 2^{-(q-1)N} Σ_N^{(q)}(g)` where `Σ_N^{(q)}` is the Walsh sum
//! over `q`-tuples of subsets whose symmetric difference is empty; for `q = 2`
//! it reduces to `Σ_J a_J²`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Measure, PrefixFactor};
use crate::symbol::{Side, Symbol, QUADRATURE_NODES};
use crate::toeplitz::{build_t_n, szego_log_integral_values};

/// Largest `N` for the cylinder-tree moment sums.
pub const S_N_CAP: usize = 22;

/// Largest `N` for the subset enumeration of `Σ_N^{(2)}`.
pub const SIGMA_CAP: usize = 18;

/// Largest `q N` for the Walsh tuple sum.
pub const WALSH_CAP: usize = 20;

/// Depth at which the cylinder tree is split into parallel tasks.
pub const SPLIT_DEPTH: usize = 4;

/// Default β grid size for the Szegő upper bound.
pub const BETA_GRID: usize = 41;

/// Slack allowed in sub-multiplicativity checks (log₂ scale).
pub const SUBMULT_TOL: f64 = 1e-9;

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SnqRow {
    pub n: usize,
    pub log2_s: f64,
    /// `-log₂ S_N / ((q - 1) N)`.
    pub estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SnqTable {
    pub q: f64,
    pub rows: Vec<SnqRow>,
}

impl SnqTable {
    pub fn log2_s(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.log2_s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub q: f64,
    pub table: SnqTable,
    /// `max_N estimate_N`.
    pub fekete_lower: f64,
    pub last_estimate: f64,
    /// True when `f >= 1/2` or `f <= 1/2` and `q` is an integer, so
    /// `fekete_lower` is a certified lower bound on `dim_q`.
    pub certified: bool,
    pub szego_lower: Option<f64>,
    pub szego_upper: Option<SzegoUpper>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SzegoUpper {
    pub value: f64,
    pub beta: f64,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be > 1 (got {q})")));
    }
    Ok(())
}

fn power(w: f64, q: f64) -> f64 {
    if q.fract() == 0.0 && q <= i32::MAX as f64 {
        w.powi(q as i32)
    } else {
        w.powf(q)
    }
}

/// Walks the subtree below `pf`, adding `(2^k μ)^q` to `acc[k]` at every depth.
fn walk(pf: &mut PrefixFactor<'_>, q: f64, n_max: usize, acc: &mut [Neumaier]) -> Result<()> {
    let k = pf.len();
    acc[k].add(power(pf.scaled_prob(), q));
    if k == n_max {
        return Ok(());
    }
    for bit in [false, true] {
        pf.push(bit)?;
        let r = walk(pf, q, n_max, acc);
        pf.pop();
        r?;
    }
    Ok(())
}

/// `Σ_ε (2^N μ[ε])^q` for every `N <= n_max`, index `N`.
fn scaled_moments(measure: &Measure, q: f64, n_max: usize) -> Result<Vec<f64>> {
    let split = SPLIT_DEPTH.min(n_max);
    let mut total = vec![Neumaier::default(); n_max + 1];
    // Depths below the split come from one small sequential walk.
    {
        let mut pf = measure.prefix();
        let mut acc = vec![Neumaier::default(); n_max + 1];
        walk(&mut pf, q, split.saturating_sub(1).min(n_max), &mut acc)?;
        for (t, a) in total.iter_mut().zip(&acc).take(split) {
            t.merge(a);
        }
    }
    let parts: Vec<Vec<Neumaier>> = (0..1u64 << split)
        .into_par_iter()
        .map(|root| {
            let mut pf = measure.prefix();
            for k in 0..split {
                pf.push((root >> (split - 1 - k)) & 1 == 1)?;
            }
            let mut acc = vec![Neumaier::default(); n_max + 1];
            walk(&mut pf, q, n_max, &mut acc)?;
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    for part in &parts {
        for (t, a) in total.iter_mut().zip(part).skip(split) {
            t.merge(a);
        }
    }
    Ok(total.iter().map(Neumaier::value).collect())
}

fn check_n(n: usize, cap: usize, what: &'static str) -> Result<()> {
    if n == 0 || n > cap {
        return Err(Error::CapExceeded {
            what,
            requested: n,
            cap,
        });
    }
    Ok(())
}

/// `log₂ S_N^{(q)}` from the cylinder tree.
pub fn log2_s_n_q(sym: &Symbol, n: usize, q: f64) -> Result<f64> {
    Ok(s_n_q_table(sym, q, n)?.rows[n - 1].log2_s)
}

/// `S_N^{(q)}` on the linear scale.
pub fn s_n_q(sym: &Symbol, n: usize, q: f64) -> Result<f64> {
    Ok(log2_s_n_q(sym, n, q)?.exp2())
}

/// Rows for `N = 1..=n_max` from a single traversal.
pub fn s_n_q_table(sym: &Symbol, q: f64, n_max: usize) -> Result<SnqTable> {
    check_q(q)?;
    check_n(n_max, S_N_CAP, "N")?;
    let measure = Measure::new(sym)?;
    let sums = scaled_moments(&measure, q, n_max)?;
    let rows = (1..=n_max)
        .map(|n| {
            let log2_s = sums[n].log2() - q * n as f64;
            SnqRow {
                n,
                log2_s,
                estimate: -log2_s / ((q - 1.0) * n as f64),
            }
        })
        .collect();
    Ok(SnqTable { q, rows })
}

/// Subset determinants `a_J = det T_J(g)` indexed by bit mask (bit `i` is
/// position `i`).
fn subset_dets(g: &Symbol, n: usize) -> Result<Vec<f64>> {
    let t = build_t_n(g, n);
    (0..1usize << n)
        .into_par_iter()
        .map(|mask| {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let ld = t.principal_submatrix(&idx).log_det()?;
            Ok(ld.value().re)
        })
        .collect()
}

/// `Σ_N^{(2)}(g) = Σ_{J ⊆ [N]} det² T_J(g)` with `g = 2f - 1`.
pub fn sigma_n_2(sym: &Symbol, n: usize) -> Result<f64> {
    check_n(n, SIGMA_CAP, "N")?;
    let a = subset_dets(&sym.centered(), n)?;
    let mut acc = Neumaier::default();
    for v in a {
        acc.add(v * v);
    }
    Ok(acc.value())
}

/// Walsh expansion of `Σ_N^{(q)}(g)`: the sum of `a_{J_1} ⋯ a_{J_q}` over
/// tuples in which every index appears an even number of times. The last
/// subset is fixed by the others.
pub fn sigma_n_q_walsh(sym: &Symbol, n: usize, q: usize) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidArgument("q must be >= 2".into()));
    }
    if n == 0 || q * n > WALSH_CAP {
        return Err(Error::CapExceeded {
            what: "q·N",
            requested: q * n,
            cap: WALSH_CAP,
        });
    }
    let a = subset_dets(&sym.centered(), n)?;
    let subsets = 1usize << n;
    let free = 1usize << ((q - 1) * n);
    let parts: Vec<Neumaier> = (0..subsets)
        .into_par_iter()
        .map(|first| {
            let mut acc = Neumaier::default();
            for rest in 0..free / subsets {
                let (mut xor, mut prod) = (first, a[first]);
                for k in 0..q - 2 {
                    let j = (rest >> (k * n)) & (subsets - 1);
                    xor ^= j;
                    prod *= a[j];
                }
                acc.add(prod * a[xor]);
            }
            acc
        })
        .collect();
    let mut total = Neumaier::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.value())
}

/// `(1/ln 2) ∫ log(2 / (1 + g²))`, evaluated as `1 - (1/ln 2) ∫ log(1 + g²)`.
pub fn corr_dim_szego_lower(sym: &Symbol) -> Result<f64> {
    let g = sym.centered().grid_values(QUADRATURE_NODES);
    let phi: Vec<f64> = g.iter().map(|v| 1.0 + v * v).collect();
    Ok(1.0 - szego_log_integral_values(&phi)?.value / std::f64::consts::LN_2)
}

/// `1 - (1/ln 2) ∫ log((1 + βg)² / (1 + β²))`; `+inf` when the integrand
/// reaches the clamp (the log-integral is `-inf` there).
fn szego_upper_at(g: &[f64], beta: f64) -> Result<f64> {
    let phi: Vec<f64> = g
        .iter()
        .map(|v| (1.0 + beta * v).powi(2) / (1.0 + beta * beta))
        .collect();
    let s = szego_log_integral_values(&phi)?;
    if s.clamped {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 - s.value / std::f64::consts::LN_2)
}

/// Minimum of the Szegő upper bound over `beta_grid`.
pub fn corr_dim_szego_upper(sym: &Symbol, beta_grid: &[f64]) -> Result<SzegoUpper> {
    if beta_grid.is_empty() || beta_grid.iter().any(|b| !(-1.0..=1.0).contains(b)) {
        return Err(Error::InvalidArgument("β grid must be nonempty and inside [-1, 1]".into()));
    }
    let g = sym.centered().grid_values(QUADRATURE_NODES);
    let mut best = SzegoUpper {
        value: f64::INFINITY,
        beta: beta_grid[0],
    };
    for &beta in beta_grid {
        let v = szego_upper_at(&g, beta)?;
        if v < best.value {
            best = SzegoUpper { value: v, beta };
        }
    }
    Ok(best)
}

/// Uniform grid of `points` values on `[-1, 1]`.
pub fn beta_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|k| -1.0 + 2.0 * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Grid search followed by golden-section refinement around the grid
/// minimizer. The bound is convex in β on `[-1, 1]`.
pub fn corr_dim_szego_upper_refined(sym: &Symbol, points: usize) -> Result<SzegoUpper> {
    let grid = beta_grid(points.max(3));
    let coarse = corr_dim_szego_upper(sym, &grid)?;
    let g = sym.centered().grid_values(QUADRATURE_NODES);
    let step = grid[1] - grid[0];
    let (mut lo, mut hi) = ((coarse.beta - step).max(-1.0), (coarse.beta + step).min(1.0));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = szego_upper_at(&g, x1)?;
    let mut f2 = szego_upper_at(&g, x2)?;
    for _ in 0..80 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = szego_upper_at(&g, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = szego_upper_at(&g, x2)?;
        }
    }
    let refined = if f1 <= f2 {
        SzegoUpper { value: f1, beta: x1 }
    } else {
        SzegoUpper { value: f2, beta: x2 }
    };
    Ok(if refined.value < coarse.value { refined } else { coarse })
}

/// Moment-sum table plus the Fekete and Szegő summaries.
pub fn dim_q_estimate(sym: &Symbol, q: f64, n_max: usize) -> Result<DimensionEstimate> {
    dim_q_estimate_with(sym, q, n_max, BETA_GRID)
}

pub fn dim_q_estimate_with(sym: &Symbol, q: f64, n_max: usize, beta_points: usize) -> Result<DimensionEstimate> {
    let table = s_n_q_table(sym, q, n_max)?;
    let fekete_lower = table.rows.iter().map(|r| r.estimate).fold(f64::NEG_INFINITY, f64::max);
    let last_estimate = table.rows.last().map_or(f64::NAN, |r| r.estimate);
    let certified = q.fract() == 0.0 && sym.one_sided().is_some();
    let (szego_lower, szego_upper) = if q == 2.0 {
        (
            Some(corr_dim_szego_lower(sym)?),
            Some(corr_dim_szego_upper_refined(sym, beta_points)?),
        )
    } else {
        (None, None)
    };
    Ok(DimensionEstimate {
        q,
        table,
        fekete_lower,
        last_estimate,
        certified,
        szego_lower,
        szego_upper,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubmultRow {
    pub m: usize,
    pub n: usize,
    /// `log₂ S_M + log₂ S_N - log₂ S_{M+N}`; non-negative when sub-multiplicative.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubmultReport {
    pub q: f64,
    pub side: Option<Side>,
    pub rows: Vec<SubmultRow>,
}

impl SubmultReport {
    pub fn hypothesis_satisfied(&self) -> bool {
        self.side.is_some()
    }

    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Evaluates `S_{M+N} <= S_M S_N` on each pair. Symbols that are not
/// one-sided are still evaluated; the report says so.
pub fn submult_check(sym: &Symbol, q: f64, pairs: &[(usize, usize)]) -> Result<SubmultReport> {
    let top = pairs.iter().map(|&(m, n)| m + n).max().unwrap_or(0);
    if pairs.iter().any(|&(m, n)| m == 0 || n == 0) {
        return Err(Error::InvalidArgument("pair entries must be >= 1".into()));
    }
    let table = s_n_q_table(sym, q, top.max(1))?;
    let rows = pairs
        .iter()
        .map(|&(m, n)| {
            let s = |k: usize| table.rows[k - 1].log2_s;
            let margin = s(m) + s(n) - s(m + n);
            SubmultRow {
                m,
                n,
                margin,
                holds: margin >= -SUBMULT_TOL,
            }
        })
        .collect();
    Ok(SubmultReport {
        q,
        side: sym.one_sided(),
        rows,
    })
}

/// Both sides of `Σ_N^{(2)}(g) >= det² T_N((1 + βg)/√(1 + β²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FloorCheck {
    pub beta: f64,
    pub sigma: f64,
    pub floor: f64,
}

pub fn cauchy_schwarz_floor(sym: &Symbol, n: usize, beta: f64) -> Result<FloorCheck> {
    let sigma = sigma_n_2(sym, n)?;
    let s = 1.0 / (1.0 + beta * beta).sqrt();
    let phi = sym.centered().affine(beta * s, s);
    let det = build_t_n(&phi, n).log_det()?.value().re;
    Ok(FloorCheck {
        beta,
        sigma,
        floor: det * det,
    })
}

/// `det T_N((1 + g²)/2)`, an upper bound on `S_N^{(2)}`.
pub fn squared_symbol_bound(sym: &Symbol, n: usize) -> Result<f64> {
    let g = sym.centered();
    let phi = g.product(&g).affine(0.5, 0.5);
    Ok(build_t_n(&phi, n).log_det()?.value().re)
}

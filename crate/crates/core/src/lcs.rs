//! Longest common substring of two binary prefixes and the Monte Carlo
//! growth experiment `M_n / ln n → (2 / ln 2) / dim₂`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dimension::dim_q_estimate;
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::sampler::sample_bits;
use crate::symbol::Symbol;

/// Window length used for the dim₂ estimate behind the target column.
pub const TARGET_DIM_N: usize = 14;

/// Suffix automaton over `{0, 1}`.
struct SuffixAutomaton {
    next: Vec<[u32; 2]>,
    link: Vec<u32>,
    len: Vec<u32>,
    last: u32,
}

const NONE: u32 = u32::MAX;

impl SuffixAutomaton {
    fn new(text: &[bool]) -> SuffixAutomaton {
        let cap = 2 * text.len() + 1;
        let mut sa = SuffixAutomaton {
            next: Vec::with_capacity(cap),
            link: Vec::with_capacity(cap),
            len: Vec::with_capacity(cap),
            last: 0,
        };
        sa.add_state(0, NONE, [NONE; 2]);
        for &b in text {
            sa.extend(usize::from(b));
        }
        sa
    }

    fn add_state(&mut self, len: u32, link: u32, next: [u32; 2]) -> u32 {
        self.next.push(next);
        self.link.push(link);
        self.len.push(len);
        (self.len.len() - 1) as u32
    }

    fn extend(&mut self, c: usize) {
        let cur = self.add_state(self.len[self.last as usize] + 1, 0, [NONE; 2]);
        let mut p = self.last;
        while p != NONE && self.next[p as usize][c] == NONE {
            self.next[p as usize][c] = cur;
            p = self.link[p as usize];
        }
        if p != NONE {
            let q = self.next[p as usize][c];
            if self.len[p as usize] + 1 == self.len[q as usize] {
                self.link[cur as usize] = q;
            } else {
                let clone = self.add_state(self.len[p as usize] + 1, self.link[q as usize], self.next[q as usize]);
                while p != NONE && self.next[p as usize][c] == q {
                    self.next[p as usize][c] = clone;
                    p = self.link[p as usize];
                }
                self.link[q as usize] = clone;
                self.link[cur as usize] = clone;
            }
        }
        self.last = cur;
    }

    /// Longest substring of the automaton's text that also occurs in `other`.
    fn longest_common(&self, other: &[bool]) -> usize {
        let (mut state, mut cur, mut best) = (0u32, 0u32, 0u32);
        for &b in other {
            let c = usize::from(b);
            while state != 0 && self.next[state as usize][c] == NONE {
                state = self.link[state as usize];
                cur = self.len[state as usize];
            }
            let t = self.next[state as usize][c];
            if t != NONE {
                state = t;
                cur += 1;
            }
            best = best.max(cur);
        }
        best as usize
    }
}

fn check_len(x: &[bool], y: &[bool], n: usize) -> Result<()> {
    if n > x.len() || n > y.len() {
        return Err(Error::CapExceeded {
            what: "prefix length",
            requested: n,
            cap: x.len().min(y.len()),
        });
    }
    Ok(())
}

/// `M_n(x, y)`: length of the longest common substring of `x[..n]` and `y[..n]`.
pub fn lcs_length(x: &[bool], y: &[bool], n: usize) -> Result<usize> {
    check_len(x, y, n)?;
    Ok(SuffixAutomaton::new(&x[..n]).longest_common(&y[..n]))
}

/// Quadratic dynamic-programming reference for [`lcs_length`].
pub fn lcs_length_dp(x: &[bool], y: &[bool], n: usize) -> Result<usize> {
    check_len(x, y, n)?;
    let mut prev = vec![0usize; n + 1];
    let mut cur = vec![0usize; n + 1];
    let mut best = 0;
    for &xi in &x[..n] {
        for j in 0..n {
            cur[j + 1] = if xi == y[j] { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LcsExperimentRow {
    pub n: usize,
    pub trials: usize,
    pub mean_mn: f64,
    pub std_mn: f64,
    /// `mean_mn / ln n`.
    pub mn_over_ln_n: f64,
    /// `ln(mean_mn) / ln n`.
    pub log_mn_over_log_n: f64,
    /// `(2 / ln 2) / dim₂`.
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LcsExperiment {
    pub rows: Vec<LcsExperimentRow>,
    pub dim2: f64,
    /// False when the symbol is not one-sided around 1/2 with a positive
    /// margin or its coefficient decay does not reach `H^{1/2+ε}`; the
    /// target is then only indicative.
    pub certified: bool,
}

/// Whether the symbol meets the hypotheses under which the target is the limit.
pub fn target_is_certified(sym: &Symbol) -> bool {
    let decay_ok = sym
        .tail_decay_exponent(&[4, 8, 16, 32, 64])
        .map(|d| d.beyond_half_sobolev())
        .unwrap_or(false);
    sym.one_sided().is_some() && sym.contraction_margin() > 0.0 && decay_ok
}

/// Runs the experiment with dim₂ estimated by the dimension module at
/// `N =` [`TARGET_DIM_N`].
pub fn rate_experiment(sym: &Symbol, n_grid: &[usize], trials: usize, seed: u64) -> Result<LcsExperiment> {
    let dim2 = dim_q_estimate(sym, 2.0, TARGET_DIM_N)?.last_estimate;
    rate_experiment_with_dim(sym, n_grid, trials, seed, dim2)
}

/// Pair `t` uses streams `seed ^ 2t` and `seed ^ (2t + 1)`; each pair is
/// sampled once at the largest `n` and its prefixes give the smaller rows.
pub fn rate_experiment_with_dim(
    sym: &Symbol,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    dim2: f64,
) -> Result<LcsExperiment> {
    if n_grid.is_empty() || n_grid.iter().any(|&n| n < 2) {
        return Err(Error::InvalidArgument("n grid must be nonempty with entries >= 2".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let measure = Measure::new(sym)?;
    let n_max = *n_grid.iter().max().expect("nonempty");
    let per_trial: Vec<Vec<usize>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rx = ChaCha8Rng::seed_from_u64(seed ^ (2 * t));
            let mut ry = ChaCha8Rng::seed_from_u64(seed ^ (2 * t + 1));
            let x = sample_bits(&measure, n_max, &mut rx)?;
            let y = sample_bits(&measure, n_max, &mut ry)?;
            n_grid.iter().map(|&n| lcs_length(&x, &y, n)).collect()
        })
        .collect::<Result<_>>()?;
    let target = (2.0 / std::f64::consts::LN_2) / dim2;
    let rows = n_grid
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let vals: Vec<f64> = per_trial.iter().map(|v| v[k] as f64).collect();
            let mean = vals.iter().sum::<f64>() / trials as f64;
            let var = if trials > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
            } else {
                0.0
            };
            let ln_n = (n as f64).ln();
            LcsExperimentRow {
                n,
                trials,
                mean_mn: mean,
                std_mn: var.sqrt(),
                mn_over_ln_n: mean / ln_n,
                log_mn_over_log_n: mean.ln() / ln_n,
                target,
            }
        })
        .collect();
    Ok(LcsExperiment {
        rows,
        dim2,
        certified: target_is_certified(sym),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn examples() {
        let x = bits("0110100110");
        assert_eq!(lcs_length(&x, &x, 10).unwrap(), 10);
        assert_eq!(lcs_length(&bits("0000"), &bits("1111"), 4).unwrap(), 0);
        assert_eq!(lcs_length(&bits("0110"), &bits("1001"), 4).unwrap(), 2);
        assert_eq!(lcs_length_dp(&bits("0110"), &bits("1001"), 4).unwrap(), 2);
        assert!(lcs_length(&bits("01"), &bits("011"), 3).is_err());
    }

    #[test]
    fn identical_prefixes_give_n_over_ln_n() {
        let fair = Symbol::constant(0.5).unwrap();
        let x = crate::sampler::sample_prefix(&fair, 4096, 1).unwrap().bits;
        let m = lcs_length(&x, &x, 4096).unwrap();
        assert_eq!(m, 4096);
        assert!((m as f64 / 4096f64.ln() - 4096.0 / 4096f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn experiment_shape() {
        let fair = Symbol::constant(0.5).unwrap();
        let exp = rate_experiment(&fair, &[64, 256], 8, 3).unwrap();
        assert_eq!(exp.rows.len(), 2);
        assert_eq!(exp.dim2, 1.0);
        assert!(exp.certified);
        for r in &exp.rows {
            assert!(r.mean_mn >= 0.0 && r.mean_mn <= r.n as f64);
            assert!((r.target - 2.0 / std::f64::consts::LN_2).abs() < 1e-12);
        }
        assert!(exp.rows[1].mean_mn >= exp.rows[0].mean_mn);
        let again = rate_experiment(&fair, &[64, 256], 8, 3).unwrap();
        assert_eq!(exp, again);
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
        (1usize..400, 0.05f64..0.95).prop_flat_map(|(n, p)| {
            let w = prop::bool::weighted(p);
            (prop::collection::vec(w, n), prop::collection::vec(w, n))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn automaton_matches_dp((x, y) in arb_pair()) {
            let n = x.len();
            prop_assert_eq!(lcs_length(&x, &y, n).unwrap(), lcs_length_dp(&x, &y, n).unwrap());
        }

        #[test]
        fn symmetric_and_monotone((x, y) in arb_pair()) {
            let n = x.len();
            prop_assert_eq!(lcs_length(&x, &y, n).unwrap(), lcs_length(&y, &x, n).unwrap());
            let mut prev = 0;
            for m in (1..=n).step_by(17) {
                let v = lcs_length(&x, &y, m).unwrap();
                prop_assert!(v >= prev && v <= m);
                prev = v;
            }
        }
    }
}

//! Exact sequential sampling by the chain rule
//! `P(ε) = Π_k P(ε_k | ε_0..ε_{k-1})`, with conditionals from the incremental
//! factorization in [`crate::measure`].
//!
//! Trajectory `i` of a batch seeded with `seed` draws from a ChaCha8 stream
//! seeded with `seed ^ i`, so batches are reproducible regardless of how
//! trajectories are scheduled onto threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::measure::{Cylinder, Measure};
use crate::symbol::Symbol;

/// Longest prefix sampled without a finite bandwidth (full factor rows cost
/// `O(n³)` time and `O(n²)` memory).
pub const FULL_ROW_CAP: usize = 4096;

/// Longest word accepted by the goodness-of-fit harness.
pub const MAX_WORD_LEN: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinarySequence {
    pub bits: Vec<bool>,
    pub seed: u64,
    pub fingerprint: String,
}

impl BinarySequence {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_ascii(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Bits packed most significant first, the last byte zero-padded.
    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = self
            .bits
            .chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i))))
            .collect();
        hex::encode(bytes)
    }

    pub fn ones_fraction(&self) -> f64 {
        self.bits.iter().filter(|&&b| b).count() as f64 / self.len().max(1) as f64
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream)
}

/// Draws `n` bits from `rng`.
pub fn sample_bits(measure: &Measure, n: usize, rng: &mut impl Rng) -> Result<Vec<bool>> {
    if measure.bandwidth().is_none() && n > FULL_ROW_CAP {
        return Err(Error::CapExceeded {
            what: "prefix length without finite bandwidth",
            requested: n,
            cap: FULL_ROW_CAP,
        });
    }
    let mut pf = measure.prefix();
    for _ in 0..n {
        let p = pf.next_one_prob()?;
        let u: f64 = rng.gen();
        pf.push(u < p)?;
        pf.forget_history();
    }
    Ok(pf.bits().to_vec())
}

/// Prefix of length `n`, drawn from the stream for `seed`.
pub fn sample_prefix(sym: &Symbol, n: usize, seed: u64) -> Result<BinarySequence> {
    let measure = Measure::new(sym)?;
    sample_prefix_from(&measure, n, seed, 0)
}

/// Trajectory `stream` of the batch seeded with `seed`.
pub fn sample_prefix_from(measure: &Measure, n: usize, seed: u64, stream: u64) -> Result<BinarySequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("prefix length must be >= 1".into()));
    }
    let mut rng = rng_for(seed, stream);
    Ok(BinarySequence {
        bits: sample_bits(measure, n, &mut rng)?,
        seed: seed ^ stream,
        fingerprint: measure.symbol().fingerprint(),
    })
}

/// `count` independent trajectories; trajectory `i` uses stream `seed ^ i`.
pub fn sample_many(sym: &Symbol, n: usize, count: usize, seed: u64) -> Result<Vec<BinarySequence>> {
    let measure = Measure::new(sym)?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_prefix_from(&measure, n, seed, i))
        .collect()
}

/// Chi-square comparison of sampled word frequencies with exact cylinder
/// probabilities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodnessOfFit {
    pub word_len: usize,
    pub n_samples: usize,
    /// Position of the word inside each trajectory.
    pub offset: usize,
    pub counts: Vec<u64>,
    pub expected: Vec<f64>,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Largest `|count - n p| / √(n p (1 - p))` over the words.
    pub max_abs_z: f64,
}

/// Goodness of fit of `sym` against its own exact cylinder probabilities.
/// Each sample is the word at positions `0..word_len` of an independent
/// trajectory.
pub fn empirical_cylinder_test(sym: &Symbol, word_len: usize, n_samples: usize, seed: u64) -> Result<GoodnessOfFit> {
    goodness_of_fit(sym, sym, word_len, n_samples, seed, 0)
}

/// Samples from `sample_from` and tests against `reference`, reading each
/// word at `offset` into its trajectory. By stationarity any offset has the
/// same law; a positive offset exercises longer conditioning chains.
pub fn goodness_of_fit(
    sample_from: &Symbol,
    reference: &Symbol,
    word_len: usize,
    n_samples: usize,
    seed: u64,
    offset: usize,
) -> Result<GoodnessOfFit> {
    if word_len == 0 || word_len > MAX_WORD_LEN {
        return Err(Error::CapExceeded {
            what: "word length",
            requested: word_len,
            cap: MAX_WORD_LEN,
        });
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let probs = Measure::new(reference)?.all_cylinder_probs(word_len)?;
    let source = Measure::new(sample_from)?;
    let words: Vec<usize> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let bits = sample_bits(&source, offset + word_len, &mut rng)?;
            Ok(Cylinder::new(bits[offset..].to_vec())?.index() as usize)
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; 1 << word_len];
    for w in words {
        counts[w] += 1;
    }
    let n = n_samples as f64;
    let expected: Vec<f64> = probs.iter().map(|p| p * n).collect();
    let mut chi_square = 0.0;
    let mut max_abs_z: f64 = 0.0;
    let mut cells = 0usize;
    for ((&c, &e), &p) in counts.iter().zip(&expected).zip(&probs) {
        if e <= 0.0 {
            if c > 0 {
                chi_square = f64::INFINITY;
            }
            continue;
        }
        cells += 1;
        let diff = c as f64 - e;
        chi_square += diff * diff / e;
        let sd = (n * p * (1.0 - p)).sqrt();
        if sd > 0.0 {
            max_abs_z = max_abs_z.max(diff.abs() / sd);
        }
    }
    let dof = cells.saturating_sub(1).max(1);
    let p_value = if chi_square.is_finite() {
        ChiSquared::new(dof as f64)
            .map_err(|e| Error::Numeric(e.to_string()))?
            .sf(chi_square)
    } else {
        0.0
    };
    Ok(GoodnessOfFit {
        word_len,
        n_samples,
        offset,
        counts,
        expected,
        chi_square,
        dof,
        p_value,
        max_abs_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fair_coin_mean() {
        let fair = Symbol::constant(0.5).unwrap();
        let n = 10_000;
        for seed in [1u64, 2, 3, 42] {
            let s = sample_prefix(&fair, n, seed).unwrap();
            assert_eq!(s.len(), n);
            assert!((s.ones_fraction() - 0.5).abs() <= 1.5 / (n as f64).sqrt());
        }
    }

    #[test]
    fn intensity_matches_zeroth_coefficient() {
        for sym in [
            Symbol::poisson(0.5, 0.25).unwrap(),
            Symbol::raised_cosine(0.3, 0.2).unwrap(),
            Symbol::constant(0.8).unwrap(),
        ] {
            let batch = sample_many(&sym, 2000, 10, 7).unwrap();
            let mean = batch.iter().map(|s| s.ones_fraction()).sum::<f64>() / 10.0;
            let f0 = sym.coeff(0).re;
            // Generous Monte Carlo slack for 2·10⁴ correlated bits.
            assert!((mean - f0).abs() < 0.02, "{sym}: {mean} vs {f0}");
        }
    }

    #[test]
    fn adjacent_ones_frequency() {
        let rc = Symbol::raised_cosine(0.5, 0.5).unwrap();
        let s = sample_prefix(&rc, 20_001, 11).unwrap();
        let hits = s.bits.windows(2).filter(|w| w[0] && w[1]).count() as f64;
        let n = 20_000.0;
        let p = 3.0 / 16.0;
        // Overlapping windows are dependent; allow 3σ of the independent
        // binomial plus a factor for positive correlation.
        assert!((hits / n - p).abs() < 3.0 * 2.0 * (p * (1.0 - p) / n).sqrt());
    }

    #[test]
    fn reproducible() {
        let sym = Symbol::poisson(0.6, 0.2).unwrap();
        let a = sample_prefix(&sym, 500, 99).unwrap();
        let b = sample_prefix(&sym, 500, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.bits, sample_prefix(&sym, 500, 100).unwrap().bits);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| sample_many(&sym, 64, 8, 5).unwrap());
        assert_eq!(single, sample_many(&sym, 64, 8, 5).unwrap());
    }

    #[test]
    fn hex_packing() {
        let s = BinarySequence {
            bits: "1010000111".chars().map(|c| c == '1').collect(),
            seed: 0,
            fingerprint: String::new(),
        };
        assert_eq!(s.to_hex(), "a1c0");
        assert_eq!(s.to_ascii(), "1010000111");
    }

    #[test]
    fn caps_and_errors() {
        let arc = Symbol::arc_indicator(0.1, 0.5).unwrap();
        assert!(matches!(
            sample_prefix(&arc, FULL_ROW_CAP + 1, 0),
            Err(Error::CapExceeded { .. })
        ));
        let fair = Symbol::constant(0.5).unwrap();
        assert!(sample_prefix(&fair, 0, 0).is_err());
        assert!(empirical_cylinder_test(&fair, 7, 10, 0).is_err());
    }

    #[test]
    fn goodness_of_fit_small() {
        let fair = Symbol::constant(0.5).unwrap();
        let r = empirical_cylinder_test(&fair, 3, 20_000, 3).unwrap();
        assert_eq!(r.dof, 7);
        assert_eq!(r.counts.iter().sum::<u64>(), 20_000);
        assert!(r.p_value > 0.001);
        let rc = Symbol::raised_cosine(0.5, 0.5).unwrap();
        let bad = goodness_of_fit(&rc, &fair, 2, 20_000, 3, 0).unwrap();
        assert!(bad.p_value < 1e-6);
    }
}

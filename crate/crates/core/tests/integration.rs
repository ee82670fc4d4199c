use dppkit_core::dimension::dim_q_estimate;
use dppkit_core::lcs::{lcs_length, lcs_length_dp};
use dppkit_core::measure::Cylinder;
use dppkit_core::sampler::{sample_many, sample_prefix};
use dppkit_core::toeplitz::{build_lambda, hs_norm_sq_lambda};
use dppkit_core::{Measure, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lcs_oracle_on_sampled_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let symbols = [
        Symbol::constant(0.5).unwrap(),
        Symbol::constant(0.8).unwrap(),
        Symbol::poisson(0.5, 0.25).unwrap(),
        Symbol::raised_cosine(0.3, 0.2).unwrap(),
    ];
    for t in 0..200u64 {
        let sym = &symbols[t as usize % symbols.len()];
        let n = rng.gen_range(1..=2000);
        let x = sample_prefix(sym, n, 2 * t).unwrap().bits;
        let y = sample_prefix(sym, n, 2 * t + 1).unwrap().bits;
        assert_eq!(lcs_length(&x, &y, n).unwrap(), lcs_length_dp(&x, &y, n).unwrap(), "{sym} n={n}");
    }
}

#[test]
fn hs_closed_form_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let c = rng.gen_range(0.2..0.8);
        let r = rng.gen_range(0.0..0.9) * (0.98 - c) / (0.98 + c);
        let sym = Symbol::poisson(c, r).unwrap();
        let (n, ell) = (rng.gen_range(1..=10), rng.gen_range(1..=8));
        let direct = build_lambda(&sym, n, ell).unwrap().matrix.frobenius_sq();
        let closed = hs_norm_sq_lambda(&sym, n, ell).unwrap();
        assert!((direct - closed).abs() <= 1e-12 * direct.max(1.0), "{sym} {n} {ell}");
    }
}

#[test]
fn sampled_pair_frequency_matches_cylinder() {
    let sym = Symbol::poisson(0.5, 0.25).unwrap();
    let p11 = Measure::new(&sym).unwrap().cylinder_prob(&"11".parse::<Cylinder>().unwrap()).unwrap();
    let batch = sample_many(&sym, 4001, 8, 3).unwrap();
    let (mut hits, mut total) = (0usize, 0usize);
    for s in &batch {
        hits += s.bits.windows(2).filter(|w| w[0] && w[1]).count();
        total += s.len() - 1;
    }
    let freq = hits as f64 / total as f64;
    assert!((freq - p11).abs() < 0.01, "{freq} vs {p11}");
}

#[test]
fn json_symbol_drives_the_measure() {
    let sym = Symbol::from_json(r#"{"family":"trig_poly","coeffs":[{"n":0,"re":0.5},{"n":1,"re":0.1,"im":0.05}]}"#).unwrap();
    let back = Symbol::from_json(&sym.to_json().unwrap()).unwrap();
    assert_eq!(sym.fingerprint(), back.fingerprint());
    let m = Measure::new(&back).unwrap();
    let total: f64 = m.all_cylinder_probs(6).unwrap().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn dimension_bounds_bracket_a_correlated_symbol() {
    let sym = Symbol::poisson(0.75, 0.1).unwrap();
    let est = dim_q_estimate(&sym, 2.0, 14).unwrap();
    let lower = est.szego_lower.unwrap();
    let upper = est.szego_upper.unwrap().value;
    assert!(est.certified);
    assert!(lower <= upper + 1e-12);
    assert!(est.fekete_lower <= upper + 1e-9);
    assert!(est.last_estimate >= lower - 1e-6 && est.last_estimate <= upper + 1e-6);
}

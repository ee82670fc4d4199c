//! Quick randomized invariant suite behind `dppkit selftest`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dimension::{
    corr_dim_szego_lower, corr_dim_szego_upper_refined, s_n_q, sigma_n_2, sigma_n_q_walsh, submult_check, BETA_GRID,
};
use crate::error::Result;
use crate::lcs::{lcs_length, lcs_length_dp};
use crate::measure::{Cylinder, CylinderPair, Measure};
use crate::mixing::{allones_lower_witness, psi_finite_window_with, psi_upper_bound, WindowOptions};
use crate::symbol::{Symbol, DEFAULT_TRUNCATION};
use crate::toeplitz::{
    contraction_spectrum, expansion_defect, fischer_margin, hs_norm_sq_lambda, schur_defect, squared_section_min_eig,
    sylvester_defect, trace_exp_margin, ComplexMatrix, HermitianEigen,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    /// Worst observed defect; a check passes when `worst <= tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Check {
        Check {
            name,
            cases: 0,
            worst: 0.0,
            tolerance,
            passed: true,
        }
    }

    fn record(&mut self, defect: f64) {
        self.cases += 1;
        if !(defect <= self.tolerance) {
            self.passed = false;
        }
        if defect.is_nan() || defect > self.worst {
            self.worst = defect;
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<24} cases={:<5} worst={:.3e} tol={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.tolerance
        )
    }
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    })
}

/// A symbol with `0 < f < 1`, drawn from the Poisson, raised-cosine and
/// trigonometric-polynomial families.
pub fn random_margin_symbol(rng: &mut impl Rng) -> Symbol {
    let c: f64 = rng.gen_range(0.2..0.8);
    let m = c.min(1.0 - c);
    match rng.gen_range(0..3) {
        0 => {
            let r = rng.gen_range(0.0..0.95) * (0.98 - c) / (0.98 + c);
            Symbol::poisson(c, r).expect("finite")
        }
        1 => Symbol::raised_cosine(c, rng.gen_range(-1.0..1.0) * 0.95 * m).expect("finite"),
        _ => {
            let share = 0.95 * m / 2.0;
            let a = Complex64::from_polar(share * rng.gen::<f64>() / 2.0, rng.gen_range(0.0..std::f64::consts::TAU));
            let b = Complex64::from_polar(share * rng.gen::<f64>() / 2.0, rng.gen_range(0.0..std::f64::consts::TAU));
            Symbol::trig_poly(&[(0, Complex64::new(c, 0.0)), (1, a), (3, b)]).expect("finite")
        }
    }
}

fn random_word(rng: &mut impl Rng, n: usize) -> Cylinder {
    Cylinder::new((0..n).map(|_| rng.gen()).collect()).expect("nonempty")
}

/// Determinant identities and operator inequalities on random inputs.
pub fn identity_suite(seed: u64, cases: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sylvester = Check::new("sylvester", 1e-10);
    let mut expansion = Check::new("det(1+L) expansion", 1e-10);
    let mut fischer = Check::new("fischer", 1e-12);
    let mut trace_exp = Check::new("det(1-A) <= exp(-tr A)", 1e-12);
    let mut schur = Check::new("schur ratio", 1e-9);
    let mut squared = Check::new("T(φ)² <= T(φ²)", 1e-10);
    let mut contraction = Check::new("contraction", 1e-10);
    for _ in 0..cases {
        let (n, m) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let a = random_matrix(&mut rng, n, m, 0.6);
        let b = random_matrix(&mut rng, m, n, 0.6);
        sylvester.record(sylvester_defect(&a, &b)?);

        let k = rng.gen_range(1..=5);
        let l = random_matrix(&mut rng, k, k, 1.0);
        expansion.record(expansion_defect(&l)?);

        let k = rng.gen_range(2..=6);
        let g = random_matrix(&mut rng, k, k, 0.7);
        let split = rng.gen_range(1..k);
        fischer.record(-fischer_margin(&g.matmul(&g.adjoint()), split)?);

        let k = rng.gen_range(1..=6);
        let g = random_matrix(&mut rng, k, k, 1.0);
        let u = HermitianEigen::new(&(&g + &g.adjoint()))?.vectors;
        let lam: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let unit = u.matmul(&ComplexMatrix::real_diagonal(&lam)).matmul(&u.adjoint());
        trace_exp.record(-trace_exp_margin(&unit)?);

        let (n, m) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let a = random_matrix(&mut rng, n, n, 1.0).add_real_diagonal(&vec![3.0; n]);
        let b = random_matrix(&mut rng, n, m, 1.0);
        let c = random_matrix(&mut rng, m, n, 1.0);
        let d = random_matrix(&mut rng, m, m, 1.0).add_real_diagonal(&vec![3.0; m]);
        schur.record(schur_defect(&a, &b, &c, &d)?);

        let mut entries = vec![(0i64, Complex64::new(rng.gen_range(-1.0..1.0), 0.0))];
        for k in 1..=rng.gen_range(1..=3) {
            entries.push((k, Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))));
        }
        let phi = Symbol::trig_poly(&entries).expect("finite");
        let mut j: Vec<i64> = (0..rng.gen_range(1..=8)).map(|_| rng.gen_range(-12..12)).collect();
        j.sort_unstable();
        j.dedup();
        squared.record(-squared_section_min_eig(&phi, &j)?);

        let sym = random_margin_symbol(&mut rng);
        let (lo, hi) = contraction_spectrum(&sym, rng.gen_range(1..=6), rng.gen_range(1..=5))?;
        contraction.record((-lo).max(hi - 1.0));
    }
    Ok(vec![sylvester, expansion, fischer, trace_exp, schur, squared, contraction])
}

/// The full quick suite.
pub fn run(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let fair = Symbol::constant(0.5)?;
    let fair_m = Measure::new(&fair)?;
    let mut product = Check::new("product measure", 1e-12);
    for n in 1..=10 {
        for p in fair_m.all_cylinder_probs(n)? {
            product.record((p * f64::powi(2.0, n as i32) - 1.0).abs());
        }
    }
    out.push(product);

    let rc = Symbol::raised_cosine(0.5, 0.5)?;
    let rc_m = Measure::new(&rc)?;
    let mut hand = Check::new("hand determinants", 1e-12);
    hand.record((rc_m.cylinder_prob(&"11".parse()?)? - 3.0 / 16.0).abs());
    hand.record((rc_m.cylinder_prob(&"10".parse()?)? - 5.0 / 16.0).abs());
    hand.record((s_n_q(&rc, 2, 2.0)? - 17.0 / 64.0).abs());
    hand.record((sigma_n_2(&rc, 2)? - 17.0 / 16.0).abs());
    out.push(hand);

    let mut ratio = Check::new("ratio identity", 1e-8);
    let mut simon = Check::new("simon bound", 1e-12);
    for _ in 0..100 {
        let sym = random_margin_symbol(&mut rng);
        let m = Measure::new(&sym)?;
        let n = rng.gen_range(1..=6);
        let pair = CylinderPair::new(random_word(&mut rng, n), random_word(&mut rng, n), rng.gen_range(1..=5))?;
        let r = m.correlation_ratio(&pair)?;
        ratio.record((r.ratio - r.ratio_direct).abs() / r.ratio_direct.abs().max(1.0));
        simon.record(r.deviation() - r.simon_bound);
    }
    out.push(ratio);
    out.push(simon);

    let poisson = Symbol::poisson(0.5, 0.25)?;
    let mut sandwich = Check::new("psi sandwich", 1e-9);
    let tau = poisson.contraction_margin();
    for ell in 1..=3 {
        let upper = psi_upper_bound(&poisson, ell, DEFAULT_TRUNCATION)?.value().unwrap_or(f64::INFINITY);
        for n in 1..=3 {
            let w = allones_lower_witness(&poisson, ell, n)?;
            let fw = psi_finite_window_with(&poisson, ell, n, WindowOptions { cap: 3, trace_norms: true })?;
            sandwich.record(w - fw.value);
            sandwich.record(fw.value - upper);
            let hs = hs_norm_sq_lambda(&poisson, n, ell)?;
            sandwich.record(fw.max_h_trace_norm.unwrap_or(0.0) - hs / (tau * tau));
        }
    }
    out.push(sandwich);

    let mut oracles = Check::new("dimension oracles", 1e-9);
    for sym in [&poisson, &rc, &Symbol::constant(0.75)?] {
        for n in 1..=8 {
            let fast = s_n_q(sym, n, 2.0)?;
            oracles.record((fast - sigma_n_2(sym, n)? * 0.5f64.powi(n as i32)).abs() / fast);
        }
        for q in [2usize, 3] {
            for n in 1..=4 {
                let fast = s_n_q(sym, n, q as f64)?;
                let walsh = sigma_n_q_walsh(sym, n, q)? * 0.5f64.powi(((q - 1) * n) as i32);
                oracles.record((fast - walsh).abs() / fast);
            }
        }
    }
    out.push(oracles);

    let mut submult = Check::new("sub-multiplicativity", 1e-9);
    let pairs: Vec<(usize, usize)> = (1..=6).flat_map(|m| (1..=6).map(move |n| (m, n))).filter(|&(m, n)| m + n <= 10).collect();
    for sym in [Symbol::constant(0.75)?, Symbol::raised_cosine(0.7, 0.2)?] {
        for row in submult_check(&sym, 2.0, &pairs)?.rows {
            submult.record(-row.margin);
        }
    }
    out.push(submult);

    let mut szego = Check::new("szego bracket", 1e-6);
    let three_quarters = Symbol::constant(0.75)?;
    let exact = -(0.625f64).log2();
    szego.record((corr_dim_szego_lower(&three_quarters)? - exact).abs());
    szego.record((corr_dim_szego_upper_refined(&three_quarters, BETA_GRID)?.value - exact).abs());
    out.push(szego);

    let mut lcs = Check::new("lcs automaton vs dp", 0.0);
    for _ in 0..50 {
        let n = rng.gen_range(1..200);
        let p = rng.gen_range(0.1..0.9);
        let x: Vec<bool> = (0..n).map(|_| rng.gen_bool(p)).collect();
        let y: Vec<bool> = (0..n).map(|_| rng.gen_bool(p)).collect();
        lcs.record((lcs_length(&x, &y, n)? as f64 - lcs_length_dp(&x, &y, n)? as f64).abs());
    }
    out.push(lcs);

    out.extend(identity_suite(seed ^ 0x5eed, 50)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let checks = run(1).map_err(|e| e.to_string()).unwrap();
        for c in &checks {
            assert!(c.passed, "{}", c.line());
            assert!(c.cases > 0, "{}", c.name);
        }
    }

    #[test]
    fn failing_defect_is_reported() {
        let mut c = Check::new("x", 1e-3);
        c.record(1e-4);
        assert!(c.passed);
        c.record(f64::NAN);
        assert!(!c.passed && c.worst.is_nan());
        assert!(c.line().starts_with("FAIL"));
    }
}

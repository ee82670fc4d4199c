//! Acceptance criteria AC1–AC10. Prints one line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use dppkit_core::dimension::{
    corr_dim_szego_lower, corr_dim_szego_upper_refined, dim_q_estimate, s_n_q, sigma_n_2, sigma_n_q_walsh,
    submult_check, BETA_GRID,
};
use dppkit_core::lcs::rate_experiment_with_dim;
use dppkit_core::measure::{Cylinder, CylinderPair};
use dppkit_core::mixing::{allones_lower_witness, psi_bounds_default, psi_finite_window_with, UpperBound, WindowOptions};
use dppkit_core::sampler::goodness_of_fit;
use dppkit_core::selftest::{identity_suite, random_margin_symbol};
use dppkit_core::toeplitz::hs_norm_sq_lambda;
use dppkit_core::{Measure, Result, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

fn ac1() -> Result<Outcome> {
    let fair = Symbol::constant(0.5)?;
    let m = Measure::new(&fair)?;
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        let target = 0.5f64.powi(n as i32);
        for p in m.all_cylinder_probs(n)? {
            worst = worst.max((p - target).abs() / target);
        }
    }
    let mut psi_zero = true;
    for ell in 1..=4 {
        let b = psi_bounds_default(&fair, ell)?;
        psi_zero &= b.lower_bound == 0.0 && b.upper_bound == UpperBound::Certified(0.0);
        for n in 1..=4 {
            psi_zero &= psi_finite_window_with(&fair, ell, n, WindowOptions::default())?.value == 0.0;
        }
    }
    let mut dims_exact = true;
    for q in [2.0, 3.0] {
        let est = dim_q_estimate(&fair, q, 12)?;
        dims_exact &= est.table.rows.iter().all(|r| r.estimate == 1.0) && est.fekete_lower == 1.0;
    }
    outcome(
        worst <= 1e-12 && psi_zero && dims_exact,
        format!("max rel cylinder error {worst:.2e}, psi zero {psi_zero}, dims exactly 1 {dims_exact}"),
    )
}

fn ac2() -> Result<Outcome> {
    let rc = Symbol::raised_cosine(0.5, 0.5)?;
    let m = Measure::new(&rc)?;
    let vals = [
        (m.cylinder_prob(&"11".parse::<Cylinder>()?)?, 3.0 / 16.0),
        (m.cylinder_prob(&"10".parse::<Cylinder>()?)?, 5.0 / 16.0),
        (s_n_q(&rc, 2, 2.0)?, 17.0 / 64.0),
        (sigma_n_2(&rc, 2)?, 17.0 / 16.0),
    ];
    let worst = vals.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    outcome(worst <= 1e-12, format!("max abs error {worst:.2e}"))
}

fn ac3() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac3);
    let cases = 200;
    let (mut worst_rel, mut simon_ok) = (0.0f64, true);
    for _ in 0..cases {
        let sym = random_margin_symbol(&mut rng);
        let m = Measure::new(&sym)?;
        let n = rng.gen_range(1..=8);
        let ell = rng.gen_range(1..=5);
        let word = |rng: &mut ChaCha8Rng| Cylinder::new((0..n).map(|_| rng.gen()).collect());
        let pair = CylinderPair::new(word(&mut rng)?, word(&mut rng)?, ell)?;
        let r = m.correlation_ratio(&pair)?;
        worst_rel = worst_rel.max((r.ratio_direct - r.ratio).abs() / r.ratio.abs());
        simon_ok &= r.deviation() <= r.simon_bound;
    }
    outcome(
        worst_rel <= 1e-8 && simon_ok,
        format!("{cases} cases, worst relative gap {worst_rel:.2e}, Simon bound everywhere {simon_ok}"),
    )
}

fn ac4() -> Result<Outcome> {
    let mut ok = true;
    let mut worst_slack = f64::INFINITY;
    let mut worst_hs_slack = f64::INFINITY;
    for sym in [Symbol::poisson(0.5, 0.25)?, Symbol::poisson(0.75, 0.125)?] {
        let tau = sym.contraction_margin();
        for ell in 1..=6 {
            let upper = match psi_bounds_default(&sym, ell)?.upper_bound {
                UpperBound::Certified(v) => v,
                _ => return outcome(false, format!("{sym}: upper bound not certified at ell={ell}")),
            };
            for n in 1..=6 {
                let witness = allones_lower_witness(&sym, ell, n)?;
                let fw = psi_finite_window_with(&sym, ell, n, WindowOptions { cap: 6, trace_norms: true })?;
                let hs_bound = hs_norm_sq_lambda(&sym, n, ell)? / (tau * tau);
                let max_trace = fw.max_h_trace_norm.expect("trace norms requested");
                ok &= witness <= fw.value && fw.value <= upper + 1e-9 && max_trace <= hs_bound;
                worst_slack = worst_slack.min(upper + 1e-9 - fw.value);
                worst_hs_slack = worst_hs_slack.min(hs_bound - max_trace);
            }
        }
    }
    outcome(
        ok,
        format!("min upper slack {worst_slack:.2e}, min trace-norm slack {worst_hs_slack:.2e}"),
    )
}

fn ac5() -> Result<Outcome> {
    let symbols = [
        Symbol::poisson(0.5, 0.25)?,
        Symbol::poisson(0.6, 0.2)?,
        Symbol::raised_cosine(0.5, 0.5)?,
        Symbol::raised_cosine(0.3, 0.2)?,
        Symbol::constant(0.75)?,
    ];
    let (mut worst_sigma, mut worst_walsh) = (0.0f64, 0.0f64);
    for sym in &symbols {
        for n in 1..=12 {
            let s = s_n_q(sym, n, 2.0)?;
            worst_sigma = worst_sigma.max((s - sigma_n_2(sym, n)? * 0.5f64.powi(n as i32)).abs());
        }
        for q in [2usize, 3] {
            for n in 1..=6 {
                let s = s_n_q(sym, n, q as f64)?;
                let w = sigma_n_q_walsh(sym, n, q)? * 0.5f64.powi(((q - 1) * n) as i32);
                worst_walsh = worst_walsh.max((s - w).abs());
            }
        }
    }
    outcome(
        worst_sigma <= 1e-9 && worst_walsh <= 1e-9,
        format!("subset-sum gap {worst_sigma:.2e}, Walsh gap {worst_walsh:.2e}"),
    )
}

fn ac6() -> Result<Outcome> {
    let pairs: Vec<(usize, usize)> = (1..16).flat_map(|m| (1..=16 - m).map(move |n| (m, n))).collect();
    let mut min_margin = f64::INFINITY;
    let mut monotone = true;
    for sym in [
        Symbol::constant(0.75)?,
        Symbol::raised_cosine(0.7, 0.2)?,
        Symbol::poisson(0.75, 0.1)?,
    ] {
        let report = submult_check(&sym, 2.0, &pairs)?;
        if !report.hypothesis_satisfied() {
            return outcome(false, format!("{sym} is not one-sided"));
        }
        min_margin = report.rows.iter().map(|r| r.margin).fold(min_margin, f64::min);
        let mut prev = f64::NEG_INFINITY;
        for n_max in [2, 4, 8, 12, 16] {
            let lower = dim_q_estimate(&sym, 2.0, n_max)?.fekete_lower;
            monotone &= lower >= prev;
            prev = lower;
        }
    }
    outcome(
        min_margin >= -1e-9 && monotone,
        format!("{} pairs per symbol, min margin {min_margin:.2e}, Fekete monotone {monotone}", pairs.len()),
    )
}

fn ac7() -> Result<Outcome> {
    let sym = Symbol::constant(0.75)?;
    let exact = -(0.625f64).log2();
    let lower = corr_dim_szego_lower(&sym)?;
    let upper = corr_dim_szego_upper_refined(&sym, BETA_GRID)?;
    let est = dim_q_estimate(&sym, 2.0, 12)?.last_estimate;
    let inside = est >= lower - 1e-6 && est <= upper.value + 1e-6;
    let err = (lower - exact).abs().max((upper.value - exact).abs());
    outcome(
        err <= 1e-6 && inside,
        format!(
            "lower {lower:.9}, upper {:.9} at beta {:.4}, N=12 estimate {est:.9}, exact {exact:.9}",
            upper.value, upper.beta
        ),
    )
}

fn ac8() -> Result<Outcome> {
    let mut p_values = Vec::new();
    let cases = [
        (Symbol::constant(0.5)?, 0),
        (Symbol::raised_cosine(0.5, 0.5)?, 0),
        (Symbol::poisson(0.5, 0.25)?, 5),
    ];
    for (k, (sym, offset)) in cases.iter().enumerate() {
        let r = goodness_of_fit(sym, sym, 3, 100_000, 0xac8 + k as u64, *offset)?;
        p_values.push(r.p_value);
    }
    let control = goodness_of_fit(
        &Symbol::raised_cosine(0.5, 0.5)?,
        &Symbol::constant(0.5)?,
        3,
        100_000,
        0xac8,
        0,
    )?;
    let ok = p_values.iter().all(|&p| p > 1e-3) && control.p_value < 1e-6;
    outcome(
        ok,
        format!("p-values {p_values:.4?}, negative control p = {:.2e}", control.p_value),
    )
}

fn ac9() -> Result<Outcome> {
    let n = 1 << 16;
    let trials = 50;
    let fair = rate_experiment_with_dim(&Symbol::constant(0.5)?, &[n], trials, 0xac9, 1.0)?.rows[0];
    let d = -(0.625f64).log2();
    let biased = rate_experiment_with_dim(&Symbol::constant(0.75)?, &[n], trials, 0xac9, d)?.rows[0];
    let rel_fair = fair.mn_over_ln_n / fair.target - 1.0;
    let rel_biased = biased.mn_over_ln_n / biased.target - 1.0;
    outcome(
        rel_fair.abs() <= 0.15 && rel_biased.abs() <= 0.20,
        format!(
            "fair {:.4} vs {:.4} ({:+.1}%), 3/4 {:.4} vs {:.4} ({:+.1}%)",
            fair.mn_over_ln_n,
            fair.target,
            100.0 * rel_fair,
            biased.mn_over_ln_n,
            biased.target,
            100.0 * rel_biased
        ),
    )
}

fn ac10() -> Result<Outcome> {
    let checks = identity_suite(0xac10, 200)?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.line()).collect();
    let cases: usize = checks.iter().map(|c| c.cases).sum();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} properties, {cases} cases", checks.len())
        } else {
            failed.join("; ")
        },
    )
}

type Criterion = (&'static str, &'static str, Duration, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1", "product-measure exactness", Duration::from_secs(10), ac1),
        ("AC2", "hand-derived determinants", Duration::from_secs(1), ac2),
        ("AC3", "ratio identity", Duration::from_secs(30), ac3),
        ("AC4", "psi sandwich", Duration::from_secs(120), ac4),
        ("AC5", "dimension oracle equivalence", Duration::from_secs(60), ac5),
        ("AC6", "sub-multiplicativity", Duration::from_secs(120), ac6),
        ("AC7", "Szego bracketing", Duration::from_secs(60), ac7),
        ("AC8", "sampler fidelity", Duration::from_secs(60), ac8),
        ("AC9", "LCS growth law", Duration::from_secs(600), ac9),
        ("AC10", "determinant identities", Duration::from_secs(30), ac10),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "{id:<4} {} {name:<30} {:>8.2}s / {:>4}s  {detail}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

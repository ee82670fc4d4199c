use dppkit_core::dimension::dim_q_estimate_with;
use dppkit_core::lcs::rate_experiment;
use dppkit_core::mixing::{psi_bounds, psi_finite_window_with, UpperBound, WindowOptions};
use dppkit_core::sampler::sample_many;
use dppkit_core::symbol::DEFAULT_TRUNCATION;
use dppkit_core::{selftest, Cylinder, Error, Measure, Result, Symbol};
use serde_json::{json, Value};

use crate::args::Encoding;

/// A command's result in both output formats.
pub struct Emit {
    pub csv: String,
    pub json: Value,
    /// Exit with status 1 after writing, for a failed self-test.
    pub failed: bool,
}

impl Emit {
    fn ok(csv: String, json: Value) -> Emit {
        Emit { csv, json, failed: false }
    }
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Numeric(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn symbol_json(sym: &Symbol) -> Value {
    sym.to_json()
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_else(|| Value::String(sym.to_string()))
}

fn to_value(v: &impl serde::Serialize) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

pub fn coeffs(sym: &Symbol, nmax: usize) -> Result<Emit> {
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for n in 0..=nmax {
        let c = sym.coeff(n as i64);
        let tail = sym.tail_sum(n, DEFAULT_TRUNCATION.max(n + 1))?;
        rows.push(vec![n.to_string(), num(c.re), num(c.im), num(tail.value)]);
        items.push(json!({"n": n, "re": c.re, "im": c.im, "tail_sum": tail.value}));
    }
    Ok(Emit::ok(
        csv_table(&["n", "re", "im", "tail_sum"], &rows)?,
        json!({"symbol": symbol_json(sym), "coeffs": items}),
    ))
}

pub fn cylinder(sym: &Symbol, words: &[String], n: Option<usize>) -> Result<Emit> {
    let m = Measure::new(sym)?;
    let mut out: Vec<(String, f64, f64)> = Vec::new();
    for w in words {
        let c: Cylinder = w.parse()?;
        let lp = m.cylinder_log_prob(&c)?;
        out.push((c.to_string(), lp.exp(), lp / std::f64::consts::LN_2));
    }
    if let Some(n) = n {
        for (i, p) in m.all_cylinder_probs(n)?.into_iter().enumerate() {
            out.push((Cylinder::from_index(i as u64, n)?.to_string(), p, p.log2()));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("give --word or --N".into()));
    }
    let rows: Vec<Vec<String>> = out.iter().map(|(w, p, l)| vec![w.clone(), num(*p), num(*l)]).collect();
    let items: Vec<Value> = out
        .iter()
        .map(|(w, p, l)| json!({"word": w, "probability": p, "log2_probability": l}))
        .collect();
    Ok(Emit::ok(
        csv_table(&["word", "probability", "log2_probability"], &rows)?,
        json!({"symbol": symbol_json(sym), "cylinders": items}),
    ))
}

fn upper_kind(u: &UpperBound) -> &'static str {
    match u {
        UpperBound::NotApplicable => "not_applicable",
        UpperBound::Certified(_) => "certified",
        UpperBound::Approximate(_) => "approximate",
    }
}

pub fn psi(sym: &Symbol, ells: &[usize], n: usize, truncation: usize) -> Result<Emit> {
    Measure::new(sym)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for &ell in ells {
        let b = psi_bounds(sym, ell, truncation)?;
        let fw = if n > 0 {
            Some(psi_finite_window_with(sym, ell, n, WindowOptions::default())?)
        } else {
            None
        };
        let fw_value = fw.as_ref().map(|f| f.value);
        rows.push(vec![
            ell.to_string(),
            num(b.lower_bound),
            if n > 0 { n.to_string() } else { String::new() },
            opt(fw_value),
            opt(b.upper_bound.value()),
            num(b.tau),
            upper_kind(&b.upper_bound).to_string(),
        ]);
        items.push(json!({
            "ell": ell,
            "lower_bound": b.lower_bound,
            "finite_window_N": if n > 0 { Some(n) } else { None },
            "finite_window_value": fw_value,
            "finite_window_argmax": fw.as_ref().map(|f| [f.argmax.0.to_string(), f.argmax.1.to_string()]),
            "upper_bound": b.upper_bound.value(),
            "upper_bound_kind": upper_kind(&b.upper_bound),
            "tau": b.tau,
            "tail": to_value(&b.tail)?,
        }));
    }
    Ok(Emit::ok(
        csv_table(
            &[
                "ell",
                "lower_bound",
                "finite_window_N",
                "finite_window_value",
                "upper_bound",
                "tau",
                "upper_bound_kind",
            ],
            &rows,
        )?,
        json!({"symbol": symbol_json(sym), "rows": items}),
    ))
}

pub fn dimension(sym: &Symbol, q: f64, nmax: usize, beta_grid: usize) -> Result<Emit> {
    let est = dim_q_estimate_with(sym, q, nmax, beta_grid)?;
    let rows: Vec<Vec<String>> = est
        .table
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), num(r.log2_s), num(r.estimate)])
        .collect();
    let mut csv = csv_table(&["N", "log2_S", "estimate"], &rows)?;
    csv.push('\n');
    csv.push_str(&csv_table(
        &["q", "fekete_lower", "last_estimate", "certified", "szego_lower", "szego_upper", "szego_beta"],
        &[vec![
            num(q),
            num(est.fekete_lower),
            num(est.last_estimate),
            est.certified.to_string(),
            opt(est.szego_lower),
            opt(est.szego_upper.map(|u| u.value)),
            opt(est.szego_upper.map(|u| u.beta)),
        ]],
    )?);
    Ok(Emit::ok(csv, json!({"symbol": symbol_json(sym), "estimate": to_value(&est)?})))
}

pub fn sample(sym: &Symbol, n: usize, count: usize, seed: u64, encoding: Encoding) -> Result<Emit> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    let seqs = sample_many(sym, n, count, seed)?;
    let encoded: Vec<String> = seqs
        .iter()
        .map(|s| match encoding {
            Encoding::Hex => s.to_hex(),
            Encoding::Ascii => s.to_ascii(),
        })
        .collect();
    let header = json!({"symbol": symbol_json(sym), "seed": seed, "n": n});
    let mut text = header.to_string();
    text.push('\n');
    for e in &encoded {
        text.push_str(e);
        text.push('\n');
    }
    let encoding = match encoding {
        Encoding::Hex => "hex",
        Encoding::Ascii => "ascii",
    };
    Ok(Emit::ok(
        text,
        json!({"symbol": symbol_json(sym), "seed": seed, "n": n, "encoding": encoding, "sequences": encoded}),
    ))
}

pub fn lcs_experiment(sym: &Symbol, grid: &[usize], trials: usize, seed: u64) -> Result<Emit> {
    let exp = rate_experiment(sym, grid, trials, seed)?;
    if !exp.certified {
        eprintln!("note: {sym} does not meet the hypotheses for the target; results are exploratory");
    }
    let rows: Vec<Vec<String>> = exp
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.trials.to_string(),
                num(r.mean_mn),
                num(r.std_mn),
                num(r.mn_over_ln_n),
                num(r.log_mn_over_log_n),
                num(r.target),
            ]
        })
        .collect();
    Ok(Emit::ok(
        csv_table(
            &["n", "trials", "mean_Mn", "std_Mn", "Mn_over_ln_n", "log_Mn_over_log_n", "target"],
            &rows,
        )?,
        json!({"symbol": symbol_json(sym), "seed": seed, "experiment": to_value(&exp)?}),
    ))
}

pub fn selftest(seed: u64) -> Result<Emit> {
    let checks = selftest::run(seed)?;
    let failed = checks.iter().any(|c| !c.passed);
    let mut text: String = checks.iter().map(|c| c.line() + "\n").collect();
    text.push_str(if failed { "selftest failed\n" } else { "selftest passed\n" });
    Ok(Emit {
        csv: text,
        json: json!({"passed": !failed, "checks": to_value(&checks)?}),
        failed,
    })
}

//! Shared fixtures for the criterion benches.

use dppkit_core::Symbol;

/// Banded, geometrically decaying and product symbols used across benches.
pub fn fixtures() -> Vec<(&'static str, Symbol)> {
    vec![
        ("raised_cosine", Symbol::raised_cosine(0.5, 0.5).expect("finite")),
        ("poisson", Symbol::poisson(0.5, 0.25).expect("finite")),
        ("constant", Symbol::constant(0.75).expect("finite")),
    ]
}

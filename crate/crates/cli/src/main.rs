mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use dppkit_core::{Error, Symbol};
use serde_json::json;

use args::{Cli, Command, Format};

const EXIT_NUMERIC: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_MALFORMED: u8 = 64;

fn load_symbol(arg: &str) -> Result<Symbol, Error> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read symbol file {path}: {e}")))?,
        None => arg.to_string(),
    };
    Symbol::from_json(&text)
}

fn run(cli: &Cli) -> Result<commands::Emit, Error> {
    let common = cli.command.common();
    let seed = common.seed;
    match &cli.command {
        Command::Coeffs { symbol, nmax, .. } => commands::coeffs(&load_symbol(&symbol.symbol)?, *nmax),
        Command::Cylinder { symbol, words, n, .. } => commands::cylinder(&load_symbol(&symbol.symbol)?, words, *n),
        Command::Psi {
            symbol, ell, n, truncation, ..
        } => commands::psi(&load_symbol(&symbol.symbol)?, &ell.0, *n, *truncation),
        Command::Dimension {
            symbol, q, nmax, beta_grid, ..
        } => commands::dimension(&load_symbol(&symbol.symbol)?, *q, *nmax, *beta_grid),
        Command::Sample {
            symbol, n, count, encoding, ..
        } => commands::sample(&load_symbol(&symbol.symbol)?, *n, *count, seed, *encoding),
        Command::LcsExperiment {
            symbol, ngrid, trials, ..
        } => commands::lcs_experiment(&load_symbol(&symbol.symbol)?, &ngrid.0, *trials, seed),
        Command::Selftest { .. } => commands::selftest(seed),
    }
}

fn diagnostic(e: &Error) -> (u8, serde_json::Value) {
    match e {
        Error::Json(j) => (
            EXIT_MALFORMED,
            json!({"error": "malformed_json", "message": j.to_string(), "line": j.line(), "column": j.column()}),
        ),
        e if e.is_precondition() => (EXIT_PRECONDITION, json!({"error": "precondition", "message": e.to_string()})),
        e => (EXIT_NUMERIC, json!({"error": "numeric", "message": e.to_string()})),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.command.common().clone();
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("{}", json!({"error": "threads", "message": e.to_string()}));
            return ExitCode::from(EXIT_PRECONDITION);
        }
    }
    let emit = match run(&cli) {
        Ok(e) => e,
        Err(e) => {
            let (code, diag) = diagnostic(&e);
            eprintln!("{diag}");
            return ExitCode::from(code);
        }
    };
    let body = match common.format {
        Format::Csv => emit.csv,
        Format::Json => serde_json::to_string_pretty(&emit.json).expect("serializable") + "\n",
    };
    let written = match &common.out {
        Some(path) => std::fs::write(path, body.as_bytes()),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("{}", json!({"error": "io", "message": e.to_string()}));
        return ExitCode::from(EXIT_NUMERIC);
    }
    if emit.failed {
        ExitCode::from(EXIT_NUMERIC)
    } else {
        ExitCode::SUCCESS
    }
}

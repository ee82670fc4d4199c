use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "dppkit", version, about = "Exact finite-window computations for stationary determinantal processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct SymbolArg {
    /// Symbol as inline JSON or `@path` to a JSON file.
    #[arg(long)]
    pub symbol: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Encoding {
    Hex,
    Ascii,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fourier coefficients f̂(0..=nmax) and tail sums.
    Coeffs {
        #[command(flatten)]
        symbol: SymbolArg,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Cylinder probabilities for given words, or for every word of length N.
    Cylinder {
        #[command(flatten)]
        symbol: SymbolArg,
        /// Binary word such as 0110; repeatable.
        #[arg(long = "word")]
        words: Vec<String>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// ψ-mixing bounds and the exhaustive finite-window value per gap.
    Psi {
        #[command(flatten)]
        symbol: SymbolArg,
        /// Gap list: `3`, `1,2,5` or the inclusive range `1..8`.
        #[arg(long, default_value = "1..4", value_parser = parse_list)]
        ell: UsizeList,
        /// Window length for the finite-window value; 0 skips it.
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        /// Truncation index for the tail sums.
        #[arg(long, default_value_t = dppkit_core::symbol::DEFAULT_TRUNCATION)]
        truncation: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Moment sums S_N^(q) and dimension estimates with Szegő bounds.
    Dimension {
        #[command(flatten)]
        symbol: SymbolArg,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
        /// Number of β grid points for the Szegő upper bound.
        #[arg(long = "beta-grid", default_value_t = dppkit_core::dimension::BETA_GRID)]
        beta_grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Exact samples of the first n sites.
    Sample {
        #[command(flatten)]
        symbol: SymbolArg,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Encoding::Ascii)]
        encoding: Encoding,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo growth of the longest common substring of two samples.
    LcsExperiment {
        #[command(flatten)]
        symbol: SymbolArg,
        /// Prefix lengths: `4096,65536`, `2^12,2^16` or the power range `2^12..2^16`.
        #[arg(long, default_value = "2^10..2^14", value_parser = parse_grid)]
        ngrid: UsizeList,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized invariant suite.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Coeffs { common, .. }
            | Command::Cylinder { common, .. }
            | Command::Psi { common, .. }
            | Command::Dimension { common, .. }
            | Command::Sample { common, .. }
            | Command::LcsExperiment { common, .. }
            | Command::Selftest { common } => common,
        }
    }
}

/// Parsed integer list; a newtype so clap treats it as one value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UsizeList(pub Vec<usize>);

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("not a non-negative integer: {s:?}"))
}

/// `3`, `1,2,5`, `1..8` (inclusive) or combinations such as `1..3,7`.
pub fn parse_list(s: &str) -> Result<UsizeList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (parse_usize(a)?, parse_usize(b)?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_usize(part)?),
        }
    }
    Ok(UsizeList(out))
}

fn parse_size(s: &str) -> Result<(usize, Option<u32>), String> {
    match s.trim().split_once('^') {
        Some(("2", e)) => {
            let e: u32 = e.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            if e >= usize::BITS {
                return Err(format!("{s:?} overflows"));
            }
            Ok((1usize << e, Some(e)))
        }
        Some(_) => Err(format!("only powers of 2 are accepted, got {s:?}")),
        None => Ok((parse_usize(s)?, None)),
    }
}

/// Like [`parse_list`], but `2^a..2^b` expands to the powers of two in between.
pub fn parse_grid(s: &str) -> Result<UsizeList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once("..") {
            Some((a, b)) => match (parse_size(a)?, parse_size(b)?) {
                ((_, Some(ea)), (_, Some(eb))) if ea <= eb => out.extend((ea..=eb).map(|e| 1usize << e)),
                ((a, None), (b, None)) if a <= b => out.extend(a..=b),
                _ => return Err(format!("bad range {part:?}")),
            },
            None => out.push(parse_size(part)?.0),
        }
    }
    Ok(UsizeList(out))
}

//! Library side of the `sphereopt` command: configuration, the level loop
//! and report output.

pub mod input;
pub mod report;

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use sphereopt_core::sdp::{build_relaxation_capped, DEFAULT_MAX_P};
use sphereopt_core::{
    definetti_eps, extract_sos_certificate, pullback_bounds, reduce, sandwich_from_solution,
    solve_sdp, sphere_maximize, sym_dimension, Error, HomoPoly, OracleConfig, Polynomial,
    ReductionKind, ReductionRecord,
};
use thiserror::Error;

pub use report::Report;

/// Environment variable overriding the `p` resource guard.
pub const MAX_P_ENV: &str = "SPHEREOPT_MAX_P";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("{0}")]
    Resource(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
            CliError::Resource(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceGuard { .. } => CliError::Resource(e.to_string()),
            Error::NotOptimal(_) | Error::Numerical(_) => CliError::Solver(e.to_string()),
            other => CliError::Parse(other.to_string()),
        }
    }
}

/// A single level or an inclusive range `lo..hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelSpec {
    Single(usize),
    Range(usize, usize),
}

impl LevelSpec {
    pub fn levels(self) -> Vec<usize> {
        match self {
            LevelSpec::Single(l) => vec![l],
            LevelSpec::Range(lo, hi) => (lo..=hi).collect(),
        }
    }
}

impl FromStr for LevelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid level `{t}`"))
        };
        match s.split_once("..") {
            None => Ok(LevelSpec::Single(num(s)?)),
            Some((lo, hi)) => {
                let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
                if lo > hi {
                    return Err(format!("empty level range {lo}..{hi}"));
                }
                Ok(LevelSpec::Range(lo, hi))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Inline(String),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: Source,
    pub n: Option<usize>,
    /// `None` picks the default level.
    pub level: Option<LevelSpec>,
    pub tol: f64,
    pub oracle: bool,
    pub restarts: usize,
    pub seed: u64,
    pub format: OutputFormat,
    pub certificate: bool,
    pub max_p: usize,
}

impl RunConfig {
    pub fn new(source: Source) -> Self {
        Self {
            source,
            n: None,
            level: None,
            tol: 1e-8,
            oracle: false,
            restarts: 50,
            seed: 0,
            format: OutputFormat::Json,
            certificate: false,
            max_p: DEFAULT_MAX_P,
        }
    }
}

/// Reads the resource cap from the environment, falling back to the default.
pub fn max_p_from_env() -> Result<usize, CliError> {
    match std::env::var(MAX_P_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("{MAX_P_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_MAX_P),
    }
}

/// Smallest `ℓ ≥ a` with `ε(a, ℓ, n) ≤ 1/2`, lowered to the largest level
/// that fits under `max_p` when needed.
pub fn default_level(a: usize, n: usize, max_p: usize) -> Result<usize, CliError> {
    let a = a.max(1);
    let fits = |l: usize| sym_dimension(n, l).is_ok_and(|p| p <= max_p);
    if !fits(a) {
        let p = sym_dimension(n, a).unwrap_or(usize::MAX);
        return Err(CliError::Resource(format!(
            "relaxation dimension p = {p} exceeds the resource cap {max_p}"
        )));
    }
    let mut ell = a;
    while definetti_eps(a, ell, n).value > 0.5 {
        if !fits(ell + 1) {
            break;
        }
        ell += 1;
    }
    Ok(ell)
}

fn load(config: &RunConfig) -> Result<Polynomial, CliError> {
    let text = match &config.source {
        Source::Inline(s) => s.clone(),
        Source::File(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?,
    };
    input::read_polynomial(&text, config.n)
}

/// The canonical problem plus everything needed to report on the input.
struct Prepared {
    solved: HomoPoly,
    record: ReductionRecord,
    /// Polynomial whose sphere maximum the reports describe.
    original: HomoPoly,
}

fn prepare(poly: &Polynomial) -> Result<Prepared, CliError> {
    let (solved, record) = reduce(poly)?;
    if record.kind == ReductionKind::EvenHomogenize && poly.n() < 2 {
        return Err(CliError::Parse(
            "even-degree input needs n >= 2; only odd polynomials may use a single variable".into(),
        ));
    }
    if solved.is_zero() {
        return Err(CliError::Parse(Error::ZeroPolynomial.to_string()));
    }
    let original = match record.kind {
        ReductionKind::EvenHomogenize => solved.clone(),
        ReductionKind::OddLift => poly.to_homogeneous()?,
    };
    Ok(Prepared {
        solved,
        record,
        original,
    })
}

/// Runs every requested level and writes one report per level.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<Vec<Report>, CliError> {
    if !(1e-10..=1e-2).contains(&config.tol) {
        return Err(CliError::Parse(format!(
            "--tol {:e} outside [1e-10, 1e-2]",
            config.tol
        )));
    }
    if config.restarts == 0 {
        return Err(CliError::Parse("--restarts must be at least 1".into()));
    }
    let poly = load(config)?;
    let prep = prepare(&poly)?;
    let a = prep.solved.degree() / 2;
    let levels = match config.level {
        Some(spec) => spec.levels(),
        None => vec![default_level(a, prep.solved.n(), config.max_p)?],
    };
    if let Some(&bad) = levels.iter().find(|&&l| l < a.max(1)) {
        return Err(CliError::Parse(format!(
            "level {bad} is below the minimum {} for degree {}",
            a.max(1),
            prep.solved.degree()
        )));
    }
    let oracle_value = config.oracle.then(|| {
        let cfg = OracleConfig {
            restarts: config.restarts,
            seed: config.seed,
            ..OracleConfig::default()
        };
        sphere_maximize(&prep.original, &cfg).value
    });
    let mut reports = Vec::with_capacity(levels.len());
    for ell in levels {
        let problem = build_relaxation_capped(&prep.solved, ell, config.max_p)?;
        let solution = solve_sdp(&problem, config.tol)?;
        let mut bounds = sandwich_from_solution(&prep.solved, &solution)?;
        bounds.oracle_value = oracle_value.map(|v| v * prep.record.gamma);
        let bounds = pullback_bounds(&bounds, &prep.record)?;
        let certificate = if config.certificate {
            Some(extract_sos_certificate(&solution, config.tol)?)
        } else {
            None
        };
        let report = Report::new(&bounds, &prep.record, certificate.as_ref());
        match config.format {
            OutputFormat::Json => writeln!(out, "{}", report.to_json())?,
            OutputFormat::Text => write!(out, "{}", report.to_text())?,
        }
        reports.push(report);
    }
    Ok(reports)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};
use sphereopt_cli::{max_p_from_env, run, CliError, LevelSpec, OutputFormat, RunConfig, Source};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Certified bounds on the maximum of a polynomial over the unit sphere.
#[derive(Debug, Parser)]
#[command(name = "sphereopt", version)]
#[command(group(ArgGroup::new("src").required(true).args(["poly", "input"])))]
struct Args {
    /// Polynomial such as "3.5*x1^2*x2 - x3^3", or a JSON document.
    #[arg(long)]
    poly: Option<String>,
    /// File holding the polynomial (text or JSON).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of variables, if larger than the highest index used.
    #[arg(long)]
    n: Option<usize>,
    /// Level ℓ or inclusive range lo..hi.
    #[arg(long)]
    level: Option<LevelSpec>,
    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Also run the multistart ascent oracle.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Include the sum-of-squares certificate in each report.
    #[arg(long)]
    certificate: bool,
}

fn config(args: Args) -> Result<RunConfig, CliError> {
    let source = match (args.poly, args.input) {
        (Some(p), _) => Source::Inline(p),
        (None, Some(f)) => Source::File(f),
        (None, None) => unreachable!("clap enforces one source"),
    };
    Ok(RunConfig {
        n: args.n,
        level: args.level,
        tol: args.tol,
        oracle: args.oracle,
        restarts: args.restarts,
        seed: args.seed,
        format: match args.format {
            Format::Json => OutputFormat::Json,
            Format::Text => OutputFormat::Text,
        },
        certificate: args.certificate,
        max_p: max_p_from_env()?,
        ..RunConfig::new(source)
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = config(args).and_then(|cfg| run(&cfg, &mut std::io::stdout().lock()));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sphereopt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `sumlike`: checks, metrizes, classifies and reduces families of moduli
//! given as JSON, writing a JSON run report.
//!
//! Exit status: 0 success, 1 the mathematics fails (e.g. the modulus does not
//! induce an equivalence relation), 2 bad input.

mod commands;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use sumlike_core::catalog::{Example4Spec, FAMILY_NAMES};
use sumlike_core::conditions::ClassifyOptions;
use sumlike_core::{ModulusSample, ToleranceConfig};

use commands::{CheckInput, Failure, Outcome};
use report::{digest, emit, RunReport};

#[derive(Parser)]
#[command(name = "sumlike", version, about = "Finite-scale verification for sum-like equivalence relations")]
struct Cli {
    /// Absolute tolerance: values at or below count as zero.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_abs: f64,
    /// Relative tolerance for inequality comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol_rel: f64,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Secondary CSV artifact (distance matrix, curve samples, ...).
    #[arg(long, global = true)]
    csv_out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Input JSON file.
    file: Option<PathBuf>,
    /// Catalog family instead of a file.
    #[arg(long, conflicts_with = "file")]
    family: Option<String>,
    /// Number of coordinates of a catalog family.
    #[arg(long, default_value_t = 16)]
    coords: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Quasi-metric constants per coordinate of a family or of one sample.
    Check {
        #[command(flatten)]
        source: Source,
        /// Second sample on the same points: report the two-sided comparison constant.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Metrize a sample and certify the sandwich inequalities.
    Metrize { file: PathBuf },
    /// Trichotomy branch of a family.
    Classify {
        #[command(flatten)]
        source: Source,
        /// Comma-separated thresholds c.
        #[arg(long, value_delimiter = ',')]
        c_grid: Option<Vec<f64>>,
        /// Sum the witness search must reach.
        #[arg(long)]
        target: Option<f64>,
        /// Largest class count still read as finitely many classes.
        #[arg(long)]
        class_bound: Option<usize>,
        /// Leading coordinates ignored when judging the threshold relations.
        #[arg(long)]
        prefix: Option<usize>,
        /// Coordinates scanned by the witness search.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Reduction maps.
    #[command(subcommand)]
    Reduce(Reduce),
    /// The oscillating piecewise modulus: ratio identity, inequalities,
    /// Mazur–Orlicz verdict.
    Example4 {
        /// Specification file (`g`, `a`).
        #[arg(conflicts_with = "preset")]
        file: Option<PathBuf>,
        /// sqrt | two-term | linear
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
    },
}

#[derive(Subcommand)]
enum Reduce {
    /// Unit-step decomposition table of a real vector.
    Clamp { file: PathBuf },
    /// Block plan of weight streams, optionally verified on `z`, `w`.
    Blocks { file: PathBuf },
    /// Koch curve points, interleaving and Hoelder estimate.
    Koch { file: PathBuf },
}

fn read(path: &Path) -> Result<(String, String), Failure> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Input)?;
    let d = digest(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Input(anyhow!("{} is not UTF-8", path.display())))?;
    Ok((text, d))
}

fn parse_sample(text: &str) -> Result<ModulusSample, Failure> {
    serde_json::from_str(text)
        .context("parsing sample")
        .map_err(Failure::Input)
}

/// Catalog inputs are digested through their canonical JSON.
fn source_family(src: &Source) -> Result<(CheckInput, String), Failure> {
    match (&src.file, &src.family) {
        (Some(path), None) => {
            let (text, d) = read(path)?;
            Ok((commands::read_check_input(&text)?, d))
        }
        (None, Some(name)) => {
            let fam = commands::catalog_family(name, src.coords)?;
            let canon = fam.to_json().map_err(|e| Failure::Input(e.into()))?;
            Ok((CheckInput::Family(fam), digest(canon.as_bytes())))
        }
        _ => Err(Failure::Input(anyhow!(
            "give an input file or --family (one of {})",
            FAMILY_NAMES.join(", ")
        ))),
    }
}

fn run(cli: &Cli, tol: &ToleranceConfig) -> Result<(String, String, Outcome), Failure> {
    match &cli.command {
        Command::Check { source, against } => {
            let (input, d) = source_family(source)?;
            let phi = match against {
                Some(p) => Some(parse_sample(&read(p)?.0)?),
                None => None,
            };
            Ok(("check".into(), d, commands::check(input, phi, tol)?))
        }
        Command::Metrize { file } => {
            let (text, d) = read(file)?;
            Ok(("metrize".into(), d, commands::metrize_cmd(&parse_sample(&text)?, tol)?))
        }
        Command::Classify {
            source,
            c_grid,
            target,
            class_bound,
            prefix,
            budget,
        } => {
            let (input, d) = source_family(source)?;
            let fam = match input {
                CheckInput::Family(f) => f,
                CheckInput::Sample(_) => return Err(Failure::Input(anyhow!("classify needs a family"))),
            };
            let mut opts = ClassifyOptions::default();
            if let Some(g) = c_grid {
                opts.c_grid = g.clone();
            }
            if let Some(t) = target {
                opts.target = *t;
            }
            if let Some(b) = class_bound {
                opts.class_growth_bound = *b;
            }
            opts.prefix = *prefix;
            opts.budget = *budget;
            Ok(("classify".into(), d, commands::classify(&fam, &opts)?))
        }
        Command::Reduce(r) => {
            let (name, path) = match r {
                Reduce::Clamp { file } => ("reduce clamp", file),
                Reduce::Blocks { file } => ("reduce blocks", file),
                Reduce::Koch { file } => ("reduce koch", file),
            };
            let (text, d) = read(path)?;
            let out = match r {
                Reduce::Clamp { .. } => commands::reduce_clamp(&text)?,
                Reduce::Blocks { .. } => commands::reduce_blocks(&text)?,
                Reduce::Koch { .. } => commands::reduce_koch(&text, tol)?,
            };
            Ok((name.into(), d, out))
        }
        Command::Example4 {
            file,
            preset,
            grid_points,
        } => {
            let (spec, linear, d) = match (file, preset.as_deref()) {
                (Some(path), None) => {
                    let (text, d) = read(path)?;
                    let spec: Example4Spec = serde_json::from_str(&text)
                        .context("parsing Example-4 specification")
                        .map_err(Failure::Input)?;
                    (Some(spec), false, d)
                }
                (None, Some("linear")) => (None, true, digest(b"preset:linear")),
                (None, Some(name)) => {
                    let spec = Example4Spec::preset(name).ok_or_else(|| {
                        Failure::Input(anyhow!("unknown preset `{name}`; expected sqrt, two-term or linear"))
                    })?;
                    (Some(spec), false, digest(format!("preset:{name}").as_bytes()))
                }
                (None, None) => (Some(Example4Spec::sqrt_preset(8)), false, digest(b"preset:sqrt")),
                (Some(_), Some(_)) => unreachable!("clap rejects file with --preset"),
            };
            Ok(("example4".into(), d, commands::example4(spec, linear, *grid_points, tol)?))
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("SUMLIKE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Input(anyhow!("SUMLIKE_THREADS must be a non-negative integer, got `{v}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(e.into()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = configure_threads()
        .and_then(|_| ToleranceConfig::new(cli.tol_abs, cli.tol_rel).map_err(|e| Failure::Input(e.into())))
        .and_then(|tol| run(&cli, &tol).map(|r| (tol, r)));

    let (tol, (command, input_digest, outcome)) = match result {
        Ok(r) => r,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
        Err(Failure::Verdict(e)) => {
            eprintln!("verdict: {e:#}");
            return ExitCode::from(1);
        }
    };

    let report = RunReport {
        command,
        input_digest,
        tolerance: tol,
        result: outcome.result,
        wall_time_s: started.elapsed().as_secs_f64(),
        verdict: outcome.verdict,
    };
    let written = serde_json::to_string_pretty(&report)
        .map_err(anyhow::Error::from)
        .and_then(|text| emit(&text, cli.out.as_deref()))
        .and_then(|_| match (&cli.csv_out, &outcome.csv) {
            (Some(path), Some(csv)) => emit(csv, Some(path)),
            (Some(_), None) => Err(anyhow!("this command has no CSV output")),
            _ => Ok(()),
        });
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    eprintln!("{}", report.verdict);
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

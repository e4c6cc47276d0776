//! Command-line front end: run estimates, chain checks, path tables, and the
//! full fixture suite from JSON configs, writing JSON reports and CSV curves.
//!
//! Exit codes: 0 all expectations met, 1 expectation or sampling failure,
//! 2 configuration errors. CONEDERIV_THREADS caps the worker pool (0 = auto).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conederiv_cli::config::{self, EstimatorChoice, ExperimentConfig, FlagOverrides, Kind};
use conederiv_cli::{report, runner};

#[derive(Parser)]
#[command(name = "conederiv", version, about = "Derivative decision procedures for black-box functions")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args, Clone, Debug)]
struct CommonArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the report and CSV curves.
    #[arg(long, default_value = "conederiv-out")]
    out: PathBuf,
    /// Sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Initial radius of the scale schedule.
    #[arg(long)]
    delta0: Option<f64>,
    /// Initial cone aperture of the scale schedule.
    #[arg(long)]
    theta0: Option<f64>,
    /// Geometric decay of the scale schedule.
    #[arg(long)]
    rho: Option<f64>,
    /// Number of schedule levels.
    #[arg(long)]
    levels: Option<usize>,
    /// Residual acceptance tolerance.
    #[arg(long = "tol-abs")]
    tol_abs: Option<f64>,
}

#[derive(Subcommand)]
enum Commands {
    /// Estimate directional/tangential derivatives of a named fixture.
    Estimate {
        #[command(flatten)]
        common: CommonArgs,
        /// Fixture name from the catalog.
        #[arg(long)]
        fixture: Option<String>,
        /// Which estimator to run.
        #[arg(long, value_parser = ["tangential", "directional", "both"])]
        estimator: Option<String>,
        /// Expected verdict override for pass/fail scoring.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Run a chain-rule cell: condition check and composite cross-check.
    Chain {
        #[command(flatten)]
        common: CommonArgs,
        /// Cell name (beta2-root, beta3-root, beta2-abs, beta2-linear, shear-smooth).
        #[arg(long)]
        pair: Option<String>,
    },
    /// Evaluate a serialized path and emit its table CSV.
    Path {
        #[command(flatten)]
        common: CommonArgs,
        /// Path JSON file ({"base", "knots_t", "knots_x", "velocity"}).
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Run the full fixture suite with expectations.
    Suite {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Inspect the fixture catalog.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
}

#[derive(Subcommand)]
enum FixturesCommand {
    /// Print the catalog with descriptions and expectations.
    List,
    /// Evaluate a fixture at a point (comma-separated coordinates).
    Eval { name: String, point: String },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("CONEDERIV_THREADS") {
        if let Ok(n) = value.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Commands::Estimate { common, fixture, estimator, expect } => {
            let mut cfg = load_config(&common)?;
            if fixture.is_some() {
                cfg.fixture = fixture;
            }
            if let Some(e) = estimator {
                cfg.estimator = Some(match e.as_str() {
                    "tangential" => EstimatorChoice::Tangential,
                    "directional" => EstimatorChoice::Directional,
                    _ => EstimatorChoice::Both,
                });
            }
            if expect.is_some() {
                cfg.expect = expect;
            }
            run(Kind::Estimate, cfg, &common)
        }
        Commands::Chain { common, pair } => {
            let mut cfg = load_config(&common)?;
            if pair.is_some() {
                cfg.pair = pair;
            }
            run(Kind::Chain, cfg, &common)
        }
        Commands::Path { common, file } => {
            let mut cfg = load_config(&common)?;
            if file.is_some() {
                cfg.path_file = file;
            }
            run(Kind::Path, cfg, &common)
        }
        Commands::Suite { common } => {
            let cfg = load_config(&common)?;
            run(Kind::Suite, cfg, &common)
        }
        Commands::Fixtures { command } => fixtures_command(command),
    }
}

fn load_config(common: &CommonArgs) -> anyhow::Result<ExperimentConfig> {
    match &common.config {
        Some(path) => ExperimentConfig::from_file(path),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(kind: Kind, cfg: ExperimentConfig, common: &CommonArgs) -> anyhow::Result<ExitCode> {
    let flags = FlagOverrides {
        seed: common.seed,
        delta0: common.delta0,
        theta0: common.theta0,
        rho: common.rho,
        levels: common.levels,
        tol_abs: common.tol_abs,
    };
    let resolved = config::resolve(kind, Some(cfg), &flags)?;
    let report = match runner::run_config(&resolved, &common.out) {
        Ok(report) => report,
        Err(e) => {
            // unknown fixtures and malformed inputs are configuration errors
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(2));
        }
    };
    let report_path = resolved
        .output
        .clone()
        .unwrap_or_else(|| common.out.join(format!("{}-report.json", kind_name(kind))));
    report::write_report(&report, &report_path)?;
    let curves = report::emit_curves(&report, &common.out)?;
    for exp in &report.experiments {
        println!(
            "{} {} ({} ms)",
            if exp.passed { "PASS" } else { "FAIL" },
            exp.name,
            exp.wall_ms
        );
    }
    println!(
        "{}: {} experiments, report {} ({} curve files)",
        if report.passed { "PASS" } else { "FAIL" },
        report.experiments.len(),
        report_path.display(),
        curves.len()
    );
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Estimate => "estimate",
        Kind::Chain => "chain",
        Kind::Path => "path",
        Kind::Suite => "suite",
    }
}

fn fixtures_command(command: FixturesCommand) -> anyhow::Result<ExitCode> {
    match command {
        FixturesCommand::List => {
            for fx in conederiv::fixtures::catalog() {
                let dims = format!("R^{} -> R^{}", fx.f.input_dim(), fx.f.output_dim());
                let expected = format!(
                    "directional: {:?}, tangential: {:?}",
                    fx.expected.directional, fx.expected.tangential
                );
                println!("{:<28} {:<14} {}", fx.name, dims, fx.description);
                println!("{:<28} {:<14} expected {}", "", "", expected);
            }
            Ok(ExitCode::SUCCESS)
        }
        FixturesCommand::Eval { name, point } => {
            let fx = conederiv::fixtures::by_name(&name)?;
            let coords: Result<Vec<f64>, _> =
                point.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let coords = coords.map_err(|e| anyhow::anyhow!("bad point: {e}"))?;
            let x = conederiv::Vector::new(coords)?;
            let y = fx.f.eval(&x)?;
            println!("{}", serde_json::to_string(&y)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

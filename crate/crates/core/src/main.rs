use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use derlab::config::ModelConfig;
use derlab::dersolve::inner_map_of;
use derlab::opalg::centralizer_basis;
use derlab::sample::Sampler;
use derlab::verify::{self, CheckResult, MapMode, Status, VerificationReport};
use derlab::{Error, LinearMapOnAlgebra};

#[derive(Parser)]
#[command(
    name = "derlab",
    version,
    about = "Derivations on operator algebras of finite Hilbert C*-modules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Model configuration (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured rank tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Writes the JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the dimensions of the model.
    Info {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Run verification suites.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// all, derivations, lemmas, local or twolocal
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Check a linear map read from a map file.
    CheckMap {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        map: PathBuf,
        /// derivation, local, generalized or twolocal
        #[arg(long, default_value = "derivation")]
        mode: String,
    },
    /// Write the inner derivation of a seeded operator as a map file.
    ExportMap {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct Info {
    fibers: Vec<usize>,
    operator_dim: usize,
    k: usize,
    center_dim: usize,
    expected_derivation_dim: usize,
}

fn load(args: &ModelArgs) -> Result<ModelConfig, Error> {
    let mut cfg = ModelConfig::load(&args.model)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, format!("{text}\n"))
        .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))
}

fn print_check(c: &CheckResult) {
    let status = match c.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Error => "ERROR",
    };
    let mut line = format!("{status:5} {}/{}", c.suite, c.name);
    if let (Some(v), Some(t)) = (c.value, c.threshold) {
        line += &format!("  value={v:.3e} threshold={t:.0e}");
    }
    if let (Some(d), Some(e)) = (c.dimension, c.expected_dimension) {
        line += &format!("  dimension={d} expected={e}");
    }
    if let Some(k) = &c.failure_kind {
        line += &format!("  kind={k}");
    }
    if let Some(m) = &c.message {
        line += &format!("  ({m})");
    }
    println!("{line}");
}

fn finish(report: &VerificationReport, json: Option<&Path>) -> Result<ExitCode, Error> {
    report.checks.iter().for_each(print_check);
    if let Some(path) = json {
        write_json(path, &report.to_json())?;
    }
    println!(
        "{}",
        if report.passed {
            "all checks passed"
        } else {
            "some checks failed"
        }
    );
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Info { model } => {
            let cfg = load(&model)?;
            let spec = cfg.spec()?;
            let info = Info {
                fibers: cfg.fibers.clone(),
                operator_dim: spec.operator_dim(),
                k: spec.k(),
                center_dim: centralizer_basis(&spec)?.len(),
                expected_derivation_dim: spec.operator_dim() - spec.k(),
            };
            println!("fibers {:?}", info.fibers);
            println!("D = {}", info.operator_dim);
            println!("k = {}", info.k);
            println!("center dimension = {}", info.center_dim);
            println!(
                "expected derivation dimension = {}",
                info.expected_derivation_dim
            );
            if let Some(path) = &model.json {
                write_json(
                    path,
                    &serde_json::to_string_pretty(&info).expect("info serializes"),
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { model, suite } => {
            let cfg = load(&model)?;
            let suites = verify::parse_suites(&suite)?;
            let start = Instant::now();
            let report = verify::run(&cfg, &suites)?;
            eprintln!("runtime {:.2} s", start.elapsed().as_secs_f64());
            finish(&report, model.json.as_deref())
        }
        Command::CheckMap { model, map, mode } => {
            let cfg = load(&model)?;
            let mode: MapMode = mode.parse()?;
            let text = std::fs::read_to_string(&map)
                .map_err(|e| Error::Parse(format!("{}: {e}", map.display())))?;
            let d: LinearMapOnAlgebra =
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            let report = verify::check_map(&cfg, &d, mode)?;
            finish(&report, model.json.as_deref())
        }
        Command::ExportMap { model, out } => {
            let cfg = load(&model)?;
            let spec = cfg.spec()?;
            let t = Sampler::new(cfg.seed, "export-map").operator(&spec);
            let d = inner_map_of(&spec, &t);
            write_json(&out, &serde_json::to_string(&d).expect("map serializes"))?;
            println!(
                "wrote inner derivation of dimension {} to {}",
                d.dim(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            ExitCode::from(2)
        }
    }
}

//! `twotoda`: build algebra specs, run the verification suite, integrate flows.
//!
//! Exit codes: 0 when everything requested passes, 1 when a check fails,
//! 2 on usage or configuration errors (including unreadable files).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use twotoda::algebra::io::{load_spec, save_spec};
use twotoda::algebra::{build_gl, build_sl};
use twotoda::checks::{self, CheckConfig, CheckId, DRIFT_TOL};
use twotoda::flows::{self, FieldKind, FlowConfig};
use twotoda::report::{emit_report, CheckReport, ReportContext, ReportFormat};
use twotoda::sampling::{rng_for, DEFAULT_SEED};
use twotoda::{AlgebraSpec, Error, Exec, PhaseSpace};

#[derive(Parser)]
#[command(name = "twotoda", version, about = "2-Toda lattice laboratory on graded Lie algebras")]
struct Cli {
    /// Base seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of random samples / points per check.
    #[arg(long, global = true, default_value_t = checks::DEFAULT_SAMPLES)]
    samples: usize,
    /// Overrides the tolerance of every residual check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Run sample sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or validate algebra specs.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Run a family of checks against an algebra spec.
    Check(CheckArgs),
    /// Integrate Lax flows.
    #[command(subcommand)]
    Flow(FlowCmd),
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Write the spec of sl(n) or gl(n) with the principal grading.
    Build {
        #[arg(long = "type", value_enum)]
        kind: AlgebraType,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a spec file and report every violated invariant.
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgebraType {
    Sl,
    Gl,
}

#[derive(Args)]
struct CheckArgs {
    /// mcybe, jacobi, involutivity, casimir, morphism, independence, rank,
    /// rais, quadratic-relations, toda, flows or all.
    id: String,
    #[arg(long)]
    algebra: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum FlowCmd {
    /// Integrate one field from a seeded phase-space point and write a CSV.
    Run {
        #[arg(long)]
        algebra: PathBuf,
        /// t, s, toda, quadratic(i,lambda) or linear(i,lambda).
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = flows::DEFAULT_DT)]
        dt: f64,
        #[arg(long = "T", default_value_t = flows::DEFAULT_HORIZON)]
        horizon: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Commutation defect of two flows at seeded points.
    Commutation {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long, default_value = "t")]
        a: String,
        #[arg(long, default_value = "s")]
        b: String,
        #[arg(long, default_value_t = flows::DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Distinguishes configuration problems (exit 2) from failing checks (exit 1).
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let cfg = CheckConfig {
        seed: cli.seed,
        samples: cli.samples,
        tol: cli.tol,
        exec: if cli.sequential { Exec::Sequential } else { Exec::default() },
    };
    if let Some(t) = cfg.tol {
        anyhow::ensure!(t > 0.0 && t.is_finite(), "--tol must be positive, got {t}");
    }
    anyhow::ensure!(cfg.samples > 0, "--samples must be positive");
    match &cli.command {
        Command::Algebra(AlgebraCmd::Build { kind, n, out }) => {
            let spec = match kind {
                AlgebraType::Sl => build_sl(*n),
                AlgebraType::Gl => build_gl(*n),
            }?;
            save_spec(&spec, out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} (dim {}, rank {}) to {}", spec.name(), spec.dim(), spec.rank(), out.display());
            Ok(Outcome::Pass)
        }
        Command::Algebra(AlgebraCmd::Validate { file }) => match load_spec(file) {
            Ok(spec) => {
                println!("{}: valid {} (dim {}, rank {})", file.display(), spec.name(), spec.dim(), spec.rank());
                Ok(Outcome::Pass)
            }
            Err(Error::Invariant(violations)) => {
                for v in &violations {
                    println!("violation: {v}");
                }
                Ok(Outcome::Fail)
            }
            Err(e) => Err(anyhow::Error::new(e).context(format!("reading {}", file.display()))),
        },
        Command::Check(args) => {
            let id: CheckId = args.id.parse().map_err(|_| {
                let known: Vec<&str> = CheckId::EACH.iter().map(|c| c.name()).chain(["all"]).collect();
                anyhow::anyhow!("unknown check `{}` (expected one of: {})", args.id, known.join(", "))
            })?;
            let spec = load(&args.algebra)?;
            let reports = checks::run(id, &spec, &cfg)?;
            emit(&reports, args.format, args.out.as_deref())
        }
        Command::Flow(FlowCmd::Run { algebra, field, dt, horizon, out }) => {
            let spec = load(algebra)?;
            let field: FieldKind = field.parse()?;
            let fc = FlowConfig { field, dt: *dt, horizon: *horizon };
            fc.validate()?;
            let space = match field {
                FieldKind::Toda => PhaseSpace::toda_diagonal(&spec),
                _ => PhaseSpace::two_toda(&spec),
            };
            let m0 = space.random_point(&mut rng_for(cfg.seed, 0));
            let traj = flows::integrate(spec, &fc, &m0)?;
            let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
            let mut w = BufWriter::new(file);
            traj.write_csv(&mut w)?;
            w.flush()?;
            println!(
                "{} states to t = {} written to {}; max relative drift {:.3e}",
                traj.times.len(),
                traj.times.last().copied().unwrap_or(0.0),
                out.display(),
                traj.max_relative_drift()
            );
            if let Some(b) = &traj.blowup {
                println!("integration stopped: {b}");
                return Ok(Outcome::Fail);
            }
            Ok(Outcome::Pass)
        }
        Command::Flow(FlowCmd::Commutation { algebra, a, b, dt, steps, format }) => {
            let spec = load(algebra)?;
            let (fa, fb): (FieldKind, FieldKind) = (a.parse()?, b.parse()?);
            anyhow::ensure!(*dt > 0.0 && dt.is_finite(), "--dt must be positive, got {dt}");
            let tp = PhaseSpace::two_toda(&spec);
            let defects = cfg.exec.map(cfg.samples, |i| {
                let m0 = tp.random_point(&mut rng_for(cfg.seed, i as u64));
                flows::flow_commutation(&spec, fa, fb, &m0, *dt, *steps)
            });
            let defect = defects.into_iter().collect::<twotoda::Result<Vec<_>>>()?.into_iter().fold(0.0, nan_max);
            let ctx = ReportContext { algebra: spec.name().to_string(), samples: cfg.samples, seed: cfg.seed };
            let report = ctx.residual(
                "flow.commutation",
                "flows of Hamiltonians in involution commute",
                None,
                defect,
                cfg.tol.unwrap_or(DRIFT_TOL),
                format!("{fa} against {fb}, {steps} steps of dt {dt:e} each way"),
            );
            emit(&[report], *format, None)
        }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn load(path: &Path) -> Result<Arc<AlgebraSpec>> {
    Ok(Arc::new(load_spec(path).with_context(|| format!("reading {}", path.display()))?))
}

fn emit(reports: &[CheckReport], format: Format, out: Option<&Path>) -> Result<Outcome> {
    let format = match format {
        Format::Text => ReportFormat::Text,
        Format::Json => ReportFormat::Json,
    };
    let doc = emit_report(reports, format);
    print!("{doc}");
    if let Some(path) = out {
        std::fs::write(path, &doc).with_context(|| format!("writing {}", path.display()))?;
    }
    let failed: Vec<&CheckReport> = reports.iter().filter(|r| !r.passed()).collect();
    if failed.is_empty() {
        return Ok(Outcome::Pass);
    }
    if format == ReportFormat::Json {
        for r in &failed {
            eprintln!("FAIL {}: {}", r.check, r.anchor);
        }
    }
    Ok(Outcome::Fail)
}

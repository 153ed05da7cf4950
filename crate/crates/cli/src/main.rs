//! Benchmark harness for the energy-conserving sine-Gordon solvers.
//!
//! Three subcommands: `run` integrates one configuration and writes
//! diagnostics (plus optional field snapshots), `convergence` drives
//! refinement studies against exact solutions, `list-cases` dumps the
//! built-in benchmark registry.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::RawConfig;
use sg_core::bench::{self, StudyAxis};
use sg_core::grid::State;
use sg_core::integrators::{run_with_observer, SchemeConfig};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

fn core_error(e: sg_core::Error) -> CliError {
    use sg_core::Error as E;
    match &e {
        E::Io(_) => CliError::Io(e.to_string()),
        E::UnknownCase(_) | E::UnsupportedCase(_) | E::InvalidArgument(_) => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Numerical(e.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "sg",
    version,
    about = "Structure-preserving pseudo-spectral solver for the sine-Gordon equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write diagnostics / snapshots
    Run(RunArgs),
    /// Temporal or spatial refinement study against an exact solution
    Convergence(ConvergenceArgs),
    /// List the built-in benchmark cases with their defaults
    ListCases,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; the flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark case name (see `list-cases`)
    #[arg(long)]
    case: Option<String>,
    /// Time integrator: pepm, svm or baseline
    #[arg(long)]
    scheme: Option<String>,
    /// Grid family: mid or regular
    #[arg(long)]
    grid: Option<String>,
    /// Supplementary nonlinearity for svm: g1 or g2
    #[arg(long)]
    g: Option<String>,
    /// Cells along x
    #[arg(long)]
    nx: Option<usize>,
    /// Cells along y
    #[arg(long)]
    ny: Option<usize>,
    /// Time step
    #[arg(long)]
    tau: Option<f64>,
    /// Final time
    #[arg(long)]
    t_end: Option<f64>,
    /// Newton tolerance (relative to the initial energy scale)
    #[arg(long)]
    tol: Option<f64>,
    /// Times whose nearest completed steps are snapshotted
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    /// Output directory for diagnostics and snapshots
    #[arg(long)]
    out_dir: Option<String>,
}

impl RunArgs {
    fn as_raw(&self) -> RawConfig {
        RawConfig {
            case: self.case.clone(),
            scheme: self.scheme.clone(),
            grid: self.grid.clone(),
            g: self.g.clone(),
            nx: self.nx,
            ny: self.ny,
            tau: self.tau,
            t_end: self.t_end,
            tol: self.tol,
            snapshot_times: self.snapshot_times.clone(),
            out_dir: self.out_dir.clone(),
        }
    }
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Benchmark case (must carry an exact solution)
    #[arg(long)]
    case: String,
    /// Refinement axis: time or space
    #[arg(long)]
    axis: String,
    /// Time integrator: pepm, svm or baseline
    #[arg(long)]
    scheme: String,
    /// Grid family: mid or regular
    #[arg(long)]
    grid: Option<String>,
    /// Supplementary nonlinearity for svm: g1 or g2
    #[arg(long)]
    g: Option<String>,
    /// Comma-separated taus for the time axis
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<f64>>,
    /// Comma-separated cell counts for the space axis
    #[arg(long, value_delimiter = ',')]
    resolutions: Option<Vec<usize>>,
    /// Cells along x for time studies
    #[arg(long)]
    nx: Option<usize>,
    /// Cells along y for time studies (defaults to the case's layout)
    #[arg(long)]
    ny: Option<usize>,
    /// Fixed time step for space studies
    #[arg(long)]
    tau: Option<f64>,
    /// Study horizon
    #[arg(long)]
    t_end: Option<f64>,
    /// Newton tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Output CSV path
    #[arg(long, default_value = "convergence.csv")]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run_command(&args),
        Command::Convergence(args) => convergence_command(&args),
        Command::ListCases => list_cases_command(),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run_command(args: &RunArgs) -> Result<(), CliError> {
    let file_raw = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
            RawConfig::from_json(&text)?
        }
        None => RawConfig::default(),
    };
    let plan = config::resolve(file_raw.overlay(args.as_raw()))?;
    std::fs::create_dir_all(&plan.out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", plan.out_dir.display())))?;

    let mut cfg = SchemeConfig::new(plan.scheme, plan.family, plan.tau, plan.t_end);
    cfg.g = plan.g;
    cfg.newton_tol = plan.tol;
    let steps = cfg.steps();

    // requested time -> nearest completed step (several may share one step)
    let mut wanted: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &t in &plan.snapshot_times {
        let step = ((t / plan.tau).round() as usize).min(steps);
        wanted.entry(step).or_default().push(t);
    }

    let mut captured: Vec<(f64, f64, State)> = Vec::new();
    let outcome = run_with_observer(&plan.case.problem, &cfg, plan.nx, plan.ny, |step, time, state| {
        if let Some(times) = wanted.get(&step) {
            for &req in times {
                captured.push((req, time, state.clone()));
            }
        }
    });

    for (req, time, state) in &captured {
        let base = plan.out_dir.join(format!("snapshot_t{req}"));
        output::emit_snapshot(state, *time, &base).map_err(core_error)?;
    }

    let diag_path = plan.out_dir.join("diagnostics.csv");
    match outcome {
        Ok(out) => {
            output::emit_diagnostics(&out.diagnostics, None, &diag_path)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", diag_path.display())))?;
            let drift = out
                .diagnostics
                .iter()
                .map(|d| d.energy_error.abs())
                .fold(0.0f64, f64::max);
            let worst_mult = out
                .diagnostics
                .iter()
                .map(|d| d.multiplier.abs())
                .fold(0.0f64, f64::max);
            println!(
                "case {} scheme {} grid {}: {} steps to t = {}",
                plan.case.name,
                plan.scheme.label(),
                plan.family.label(),
                steps,
                steps as f64 * plan.tau
            );
            println!("initial energy {:.16e}", out.h0);
            println!("max |energy error| {:.3e}", drift);
            println!("max |multiplier| {:.3e}", worst_mult);
            println!("diagnostics: {}", diag_path.display());
            Ok(())
        }
        Err(fail) => {
            output::emit_diagnostics(&fail.diagnostics, Some(fail.step), &diag_path)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", diag_path.display())))?;
            Err(CliError::Numerical(fail.to_string()))
        }
    }
}

fn convergence_command(args: &ConvergenceArgs) -> Result<(), CliError> {
    let case = bench::find_case(&args.case).map_err(core_error)?;
    let scheme = sg_core::integrators::SchemeKind::from_label(&args.scheme)
        .map_err(|e| CliError::Config(format!("`scheme`: {e}")))?;
    let family = match args.grid.as_deref() {
        None => sg_core::grid::GridFamily::MidPoint,
        Some(s) => sg_core::grid::GridFamily::from_label(s)
            .map_err(|e| CliError::Config(format!("`grid`: {e}")))?,
    };
    let g = match args.g.as_deref() {
        None => sg_core::model::GChoice::G1,
        Some(s) => sg_core::model::GChoice::from_label(s)
            .map_err(|e| CliError::Config(format!("`g`: {e}")))?,
    };
    let t_end = args.t_end.unwrap_or(1.0);
    let (axis, base_tau) = match args.axis.as_str() {
        "time" => {
            let taus = args
                .taus
                .clone()
                .unwrap_or_else(|| vec![0.1, 0.05, 0.025, 0.0125]);
            let first = *taus.first().ok_or_else(|| {
                CliError::Config("`taus` must list at least one step size".into())
            })?;
            (StudyAxis::Time { taus }, first)
        }
        "space" => {
            let resolutions = args.resolutions.clone().unwrap_or_else(|| vec![16, 32, 64, 128]);
            if resolutions.is_empty() {
                return Err(CliError::Config(
                    "`resolutions` must list at least one size".into(),
                ));
            }
            (StudyAxis::Space { resolutions }, args.tau.unwrap_or(1e-4))
        }
        other => {
            return Err(CliError::Config(format!(
                "`axis` must be `time` or `space`, got `{other}`"
            )))
        }
    };
    let mut cfg = SchemeConfig::new(scheme, family, base_tau, t_end);
    cfg.g = g;
    if let Some(tol) = args.tol {
        cfg.newton_tol = tol;
    }
    let nx = args.nx.unwrap_or(256);
    let ny = args
        .ny
        .unwrap_or(if case.default_ny == 1 { 1 } else { nx });

    let table = bench::convergence_study(&case, &cfg, nx, ny, &axis).map_err(core_error)?;

    println!(
        "case {} scheme {} grid {} axis {}",
        case.name,
        scheme.label(),
        family.label(),
        args.axis
    );
    println!("{:>12} {:>13} {:>13} {:>9} {:>9}", "resolution", "l2", "linf", "ord_l2", "ord_linf");
    for row in &table.rows {
        let ord = |o: Option<f64>| o.map(|v| format!("{v:9.3}")).unwrap_or_else(|| " ".repeat(9));
        println!(
            "{:>12} {:>13.4e} {:>13.4e} {} {}",
            row.resolution,
            row.l2,
            row.linf,
            ord(row.order_l2),
            ord(row.order_linf)
        );
    }
    bench::write_convergence_csv(&table, &args.out).map_err(core_error)?;
    println!("written: {}", args.out.display());
    Ok(())
}

fn list_cases_command() -> Result<(), CliError> {
    for case in bench::registry() {
        let d = case.problem.domain;
        println!(
            "{:<20} [{}, {}] x [{}, {}]  {}x{}  tau {}  T {}  exact {}",
            case.name,
            d.a,
            d.b,
            d.c,
            d.d,
            case.default_nx,
            case.default_ny,
            case.default_tau,
            case.default_t_end,
            if case.problem.exact.is_some() { "yes" } else { "no" }
        );
        println!("{:<20} {}", "", case.describe);
    }
    Ok(())
}

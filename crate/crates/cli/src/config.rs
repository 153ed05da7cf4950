//! JSON run configuration: schema, defaults and validation.
//!
//! Optional keys fall back to the benchmark case's defaults (grid, sizes,
//! tau, horizon) or to the documented solver defaults (tol = 1e-14, g = g1,
//! grid = mid). Every malformed input maps to an error naming the offending
//! key; nothing panics.

use crate::CliError;
use serde::Deserialize;
use sg_core::bench::{find_case, BenchmarkCase};
use sg_core::grid::GridFamily;
use sg_core::integrators::SchemeKind;
use sg_core::model::GChoice;
use std::path::PathBuf;

/// The raw JSON schema. Everything is optional here so that CLI flags can
/// fill the gaps; completeness is checked at resolution time.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub case: Option<String>,
    pub scheme: Option<String>,
    pub grid: Option<String>,
    pub g: Option<String>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub tau: Option<f64>,
    pub t_end: Option<f64>,
    pub tol: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub out_dir: Option<String>,
}

impl RawConfig {
    pub fn from_json(source: &str) -> Result<RawConfig, CliError> {
        serde_json::from_str(source)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    /// Later (flag-provided) values win over earlier (file-provided) ones.
    pub fn overlay(self, over: RawConfig) -> RawConfig {
        RawConfig {
            case: over.case.or(self.case),
            scheme: over.scheme.or(self.scheme),
            grid: over.grid.or(self.grid),
            g: over.g.or(self.g),
            nx: over.nx.or(self.nx),
            ny: over.ny.or(self.ny),
            tau: over.tau.or(self.tau),
            t_end: over.t_end.or(self.t_end),
            tol: over.tol.or(self.tol),
            snapshot_times: over.snapshot_times.or(self.snapshot_times),
            out_dir: over.out_dir.or(self.out_dir),
        }
    }
}

/// A fully-resolved, validated run description.
pub struct RunPlan {
    pub case: BenchmarkCase,
    pub scheme: SchemeKind,
    pub family: GridFamily,
    pub g: GChoice,
    pub nx: usize,
    pub ny: usize,
    pub tau: f64,
    pub t_end: f64,
    pub tol: f64,
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "`{name}` must be positive and finite (got {v})"
        )))
    }
}

pub fn resolve(raw: RawConfig) -> Result<RunPlan, CliError> {
    let case_name = raw
        .case
        .ok_or_else(|| CliError::Config("`case` is required (see `list-cases`)".into()))?;
    let case = find_case(&case_name)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let scheme_name = raw
        .scheme
        .ok_or_else(|| CliError::Config("`scheme` is required (pepm, svm or baseline)".into()))?;
    let scheme = SchemeKind::from_label(&scheme_name)
        .map_err(|e| CliError::Config(format!("`scheme`: {e}")))?;
    let family = match raw.grid.as_deref() {
        None => GridFamily::MidPoint,
        Some(s) => GridFamily::from_label(s)
            .map_err(|e| CliError::Config(format!("`grid`: {e}")))?,
    };
    let g = match raw.g.as_deref() {
        None => GChoice::G1,
        Some(s) => {
            GChoice::from_label(s).map_err(|e| CliError::Config(format!("`g`: {e}")))?
        }
    };
    let nx = raw.nx.unwrap_or(case.default_nx);
    let ny = raw.ny.unwrap_or(case.default_ny);
    if nx == 0 || ny == 0 {
        return Err(CliError::Config(format!(
            "`nx` and `ny` must be at least 1 (got {nx} x {ny})"
        )));
    }
    let tau = positive("tau", raw.tau.unwrap_or(case.default_tau))?;
    let t_end = positive("t_end", raw.t_end.unwrap_or(case.default_t_end))?;
    if t_end < tau {
        return Err(CliError::Config(format!(
            "`t_end` ({t_end}) must cover at least one step of `tau` ({tau})"
        )));
    }
    let tol = positive("tol", raw.tol.unwrap_or(1e-14))?;
    let snapshot_times = raw.snapshot_times.unwrap_or_default();
    for &t in &snapshot_times {
        if !t.is_finite() || t < 0.0 || t > t_end + 0.5 * tau {
            return Err(CliError::Config(format!(
                "`snapshot_times` entry {t} outside [0, t_end]"
            )));
        }
    }
    Ok(RunPlan {
        case,
        scheme,
        family,
        g,
        nx,
        ny,
        tau,
        t_end,
        tol,
        snapshot_times,
        out_dir: PathBuf::from(raw.out_dir.unwrap_or_else(|| ".".into())),
    })
}

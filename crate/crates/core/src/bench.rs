//! Benchmark problems and convergence studies.
//!
//! Five named cases, each carrying its continuous problem data and default
//! run parameters. The 1D breather has a closed-form solution and anchors
//! the accuracy studies; the four 2D soliton cases (perturbed line, line
//! soliton over an inhomogeneous medium, ring soliton, colliding ring
//! quartet) probe long-time energy behaviour.

use crate::error::{Error, Result};
use crate::grid::{Field, GridFamily, State};
use crate::integrators::{self, SchemeConfig};
use crate::model::{SGProblem, SgSystem};
use crate::par;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Standing breather `u = 4 atan(c^{-1} sin(c k t) sech(k x))` with
/// `k = 1 / sqrt(1 + c^2)`; solves `u_tt - u_xx + sin u = 0` on the line.
#[derive(Clone, Copy, Debug)]
pub struct Breather {
    pub c: f64,
    pub kappa: f64,
}

impl Breather {
    pub fn new(c: f64) -> Result<Breather> {
        if !c.is_finite() || c == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "breather parameter must be finite and nonzero, got {c}"
            )));
        }
        Ok(Breather {
            c,
            kappa: 1.0 / (1.0 + c * c).sqrt(),
        })
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let w = (self.c * self.kappa * t).sin() * sech(self.kappa * x) / self.c;
        4.0 * w.atan()
    }

    pub fn velocity(&self, x: f64, t: f64) -> f64 {
        let s = sech(self.kappa * x);
        let w = (self.c * self.kappa * t).sin() * s / self.c;
        let wt = self.kappa * (self.c * self.kappa * t).cos() * s;
        4.0 * wt / (1.0 + w * w)
    }
}

/// A named benchmark problem with its default discretization.
#[derive(Clone)]
pub struct BenchmarkCase {
    pub name: &'static str,
    pub describe: &'static str,
    pub problem: SGProblem,
    pub default_nx: usize,
    pub default_ny: usize,
    pub default_tau: f64,
    pub default_t_end: f64,
}

pub fn registry() -> Vec<BenchmarkCase> {
    let breather = Breather::new(0.5).expect("fixed parameter");
    vec![
        BenchmarkCase {
            name: "breather",
            describe: "1D standing breather on [-20,20], closed-form solution",
            problem: SGProblem {
                domain: crate::grid::Domain::new(-20.0, 20.0, 0.0, 1.0).unwrap(),
                phi: Arc::new(|_, _| 1.0),
                init_u: Arc::new(move |x, _| breather.eval(x, 0.0)),
                init_v: Arc::new(move |x, _| breather.velocity(x, 0.0)),
                exact: Some(Arc::new(move |x, _, t| breather.eval(x, t))),
            },
            default_nx: 128,
            default_ny: 1,
            default_tau: 1e-2,
            default_t_end: 10.0,
        },
        BenchmarkCase {
            name: "line_perturbed",
            describe: "line soliton with a transverse perturbation on [-7,7]^2",
            problem: SGProblem {
                domain: crate::grid::Domain::new(-7.0, 7.0, -7.0, 7.0).unwrap(),
                phi: Arc::new(|_, _| 1.0),
                init_u: Arc::new(|x, y| {
                    4.0 * (x + 1.0 - 2.0 * sech(y + 7.0) - 2.0 * sech(y - 7.0)).exp().atan()
                }),
                init_v: Arc::new(|_, _| 0.0),
                exact: None,
            },
            default_nx: 128,
            default_ny: 128,
            default_tau: 1e-2,
            default_t_end: 11.0,
        },
        BenchmarkCase {
            name: "line_inhomogeneous",
            describe: "line soliton crossing a localized medium bump on [-7,7]^2",
            problem: SGProblem {
                domain: crate::grid::Domain::new(-7.0, 7.0, -7.0, 7.0).unwrap(),
                phi: Arc::new(|x, y| {
                    let s = sech((x * x + y * y).sqrt());
                    1.0 + s * s
                }),
                init_u: Arc::new(|x, _| 4.0 * ((x - 3.5) / 0.954).exp().atan()),
                init_v: Arc::new(|x, _| 0.629 * sech(((x - 3.5) / 0.954).exp())),
                exact: None,
            },
            default_nx: 128,
            default_ny: 128,
            default_tau: 1e-2,
            default_t_end: 18.0,
        },
        BenchmarkCase {
            name: "ring",
            describe: "collapsing-rebounding ring soliton on [-14,14]^2",
            problem: SGProblem {
                domain: crate::grid::Domain::new(-14.0, 14.0, -14.0, 14.0).unwrap(),
                phi: Arc::new(|_, _| 1.0),
                init_u: Arc::new(|x, y| {
                    4.0 * (3.0 - (x * x + y * y).sqrt()).exp().atan()
                }),
                init_v: Arc::new(|_, _| 0.0),
                exact: None,
            },
            default_nx: 128,
            default_ny: 128,
            default_tau: 1e-2,
            default_t_end: 15.0,
        },
        BenchmarkCase {
            name: "four_ring",
            describe: "four colliding expanding rings on [-30,10]^2",
            problem: SGProblem {
                domain: crate::grid::Domain::new(-30.0, 10.0, -30.0, 10.0).unwrap(),
                phi: Arc::new(|_, _| 1.0),
                init_u: Arc::new(|x, y| {
                    let r = ((x + 3.0) * (x + 3.0) + (y + 3.0) * (y + 3.0)).sqrt();
                    4.0 * ((4.0 - r) / 0.436).exp().atan()
                }),
                init_v: Arc::new(|x, y| {
                    let r = ((x + 3.0) * (x + 3.0) + (y + 3.0) * (y + 3.0)).sqrt();
                    4.13 * sech(((4.0 - r) / 0.436).exp())
                }),
                exact: None,
            },
            default_nx: 128,
            default_ny: 128,
            default_tau: 1e-2,
            default_t_end: 10.0,
        },
    ]
}

pub fn find_case(name: &str) -> Result<BenchmarkCase> {
    registry()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownCase(name.to_string()))
}

/// Discrete `L^2` (weighted) and `L^inf` errors of `numeric.u` against an
/// exact solution sampled on the same grid at time `t`.
pub fn error_norms(
    numeric: &State,
    exact: &(dyn Fn(f64, f64, f64) -> f64 + Sync),
    t: f64,
) -> Result<(f64, f64)> {
    let grid = numeric.u.grid();
    let (nodes_x, nodes_y) = (grid.nodes_x(), grid.nodes_y());
    let ncy = grid.node_count_y();
    let diff = Field::build(grid, |idx| {
        let (i, k) = (idx / ncy, idx % ncy);
        numeric.u.data()[idx] - exact(nodes_x[i], nodes_y[k], t)
    });
    let l2 = crate::grid::norm(&diff);
    Ok((l2, diff.max_abs()))
}

#[derive(Clone, Debug)]
pub enum StudyAxis {
    /// Refine tau at fixed resolution.
    Time { taus: Vec<f64> },
    /// Refine the grid at fixed tau (square grids for 2D cases,
    /// `ny = 1` kept for 1D cases).
    Space { resolutions: Vec<usize> },
}

#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    /// Refined parameter: tau for time studies, cells per axis for space.
    pub resolution: f64,
    pub l2: f64,
    pub linf: f64,
    pub order_l2: Option<f64>,
    pub order_linf: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

/// Run one case across a refinement axis and tabulate errors against its
/// exact solution. Cells run independently (in parallel when enabled).
pub fn convergence_study(
    case: &BenchmarkCase,
    cfg_base: &SchemeConfig,
    nx: usize,
    ny: usize,
    axis: &StudyAxis,
) -> Result<ConvergenceTable> {
    let exact = case
        .problem
        .exact
        .clone()
        .ok_or_else(|| Error::UnsupportedCase(format!(
            "case `{}` has no exact solution to measure errors against",
            case.name
        )))?;
    let cells: Vec<(f64, SchemeConfig, usize, usize)> = match axis {
        StudyAxis::Time { taus } => {
            if taus.is_empty() {
                return Err(Error::InvalidArgument("empty tau list".into()));
            }
            taus.iter()
                .map(|&tau| {
                    let mut cfg = *cfg_base;
                    cfg.tau = tau;
                    (tau, cfg, nx, ny)
                })
                .collect()
        }
        StudyAxis::Space { resolutions } => {
            if resolutions.is_empty() {
                return Err(Error::InvalidArgument("empty resolution list".into()));
            }
            resolutions
                .iter()
                .map(|&n| {
                    let ny_n = if ny == 1 { 1 } else { n };
                    (n as f64, *cfg_base, n, ny_n)
                })
                .collect()
        }
    };
    let results = par::map_slice(&cells, |cell| {
        let (res, cfg, cnx, cny) = cell;
        let out = integrators::run(&case.problem, cfg, *cnx, *cny).map_err(|f| {
            Error::StepFailed {
                step: f.step,
                time: f.time,
                source: Box::new(f.source),
            }
        })?;
        let t_final = cfg.steps() as f64 * cfg.tau;
        let (l2, linf) = error_norms(&out.state, &*exact, t_final)?;
        Ok::<(f64, f64, f64), Error>((*res, l2, linf))
    });
    let mut rows = Vec::with_capacity(results.len());
    let mut prev: Option<(f64, f64, f64)> = None;
    for r in results {
        let (res, l2, linf) = r?;
        let (order_l2, order_linf) = match prev {
            Some((pres, pl2, plinf)) => {
                // refinement ratio: resolutions grow, taus shrink
                let ratio = if pres > res { pres / res } else { res / pres };
                let ord = |e_prev: f64, e_cur: f64| {
                    if e_prev > 0.0 && e_cur > 0.0 && ratio > 1.0 {
                        Some((e_prev / e_cur).ln() / ratio.ln())
                    } else {
                        None
                    }
                };
                (ord(pl2, l2), ord(plinf, linf))
            }
            None => (None, None),
        };
        prev = Some((res, l2, linf));
        rows.push(ConvergenceRow {
            resolution: res,
            l2,
            linf,
            order_l2,
            order_linf,
        });
    }
    Ok(ConvergenceTable { rows })
}

/// `resolution,l2,linf,order_l2,order_linf` with empty order cells on the
/// first row.
pub fn write_convergence_csv(table: &ConvergenceTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "resolution,l2,linf,order_l2,order_linf")?;
    for row in &table.rows {
        let fmt_ord = |o: Option<f64>| o.map(|v| format!("{v:.4}")).unwrap_or_default();
        writeln!(
            w,
            "{},{:.16e},{:.16e},{},{}",
            row.resolution,
            row.l2,
            row.linf,
            fmt_ord(row.order_l2),
            fmt_ord(row.order_linf),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Evaluate a case's initial data on its default grid; used by tests and
/// the CLI to fail fast on inconsistent case definitions.
pub fn sample_initial_state(case: &BenchmarkCase, family: GridFamily) -> Result<State> {
    let sys = SgSystem::from_problem(&case.problem, family, case.default_nx, case.default_ny)?;
    sys.initial_state(&case.problem)
}

//! Time steppers built from one shared prediction-correction core.
//!
//! Writing `c = tau^2/4` and `H = (I - c Lap)^{-1}`, a step from `(u, v)`
//! proceeds as:
//!
//! 1. prediction of the midpoint (linearly implicit, one Helmholtz solve):
//!    `u_half = H (u + (tau/2) v - c phi sin u_bar)` with the extrapolation
//!    `u_bar = (3 u^n - u^{n-1}) / 2` (`u_bar = u^0` on the first step), and
//!    `v_half = (2/tau)(u_half - u)`;
//! 2. free Crank-Nicolson correction around that midpoint:
//!    `u~ = H ((I + c Lap) u + tau v - (tau^2/2) phi sin u_half)`,
//!    `v~ = (2/tau)(u~ - u) - v`;
//! 3. a scalar closure restoring `H(u, v) = H(u0, v0)` exactly:
//!    * projection (`Pepm`): move along the energy gradient,
//!      `u = u~ + s grad_u H(u~)`, `v = (1 + s) v~`;
//!    * relaxation (`Svm`): move along the smoothed supplementary direction
//!      `omega = (tau^2/2) H g(u_half, v_half)`, `gamma = (2/tau) omega`;
//!    * none (`Baseline`): keep `(u~, v~)`; energy drifts, which is exactly
//!      what the control runs are for.
//!
//! Both closures reduce to a scalar root problem solved by Newton from 0.

use crate::error::{Error, Result};
use crate::grid::{self, lin_comb, Field, GridFamily, State};
use crate::model::{GChoice, SGProblem, SgSystem};
use crate::rootfind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    /// Prediction-correction with post-step energy projection.
    Pepm,
    /// Prediction-correction with supplementary-variable relaxation.
    Svm,
    /// Free prediction-correction without closure (control runs).
    Baseline,
}

impl SchemeKind {
    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Pepm => "pepm",
            SchemeKind::Svm => "svm",
            SchemeKind::Baseline => "baseline",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "pepm" => Ok(SchemeKind::Pepm),
            "svm" => Ok(SchemeKind::Svm),
            "baseline" => Ok(SchemeKind::Baseline),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme `{other}` (expected `pepm`, `svm` or `baseline`)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub family: GridFamily,
    /// Supplementary nonlinearity for the relaxation closure (ignored otherwise).
    pub g: GChoice,
    pub tau: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, family: GridFamily, tau: f64, t_end: f64) -> SchemeConfig {
        SchemeConfig {
            scheme,
            family,
            g: GChoice::G1,
            tau,
            t_end,
            newton_tol: 1e-14,
            newton_max_iter: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive and finite, got {}",
                self.tau
            )));
        }
        if !(self.t_end >= self.tau) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "t_end must be finite and at least one step long, got {}",
                self.t_end
            )));
        }
        if !(self.newton_tol > 0.0) || !self.newton_tol.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidArgument(
                "newton_max_iter must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps: `t_end / tau` rounded to the nearest integer, at
    /// least 1. All benchmark horizons are exact multiples of tau.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.tau).round() as usize).max(1)
    }
}

/// Per-step record: energy after the step, drift against the initial energy,
/// the closure multiplier and the Newton iteration count.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub energy_error: f64,
    pub multiplier: f64,
    pub newton_iters: usize,
}

/// Result of one accepted step.
pub struct StepOutcome {
    pub state: State,
    pub multiplier: f64,
    pub newton_iters: usize,
}

/// Midpoint prediction. Returns `(u_half, v_half)`.
pub fn predict(
    sys: &SgSystem,
    u: &Field,
    v: &Field,
    u_extrap: &Field,
    tau: f64,
) -> Result<(Field, Field)> {
    sys.check_field(u)?;
    sys.check_field(v)?;
    sys.check_field(u_extrap)?;
    let c = 0.25 * tau * tau;
    let (ud, vd, ed, pd) = (u.data(), v.data(), u_extrap.data(), sys.phi().data());
    let rhs = Field::build(sys.grid(), |i| {
        ud[i] + 0.5 * tau * vd[i] - c * pd[i] * ed[i].sin()
    });
    let u_half = sys.ops().helmholtz_solve(&rhs, c)?;
    let uh = u_half.data();
    let v_half = Field::build(sys.grid(), |i| (2.0 / tau) * (uh[i] - ud[i]));
    Ok((u_half, v_half))
}

/// Free Crank-Nicolson correction around the predicted midpoint.
/// Returns `(u~, v~)`; no closure applied.
pub fn correct_free(
    sys: &SgSystem,
    u: &Field,
    v: &Field,
    u_half: &Field,
    tau: f64,
) -> Result<(Field, Field)> {
    sys.check_field(u)?;
    sys.check_field(v)?;
    sys.check_field(u_half)?;
    let c = 0.25 * tau * tau;
    let lap_u = sys.ops().laplacian(u)?;
    let (ud, vd, ld, uh, pd) = (u.data(), v.data(), lap_u.data(), u_half.data(), sys.phi().data());
    let rhs = Field::build(sys.grid(), |i| {
        ud[i] + c * ld[i] + tau * vd[i] - 0.5 * tau * tau * pd[i] * uh[i].sin()
    });
    let u_next = sys.ops().helmholtz_solve(&rhs, c)?;
    let un = u_next.data();
    let v_next = Field::build(sys.grid(), |i| (2.0 / tau) * (un[i] - ud[i]) - vd[i]);
    Ok((u_next, v_next))
}

/// Scalar energy residual `r(s) = H(u + s du, v + s dv) - h0` in expanded
/// form:
///
/// ```text
/// r(s) = delta0 + lin * s + quad * s^2 + sum w phi [cos u - cos(u + s du)]
/// ```
///
/// with `delta0 = H(u, v) - h0` precomputed once. The cosine difference is
/// evaluated as `2 sin(u + s du/2) sin(s du/2)`, so every s-dependent term
/// vanishes smoothly as `s -> 0`. A naive `H(...) - h0` would bury the
/// 1e-14-level target tolerance under summation round-off on large grids.
///
/// The derivative is the closed form `(grad H, direction)` expanded the same
/// way: `lin + 2 quad s + sum w phi sin(u + s du) du`.
struct LevelSet<'a> {
    sys: &'a SgSystem,
    base_u: &'a Field,
    base_v: &'a Field,
    dir_u: &'a Field,
    dir_v: &'a Field,
    delta0: f64,
    lin: f64,
    quad: f64,
}

impl<'a> LevelSet<'a> {
    /// `lap_base` must be the Laplacian of `base_u` (every caller already
    /// has it in hand).
    fn new(
        sys: &'a SgSystem,
        base_u: &'a Field,
        base_v: &'a Field,
        dir_u: &'a Field,
        dir_v: &'a Field,
        h0: f64,
        lap_base: &Field,
    ) -> Result<LevelSet<'a>> {
        let lap_dir = sys.ops().laplacian(dir_u)?;
        let base = State::new(base_u.clone(), base_v.clone())?;
        let delta0 = sys.energy_with_laplacian(&base, lap_base)? - h0;
        let lin = grid::inner(base_v, dir_v)? - grid::inner(lap_base, dir_u)?;
        let quad =
            0.5 * grid::inner(dir_v, dir_v)? - 0.5 * grid::inner(dir_u, &lap_dir)?;
        Ok(LevelSet {
            sys,
            base_u,
            base_v,
            dir_u,
            dir_v,
            delta0,
            lin,
            quad,
        })
    }

    fn residual(&self, s: f64) -> f64 {
        let cos_term = grid::weighted_sum(
            [self.sys.phi(), self.base_u, self.dir_u],
            |[p, u, d]| {
                let b = s * d;
                2.0 * p * (u + 0.5 * b).sin() * (0.5 * b).sin()
            },
        )
        .expect("fields share the system grid by construction");
        self.delta0 + s * self.lin + s * s * self.quad + cos_term
    }

    fn derivative(&self, s: f64) -> f64 {
        let sin_term = grid::weighted_sum(
            [self.sys.phi(), self.base_u, self.dir_u],
            |[p, u, d]| p * (u + s * d).sin() * d,
        )
        .expect("fields share the system grid by construction");
        self.lin + 2.0 * s * self.quad + sin_term
    }

    fn apply(&self, s: f64) -> (Field, Field) {
        let (bu, bv, du, dv) = (
            self.base_u.data(),
            self.base_v.data(),
            self.dir_u.data(),
            self.dir_v.data(),
        );
        let u = Field::build(self.base_u.grid(), |i| bu[i] + s * du[i]);
        let v = Field::build(self.base_u.grid(), |i| bv[i] + s * dv[i]);
        (u, v)
    }
}

// Accepted multipliers are tiny: O(tau^3) for the projection, O(tau^2) for
// the relaxation. A root an order of magnitude beyond the previous accepted
// one (plus tau) means Newton walked off to a foreign root; fail the step
// loudly instead of quietly accepting it.
fn guard_multiplier(s: f64, prev: f64, tau: f64) -> Result<()> {
    let bound = 10.0 * (prev.abs() + tau);
    if s.abs() > bound {
        Err(Error::MultiplierOutOfRange { value: s, bound })
    } else {
        Ok(())
    }
}

fn solve_closure(
    ls: &LevelSet,
    cfg: &SchemeConfig,
    h0: f64,
    prev_multiplier: f64,
) -> Result<(f64, usize)> {
    let tol = cfg.newton_tol * h0.abs().max(1.0);
    let res = rootfind::newton_scalar(
        |s| ls.residual(s),
        |s| ls.derivative(s),
        0.0,
        tol,
        cfg.newton_max_iter,
    )?;
    if !res.converged {
        return Err(Error::NewtonDiverged {
            iterations: res.iterations,
            residual: res.residual,
            last: res.root,
        });
    }
    guard_multiplier(res.root, prev_multiplier, cfg.tau)?;
    Ok((res.root, res.iterations))
}

/// Projection closure: pull `(u~, v~)` back onto the initial energy level
/// along `(grad_u H(u~, .), v~)`.
pub fn projection_step(
    sys: &SgSystem,
    u_tilde: &Field,
    v_tilde: &Field,
    h0: f64,
    cfg: &SchemeConfig,
    prev_multiplier: f64,
) -> Result<StepOutcome> {
    sys.check_field(u_tilde)?;
    sys.check_field(v_tilde)?;
    let lap = sys.ops().laplacian(u_tilde)?;
    let (ld, pd, ud) = (lap.data(), sys.phi().data(), u_tilde.data());
    let dir_u = Field::build(sys.grid(), |i| -ld[i] + pd[i] * ud[i].sin());
    let ls = LevelSet::new(sys, u_tilde, v_tilde, &dir_u, v_tilde, h0, &lap)?;
    let (s, iters) = solve_closure(&ls, cfg, h0, prev_multiplier)?;
    let (u, v) = ls.apply(s);
    Ok(StepOutcome {
        state: State::new(u, v)?,
        multiplier: s,
        newton_iters: iters,
    })
}

/// Relaxation closure: run the free correction, then move along the smoothed
/// supplementary direction `omega = (tau^2/2) (I - c Lap)^{-1} g(u_half, v_half)`,
/// `gamma = (2/tau) omega`. With the multiplier pinned to 0 the outputs are
/// exactly the free correction's.
pub fn svm_step(
    sys: &SgSystem,
    u: &Field,
    v: &Field,
    u_half: &Field,
    v_half: &Field,
    h0: f64,
    cfg: &SchemeConfig,
    prev_multiplier: f64,
) -> Result<StepOutcome> {
    let tau = cfg.tau;
    let (u_tilde, v_tilde) = correct_free(sys, u, v, u_half, tau)?;
    let g = sys.supplementary_g(u_half, v_half, cfg.g)?;
    let mut omega = sys.ops().helmholtz_solve(&g, 0.25 * tau * tau)?;
    omega.scale(0.5 * tau * tau);
    let od = omega.data();
    let gamma = Field::build(sys.grid(), |i| (2.0 / tau) * od[i]);
    let lap_ut = sys.ops().laplacian(&u_tilde)?;
    let ls = LevelSet::new(sys, &u_tilde, &v_tilde, &omega, &gamma, h0, &lap_ut)?;
    let (s, iters) = solve_closure(&ls, cfg, h0, prev_multiplier)?;
    let (un, vn) = ls.apply(s);
    Ok(StepOutcome {
        state: State::new(un, vn)?,
        multiplier: s,
        newton_iters: iters,
    })
}

fn advance(
    sys: &SgSystem,
    prev_u: Option<&Field>,
    state: &State,
    h0: f64,
    cfg: &SchemeConfig,
    prev_multiplier: f64,
) -> Result<StepOutcome> {
    let u_extrap = match prev_u {
        Some(up) => lin_comb(1.5, &state.u, -0.5, up)?,
        // first step: no u^{n-1} yet, use u^0 itself (two-level start)
        None => state.u.clone(),
    };
    let (u_half, v_half) = predict(sys, &state.u, &state.v, &u_extrap, cfg.tau)?;
    match cfg.scheme {
        SchemeKind::Pepm => {
            let (ut, vt) = correct_free(sys, &state.u, &state.v, &u_half, cfg.tau)?;
            projection_step(sys, &ut, &vt, h0, cfg, prev_multiplier)
        }
        SchemeKind::Svm => svm_step(
            sys,
            &state.u,
            &state.v,
            &u_half,
            &v_half,
            h0,
            cfg,
            prev_multiplier,
        ),
        SchemeKind::Baseline => {
            let (ut, vt) = correct_free(sys, &state.u, &state.v, &u_half, cfg.tau)?;
            Ok(StepOutcome {
                state: State::new(ut, vt)?,
                multiplier: 0.0,
                newton_iters: 0,
            })
        }
    }
}

/// First step from the initial state (no previous level to extrapolate from).
pub fn startup_step(
    sys: &SgSystem,
    state0: &State,
    h0: f64,
    cfg: &SchemeConfig,
) -> Result<StepOutcome> {
    advance(sys, None, state0, h0, cfg, 0.0)
}

pub struct RunOutput {
    pub state: State,
    pub h0: f64,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// A failed run: which step died, why, and everything recorded up to there.
#[derive(Debug)]
pub struct RunFailure {
    pub step: usize,
    pub time: f64,
    pub source: Error,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "run aborted at step {} (t = {}): {}",
            self.step, self.time, self.source
        )
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

pub type RunResult = std::result::Result<RunOutput, Box<RunFailure>>;

/// Integrate a problem to `t_end`, recording diagnostics every step
/// (step 0 carries the initial energy).
pub fn run(problem: &SGProblem, cfg: &SchemeConfig, nx: usize, ny: usize) -> RunResult {
    run_with_observer(problem, cfg, nx, ny, |_, _, _| {})
}

/// Same as [`run`], invoking `observer(step, time, state)` after every
/// accepted step (and once for the initial state).
pub fn run_with_observer(
    problem: &SGProblem,
    cfg: &SchemeConfig,
    nx: usize,
    ny: usize,
    mut observer: impl FnMut(usize, f64, &State),
) -> RunResult {
    let setup_fail = |e: Error| {
        Box::new(RunFailure {
            step: 0,
            time: 0.0,
            source: e,
            diagnostics: Vec::new(),
        })
    };
    cfg.validate().map_err(setup_fail)?;
    let sys = SgSystem::from_problem(problem, cfg.family, nx, ny).map_err(setup_fail)?;
    let mut state = sys.initial_state(problem).map_err(setup_fail)?;
    let h0 = sys.energy(&state).map_err(setup_fail)?;
    let steps = cfg.steps();
    let mut diagnostics = Vec::with_capacity(steps + 1);
    diagnostics.push(StepDiagnostics {
        step: 0,
        time: 0.0,
        energy: h0,
        energy_error: 0.0,
        multiplier: 0.0,
        newton_iters: 0,
    });
    observer(0, 0.0, &state);
    let mut prev_u: Option<Field> = None;
    let mut prev_multiplier = 0.0;
    for n in 0..steps {
        let time = (n + 1) as f64 * cfg.tau;
        let fail = |source: Error, diagnostics: Vec<StepDiagnostics>| {
            Box::new(RunFailure {
                step: n + 1,
                time,
                source,
                diagnostics,
            })
        };
        let out = match advance(&sys, prev_u.as_ref(), &state, h0, cfg, prev_multiplier) {
            Ok(o) => o,
            Err(e) => return Err(fail(e, diagnostics)),
        };
        prev_u = Some(std::mem::replace(&mut state, out.state).u);
        prev_multiplier = out.multiplier;
        let energy = match sys.energy(&state) {
            Ok(h) => h,
            Err(e) => return Err(fail(e, diagnostics)),
        };
        diagnostics.push(StepDiagnostics {
            step: n + 1,
            time,
            energy,
            energy_error: (energy - h0).abs(),
            multiplier: out.multiplier,
            newton_iters: out.newton_iters,
        });
        observer(n + 1, time, &state);
    }
    Ok(RunOutput {
        state,
        h0,
        diagnostics,
    })
}

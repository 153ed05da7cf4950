//! The semi-discrete sine-Gordon system on one grid: energy functional,
//! energy gradient and the first-order-in-time vector field.
//!
//! With the family's inner product `(.,.)` and discrete Laplacian `Lap`, the
//! conserved energy is
//!
//! ```text
//! H(u, v) = 0.5 (v, v) - 0.5 (u, Lap u) + (phi, 1 - cos u)
//! ```
//!
//! which equals `h_x h_y` times the vectorized Hamiltonian of the underlying
//! ODE system. The potential term is evaluated as `2 sin^2(u/2)`, which is
//! exact and free of cancellation for small `u`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{self, Domain, Field, GridFamily, GridSpec, State};
use crate::spectral::SpectralOps;

pub type SpaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Continuous problem statement. `phi` must be nonnegative; `exact`, when
/// present, drives convergence studies.
#[derive(Clone)]
pub struct SGProblem {
    pub domain: Domain,
    pub phi: SpaceFn,
    pub init_u: SpaceFn,
    pub init_v: SpaceFn,
    pub exact: Option<SpaceTimeFn>,
}

/// Which supplementary nonlinearity the relaxation closure smooths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GChoice {
    /// `g1 = phi sin u`
    G1,
    /// `g2 = Lap u - phi sin u`
    G2,
}

impl GChoice {
    pub fn label(self) -> &'static str {
        match self {
            GChoice::G1 => "g1",
            GChoice::G2 => "g2",
        }
    }

    pub fn from_label(s: &str) -> Result<Self> {
        match s {
            "g1" => Ok(GChoice::G1),
            "g2" => Ok(GChoice::G2),
            other => Err(Error::InvalidArgument(format!(
                "unknown supplementary nonlinearity `{other}` (expected `g1` or `g2`)"
            ))),
        }
    }
}

/// Spatially discretized system: grid, transform plans and the potential
/// sampled once at setup.
pub struct SgSystem {
    grid: Arc<GridSpec>,
    ops: SpectralOps,
    phi: Field,
}

impl SgSystem {
    pub fn new(grid: Arc<GridSpec>, phi: Field) -> Result<SgSystem> {
        if !GridSpec::same(&grid, phi.grid()) {
            return Err(Error::GridMismatch);
        }
        if let Some(bad) = phi.data().iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "potential phi must be nonnegative on all nodes (found {bad})"
            )));
        }
        Ok(SgSystem {
            ops: SpectralOps::new(&grid),
            grid,
            phi,
        })
    }

    pub fn from_problem(
        problem: &SGProblem,
        family: GridFamily,
        nx: usize,
        ny: usize,
    ) -> Result<SgSystem> {
        let grid = GridSpec::new(problem.domain, family, nx, ny)?;
        let phi = Field::sample(&grid, |x, y| (problem.phi)(x, y))?;
        SgSystem::new(grid, phi)
    }

    pub fn initial_state(&self, problem: &SGProblem) -> Result<State> {
        let u = Field::sample(&self.grid, |x, y| (problem.init_u)(x, y))?;
        let v = Field::sample(&self.grid, |x, y| (problem.init_v)(x, y))?;
        State::new(u, v)
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        &self.grid
    }

    pub fn ops(&self) -> &SpectralOps {
        &self.ops
    }

    pub fn phi(&self) -> &Field {
        &self.phi
    }

    pub(crate) fn check_field(&self, f: &Field) -> Result<()> {
        if GridSpec::same(&self.grid, f.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn check_state(&self, state: &State) -> Result<()> {
        self.check_field(&state.u)?;
        self.check_field(&state.v)
    }

    /// Discrete energy `0.5 (v,v) - 0.5 (u, Lap u) + (phi, 1 - cos u)`.
    pub fn energy(&self, state: &State) -> Result<f64> {
        self.check_state(state)?;
        let lap = self.ops.laplacian(&state.u)?;
        self.energy_with_laplacian(state, &lap)
    }

    /// Energy when the caller already holds `Lap u` (the steppers always do).
    pub(crate) fn energy_with_laplacian(&self, state: &State, lap_u: &Field) -> Result<f64> {
        let kinetic = 0.5 * grid::inner(&state.v, &state.v)?;
        let stiffness = -0.5 * grid::inner(&state.u, lap_u)?;
        let potential = grid::weighted_sum([&self.phi, &state.u], |[p, u]| {
            let s = (0.5 * u).sin();
            2.0 * p * s * s
        })?;
        Ok(kinetic + stiffness + potential)
    }

    /// Gradient of the energy in the family's inner product:
    /// `(-Lap u + phi sin u, v)`.
    pub fn energy_gradient(&self, state: &State) -> Result<(Field, Field)> {
        self.check_state(state)?;
        let lap = self.ops.laplacian(&state.u)?;
        let (ld, pd, ud) = (lap.data(), self.phi.data(), state.u.data());
        let grad_u = Field::build(&self.grid, |i| -ld[i] + pd[i] * ud[i].sin());
        Ok((grad_u, state.v.clone()))
    }

    /// First-order vector field `(u, v)' = (v, Lap u - phi sin u)`.
    pub fn rhs(&self, state: &State) -> Result<(Field, Field)> {
        self.check_state(state)?;
        let lap = self.ops.laplacian(&state.u)?;
        let (ld, pd, ud) = (lap.data(), self.phi.data(), state.u.data());
        let v_dot = Field::build(&self.grid, |i| ld[i] - pd[i] * ud[i].sin());
        Ok((state.v.clone(), v_dot))
    }

    /// Supplementary nonlinearity for the relaxation closure, evaluated at a
    /// (u, v) pair. Both built-in choices depend on `u` only; `v` is part of
    /// the interface because the closure treats `g = g[u, v]` generically.
    pub fn supplementary_g(&self, u: &Field, _v: &Field, which: GChoice) -> Result<Field> {
        self.check_field(u)?;
        let pd = self.phi.data();
        let ud = u.data();
        match which {
            GChoice::G1 => Ok(Field::build(&self.grid, |i| pd[i] * ud[i].sin())),
            GChoice::G2 => {
                let lap = self.ops.laplacian(u)?;
                let ld = lap.data();
                Ok(Field::build(&self.grid, |i| ld[i] - pd[i] * ud[i].sin()))
            }
        }
    }
}

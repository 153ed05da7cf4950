//! Scalar Newton iteration for the energy closures.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct NewtonResult {
    pub root: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Newton's method with a residual stopping criterion `|f(x)| <= tol`
/// (callers scale `tol` to their problem). The residual is checked before
/// the first update, so an exact initial guess costs zero iterations.
///
/// Running out of iterations is returned as data (`converged = false`) so the
/// caller can attach context; a non-finite residual or a vanishing derivative
/// is an error. No damping or line search: the closures this serves start
/// next to their root and guard the result's magnitude themselves.
pub fn newton_scalar(
    f: impl Fn(f64) -> f64,
    fprime: impl Fn(f64) -> f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonResult> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "newton tolerance must be positive and finite, got {tol}"
        )));
    }
    let mut x = x0;
    for it in 0..=max_iter {
        let r = f(x);
        if !r.is_finite() {
            return Err(Error::NonFiniteResidual { at: x });
        }
        if r.abs() <= tol {
            return Ok(NewtonResult {
                root: x,
                iterations: it,
                residual: r,
                converged: true,
            });
        }
        if it == max_iter {
            return Ok(NewtonResult {
                root: x,
                iterations: it,
                residual: r,
                converged: false,
            });
        }
        let d = fprime(x);
        if !d.is_finite() || d.abs() < 1e-300 {
            return Err(Error::DegenerateDerivative { at: x, derivative: d });
        }
        x -= r / d;
    }
    unreachable!("loop returns on every path")
}

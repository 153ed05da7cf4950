//! Independent oracles for the discrete Hamiltonian and its gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sg_core::bench::{find_case, Breather};
use sg_core::grid::{self, Domain, Field, GridFamily, GridSpec, State};
use sg_core::model::{SGProblem, SgSystem};
use sg_core::spectral::{dense_diff_matrix, Axis};
use std::sync::Arc;

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// Closed-form energy of the breather on [-20, 20]: at t = 0 the field is
/// zero and only the kinetic term survives,
/// `H = int 8 k^2 sech^2(k x) dx = 16 k tanh(20 k)`.
fn breather_energy_closed_form() -> f64 {
    let kappa = 1.0 / 1.25f64.sqrt();
    16.0 * kappa * (20.0 * kappa).tanh()
}

fn breather_system(family: GridFamily) -> (SgSystem, SGProblem) {
    let case = find_case("breather").unwrap();
    let sys = SgSystem::from_problem(&case.problem, family, 128, 1).unwrap();
    (sys, case.problem)
}

#[test]
fn breather_energy_matches_closed_form_on_both_grids() {
    let h_exact = breather_energy_closed_form();
    assert!((h_exact - 14.310835055998647).abs() < 1e-12); // pin the constant
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        let (sys, problem) = breather_system(family);
        let state = sys.initial_state(&problem).unwrap();
        let h = sys.energy(&state).unwrap();
        assert!(
            (h - h_exact).abs() < 1e-9,
            "family {family:?}: {h} vs {h_exact}"
        );
    }
}

#[test]
fn breather_energy_at_later_time_matches_conserved_value() {
    // at t = 1 all three energy terms are active; the continuous energy is
    // still 16 k tanh(20 k) (boundary flux is ~1e-30)
    let h_exact = breather_energy_closed_form();
    let b = Breather::new(0.5).unwrap();
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        let (sys, _) = breather_system(family);
        let grid = sys.grid();
        let u = Field::sample(grid, |x, _| b.eval(x, 1.0)).unwrap();
        let v = Field::sample(grid, |x, _| b.velocity(x, 1.0)).unwrap();
        let h = sys.energy(&State::new(u, v).unwrap()).unwrap();
        assert!(
            (h - h_exact).abs() < 1e-9,
            "family {family:?}: {h} vs {h_exact}"
        );
    }
}

#[test]
fn breather_energy_matches_simpson_quadrature() {
    // second route: Simpson's rule on the continuous integrand
    // (1/2) v^2 + (1/2) u_x^2 + (1 - cos u) at t = 1
    let b = Breather::new(0.5).unwrap();
    let t = 1.0;
    let ux = |x: f64| {
        let h = 1e-5;
        (b.eval(x + h, t) - b.eval(x - h, t)) / (2.0 * h)
    };
    let integrand = |x: f64| {
        let v = b.velocity(x, t);
        let d = ux(x);
        0.5 * v * v + 0.5 * d * d + (1.0 - b.eval(x, t).cos())
    };
    let (a, c, n) = (-20.0, 20.0, 4000);
    let h = (c - a) / n as f64;
    let mut s = integrand(a) + integrand(c);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * integrand(a + i as f64 * h);
    }
    let quad = s * h / 3.0;
    assert!(
        (quad - breather_energy_closed_form()).abs() < 1e-8,
        "simpson {quad}"
    );
}

fn wavy_problem() -> SGProblem {
    SGProblem {
        domain: Domain::new(-1.0, 2.0, 0.0, 1.5).unwrap(),
        phi: Arc::new(|x, y| 1.0 + 0.3 * (x + 0.5 * y).cos().powi(2)),
        init_u: Arc::new(|x, y| 0.7 * (0.9 * x).cos() * (1.3 * y).cos() + 0.2 * sech(x - y)),
        init_v: Arc::new(|x, y| 0.4 * (0.6 * x + 0.2).cos() * (0.8 * y).cos()),
        exact: None,
    }
}

fn random_field(rng: &mut ChaCha8Rng, grid: &Arc<GridSpec>) -> Field {
    let data = (0..grid.len()).map(|_| rng.random_range(-0.5..0.5)).collect();
    Field::from_data(grid, data).unwrap()
}

#[test]
fn energy_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let problem = wavy_problem();
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        let sys = SgSystem::from_problem(&problem, family, 16, 16).unwrap();
        let state = sys.initial_state(&problem).unwrap();
        let (gu, gv) = sys.energy_gradient(&state).unwrap();
        let eps = 1e-6;
        for trial in 0..20 {
            let du = random_field(&mut rng, sys.grid());
            let dv = random_field(&mut rng, sys.grid());
            let analytic = grid::inner(&gu, &du).unwrap() + grid::inner(&gv, &dv).unwrap();
            let shifted = |s: f64| {
                let u = grid::lin_comb(1.0, &state.u, s, &du).unwrap();
                let v = grid::lin_comb(1.0, &state.v, s, &dv).unwrap();
                sys.energy(&State::new(u, v).unwrap()).unwrap()
            };
            let fd = (shifted(eps) - shifted(-eps)) / (2.0 * eps);
            let scale = analytic.abs().max(1.0);
            assert!(
                (fd - analytic).abs() <= 1e-6 * scale,
                "trial {trial} on {family:?}: fd {fd} vs analytic {analytic}"
            );
        }
    }
}

#[test]
fn energy_matches_dense_matrix_assembly() {
    // H = 1/2 <v, v> - 1/2 <u, D u> + <phi, 2 sin^2(u/2)> with D applied
    // through the dense oracle matrices instead of the FFT path
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let problem = wavy_problem();
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        let sys = SgSystem::from_problem(&problem, family, 6, 6).unwrap();
        let grid = sys.grid();
        let dx = dense_diff_matrix(grid, Axis::X).unwrap();
        let dy = dense_diff_matrix(grid, Axis::Y).unwrap();
        let (ncx, ncy) = (grid.node_count_x(), grid.node_count_y());
        for _ in 0..4 {
            let u = random_field(&mut rng, grid);
            let v = random_field(&mut rng, grid);
            let lap = Field::build(grid, |idx| {
                let (i, k) = (idx / ncy, idx % ncy);
                let mut s = 0.0;
                for p in 0..ncx {
                    s += dx[i][p] * u.at(p, k);
                }
                for q in 0..ncy {
                    s += dy[k][q] * u.at(i, q);
                }
                s
            });
            let mut dense_h = 0.5 * grid::inner(&v, &v).unwrap()
                - 0.5 * grid::inner(&u, &lap).unwrap();
            dense_h += grid::weighted_sum([sys.phi(), &u], |[p, uu]| {
                2.0 * p * (0.5 * uu).sin().powi(2)
            })
            .unwrap();
            let state = State::new(u, v).unwrap();
            let h = sys.energy(&state).unwrap();
            assert!(
                (h - dense_h).abs() <= 1e-12 * dense_h.abs().max(1.0),
                "family {family:?}: {h} vs dense {dense_h}"
            );
        }
    }
}

#[test]
fn semi_discrete_flow_conserves_the_discrete_energy() {
    // independent integrator: classical RK4 on the stiff ODE system
    // (u', v') = rhs(u, v). Over a short horizon its O(tau^4) error is far
    // below the target, so any systematic drift would expose an energy /
    // vector-field inconsistency.
    let problem = wavy_problem();
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        let sys = SgSystem::from_problem(&problem, family, 16, 16).unwrap();
        let mut state = sys.initial_state(&problem).unwrap();
        let h0 = sys.energy(&state).unwrap();
        let tau = 1e-5;
        let add = |s: &State, a: f64, ku: &Field, kv: &Field| {
            State::new(
                grid::lin_comb(1.0, &s.u, a, ku).unwrap(),
                grid::lin_comb(1.0, &s.v, a, kv).unwrap(),
            )
            .unwrap()
        };
        for _ in 0..100 {
            let (k1u, k1v) = sys.rhs(&state).unwrap();
            let (k2u, k2v) = sys.rhs(&add(&state, 0.5 * tau, &k1u, &k1v)).unwrap();
            let (k3u, k3v) = sys.rhs(&add(&state, 0.5 * tau, &k2u, &k2v)).unwrap();
            let (k4u, k4v) = sys.rhs(&add(&state, tau, &k3u, &k3v)).unwrap();
            let mix = |k1: &Field, k2: &Field, k3: &Field, k4: &Field| {
                let a = grid::lin_comb(1.0, k1, 2.0, k2).unwrap();
                let b = grid::lin_comb(1.0, &a, 2.0, k3).unwrap();
                grid::lin_comb(1.0, &b, 1.0, k4).unwrap()
            };
            state = add(&state, tau / 6.0, &mix(&k1u, &k2u, &k3u, &k4u), &mix(&k1v, &k2v, &k3v, &k4v));
        }
        let h = sys.energy(&state).unwrap();
        assert!(
            (h - h0).abs() <= 1e-10 * h0.abs().max(1.0),
            "family {family:?}: drift {}",
            (h - h0).abs()
        );
    }
}

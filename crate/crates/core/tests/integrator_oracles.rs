//! Integrator oracles: defining equations, a per-mode linear recursion,
//! conservation behaviour and failure reporting.

use sg_core::bench::find_case;
use sg_core::grid::{self, Domain, GridFamily};
use sg_core::integrators::{
    correct_free, predict, run, SchemeConfig, SchemeKind,
};
use sg_core::model::{GChoice, SGProblem, SgSystem};
use std::sync::Arc;

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn bumpy_problem() -> SGProblem {
    SGProblem {
        domain: Domain::new(-3.0, 3.0, -2.0, 2.0).unwrap(),
        phi: Arc::new(|x, y| 1.0 + 0.2 * sech(x + y)),
        init_u: Arc::new(|x, y| 1.1 * sech(x) * sech(y) + 0.3 * (0.7 * x).cos()),
        init_v: Arc::new(|x, y| 0.5 * sech(x - 0.5) * (0.9 * y).cos()),
        exact: None,
    }
}

#[test]
fn prediction_satisfies_its_defining_equation() {
    // (I - c Lap) u_half = u + (tau/2) v - c phi sin(u_bar), c = tau^2/4
    let problem = bumpy_problem();
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        let sys = SgSystem::from_problem(&problem, family, 24, 20).unwrap();
        let state = sys.initial_state(&problem).unwrap();
        let tau = 0.05;
        let c = 0.25 * tau * tau;
        let (u_half, v_half) = predict(&sys, &state.u, &state.v, &state.u, tau).unwrap();
        let lap = sys.ops().laplacian(&u_half).unwrap();
        let mut worst = 0.0f64;
        for i in 0..sys.grid().len() {
            let rhs = state.u.data()[i] + 0.5 * tau * state.v.data()[i]
                - c * sys.phi().data()[i] * state.u.data()[i].sin();
            let lhs = u_half.data()[i] - c * lap.data()[i];
            worst = worst.max((lhs - rhs).abs());
            let vdef = (2.0 / tau) * (u_half.data()[i] - state.u.data()[i]);
            assert!((v_half.data()[i] - vdef).abs() <= 1e-13);
        }
        assert!(worst < 1e-11, "prediction residual {worst} on {family:?}");
    }
}

#[test]
fn correction_satisfies_its_defining_equation() {
    // (I - c Lap) u~ = (I + c Lap) u + tau v - (tau^2/2) phi sin(u_half)
    let problem = bumpy_problem();
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        let sys = SgSystem::from_problem(&problem, family, 24, 20).unwrap();
        let state = sys.initial_state(&problem).unwrap();
        let tau = 0.05;
        let c = 0.25 * tau * tau;
        let (u_half, _) = predict(&sys, &state.u, &state.v, &state.u, tau).unwrap();
        let (ut, vt) = correct_free(&sys, &state.u, &state.v, &u_half, tau).unwrap();
        let lap_new = sys.ops().laplacian(&ut).unwrap();
        let lap_old = sys.ops().laplacian(&state.u).unwrap();
        let mut worst = 0.0f64;
        for i in 0..sys.grid().len() {
            let rhs = state.u.data()[i] + c * lap_old.data()[i]
                + tau * state.v.data()[i]
                - 0.5 * tau * tau * sys.phi().data()[i] * u_half.data()[i].sin();
            let lhs = ut.data()[i] - c * lap_new.data()[i];
            worst = worst.max((lhs - rhs).abs());
            let vdef = (2.0 / tau) * (ut.data()[i] - state.u.data()[i]) - state.v.data()[i];
            assert!((vt.data()[i] - vdef).abs() <= 1e-13);
        }
        assert!(worst < 1e-11, "correction residual {worst} on {family:?}");
    }
}

#[test]
fn linear_modes_follow_the_crank_nicolson_recursion() {
    // with phi = 0 the free correction is exactly Crank-Nicolson and each
    // cosine mode obeys a scalar two-term recursion
    let (mx, my) = (3usize, 2usize);
    let (amp_u, amp_v) = (0.7, -0.3);
    let domain = Domain::new(0.0, 2.0, -1.0, 0.5).unwrap();
    let mu_x = std::f64::consts::PI / domain.extent_x();
    let mu_y = std::f64::consts::PI / domain.extent_y();
    let mode = move |x: f64, y: f64| {
        (mx as f64 * mu_x * (x - 0.0)).cos() * (my as f64 * mu_y * (y + 1.0)).cos()
    };
    let problem = SGProblem {
        domain,
        phi: Arc::new(|_, _| 0.0),
        init_u: Arc::new(move |x, y| amp_u * mode(x, y)),
        init_v: Arc::new(move |x, y| amp_v * mode(x, y)),
        exact: None,
    };
    let tau = 0.01;
    let omega2 = (mx as f64 * mu_x).powi(2) + (my as f64 * mu_y).powi(2);
    let c = 0.25 * tau * tau;
    let coef_u = ((1.0 - c * omega2) * amp_u + tau * amp_v) / (1.0 + c * omega2);
    let coef_v = (2.0 / tau) * (coef_u - amp_u) - amp_v;
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        let cfg = SchemeConfig::new(SchemeKind::Baseline, family, tau, tau);
        let out = run(&problem, &cfg, 16, 12).unwrap();
        let grid = out.state.u.grid();
        let mut worst = 0.0f64;
        for i in 0..grid.node_count_x() {
            for k in 0..grid.node_count_y() {
                let m = mode(grid.nodes_x()[i], grid.nodes_y()[k]);
                worst = worst.max((out.state.u.at(i, k) - coef_u * m).abs());
                worst = worst.max((out.state.v.at(i, k) - coef_v * m).abs());
            }
        }
        assert!(worst < 1e-12, "modal deviation {worst} on {family:?}");
    }
}

#[test]
fn projection_multiplier_vanishes_on_the_linear_problem() {
    // Crank-Nicolson conserves the quadratic energy already, so the
    // projection has (almost) nothing to do
    let problem = SGProblem {
        phi: Arc::new(|_, _| 0.0),
        ..bumpy_problem()
    };
    let cfg = SchemeConfig::new(SchemeKind::Pepm, GridFamily::MidPoint, 0.05, 1.0);
    let out = run(&problem, &cfg, 16, 16).unwrap();
    for d in &out.diagnostics {
        assert!(d.multiplier.abs() <= 1e-10, "multiplier {}", d.multiplier);
    }
}

fn max_drift(diags: &[sg_core::integrators::StepDiagnostics]) -> f64 {
    diags.iter().map(|d| d.energy_error).fold(0.0, f64::max)
}

#[test]
fn conserving_schemes_hold_energy_where_the_baseline_drifts() {
    // deliberately under-resolved ring: conservation is enforced by the
    // closure, not by accuracy, so it must hold here too
    let case = find_case("ring").unwrap();
    let mut baseline_drift = f64::INFINITY;
    let mut worst_conserving = 0.0f64;
    let mut h_scale = 1.0f64;
    for family in [GridFamily::MidPoint, GridFamily::Regular] {
        for scheme in [SchemeKind::Pepm, SchemeKind::Svm] {
            let cfg = SchemeConfig::new(scheme, family, 0.05, 1.0);
            let out = run(&case.problem, &cfg, 32, 32).unwrap();
            h_scale = out.h0.abs().max(1.0);
            let drift = max_drift(&out.diagnostics);
            assert!(
                drift <= 1e-10 * h_scale,
                "{scheme:?}/{family:?} drift {drift}"
            );
            worst_conserving = worst_conserving.max(drift);
        }
    }
    let cfg = SchemeConfig::new(SchemeKind::Baseline, GridFamily::MidPoint, 0.05, 1.0);
    let out = run(&case.problem, &cfg, 32, 32).unwrap();
    baseline_drift = baseline_drift.min(max_drift(&out.diagnostics));
    assert!(
        baseline_drift > 1e3 * worst_conserving.max(1e-14),
        "baseline {baseline_drift} vs conserving {worst_conserving}"
    );
    assert!(baseline_drift > 1e-9 * h_scale);
}

#[test]
fn relaxation_conserves_with_either_supplementary_nonlinearity() {
    let case = find_case("ring").unwrap();
    for g in [GChoice::G1, GChoice::G2] {
        let mut cfg = SchemeConfig::new(SchemeKind::Svm, GridFamily::MidPoint, 0.05, 0.5);
        cfg.g = g;
        let out = run(&case.problem, &cfg, 16, 16).unwrap();
        let drift = max_drift(&out.diagnostics);
        assert!(
            drift <= 1e-10 * out.h0.abs().max(1.0),
            "{g:?} drift {drift}"
        );
    }
}

#[test]
fn runs_are_bitwise_deterministic() {
    let case = find_case("ring").unwrap();
    let cfg = SchemeConfig::new(SchemeKind::Svm, GridFamily::MidPoint, 0.05, 0.5);
    let a = run(&case.problem, &cfg, 24, 24).unwrap();
    let b = run(&case.problem, &cfg, 24, 24).unwrap();
    assert_eq!(a.state.u.data(), b.state.u.data());
    assert_eq!(a.state.v.data(), b.state.v.data());
    let ma: Vec<f64> = a.diagnostics.iter().map(|d| d.multiplier).collect();
    let mb: Vec<f64> = b.diagnostics.iter().map(|d| d.multiplier).collect();
    assert_eq!(ma, mb);
}

#[test]
fn first_step_matches_the_interior_second_order_behaviour() {
    // one step of size tau vs two of tau/2: the gap shrinks ~8x when tau is
    // halved iff the two-level start does not degrade the local order
    let case = find_case("breather").unwrap();
    let gap = |tau: f64| {
        let big = run(
            &case.problem,
            &SchemeConfig::new(SchemeKind::Pepm, GridFamily::MidPoint, tau, tau),
            64,
            1,
        )
        .unwrap();
        let small = run(
            &case.problem,
            &SchemeConfig::new(SchemeKind::Pepm, GridFamily::MidPoint, 0.5 * tau, tau),
            64,
            1,
        )
        .unwrap();
        grid::lin_comb(1.0, &big.state.u, -1.0, &small.state.u)
            .unwrap()
            .max_abs()
    };
    let tau = 2e-3;
    let ratio = gap(tau) / gap(0.5 * tau);
    assert!(
        (5.5..=11.5).contains(&ratio),
        "startup defect ratio {ratio}, expected ~8"
    );
}

#[test]
fn failed_newton_reports_step_and_partial_diagnostics() {
    let case = find_case("ring").unwrap();
    let mut cfg = SchemeConfig::new(SchemeKind::Svm, GridFamily::MidPoint, 0.05, 1.0);
    // unreachable tolerance: the residual plateaus at round-off level far
    // above 1e-30, so the iteration budget must run out on the first step
    cfg.newton_tol = 1e-30;
    cfg.newton_max_iter = 3;
    let err = run(&case.problem, &cfg, 16, 16).err().expect("must fail");
    assert_eq!(err.step, 1);
    assert_eq!(err.diagnostics.len(), 1);
    assert_eq!(err.diagnostics[0].step, 0);
    assert!(matches!(
        err.source,
        sg_core::Error::NewtonDiverged { .. }
    ));
}

//! Worked examples for each module, checked against independent references.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ruin_core::config::{reference_config, RunConfig};
use ruin_core::generator::jump_generator;
use ruin_core::levy::{sample_increment, JumpLaw, JumpSign, LevyTriplet, ModelParams};
use ruin_core::mc::{dynkin_check, estimate_psi};
use ruin_core::oracles::{brownian_first_passage, cramer_lundberg_ultimate, fine_mc, Provenance};
use ruin_core::pide::{
    build_stencil, observed_orders, refine_and_compare, solve_backward, solve_ruin, BoundaryData, Grid, RuinedValue,
    SolutionField,
};
use ruin_core::reserve::{doleans_path, SchemeKind, SimScheme};
use ruin_core::viscosity::{verify_field, SampleSpec, VerifyOptions};
use ruin_core::{compare::run_compare, numeric::KahanSum};

/// `t - Σ ξ_i` with exponential claims: the canonical drift is shifted so the net premium rate is 1.
fn claims(rate: f64, intensity: f64) -> LevyTriplet {
    let mut p = LevyTriplet::zero().with_jumps(intensity, JumpLaw::Exponential { rate, sign: JumpSign::Negative });
    p.drift = 1.0 - p.compensated_drift();
    p
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, d: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if d == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, d - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, d - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth)
}

#[test]
fn claim_integral_matches_adaptive_simpson() {
    let (rate, lambda) = (2.0, 1.0);
    let params = ModelParams::new(LevyTriplet::zero(), claims(rate, lambda), 1.0);
    for u in [0.3, 1.0, 4.0] {
        let f = |y: f64| y * y;
        let quad = jump_generator(&params, u, f, 2.0 * u);
        // claim sizes s = -z > 0 with density rate e^{-rate s}
        let integrand = |s: f64| {
            let comp = if s <= 1.0 { -2.0 * u * s } else { 0.0 };
            lambda * rate * (-rate * s).exp() * (f(u - s) - f(u) - comp)
        };
        let reference = simpson(&integrand, 0.0, 1.0, 1e-12, 40) + simpson(&integrand, 1.0, 40.0, 1e-12, 40);
        assert!((quad - reference).abs() < 1e-6, "u = {u}: quadrature {quad} vs simpson {reference}");
    }
}

#[test]
fn zero_model_stencil_vanishes() {
    let grid = Grid::stretched(30, 10, 10.0, 1.0, 2.0).unwrap();
    let params = ModelParams::new(LevyTriplet::zero(), LevyTriplet::zero(), 1.0);
    let st = build_stencil(&grid, &params).unwrap();
    assert!(st.lower.iter().chain(&st.diag).chain(&st.upper).all(|&c| c == 0.0));
    assert!(st.rows.iter().all(|r| r.targets.iter().all(|t| t.1 == 0.0) && r.ruin_mass == 0.0));
    let psi: Vec<f64> = grid.u_nodes().iter().map(|u| u.sin()).collect();
    for j in 1..grid.nu() {
        assert_eq!(st.apply_local(&psi, j) + st.apply_nonlocal(&psi, j, 0.0), 0.0);
    }
}

#[test]
fn zero_model_keeps_terminal_data() {
    let grid = Grid::stretched(40, 25, 10.0, 1.0, 2.0).unwrap();
    let params = ModelParams::new(LevyTriplet::zero(), LevyTriplet::zero(), 1.0);
    let g = |u: f64| (-u).exp();
    let field = solve_backward(&grid, &params, &BoundaryData::from_fn(&grid, |_, u| g(u))).unwrap();
    for i in 0..=grid.nt() {
        for (j, &u) in grid.u_nodes().iter().enumerate() {
            assert!((field.value(i, j) - g(u)).abs() <= 1e-15);
        }
    }
}

#[test]
fn transport_error_shrinks_under_refinement() {
    let params = common::transport(-1.0, 1.0);
    let mut grid = Grid::uniform(40, 20, 2.0, 1.0).unwrap();
    let mut errors = Vec::new();
    for _ in 0..4 {
        let f = solve_ruin(&grid, &params).unwrap();
        let (du, dt) = (grid.max_du(), grid.max_dt());
        let mut acc = KahanSum::default();
        for (i, &t) in grid.t_nodes().iter().enumerate() {
            for (j, &u) in grid.u_nodes().iter().enumerate().skip(1) {
                let exact = if u < 1.0 - t { 1.0 } else { 0.0 };
                acc.add(du * dt * (f.value(i, j) - exact).abs());
            }
        }
        errors.push(acc.value());
        grid = grid.refined();
    }
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[3] < 0.5 * errors[0], "{errors:?}");
}

#[test]
fn brownian_field_matches_reflection_formula() {
    let params = common::brownian(0.3, 0.8, 1.0);
    let grid = Grid::uniform(400, 400, 12.0, 1.0).unwrap();
    let f = solve_ruin(&grid, &params).unwrap();
    // the (T, 0) corner carries a jump in the data; the sup is taken away from it
    let mut worst = 0.0f64;
    for (i, &t) in grid.t_nodes().iter().enumerate().filter(|(_, &t)| t <= 0.9) {
        for (j, &u) in grid.u_nodes().iter().enumerate().skip(1) {
            let exact = brownian_first_passage(u, 0.3, 0.8, 1.0 - t).unwrap();
            worst = worst.max((f.value(i, j) - exact).abs());
        }
    }
    assert!(worst <= 5e-3, "sup error {worst}");
}

#[test]
fn zero_model_refinement_differences_vanish() {
    let params = ModelParams::new(LevyTriplet::zero(), LevyTriplet::zero(), 1.0);
    let levels = refine_and_compare(&params, &Grid::uniform(20, 10, 5.0, 1.0).unwrap(), 2, 1.0).unwrap();
    assert!(levels.iter().all(|l| l.sup_diff == 0.0));
}

#[test]
fn brownian_order_is_at_least_first() {
    let params = common::brownian(0.0, 1.0, 1.0);
    let exact = brownian_first_passage(1.0, 0.0, 1.0, 1.0).unwrap();
    let errors: Vec<f64> = [50, 100, 200, 400]
        .iter()
        .map(|&n| {
            (solve_ruin(&Grid::uniform(n, n, 10.0, 1.0).unwrap(), &params).unwrap().interpolate(0.0, 1.0) - exact).abs()
        })
        .collect();
    let orders = observed_orders(&errors);
    assert!(orders.iter().all(|&p| p >= 0.9), "errors {errors:?} orders {orders:?}");
}

#[test]
fn reference_config_self_converges() {
    let cfg = reference_config();
    let base = Grid::stretched(100, 100, cfg.grid.u_max, cfg.model.horizon, cfg.grid.stretch).unwrap();
    let levels = refine_and_compare(&cfg.model, &base, 2, cfg.model.horizon).unwrap();
    let d: Vec<f64> = levels.iter().map(|l| l.sup_diff_initial).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn fine_oracle_reproduces_reflection_formula() {
    let params = common::brownian(0.0, 1.0, 1.0);
    let r = fine_mc(0.0, 1.0, &params, 1e-3, 100_000, 3).unwrap();
    let exact = brownian_first_passage(1.0, 0.0, 1.0, 1.0).unwrap();
    assert_eq!(r.provenance, Provenance::FineMc);
    assert!((r.value - exact).abs() <= 3.0 * r.error_bound, "{} vs {exact} (se {})", r.value, r.error_bound);
}

#[test]
fn fine_oracle_deterministic_cases() {
    let down = fine_mc(0.0, 0.5, &common::transport(-1.0, 1.0), 1e-3, 100, 1).unwrap();
    let up = fine_mc(0.0, 0.5, &common::transport(1.0, 1.0), 1e-3, 100, 1).unwrap();
    assert_eq!((down.value, down.error_bound), (1.0, 0.0));
    assert_eq!((up.value, up.error_bound), (0.0, 0.0));
}

#[test]
fn fine_oracle_agrees_with_estimator_on_classical_model() {
    let params = ModelParams::new(LevyTriplet::zero(), claims(2.0, 1.0), 5.0);
    let fine = fine_mc(0.0, 1.0, &params, 1e-3, 100_000, 11).unwrap();
    let est =
        estimate_psi(0.0, 1.0, &params, 100_000, &SimScheme::new(SchemeKind::ExactBetweenJumps, 1e-2), 12).unwrap();
    let se = fine.error_bound.hypot(est.std_error);
    assert!((fine.value - est.mean).abs() <= 3.0 * se, "fine {} vs estimate {} (se {se})", fine.value, est.mean);
}

#[test]
fn long_horizon_approaches_ultimate_ruin() {
    let ultimate = cramer_lundberg_ultimate(2.0, 1.0, 1.0, 0.5).unwrap();
    assert!((claims(2.0, 1.0).compensated_drift() - 1.0).abs() < 1e-15);
    assert!((ultimate - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
    let params = ModelParams::new(LevyTriplet::zero(), claims(2.0, 1.0), 50.0);
    let est = estimate_psi(0.0, 2.0, &params, 100_000, &SimScheme::new(SchemeKind::ExactBetweenJumps, 1.0), 5).unwrap();
    // ruin after T = 50 has probability far below 1e-3 at this loading
    let eps_t = 1e-3;
    let se = est.std_error;
    assert!(est.mean <= ultimate + 3.0 * se, "{} above {ultimate}", est.mean);
    assert!(est.mean >= ultimate - 3.0 * se - eps_t, "{} below {ultimate}", est.mean);
}

#[test]
fn schemes_agree_as_steps_shrink() {
    let params = reference_config().model;
    for dt in [1e-2, 1e-3] {
        let run = |kind| estimate_psi(0.0, 1.0, &params, 20_000, &SimScheme::new(kind, dt), 99).unwrap();
        let (e, x) = (run(SchemeKind::Euler), run(SchemeKind::ExactBetweenJumps));
        let se = e.std_error.hypot(x.std_error);
        assert!((e.mean - x.mean).abs() <= 3.0 * se, "dt {dt}: euler {} exact {} (se {se})", e.mean, x.mean);
    }
}

#[test]
fn doleans_exponential_is_a_martingale() {
    let r = LevyTriplet::brownian(0.0, 0.2);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let finals: Vec<f64> = (0..100_000)
        .map(|_| {
            let steps: Vec<_> = (0..4).map(|_| (0.25, sample_increment(&r, 0.25, &mut rng).unwrap())).collect();
            *doleans_path(&r, &steps).unwrap().last().unwrap()
        })
        .collect();
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let se = (finals.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn bumped_node_fails_verification() {
    let params = common::brownian(0.0, 1.0, 1.0);
    let grid = Grid::uniform(200, 200, 10.0, 1.0).unwrap();
    let clean = solve_ruin(&grid, &params).unwrap();
    let mut bumped = clean.clone();
    let (i, j) = (100, 20);
    bumped.values_mut()[i * (grid.nu() + 1) + j] += 0.1;
    let near: Vec<(usize, usize)> = (j - 1..=j + 1).map(|k| (i, k)).collect();
    let opts = VerifyOptions { c: 1.0, ..Default::default() };
    let before = verify_field(&clean, &params, &SampleSpec::Nodes(near.clone()), &opts).unwrap();
    let after = verify_field(&bumped, &params, &SampleSpec::Nodes(near), &opts).unwrap();
    assert_eq!(before.passed, 3);
    assert!(after.passed < 3, "{:?}", after.points);
    assert!(!after.points[1].pass);
}

#[test]
fn shifted_solution_is_a_strict_supersolution() {
    let (delta, horizon) = (0.1, 1.0);
    let grid = Grid::uniform(300, 600, 10.0, horizon).unwrap();
    let params = common::brownian(0.0, 1.0, horizon);
    let field = SolutionField::from_fn(grid, RuinedValue::Boundary, |t, u| {
        let base = if u <= 0.0 {
            1.0
        } else if t >= horizon {
            0.0
        } else {
            brownian_first_passage(u, 0.0, 1.0, horizon - t).unwrap()
        };
        base + if t > 0.0 { delta / t } else { 0.0 }
    });
    let region = ruin_core::viscosity::Region { t_min: 0.1, t_max: 0.8, u_min: 0.5, u_max: 5.0 };
    let report =
        verify_field(&field, &params, &SampleSpec::Random { n: 200, seed: 4, region }, &VerifyOptions::default())
            .unwrap();
    let bound = -delta / (horizon * horizon) + report.tol;
    assert!(report.points.iter().all(|p| p.residual <= bound), "worst {:?} bound {bound}", report.worst_super);
}

#[test]
fn frozen_model_has_no_dynkin_gap() {
    let params = ModelParams::new(LevyTriplet::zero(), LevyTriplet::zero(), 1.0);
    let grid = Grid::uniform(20, 10, 5.0, 1.0).unwrap();
    let field = SolutionField::from_fn(grid, RuinedValue::Boundary, |_, _| 0.37);
    let rep = dynkin_check(0.2, 1.0, &params, 0.1, 1000, 1, &field, &SimScheme::default(), None).unwrap();
    assert_eq!(rep.discrepancy, 0.0);
    assert_eq!(rep.std_error, 0.0);
}

#[test]
fn transport_dynkin_gap_is_interpolation_only() {
    let params = common::transport(-1.0, 1.0);
    let grid = Grid::uniform(200, 200, 4.0, 1.0).unwrap();
    let field = SolutionField::from_fn(grid, RuinedValue::Boundary, |t, u| if u < 1.0 - t { 1.0 } else { 0.0 });
    let rep = dynkin_check(0.0, 0.5, &params, 0.2, 1000, 1, &field, &SimScheme::default(), None).unwrap();
    assert!(rep.discrepancy <= 3.0 * rep.std_error + 1e-12, "{rep:?}");
}

#[test]
fn brownian_compare_matches_closed_form() {
    let mut cfg = RunConfig::new(common::brownian(0.0, 1.0, 1.0));
    cfg.simulation.dt_max = 1e-3;
    cfg.simulation.bridge = true;
    cfg.simulation.paths = 100_000;
    cfg.grid.nu = 400;
    cfg.grid.nt = 400;
    cfg.grid.u_max = 24.0;
    cfg.grid.stretch = 0.0;
    cfg.compare.u = vec![0.5, 1.0, 2.0];
    cfg.compare.tolerance = 5e-3;
    let report = run_compare(&cfg).unwrap();
    assert!(report.pass());
    for row in &report.rows {
        let exact = brownian_first_passage(row.u, 0.0, 1.0, 1.0).unwrap();
        assert!((row.psi_pide - exact).abs() <= 5e-3, "{row:?}");
        assert!((row.psi_mc - exact).abs() <= 3.0 * row.se + 5e-3, "{row:?}");
    }
}

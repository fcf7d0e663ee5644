mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ruin_core::generator::jump_generator;
use ruin_core::levy::{sample_increment, validate_triplet, LevyTriplet, ModelParams};
use ruin_core::mc::estimate_psi;
use ruin_core::numeric::PathStreams;
use ruin_core::oracles::brownian_first_passage;
use ruin_core::pide::{solve_backward, solve_ruin, BoundaryData, Grid, RuinedValue, SolutionField};
use ruin_core::reserve::{doleans_path, simulate_outcome, simulate_path, EventKind, SchemeKind, SimScheme, StopRule};
use ruin_core::viscosity::{candidate_jet, evaluate_operator_on_test, Glue};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn validation_is_pure(seed in any::<u64>(), shift in -2.0f64..0.5) {
        let mut t = common::random_triplet(&mut rng(seed), true);
        if let Some(j) = t.jumps.as_mut() {
            if let ruin_core::JumpLaw::Point { value } = &mut j.law {
                *value += shift;
            }
        }
        let a = validate_triplet(&t, true);
        let b = validate_triplet(&t, true);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn increments_are_reproducible(seed in any::<u64>(), dt in 1e-4f64..0.5) {
        let t = common::random_triplet(&mut rng(seed), false);
        let a = sample_increment(&t, dt, &mut rng(seed ^ 1)).unwrap();
        let b = sample_increment(&t, dt, &mut rng(seed ^ 1)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn doleans_paths_stay_positive(seed in any::<u64>()) {
        let mut g = rng(seed);
        let r = common::random_triplet(&mut g, true);
        let steps: Vec<_> = (0..100).map(|_| (0.01, sample_increment(&r, 0.01, &mut g).unwrap())).collect();
        let s = doleans_path(&r, &steps).unwrap();
        prop_assert!(s.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn no_business_no_ruin(seed in any::<u64>(), u in 1e-3f64..10.0, euler in any::<bool>()) {
        let params = ModelParams::new(common::random_triplet(&mut rng(seed), true), LevyTriplet::zero(), 1.0);
        let kind = if euler { SchemeKind::Euler } else { SchemeKind::ExactBetweenJumps };
        let out = simulate_outcome(0.0, u, &params, &SimScheme::new(kind, 0.02), StopRule { end: 1.0, band: None }, &mut PathStreams::new(seed, 0)).unwrap();
        prop_assert!(out.tau.is_none());
        prop_assert!(out.x_stop > 0.0);
    }

    #[test]
    fn price_driver_scales_linearly(seed in any::<u64>(), c in 0.1f64..20.0) {
        let params = ModelParams::new(common::random_triplet(&mut rng(seed), true), LevyTriplet::zero(), 1.0);
        let scheme = SimScheme::new(SchemeKind::ExactBetweenJumps, 0.05);
        let a = simulate_path(0.0, 1.0, &params, &scheme, &mut PathStreams::new(seed, 3)).unwrap();
        let b = simulate_path(0.0, c, &params, &scheme, &mut PathStreams::new(seed, 3)).unwrap();
        prop_assert_eq!(&a.times, &b.times);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((c * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn business_stream_leaves_price_alone(seed in any::<u64>(), other in any::<u64>()) {
        let params = common::random_params(&mut rng(seed), 1.0);
        let scheme = SimScheme::new(SchemeKind::ExactBetweenJumps, 0.05);
        let own = |p_seed: u64| {
            let path = simulate_path(0.0, 1e6, &params, &scheme, &mut PathStreams::with_seeds(seed, p_seed, 5, 0)).unwrap();
            path.times.iter().zip(&path.prices).zip(&path.events)
                .filter(|(_, k)| matches!(k, EventKind::Grid | EventKind::JumpR))
                .map(|((t, s), _)| (t.to_bits(), s.to_bits()))
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(own(seed), own(other));
    }

    #[test]
    fn schemes_coincide_without_investment(seed in any::<u64>()) {
        let mut g = rng(seed);
        let params = ModelParams::new(LevyTriplet::zero(), common::random_triplet(&mut g, false), 1.0);
        let run = |kind| simulate_path(0.0, 2.0, &params, &SimScheme::new(kind, 0.03), &mut PathStreams::new(seed, 1)).unwrap();
        let (e, x) = (run(SchemeKind::Euler), run(SchemeKind::ExactBetweenJumps));
        prop_assert_eq!(e.values, x.values);
        prop_assert_eq!(e.tau, x.tau);
    }

    #[test]
    fn estimates_are_probabilities(seed in any::<u64>(), u in 0.05f64..5.0) {
        let params = common::random_params(&mut rng(seed), 1.0);
        let e = estimate_psi(0.0, u, &params, 300, &SimScheme::new(SchemeKind::ExactBetweenJumps, 0.05), seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&e.mean));
        prop_assert!(e.ci95.0 <= e.mean && e.mean <= e.ci95.1);
    }

    #[test]
    fn reflection_formula_is_monotone(u in 0.01f64..5.0, du in 0.0f64..1.0, h in 0.01f64..3.0, dh in 0.0f64..1.0,
                                      a in -2.0f64..2.0, s in 0.1f64..2.0) {
        let base = brownian_first_passage(u, a, s, h).unwrap();
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(brownian_first_passage(u + du, a, s, h).unwrap() <= base + 1e-15);
        prop_assert!(brownian_first_passage(u, a, s, h + dh).unwrap() >= base - 1e-15);
    }

    // Volatility only helps ruin without drift: for a < 0 and u < |a| h ruin is near-certain as σ → 0.
    #[test]
    fn driftless_reflection_grows_with_volatility(u in 0.01f64..5.0, h in 0.01f64..3.0, s in 0.1f64..2.0, ds in 0.0f64..1.0) {
        prop_assert!(brownian_first_passage(u, 0.0, s + ds, h).unwrap() >= brownian_first_passage(u, 0.0, s, h).unwrap() - 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn solver_orders_ordered_data(seed in any::<u64>()) {
        use rand::Rng;
        let mut g = rng(seed);
        let params = common::random_params(&mut g, 1.0);
        let grid = Grid::stretched(40, 20, 15.0, 1.0, 2.0).unwrap();
        let mut lo = BoundaryData::for_payoff(&grid, &params.payoff);
        for v in lo.terminal.iter_mut().chain(lo.lower.iter_mut()).chain(lo.upper.iter_mut()) {
            *v = g.random::<f64>();
        }
        let mut hi = lo.clone();
        for v in hi.terminal.iter_mut().chain(hi.lower.iter_mut()).chain(hi.upper.iter_mut()) {
            *v += g.random::<f64>() * (1.0 - *v);
        }
        let a = solve_backward(&grid, &params, &lo).unwrap();
        let b = solve_backward(&grid, &params, &hi).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(*x <= *y + 1e-12);
        }
    }

    #[test]
    fn solver_preserves_constants(seed in any::<u64>(), c in 0.0f64..=1.0) {
        let params = common::random_params(&mut rng(seed), 1.0);
        let grid = Grid::stretched(40, 20, 15.0, 1.0, 2.0).unwrap();
        let f = solve_backward(&grid, &params, &BoundaryData::from_fn(&grid, |_, _| c)).unwrap();
        prop_assert!(f.values().iter().all(|v| (v - c).abs() <= 1e-12));
    }

    #[test]
    fn ruin_field_is_bounded_and_decreasing(seed in any::<u64>()) {
        let params = common::random_params(&mut rng(seed), 1.0);
        let grid = Grid::stretched(50, 25, 15.0, 1.0, 2.0).unwrap();
        let f = solve_ruin(&grid, &params).unwrap();
        prop_assert!(f.values().iter().all(|v| (0.0..=1.0).contains(v)));
        for i in 0..=grid.nt() {
            prop_assert!(f.row(i).windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn residual_is_linear_in_field(seed in any::<u64>(), alpha in -2.0f64..2.0) {
        let params = common::random_params(&mut rng(seed), 1.0);
        let grid = Grid::uniform(40, 20, 10.0, 1.0).unwrap();
        let f = SolutionField::from_fn(grid.clone(), RuinedValue::Boundary, |t, u| (-u).exp() * (1.0 + 0.1 * t));
        let g = SolutionField::from_fn(grid.clone(), RuinedValue::Boundary, |t, u| 0.5 / (1.0 + u * u) + 0.05 * t);
        let h = SolutionField::from_fn(grid, RuinedValue::Boundary, |t, u| {
            (-u).exp() * (1.0 + 0.1 * t) + alpha * (0.5 / (1.0 + u * u) + 0.05 * t)
        });
        let (jf, jg, jh) = (candidate_jet(&f, 7, 9).unwrap(), candidate_jet(&g, 7, 9).unwrap(), candidate_jet(&h, 7, 9).unwrap());
        let glue = Some(Glue::around(&f, &jf));
        let lhs = evaluate_operator_on_test(&h, &jh, &params, glue);
        let rhs = evaluate_operator_on_test(&f, &jf, &params, glue) + alpha * evaluate_operator_on_test(&g, &jg, &params, glue);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn generator_kills_constants(seed in any::<u64>(), u in 0.01f64..20.0, c in -3.0f64..3.0) {
        let params = common::random_params(&mut rng(seed), 1.0);
        prop_assert!(jump_generator(&params, u, |_| c, 0.0).abs() <= 1e-12 * (1.0 + c.abs()));
    }
}

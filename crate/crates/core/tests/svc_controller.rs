mod common;

use gridsvc_core::control::{run_control_loop, solve_inf_norm, ControlBounds, ControllerConfig};
use gridsvc_core::grid::{build_synthetic_network, compute_sensitivities, SyntheticSpec};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (DVector<f64>, DMatrix<f64>, ControlBounds)> {
    (1usize..=5).prop_flat_map(|rows| {
        (
            prop::collection::vec(-0.5f64..0.5, rows),
            prop::collection::vec(-1.0f64..1.0, rows * 2),
            prop::collection::vec((-0.3f64..0.0, 0.0f64..0.3), 2),
        )
            .prop_map(move |(t, j, b)| {
                let lower = DVector::from_iterator(2, b.iter().map(|p| p.0));
                let upper = DVector::from_iterator(2, b.iter().map(|p| p.1));
                (
                    DVector::from_vec(t),
                    DMatrix::from_vec(rows, 2, j),
                    ControlBounds::new(lower, upper, 1).unwrap(),
                )
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chebyshev_fit_matches_grid_search((target, j2, bounds) in instance()) {
        let fit = solve_inf_norm(&target, &j2, &bounds).unwrap();
        let grid = common::grid_search_inf(&target, &j2, &bounds, 1e-3);
        prop_assert!(fit.objective <= grid + 1e-9, "{} > grid {}", fit.objective, grid);
        prop_assert!(grid - fit.objective <= 2e-3);
    }

    #[test]
    fn chebyshev_fit_stays_in_box((target, j2, bounds) in instance()) {
        let fit = solve_inf_norm(&target, &j2, &bounds).unwrap();
        prop_assert!(bounds.contains(fit.input.values()));
        let recomputed = (&target - &j2 * fit.input.values()).amax();
        prop_assert!((recomputed - fit.objective).abs() < 1e-12);
    }

    #[test]
    fn converged_loops_took_a_small_last_step(
        seed in any::<u64>(),
        dv in prop::collection::vec(-0.03f64..0.03, 4),
        limit in 0.01f64..0.2,
    ) {
        let net = build_synthetic_network(&SyntheticSpec::new(1, 2, 2, 4, seed));
        let sens = compute_sensitivities(&net, &[0, 1, 2, 3]).unwrap();
        let bounds = ControlBounds::uniform(2, 2, limit, limit);
        let reference = DVector::from_element(4, 1.0);
        let v = &reference + DVector::from_vec(dv);
        let cfg = ControllerConfig::default();
        let r = run_control_loop(&sens, &v, &reference, &bounds, &cfg).unwrap();
        prop_assert!(r.iterations <= cfg.max_iterations);
        if r.converged {
            prop_assert!(r.last_step < cfg.epsilon);
        }
        prop_assert!(bounds.contains(r.u_star.values()));
    }
}

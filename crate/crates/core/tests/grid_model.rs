mod common;

use std::path::Path;

use gridsvc_core::grid::{
    apply_load_event, build_synthetic_network, compute_sensitivities, load_network, three_area_27bus,
    PlantState, SyntheticSpec,
};
use gridsvc_core::harness::{load_scenario, NetworkSource, Scenario};
use nalgebra::DVector;
use proptest::prelude::*;

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

fn spec() -> impl Strategy<Value = SyntheticSpec> {
    (1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3, any::<u64>())
        .prop_map(|(a, g, c, l, seed)| SyntheticSpec::new(a, g, c, l, seed))
}

proptest! {
    #[test]
    fn reduced_model_matches_full_solve(
        spec in spec(),
        dq in prop::collection::vec(-0.5f64..0.5, 9),
        u in prop::collection::vec(-0.1f64..0.1, 18),
    ) {
        let net = build_synthetic_network(&spec);
        let sens = compute_sensitivities(&net, &[0]).unwrap();
        let dq = DVector::from_iterator(net.n_load(), dq.into_iter().take(net.n_load()));
        let u = DVector::from_iterator(sens.n_controls(), u.into_iter().take(sens.n_controls()));
        let reduced = sens.j1() * &dq - sens.j2() * &u;
        let full = common::full_system_dv(&net, &dq, &u);
        prop_assert!((reduced - full).amax() < 1e-9);
    }

    #[test]
    fn load_events_compose(a in 0.2f64..3.0, b in 0.2f64..3.0, bus in 0usize..9) {
        let s0 = PlantState::nominal(&three_area_27bus());
        let twice = apply_load_event(&apply_load_event(&s0, &[bus], a).unwrap(), &[bus], b).unwrap();
        let once = apply_load_event(&s0, &[bus], a * b).unwrap();
        prop_assert!((twice.q_load - once.q_load).amax() <= 1e-12 * s0.q_load.amax() * a * b);
    }

    #[test]
    fn synthetic_networks_are_reproducible(spec in spec()) {
        prop_assert_eq!(build_synthetic_network(&spec), build_synthetic_network(&spec));
    }
}

#[test]
fn bundled_network_matches_preset() {
    let net = load_network(&fixtures().join("three_area_27bus.net")).unwrap();
    assert_eq!(net, three_area_27bus());
}

#[test]
fn bundled_scenarios_match_presets() {
    let net = NetworkSource::Fixture(fixtures().join("three_area_27bus.net"));
    for (file, preset) in [
        ("load_steps.scn", Scenario::load_steps()),
        ("noise40.scn", Scenario::noise40(1)),
        ("fault175.scn", Scenario::fault175(1)),
    ] {
        let loaded = load_scenario(&fixtures().join(file)).unwrap();
        assert_eq!(loaded, Scenario { network: net.clone(), ..preset }, "{file}");
    }
}

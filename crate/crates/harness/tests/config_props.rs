use isac_core::scalar::dbm_to_watts;
use isac_harness::{parse_config_str, run_experiment, Experiment, ExperimentSpec, HarnessConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn dbm_strings_convert_at_parse_time(dbm in -90.0f64..40.0) {
        let c = parse_config_str(&format!(r#"{{"p_t": "{dbm} dBm"}}"#)).unwrap();
        prop_assert!((c.scenario.p_t - dbm_to_watts(dbm)).abs() <= 1e-12 * dbm_to_watts(dbm));
    }

    #[test]
    fn unknown_keys_are_named(key in "[a-z]{3,10}") {
        let known = ["k", "n_t", "n_r", "l", "p_t", "bandwidth", "f0", "lambda", "spacing", "delta_t", "m",
            "epsilon", "rho", "rician_alpha", "beta", "sigma2", "sigma_c2", "sigma_z2", "v", "r_th", "omega_th",
            "pulse", "seed", "min_distance", "layout"];
        prop_assume!(!known.contains(&key.as_str()));
        let e = parse_config_str(&format!(r#"{{"{key}": 1}}"#)).unwrap_err();
        prop_assert_eq!(e.key(), Some(key.as_str()));
    }

    #[test]
    fn bandwidth_fixes_the_sample_period(b in 1e6f64..1e9) {
        let c = parse_config_str(&format!(r#"{{"bandwidth": {b}}}"#)).unwrap();
        prop_assert!((c.scenario.delta_t * 2.0 * b - 1.0).abs() < 1e-12);
        let bad = parse_config_str(&format!(r#"{{"bandwidth": {b}, "delta_t": {}}}"#, 1.1 / (2.0 * b))).unwrap_err();
        prop_assert_eq!(bad.key(), Some("delta_t"));
    }
}

#[test]
fn sweeps_are_order_independent() {
    let mut cfg = HarnessConfig::default();
    cfg.scenario = cfg.scenario.with_receivers(6);
    let mut a = ExperimentSpec::new(Experiment::SelectionCompare, 2, 3);
    a.sweep = "k=4,6".parse().unwrap();
    let mut b = a.clone();
    b.sweep = "k=6,4".parse().unwrap();
    let ra = run_experiment(&a, &cfg).unwrap();
    let rb = run_experiment(&b, &cfg).unwrap();
    let half = ra.len() / 2;
    assert_eq!(ra[..half], rb[half..]);
    assert_eq!(ra[half..], rb[..half]);
    assert_eq!(ra, run_experiment(&a, &cfg).unwrap());
}

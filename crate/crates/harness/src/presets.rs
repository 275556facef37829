//! Scenario files compiled into the binary.

use crate::config::{parse_config_str, ConfigError, HarnessConfig};

/// `(name, JSON text)` of every shipped preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("baseline", include_str!("../presets/baseline.json")),
    ("quick", include_str!("../presets/quick.json")),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn preset(name: &str) -> Result<HarnessConfig, ConfigError> {
    let text = preset_text(name).ok_or_else(|| ConfigError::invalid("config", format!("unknown preset `{name}`")))?;
    parse_config_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use isac_core::ScenarioConfig64;

    #[test]
    fn baseline_matches_preset() {
        let c = preset("baseline").unwrap();
        let want = ScenarioConfig64::preset();
        let got = &c.scenario;
        assert_eq!((got.k, got.n_t, got.n_r, got.l, got.m), (want.k, want.n_t, want.n_r, want.l, want.m));
        for (a, b) in [
            (got.p_t, 1.0),
            (got.sigma2, 1e-9),
            (got.sigma_c2, 1e-9),
            (got.sigma_z2, 1e-9),
            (got.bandwidth, 1e8),
            (got.delta_t, 5e-9),
            (got.epsilon, 2.7),
            (got.rho, 0.5),
            (got.lambda, want.lambda),
            (got.spacing, want.spacing),
        ] {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        assert_eq!(got.rician_alpha, want.rician_alpha);
        assert_eq!(got.beta, want.beta);
        assert_eq!(got.omega_th, f64::INFINITY);
        assert_eq!(c.layout, crate::LayoutSpec::preset());
    }

    #[test]
    fn all_presets_parse() {
        for (name, _) in PRESETS {
            preset(name).unwrap();
        }
        assert!(preset("nope").is_err());
    }
}

use super::ExperimentConfig;
use crate::error::{Error, Result};

/// Built-in experiment configurations, by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig4-sphere", include_str!("../../presets/fig4-sphere.toml")),
    ("fig3-assumption", include_str!("../../presets/fig3-assumption.toml")),
    ("corollary1-regret", include_str!("../../presets/corollary1-regret.toml")),
    ("corollary2-rate", include_str!("../../presets/corollary2-rate.toml")),
    ("corollary2-rosenbrock", include_str!("../../presets/corollary2-rosenbrock.toml")),
    ("prop1-escape", include_str!("../../presets/prop1-escape.toml")),
    ("fig2-stepsize-trace", include_str!("../../presets/fig2-stepsize-trace.toml")),
    ("sphere", include_str!("../../presets/sphere.toml")),
    ("mlp-slice", include_str!("../../presets/mlp-slice.toml")),
];

/// Parses a preset. Short aliases such as `fig4` resolve to the unique
/// preset whose name starts with `<alias>-`.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let exact = PRESETS.iter().find(|(n, _)| *n == name);
    let hit = exact.or_else(|| {
        let mut m = PRESETS.iter().filter(|(n, _)| n.starts_with(&format!("{name}-")));
        match (m.next(), m.next()) {
            (Some(p), None) => Some(p),
            _ => None,
        }
    });
    match hit {
        Some((_, text)) => ExperimentConfig::from_toml(text),
        None => Err(Error::Config(format!(
            "unknown preset {name:?}; available: {}",
            PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse() {
        for (name, _) in PRESETS {
            preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn aliases() {
        assert_eq!(preset("fig4").unwrap(), preset("fig4-sphere").unwrap());
        assert!(preset("corollary2").is_err());
        assert!(preset("nope").is_err());
    }
}

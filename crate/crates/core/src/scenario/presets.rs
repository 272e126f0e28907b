//! Bundled scan presets, one per reproduced campaign.

use crate::error::{Error, Result};

use super::config::{parse_config_str, ScenarioConfig};

/// (name, one-line description, embedded TOML).
const PRESETS: [(&str, &str, &str); 5] = [
    (
        "fig2_carrier_scan",
        "SNR vs carrier frequency, 16-20 GHz, five source powers spanning 26 dB",
        include_str!("presets/fig2_carrier_scan.toml"),
    ),
    (
        "fig3a_distance",
        "resonant SNR vs link distance at fixed transmitted powers",
        include_str!("presets/fig3a_distance.toml"),
    ),
    (
        "fig3de_power",
        "resonant SNR vs transmitted probe power at 1 m and 20 m",
        include_str!("presets/fig3de_power.toml"),
    ),
    (
        "fig3b_beams",
        "beam diameters, Rabi frequencies and link efficiency vs distance",
        include_str!("presets/fig3b_beams.toml"),
    ),
    (
        "supp_map",
        "2-D SNR map over carrier frequency x coupling detuning",
        include_str!("presets/supp_map.toml"),
    ),
];

/// Names of all bundled presets, in listing order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _, _)| *name).collect()
}

/// (name, description) pairs for `presets list`.
pub fn preset_descriptions() -> Vec<(&'static str, &'static str)> {
    PRESETS.iter().map(|(name, desc, _)| (*name, *desc)).collect()
}

/// The embedded TOML text of a preset, if the name is known.
pub fn preset_toml(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _, _)| *n == name).map(|(_, _, text)| *text)
}

/// Load and resolve a bundled preset by name.
pub fn load_preset(name: &str) -> Result<ScenarioConfig> {
    let text = preset_toml(name).ok_or_else(|| {
        Error::config(
            "preset",
            format!("unknown preset '{name}'; available: {}", preset_names().join(", ")),
        )
    })?;
    parse_config_str(text, "toml", name)
}

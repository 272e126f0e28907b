//! Scenario layer: declarative scan configuration, bundled presets, the scan
//! runner, and structured result emission.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;
pub mod units;

pub use config::{
    linspace, load_config, logspace, parse_config_str, RawConfig, ScanSpec, ScenarioConfig,
};
pub use output::{csv_string, write_outputs, OutputFormat, Sidecar, WrittenFiles, VERSION};
pub use presets::{load_preset, preset_descriptions, preset_names, preset_toml};
pub use runner::{run_scan, ScanAbort, ScanOutcome};

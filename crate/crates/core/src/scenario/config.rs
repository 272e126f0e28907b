//! Declarative scan configuration.
//!
//! A configuration file is a nested key-value document (TOML on disk; the
//! JSON sidecar echo reloads through the same path). Every dimensioned value
//! carries an explicit unit suffix (`"480nm"`, `"10mW"`, `"19.84GHz"`); bare
//! numbers are accepted only on dimensionless fields. All sections except
//! `[scan]` are optional and resolve to the built-in ⁸⁷Rb / bench defaults.

use serde::{Deserialize, Serialize};

use std::f64::consts::TAU;

use crate::atomic::{LevelScheme, ThermalEnsemble, RYDBERG_DEPHASING_DEFAULT};
use crate::constants::RB87_FRACTION;
use crate::error::{Error, Result};
use crate::link::{
    LinkGeometry, OpticalPair, COUPLING_WAIST_DEFAULT, PROBE_WAIST_DEFAULT,
};
use crate::optics::GaussianBeam;
use crate::transduction::{
    DetectionChain, RfScene, ENVELOPE_SAMPLES_DEFAULT, FIELD_CALIBRATION_DEFAULT,
    INCLUSION_WINDOW_DEFAULT, MODULATION_DEPTH_DEFAULT, MODULATION_FREQUENCY_DEFAULT,
};

use super::units::*;

/// Default transmitted probe power when the `[probe]` section is omitted, W.
pub const PROBE_POWER_DEFAULT: f64 = 50e-6;
/// Default transmitted coupling power, W.
pub const COUPLING_POWER_DEFAULT: f64 = 10e-3;
/// Default vapor temperature, K.
pub const TEMPERATURE_DEFAULT: f64 = 293.15;
/// Default velocity-grid order for the thermal ensemble.
pub const VELOCITY_ORDER_DEFAULT: usize = 9;
/// Default source power when `[rf]` is omitted, dBm (source-referred).
pub const RF_POWER_DEFAULT_DBM: f64 = -12.0;

// ---------------------------------------------------------------------------
// Raw (on-disk) layer: unit strings, everything optional except [scan].
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<RawAtoms>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<RawBeam>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<RawBeam>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<RawLink>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rf: Option<RawRf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<RawDetection>,
    pub scan: Option<RawScan>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAtoms {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rb87_fraction: Option<f64>,
    /// Rydberg dephasing as an ordinary frequency (the model uses 2π× this).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rydberg_dephasing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub velocity_order: Option<u32>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBeam {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waist_radius: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLink {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_length: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_bore_diameter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reflector_aperture: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector_aperture_radius: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface_transmittance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reflector_reflectance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contamination: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam_separation: Option<String>,
    /// Anti-reflection-coated clean-cell scenario. Mutually exclusive with
    /// the three explicit optics fractions above.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coated: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRf {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier: Option<String>,
    /// Source-referred carrier power, dBm string (e.g. `"-12dBm"`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<String>,
    /// Field at the cell per square-root source milliwatt, V·m⁻¹·mW^(−1/2).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_calibration_v_per_m_sqrt_mw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulation_frequency: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulation_depth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inclusion_window: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_samples: Option<u32>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDetection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub responsivity: Option<String>,
    pub rbw: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dark_power: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shot_excess: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScan {
    /// One of `carrier`, `distance`, `probe-power`, `coupling-detuning`,
    /// `map`, `beams`.
    pub r#type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<u32>,
    /// `linear` (default) or `log` (probe-power scans).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<String>,
    /// Carrier scans: one result-column group per listed source power.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<String>>,
    /// Probe-power scans: one result-column group per listed link distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<String>>,
    // 2-D map axes (type = "map"): carrier × coupling detuning.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_stop: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_points: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_stop: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_points: Option<u32>,
}

// ---------------------------------------------------------------------------
// Resolved layer: SI floats, defaults applied, validated.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct AtomsConfig {
    pub temperature: f64,
    pub rb87_fraction: f64,
    /// Rydberg dephasing as an ordinary frequency, Hz.
    pub rydberg_dephasing_hz: f64,
    pub velocity_order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamConfig {
    pub wavelength: f64,
    pub power: f64,
    pub waist_radius: f64,
    /// Detuning as an ordinary frequency, Hz (signed).
    pub detuning_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub distance: f64,
    pub cell_length: f64,
    pub cell_bore_diameter: f64,
    pub reflector_aperture: f64,
    pub detector_aperture_radius: f64,
    pub surface_transmittance: f64,
    pub reflector_reflectance: f64,
    pub contamination: f64,
    pub beam_separation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfConfig {
    pub carrier_hz: f64,
    pub power_dbm: f64,
    pub field_calibration: f64,
    pub modulation_frequency_hz: f64,
    pub modulation_depth: f64,
    pub inclusion_window_hz: f64,
    pub envelope_samples: usize,
}

/// The scan axis, fully resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum ScanSpec {
    /// SNR vs carrier frequency; one column group per source power.
    Carrier { start_hz: f64, stop_hz: f64, points: usize, powers_dbm: Vec<f64> },
    /// SNR vs link distance at fixed transmitted powers.
    Distance { start_m: f64, stop_m: f64, points: usize },
    /// SNR vs transmitted probe power; one column group per listed distance.
    ProbePower { start_w: f64, stop_w: f64, points: usize, log_spaced: bool, distances_m: Vec<f64> },
    /// SNR and transmission vs coupling-laser detuning.
    CouplingDetuning { start_hz: f64, stop_hz: f64, points: usize },
    /// 2-D SNR map: carrier frequency (rows) × coupling detuning (columns).
    Map {
        carrier_start_hz: f64,
        carrier_stop_hz: f64,
        carrier_points: usize,
        detuning_start_hz: f64,
        detuning_stop_hz: f64,
        detuning_points: usize,
    },
    /// Link-budget diagnostics vs distance (no atomic solves).
    Beams { start_m: f64, stop_m: f64, points: usize },
}

/// A complete, validated scan description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub atoms: AtomsConfig,
    pub probe: BeamConfig,
    pub coupling: BeamConfig,
    pub link: LinkConfig,
    pub rf: RfConfig,
    pub detection: DetectionChain,
    pub scan: ScanSpec,
}

/// Evenly spaced axis with exact endpoints.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    let mut axis: Vec<f64> = (0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect();
    axis[0] = start;
    axis[n - 1] = stop;
    axis
}

/// Logarithmically spaced axis with exact endpoints (start, stop > 0).
pub fn logspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    let mut axis: Vec<f64> = linspace(start.log10(), stop.log10(), points)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect();
    axis[0] = start;
    let n = axis.len();
    axis[n - 1] = stop;
    axis
}

impl ScanSpec {
    pub fn type_name(&self) -> &'static str {
        match self {
            ScanSpec::Carrier { .. } => "carrier",
            ScanSpec::Distance { .. } => "distance",
            ScanSpec::ProbePower { .. } => "probe-power",
            ScanSpec::CouplingDetuning { .. } => "coupling-detuning",
            ScanSpec::Map { .. } => "map",
            ScanSpec::Beams { .. } => "beams",
        }
    }

    /// Number of rows the scan will emit.
    pub fn row_count(&self) -> usize {
        match *self {
            ScanSpec::Carrier { points, .. }
            | ScanSpec::Distance { points, .. }
            | ScanSpec::ProbePower { points, .. }
            | ScanSpec::CouplingDetuning { points, .. }
            | ScanSpec::Beams { points, .. } => points,
            ScanSpec::Map { carrier_points, .. } => carrier_points,
        }
    }

    /// The primary (row) axis values.
    pub fn primary_axis(&self) -> Vec<f64> {
        match *self {
            ScanSpec::Carrier { start_hz, stop_hz, points, .. } => linspace(start_hz, stop_hz, points),
            ScanSpec::Distance { start_m, stop_m, points } => linspace(start_m, stop_m, points),
            ScanSpec::ProbePower { start_w, stop_w, points, log_spaced, .. } => {
                if log_spaced {
                    logspace(start_w, stop_w, points)
                } else {
                    linspace(start_w, stop_w, points)
                }
            }
            ScanSpec::CouplingDetuning { start_hz, stop_hz, points } => {
                linspace(start_hz, stop_hz, points)
            }
            ScanSpec::Map { carrier_start_hz, carrier_stop_hz, carrier_points, .. } => {
                linspace(carrier_start_hz, carrier_stop_hz, carrier_points)
            }
            ScanSpec::Beams { start_m, stop_m, points } => linspace(start_m, stop_m, points),
        }
    }

    /// Override the primary point count (CLI `--points`).
    pub fn set_primary_points(&mut self, n: usize) {
        match self {
            ScanSpec::Carrier { points, .. }
            | ScanSpec::Distance { points, .. }
            | ScanSpec::ProbePower { points, .. }
            | ScanSpec::CouplingDetuning { points, .. }
            | ScanSpec::Beams { points, .. } => *points = n,
            ScanSpec::Map { carrier_points, .. } => *carrier_points = n,
        }
    }
}

fn opt_parse<F>(parser: F, field: &str, raw: &Option<String>, default: f64) -> Result<f64>
where
    F: Fn(&str, &str) -> Result<f64>,
{
    match raw {
        Some(text) => parser(field, text),
        None => Ok(default),
    }
}

fn required<'a>(field: &str, value: &'a Option<String>) -> Result<&'a str> {
    value.as_deref().ok_or_else(|| Error::config(field, "required field is missing"))
}

fn resolve_points(field: &str, raw: Option<u32>, default: usize) -> Result<usize> {
    let n = raw.map(|v| v as usize).unwrap_or(default);
    if n < 2 {
        return Err(Error::config(field, "a scan axis needs at least 2 points"));
    }
    Ok(n)
}

impl RawConfig {
    /// Apply defaults, parse all unit strings, cross-validate, and return the
    /// runnable configuration. `fallback_name` names the scan when the file
    /// has no `name` key (CLI uses the preset name or the file stem).
    pub fn resolve(&self, fallback_name: &str) -> Result<ScenarioConfig> {
        let atoms = self.resolve_atoms()?;
        let probe = self.resolve_beam(
            "probe",
            &self.probe,
            780e-9,
            PROBE_POWER_DEFAULT,
            PROBE_WAIST_DEFAULT,
        )?;
        let coupling = self.resolve_beam(
            "coupling",
            &self.coupling,
            480e-9,
            COUPLING_POWER_DEFAULT,
            COUPLING_WAIST_DEFAULT,
        )?;
        let link = self.resolve_link()?;
        let rf = self.resolve_rf()?;
        let detection = self.resolve_detection()?;
        let scan = self.resolve_scan(&link)?;

        let config = ScenarioConfig {
            name: self.name.clone().unwrap_or_else(|| fallback_name.to_string()),
            atoms,
            probe,
            coupling,
            link,
            rf,
            detection,
            scan,
        };
        config.validate()?;
        Ok(config)
    }

    fn resolve_atoms(&self) -> Result<AtomsConfig> {
        let raw = self.atoms.clone().unwrap_or_default();
        Ok(AtomsConfig {
            temperature: opt_parse(
                parse_temperature,
                "atoms.temperature",
                &raw.temperature,
                TEMPERATURE_DEFAULT,
            )?,
            rb87_fraction: raw.rb87_fraction.unwrap_or(RB87_FRACTION),
            rydberg_dephasing_hz: opt_parse(
                parse_frequency,
                "atoms.rydberg_dephasing",
                &raw.rydberg_dephasing,
                RYDBERG_DEPHASING_DEFAULT / TAU,
            )?,
            velocity_order: raw.velocity_order.map(|v| v as usize).unwrap_or(VELOCITY_ORDER_DEFAULT),
        })
    }

    fn resolve_beam(
        &self,
        section: &str,
        raw: &Option<RawBeam>,
        wavelength_default: f64,
        power_default: f64,
        waist_default: f64,
    ) -> Result<BeamConfig> {
        let raw = raw.clone().unwrap_or_default();
        let field = |name: &str| format!("{section}.{name}");
        Ok(BeamConfig {
            wavelength: opt_parse(parse_length, &field("wavelength"), &raw.wavelength, wavelength_default)?,
            power: opt_parse(parse_power, &field("power"), &raw.power, power_default)?,
            waist_radius: opt_parse(parse_length, &field("waist_radius"), &raw.waist_radius, waist_default)?,
            detuning_hz: opt_parse(parse_frequency, &field("detuning"), &raw.detuning, 0.0)?,
        })
    }

    fn resolve_link(&self) -> Result<LinkConfig> {
        let raw = self.link.clone().unwrap_or_default();
        let blank = LinkGeometry::at_distance(1.0);
        let coated = raw.coated.unwrap_or(false);
        if coated
            && (raw.surface_transmittance.is_some()
                || raw.reflector_reflectance.is_some()
                || raw.contamination.is_some())
        {
            return Err(Error::config(
                "link.coated",
                "coated = true conflicts with explicit surface_transmittance / \
                 reflector_reflectance / contamination values; set one or the other",
            ));
        }
        let template = if coated { blank.clone().coated() } else { blank.clone() };
        Ok(LinkConfig {
            distance: opt_parse(parse_length, "link.distance", &raw.distance, blank.distance)?,
            cell_length: opt_parse(parse_length, "link.cell_length", &raw.cell_length, blank.cell_length)?,
            cell_bore_diameter: opt_parse(
                parse_length,
                "link.cell_bore_diameter",
                &raw.cell_bore_diameter,
                blank.cell_bore_diameter,
            )?,
            reflector_aperture: opt_parse(
                parse_length,
                "link.reflector_aperture",
                &raw.reflector_aperture,
                blank.reflector_aperture,
            )?,
            detector_aperture_radius: opt_parse(
                parse_length,
                "link.detector_aperture_radius",
                &raw.detector_aperture_radius,
                blank.detector_aperture_radius,
            )?,
            surface_transmittance: raw.surface_transmittance.unwrap_or(template.surface_transmittance),
            reflector_reflectance: raw.reflector_reflectance.unwrap_or(template.reflector_reflectance),
            contamination: raw.contamination.unwrap_or(template.contamination),
            beam_separation: opt_parse(
                parse_length,
                "link.beam_separation",
                &raw.beam_separation,
                blank.beam_separation,
            )?,
        })
    }

    fn resolve_rf(&self) -> Result<RfConfig> {
        let raw = self.rf.clone().unwrap_or_default();
        Ok(RfConfig {
            carrier_hz: opt_parse(parse_frequency, "rf.carrier", &raw.carrier, crate::atomic::RF_FREQUENCY_50P)?,
            power_dbm: opt_parse(parse_dbm, "rf.power", &raw.power, RF_POWER_DEFAULT_DBM)?,
            field_calibration: raw
                .field_calibration_v_per_m_sqrt_mw
                .unwrap_or(FIELD_CALIBRATION_DEFAULT),
            modulation_frequency_hz: opt_parse(
                parse_frequency,
                "rf.modulation_frequency",
                &raw.modulation_frequency,
                MODULATION_FREQUENCY_DEFAULT,
            )?,
            modulation_depth: raw.modulation_depth.unwrap_or(MODULATION_DEPTH_DEFAULT),
            inclusion_window_hz: opt_parse(
                parse_frequency,
                "rf.inclusion_window",
                &raw.inclusion_window,
                INCLUSION_WINDOW_DEFAULT,
            )?,
            envelope_samples: raw
                .envelope_samples
                .map(|v| v as usize)
                .unwrap_or(ENVELOPE_SAMPLES_DEFAULT),
        })
    }

    fn resolve_detection(&self) -> Result<DetectionChain> {
        let raw = self.detection.clone().unwrap_or_default();
        let defaults = DetectionChain::default();
        Ok(DetectionChain {
            responsivity: opt_parse(
                parse_responsivity,
                "detection.responsivity",
                &raw.responsivity,
                defaults.responsivity,
            )?,
            rbw: opt_parse(parse_frequency, "detection.rbw", &raw.rbw, defaults.rbw)?,
            dark_power: opt_parse(parse_power, "detection.dark_power", &raw.dark_power, defaults.dark_power)?,
            shot_excess: raw.shot_excess.unwrap_or(defaults.shot_excess),
        })
    }

    fn resolve_scan(&self, link: &LinkConfig) -> Result<ScanSpec> {
        let raw = self
            .scan
            .clone()
            .ok_or_else(|| Error::config("scan", "the [scan] section is required"))?;
        let scan_type = required("scan.type", &raw.r#type)?;

        let unexpected = |field: &str, present: bool| -> Result<()> {
            if present {
                return Err(Error::config(
                    format!("scan.{field}"),
                    format!("not applicable to scan type '{scan_type}'"),
                ));
            }
            Ok(())
        };
        let map_only_absent = |raw: &RawScan| -> Result<()> {
            unexpected("carrier_start", raw.carrier_start.is_some())?;
            unexpected("carrier_stop", raw.carrier_stop.is_some())?;
            unexpected("carrier_points", raw.carrier_points.is_some())?;
            unexpected("detuning_start", raw.detuning_start.is_some())?;
            unexpected("detuning_stop", raw.detuning_stop.is_some())?;
            unexpected("detuning_points", raw.detuning_points.is_some())?;
            Ok(())
        };

        let spacing_is_log = match raw.spacing.as_deref() {
            None | Some("linear") => false,
            Some("log") => true,
            Some(other) => {
                return Err(Error::config(
                    "scan.spacing",
                    format!("unknown spacing '{other}'; expected 'linear' or 'log'"),
                ))
            }
        };
        if spacing_is_log && scan_type != "probe-power" {
            return Err(Error::config(
                "scan.spacing",
                "log spacing is only supported for probe-power scans",
            ));
        }

        let spec = match scan_type {
            "carrier" => {
                map_only_absent(&raw)?;
                unexpected("distances", raw.distances.is_some())?;
                let start_hz = parse_frequency("scan.start", required("scan.start", &raw.start)?)?;
                let stop_hz = parse_frequency("scan.stop", required("scan.stop", &raw.stop)?)?;
                let points = resolve_points("scan.points", raw.points, 101)?;
                let powers_dbm = match &raw.powers {
                    Some(list) if list.is_empty() => {
                        return Err(Error::config("scan.powers", "power list must not be empty"))
                    }
                    Some(list) => list
                        .iter()
                        .map(|p| parse_dbm("scan.powers", p))
                        .collect::<Result<Vec<f64>>>()?,
                    None => vec![],
                };
                ScanSpec::Carrier { start_hz, stop_hz, points, powers_dbm }
            }
            "distance" => {
                map_only_absent(&raw)?;
                unexpected("powers", raw.powers.is_some())?;
                unexpected("distances", raw.distances.is_some())?;
                ScanSpec::Distance {
                    start_m: parse_length("scan.start", required("scan.start", &raw.start)?)?,
                    stop_m: parse_length("scan.stop", required("scan.stop", &raw.stop)?)?,
                    points: resolve_points("scan.points", raw.points, 61)?,
                }
            }
            "probe-power" => {
                map_only_absent(&raw)?;
                unexpected("powers", raw.powers.is_some())?;
                let start_w = parse_power("scan.start", required("scan.start", &raw.start)?)?;
                let stop_w = parse_power("scan.stop", required("scan.stop", &raw.stop)?)?;
                if spacing_is_log && (start_w <= 0.0 || stop_w <= 0.0) {
                    return Err(Error::config("scan.spacing", "log spacing needs positive endpoints"));
                }
                let distances_m = match &raw.distances {
                    Some(list) if list.is_empty() => {
                        return Err(Error::config("scan.distances", "distance list must not be empty"))
                    }
                    Some(list) => list
                        .iter()
                        .map(|d| parse_length("scan.distances", d))
                        .collect::<Result<Vec<f64>>>()?,
                    None => vec![link.distance],
                };
                ScanSpec::ProbePower {
                    start_w,
                    stop_w,
                    points: resolve_points("scan.points", raw.points, 41)?,
                    log_spaced: spacing_is_log,
                    distances_m,
                }
            }
            "coupling-detuning" => {
                map_only_absent(&raw)?;
                unexpected("powers", raw.powers.is_some())?;
                unexpected("distances", raw.distances.is_some())?;
                ScanSpec::CouplingDetuning {
                    start_hz: parse_frequency("scan.start", required("scan.start", &raw.start)?)?,
                    stop_hz: parse_frequency("scan.stop", required("scan.stop", &raw.stop)?)?,
                    points: resolve_points("scan.points", raw.points, 81)?,
                }
            }
            "map" => {
                unexpected("start", raw.start.is_some())?;
                unexpected("stop", raw.stop.is_some())?;
                unexpected("points", raw.points.is_some())?;
                unexpected("powers", raw.powers.is_some())?;
                unexpected("distances", raw.distances.is_some())?;
                ScanSpec::Map {
                    carrier_start_hz: parse_frequency(
                        "scan.carrier_start",
                        required("scan.carrier_start", &raw.carrier_start)?,
                    )?,
                    carrier_stop_hz: parse_frequency(
                        "scan.carrier_stop",
                        required("scan.carrier_stop", &raw.carrier_stop)?,
                    )?,
                    carrier_points: resolve_points("scan.carrier_points", raw.carrier_points, 21)?,
                    detuning_start_hz: parse_frequency(
                        "scan.detuning_start",
                        required("scan.detuning_start", &raw.detuning_start)?,
                    )?,
                    detuning_stop_hz: parse_frequency(
                        "scan.detuning_stop",
                        required("scan.detuning_stop", &raw.detuning_stop)?,
                    )?,
                    detuning_points: resolve_points("scan.detuning_points", raw.detuning_points, 21)?,
                }
            }
            "beams" => {
                map_only_absent(&raw)?;
                unexpected("powers", raw.powers.is_some())?;
                unexpected("distances", raw.distances.is_some())?;
                ScanSpec::Beams {
                    start_m: parse_length("scan.start", required("scan.start", &raw.start)?)?,
                    stop_m: parse_length("scan.stop", required("scan.stop", &raw.stop)?)?,
                    points: resolve_points("scan.points", raw.points, 121)?,
                }
            }
            other => {
                return Err(Error::config(
                    "scan.type",
                    format!(
                        "unknown scan type '{other}'; expected one of carrier | distance | \
                         probe-power | coupling-detuning | map | beams"
                    ),
                ))
            }
        };
        Ok(spec)
    }
}

impl ScenarioConfig {
    /// Link geometry at the given base-to-cell distance.
    pub fn geometry(&self, distance: f64) -> LinkGeometry {
        LinkGeometry {
            distance,
            cell_length: self.link.cell_length,
            cell_bore_diameter: self.link.cell_bore_diameter,
            reflector_aperture: self.link.reflector_aperture,
            detector_aperture_radius: self.link.detector_aperture_radius,
            surface_transmittance: self.link.surface_transmittance,
            reflector_reflectance: self.link.reflector_reflectance,
            contamination: self.link.contamination,
            beam_separation: self.link.beam_separation,
        }
    }

    /// Transmitter beams with the given probe power (W).
    pub fn optical_pair(&self, probe_power: f64) -> Result<OpticalPair> {
        let defaults = OpticalPair::rb87_default(probe_power, self.coupling.power)?;
        Ok(OpticalPair {
            probe: GaussianBeam::new(self.probe.wavelength, self.probe.waist_radius, 0.0, probe_power)?,
            coupling: GaussianBeam::new(
                self.coupling.wavelength,
                self.coupling.waist_radius,
                0.0,
                self.coupling.power,
            )?,
            ..defaults
        })
    }

    /// Thermal ⁸⁷Rb ensemble for the configured vapor.
    pub fn ensemble(&self) -> Result<ThermalEnsemble> {
        ThermalEnsemble::rb87_at(self.atoms.temperature, self.atoms.rb87_fraction, self.atoms.velocity_order)
    }

    /// Level scheme with the configured base dephasing plus any additional
    /// per-point broadening (rad/s), e.g. transit broadening.
    pub fn scheme(&self, extra_dephasing: f64) -> LevelScheme {
        LevelScheme::rb87_default(TAU * self.atoms.rydberg_dephasing_hz + extra_dephasing)
    }

    /// RF scene at the given carrier and source power.
    pub fn rf_scene(&self, carrier_hz: f64, power_dbm: f64) -> RfScene {
        RfScene {
            carrier_frequency: carrier_hz,
            source_power_dbm: power_dbm,
            calibration: self.rf.field_calibration,
            modulation_frequency: self.rf.modulation_frequency_hz,
            modulation_depth: self.rf.modulation_depth,
            inclusion_window: self.rf.inclusion_window_hz,
            envelope_samples: self.rf.envelope_samples,
        }
    }

    /// Every distance the scan will evaluate the link at.
    fn scan_distances(&self) -> Vec<f64> {
        match &self.scan {
            ScanSpec::Carrier { .. } | ScanSpec::CouplingDetuning { .. } | ScanSpec::Map { .. } => {
                vec![self.link.distance]
            }
            ScanSpec::ProbePower { distances_m, .. } => distances_m.clone(),
            ScanSpec::Distance { start_m, stop_m, .. } | ScanSpec::Beams { start_m, stop_m, .. } => {
                vec![*start_m, *stop_m]
            }
        }
    }

    /// Cross-validate the resolved configuration by constructing and
    /// validating the model objects it describes.
    pub fn validate(&self) -> Result<()> {
        for distance in self.scan_distances() {
            self.geometry(distance).validate()?;
        }
        let probe_powers: Vec<f64> = match &self.scan {
            ScanSpec::ProbePower { start_w, stop_w, .. } => vec![*start_w, *stop_w],
            _ => vec![self.probe.power],
        };
        for power in probe_powers {
            self.optical_pair(power)?.validate()?;
        }
        self.ensemble()?;
        self.scheme(0.0).validate()?;
        let scene = self.rf_scene(self.rf.carrier_hz, self.rf.power_dbm);
        scene.validate()?;
        self.detection.validate()?;
        if !(self.atoms.rydberg_dephasing_hz >= 0.0) {
            return Err(Error::config("atoms.rydberg_dephasing", "must be ≥ 0"));
        }

        // Axis sanity: strictly ordered endpoints.
        let ordered = |field: &str, a: f64, b: f64| -> Result<()> {
            if !(a < b) {
                return Err(Error::config(field, format!("scan start must be below stop, got {a} ≥ {b}")));
            }
            Ok(())
        };
        match &self.scan {
            ScanSpec::Carrier { start_hz, stop_hz, powers_dbm, .. } => {
                ordered("scan.start", *start_hz, *stop_hz)?;
                if !(*start_hz > 0.0) {
                    return Err(Error::config("scan.start", "carrier frequencies must be positive"));
                }
                for p in powers_dbm {
                    if !p.is_finite() {
                        return Err(Error::config("scan.powers", "powers must be finite"));
                    }
                }
            }
            ScanSpec::Distance { start_m, stop_m, .. } | ScanSpec::Beams { start_m, stop_m, .. } => {
                ordered("scan.start", *start_m, *stop_m)?;
            }
            ScanSpec::ProbePower { start_w, stop_w, .. } => {
                ordered("scan.start", *start_w, *stop_w)?;
                if !(*start_w > 0.0) {
                    return Err(Error::config("scan.start", "probe powers must be positive"));
                }
            }
            ScanSpec::CouplingDetuning { start_hz, stop_hz, .. } => {
                ordered("scan.start", *start_hz, *stop_hz)?;
            }
            ScanSpec::Map {
                carrier_start_hz,
                carrier_stop_hz,
                detuning_start_hz,
                detuning_stop_hz,
                ..
            } => {
                ordered("scan.carrier_start", *carrier_start_hz, *carrier_stop_hz)?;
                ordered("scan.detuning_start", *detuning_start_hz, *detuning_stop_hz)?;
            }
        }
        Ok(())
    }

    /// Canonical raw form: every field explicit in base SI units, so the echo
    /// reloads to this exact configuration.
    pub fn to_raw(&self) -> RawConfig {
        let scan = match &self.scan {
            ScanSpec::Carrier { start_hz, stop_hz, points, powers_dbm } => RawScan {
                r#type: Some("carrier".into()),
                start: Some(format_frequency(*start_hz)),
                stop: Some(format_frequency(*stop_hz)),
                points: Some(*points as u32),
                powers: if powers_dbm.is_empty() {
                    None
                } else {
                    Some(powers_dbm.iter().map(|p| format_dbm(*p)).collect())
                },
                ..RawScan::default()
            },
            ScanSpec::Distance { start_m, stop_m, points } => RawScan {
                r#type: Some("distance".into()),
                start: Some(format_length(*start_m)),
                stop: Some(format_length(*stop_m)),
                points: Some(*points as u32),
                ..RawScan::default()
            },
            ScanSpec::ProbePower { start_w, stop_w, points, log_spaced, distances_m } => RawScan {
                r#type: Some("probe-power".into()),
                start: Some(format_power(*start_w)),
                stop: Some(format_power(*stop_w)),
                points: Some(*points as u32),
                spacing: Some(if *log_spaced { "log".into() } else { "linear".into() }),
                distances: Some(distances_m.iter().map(|d| format_length(*d)).collect()),
                ..RawScan::default()
            },
            ScanSpec::CouplingDetuning { start_hz, stop_hz, points } => RawScan {
                r#type: Some("coupling-detuning".into()),
                start: Some(format_frequency(*start_hz)),
                stop: Some(format_frequency(*stop_hz)),
                points: Some(*points as u32),
                ..RawScan::default()
            },
            ScanSpec::Map {
                carrier_start_hz,
                carrier_stop_hz,
                carrier_points,
                detuning_start_hz,
                detuning_stop_hz,
                detuning_points,
            } => RawScan {
                r#type: Some("map".into()),
                carrier_start: Some(format_frequency(*carrier_start_hz)),
                carrier_stop: Some(format_frequency(*carrier_stop_hz)),
                carrier_points: Some(*carrier_points as u32),
                detuning_start: Some(format_frequency(*detuning_start_hz)),
                detuning_stop: Some(format_frequency(*detuning_stop_hz)),
                detuning_points: Some(*detuning_points as u32),
                ..RawScan::default()
            },
            ScanSpec::Beams { start_m, stop_m, points } => RawScan {
                r#type: Some("beams".into()),
                start: Some(format_length(*start_m)),
                stop: Some(format_length(*stop_m)),
                points: Some(*points as u32),
                ..RawScan::default()
            },
        };

        RawConfig {
            name: Some(self.name.clone()),
            atoms: Some(RawAtoms {
                temperature: Some(format_temperature(self.atoms.temperature)),
                rb87_fraction: Some(self.atoms.rb87_fraction),
                rydberg_dephasing: Some(format_frequency(self.atoms.rydberg_dephasing_hz)),
                velocity_order: Some(self.atoms.velocity_order as u32),
            }),
            probe: Some(RawBeam {
                wavelength: Some(format_length(self.probe.wavelength)),
                power: Some(format_power(self.probe.power)),
                waist_radius: Some(format_length(self.probe.waist_radius)),
                detuning: Some(format_frequency(self.probe.detuning_hz)),
            }),
            coupling: Some(RawBeam {
                wavelength: Some(format_length(self.coupling.wavelength)),
                power: Some(format_power(self.coupling.power)),
                waist_radius: Some(format_length(self.coupling.waist_radius)),
                detuning: Some(format_frequency(self.coupling.detuning_hz)),
            }),
            link: Some(RawLink {
                distance: Some(format_length(self.link.distance)),
                cell_length: Some(format_length(self.link.cell_length)),
                cell_bore_diameter: Some(format_length(self.link.cell_bore_diameter)),
                reflector_aperture: Some(format_length(self.link.reflector_aperture)),
                detector_aperture_radius: Some(format_length(self.link.detector_aperture_radius)),
                surface_transmittance: Some(self.link.surface_transmittance),
                reflector_reflectance: Some(self.link.reflector_reflectance),
                contamination: Some(self.link.contamination),
                beam_separation: Some(format_length(self.link.beam_separation)),
                coated: None,
            }),
            rf: Some(RawRf {
                carrier: Some(format_frequency(self.rf.carrier_hz)),
                power: Some(format_dbm(self.rf.power_dbm)),
                field_calibration_v_per_m_sqrt_mw: Some(self.rf.field_calibration),
                modulation_frequency: Some(format_frequency(self.rf.modulation_frequency_hz)),
                modulation_depth: Some(self.rf.modulation_depth),
                inclusion_window: Some(format_frequency(self.rf.inclusion_window_hz)),
                envelope_samples: Some(self.rf.envelope_samples as u32),
            }),
            detection: Some(RawDetection {
                responsivity: Some(format_responsivity(self.detection.responsivity)),
                rbw: Some(format_frequency(self.detection.rbw)),
                dark_power: Some(format_power(self.detection.dark_power)),
                shot_excess: Some(self.detection.shot_excess),
            }),
            scan: Some(scan),
        }
    }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

/// Parse configuration text. `format_hint` is the lowercase file extension
/// (`"json"` selects JSON; anything else parses as TOML). JSON input may be a
/// bare config object or a result sidecar, whose `config` key is then used.
pub fn parse_config_str(text: &str, format_hint: &str, fallback_name: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = if format_hint == "json" {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::config("config", format!("JSON parse error: {e}")))?;
        let config_value = match &value {
            serde_json::Value::Object(map) if map.contains_key("config") => map["config"].clone(),
            _ => value,
        };
        serde_json::from_value(config_value)
            .map_err(|e| Error::config("config", format!("JSON config error: {e}")))?
    } else {
        toml::from_str(text).map_err(|e| Error::config("config", format!("TOML parse error: {e}")))?
    };
    raw.resolve(fallback_name)
}

/// Load and fully resolve a configuration file (TOML, or a JSON sidecar from
/// a previous run). The returned configuration reproduces the original scan.
pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Err(Error::config("config", format!("{} is empty", path.display())));
    }
    let hint = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scan")
        .to_string();
    parse_config_str(&text, &hint, &stem)
}

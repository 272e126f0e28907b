//! Unit-suffixed quantity parsing for configuration files.
//!
//! Every physical (dimensioned) configuration value is written as a number
//! with an explicit unit suffix — `480nm`, `10mW`, `19.84GHz`, `-12dBm` — and
//! a bare number on such a field is a configuration error. Dimensionless
//! fields (modulation depth, reflectances, counts) are plain numbers.

use crate::error::{Error, Result};

/// One accepted suffix and its multiplier into the base SI unit.
type UnitTable = &'static [(&'static str, f64)];

const LENGTH_UNITS: UnitTable = &[
    ("nm", 1e-9),
    ("um", 1e-6),
    ("µm", 1e-6),
    ("mm", 1e-3),
    ("cm", 1e-2),
    ("m", 1.0),
];

const POWER_UNITS: UnitTable = &[
    ("pW", 1e-12),
    ("nW", 1e-9),
    ("uW", 1e-6),
    ("µW", 1e-6),
    ("mW", 1e-3),
    ("W", 1.0),
];

const FREQUENCY_UNITS: UnitTable =
    &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9), ("THz", 1e12)];

const TEMPERATURE_UNITS: UnitTable = &[("K", 1.0)];

const RESPONSIVITY_UNITS: UnitTable = &[("A/W", 1.0)];

const DBM_UNITS: UnitTable = &[("dBm", 1.0)];

/// Split `text` into a leading floating-point literal and the remaining
/// suffix. Returns `None` when no leading number can be read.
fn split_number(text: &str) -> Option<(f64, &str)> {
    let t = text.trim();
    let bytes = t.as_bytes();
    let mut i = 0;
    if matches!(bytes.first(), Some(b'+') | Some(b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut saw_digits = i > int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        saw_digits |= i > frac_start;
    }
    if !saw_digits {
        return None;
    }
    // Exponent part only if 'e'/'E' is followed by an (optionally signed) digit;
    // otherwise the 'e' begins the unit suffix.
    if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
        let mut j = i + 1;
        if j < bytes.len() && matches!(bytes[j], b'+' | b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    let value: f64 = t[..i].parse().ok()?;
    Some((value, t[i..].trim()))
}

fn unit_list(table: UnitTable) -> String {
    let shown: Vec<&str> = table.iter().map(|(u, _)| *u).filter(|u| !u.contains('µ')).collect();
    shown.join("|")
}

/// Parse a quantity with a mandatory suffix from `table`, returning the value
/// in the base SI unit. `dimension` names the expected kind in errors.
fn parse_with_units(field: &str, text: &str, dimension: &str, table: UnitTable) -> Result<f64> {
    let (value, suffix) = split_number(text).ok_or_else(|| {
        Error::config(field, format!("expected a {dimension} like '{}', got '{text}'", example(table)))
    })?;
    if suffix.is_empty() {
        return Err(Error::config(
            field,
            format!(
                "missing unit suffix on physical quantity '{text}'; \
                 expected a {dimension} with one of ({})",
                unit_list(table)
            ),
        ));
    }
    match table.iter().find(|(u, _)| *u == suffix) {
        Some((_, factor)) => Ok(value * factor),
        None => Err(Error::config(
            field,
            format!(
                "unknown {dimension} unit '{suffix}' in '{text}'; expected one of ({})",
                unit_list(table)
            ),
        )),
    }
}

fn example(table: UnitTable) -> String {
    format!("1{}", table.last().map(|(u, _)| *u).unwrap_or(""))
}

/// Length in metres from e.g. `480nm`, `2.5mm`, `30m`.
pub fn parse_length(field: &str, text: &str) -> Result<f64> {
    parse_with_units(field, text, "length", LENGTH_UNITS)
}

/// Power in watts from e.g. `100pW`, `5uW`, `10mW`.
pub fn parse_power(field: &str, text: &str) -> Result<f64> {
    parse_with_units(field, text, "power", POWER_UNITS)
}

/// Frequency in hertz from e.g. `60kHz`, `18.14GHz`. Signed values are
/// accepted (detunings).
pub fn parse_frequency(field: &str, text: &str) -> Result<f64> {
    parse_with_units(field, text, "frequency", FREQUENCY_UNITS)
}

/// Temperature in kelvin from e.g. `293.15K`.
pub fn parse_temperature(field: &str, text: &str) -> Result<f64> {
    parse_with_units(field, text, "temperature", TEMPERATURE_UNITS)
}

/// Photodiode responsivity in A/W from e.g. `0.5A/W`.
pub fn parse_responsivity(field: &str, text: &str) -> Result<f64> {
    parse_with_units(field, text, "responsivity", RESPONSIVITY_UNITS)
}

/// Source-referred RF power in dBm from e.g. `-12dBm`, `+14dBm`. The value is
/// kept on the dBm scale (no linear conversion).
pub fn parse_dbm(field: &str, text: &str) -> Result<f64> {
    parse_with_units(field, text, "source power", DBM_UNITS)
}

/// Canonical unit strings for the resolved-config echo. Base SI units with
/// Rust's shortest round-trip float formatting, so re-parsing reproduces the
/// exact same value bit for bit.
pub fn format_length(metres: f64) -> String {
    format!("{metres}m")
}

pub fn format_power(watts: f64) -> String {
    format!("{watts}W")
}

pub fn format_frequency(hertz: f64) -> String {
    format!("{hertz}Hz")
}

pub fn format_temperature(kelvin: f64) -> String {
    format!("{kelvin}K")
}

pub fn format_responsivity(amps_per_watt: f64) -> String {
    format!("{amps_per_watt}A/W")
}

pub fn format_dbm(dbm: f64) -> String {
    format!("{dbm}dBm")
}

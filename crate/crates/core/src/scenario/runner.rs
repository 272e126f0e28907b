//! Scan execution: turns a [`ScenarioConfig`] into an ordered result table.
//!
//! Every scan point is an independent pure evaluation, fanned out to a rayon
//! worker pool and reassembled in axis order, so results are deterministic
//! regardless of worker count. A failing point aborts the scan: rows before
//! the failure are kept and the abort is reported alongside them.

use std::time::Instant;

use rayon::prelude::*;

use std::f64::consts::TAU;

use crate::atomic::transit_broadening;
use crate::error::{Error, Result};
use crate::link::{evaluate_link, LinkBudgetReport};
use crate::transduction::{evaluate_tone, AtomicStage, ScanResult, ToneReadout};

use super::config::{ScanSpec, ScenarioConfig};

/// Where and why a scan stopped early.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScanAbort {
    /// Zero-based index of the failing scan point.
    pub index: usize,
    /// Axis value of the failing point.
    pub axis: f64,
    /// The underlying error, with the point attached.
    pub message: String,
}

/// A finished (or aborted) scan.
#[derive(Debug, Clone)]
pub struct ScanOutcome {
    pub result: ScanResult,
    pub abort: Option<ScanAbort>,
    pub wall_seconds: f64,
}

impl ScanOutcome {
    /// True when every configured point produced a row.
    pub fn complete(&self) -> bool {
        self.abort.is_none()
    }
}

/// Fixed per-distance context for tone evaluations: the link budget and the
/// atomic stage with transit broadening for the in-cell coupling diameter.
struct ToneContext {
    stage: AtomicStage,
    report: LinkBudgetReport,
}

fn tone_context(cfg: &ScenarioConfig, distance: f64, probe_power: f64) -> Result<ToneContext> {
    let geometry = cfg.geometry(distance);
    let pair = cfg.optical_pair(probe_power)?;
    let report = evaluate_link(&geometry, &pair)?;
    let ensemble = cfg.ensemble()?;
    let transit = transit_broadening(report.coupling_diameter_at_cell, &ensemble)?;
    let mut stage = AtomicStage::new(cfg.scheme(transit), ensemble, cfg.link.cell_length);
    stage.probe_detuning = TAU * cfg.probe.detuning_hz;
    stage.coupling_detuning = TAU * cfg.coupling.detuning_hz;
    stage.probe_wavelength = cfg.probe.wavelength;
    stage.coupling_wavelength = cfg.coupling.wavelength;
    Ok(ToneContext { stage, report })
}

fn tone_at(cfg: &ScenarioConfig, ctx: &ToneContext, carrier_hz: f64, power_dbm: f64) -> Result<ToneReadout> {
    let scene = cfg.rf_scene(carrier_hz, power_dbm);
    evaluate_tone(&scene, &ctx.stage, &ctx.report, &cfg.detection)
}

/// Short column tag for one curve of a multi-curve scan.
fn dbm_tag(power_dbm: f64) -> String {
    format!("{power_dbm}dBm")
}

fn distance_tag(distance_m: f64) -> String {
    format!("{distance_m}m")
}

/// Column headers for a group of curves: 3 summary columns per curve when
/// there are several, the full 5-column readout for a single curve.
fn group_columns(tags: &[String]) -> Vec<String> {
    if tags.len() == 1 {
        crate::transduction::tone_columns()
    } else {
        tags.iter()
            .flat_map(|tag| {
                [
                    format!("snr_db[{tag}]"),
                    format!("tone_dbm[{tag}]"),
                    format!("mean_transmission[{tag}]"),
                ]
            })
            .collect()
    }
}

fn group_values(single: bool, readout: &ToneReadout) -> Vec<f64> {
    if single {
        readout.row_values()
    } else {
        vec![readout.snr_db, readout.tone_power_dbm, readout.mean_transmission]
    }
}

/// Run the configured scan. `workers` sizes the worker pool (`None` = the
/// machine's available parallelism).
pub fn run_scan(cfg: &ScenarioConfig, workers: Option<usize>) -> Result<ScanOutcome> {
    let started = Instant::now();
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Model(format!("cannot build worker pool: {e}")))?;

    let axis = cfg.scan.primary_axis();
    let (axis_label, columns, rows): (&str, Vec<String>, Vec<Result<Vec<f64>>>) = match &cfg.scan {
        ScanSpec::Carrier { powers_dbm, .. } => {
            let powers = if powers_dbm.is_empty() { vec![cfg.rf.power_dbm] } else { powers_dbm.clone() };
            let tags: Vec<String> = powers.iter().map(|p| dbm_tag(*p)).collect();
            let single = powers.len() == 1;
            let ctx = tone_context(cfg, cfg.link.distance, cfg.probe.power)?;
            let rows = pool.install(|| {
                axis.par_iter()
                    .map(|&carrier| {
                        let mut values = Vec::with_capacity(if single { 5 } else { 3 * powers.len() });
                        for &p in &powers {
                            values.extend(group_values(single, &tone_at(cfg, &ctx, carrier, p)?));
                        }
                        Ok(values)
                    })
                    .collect()
            });
            ("carrier_frequency_hz", group_columns(&tags), rows)
        }
        ScanSpec::Distance { .. } => {
            let mut columns = crate::transduction::tone_columns();
            columns.push("returned_probe_power_w".to_string());
            columns.push("efficiency".to_string());
            let rows = pool.install(|| {
                axis.par_iter()
                    .map(|&distance| {
                        let ctx = tone_context(cfg, distance, cfg.probe.power)?;
                        let readout = tone_at(cfg, &ctx, cfg.rf.carrier_hz, cfg.rf.power_dbm)?;
                        let mut values = readout.row_values();
                        values.push(ctx.report.returned_probe_power);
                        values.push(ctx.report.efficiency);
                        Ok(values)
                    })
                    .collect()
            });
            ("distance_m", columns, rows)
        }
        ScanSpec::ProbePower { distances_m, .. } => {
            let tags: Vec<String> = distances_m.iter().map(|d| distance_tag(*d)).collect();
            let single = distances_m.len() == 1;
            let distances = distances_m.clone();
            let rows = pool.install(|| {
                axis.par_iter()
                    .map(|&power| {
                        let mut values = Vec::with_capacity(if single { 5 } else { 3 * distances.len() });
                        for &d in &distances {
                            let ctx = tone_context(cfg, d, power)?;
                            let readout = tone_at(cfg, &ctx, cfg.rf.carrier_hz, cfg.rf.power_dbm)?;
                            values.extend(group_values(single, &readout));
                        }
                        Ok(values)
                    })
                    .collect()
            });
            ("probe_power_w", group_columns(&tags), rows)
        }
        ScanSpec::CouplingDetuning { .. } => {
            let ctx = tone_context(cfg, cfg.link.distance, cfg.probe.power)?;
            let rows = pool.install(|| {
                axis.par_iter()
                    .map(|&detuning_hz| {
                        let mut stage = ctx.stage.clone();
                        stage.coupling_detuning = TAU * detuning_hz;
                        let scene = cfg.rf_scene(cfg.rf.carrier_hz, cfg.rf.power_dbm);
                        let readout = evaluate_tone(&scene, &stage, &ctx.report, &cfg.detection)?;
                        Ok(readout.row_values())
                    })
                    .collect()
            });
            ("coupling_detuning_hz", crate::transduction::tone_columns(), rows)
        }
        ScanSpec::Map { detuning_start_hz, detuning_stop_hz, detuning_points, .. } => {
            let detunings =
                super::config::linspace(*detuning_start_hz, *detuning_stop_hz, *detuning_points);
            let columns: Vec<String> =
                detunings.iter().map(|d| format!("snr_db[dc={}MHz]", d / 1e6)).collect();
            let ctx = tone_context(cfg, cfg.link.distance, cfg.probe.power)?;
            let rows = pool.install(|| {
                axis.par_iter()
                    .map(|&carrier| {
                        detunings
                            .iter()
                            .map(|&detuning_hz| {
                                let mut stage = ctx.stage.clone();
                                stage.coupling_detuning = TAU * detuning_hz;
                                let scene = cfg.rf_scene(carrier, cfg.rf.power_dbm);
                                Ok(evaluate_tone(&scene, &stage, &ctx.report, &cfg.detection)?.snr_db)
                            })
                            .collect()
                    })
                    .collect()
            });
            ("carrier_frequency_hz", columns, rows)
        }
        ScanSpec::Beams { .. } => {
            let columns = vec![
                "probe_diameter_at_cell_m".to_string(),
                "coupling_diameter_at_cell_m".to_string(),
                "probe_rabi_rad_per_s".to_string(),
                "coupling_rabi_rad_per_s".to_string(),
                "efficiency".to_string(),
                "returned_probe_power_w".to_string(),
            ];
            let pair = cfg.optical_pair(cfg.probe.power)?;
            let rows = pool.install(|| {
                axis.par_iter()
                    .map(|&distance| {
                        let report = evaluate_link(&cfg.geometry(distance), &pair)?;
                        Ok(vec![
                            report.probe_diameter_at_cell,
                            report.coupling_diameter_at_cell,
                            report.probe_rabi_at_cell,
                            report.coupling_rabi_at_cell,
                            report.efficiency,
                            report.returned_probe_power,
                        ])
                    })
                    .collect()
            });
            ("distance_m", columns, rows)
        }
    };

    let mut result = ScanResult::new(axis_label, columns);
    let mut abort = None;
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Ok(values) => result.push_row(axis[i], values)?,
            Err(e) => {
                abort = Some(ScanAbort {
                    index: i,
                    axis: axis[i],
                    message: format!("scan point {i} ({axis_label} = {}): {e}", axis[i]),
                });
                break;
            }
        }
    }
    Ok(ScanOutcome { result, abort, wall_seconds: started.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::config::parse_config_str;
    use approx::assert_relative_eq;

    fn run_toml(text: &str) -> ScanOutcome {
        let cfg = parse_config_str(text, "toml", "test").unwrap();
        run_scan(&cfg, Some(2)).unwrap()
    }

    #[test]
    fn beams_scan_reproduces_the_link_budget_landmarks() {
        let outcome = run_toml(
            r#"
            [scan]
            type = "beams"
            start = "0.5m"
            stop = "60m"
            points = 120
        "#,
        );
        assert!(outcome.complete());
        let result = &outcome.result;
        assert_eq!(result.rows.len(), 120);

        // Diameters grow monotonically with distance.
        let probe_d = result.column_values("probe_diameter_at_cell_m").unwrap();
        let coupling_d = result.column_values("coupling_diameter_at_cell_m").unwrap();
        assert!(probe_d.windows(2).all(|w| w[0] < w[1]));
        assert!(coupling_d.windows(2).all(|w| w[0] < w[1]));

        // The probe starts narrower but overtakes the coupling beam by 60 m.
        assert!(probe_d[0] < coupling_d[0]);
        assert!(probe_d.last().unwrap() > coupling_d.last().unwrap());

        // Efficiency holds its plateau through the demo range (clipping is
        // still sub-0.1% at 30 m), then aperture clipping bites visibly by
        // the 60 m end of the scan.
        let eff = result.column_values("efficiency").unwrap();
        assert!(eff[0] > 0.5, "plateau efficiency {}", eff[0]);
        assert!(eff.windows(2).all(|w| w[1] <= w[0] + 1e-12), "efficiency not non-increasing");
        let at_30 = eff[result.rows.iter().position(|r| r.axis >= 30.0).unwrap()];
        assert!(at_30 > 0.99 * eff[0], "efficiency off plateau at 30 m: {at_30}");
        assert!(*eff.last().unwrap() < 0.75 * eff[0], "end efficiency {}", eff.last().unwrap());
    }

    #[test]
    fn distance_scan_efficiency_matches_direct_link_evaluation() {
        let outcome = run_toml(
            r#"
            [rf]
            envelope_samples = 8
            [scan]
            type = "distance"
            start = "29m"
            stop = "31m"
            points = 3
        "#,
        );
        assert!(outcome.complete());
        let eff = outcome.result.column_values("efficiency").unwrap();
        // Midpoint row is exactly 30 m; the frozen demo-config efficiency.
        assert_relative_eq!(outcome.result.rows[1].axis, 30.0, max_relative = 1e-12);
        assert_relative_eq!(eff[1], 0.55, max_relative = 2e-12);
        let snr = outcome.result.column_values("snr_db").unwrap();
        assert!(snr.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn multi_power_carrier_scan_emits_one_column_group_per_power() {
        let outcome = run_toml(
            r#"
            [rf]
            envelope_samples = 8
            [scan]
            type = "carrier"
            start = "18.0GHz"
            stop = "18.3GHz"
            points = 3
            powers = ["-12dBm", "14dBm"]
        "#,
        );
        assert!(outcome.complete());
        let result = &outcome.result;
        assert_eq!(result.rows.len(), 3);
        assert_eq!(result.columns.len(), 6);
        assert!(result.columns[0] == "snr_db[-12dBm]");
        assert!(result.columns[3] == "snr_db[14dBm]");
        let low = result.column_values("snr_db[-12dBm]").unwrap();
        let high = result.column_values("snr_db[14dBm]").unwrap();
        assert!(low.iter().chain(high.iter()).all(|v| v.is_finite()));
    }

    #[test]
    fn runs_are_deterministic_across_worker_counts() {
        let text = r#"
            [rf]
            envelope_samples = 8
            [scan]
            type = "coupling-detuning"
            start = "-20MHz"
            stop = "20MHz"
            points = 5
        "#;
        let cfg = parse_config_str(text, "toml", "det").unwrap();
        let a = run_scan(&cfg, Some(1)).unwrap();
        let b = run_scan(&cfg, Some(4)).unwrap();
        assert_eq!(a.result.rows.len(), b.result.rows.len());
        for (ra, rb) in a.result.rows.iter().zip(&b.result.rows) {
            assert_eq!(ra.axis.to_bits(), rb.axis.to_bits());
            for (va, vb) in ra.values.iter().zip(&rb.values) {
                assert_eq!(va.to_bits(), vb.to_bits(), "non-deterministic value");
            }
        }
    }

    #[test]
    fn failed_point_aborts_with_partial_rows_and_point_context() {
        // A modulation frequency far above the quasi-static limit passes
        // static validation but fails inside every waveform evaluation.
        let text = r#"
            [rf]
            modulation_frequency = "1GHz"
            envelope_samples = 8
            [scan]
            type = "carrier"
            start = "18.1GHz"
            stop = "18.2GHz"
            points = 3
        "#;
        let cfg = parse_config_str(text, "toml", "abort").unwrap();
        let outcome = run_scan(&cfg, Some(1)).unwrap();
        assert!(!outcome.complete());
        let abort = outcome.abort.unwrap();
        assert_eq!(abort.index, 0);
        assert!(outcome.result.rows.is_empty());
        assert!(abort.message.contains("scan point 0"), "{}", abort.message);
        assert!(abort.message.contains("quasi-static"), "{}", abort.message);
    }
}

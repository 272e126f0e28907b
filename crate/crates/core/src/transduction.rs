//! AM microwave → optical transduction: the amplitude-modulated RF envelope
//! drives the Rydberg transitions quasi-statically, the Doppler-averaged
//! steady state turns it into a probe-transmission waveform, and a modeled
//! photodetector + spectrum-analyzer readout converts that waveform into the
//! tone power and SNR at the modulation frequency.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomic::{
    self, doppler_average_with, DopplerQuadrature, DriveField, LevelScheme, ThermalEnsemble,
    EXCITED, GROUND, RYD_D,
};
use crate::constants::{C0, HBAR, H_PLANCK};
use crate::error::{Error, Result};
use crate::link::LinkBudgetReport;

/// Default source-power → field-amplitude calibration at the cell,
/// (V/m)/√mW. Stands in for the unmeasured antenna + path gain: with it,
/// −12 dBm gives Ω_RF ≈ 2π × 12 MHz on the 18.14 GHz transition (narrow
/// resonances) and +14 dBm gives ≈ 2π × 240 MHz (strong splitting).
pub const FIELD_CALIBRATION_DEFAULT: f64 = 2.0;
/// Default AM modulation frequency, Hz.
pub const MODULATION_FREQUENCY_DEFAULT: f64 = 60e3;
/// Default AM modulation depth.
pub const MODULATION_DEPTH_DEFAULT: f64 = 0.95;
/// Default half-window (Hz) around the carrier inside which RF-addressable
/// transitions are driven. Wide enough that both default transitions stay
/// coupled across a 16–20 GHz carrier scan.
pub const INCLUSION_WINDOW_DEFAULT: f64 = 5e9;
/// Default number of envelope samples per modulation period.
pub const ENVELOPE_SAMPLES_DEFAULT: usize = 32;

/// One AM microwave illumination scene.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RfScene {
    /// Carrier frequency, Hz.
    pub carrier_frequency: f64,
    /// Source-referred carrier power, dBm.
    pub source_power_dbm: f64,
    /// Field amplitude at the cell per √(source mW), (V/m)/√mW.
    pub calibration: f64,
    /// Modulation frequency f_m, Hz.
    pub modulation_frequency: f64,
    /// Modulation depth m ∈ [0, 1].
    pub modulation_depth: f64,
    /// Transitions within this many Hz of the carrier are driven.
    pub inclusion_window: f64,
    /// Envelope samples per period (even, ≥ 4).
    pub envelope_samples: usize,
}

impl RfScene {
    /// Scene with default modulation/calibration at the given carrier/power.
    pub fn new(carrier_frequency: f64, source_power_dbm: f64) -> Self {
        RfScene {
            carrier_frequency,
            source_power_dbm,
            calibration: FIELD_CALIBRATION_DEFAULT,
            modulation_frequency: MODULATION_FREQUENCY_DEFAULT,
            modulation_depth: MODULATION_DEPTH_DEFAULT,
            inclusion_window: INCLUSION_WINDOW_DEFAULT,
            envelope_samples: ENVELOPE_SAMPLES_DEFAULT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_frequency > 0.0) {
            return Err(Error::config("rf.carrier_frequency", "must be positive"));
        }
        if !self.source_power_dbm.is_finite() {
            return Err(Error::config("rf.source_power_dbm", "must be finite"));
        }
        if !(self.calibration > 0.0) {
            return Err(Error::config("rf.calibration", "must be positive"));
        }
        if !(self.modulation_frequency > 0.0) {
            return Err(Error::config("rf.modulation_frequency", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.modulation_depth) {
            return Err(Error::config("rf.modulation_depth", "must be in [0, 1]"));
        }
        if !(self.inclusion_window >= 0.0) {
            return Err(Error::config("rf.inclusion_window", "must be ≥ 0"));
        }
        if self.envelope_samples < 4 || self.envelope_samples % 2 != 0 {
            return Err(Error::config("rf.envelope_samples", "must be an even count ≥ 4"));
        }
        Ok(())
    }

    /// Peak envelope field amplitude E₀ at the cell, V/m.
    pub fn peak_field(&self) -> f64 {
        self.calibration * 10f64.powf(self.source_power_dbm / 20.0)
    }
}

/// AM envelope field at the cell at time t:
/// E(t) = E₀·(1 + m·cos(2π·f_m·t))/(1 + m), so the peak equals E₀ and the
/// max/min envelope ratio is (1 + m)/(1 − m).
pub fn instantaneous_field(scene: &RfScene, t: f64) -> f64 {
    let m = scene.modulation_depth;
    scene.peak_field() * (1.0 + m * (TAU * scene.modulation_frequency * t).cos()) / (1.0 + m)
}

/// Photodetector + spectrum-analyzer model. Electrical powers are photocurrent
/// squares (A², i.e. watts into 1 Ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionChain {
    /// Photodetector responsivity, A/W.
    pub responsivity: f64,
    /// Analyzer resolution bandwidth, Hz.
    pub rbw: f64,
    /// Input-referred dark/electronics noise, W-equivalent optical power
    /// within the RBW.
    pub dark_power: f64,
    /// Multiplier on the quantum shot-noise variance 2hν·P_DC·RBW, covering
    /// detector noise figure and technical excess.
    pub shot_excess: f64,
}

impl Default for DetectionChain {
    /// 0.5 A/W silicon responsivity at 780 nm, a 1 kHz analyzer resolution
    /// bandwidth, a 100 pW dark/electronics floor (≈3 pW/√Hz NEP, typical of
    /// an amplified photodiode), and 40 dB of excess over quantum shot noise
    /// covering detector noise figure plus analyzer technical noise.
    fn default() -> Self {
        DetectionChain { responsivity: 0.5, rbw: 1e3, dark_power: 1e-10, shot_excess: 1e4 }
    }
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        if !(self.responsivity > 0.0) {
            return Err(Error::config("detection.responsivity", "must be positive"));
        }
        if !(self.rbw > 0.0) {
            return Err(Error::config("detection.rbw", "must be positive"));
        }
        if !(self.dark_power >= 0.0) || !(self.shot_excess >= 0.0) {
            return Err(Error::config("detection.noise", "noise terms must be ≥ 0"));
        }
        if self.dark_power == 0.0 && self.shot_excess == 0.0 {
            return Err(Error::config("detection.noise", "at least one noise term must be > 0"));
        }
        Ok(())
    }
}

/// The atomic half of the transducer: scheme, vapor, quadrature policy, and
/// the fixed optical-drive bookkeeping that the RF envelope modulates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomicStage {
    pub scheme: LevelScheme,
    pub ensemble: ThermalEnsemble,
    pub quadrature: DopplerQuadrature,
    /// Probe-coupled level pair (upper, lower).
    pub probe_pair: (usize, usize),
    /// Coupling-coupled level pair (upper, lower).
    pub coupling_pair: (usize, usize),
    /// Probe detuning Δ_p, rad/s.
    pub probe_detuning: f64,
    /// Coupling detuning Δ_c, rad/s.
    pub coupling_detuning: f64,
    /// Probe wavelength, m (propagates along +z).
    pub probe_wavelength: f64,
    /// Coupling wavelength, m (retroreflected: propagates along −z).
    pub coupling_wavelength: f64,
    /// Vapor cell length (single pass), m.
    pub cell_length: f64,
}

impl AtomicStage {
    /// Default ladder stage for the given vapor and cell.
    pub fn new(scheme: LevelScheme, ensemble: ThermalEnsemble, cell_length: f64) -> Self {
        AtomicStage {
            scheme,
            ensemble,
            quadrature: DopplerQuadrature::default(),
            probe_pair: (EXCITED, GROUND),
            coupling_pair: (RYD_D, EXCITED),
            probe_detuning: 0.0,
            coupling_detuning: 0.0,
            probe_wavelength: atomic::PROBE_WAVELENGTH_DEFAULT,
            coupling_wavelength: atomic::COUPLING_WAVELENGTH_DEFAULT,
            cell_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.ensemble.validate()?;
        self.quadrature.validate()?;
        if !(self.cell_length > 0.0) {
            return Err(Error::config("stage.cell_length", "must be positive"));
        }
        if !(self.probe_wavelength > 0.0) || !(self.coupling_wavelength > 0.0) {
            return Err(Error::config("stage.wavelength", "must be positive"));
        }
        if !self.probe_detuning.is_finite() || !self.coupling_detuning.is_finite() {
            return Err(Error::config("stage.detuning", "must be finite"));
        }
        let n = self.scheme.len();
        DriveField::new(self.probe_pair.0, self.probe_pair.1, 0.0, 0.0, 0.0).validate(n)?;
        DriveField::new(self.coupling_pair.0, self.coupling_pair.1, 0.0, 0.0, 0.0).validate(n)?;
        Ok(())
    }

    /// The full drive list for one instantaneous RF field amplitude: the two
    /// counter-propagating optical drives with Rabi frequencies taken from the
    /// link report, plus one RF drive per in-window transition, each detuned
    /// by (carrier − transition frequency).
    pub fn drives_for_field(
        &self,
        scene: &RfScene,
        report: &LinkBudgetReport,
        field: f64,
    ) -> Result<Vec<DriveField>> {
        if !(field >= 0.0) || !field.is_finite() {
            return Err(Error::config("rf.field", "field amplitude must be ≥ 0 and finite"));
        }
        let mut drives = vec![
            DriveField::new(
                self.probe_pair.0,
                self.probe_pair.1,
                report.probe_rabi_at_cell,
                self.probe_detuning,
                TAU / self.probe_wavelength,
            ),
            DriveField::new(
                self.coupling_pair.0,
                self.coupling_pair.1,
                report.coupling_rabi_at_cell,
                self.coupling_detuning,
                -TAU / self.coupling_wavelength,
            ),
        ];
        for transition in &self.scheme.rf_transitions {
            if (scene.carrier_frequency - transition.frequency).abs() <= scene.inclusion_window {
                let dipole = self.scheme.dipole_for(transition.upper, transition.lower)?;
                drives.push(DriveField::new(
                    transition.upper,
                    transition.lower,
                    dipole * field / HBAR,
                    TAU * (scene.carrier_frequency - transition.frequency),
                    0.0,
                ));
            }
        }
        Ok(drives)
    }
}

/// Probe transmission sampled over one modulation period.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmissionWaveform {
    /// Sample times t_k = k·T/N over one period, s.
    pub times: Vec<f64>,
    /// Double-pass probe transmission at each sample, in (0, 1].
    pub transmission: Vec<f64>,
    /// Modulation period, s.
    pub period: f64,
    /// Probe wavelength, m (sets the photon energy in the shot-noise model).
    pub probe_wavelength: f64,
}

/// Quasi-static transduction: at each envelope sample, rebuild the drives for
/// the instantaneous field and evaluate the Doppler-averaged steady-state
/// transmission. Valid when f_m is far below the atomic relaxation rates
/// (enforced: 2π·f_m < max Γ / 10). The cosine envelope is symmetric about
/// the half period, so only ⌈N/2⌉+1 samples are solved and the rest mirrored.
pub fn transmission_waveform(
    scene: &RfScene,
    stage: &AtomicStage,
    report: &LinkBudgetReport,
    n_samples: usize,
) -> Result<TransmissionWaveform> {
    scene.validate()?;
    stage.validate()?;
    if n_samples < 4 || n_samples % 2 != 0 {
        return Err(Error::config("envelope_samples", "must be an even count ≥ 4"));
    }
    let max_decay = stage.scheme.levels.iter().map(|l| l.decay).fold(0.0f64, f64::max);
    if TAU * scene.modulation_frequency >= max_decay / 10.0 {
        return Err(Error::Model(format!(
            "quasi-static treatment requires 2π·f_m < Γ_max/10, but 2π × {:.3e} Hz ≥ {:.3e} rad/s; \
             reduce the modulation frequency",
            scene.modulation_frequency,
            max_decay / 10.0
        )));
    }

    let period = 1.0 / scene.modulation_frequency;
    let mut transmission = vec![0.0; n_samples];
    for k in 0..=n_samples / 2 {
        let t = period * k as f64 / n_samples as f64;
        let field = instantaneous_field(scene, t);
        let drives = stage.drives_for_field(scene, report, field)?;
        let chi =
            doppler_average_with(&stage.scheme, &drives, &stage.ensemble, &stage.quadrature)?.chi;
        let fraction = atomic::transmission(chi, stage.probe_wavelength, stage.cell_length)?;
        transmission[k] = fraction;
        if k != 0 && k != n_samples - k {
            transmission[n_samples - k] = fraction;
        }
    }
    let times = (0..n_samples).map(|k| period * k as f64 / n_samples as f64).collect();
    Ok(TransmissionWaveform {
        times,
        transmission,
        period,
        probe_wavelength: stage.probe_wavelength,
    })
}

/// Demodulated readout of one waveform.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToneReadout {
    /// 10·log₁₀((S + N)/N): the analyzer-referred SNR at f_m — exactly 0 dB
    /// when the waveform carries no tone.
    pub snr_db: f64,
    /// Electrical tone power at f_m in dBm into 1 Ω (−∞ when no tone).
    pub tone_power_dbm: f64,
    /// Mean probe transmission over the period.
    pub mean_transmission: f64,
    /// Waveform extrema over the period.
    pub min_transmission: f64,
    pub max_transmission: f64,
}

/// Project the photocurrent onto the modulation tone and compare with the
/// detection noise floor. Signal: S = 2·(R·P_ret·|c₁|)² with c₁ the first
/// Fourier coefficient of the transmission waveform. Noise:
/// N = R²·(dark² + shot_excess·2hν·P_DC·RBW). Both in A² (watts into 1 Ω).
pub fn tone_power_and_snr(
    waveform: &TransmissionWaveform,
    report: &LinkBudgetReport,
    chain: &DetectionChain,
) -> Result<ToneReadout> {
    chain.validate()?;
    let n = waveform.transmission.len();
    if n < 2 {
        return Err(Error::Model("waveform needs at least 2 samples".into()));
    }
    if waveform.times.len() != n {
        return Err(Error::Model("waveform times/samples length mismatch".into()));
    }
    if !(report.returned_probe_power > 0.0) {
        return Err(Error::Model(
            "zero collected probe power: the SNR at the modulation tone is undefined".into(),
        ));
    }

    let mut c1 = Complex64::new(0.0, 0.0);
    let mut mean = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (k, &t) in waveform.transmission.iter().enumerate() {
        let phase = -TAU * k as f64 / n as f64;
        c1 += t * Complex64::new(phase.cos(), phase.sin());
        mean += t;
        min = min.min(t);
        max = max.max(t);
    }
    c1 /= n as f64;
    mean /= n as f64;
    // A constant waveform leaves a ~1e-17 floating-point residue in the
    // Fourier sum; snap tones below accumulation noise to an exact zero so
    // modulation-off reads exactly 0 dB.
    if c1.norm() <= mean * 1e-14 {
        c1 = Complex64::new(0.0, 0.0);
    }

    let p_dc = report.returned_probe_power * mean;
    let tone_current = chain.responsivity * report.returned_probe_power * c1.norm();
    let signal = 2.0 * tone_current * tone_current;
    let photon_energy = H_PLANCK * C0 / waveform.probe_wavelength;
    let noise = chain.responsivity.powi(2)
        * (chain.dark_power.powi(2) + chain.shot_excess * 2.0 * photon_energy * p_dc * chain.rbw);
    if !(noise > 0.0) {
        return Err(Error::numerical("detection noise floor vanished", noise));
    }

    Ok(ToneReadout {
        // ln_1p keeps SNR = 0 dB exact for signal = 0.
        snr_db: 10.0 * (signal / noise).ln_1p() / std::f64::consts::LN_10,
        tone_power_dbm: if signal > 0.0 {
            10.0 * (signal / 1e-3).log10()
        } else {
            f64::NEG_INFINITY
        },
        mean_transmission: mean,
        min_transmission: min,
        max_transmission: max,
    })
}

/// Waveform + readout for one carrier point.
pub fn evaluate_tone(
    scene: &RfScene,
    stage: &AtomicStage,
    report: &LinkBudgetReport,
    chain: &DetectionChain,
) -> Result<ToneReadout> {
    let waveform = transmission_waveform(scene, stage, report, scene.envelope_samples)?;
    tone_power_and_snr(&waveform, report, chain)
}

/// A labeled scan table: one axis column plus named value columns, one row
/// per scan point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    /// Axis column header, unit-annotated (e.g. "carrier_frequency_hz").
    pub axis_label: String,
    /// Value column headers, unit-annotated.
    pub columns: Vec<String>,
    /// (axis value, value columns) per point, axis strictly monotonic.
    pub rows: Vec<ScanRow>,
}

/// One scan row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub axis: f64,
    pub values: Vec<f64>,
}

impl ScanResult {
    pub fn new(axis_label: impl Into<String>, columns: Vec<String>) -> Self {
        ScanResult { axis_label: axis_label.into(), columns, rows: Vec::new() }
    }

    /// Append a row, enforcing column completeness and axis monotonicity.
    pub fn push_row(&mut self, axis: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::Model(format!(
                "scan row has {} values for {} columns",
                values.len(),
                self.columns.len()
            )));
        }
        if let Some(last) = self.rows.last() {
            if !(axis > last.axis) && !(axis < last.axis) {
                return Err(Error::Model("scan axis must be strictly monotonic".into()));
            }
            if self.rows.len() >= 2 {
                let ascending = self.rows[1].axis > self.rows[0].axis;
                if ascending != (axis > last.axis) {
                    return Err(Error::Model("scan axis must be strictly monotonic".into()));
                }
            }
        }
        self.rows.push(ScanRow { axis, values });
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            if row.values.len() != self.columns.len() {
                return Err(Error::Model("scan rows must match the column set".into()));
            }
        }
        for window in self.rows.windows(2) {
            if !(window[1].axis > window[0].axis) && !(window[1].axis < window[0].axis) {
                return Err(Error::Model("scan axis must be strictly monotonic".into()));
            }
        }
        Ok(())
    }

    /// (axis, column j) pairs, for analysis helpers.
    pub fn series(&self, column: usize) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.axis, r.values[column])).collect()
    }

    /// Index of a named column.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a named column, in axis order.
    pub fn column_values(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.values[j]).collect())
    }
}

/// Column set produced by [`carrier_scan`] and the per-point evaluators.
pub fn tone_columns() -> Vec<String> {
    vec![
        "snr_db".into(),
        "tone_power_dbm".into(),
        "mean_transmission".into(),
        "min_transmission".into(),
        "max_transmission".into(),
    ]
}

impl ToneReadout {
    /// Values matching [`tone_columns`].
    pub fn row_values(&self) -> Vec<f64> {
        vec![
            self.snr_db,
            self.tone_power_dbm,
            self.mean_transmission,
            self.min_transmission,
            self.max_transmission,
        ]
    }
}

/// SNR vs carrier frequency over the given carrier list (Hz, strictly
/// monotonic). Points are evaluated in parallel and reassembled in order.
pub fn carrier_scan(
    carriers: &[f64],
    scene_template: &RfScene,
    stage: &AtomicStage,
    report: &LinkBudgetReport,
    chain: &DetectionChain,
) -> Result<ScanResult> {
    let readouts: Vec<Result<ToneReadout>> = carriers
        .par_iter()
        .map(|&carrier| {
            let scene = RfScene { carrier_frequency: carrier, ..*scene_template };
            evaluate_tone(&scene, stage, report, chain)
        })
        .collect();
    let mut result = ScanResult::new("carrier_frequency_hz", tone_columns());
    for (carrier, readout) in carriers.iter().zip(readouts) {
        result.push_row(*carrier, readout?.row_values())?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::{LevelScheme, RYDBERG_DEPHASING_DEFAULT, RF_FREQUENCY_50P};
    use crate::link::{evaluate_link, LinkGeometry, OpticalPair};
    use approx::assert_relative_eq;

    fn test_stage() -> AtomicStage {
        let scheme = LevelScheme::rb87_default(RYDBERG_DEPHASING_DEFAULT);
        let ensemble = ThermalEnsemble::rb87_at(293.15, crate::constants::RB87_FRACTION, 7).unwrap();
        AtomicStage::new(scheme, ensemble, 0.150)
    }

    fn test_report() -> LinkBudgetReport {
        let pair = OpticalPair::rb87_default(5e-6, 10e-3).unwrap();
        evaluate_link(&LinkGeometry::at_distance(1.0), &pair).unwrap()
    }

    #[test]
    fn envelope_has_the_advertised_depth_and_peak() {
        let scene = RfScene::new(18.14e9, -12.0);
        let period = 1.0 / scene.modulation_frequency;
        let peak = instantaneous_field(&scene, 0.0);
        let trough = instantaneous_field(&scene, 0.5 * period);
        assert_relative_eq!(peak, scene.peak_field(), max_relative = 1e-12);
        assert_relative_eq!(peak / trough, 1.95 / 0.05, max_relative = 1e-9);

        let mut flat = scene;
        flat.modulation_depth = 0.0;
        for k in 0..7 {
            let t = period * k as f64 / 7.0;
            assert_relative_eq!(
                instantaneous_field(&flat, t),
                flat.peak_field(),
                max_relative = 1e-12
            );
        }

        let mut full = scene;
        full.modulation_depth = 1.0;
        assert!(instantaneous_field(&full, 0.5 * period).abs() < 1e-12 * full.peak_field());
    }

    #[test]
    fn peak_field_follows_the_dbm_calibration() {
        let scene = RfScene::new(18.14e9, 0.0);
        assert_relative_eq!(scene.peak_field(), scene.calibration, max_relative = 1e-12);
        let up = RfScene::new(18.14e9, 20.0);
        assert_relative_eq!(up.peak_field(), 10.0 * scene.calibration, max_relative = 1e-12);
    }

    #[test]
    fn flat_waveform_reads_exactly_zero_db_snr() {
        let waveform = TransmissionWaveform {
            times: (0..8).map(|k| k as f64 / (8.0 * 60e3)).collect(),
            transmission: vec![0.7; 8],
            period: 1.0 / 60e3,
            probe_wavelength: 780e-9,
        };
        let readout = tone_power_and_snr(&waveform, &test_report(), &DetectionChain::default()).unwrap();
        assert_eq!(readout.snr_db, 0.0);
        assert_eq!(readout.tone_power_dbm, f64::NEG_INFINITY);
        assert_relative_eq!(readout.mean_transmission, 0.7, max_relative = 1e-12);
    }

    #[test]
    fn doubling_the_tone_contrast_adds_six_db() {
        let make = |amplitude: f64| TransmissionWaveform {
            times: (0..64).map(|k| k as f64 / (64.0 * 60e3)).collect(),
            transmission: (0..64)
                .map(|k| 0.6 + amplitude * (TAU * k as f64 / 64.0).cos())
                .collect(),
            period: 1.0 / 60e3,
            probe_wavelength: 780e-9,
        };
        let report = test_report();
        let chain = DetectionChain::default();
        let small = tone_power_and_snr(&make(1e-4), &report, &chain).unwrap();
        let large = tone_power_and_snr(&make(2e-4), &report, &chain).unwrap();
        assert_relative_eq!(
            large.tone_power_dbm - small.tone_power_dbm,
            20.0 * 2.0f64.log10(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn snr_is_invariant_under_joint_signal_noise_rescaling() {
        let waveform = TransmissionWaveform {
            times: (0..16).map(|k| k as f64 / (16.0 * 60e3)).collect(),
            transmission: (0..16).map(|k| 0.5 + 0.01 * (TAU * k as f64 / 16.0).cos()).collect(),
            period: 1.0 / 60e3,
            probe_wavelength: 780e-9,
        };
        let report = test_report();
        let base = DetectionChain::default();
        // Responsivity multiplies signal and noise by the same factor.
        let scaled = DetectionChain { responsivity: base.responsivity * 37.0, ..base };
        let a = tone_power_and_snr(&waveform, &report, &base).unwrap();
        let b = tone_power_and_snr(&waveform, &report, &scaled).unwrap();
        assert_relative_eq!(a.snr_db, b.snr_db, max_relative = 1e-12);
    }

    #[test]
    fn zero_collected_power_is_an_error() {
        let waveform = TransmissionWaveform {
            times: vec![0.0, 1.0],
            transmission: vec![0.5, 0.5],
            period: 2.0,
            probe_wavelength: 780e-9,
        };
        let mut report = test_report();
        report.returned_probe_power = 0.0;
        assert!(matches!(
            tone_power_and_snr(&waveform, &report, &DetectionChain::default()),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn quasi_static_gate_rejects_fast_modulation() {
        let mut scene = RfScene::new(RF_FREQUENCY_50P, -12.0);
        scene.modulation_frequency = 1e6; // 2π MHz ≥ Γ_e/10
        let err = transmission_waveform(&scene, &test_stage(), &test_report(), 8);
        assert!(matches!(err, Err(Error::Model(_))));
    }

    #[test]
    fn waveform_is_mirror_symmetric_and_matches_direct_solves() {
        let scene = RfScene::new(RF_FREQUENCY_50P, -5.0);
        let stage = test_stage();
        let report = test_report();
        let waveform = transmission_waveform(&scene, &stage, &report, 8).unwrap();
        assert_eq!(waveform.transmission.len(), 8);
        for k in 1..4 {
            assert_eq!(waveform.transmission[k], waveform.transmission[8 - k]);
        }
        // The mirrored sample really is the steady state at its own time.
        let t5 = waveform.times[5];
        let field = instantaneous_field(&scene, t5);
        let drives = stage.drives_for_field(&scene, &report, field).unwrap();
        let chi = doppler_average_with(&stage.scheme, &drives, &stage.ensemble, &stage.quadrature)
            .unwrap()
            .chi;
        let direct = atomic::transmission(chi, stage.probe_wavelength, stage.cell_length).unwrap();
        assert_relative_eq!(waveform.transmission[5], direct, max_relative = 1e-12);
    }

    #[test]
    fn resonant_waveform_is_anti_phase_with_the_envelope() {
        // At envelope max the AT splitting suppresses EIT; at envelope min the
        // transparency recovers: transmission minima align with field maxima.
        let scene = RfScene::new(RF_FREQUENCY_50P, 0.0);
        let waveform = transmission_waveform(&scene, &test_stage(), &test_report(), 8).unwrap();
        let at_field_max = waveform.transmission[0];
        let at_field_min = waveform.transmission[4];
        assert!(
            at_field_min > at_field_max,
            "expected anti-phase: T(peak field) = {at_field_max}, T(min field) = {at_field_min}"
        );
    }

    #[test]
    fn far_off_resonant_low_power_waveform_is_flat() {
        let mut scene = RfScene::new(16.0e9, -30.0);
        scene.inclusion_window = 1e9; // no transition within the window
        let waveform = transmission_waveform(&scene, &test_stage(), &test_report(), 8).unwrap();
        let min = waveform.transmission.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = waveform.transmission.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max - min < 1e-9, "waveform spread {}", max - min);
    }

    #[test]
    fn scan_result_enforces_monotonic_axis_and_complete_rows() {
        let mut scan = ScanResult::new("x", vec!["y".into()]);
        scan.push_row(0.0, vec![1.0]).unwrap();
        scan.push_row(1.0, vec![2.0]).unwrap();
        assert!(scan.push_row(1.0, vec![3.0]).is_err());
        assert!(scan.push_row(0.5, vec![3.0]).is_err());
        assert!(scan.push_row(2.0, vec![3.0, 4.0]).is_err());
        assert!(scan.validate().is_ok());
    }
}

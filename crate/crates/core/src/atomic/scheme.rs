//! Level scheme, drive fields, and the rotating-frame Hamiltonian.
//!
//! The default scheme is the five-level ⁸⁷Rb ladder
//!
//! ```text
//!   index  label    role
//!   0      5S1/2    ground (probe lower level)
//!   1      5P3/2    first excited (probe upper, coupling lower), Γ_e = 2π×6.07 MHz
//!   2      49D5/2   Rydberg (coupling upper, shared RF level)
//!   3      50P3/2   Rydberg, 18.14 GHz BELOW 49D5/2
//!   4      48F7/2   Rydberg, 19.84 GHz ABOVE 49D5/2
//! ```
//!
//! Frames: one rotating frame per drive frequency. Frame offsets δᵢ are found
//! by walking the drive graph from the ground state with the rule
//! δ_upper = δ_lower − (Δ − k·v) per drive; a cycle whose accumulated offsets
//! disagree is an inconsistent frame and is rejected. Because every detuning
//! enters the Hamiltonian diagonal linearly in velocity, the Doppler family
//! L(v) = L(0) + v·D (D diagonal) is exact — see [`crate::atomic::liouvillian`].

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// 5P₃/₂ population decay rate, rad/s (natural linewidth 2π × 6.07 MHz).
pub const EXCITED_DECAY_DEFAULT: f64 = TAU * 6.07e6;
/// Default Rydberg-state population decay rate, rad/s (2π × 2 kHz).
pub const RYDBERG_DECAY_DEFAULT: f64 = TAU * 2.0e3;
/// Effective probe-transition dipole moment (5S₁/₂ → 5P₃/₂), C·m.
pub const PROBE_DIPOLE_DEFAULT: f64 = 3.584e-29;
/// Coupling-transition dipole (5P₃/₂ → 49D₅/₂), C·m. Calibrated so that a
/// 10 mW coupling beam with a 6 mm 1/e² diameter drives Ω_c = 2π × 0.1 MHz.
pub const COUPLING_DIPOLE_DEFAULT: f64 = 9.07627e-32;
/// RF dipole for 49D₅/₂ → 50P₃/₂, C·m.
pub const RF_DIPOLE_50P_DEFAULT: f64 = 1.6e-26;
/// RF dipole for 49D₅/₂ → 48F₇/₂, C·m.
pub const RF_DIPOLE_48F_DEFAULT: f64 = 1.9e-26;
/// 49D₅/₂ → 50P₃/₂ transition frequency, Hz (50P lies below 49D).
pub const RF_FREQUENCY_50P: f64 = 18.14e9;
/// 49D₅/₂ → 48F₇/₂ transition frequency, Hz (48F lies above 49D).
pub const RF_FREQUENCY_48F: f64 = 19.84e9;
/// Default collective Rydberg dephasing rate (laser linewidths + collisions),
/// rad/s. Calibrated once: with Ω_p = 2π × 1 MHz, Ω_c = 2π × 0.1 MHz, a
/// 293.15 K vapor, and transit broadening for a 6 mm coupling beam, the
/// Doppler-averaged zero-RF EIT dip in a coupling-detuning scan has a 10 MHz
/// FWHM. Locked by `eit_linewidth_is_ten_megahertz` in `atomic/doppler.rs`.
pub const RYDBERG_DEPHASING_DEFAULT: f64 = TAU * 8.5003e6;
/// Probe vacuum wavelength, m.
pub const PROBE_WAVELENGTH_DEFAULT: f64 = 780e-9;
/// Coupling vacuum wavelength, m.
pub const COUPLING_WAVELENGTH_DEFAULT: f64 = 480e-9;

/// Ground-state index in the default scheme.
pub const GROUND: usize = 0;
/// First-excited index in the default scheme.
pub const EXCITED: usize = 1;
/// Shared Rydberg level (49D₅/₂) index in the default scheme.
pub const RYD_D: usize = 2;
/// 50P₃/₂ index in the default scheme.
pub const RYD_P: usize = 3;
/// 48F₇/₂ index in the default scheme.
pub const RYD_F: usize = 4;

/// One atomic level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSpec {
    pub label: String,
    /// Static energy offset added to the rotating-frame diagonal, rad/s.
    pub energy_offset: f64,
    /// Population decay rate to the ground state, rad/s.
    pub decay: f64,
    /// Pure-dephasing Lindblad channel rate, rad/s. A channel of rate c on
    /// level i decays every coherence ρ_ij at an extra (c_i + c_j)/2.
    pub dephasing: f64,
}

/// A dipole-coupled level pair, ordered (upper, lower) by energy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DipoleLink {
    pub upper: usize,
    pub lower: usize,
    /// Reduced dipole moment, C·m.
    pub dipole: f64,
}

/// An RF-addressable transition, ordered (upper, lower) by energy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RfTransition {
    pub upper: usize,
    pub lower: usize,
    /// Transition frequency, Hz.
    pub frequency: f64,
}

/// The atomic level structure: levels, dipole links, RF transitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelScheme {
    pub levels: Vec<LevelSpec>,
    pub dipole_links: Vec<DipoleLink>,
    pub rf_transitions: Vec<RfTransition>,
}

/// One coherent drive on a level pair. `pair` is (upper, lower);
/// `wavenumber` is signed by propagation direction and 0 for RF fields,
/// whose Doppler shift (tens of Hz at thermal speeds) is neglected.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DriveField {
    pub pair: (usize, usize),
    /// Rabi frequency Ω ≥ 0, rad/s.
    pub rabi: f64,
    /// Detuning Δ = ω_drive − ω_transition, rad/s.
    pub detuning: f64,
    /// Signed wavenumber, rad/m.
    pub wavenumber: f64,
}

impl DriveField {
    pub fn new(upper: usize, lower: usize, rabi: f64, detuning: f64, wavenumber: f64) -> Self {
        DriveField { pair: (upper, lower), rabi, detuning, wavenumber }
    }

    pub fn validate(&self, n_levels: usize) -> Result<()> {
        let (u, l) = self.pair;
        if u >= n_levels || l >= n_levels || u == l {
            return Err(Error::config(
                "drive.pair",
                format!("({u}, {l}) is not a valid pair of distinct levels in a {n_levels}-level scheme"),
            ));
        }
        if !(self.rabi >= 0.0) || !self.rabi.is_finite() {
            return Err(Error::config("drive.rabi", "must be ≥ 0 and finite"));
        }
        if !self.detuning.is_finite() || !self.wavenumber.is_finite() {
            return Err(Error::config("drive", "detuning and wavenumber must be finite"));
        }
        Ok(())
    }
}

impl LevelScheme {
    /// The default five-level ⁸⁷Rb ladder. `rydberg_dephasing` is the
    /// collective dephasing channel rate applied to each Rydberg level.
    pub fn rb87_default(rydberg_dephasing: f64) -> Self {
        let level = |label: &str, decay: f64, dephasing: f64| LevelSpec {
            label: label.to_string(),
            energy_offset: 0.0,
            decay,
            dephasing,
        };
        LevelScheme {
            levels: vec![
                level("5S1/2", 0.0, 0.0),
                level("5P3/2", EXCITED_DECAY_DEFAULT, 0.0),
                level("49D5/2", RYDBERG_DECAY_DEFAULT, rydberg_dephasing),
                level("50P3/2", RYDBERG_DECAY_DEFAULT, rydberg_dephasing),
                level("48F7/2", RYDBERG_DECAY_DEFAULT, rydberg_dephasing),
            ],
            dipole_links: vec![
                DipoleLink { upper: EXCITED, lower: GROUND, dipole: PROBE_DIPOLE_DEFAULT },
                DipoleLink { upper: RYD_D, lower: EXCITED, dipole: COUPLING_DIPOLE_DEFAULT },
                DipoleLink { upper: RYD_D, lower: RYD_P, dipole: RF_DIPOLE_50P_DEFAULT },
                DipoleLink { upper: RYD_F, lower: RYD_D, dipole: RF_DIPOLE_48F_DEFAULT },
            ],
            rf_transitions: vec![
                RfTransition { upper: RYD_D, lower: RYD_P, frequency: RF_FREQUENCY_50P },
                RfTransition { upper: RYD_F, lower: RYD_D, frequency: RF_FREQUENCY_48F },
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Levels treated as Rydberg states: every level that appears in an RF
    /// transition pair. Transit broadening is applied to these.
    pub fn rydberg_levels(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .rf_transitions
            .iter()
            .flat_map(|t| [t.upper, t.lower])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Dipole moment registered for the (upper, lower) pair, in either order.
    pub fn dipole_for(&self, upper: usize, lower: usize) -> Result<f64> {
        self.dipole_links
            .iter()
            .find(|d| (d.upper, d.lower) == (upper, lower) || (d.upper, d.lower) == (lower, upper))
            .map(|d| d.dipole)
            .ok_or_else(|| {
                Error::config(
                    "scheme.dipole_links",
                    format!("no dipole registered for level pair ({upper}, {lower})"),
                )
            })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.levels.len();
        if n < 2 {
            return Err(Error::config("scheme.levels", "need at least 2 levels"));
        }
        for (i, level) in self.levels.iter().enumerate() {
            if !(level.decay >= 0.0) || !level.decay.is_finite() {
                return Err(Error::config(
                    format!("scheme.levels[{i}].decay"),
                    "must be ≥ 0 and finite",
                ));
            }
            if !(level.dephasing >= 0.0) || !level.dephasing.is_finite() {
                return Err(Error::config(
                    format!("scheme.levels[{i}].dephasing"),
                    "must be ≥ 0 and finite",
                ));
            }
            if !level.energy_offset.is_finite() {
                return Err(Error::config(
                    format!("scheme.levels[{i}].energy_offset"),
                    "must be finite",
                ));
            }
        }
        let mut seen_pairs: Vec<(usize, usize)> = Vec::new();
        let mut check_pair = |field: String, u: usize, l: usize| -> Result<()> {
            if u >= n || l >= n || u == l {
                return Err(Error::config(
                    field,
                    format!("({u}, {l}) is not a valid pair of distinct levels"),
                ));
            }
            let key = (u.min(l), u.max(l));
            if seen_pairs.contains(&key) {
                return Err(Error::config(field, format!("level pair ({u}, {l}) listed twice")));
            }
            seen_pairs.push(key);
            Ok(())
        };
        for (i, link) in self.dipole_links.iter().enumerate() {
            check_pair(format!("scheme.dipole_links[{i}]"), link.upper, link.lower)?;
            if !(link.dipole > 0.0) || !link.dipole.is_finite() {
                return Err(Error::config(
                    format!("scheme.dipole_links[{i}].dipole"),
                    "must be > 0 and finite",
                ));
            }
        }
        // RF transitions must be distinct among themselves but refer to pairs
        // that also carry a dipole link, so validate them against their own set.
        let mut seen_rf: Vec<(usize, usize)> = Vec::new();
        for (i, t) in self.rf_transitions.iter().enumerate() {
            let field = format!("scheme.rf_transitions[{i}]");
            if t.upper >= n || t.lower >= n || t.upper == t.lower {
                return Err(Error::config(
                    field,
                    format!("({}, {}) is not a valid pair of distinct levels", t.upper, t.lower),
                ));
            }
            let key = (t.upper.min(t.lower), t.upper.max(t.lower));
            if seen_rf.contains(&key) {
                return Err(Error::config(field, "level pair listed twice".to_string()));
            }
            seen_rf.push(key);
            if !(t.frequency > 0.0) || !t.frequency.is_finite() {
                return Err(Error::config(
                    format!("scheme.rf_transitions[{i}].frequency"),
                    "must be > 0 and finite",
                ));
            }
            self.dipole_for(t.upper, t.lower)?;
        }
        Ok(())
    }

    /// Frame offsets δᵢ (rad/s) for the rotating frame defined by `drives`
    /// at atom velocity `velocity`, via a graph walk with the rule
    /// δ_upper = δ_lower − (Δ − k·v). Undriven components sit at δ = 0.
    pub fn frame_offsets(&self, drives: &[DriveField], velocity: f64) -> Result<Vec<f64>> {
        self.walk_offsets(drives, |d| d.detuning - d.wavenumber * velocity)
    }

    /// Velocity slopes sᵢ = ∂δᵢ/∂v (rad/s per m/s) of the frame offsets.
    pub fn frame_velocity_slopes(&self, drives: &[DriveField]) -> Result<Vec<f64>> {
        self.walk_offsets(drives, |d| -d.wavenumber)
    }

    fn walk_offsets(
        &self,
        drives: &[DriveField],
        edge_value: impl Fn(&DriveField) -> f64,
    ) -> Result<Vec<f64>> {
        let n = self.len();
        for d in drives {
            d.validate(n)?;
        }
        let mut offsets = vec![0.0f64; n];
        let mut known = vec![false; n];
        // Scale for judging cycle consistency: largest detuning/Doppler term.
        let scale = drives
            .iter()
            .map(|d| edge_value(d).abs())
            .fold(1.0f64, f64::max);
        // Walk each connected component, seeding unvisited nodes at δ = 0
        // (ground state first, so the probe chain anchors there).
        for seed in 0..n {
            if known[seed] {
                continue;
            }
            known[seed] = true;
            offsets[seed] = 0.0;
            let mut queue = vec![seed];
            while let Some(node) = queue.pop() {
                for d in drives {
                    let (u, l) = d.pair;
                    let (next, value) = if l == node {
                        (u, offsets[node] - edge_value(d))
                    } else if u == node {
                        (l, offsets[node] + edge_value(d))
                    } else {
                        continue;
                    };
                    if known[next] {
                        if (offsets[next] - value).abs() > 1e-6 * scale.max(1.0) {
                            return Err(Error::Model(format!(
                                "inconsistent rotating frame: drive on pair ({u}, {l}) implies \
                                 offset {value:.6e} rad/s for level {next} but the drive graph \
                                 already fixes it at {:.6e} rad/s",
                                offsets[next]
                            )));
                        }
                    } else {
                        known[next] = true;
                        offsets[next] = value;
                        queue.push(next);
                    }
                }
            }
        }
        Ok(offsets)
    }

    /// Rotating-frame Hamiltonian (rad/s) at atom velocity `velocity`:
    /// Hᵢᵢ = energy_offset + δᵢ(v), H_ul = H_lu = Ω/2 per drive.
    pub fn hamiltonian(&self, drives: &[DriveField], velocity: f64) -> Result<DMatrix<Complex64>> {
        let n = self.len();
        let offsets = self.frame_offsets(drives, velocity)?;
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(self.levels[i].energy_offset + offsets[i], 0.0);
        }
        for d in drives {
            let (u, l) = d.pair;
            let half = Complex64::new(0.5 * d.rabi, 0.0);
            h[(u, l)] += half;
            h[(l, u)] += half;
        }
        Ok(h)
    }

    /// Lindblad collapse operators: population decay √Γᵢ |0⟩⟨i| (decay
    /// funnels to the ground state) and pure dephasing √cᵢ |i⟩⟨i|.
    pub fn collapse_operators(&self) -> Vec<DMatrix<Complex64>> {
        let n = self.len();
        let mut ops = Vec::new();
        for (i, level) in self.levels.iter().enumerate() {
            if level.decay > 0.0 && i != GROUND {
                let mut op = DMatrix::<Complex64>::zeros(n, n);
                op[(GROUND, i)] = Complex64::new(level.decay.sqrt(), 0.0);
                ops.push(op);
            }
            if level.dephasing > 0.0 {
                let mut op = DMatrix::<Complex64>::zeros(n, n);
                op[(i, i)] = Complex64::new(level.dephasing.sqrt(), 0.0);
                ops.push(op);
            }
        }
        ops
    }
}

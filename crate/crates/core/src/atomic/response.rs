//! Probe susceptibility and cell transmission.

use crate::atomic::scheme::DriveField;
use crate::atomic::steady::SteadyState;
use crate::atomic::thermal::ThermalEnsemble;
use crate::constants::{EPS0, HBAR};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Tolerance below which a slightly negative Im χ̄ is treated as numerical
/// noise rather than a physics violation.
pub const GAIN_TOLERANCE: f64 = 1e-12;

/// Complex probe susceptibility χ = C·ρ[lower, upper]/Ω_p with
/// C = 2·density·dipole²/(ε₀ħ). `dipole` is the probe-transition dipole, C·m.
///
/// With the Hamiltonian convention of this crate, ρ[lower, upper] is the
/// coherence whose imaginary part is positive on an absorbing transition, so
/// Im χ ≥ 0 up to numerical noise.
pub fn probe_susceptibility(
    state: &SteadyState,
    ensemble: &ThermalEnsemble,
    probe: &DriveField,
    dipole: f64,
) -> Result<Complex64> {
    if probe.rabi == 0.0 {
        return Err(Error::Model(
            "probe Rabi frequency is zero: χ = C·ρ/Ω_p is undefined; use the weak-probe \
             analytic susceptibility instead of dividing by zero"
                .into(),
        ));
    }
    if !(dipole > 0.0) || !dipole.is_finite() {
        return Err(Error::config("probe_dipole", "must be > 0 and finite"));
    }
    let (upper, lower) = probe.pair;
    let prefactor = 2.0 * ensemble.density * dipole * dipole / (EPS0 * HBAR);
    Ok(state.coherence(lower, upper) * Complex64::new(prefactor / probe.rabi, 0.0))
}

/// Beer-Lambert transmission of the double-passed cell:
/// T = exp(−k_p · Im χ̄ · 2·cell_length), k_p = 2π/λ.
pub fn transmission(chi: Complex64, probe_wavelength: f64, cell_length: f64) -> Result<f64> {
    if !(cell_length > 0.0) || !cell_length.is_finite() {
        return Err(Error::config("link.cell_length", "must be > 0 and finite"));
    }
    if !(probe_wavelength > 0.0) || !probe_wavelength.is_finite() {
        return Err(Error::config("probe.wavelength", "must be > 0 and finite"));
    }
    if chi.im < -GAIN_TOLERANCE {
        return Err(Error::Physics(format!(
            "Im χ̄ = {:.3e} < 0: probe gain is unphysical in this passive medium",
            chi.im
        )));
    }
    let k_p = std::f64::consts::TAU / probe_wavelength;
    let t = (-k_p * chi.im.max(0.0) * 2.0 * cell_length).exp();
    Ok(t.min(1.0))
}

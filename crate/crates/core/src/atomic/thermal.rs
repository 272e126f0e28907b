//! Thermal ensemble properties of the vapor.

use crate::constants::{rb_vapor_pressure_pa, KB, M_RB87};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The thermal atom ensemble probed by the beams.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    /// Vapor temperature, K.
    pub temperature: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Number density of the probed isotope, m⁻³.
    pub density: f64,
    /// Gauss-Legendre points per velocity panel (≥ 3).
    pub quadrature_order: usize,
}

impl ThermalEnsemble {
    pub fn new(temperature: f64, mass: f64, density: f64, quadrature_order: usize) -> Result<Self> {
        let ens = ThermalEnsemble { temperature, mass, density, quadrature_order };
        ens.validate()?;
        Ok(ens)
    }

    /// ⁸⁷Rb vapor in equilibrium at `temperature`, with the ⁸⁷Rb fraction of
    /// the total Rb density given by `fraction` (natural abundance 0.2783).
    pub fn rb87_at(temperature: f64, fraction: f64, quadrature_order: usize) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::config("atoms.rb87_fraction", "must be in (0, 1]"));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::config("atoms.temperature", "must be > 0 K and finite"));
        }
        let density = fraction * rb_vapor_pressure_pa(temperature) / (KB * temperature);
        ThermalEnsemble::new(temperature, M_RB87, density, quadrature_order)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::config("atoms.temperature", "must be > 0 K and finite"));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::config("atoms.mass", "must be > 0 and finite"));
        }
        if !(self.density > 0.0) || !self.density.is_finite() {
            return Err(Error::config("atoms.density", "must be > 0 and finite"));
        }
        if self.quadrature_order < 3 {
            return Err(Error::config("quadrature.order", "must be ≥ 3"));
        }
        Ok(())
    }

    /// 1-D velocity standard deviation σ_v = √(k_B T / m), m/s.
    pub fn sigma_v(&self) -> f64 {
        (KB * self.temperature / self.mass).sqrt()
    }

    /// Mean thermal speed v̄ = √(8 k_B T / (π m)), m/s.
    pub fn mean_speed(&self) -> f64 {
        (8.0 * KB * self.temperature / (std::f64::consts::PI * self.mass)).sqrt()
    }

    /// Normalized 1-D Maxwell-Boltzmann density at velocity `v`, s/m.
    pub fn velocity_density(&self, v: f64) -> f64 {
        let s = self.sigma_v();
        (-0.5 * (v / s) * (v / s)).exp() / (s * (std::f64::consts::TAU).sqrt())
    }
}

/// Transit-time broadening Γ_t = √2 · v̄ / d for beam 1/e² diameter `d`,
/// rad/s. Added as extra dephasing on the Rydberg coherences.
pub fn transit_broadening(beam_diameter: f64, ensemble: &ThermalEnsemble) -> Result<f64> {
    if !(beam_diameter > 0.0) || !beam_diameter.is_finite() {
        return Err(Error::config("beam_diameter", "must be > 0 and finite"));
    }
    Ok(std::f64::consts::SQRT_2 * ensemble.mean_speed() / beam_diameter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn room() -> ThermalEnsemble {
        ThermalEnsemble::rb87_at(293.15, 0.2783, 16).unwrap()
    }

    #[test]
    fn room_temperature_speeds_are_rubidium_like() {
        let ens = room();
        // σ_v = √(kT/m) ≈ 167 m/s, v̄ = √(8kT/πm) ≈ 267 m/s for ⁸⁷Rb at 293 K.
        assert!((ens.sigma_v() - 167.0).abs() < 2.0, "σ_v = {}", ens.sigma_v());
        assert!((ens.mean_speed() - 267.0).abs() < 3.0, "v̄ = {}", ens.mean_speed());
        assert_relative_eq!(
            ens.mean_speed() / ens.sigma_v(),
            (8.0 / std::f64::consts::PI).sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn transit_broadening_at_six_millimetres_is_ten_kilohertz_scale() {
        // Γ_t = √2 v̄/d ≈ 2π × 10 kHz for d = 6 mm — below 2π × 100 kHz.
        let g = transit_broadening(6e-3, &room()).unwrap();
        assert!(g > TAU * 5e3 && g < TAU * 20e3, "Γ_t = 2π × {} kHz", g / TAU / 1e3);
        assert!(g < TAU * 100e3);
    }

    #[test]
    fn transit_broadening_scales_inversely_with_diameter() {
        let ens = room();
        let g1 = transit_broadening(3e-3, &ens).unwrap();
        let g2 = transit_broadening(6e-3, &ens).unwrap();
        assert_relative_eq!(g1, 2.0 * g2, max_relative = 1e-12);
    }

    #[test]
    fn transit_broadening_vanishes_at_zero_temperature_limit() {
        let mut ens = room();
        ens.temperature = 1e-12;
        let g = transit_broadening(6e-3, &ens).unwrap();
        assert!(g < 1e-2, "Γ_t should vanish as T → 0, got {g}");
    }

    #[test]
    fn velocity_density_is_normalized() {
        let ens = room();
        // Trapezoid over ±8σ.
        let s = ens.sigma_v();
        let n = 4000;
        let h = 16.0 * s / n as f64;
        let sum: f64 = (0..=n)
            .map(|i| {
                let v = -8.0 * s + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * ens.velocity_density(v)
            })
            .sum::<f64>()
            * h;
        assert_relative_eq!(sum, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ThermalEnsemble::new(-1.0, M_RB87, 1e15, 16).is_err());
        assert!(ThermalEnsemble::new(293.0, M_RB87, 0.0, 16).is_err());
        assert!(ThermalEnsemble::new(293.0, M_RB87, 1e15, 2).is_err());
        assert!(ThermalEnsemble::rb87_at(293.0, 0.0, 16).is_err());
        assert!(transit_broadening(0.0, &room()).is_err());
    }
}

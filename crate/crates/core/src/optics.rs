//! Gaussian beam propagation.
//!
//! TEM₀₀ beams in the paraxial limit:
//!
//! - Rayleigh length      z_R = π w₀² / λ
//! - 1/e² radius          w(z) = w₀ √(1 + ((z − z₀)/z_R)²)
//! - encircled power      P(a)/P = 1 − exp(−2 a² / w²)  (centered circular aperture)
//! - on-axis field        E₀(z) = √(4 P / (π w(z)² c ε₀)),  Ω = d·E₀/ħ
//!
//! All distances are measured along the propagation axis from the base station;
//! `waist_position` lets a beam focus up- or downrange of it.

use crate::constants::{C0, EPS0, HBAR};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A monochromatic TEM₀₀ beam. `waist_radius` is the 1/e² intensity *radius*;
/// scenario configs speak in 1/e² diameters and convert on assembly.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaussianBeam {
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// 1/e² intensity radius at the waist, m.
    pub waist_radius: f64,
    /// Position of the waist along the propagation axis, m.
    pub waist_position: f64,
    /// Optical power carried by the beam, W.
    pub power: f64,
}

impl GaussianBeam {
    pub fn new(wavelength: f64, waist_radius: f64, waist_position: f64, power: f64) -> Result<Self> {
        let beam = GaussianBeam { wavelength, waist_radius, waist_position, power };
        beam.validate()?;
        Ok(beam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(Error::config("beam.wavelength", "must be a positive finite length"));
        }
        if !(self.waist_radius > 0.0) || !self.waist_radius.is_finite() {
            return Err(Error::config("beam.waist_radius", "must be a positive finite length"));
        }
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return Err(Error::config("beam.power", "must be a non-negative finite power"));
        }
        if !self.waist_position.is_finite() {
            return Err(Error::config("beam.waist_position", "must be finite"));
        }
        Ok(())
    }

    /// Signed vacuum wavenumber magnitude 2π/λ, rad/m.
    pub fn wavenumber(&self) -> f64 {
        std::f64::consts::TAU / self.wavelength
    }
}

/// Rayleigh length z_R = π w₀²/λ, m.
pub fn rayleigh_length(beam: &GaussianBeam) -> f64 {
    std::f64::consts::PI * beam.waist_radius * beam.waist_radius / beam.wavelength
}

/// 1/e² intensity radius at axial position `z`, m.
pub fn radius_at(beam: &GaussianBeam, z: f64) -> f64 {
    let zr = rayleigh_length(beam);
    let u = (z - beam.waist_position) / zr;
    beam.waist_radius * (1.0 + u * u).sqrt()
}

/// Fraction of beam power passing a centered circular aperture of radius
/// `aperture_radius` placed at `z`: 1 − exp(−2a²/w²).
pub fn fraction_through_aperture(beam: &GaussianBeam, z: f64, aperture_radius: f64) -> Result<f64> {
    if !(aperture_radius > 0.0) || !aperture_radius.is_finite() {
        return Err(Error::config("aperture_radius", "must be a positive finite length"));
    }
    let w = radius_at(beam, z);
    Ok(1.0 - (-2.0 * aperture_radius * aperture_radius / (w * w)).exp())
}

/// On-axis Rabi frequency at `z` for a transition dipole `dipole` (C·m), rad/s.
///
/// `intensity_factor` scales the on-axis intensity (mode mismatch, polarization
/// projection, window losses before the cell); 1.0 is the ideal TEM₀₀ value.
pub fn rabi_from_power(beam: &GaussianBeam, z: f64, dipole: f64, intensity_factor: f64) -> Result<f64> {
    if !(dipole > 0.0) || !dipole.is_finite() {
        return Err(Error::config("dipole", "must be a positive finite dipole moment"));
    }
    if !(intensity_factor > 0.0) || !intensity_factor.is_finite() {
        return Err(Error::config("intensity_factor", "must be positive and finite"));
    }
    let w = radius_at(beam, z);
    let e_field =
        (4.0 * beam.power * intensity_factor / (std::f64::consts::PI * w * w * C0 * EPS0)).sqrt();
    Ok(dipole * e_field / HBAR)
}

/// Waist recovered from sampled radii: least-squares fit of w² = a z² + b z + c
/// (exact for an ideal beam), returning (waist_radius, waist_position).
///
/// Needs at least three samples at distinct positions that bracket enough
/// curvature to determine the quadratic.
pub fn fit_beam_profile(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 3 {
        return Err(Error::Model("beam profile fit needs at least 3 (z, w) samples".into()));
    }
    // Normal equations for the quadratic in z; sums of z^k up to k = 4.
    let (mut s0, mut s1, mut s2, mut s3, mut s4) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    let (mut t0, mut t1, mut t2) = (0.0f64, 0.0, 0.0);
    for &(z, w) in samples {
        let w2 = w * w;
        s0 += 1.0;
        s1 += z;
        s2 += z * z;
        s3 += z * z * z;
        s4 += z * z * z * z;
        t0 += w2;
        t1 += w2 * z;
        t2 += w2 * z * z;
    }
    let m = nalgebra::Matrix3::new(s4, s3, s2, s3, s2, s1, s2, s1, s0);
    let rhs = nalgebra::Vector3::new(t2, t1, t0);
    let sol = m.lu().solve(&rhs).ok_or_else(|| {
        Error::numerical("beam profile fit is degenerate (collinear or repeated samples)", 0.0)
    })?;
    let (a, b, c) = (sol[0], sol[1], sol[2]);
    if a <= 0.0 {
        return Err(Error::numerical("beam profile fit has non-positive curvature", a));
    }
    let z0 = -b / (2.0 * a);
    let w0_sq = c - a * z0 * z0;
    if w0_sq <= 0.0 {
        return Err(Error::numerical("beam profile fit gives non-positive waist", w0_sq));
    }
    Ok((w0_sq.sqrt(), z0))
}

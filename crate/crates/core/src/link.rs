//! Free-space link budget for the retroreflected probe/coupling pair: beam
//! sizes and Rabi frequencies at the vapor cell versus distance, the probe
//! power returned to the detector through the loss stack, and geometric
//! overlap diagnostics.
//!
//! Geometry along the propagation axis (waists near the base station at z≈0):
//! the cell front window sits at z = L, the cell far end and the
//! retroreflector at z = L + cell_length, the cell exit on the return pass at
//! z = L + 2·cell_length, and the detector at z = 2·L + 2·cell_length (the
//! corner cube preserves divergence, so the return pass propagates as a
//! continuation of the same Gaussian).

use serde::{Deserialize, Serialize};

use crate::atomic::{COUPLING_DIPOLE_DEFAULT, PROBE_DIPOLE_DEFAULT};
use crate::error::{Error, Result};
use crate::optics::{fraction_through_aperture, rabi_from_power, radius_at, GaussianBeam};

/// Fresnel transmittance of one uncoated glass surface (n ≈ 1.5) at normal
/// incidence.
pub const SURFACE_TRANSMITTANCE_DEFAULT: f64 = 0.96;
/// Protected-metal corner-cube reflectance.
pub const REFLECTOR_REFLECTANCE_DEFAULT: f64 = 0.92;
/// Single multiplicative factor for losses the surface/reflector/clipping
/// stack does not model (alkali adsorption on the cell walls, dust, residual
/// misalignment). Back-solved so the default lossy link lands at exactly 55%
/// total probe transmission efficiency at 30 m.
pub const CONTAMINATION_DEFAULT: f64 = 0.8290800012284845;
/// Anti-reflection-coated surface transmittance for the upgraded scenario.
pub const COATED_SURFACE_TRANSMITTANCE: f64 = 0.995;
/// High-grade coated retroreflector reflectance for the upgraded scenario.
pub const COATED_REFLECTOR_REFLECTANCE: f64 = 0.97;

/// Default lateral offset between the outgoing and returning beam pair at the
/// base station, m.
pub const BEAM_SEPARATION_DEFAULT: f64 = 2.5e-3;
/// Default probe waist radius (half of the 2.5 mm 1/e² diameter), m.
pub const PROBE_WAIST_DEFAULT: f64 = 1.25e-3;
/// Default coupling waist radius (half of the 6 mm 1/e² diameter), m.
pub const COUPLING_WAIST_DEFAULT: f64 = 3.0e-3;

/// Everything geometric about one base-station-to-sensing-unit link.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Base station → sensing unit distance L, m.
    pub distance: f64,
    /// Vapor cell length, m.
    pub cell_length: f64,
    /// Cell bore (clear inner) diameter, m.
    pub cell_bore_diameter: f64,
    /// Retroreflector clear-aperture diameter, m.
    pub reflector_aperture: f64,
    /// Detector collection aperture radius, m.
    pub detector_aperture_radius: f64,
    /// Per-surface transmittance, fraction in (0, 1].
    pub surface_transmittance: f64,
    /// Retroreflector reflectance, fraction in (0, 1].
    pub reflector_reflectance: f64,
    /// Unmodeled-loss factor, fraction in (0, 1]. See [`CONTAMINATION_DEFAULT`].
    pub contamination: f64,
    /// Lateral offset of the outgoing vs returning pair at the base station, m.
    pub beam_separation: f64,
}

impl LinkGeometry {
    /// The default lossy link at the given distance.
    pub fn at_distance(distance: f64) -> Self {
        LinkGeometry {
            distance,
            cell_length: 0.150,
            cell_bore_diameter: 0.027,
            reflector_aperture: 0.0254,
            detector_aperture_radius: 0.0254,
            surface_transmittance: SURFACE_TRANSMITTANCE_DEFAULT,
            reflector_reflectance: REFLECTOR_REFLECTANCE_DEFAULT,
            contamination: CONTAMINATION_DEFAULT,
            beam_separation: BEAM_SEPARATION_DEFAULT,
        }
    }

    /// The anti-reflection-coated, clean-cell variant of the same geometry.
    pub fn coated(mut self) -> Self {
        self.surface_transmittance = COATED_SURFACE_TRANSMITTANCE;
        self.reflector_reflectance = COATED_REFLECTOR_REFLECTANCE;
        self.contamination = 1.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("link.distance", self.distance),
            ("link.cell_length", self.cell_length),
            ("link.cell_bore_diameter", self.cell_bore_diameter),
            ("link.reflector_aperture", self.reflector_aperture),
            ("link.detector_aperture_radius", self.detector_aperture_radius),
        ];
        for (field, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::config(field, "must be positive and finite"));
            }
        }
        let fractions = [
            ("link.surface_transmittance", self.surface_transmittance),
            ("link.reflector_reflectance", self.reflector_reflectance),
            ("link.contamination", self.contamination),
        ];
        for (field, value) in fractions {
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::config(field, "must be a fraction in (0, 1]"));
            }
        }
        if !(self.beam_separation >= 0.0) || !self.beam_separation.is_finite() {
            return Err(Error::config("link.beam_separation", "must be ≥ 0 and finite"));
        }
        if self.cell_length >= self.distance {
            return Err(Error::config(
                "link.cell_length",
                format!(
                    "cell length {} m must be smaller than the link distance {} m",
                    self.cell_length, self.distance
                ),
            ));
        }
        Ok(())
    }

    /// z of the cell center on the outbound pass.
    pub fn cell_center(&self) -> f64 {
        self.distance + 0.5 * self.cell_length
    }

    /// z of the cell far end / reflector plane on the outbound pass.
    pub fn reflector_plane(&self) -> f64 {
        self.distance + self.cell_length
    }

    /// Total propagation distance when the returning beam exits the cell.
    pub fn cell_exit(&self) -> f64 {
        self.distance + 2.0 * self.cell_length
    }

    /// Total propagation distance at the detector (full round trip).
    pub fn detector_plane(&self) -> f64 {
        2.0 * self.distance + 2.0 * self.cell_length
    }
}

/// The probe/coupling beam pair with their transition dipoles and the shared
/// effective-intensity factor used for power → Rabi conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpticalPair {
    pub probe: GaussianBeam,
    pub coupling: GaussianBeam,
    /// Probe-transition reduced dipole, C·m.
    pub probe_dipole: f64,
    /// Coupling-transition reduced dipole, C·m.
    pub coupling_dipole: f64,
    /// On-axis peak intensity multiplier (1.0 = peak, < 1 emulates radial
    /// averaging over the beam profile).
    pub intensity_factor: f64,
}

impl OpticalPair {
    /// Default pair: 780 nm probe with a 2.5 mm 1/e² waist diameter and
    /// 480 nm coupling with a 6 mm 1/e² waist diameter, both waists at the
    /// base station.
    pub fn rb87_default(probe_power: f64, coupling_power: f64) -> Result<Self> {
        Ok(OpticalPair {
            probe: GaussianBeam::new(780e-9, PROBE_WAIST_DEFAULT, 0.0, probe_power)?,
            coupling: GaussianBeam::new(480e-9, COUPLING_WAIST_DEFAULT, 0.0, coupling_power)?,
            probe_dipole: PROBE_DIPOLE_DEFAULT,
            coupling_dipole: COUPLING_DIPOLE_DEFAULT,
            intensity_factor: 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.probe.validate()?;
        self.coupling.validate()?;
        if !(self.probe_dipole > 0.0) || !(self.coupling_dipole > 0.0) {
            return Err(Error::config("beams.dipole", "dipole moments must be positive"));
        }
        if !(self.intensity_factor > 0.0 && self.intensity_factor <= 1.0) {
            return Err(Error::config("beams.intensity_factor", "must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Per-channel factors of the probe round trip; the product of every field is
/// the total efficiency.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// (surface transmittance)⁸: four glass surfaces per pass, two passes.
    pub surfaces: f64,
    /// Retroreflector reflectance.
    pub reflector: f64,
    /// Unmodeled-loss factor.
    pub contamination: f64,
    /// Bore clipping entering the cell, evaluated at the far (widest) end.
    pub clip_bore_in: f64,
    /// Reflector aperture clipping.
    pub clip_reflector: f64,
    /// Bore clipping exiting the cell on the return pass.
    pub clip_bore_out: f64,
    /// Detector aperture clipping after the full round trip.
    pub clip_detector: f64,
}

impl LossBreakdown {
    /// Product of the four geometric clipping fractions.
    pub fn clipping(&self) -> f64 {
        self.clip_bore_in * self.clip_reflector * self.clip_bore_out * self.clip_detector
    }

    /// Total efficiency: product of every channel.
    pub fn total(&self) -> f64 {
        self.surfaces * self.reflector * self.contamination * self.clipping()
    }
}

/// Everything the rest of the pipeline needs to know about one link distance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinkBudgetReport {
    /// Probe 1/e² diameter at the cell center, m.
    pub probe_diameter_at_cell: f64,
    /// Coupling 1/e² diameter at the cell center, m.
    pub coupling_diameter_at_cell: f64,
    /// On-axis probe Rabi frequency at the cell center, rad/s.
    pub probe_rabi_at_cell: f64,
    /// On-axis coupling Rabi frequency at the cell center, rad/s.
    pub coupling_rabi_at_cell: f64,
    /// Probe power arriving back at the detector, W.
    pub returned_probe_power: f64,
    /// returned_probe_power / transmitted probe power.
    pub efficiency: f64,
    /// Per-channel loss factors.
    pub losses: LossBreakdown,
    /// Probe 1/e² diameter exceeds (bore − beam separation) at the cell.
    pub probe_overlaps_bore: bool,
    /// Probe 1/e² diameter exceeds (reflector aperture − beam separation).
    pub probe_overlaps_reflector: bool,
    /// Coupling 1/e² diameter exceeds (bore − beam separation) at the cell.
    pub coupling_overlaps_bore: bool,
    /// Coupling 1/e² diameter exceeds (reflector aperture − beam separation).
    pub coupling_overlaps_reflector: bool,
}

/// Propagate the pair to the sensing unit and stack every probe loss of the
/// retroreflected round trip. Aperture overruns set report flags instead of
/// failing: the link degrades softly.
pub fn evaluate_link(geometry: &LinkGeometry, pair: &OpticalPair) -> Result<LinkBudgetReport> {
    geometry.validate()?;
    pair.validate()?;

    let z_cell = geometry.cell_center();
    let z_refl = geometry.reflector_plane();
    let z_exit = geometry.cell_exit();
    let z_det = geometry.detector_plane();
    let bore_radius = 0.5 * geometry.cell_bore_diameter;
    let reflector_radius = 0.5 * geometry.reflector_aperture;

    let losses = LossBreakdown {
        surfaces: geometry.surface_transmittance.powi(8),
        reflector: geometry.reflector_reflectance,
        contamination: geometry.contamination,
        clip_bore_in: fraction_through_aperture(&pair.probe, z_refl, bore_radius)?,
        clip_reflector: fraction_through_aperture(&pair.probe, z_refl, reflector_radius)?,
        clip_bore_out: fraction_through_aperture(&pair.probe, z_exit, bore_radius)?,
        clip_detector: fraction_through_aperture(&pair.probe, z_det, geometry.detector_aperture_radius)?,
    };
    let efficiency = losses.total();

    // Overlap flags judged at the widest in-cell plane (the reflector end),
    // less the lateral room taken by the separated return beam.
    let clear_bore = geometry.cell_bore_diameter - geometry.beam_separation;
    let clear_reflector = geometry.reflector_aperture - geometry.beam_separation;
    let probe_diameter_wide = 2.0 * radius_at(&pair.probe, z_refl);
    let coupling_diameter_wide = 2.0 * radius_at(&pair.coupling, z_refl);

    Ok(LinkBudgetReport {
        probe_diameter_at_cell: 2.0 * radius_at(&pair.probe, z_cell),
        coupling_diameter_at_cell: 2.0 * radius_at(&pair.coupling, z_cell),
        probe_rabi_at_cell: rabi_from_power(
            &pair.probe,
            z_cell,
            pair.probe_dipole,
            pair.intensity_factor,
        )?,
        coupling_rabi_at_cell: rabi_from_power(
            &pair.coupling,
            z_cell,
            pair.coupling_dipole,
            pair.intensity_factor,
        )?,
        returned_probe_power: pair.probe.power * efficiency,
        efficiency,
        losses,
        probe_overlaps_bore: probe_diameter_wide > clear_bore,
        probe_overlaps_reflector: probe_diameter_wide > clear_reflector,
        coupling_overlaps_bore: coupling_diameter_wide > clear_bore,
        coupling_overlaps_reflector: coupling_diameter_wide > clear_reflector,
    })
}

/// Transmitted probe power that keeps the on-axis Ω_p at the cell center
/// equal to its value at `reference_distance` with the beam's own power:
/// P(L) = P_ref · (w(z_cell(L)) / w(z_cell(L_ref)))².
pub fn probe_power_for_constant_rabi(
    geometry: &LinkGeometry,
    probe: &GaussianBeam,
    reference_distance: f64,
) -> Result<f64> {
    if !(reference_distance > 0.0) {
        return Err(Error::config("reference_distance", "must be positive"));
    }
    probe.validate()?;
    let w_here = radius_at(probe, geometry.cell_center());
    let w_ref = radius_at(probe, reference_distance + 0.5 * geometry.cell_length);
    Ok(probe.power * (w_here / w_ref).powi(2))
}

/// Clearance of one beam against the sensing-unit apertures, judged at the
/// widest in-cell plane (diameters and margins in m; positive margin = clear).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BeamClearance {
    pub diameter_at_cell: f64,
    pub bore_margin: f64,
    pub reflector_margin: f64,
}

impl BeamClearance {
    pub fn clears_bore(&self) -> bool {
        self.bore_margin > 0.0
    }

    pub fn clears_reflector(&self) -> bool {
        self.reflector_margin > 0.0
    }
}

/// Geometric overlap diagnostics for one link distance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OverlapDiagnostics {
    /// Distance (m) beyond which the probe 1/e² diameter exceeds the coupling
    /// diameter; `None` when it never does.
    pub crossover_distance: Option<f64>,
    pub probe: BeamClearance,
    pub coupling: BeamClearance,
}

/// Report the probe/coupling diameter crossover and per-beam aperture margins
/// at the configured distance.
pub fn overlap_diagnostics(
    geometry: &LinkGeometry,
    probe: &GaussianBeam,
    coupling: &GaussianBeam,
) -> Result<OverlapDiagnostics> {
    geometry.validate()?;
    probe.validate()?;
    coupling.validate()?;

    let z_refl = geometry.reflector_plane();
    let clearance = |beam: &GaussianBeam| BeamClearance {
        diameter_at_cell: 2.0 * radius_at(beam, z_refl),
        bore_margin: geometry.cell_bore_diameter
            - geometry.beam_separation
            - 2.0 * radius_at(beam, z_refl),
        reflector_margin: geometry.reflector_aperture
            - geometry.beam_separation
            - 2.0 * radius_at(beam, z_refl),
    };

    Ok(OverlapDiagnostics {
        crossover_distance: diameter_crossover(probe, coupling),
        probe: clearance(probe),
        coupling: clearance(coupling),
    })
}

/// Smallest z ≥ 0 beyond which the first beam's diameter exceeds the
/// second's. w²(z) is quadratic in z, so the crossings are the roots of a
/// quadratic; the crossover is the root where the difference turns positive.
fn diameter_crossover(probe: &GaussianBeam, coupling: &GaussianBeam) -> Option<f64> {
    let divergence_sq =
        |b: &GaussianBeam| (b.wavelength / (std::f64::consts::PI * b.waist_radius)).powi(2);
    let (ap, ac) = (divergence_sq(probe), divergence_sq(coupling));
    let (zp, zc) = (probe.waist_position, coupling.waist_position);
    // w_p²(z) − w_c²(z) = A z² + B z + C
    let a = ap - ac;
    let b = -2.0 * (ap * zp - ac * zc);
    let c = ap * zp * zp - ac * zc * zc + probe.waist_radius.powi(2)
        - coupling.waist_radius.powi(2);

    let turns_positive = |z: f64| 2.0 * a * z + b > 0.0;
    if a.abs() < 1e-300 {
        // Equal divergence: at most one linear crossing.
        if b.abs() < 1e-300 {
            return None;
        }
        let z = -c / b;
        return (z >= 0.0 && b > 0.0).then_some(z);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let mut roots = [(-b - sqrt_disc) / (2.0 * a), (-b + sqrt_disc) / (2.0 * a)];
    roots.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
    roots.into_iter().find(|&z| z >= 0.0 && turns_positive(z))
}

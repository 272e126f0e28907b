//! Steady-state solution of the Lindblad generator.
//!
//! L is singular by construction (trace conservation), so the first row is
//! replaced by the trace constraint Σᵢ ρᵢᵢ = 1 and the system solved by dense
//! LU — at N ≤ 6 levels the system is at most 36×36. The residual
//! ‖L·vec(ρ)‖₂ / ‖L‖_F is computed against the *original* generator and every
//! returned state is gated on Hermiticity, unit trace, positivity, and
//! residual tolerances.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Residual gate for an acceptable steady state.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;
/// Hermiticity gate ‖ρ − ρ†‖_max. Strong dressing at extreme Doppler
/// velocities conditions the system badly enough that round-off reaches a
/// few 1e-12; the gate flags broken solves, not ten-digit ones.
pub const HERMITICITY_TOLERANCE: f64 = 1e-11;
/// Unit-trace gate |tr ρ − 1| (same headroom rationale as Hermiticity).
pub const TRACE_TOLERANCE: f64 = 1e-11;
/// Positivity gate: eigenvalues ≥ −this.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// A steady-state density matrix and the solver residual that produced it.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// N×N density matrix.
    pub rho: DMatrix<Complex64>,
    /// ‖L·vec(ρ)‖₂ / ‖L‖_F, dimensionless.
    pub residual: f64,
}

impl SteadyState {
    /// Probe-relevant coherence ρ[lower, upper] (row `lower`, column `upper`).
    /// With the H convention of this crate, Im ρ[0, 1] > 0 on an absorbing
    /// transition, which yields Im χ ≥ 0.
    pub fn coherence(&self, lower: usize, upper: usize) -> Complex64 {
        self.rho[(lower, upper)]
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho[(level, level)].re
    }
}

/// Solve Lρ = 0 with the trace row replacing the first equation.
pub fn steady_state(l: &DMatrix<Complex64>) -> Result<SteadyState> {
    let dim = l.nrows();
    let n = (dim as f64).sqrt().round() as usize;
    if n * n != dim || l.ncols() != dim {
        return Err(Error::Model(format!(
            "Liouvillian must be N²×N² square; got {}×{}",
            l.nrows(),
            l.ncols()
        )));
    }
    let mut system = l.clone();
    for c in 0..dim {
        system[(0, c)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..n {
        system[(0, i * n + i)] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = DVector::<Complex64>::zeros(dim);
    rhs[0] = Complex64::new(1.0, 0.0);

    let lu = system.lu();
    let rho_vec = lu.solve(&rhs).ok_or_else(|| {
        Error::numerical("steady-state system is singular after trace-row substitution", f64::INFINITY)
    })?;

    // Residual against the original generator, normalized by its Frobenius norm.
    let l_norm = l.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let residual = if l_norm > 0.0 {
        (l * &rho_vec).norm() / l_norm
    } else {
        0.0
    };
    if !residual.is_finite() || residual > RESIDUAL_TOLERANCE {
        return Err(Error::numerical(
            format!("steady-state residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:.0e} (ill-conditioned system)"),
            residual,
        ));
    }

    let mut rho = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            rho[(i, j)] = rho_vec[i * n + j];
        }
    }

    let herm = (&rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > HERMITICITY_TOLERANCE {
        return Err(Error::numerical(
            format!("steady state violates Hermiticity: ‖ρ − ρ†‖_max = {herm:.3e}"),
            herm,
        ));
    }
    let trace_err = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    if trace_err > TRACE_TOLERANCE {
        return Err(Error::numerical(
            format!("steady state violates unit trace: |tr ρ − 1| = {trace_err:.3e}"),
            trace_err,
        ));
    }
    // ρ is Hermitian within tolerance; symmetrize before the eigensolve so the
    // positivity check is not polluted by last-digit asymmetry.
    let herm_part = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig_min = herm_part
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    if eig_min < -POSITIVITY_TOLERANCE {
        return Err(Error::numerical(
            format!("steady state violates positivity: min eigenvalue = {eig_min:.3e}"),
            eig_min,
        ));
    }

    Ok(SteadyState { rho, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::liouvillian::build_liouvillian;
    use crate::atomic::scheme::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn two_level(gamma: f64) -> LevelScheme {
        LevelScheme {
            levels: vec![
                LevelSpec { label: "g".into(), energy_offset: 0.0, decay: 0.0, dephasing: 0.0 },
                LevelSpec { label: "e".into(), energy_offset: 0.0, decay: gamma, dephasing: 0.0 },
            ],
            dipole_links: vec![DipoleLink { upper: 1, lower: 0, dipole: 1e-29 }],
            rf_transitions: vec![],
        }
    }

    #[test]
    fn undriven_atom_relaxes_to_the_ground_state() {
        let scheme = LevelScheme::rb87_default(TAU * 1e6);
        let l = build_liouvillian(&scheme, &[], 0.0).unwrap();
        let ss = steady_state(&l).unwrap();
        assert_relative_eq!(ss.population(GROUND), 1.0, max_relative = 1e-10);
        for lvl in 1..scheme.len() {
            assert!(ss.population(lvl).abs() < 1e-12);
        }
    }

    #[test]
    fn two_level_population_matches_the_closed_form() {
        // Oracle: ρ_ee = (Ω²/4)/(Δ² + Γ²/4 + Ω²/2).
        let gamma = TAU * 6.07e6;
        let scheme = two_level(gamma);
        for &(om, delta) in &[
            (TAU * 1e6, 0.0),
            (TAU * 10e6, 0.0),
            (TAU * 3e6, TAU * 4e6),
            (TAU * 40e6, -TAU * 2.5e6),
        ] {
            let drives = [DriveField::new(1, 0, om, delta, 0.0)];
            let l = build_liouvillian(&scheme, &drives, 0.0).unwrap();
            let ss = steady_state(&l).unwrap();
            let oracle = (om * om / 4.0) / (delta * delta + gamma * gamma / 4.0 + om * om / 2.0);
            assert_relative_eq!(ss.population(1), oracle, max_relative = 1e-9);
        }
    }

    #[test]
    fn strong_resonant_drive_saturates_to_half() {
        let gamma = TAU * 6.07e6;
        let scheme = two_level(gamma);
        let drives = [DriveField::new(1, 0, TAU * 5e9, 0.0, 0.0)];
        let l = build_liouvillian(&scheme, &drives, 0.0).unwrap();
        let ss = steady_state(&l).unwrap();
        assert_relative_eq!(ss.population(1), 0.5, max_relative = 1e-5);
    }

    #[test]
    fn ladder_eit_dips_probe_absorption_on_two_photon_resonance() {
        // Weak probe + resonant coupling: Im ρ01 collapses at Δp = 0 relative
        // to the coupling-free value (EIT), with no dephasing.
        let scheme3 = LevelScheme {
            levels: vec![
                LevelSpec { label: "g".into(), energy_offset: 0.0, decay: 0.0, dephasing: 0.0 },
                LevelSpec {
                    label: "e".into(),
                    energy_offset: 0.0,
                    decay: EXCITED_DECAY_DEFAULT,
                    dephasing: 0.0,
                },
                LevelSpec {
                    label: "r".into(),
                    energy_offset: 0.0,
                    decay: RYDBERG_DECAY_DEFAULT,
                    dephasing: 0.0,
                },
            ],
            dipole_links: vec![
                DipoleLink { upper: 1, lower: 0, dipole: PROBE_DIPOLE_DEFAULT },
                DipoleLink { upper: 2, lower: 1, dipole: COUPLING_DIPOLE_DEFAULT },
            ],
            rf_transitions: vec![],
        };
        let om_p = TAU * 10e3;
        let om_c = TAU * 4e6;
        let with_coupling = [
            DriveField::new(1, 0, om_p, 0.0, 0.0),
            DriveField::new(2, 1, om_c, 0.0, 0.0),
        ];
        let without = [DriveField::new(1, 0, om_p, 0.0, 0.0)];
        let im_with = steady_state(&build_liouvillian(&scheme3, &with_coupling, 0.0).unwrap())
            .unwrap()
            .coherence(0, 1)
            .im;
        let im_without = steady_state(&build_liouvillian(&scheme3, &without, 0.0).unwrap())
            .unwrap()
            .coherence(0, 1)
            .im;
        assert!(im_with > 0.0 && im_without > 0.0, "absorption sign convention");
        assert!(
            im_with < 0.02 * im_without,
            "EIT should suppress absorption: {im_with:.3e} vs {im_without:.3e}"
        );
    }

    #[test]
    fn weak_probe_coherence_matches_the_analytic_eit_formula() {
        // Independent oracle for the 3-level ladder at weak probe, derived by
        // adiabatic elimination in this crate's frame convention
        // (δ₁ = −Δp, δ₂ = −Δp−Δc):
        //   ρ01 = (iΩp/2) / (γ01 + iΔp + (Ωc²/4)/(γ02 + i(Δp + Δc)))
        // with γ01 = Γe/2 and γ02 = (Γr + c_r)/2.
        let gamma_e = EXCITED_DECAY_DEFAULT;
        let gamma_r = TAU * 2e3;
        let c_r = TAU * 3e6;
        let scheme3 = LevelScheme {
            levels: vec![
                LevelSpec { label: "g".into(), energy_offset: 0.0, decay: 0.0, dephasing: 0.0 },
                LevelSpec { label: "e".into(), energy_offset: 0.0, decay: gamma_e, dephasing: 0.0 },
                LevelSpec { label: "r".into(), energy_offset: 0.0, decay: gamma_r, dephasing: c_r },
            ],
            dipole_links: vec![
                DipoleLink { upper: 1, lower: 0, dipole: PROBE_DIPOLE_DEFAULT },
                DipoleLink { upper: 2, lower: 1, dipole: COUPLING_DIPOLE_DEFAULT },
            ],
            rf_transitions: vec![],
        };
        let om_p = TAU * 1e3;
        let om_c = TAU * 3e6;
        for &(dp, dc) in &[(0.0, 0.0), (TAU * 2e6, 0.0), (TAU * 1e6, -TAU * 3e6), (-TAU * 5e6, TAU * 2e6)] {
            let drives = [
                DriveField::new(1, 0, om_p, dp, 0.0),
                DriveField::new(2, 1, om_c, dc, 0.0),
            ];
            let ss = steady_state(&build_liouvillian(&scheme3, &drives, 0.0).unwrap()).unwrap();
            let g01 = Complex64::new(gamma_e / 2.0, dp);
            let g02 = Complex64::new((gamma_r + c_r) / 2.0, dp + dc);
            let oracle = Complex64::new(0.0, om_p / 2.0) / (g01 + Complex64::new(om_c * om_c / 4.0, 0.0) / g02);
            let got = ss.coherence(0, 1);
            assert!(
                (got - oracle).norm() < 1e-4 * oracle.norm(),
                "Δp={dp:.3e} Δc={dc:.3e}: got {got} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn residual_is_small_and_reported() {
        let scheme = LevelScheme::rb87_default(TAU * 8e6);
        let drives = [
            DriveField::new(EXCITED, GROUND, TAU * 5e6, TAU * 1e6, TAU / 780e-9),
            DriveField::new(RYD_D, EXCITED, TAU * 2e6, 0.0, -TAU / 480e-9),
            DriveField::new(RYD_D, RYD_P, TAU * 50e6, 0.0, 0.0),
        ];
        let l = build_liouvillian(&scheme, &drives, 120.0).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!(ss.residual < 1e-12, "residual {}", ss.residual);
    }

    #[test]
    fn non_square_input_is_rejected() {
        let l = DMatrix::<Complex64>::zeros(5, 5);
        assert!(steady_state(&l).is_err());
    }
}

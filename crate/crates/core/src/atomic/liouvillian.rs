//! Lindblad superoperator construction.
//!
//! Density matrices are vectorized row-major: vec(ρ)[i·n + j] = ρᵢⱼ. In that
//! convention, for dρ/dt = −i[H, ρ] + Σₖ (CₖρCₖ† − ½{Cₖ†Cₖ, ρ}),
//!
//! ```text
//! L = −i (H ⊗ I − I ⊗ Hᵀ)
//!   + Σₖ [ Cₖ ⊗ C̄ₖ − ½ (Cₖ†Cₖ ⊗ I + I ⊗ (Cₖ†Cₖ)ᵀ) ]
//! ```
//!
//! Velocity only moves the Hamiltonian diagonal (frame offsets are linear in
//! v), so the whole family is L(v) = L(0) + v·diag(D) with
//! D[i·n+j] = −i(sᵢ − sⱼ) and sᵢ the frame-offset velocity slopes.
//! [`VelocityFamily`] exploits this: one construction, then O(n²) updates per
//! velocity node — the hot path of the Doppler quadrature.

use crate::atomic::scheme::{DriveField, LevelScheme};
use crate::error::Result;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Lindblad generator for Hamiltonian `h` and collapse operators `collapse`,
/// in the row-major vectorization above.
pub fn lindblad_superoperator(
    h: &DMatrix<Complex64>,
    collapse: &[DMatrix<Complex64>],
) -> DMatrix<Complex64> {
    let n = h.nrows();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut l = (h.kronecker(&eye) - eye.kronecker(&h.transpose())) * minus_i;
    for c in collapse {
        let c_conj = c.map(|z| z.conj());
        let cdc = c.adjoint() * c;
        l += c.kronecker(&c_conj);
        l -= (cdc.kronecker(&eye) + eye.kronecker(&cdc.transpose())) * Complex64::new(0.5, 0.0);
    }
    l
}

/// Spec operation: full Liouvillian at one velocity.
pub fn build_liouvillian(
    scheme: &LevelScheme,
    drives: &[DriveField],
    velocity: f64,
) -> Result<DMatrix<Complex64>> {
    scheme.validate()?;
    let h = scheme.hamiltonian(drives, velocity)?;
    Ok(lindblad_superoperator(&h, &scheme.collapse_operators()))
}

/// The one-parameter family L(v) = base + v·diag(doppler), exact because
/// velocity enters only through the frame-offset diagonal.
#[derive(Debug, Clone)]
pub struct VelocityFamily {
    base: DMatrix<Complex64>,
    doppler: DVector<Complex64>,
}

impl VelocityFamily {
    pub fn build(scheme: &LevelScheme, drives: &[DriveField]) -> Result<Self> {
        scheme.validate()?;
        let n = scheme.len();
        let base = build_liouvillian(scheme, drives, 0.0)?;
        let slopes = scheme.frame_velocity_slopes(drives)?;
        let mut doppler = DVector::<Complex64>::zeros(n * n);
        for i in 0..n {
            for j in 0..n {
                doppler[i * n + j] = Complex64::new(0.0, -(slopes[i] - slopes[j]));
            }
        }
        Ok(VelocityFamily { base, doppler })
    }

    /// Liouvillian at velocity `v`.
    pub fn at(&self, v: f64) -> DMatrix<Complex64> {
        let mut l = self.base.clone();
        for k in 0..self.doppler.len() {
            l[(k, k)] += self.doppler[k] * Complex64::new(v, 0.0);
        }
        l
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atomic::scheme::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    /// Two-level scheme with Γ on the excited state.
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
    fn no_drive_no_decay_gives_zero_superoperator() {
        let scheme = two_level(0.0);
        let l = build_liouvillian(&scheme, &[], 0.0).unwrap();
        assert!(l.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn two_level_liouvillian_matches_hand_expanded_oracle() {
        // Independent oracle: expand dρ/dt = −i[H,ρ] + Γ D[|g⟩⟨e|]ρ by hand
        // for H = diag(0, −Δ) + (Ω/2)σ_x, in the basis (ρ00, ρ01, ρ10, ρ11):
        //   dρ00 = +i(Ω/2)ρ01 − i(Ω/2)ρ10 + Γρ11
        //   dρ01 = +i(Ω/2)ρ00 + (−iΔ − Γ/2)ρ01 − i(Ω/2)ρ11
        //   dρ10 = −i(Ω/2)ρ00 + (+iΔ − Γ/2)ρ10 + i(Ω/2)ρ11
        //   dρ11 = −i(Ω/2)ρ01 + i(Ω/2)ρ10 − Γρ11
        let om = TAU * 3.1e6;
        let delta = TAU * 1.7e6;
        let gamma = TAU * 6.07e6;
        let scheme = two_level(gamma);
        let drives = [DriveField::new(1, 0, om, delta, 0.0)];
        let l = build_liouvillian(&scheme, &drives, 0.0).unwrap();

        let i = Complex64::i();
        let half = Complex64::new(0.5 * om, 0.0);
        let g = Complex64::new(gamma, 0.0);
        let d = Complex64::new(delta, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        #[rustfmt::skip]
        let oracle = [
            [zero,        i * half,          -i * half,          g       ],
            [i * half,   -i * d - g / 2.0,    zero,              -i * half],
            [-i * half,   zero,               i * d - g / 2.0,   i * half],
            [zero,       -i * half,           i * half,          -g      ],
        ];
        for r in 0..4 {
            for c in 0..4 {
                let diff = (l[(r, c)] - oracle[r][c]).norm();
                assert!(diff < 1e-6, "L[{r}][{c}] = {} vs oracle {}", l[(r, c)], oracle[r][c]);
            }
        }
    }

    #[test]
    fn velocity_enters_only_on_the_diagonal() {
        let scheme = LevelScheme::rb87_default(TAU * 1e6);
        let kp = TAU / PROBE_WAVELENGTH_DEFAULT;
        let kc = -TAU / COUPLING_WAVELENGTH_DEFAULT;
        let drives = [
            DriveField::new(EXCITED, GROUND, TAU * 1e6, TAU * 0.5e6, kp),
            DriveField::new(RYD_D, EXCITED, TAU * 2e6, -TAU * 0.3e6, kc),
        ];
        let v = 137.0;
        let l0 = build_liouvillian(&scheme, &drives, 0.0).unwrap();
        let lv = build_liouvillian(&scheme, &drives, v).unwrap();
        let n = scheme.len();
        for r in 0..n * n {
            for c in 0..n * n {
                if r != c {
                    let diff = (lv[(r, c)] - l0[(r, c)]).norm();
                    assert!(diff < 1e-12, "off-diagonal changed at ({r}, {c})");
                }
            }
        }
        // Diagonal difference on the probe coherence (0,1): −i(s₀ − s₁)v = +i k_p v.
        let idx = 0 * n + 1;
        let diff = lv[(idx, idx)] - l0[(idx, idx)];
        assert_relative_eq!(diff.im, kp * v, max_relative = 1e-10);
        // Coupling coherence (1,2): shift is k_c v with the opposite sign.
        let idx_c = 1 * n + 2;
        let diff_c = lv[(idx_c, idx_c)] - l0[(idx_c, idx_c)];
        assert_relative_eq!(diff_c.im, kc * v, max_relative = 1e-10);
        assert!(diff.im * diff_c.im < 0.0, "counter-propagating shifts must have opposite signs");
    }

    #[test]
    fn velocity_family_matches_direct_construction() {
        let scheme = LevelScheme::rb87_default(TAU * 2e6);
        let drives = [
            DriveField::new(EXCITED, GROUND, TAU * 1.3e6, TAU * 0.2e6, TAU / 780e-9),
            DriveField::new(RYD_D, EXCITED, TAU * 2.1e6, TAU * 0.1e6, -TAU / 480e-9),
            DriveField::new(RYD_D, RYD_P, TAU * 11e6, TAU * 4e6, 0.0),
            DriveField::new(RYD_F, RYD_D, TAU * 13e6, -TAU * 6e6, 0.0),
        ];
        let family = VelocityFamily::build(&scheme, &drives).unwrap();
        for &v in &[-312.0, 0.0, 0.25, 188.5] {
            let direct = build_liouvillian(&scheme, &drives, v).unwrap();
            let fast = family.at(v);
            // Entries reach |k·v| ~ 1e9 rad/s, so compare at f64 ulp scale
            // relative to the largest entry.
            let scale = direct.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let max_diff = (&direct - &fast).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(
                max_diff < 1e-12 * scale,
                "family mismatch at v = {v}: {max_diff} vs scale {scale}"
            );
        }
    }

    #[test]
    fn dephasing_decays_coherences_at_half_rate_sum() {
        // Pure dephasing channels c_i|i⟩⟨i| give coherence ij an extra decay
        // (c_i + c_j)/2 and no population transfer.
        let c2 = TAU * 4e6;
        let mut scheme = two_level(0.0);
        scheme.levels[1].dephasing = c2;
        let l = build_liouvillian(&scheme, &[], 0.0).unwrap();
        // ρ01 row: d(ρ01)/dt = −(c2/2) ρ01.
        assert_relative_eq!(l[(1, 1)].re, -0.5 * c2, max_relative = 1e-12);
        assert_relative_eq!(l[(1, 1)].im, 0.0);
        // Populations untouched.
        assert!(l[(0, 0)].norm() < 1e-15 && l[(3, 3)].norm() < 1e-15);
    }
}

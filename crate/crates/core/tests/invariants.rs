//! Property suites: randomized checks of the structural invariants each
//! module promises, verified with independent in-test recomputation rather
//! than by trusting the library's own internal gates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rydlink_core::atomic::{
    build_liouvillian, doppler_average_with, probe_susceptibility, steady_state, DopplerQuadrature,
    DriveField, LevelScheme, ThermalEnsemble, COUPLING_WAVELENGTH_DEFAULT, EXCITED, GROUND,
    PROBE_DIPOLE_DEFAULT, PROBE_WAVELENGTH_DEFAULT, RYD_D, RYD_F, RYD_P,
};
use rydlink_core::link::{evaluate_link, LinkGeometry, OpticalPair};
use rydlink_core::optics::{fraction_through_aperture, rabi_from_power, radius_at, GaussianBeam};
use rydlink_core::transduction::{tone_power_and_snr, DetectionChain, TransmissionWaveform};
use std::f64::consts::TAU;

const K_PROBE: f64 = TAU / PROBE_WAVELENGTH_DEFAULT;
const K_COUPLING: f64 = -TAU / COUPLING_WAVELENGTH_DEFAULT;

fn room_ensemble(order: usize) -> ThermalEnsemble {
    ThermalEnsemble::rb87_at(293.15, 0.2783, order).unwrap()
}

/// Random physical drive set on the full five-level scheme: optical ladder
/// plus both RF sidearms, each with its own strength and detuning.
#[derive(Debug, Clone)]
struct DriveDraw {
    dephasing: f64,
    probe_rabi: f64,
    probe_detuning: f64,
    coupling_rabi: f64,
    coupling_detuning: f64,
    rf_p_rabi: f64,
    rf_p_detuning: f64,
    rf_f_rabi: f64,
    rf_f_detuning: f64,
    velocity: f64,
}

impl DriveDraw {
    fn scheme(&self) -> LevelScheme {
        LevelScheme::rb87_default(self.dephasing)
    }

    fn drives(&self) -> Vec<DriveField> {
        let mut drives = vec![
            DriveField::new(EXCITED, GROUND, self.probe_rabi, self.probe_detuning, K_PROBE),
            DriveField::new(RYD_D, EXCITED, self.coupling_rabi, self.coupling_detuning, K_COUPLING),
        ];
        if self.rf_p_rabi > 0.0 {
            drives.push(DriveField::new(RYD_D, RYD_P, self.rf_p_rabi, self.rf_p_detuning, 0.0));
        }
        if self.rf_f_rabi > 0.0 {
            drives.push(DriveField::new(RYD_F, RYD_D, self.rf_f_rabi, self.rf_f_detuning, 0.0));
        }
        drives
    }
}

fn drive_draw() -> impl Strategy<Value = DriveDraw> {
    (
        (
            TAU * 1.0e5..TAU * 2.0e7,   // dephasing
            TAU * 1.0e3..TAU * 5.0e7,   // probe Rabi
            -TAU * 1.0e8..TAU * 1.0e8,  // probe detuning
            TAU * 1.0e4..TAU * 2.0e7,   // coupling Rabi
            -TAU * 1.0e8..TAU * 1.0e8,  // coupling detuning
        ),
        (
            0.0..TAU * 3.0e8,           // RF Rabi toward 50P (0 = drive absent)
            -TAU * 5.0e8..TAU * 5.0e8,  // RF detuning toward 50P
            0.0..TAU * 3.0e8,           // RF Rabi toward 48F
            -TAU * 5.0e8..TAU * 5.0e8,  // RF detuning toward 48F
        ),
        -700.0..700.0f64, // velocity, ±~2.5 σ_v at room temperature
    )
        .prop_map(|((dephasing, op, dp, oc, dc), (orp, drp, orf, drf), velocity)| DriveDraw {
            dephasing,
            probe_rabi: op,
            probe_detuning: dp,
            coupling_rabi: oc,
            coupling_detuning: dc,
            rf_p_rabi: orp,
            rf_p_detuning: drp,
            rf_f_rabi: orf,
            rf_f_detuning: drf,
            velocity,
        })
}

/// Row-major vec(ρ), matching the solver's system ordering.
fn vectorize(rho: &DMatrix<Complex64>) -> DVector<Complex64> {
    let n = rho.nrows();
    DVector::from_fn(n * n, |k, _| rho[(k / n, k % n)])
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        .. ProptestConfig::default()
    })]

    /// Every steady state solved from randomized physical drives is a valid
    /// density matrix *recomputed from scratch here*: Hermitian to 1e-11,
    /// unit trace to 1e-11, positive semidefinite to 1e-10, and annihilated
    /// by the original generator to a normalized residual below 1e-9.
    #[test]
    fn randomized_steady_states_are_valid_density_matrices(draw in drive_draw()) {
        let scheme = draw.scheme();
        let drives = draw.drives();
        let l = build_liouvillian(&scheme, &drives, draw.velocity).unwrap();
        let ss = steady_state(&l).unwrap();
        let rho = &ss.rho;
        let n = rho.nrows();
        prop_assert_eq!(n, scheme.len());

        let hermiticity =
            (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(hermiticity <= 1e-11, "‖ρ − ρ†‖_max = {hermiticity:.3e}");

        let trace_error = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
        prop_assert!(trace_error <= 1e-11, "|tr ρ − 1| = {trace_error:.3e}");

        let hermitian_part = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eigenvalue = hermitian_part
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        prop_assert!(min_eigenvalue >= -1e-10, "min eig = {min_eigenvalue:.3e}");

        let l_norm = l.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let residual = (&l * vectorize(rho)).norm() / l_norm;
        prop_assert!(residual < 1e-9, "‖L vec(ρ)‖/‖L‖_F = {residual:.3e}");

        // Populations are real probabilities.
        for i in 0..n {
            let p = rho[(i, i)];
            prop_assert!(p.im.abs() <= 1e-12);
            prop_assert!(p.re >= -1e-10 && p.re <= 1.0 + 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        .. ProptestConfig::default()
    })]

    /// Weak-probe linearity: below Ω_p = 2π × 10 kHz, Im χ is a property of
    /// the medium, not of the probe — halving Ω_p moves it by < 1%.
    #[test]
    fn weak_probe_halving_leaves_susceptibility_within_one_percent(
        probe_rabi in TAU * 2.0e2..TAU * 1.0e4,
        probe_detuning in -TAU * 3.0e7..TAU * 3.0e7,
        coupling_rabi in TAU * 5.0e4..TAU * 5.0e6,
        coupling_detuning in -TAU * 3.0e7..TAU * 3.0e7,
        dephasing in TAU * 1.0e5..TAU * 2.0e7,
        velocity in -500.0..500.0f64,
    ) {
        let scheme = LevelScheme::rb87_default(dephasing);
        let ensemble = room_ensemble(9);
        let mut im_chi = [0.0f64; 2];
        for (slot, rabi) in [(0, probe_rabi), (1, probe_rabi / 2.0)] {
            let drives = [
                DriveField::new(EXCITED, GROUND, rabi, probe_detuning, K_PROBE),
                DriveField::new(RYD_D, EXCITED, coupling_rabi, coupling_detuning, K_COUPLING),
            ];
            let l = build_liouvillian(&scheme, &drives, velocity).unwrap();
            let ss = steady_state(&l).unwrap();
            let chi =
                probe_susceptibility(&ss, &ensemble, &drives[0], PROBE_DIPOLE_DEFAULT).unwrap();
            prop_assert!(chi.im > 0.0, "absorptive medium: Im χ = {:.3e}", chi.im);
            im_chi[slot] = chi.im;
        }
        let relative = (im_chi[0] - im_chi[1]).abs() / im_chi[0];
        prop_assert!(relative < 0.01, "halving Ω_p moved Im χ by {:.3e}", relative);
    }
}

#[test]
fn doppler_average_converges_as_the_tolerance_tightens() {
    // Tightening rel_tol by two decades must move χ̄ by no more than a few
    // times the looser tolerance, and each run's own convergence estimate
    // must meet its requested tolerance.
    let ensemble = room_ensemble(9);
    let cases = [
        (TAU * 1.0e6, 0.0, TAU * 1.0e5, 0.0, 0.0),
        (TAU * 1.0e6, TAU * 5.0e6, TAU * 1.0e5, 0.0, 0.0),
        (TAU * 5.0e6, 0.0, TAU * 2.0e6, -TAU * 1.0e7, 0.0),
        (TAU * 1.0e6, 0.0, TAU * 1.0e5, 0.0, TAU * 3.0e7),
        (TAU * 2.0e5, -TAU * 2.0e6, TAU * 5.0e5, TAU * 2.0e6, TAU * 8.0e7),
    ];
    let scheme = LevelScheme::rb87_default(TAU * 8.5003e6);
    for (op, dp, oc, dc, orf) in cases {
        let mut drives = vec![
            DriveField::new(EXCITED, GROUND, op, dp, K_PROBE),
            DriveField::new(RYD_D, EXCITED, oc, dc, K_COUPLING),
        ];
        if orf > 0.0 {
            drives.push(DriveField::new(RYD_D, RYD_P, orf, 0.0, 0.0));
        }
        let loose_tol = 1e-3;
        let loose = doppler_average_with(
            &scheme,
            &drives,
            &ensemble,
            &DopplerQuadrature { rel_tol: loose_tol, span_sigmas: 8.0, max_refinements: 10 },
        )
        .unwrap();
        let tight = doppler_average_with(
            &scheme,
            &drives,
            &ensemble,
            &DopplerQuadrature { rel_tol: 1e-5, span_sigmas: 8.0, max_refinements: 14 },
        )
        .unwrap();
        assert!(loose.last_change <= loose_tol);
        assert!(tight.last_change <= 1e-5);
        let drift = (loose.chi - tight.chi).norm() / tight.chi.norm();
        assert!(
            drift < 5.0 * loose_tol,
            "χ̄ moved by {drift:.3e} between rel_tol 1e-3 and 1e-5 (Ω_p = {op:.3e})"
        );
    }
}

#[test]
fn doppler_spectrum_is_symmetric_under_coupling_detuning_reflection() {
    // Δ_p = 0, resonant RF, decay pathways symmetric in velocity: the
    // velocity distribution is even and each atom at (Δ_c, v) mirrors one at
    // (−Δ_c, −v), so the averaged spectrum is even in Δ_c up to quadrature
    // node ordering (~machine precision, far inside quadrature error).
    let scheme = LevelScheme::rb87_default(TAU * 8.5003e6);
    let ensemble = room_ensemble(9);
    let quad = DopplerQuadrature::default();
    for rf_rabi in [0.0, TAU * 4.0e7] {
        for dc in [TAU * 1.0e6, TAU * 4.0e6, TAU * 1.5e7, TAU * 6.0e7] {
            let mut spectrum = [Complex64::new(0.0, 0.0); 2];
            for (slot, sign) in [(0usize, 1.0f64), (1, -1.0)] {
                let mut drives = vec![
                    DriveField::new(EXCITED, GROUND, TAU * 1.0e6, 0.0, K_PROBE),
                    DriveField::new(RYD_D, EXCITED, TAU * 1.0e5, sign * dc, K_COUPLING),
                ];
                if rf_rabi > 0.0 {
                    drives.push(DriveField::new(RYD_D, RYD_P, rf_rabi, 0.0, 0.0));
                }
                spectrum[slot] =
                    doppler_average_with(&scheme, &drives, &ensemble, &quad).unwrap().chi;
            }
            let asymmetry = (spectrum[0].im - spectrum[1].im).abs() / spectrum[0].im;
            assert!(
                asymmetry < 1e-9,
                "Im χ̄(+Δc) vs Im χ̄(−Δc) differ by {asymmetry:.3e} at Δc = {dc:.3e}, Ω_RF = {rf_rabi:.3e}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 200,
        failure_persistence: None,
        .. ProptestConfig::default()
    })]

    /// SNR is a ratio: jointly rescaling signal and noise via the detector
    /// responsivity (both scale as R²) cannot move it.
    #[test]
    fn snr_is_invariant_under_joint_signal_and_noise_rescaling(
        mean in 0.01..0.95f64,
        depth in 1.0e-6..0.05f64,
        returned_power in 1.0e-9..1.0e-3f64,
        scale in 1.0e-3..1.0e3f64,
        dark in 1.0e-12..1.0e-8f64,
        excess in 1.0..1.0e6f64,
    ) {
        prop_assume!(mean * (1.0 + depth) <= 1.0);
        let n = 32;
        let period = 1.0 / 60e3;
        let waveform = TransmissionWaveform {
            times: (0..n).map(|k| period * k as f64 / n as f64).collect(),
            transmission: (0..n)
                .map(|k| mean * (1.0 + depth * (TAU * k as f64 / n as f64).cos()))
                .collect(),
            period,
            probe_wavelength: 780e-9,
        };
        let mut report =
            evaluate_link(&LinkGeometry::at_distance(5.0), &OpticalPair::rb87_default(1e-4, 1e-2).unwrap()).unwrap();
        report.returned_probe_power = returned_power;

        let base = DetectionChain { responsivity: 0.5, rbw: 1e3, dark_power: dark, shot_excess: excess };
        let scaled = DetectionChain { responsivity: 0.5 * scale, ..base };
        let snr_base = tone_power_and_snr(&waveform, &report, &base).unwrap().snr_db;
        let snr_scaled = tone_power_and_snr(&waveform, &report, &scaled).unwrap().snr_db;
        prop_assert!(snr_base > 0.0);
        prop_assert!(
            (snr_base - snr_scaled).abs() <= 1e-9 * snr_base.abs().max(1.0),
            "SNR moved from {snr_base} to {snr_scaled} under responsivity × {scale}"
        );
    }

    /// Modulation off ⇒ a constant waveform ⇒ exactly 0 dB SNR and no tone.
    #[test]
    fn unmodulated_waveform_reads_exactly_zero_snr(level in 0.001..1.0f64) {
        let n = 16;
        let period = 1.0 / 60e3;
        let waveform = TransmissionWaveform {
            times: (0..n).map(|k| period * k as f64 / n as f64).collect(),
            transmission: vec![level; n],
            period,
            probe_wavelength: 780e-9,
        };
        let report =
            evaluate_link(&LinkGeometry::at_distance(1.0), &OpticalPair::rb87_default(5e-5, 1e-2).unwrap()).unwrap();
        let readout = tone_power_and_snr(&waveform, &report, &DetectionChain::default()).unwrap();
        prop_assert_eq!(readout.snr_db, 0.0);
        prop_assert_eq!(readout.tone_power_dbm, f64::NEG_INFINITY);
        prop_assert!((readout.mean_transmission - level).abs() <= 1e-12);
    }

    /// Gaussian-beam geometry: the radius is even about the waist, strictly
    /// grows with |z − z_waist|, apertures pass a fraction in (0, 1) that
    /// grows with the aperture, and Ω ∝ √P exactly.
    #[test]
    fn beam_geometry_properties(
        wavelength in 400e-9..1600e-9f64,
        waist in 0.5e-3..5e-3f64,
        waist_position in -5.0..5.0f64,
        offsets in proptest::collection::vec(0.01..80.0f64, 2..6),
        aperture_factor in 0.1..2.0f64,
        p1 in 1e-6..1e-2f64,
        p2 in 1e-6..1e-2f64,
    ) {
        let beam = GaussianBeam::new(wavelength, waist, waist_position, p1).unwrap();

        let mut sorted = offsets.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Strict growth needs distinguishable arguments; drop near-duplicates.
        sorted.dedup_by(|next, kept| *next < *kept * 1.05);
        let mut previous = radius_at(&beam, waist_position);
        prop_assert!((previous - waist).abs() <= 1e-15);
        for dz in &sorted {
            let above = radius_at(&beam, waist_position + dz);
            let below = radius_at(&beam, waist_position - dz);
            prop_assert!((above - below).abs() <= 1e-12 * above, "even symmetry");
            prop_assert!(above > previous, "strictly increasing in |z − z_w|");
            previous = above;
        }

        // Aperture comparable to the local spot so the passed fraction is
        // resolvable away from both 0 and 1 in floating point.
        let z = waist_position + sorted[0];
        let aperture = aperture_factor * radius_at(&beam, z);
        let f_small = fraction_through_aperture(&beam, z, aperture).unwrap();
        let f_large = fraction_through_aperture(&beam, z, aperture * 1.5).unwrap();
        prop_assert!(f_small > 0.0 && f_small < 1.0);
        prop_assert!(f_large > f_small);

        let beam2 = GaussianBeam::new(wavelength, waist, waist_position, p2).unwrap();
        let r1 = rabi_from_power(&beam, z, PROBE_DIPOLE_DEFAULT, 1.0).unwrap();
        let r2 = rabi_from_power(&beam2, z, PROBE_DIPOLE_DEFAULT, 1.0).unwrap();
        let expected = (p1 / p2).sqrt();
        prop_assert!(((r1 / r2) / expected - 1.0).abs() <= 1e-12);
    }

    /// Link budget: for a fixed transmitted power the returned probe power
    /// never grows with distance.
    #[test]
    fn returned_probe_power_is_non_increasing_with_distance(
        probe_power in 1e-6..5e-3f64,
        start in 0.5..5.0f64,
    ) {
        let pair = OpticalPair::rb87_default(probe_power, 1e-2).unwrap();
        let mut previous = f64::INFINITY;
        for step in 0..25 {
            let distance = start + 2.5 * step as f64;
            let report = evaluate_link(&LinkGeometry::at_distance(distance), &pair).unwrap();
            prop_assert!(report.efficiency >= 0.0 && report.efficiency <= 1.0);
            prop_assert!(
                report.returned_probe_power <= previous * (1.0 + 1e-12),
                "returned power rose at {distance} m"
            );
            previous = report.returned_probe_power;
        }
    }
}

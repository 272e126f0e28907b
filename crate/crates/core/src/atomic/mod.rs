//! Steady-state response of the driven atomic ladder: level scheme and
//! rotating frame, Lindblad generator, steady-state solver, thermal ensemble,
//! Doppler averaging, and the probe susceptibility/transmission observables.

pub mod doppler;
pub mod liouvillian;
pub mod response;
pub mod scheme;
pub mod steady;
pub mod thermal;

pub use doppler::{
    doppler_average, doppler_average_with, gauss_legendre, DopplerQuadrature, DopplerReport,
};
pub use liouvillian::{build_liouvillian, lindblad_superoperator, VelocityFamily};
pub use response::{probe_susceptibility, transmission};
pub use scheme::{
    DipoleLink, DriveField, LevelScheme, LevelSpec, RfTransition, COUPLING_DIPOLE_DEFAULT,
    COUPLING_WAVELENGTH_DEFAULT, EXCITED, EXCITED_DECAY_DEFAULT, GROUND, PROBE_DIPOLE_DEFAULT,
    PROBE_WAVELENGTH_DEFAULT, RF_DIPOLE_48F_DEFAULT, RF_DIPOLE_50P_DEFAULT, RF_FREQUENCY_48F,
    RF_FREQUENCY_50P, RYDBERG_DECAY_DEFAULT, RYDBERG_DEPHASING_DEFAULT, RYD_D, RYD_F, RYD_P,
};
pub use steady::{steady_state, SteadyState};
pub use thermal::{transit_broadening, ThermalEnsemble};

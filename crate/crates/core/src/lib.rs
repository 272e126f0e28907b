//! Core library of `rydlink`: an end-to-end simulator of a passive
//! Rydberg-atomic RF transducer read out over a free-space optical link.
//!
//! The crate models the chain
//!
//! ```text
//! RF carrier (AM) ──► atomic ladder steady state ──► probe transmission
//!                          ▲                              │
//!        beams at the cell │                              ▼
//! base station ──Gaussian beams──► vapor cell + retroreflector ──► detector
//! ```
//!
//! split into: [`atomic`] (ladder EIT response with Doppler averaging),
//! [`optics`] (Gaussian beams), [`link`] (retroreflected link budget),
//! [`transduction`] (AM transduction and SNR readout), and [`scenario`]
//! (configuration, presets, scan runners, output).

pub mod analysis;
pub mod atomic;
pub mod constants;
pub mod error;
pub mod link;
pub mod optics;
pub mod scenario;
pub mod transduction;

pub use error::{Error, Result};

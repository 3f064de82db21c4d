//! Modeling toolkit for ion Coulomb crystals held in the focus of a
//! single-beam optical dipole trap.
//!
//! The crate is organized around the lifecycle of a trapped linear ion
//! chain:
//!
//! * [`constants`], [`species`], [`beam`] — physical constants, ion species,
//!   and Gaussian-beam geometry (Rayleigh length, waist growth, axial depth
//!   falloff, radial optical frequency).
//! * [`potential`] — total potential energy of an ion configuration
//!   (electrostatic quadrupole + pairwise Coulomb + optical well), with
//!   analytic gradient/Hessian and finite-difference fallbacks.
//! * [`crystal`] — linear-chain equilibria, axial normal modes, thermal
//!   displacement amplitudes, 1D plasma coupling, and configuration
//!   statistics.
//! * [`trapdepth`] — per-ion radial trap depth against the interplay of the
//!   optical well, electrostatic defocusing, and Coulomb repulsion.
//! * [`survival`] — recapture probability model, binomial confidence
//!   intervals, and temperature estimation from power-scan survival data.
//! * [`dynamics`] — driven center-of-mass and stretch-mode dynamics of a
//!   two-ion chain with a symplectic integrator, frequency scans, and a
//!   trap-loss indicator.
//!
//! All public interfaces take and return SI units (m, s, K, J, rad/s)
//! unless a name explicitly says otherwise. Conversions from bench units
//! (µm, mW, mK, kHz) belong at the boundary, e.g. in the `ioncrystal`
//! command-line tool.

pub mod beam;
pub mod constants;
pub mod crystal;
pub mod dynamics;
pub mod error;
pub mod potential;
pub mod species;
pub mod survival;
pub mod trapdepth;

pub use beam::GaussianBeam;
pub use error::{Error, Result};
pub use species::IonSpecies;

/// Formats a float with 9 significant digits in scientific notation.
///
/// Single formatting path used by every emitter (CSV, JSON, stdout) so that
/// identical inputs produce byte-identical output.
pub fn fmt_sig9(x: f64) -> String {
    format!("{x:.8e}")
}

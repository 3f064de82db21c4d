//! Gaussian-beam geometry and the optical potential it creates.
//!
//! A focused Gaussian beam of waist `w₀` (1/e² intensity radius) and
//! wavelength `λ` diverges over the Rayleigh length `z_R = π·w₀²/λ`:
//!
//! * waist growth:   `w(z) = w₀·√(1 + (z/z_R)²)`
//! * on-axis depth:  `U(z) = U₀ / (1 + (z/z_R)²)` (Lorentzian falloff)
//!
//! For a red-detuned beam the focus is an attractive well of depth
//! `U₀ = depth_per_watt · power`. The trap's radial curvature at the focus
//! gives the radial optical frequency `ω = √(4U₀/(m·w₀²))`.
//!
//! `depth_per_watt` is a calibration constant that folds in wavelength,
//! detuning, and polarizability; it is the one knob tying optical power to
//! well depth, so presets pin it from a measured (power, depth) pair.

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::species::IonSpecies;

/// An ideal single-mode Gaussian beam propagating along +z with its focus
/// at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// Focal waist (1/e² intensity radius), m.
    pub waist: f64,
    /// Optical power delivered to the focus, W. May be zero (beam off).
    pub power: f64,
    /// Well depth per watt of power, J/W (non-negative magnitude).
    pub depth_per_watt: f64,
}

impl GaussianBeam {
    /// Builds a beam, validating that wavelength and waist are positive and
    /// that power and depth-per-watt are non-negative.
    pub fn new(wavelength: f64, waist: f64, power: f64, depth_per_watt: f64) -> Result<Self> {
        if !(wavelength > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "wavelength must be positive, got {wavelength} m"
            )));
        }
        if !(waist > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "waist must be positive, got {waist} m"
            )));
        }
        if !(power >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "power must be non-negative, got {power} W"
            )));
        }
        if !(depth_per_watt >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "depth per watt must be non-negative, got {depth_per_watt} J/W"
            )));
        }
        Ok(GaussianBeam {
            wavelength,
            waist,
            power,
            depth_per_watt,
        })
    }

    /// Builds a beam whose `depth_per_watt` is calibrated so that the well
    /// is `full_depth` joules deep at `full_power` watts.
    pub fn calibrated(
        wavelength: f64,
        waist: f64,
        full_power: f64,
        full_depth: f64,
    ) -> Result<Self> {
        if !(full_power > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "calibration power must be positive, got {full_power} W"
            )));
        }
        if !(full_depth >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "calibration depth must be non-negative, got {full_depth} J"
            )));
        }
        Self::new(wavelength, waist, full_power, full_depth / full_power)
    }

    /// Green (532 nm) high-power preset: 2.6 µm waist, well depth
    /// k_B × 110 mK at the full 9.5 W.
    pub fn preset_vis() -> Self {
        Self::calibrated(532e-9, 2.6e-6, 9.5, BOLTZMANN * 0.110)
            .expect("hard-coded preset is valid")
    }

    /// Infrared (1064 nm) preset: 5.0 µm waist, well depth k_B × 16 mK at
    /// the full 20 W.
    pub fn preset_nir() -> Self {
        Self::calibrated(1064e-9, 5.0e-6, 20.0, BOLTZMANN * 0.016)
            .expect("hard-coded preset is valid")
    }

    /// Same beam at a different power; handy for power scans.
    pub fn with_power(self, power: f64) -> Result<Self> {
        Self::new(self.wavelength, self.waist, power, self.depth_per_watt)
    }

    /// Checks a measured Rayleigh length against the diffraction-limited
    /// value `π·w₀²/λ`; an inconsistency larger than the stated measurement
    /// uncertainty means wavelength, waist, and Rayleigh length do not
    /// describe the same beam, and the configuration is rejected.
    pub fn check_measured_rayleigh(&self, measured: f64, uncertainty: f64) -> Result<()> {
        if !(measured > 0.0) || !(uncertainty >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "measured Rayleigh length {measured} m ± {uncertainty} m is not valid"
            )));
        }
        let derived = self.rayleigh_length();
        if (derived - measured).abs() > uncertainty {
            return Err(Error::InvalidConfig(format!(
                "derived Rayleigh length {derived:.3e} m disagrees with measured \
                 {measured:.3e} m beyond its uncertainty {uncertainty:.1e} m"
            )));
        }
        Ok(())
    }

    /// Rayleigh length `z_R = π·w₀²/λ`, m.
    pub fn rayleigh_length(&self) -> f64 {
        std::f64::consts::PI * self.waist * self.waist / self.wavelength
    }

    /// Beam radius `w(z) = w₀·√(1 + (z/z_R)²)` at axial distance `z` from
    /// the focus, m.
    pub fn waist_at(&self, z: f64) -> f64 {
        let zr = self.rayleigh_length();
        self.waist * (1.0 + (z / zr).powi(2)).sqrt()
    }

    /// On-axis well depth `U(z) = depth_per_watt·P / (1 + (z/z_R)²)` at
    /// axial distance `z`, J (non-negative magnitude).
    pub fn optical_depth_at(&self, z: f64) -> f64 {
        let zr = self.rayleigh_length();
        self.depth_per_watt * self.power / (1.0 + (z / zr).powi(2))
    }

    /// Radial oscillation frequency `ω = √(4U₀/(m·w₀²))` of an ion of the
    /// given species at the focus, rad/s.
    ///
    /// This is the harmonic expansion of the Gaussian profile
    /// `U₀·exp(−2r²/w₀²)` around r = 0.
    pub fn radial_optical_frequency(&self, species: &IonSpecies) -> f64 {
        let u0 = self.depth_per_watt * self.power;
        (4.0 * u0 / (species.mass * self.waist * self.waist)).sqrt()
    }
}

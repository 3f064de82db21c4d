//! Ion species: mass and charge of the trapped particle.

use crate::constants::{ATOMIC_MASS, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};

/// A singly- or multiply-charged atomic ion.
///
/// Positions, frequencies, and energies everywhere in the crate are
/// per-particle, so the species is just the (mass, charge) pair that scales
/// them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonSpecies {
    /// Particle mass, kg. Always positive.
    pub mass: f64,
    /// Particle charge, C. Never zero (a neutral particle has no
    /// electrostatic or Coulomb dynamics to model).
    pub charge: f64,
}

impl IonSpecies {
    /// Builds a species from a mass in atomic mass units and a signed
    /// charge state in units of the elementary charge.
    pub fn from_amu(mass_amu: f64, charge_state: i32) -> Result<Self> {
        if !(mass_amu > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "ion mass must be positive, got {mass_amu} u"
            )));
        }
        if charge_state == 0 {
            return Err(Error::InvalidConfig(
                "ion charge state must be nonzero".into(),
            ));
        }
        Ok(IonSpecies {
            mass: mass_amu * ATOMIC_MASS,
            charge: f64::from(charge_state) * ELEMENTARY_CHARGE,
        })
    }

    /// ¹³⁸Ba⁺ (138 u, +1e), the workhorse species for heavy-ion optical
    /// trapping and the default throughout the crate.
    pub fn barium138() -> Self {
        IonSpecies {
            mass: 138.0 * ATOMIC_MASS,
            charge: ELEMENTARY_CHARGE,
        }
    }
}

impl Default for IonSpecies {
    fn default() -> Self {
        Self::barium138()
    }
}

//! Physical constants (SI).
//!
//! Values follow the 2019 SI redefinition (exact where exact) and CODATA
//! 2018 for the measured ones. Everything in the crate pulls constants from
//! here; nothing hard-codes its own copy.

/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Elementary charge, C (exact).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Vacuum permittivity ε₀, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_8128e-12;

/// Unified atomic mass unit, kg (CODATA 2018).
pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;

/// Coulomb pair-energy scale e²/(4πε₀), J·m, for two elementary charges.
///
/// Precomputing the combination keeps the many places that need it (chain
/// equilibria, radial defocusing, plasma coupling) numerically identical.
pub const COULOMB_SCALE: f64 =
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coulomb_scale_matches_direct_evaluation() {
        let direct = ELEMENTARY_CHARGE.powi(2)
            / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY);
        assert_eq!(COULOMB_SCALE, direct);
        // Two unit charges 1 m apart: ~2.3e-28 J.
        assert!((COULOMB_SCALE - 2.307_077_552e-28).abs() < 1e-36);
    }

    #[test]
    fn room_temperature_energy_scale_is_sane() {
        // k_B * 300 K ~ 25 meV expressed in joules.
        let e300 = BOLTZMANN * 300.0;
        assert!(e300 > 4.0e-21 && e300 < 4.2e-21);
    }
}

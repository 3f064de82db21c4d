//! Per-ion local radial trap depth.
//!
//! Radially, each ion sits in a tug-of-war: the Gaussian beam pulls it
//! toward the axis while the electrostatic saddle (the price of axial
//! confinement, via Laplace's equation) and the repulsion of its frozen
//! neighbors both push it out. Along the weakest direction x the local
//! potential at axial position z is
//!
//! ```text
//! U(x) = ½·m·ω̃²_x(z)·x² − U_opt(z)·exp(−2x²/w(z)²),   ω̃²_x(z) < 0
//! ```
//!
//! which has a finite barrier (the local trap depth) at
//! `x_max² = (w²/2)·ln(4U/(κw²))` with `κ = m·|ω̃²_x|`, provided
//! `κw² < 4U`. When the defocusing wins, the barrier vanishes and the
//! depth is zero. The closed forms below are cross-checked against a
//! brute-force scan of U(x) in the tests.

use crate::beam::GaussianBeam;
use crate::crystal::CrystalEquilibrium;
use crate::constants::{COULOMB_SCALE, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::potential::ElectrostaticConfig;
use crate::species::IonSpecies;

/// Everything known about one ion's radial well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthRecord {
    /// Which ion, 0-based, ordered by axial position.
    pub ion_index: usize,
    /// The ion's axial position z, m.
    pub axial_position: f64,
    /// Optical well magnitude U_opt(z) at that position, J.
    pub optical_depth: f64,
    /// Magnitude of the negative net radial curvature |ω̃²_x|, (rad/s)².
    /// Zero when the net curvature is confining (no defocusing at all).
    pub defocus_curvature: f64,
    /// Radial location of the escape barrier, m. Absent when no local
    /// maximum exists: either the defocusing has erased the barrier
    /// (depth = 0) or there is no defocusing (depth = full optical well).
    pub x_max: Option<f64>,
    /// Local radial trap depth, J, in [0, optical_depth].
    pub depth: f64,
}

/// Radial trap depths for a whole chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile {
    /// One record per ion, in axial order.
    pub records: Vec<DepthRecord>,
}

impl DepthProfile {
    /// Number of ions.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// True when the profile has no records (never, post-construction).
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Smallest per-ion depth, J — the number that decides whether the
    /// chain survives. For symmetric chains it sits at the outermost
    /// ions, which see the weakest (diverged) beam.
    pub fn min_depth(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.depth)
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the first ion attaining the minimum depth.
    pub fn min_index(&self) -> usize {
        let min = self.min_depth();
        self.records
            .iter()
            .position(|r| r.depth == min)
            .unwrap_or(0)
    }
}

/// Radial curvature contributed by the other ions' Coulomb repulsion,
/// with every ion frozen at the given axial position, (rad/s)², ≤ 0:
///
/// ```text
/// ω̃²_{x,coul}(z_i) = −(q²/(4πε₀·m))·Σ_{j≠i} 1/|z_i − z_j|³
/// ```
fn coulomb_curvature_at(species: &IonSpecies, axial_positions: &[f64], i: usize) -> Result<f64> {
    let k = COULOMB_SCALE * (species.charge / ELEMENTARY_CHARGE).powi(2);
    let zi = axial_positions[i];
    let mut sum = 0.0;
    for (j, &zj) in axial_positions.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = (zi - zj).abs();
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ions {i} and {j} coincide; Coulomb curvature undefined"
            )));
        }
        sum += 1.0 / (d * d * d);
    }
    Ok(-k / species.mass * sum)
}

/// Radial Coulomb-defocusing curvature for ion `i` of a chain
/// equilibrium, (rad/s)², ≤ 0. Zero for a single ion.
pub fn coulomb_radial_curvature(eq: &CrystalEquilibrium, i: usize) -> Result<f64> {
    if i >= eq.len() {
        return Err(Error::InvalidConfig(format!(
            "ion index {i} out of range for a {}-ion chain",
            eq.len()
        )));
    }
    coulomb_curvature_at(&eq.species, &eq.axial_positions, i)
}

/// Net electrostatic-plus-Coulomb radial curvature for ion `i`,
/// (rad/s)², signed: `ω̃²_{x,el} = ω̃²_{x,dc} + ω̃²_{x,coul}`. Under the
/// default curvature split this is −ω_z² for a lone ion and grows more
/// negative as neighbors crowd in.
pub fn electrostatic_curvature_x(
    config: &ElectrostaticConfig,
    eq: &CrystalEquilibrium,
    i: usize,
) -> Result<f64> {
    Ok(config.curvature_x + coulomb_radial_curvature(eq, i)?)
}

/// Closed-form barrier of `½κx² − U·exp(−2x²/W²)` (κ ≥ 0 in J/m², U ≥ 0
/// in J, W > 0 in m): returns `(depth, x_max)`.
///
/// * `κW² ≥ 4U` — defocusing erases the barrier: `(0, None)`.
/// * `κ = 0` — nothing to escape over: `(U, None)`.
/// * otherwise `x_max² = (W²/2)·ln(4U/(κW²))` and
///   `depth = U − (κW²/4)·[1 + ln(4U/(κW²))]`.
pub fn radial_barrier(optical_depth: f64, defocus_stiffness: f64, local_waist: f64) -> (f64, Option<f64>) {
    let u = optical_depth;
    let kw2 = defocus_stiffness * local_waist * local_waist;
    if kw2 <= 0.0 {
        return (u, None);
    }
    if kw2 >= 4.0 * u {
        return (0.0, None);
    }
    let log_ratio = (4.0 * u / kw2).ln();
    let x_max = local_waist * (0.5 * log_ratio).sqrt();
    let depth = (u - 0.25 * kw2 * (1.0 + log_ratio)).max(0.0);
    (depth, Some(x_max))
}

/// Builds the depth record for ion `i` of an arbitrary axial arrangement
/// (not necessarily an equilibrium — `dynamics` feeds in instantaneous
/// positions). `curvature_offset` adds to the dc radial curvature,
/// (rad/s)²; zero for the nominal trap.
pub fn axial_depth_at(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    species: &IonSpecies,
    axial_positions: &[f64],
    i: usize,
    curvature_offset: f64,
) -> Result<DepthRecord> {
    if i >= axial_positions.len() {
        return Err(Error::InvalidConfig(format!(
            "ion index {i} out of range for {} positions",
            axial_positions.len()
        )));
    }
    if !curvature_offset.is_finite() {
        return Err(Error::InvalidConfig(
            "curvature offset must be finite".into(),
        ));
    }
    let z = axial_positions[i];
    let curvature = config.curvature_x + curvature_offset + coulomb_curvature_at(species, axial_positions, i)?;
    let defocus = (-curvature).max(0.0);
    let u = beam.optical_depth_at(z);
    let w = beam.waist_at(z);
    let (depth, x_max) = radial_barrier(u, species.mass * defocus, w);
    Ok(DepthRecord {
        ion_index: i,
        axial_position: z,
        optical_depth: u,
        defocus_curvature: defocus,
        x_max,
        depth,
    })
}

/// Local radial trap depth and barrier position for ion `i` of a chain
/// equilibrium: `(depth J, x_max m)`.
pub fn local_trap_depth(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    eq: &CrystalEquilibrium,
    i: usize,
) -> Result<(f64, Option<f64>)> {
    let record = axial_depth_at(beam, config, &eq.species, &eq.axial_positions, i, 0.0)?;
    Ok((record.depth, record.x_max))
}

/// Depth records for every ion of a chain equilibrium.
pub fn depth_profile(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    eq: &CrystalEquilibrium,
) -> Result<DepthProfile> {
    let offsets = vec![0.0; eq.len()];
    depth_profile_with_offsets(beam, config, eq, &offsets)
}

/// Depth profile with a per-ion additive radial-curvature offset,
/// (rad/s)² — the hook for stray fields that are compensated only at the
/// chain center and leave a residual curvature elsewhere. Offsets must
/// match the chain length; all-zero reproduces `depth_profile`.
pub fn depth_profile_with_offsets(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    eq: &CrystalEquilibrium,
    curvature_offsets: &[f64],
) -> Result<DepthProfile> {
    if curvature_offsets.len() != eq.len() {
        return Err(Error::InvalidConfig(format!(
            "{} curvature offsets for a {}-ion chain",
            curvature_offsets.len(),
            eq.len()
        )));
    }
    let records = (0..eq.len())
        .map(|i| {
            axial_depth_at(
                beam,
                config,
                &eq.species,
                &eq.axial_positions,
                i,
                curvature_offsets[i],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DepthProfile { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::BOLTZMANN;
    use crate::crystal::equilibrium_positions;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const TWO_PI: f64 = std::f64::consts::TAU;

    fn ba() -> IonSpecies {
        IonSpecies::barium138()
    }

    fn axial(omega_z: f64) -> ElectrostaticConfig {
        ElectrostaticConfig::axial(omega_z).unwrap()
    }

    /// Brute-force oracle: scan ½κ_signed·x² − U·e^(−2x²/W²) on a dense
    /// grid over [0, 5W], refine the discrete extrema with a parabolic
    /// step, and report max − min.
    fn scanned_barrier(u: f64, kappa: f64, w: f64) -> f64 {
        let f = |x: f64| 0.5 * kappa * x * x - u * (-2.0 * x * x / (w * w)).exp();
        let n = 100_000usize;
        let step = 5.0 * w / n as f64;
        let mut best_i = 0usize;
        let mut best = f(0.0);
        for i in 0..=n {
            let v = f(i as f64 * step);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let refined = if best_i == 0 || best_i == n {
            best
        } else {
            // One parabolic interpolation through the winning triple
            // kills the O(step²) grid bias.
            let (xm, x0, xp) = (
                (best_i - 1) as f64 * step,
                best_i as f64 * step,
                (best_i + 1) as f64 * step,
            );
            let (fm, f0, fp) = (f(xm), f(x0), f(xp));
            let denom = fm - 2.0 * f0 + fp;
            if denom.abs() > 0.0 {
                let dx = 0.5 * step * (fm - fp) / denom;
                f(x0 + dx).max(f0)
            } else {
                f0
            }
        };
        refined - f(0.0)
    }

    #[test]
    fn single_ion_has_no_coulomb_defocusing() {
        let eq = equilibrium_positions(1, TWO_PI * 25e3, &ba()).unwrap();
        assert_eq!(coulomb_radial_curvature(&eq, 0).unwrap(), 0.0);
        let cfg = axial(TWO_PI * 25e3);
        assert_relative_eq!(
            electrostatic_curvature_x(&cfg, &eq, 0).unwrap(),
            -(TWO_PI * 25e3).powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn two_ion_coulomb_curvature_is_half_the_axial_curvature() {
        // At the two-ion equilibrium, k/d³ = m·ω_z²/2 exactly, so the
        // radial defocusing is −ω_z²/2 whatever the frequency.
        let omega_z = TWO_PI * 24.96e3;
        let eq = equilibrium_positions(2, omega_z, &ba()).unwrap();
        let c = coulomb_radial_curvature(&eq, 0).unwrap();
        assert_relative_eq!(c, -0.5 * omega_z * omega_z, max_relative = 1e-10);
        assert_relative_eq!(c, -1.229_755_866_649_14e10, max_relative = 1e-9);
        let cfg = axial(omega_z);
        assert_relative_eq!(
            electrostatic_curvature_x(&cfg, &eq, 0).unwrap(),
            -1.5 * omega_z * omega_z,
            max_relative = 1e-10
        );
    }

    #[test]
    fn three_ion_center_curvature_closed_form() {
        // Center ion: two neighbors at (5/4)^(1/3)·ℓ, so the Coulomb sum
        // is 2/(5/4)·ω_z² and the net radial curvature is −2.6·ω_z².
        let omega_z = TWO_PI * 25e3;
        let eq = equilibrium_positions(3, omega_z, &ba()).unwrap();
        let cfg = axial(omega_z);
        assert_relative_eq!(
            electrostatic_curvature_x(&cfg, &eq, 1).unwrap(),
            -2.6 * omega_z * omega_z,
            max_relative = 1e-9
        );
    }

    #[test]
    fn center_ion_of_an_odd_chain_is_defocused_hardest() {
        let eq = equilibrium_positions(5, TWO_PI * 25e3, &ba()).unwrap();
        let center = coulomb_radial_curvature(&eq, 2).unwrap();
        for i in [0usize, 1, 3, 4] {
            assert!(
                coulomb_radial_curvature(&eq, i).unwrap() > center,
                "ion {i} should be defocused less than the center"
            );
        }
    }

    #[test]
    fn curvature_index_out_of_range_is_rejected() {
        let eq = equilibrium_positions(2, TWO_PI * 25e3, &ba()).unwrap();
        assert!(coulomb_radial_curvature(&eq, 2).is_err());
    }

    #[test]
    fn vanishing_defocus_recovers_the_full_optical_well() {
        let (depth, x_max) = radial_barrier(1e-24, 0.0, 3e-6);
        assert_eq!(depth, 1e-24);
        assert!(x_max.is_none());
        // Tiny but nonzero defocus: almost the full well, barrier far out
        // (x_max grows only like √ln(1/κ), so κ must be truly minuscule).
        let (depth, x_max) = radial_barrier(1e-24, 1e-110, 3e-6);
        assert_relative_eq!(depth, 1e-24, max_relative = 1e-3);
        assert!(x_max.unwrap() > 10.0 * 3e-6);
    }

    #[test]
    fn barrier_vanishes_continuously_at_the_threshold() {
        // Build U from κ·W² the same way the production code multiplies,
        // so the threshold comparison is exact.
        let kappa = 5e-13;
        let w = 3e-6;
        let u = kappa * w * w / 4.0;
        let (at, x_at) = radial_barrier(u, kappa, w);
        assert_eq!(at, 0.0);
        assert!(x_at.is_none());
        // A slightly deeper well: positive but quadratically small depth.
        let (inside, _) = radial_barrier(u * (1.0 + 1e-6), kappa, w);
        assert!(inside > 0.0);
        assert!(
            inside < 1e-11 * u,
            "depth must vanish continuously, got {inside:e}"
        );
        // A slightly shallower one: exactly zero, no barrier.
        let (outside, x_out) = radial_barrier(u * (1.0 - 1e-6), kappa, w);
        assert_eq!(outside, 0.0);
        assert!(x_out.is_none());
    }

    #[test]
    fn zero_power_means_zero_depth_everywhere() {
        let beam = GaussianBeam::preset_vis().with_power(0.0).unwrap();
        let omega_z = TWO_PI * 25e3;
        let eq = equilibrium_positions(3, omega_z, &ba()).unwrap();
        let profile = depth_profile(&beam, &axial(omega_z), &eq).unwrap();
        for r in &profile.records {
            assert_eq!(r.depth, 0.0);
            assert!(r.x_max.is_none());
        }
    }

    #[test]
    fn five_ion_profile_at_8_w_is_shallowest_at_the_ends() {
        let beam = GaussianBeam::preset_vis().with_power(8.0).unwrap();
        let omega_z = TWO_PI * 25e3;
        let eq = equilibrium_positions(5, omega_z, &ba()).unwrap();
        let profile = depth_profile(&beam, &axial(omega_z), &eq).unwrap();

        let mk = |j: f64| j / BOLTZMANN * 1e3;
        assert_relative_eq!(mk(profile.records[0].depth), 13.469_800_560_168_716, max_relative = 1e-9);
        assert_relative_eq!(mk(profile.records[1].depth), 45.263_895_128_024_224, max_relative = 1e-9);
        assert_relative_eq!(mk(profile.records[2].depth), 77.847_142_262_634_78, max_relative = 1e-9);
        assert_relative_eq!(
            profile.records[0].x_max.unwrap(),
            4.193_789_737_697_951e-6,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            profile.records[1].x_max.unwrap(),
            3.639_913_417_386_987e-6,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            profile.records[2].x_max.unwrap(),
            3.335_582_914_261_588e-6,
            max_relative = 1e-9
        );

        // The chain's weak spots are its ends.
        assert_eq!(profile.min_index(), 0);
        assert_relative_eq!(
            profile.min_depth(),
            profile.records[4].depth,
            max_relative = 1e-9
        );
        for r in &profile.records {
            assert!(r.depth >= profile.records[0].depth * (1.0 - 1e-12));
        }
    }

    #[test]
    fn symmetric_chains_have_symmetric_profiles() {
        let beam = GaussianBeam::preset_vis().with_power(8.0).unwrap();
        let omega_z = TWO_PI * 25e3;
        for n in [2usize, 4, 5, 7] {
            let eq = equilibrium_positions(n, omega_z, &ba()).unwrap();
            let profile = depth_profile(&beam, &axial(omega_z), &eq).unwrap();
            for i in 0..n {
                let a = &profile.records[i];
                let b = &profile.records[n - 1 - i];
                assert_relative_eq!(a.depth, b.depth, max_relative = 1e-9);
                assert_relative_eq!(a.optical_depth, b.optical_depth, max_relative = 1e-9);
                assert!(a.depth <= a.optical_depth * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn outer_ion_depth_matches_the_scan_oracle() {
        let beam = GaussianBeam::preset_vis().with_power(8.0).unwrap();
        let omega_z = TWO_PI * 25e3;
        let eq = equilibrium_positions(5, omega_z, &ba()).unwrap();
        let cfg = axial(omega_z);
        let record = axial_depth_at(&beam, &cfg, &ba(), &eq.axial_positions, 4, 0.0).unwrap();

        let kappa_signed = -ba().mass * record.defocus_curvature;
        let w = beam.waist_at(record.axial_position);
        let scanned = scanned_barrier(record.optical_depth, kappa_signed, w);
        assert_relative_eq!(record.depth, scanned, max_relative = 1e-6);
    }

    #[test]
    fn depth_grows_with_beam_power() {
        let omega_z = TWO_PI * 25e3;
        let eq = equilibrium_positions(2, omega_z, &ba()).unwrap();
        let cfg = axial(omega_z);
        let mut last = 0.0;
        for power in [2.0, 4.0, 6.0, 8.0, 9.5] {
            let beam = GaussianBeam::preset_vis().with_power(power).unwrap();
            let d = depth_profile(&beam, &cfg, &eq).unwrap().min_depth();
            assert!(d > last, "depth must grow with power ({power} W)");
            last = d;
        }
    }

    #[test]
    fn single_ion_depth_falls_off_axis() {
        let beam = GaussianBeam::preset_vis().with_power(8.0).unwrap();
        let cfg = axial(TWO_PI * 25e3);
        let mut last = f64::INFINITY;
        for z in [0.0, 20e-6, 40e-6, 80e-6] {
            let r = axial_depth_at(&beam, &cfg, &ba(), &[z], 0, 0.0).unwrap();
            assert!(r.depth < last, "depth must fall with |z| (z = {z})");
            last = r.depth;
        }
    }

    #[test]
    fn curvature_offsets_must_match_and_soften_the_defocusing() {
        let beam = GaussianBeam::preset_vis().with_power(8.0).unwrap();
        let omega_z = TWO_PI * 25e3;
        let eq = equilibrium_positions(3, omega_z, &ba()).unwrap();
        let cfg = axial(omega_z);
        assert!(depth_profile_with_offsets(&beam, &cfg, &eq, &[0.0; 2]).is_err());

        let base = depth_profile(&beam, &cfg, &eq).unwrap();
        let zeros = depth_profile_with_offsets(&beam, &cfg, &eq, &[0.0; 3]).unwrap();
        assert_eq!(base, zeros);

        // A positive curvature offset (extra confinement) deepens the well,
        // a negative one (stray-field defocusing) erodes it.
        let softer =
            depth_profile_with_offsets(&beam, &cfg, &eq, &[0.3 * omega_z * omega_z; 3]).unwrap();
        let harder =
            depth_profile_with_offsets(&beam, &cfg, &eq, &[-0.3 * omega_z * omega_z; 3]).unwrap();
        for i in 0..3 {
            assert!(softer.records[i].depth > base.records[i].depth);
            assert!(harder.records[i].depth < base.records[i].depth);
        }
    }

    #[test]
    fn coincident_ions_are_rejected() {
        let beam = GaussianBeam::preset_vis().with_power(8.0).unwrap();
        let cfg = axial(TWO_PI * 25e3);
        assert!(axial_depth_at(&beam, &cfg, &ba(), &[1e-6, 1e-6], 0, 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Closed-form depth vs the brute-force scan across random beams,
        /// powers, frequencies and chain sizes.
        #[test]
        fn closed_form_matches_scan_oracle(
            n in 1usize..=6,
            power in 0.5f64..10.0,
            f_khz in 10.0f64..40.0,
            vis in proptest::bool::ANY,
            ion_pick in 0usize..6,
        ) {
            let omega_z = TWO_PI * f_khz * 1e3;
            let preset = if vis { GaussianBeam::preset_vis() } else { GaussianBeam::preset_nir() };
            let beam = preset.with_power(power).unwrap();
            let eq = equilibrium_positions(n, omega_z, &ba()).unwrap();
            let cfg = axial(omega_z);
            let i = ion_pick % n;
            let r = axial_depth_at(&beam, &cfg, &ba(), &eq.axial_positions, i, 0.0).unwrap();
            prop_assert!(r.depth >= 0.0);
            prop_assert!(r.depth <= r.optical_depth * (1.0 + 1e-12));
            let scanned = scanned_barrier(
                r.optical_depth,
                -ba().mass * r.defocus_curvature,
                beam.waist_at(r.axial_position),
            );
            if r.depth > 1e-6 * r.optical_depth {
                prop_assert!(
                    (r.depth - scanned).abs() <= 1e-6 * r.depth,
                    "closed form {:e} vs scan {:e}", r.depth, scanned
                );
            } else {
                // Hairline-thin or absent barrier: the scan agrees in scale.
                prop_assert!(scanned <= 2e-6 * r.optical_depth.max(1e-300));
            }
        }
    }
}

//! C ABI over the ioncrystal library.
//!
//! The surface follows the usual C conventions: opaque handles created
//! and destroyed by paired `_new`/`_free` calls, results written through
//! out-pointers, and an [`IctStatus`] return on every fallible call.
//! Success writes every out-parameter; any failure leaves them untouched.
//! All functions are null-safe — a null handle or out-pointer yields
//! `NullPointer`, never a crash. Handles are not synchronized: share a
//! handle across threads only behind your own lock.
//!
//! The matching header, `include/ioncrystal.h`, is regenerated by the
//! build script via cbindgen.

use std::os::raw::c_char;

use ioncrystal::beam::GaussianBeam;
use ioncrystal::crystal::{
    configuration_probability, equilibrium_positions, mode_spectrum, thermal_axial_amplitude,
    CrystalEquilibrium,
};
use ioncrystal::dynamics::{response_amplitude, simulate, DriveConfig};
use ioncrystal::potential::ElectrostaticConfig;
use ioncrystal::survival::{
    capture_probability, ensemble_survival, fit_temperature, wilson_interval, SurvivalObservation,
};
use ioncrystal::trapdepth::depth_profile;
use ioncrystal::{Error, IonSpecies};

/// Result of a fallible call.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum IctStatus {
    /// The call succeeded and all out-parameters are set.
    Ok = 0,
    /// A parameter or configuration was rejected before any computation.
    InvalidArgument = 2,
    /// The computation itself failed (no convergence, domain violation,
    /// unidentifiable fit).
    NumericalFailure = 3,
    /// A required pointer was null.
    NullPointer = 4,
}

/// Driven coordinate for [`ict_drive_response`].
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum IctDriveMode {
    /// In-phase (center-of-mass) motion at the axial frequency.
    Com = 0,
    /// Out-of-phase two-ion breathing, sqrt(3) times the axial frequency
    /// when linear.
    Stretch = 1,
}

/// Opaque ion species handle (mass and charge).
pub struct IctSpecies {
    inner: IonSpecies,
}

/// Opaque Gaussian beam handle.
pub struct IctBeam {
    inner: GaussianBeam,
}

/// Opaque solved chain equilibrium handle.
pub struct IctEquilibrium {
    inner: CrystalEquilibrium,
}

fn status_of(err: &Error) -> IctStatus {
    match err {
        Error::InvalidConfig(_) | Error::MalformedInput { .. } => IctStatus::InvalidArgument,
        _ => IctStatus::NumericalFailure,
    }
}

/// Converts a handle pointer to a reference, or bails with `NullPointer`.
macro_rules! try_ref {
    ($ptr:expr) => {
        match $ptr.as_ref() {
            Some(reference) => reference,
            None => return IctStatus::NullPointer,
        }
    };
}

macro_rules! try_mut {
    ($ptr:expr) => {
        match $ptr.as_mut() {
            Some(reference) => reference,
            None => return IctStatus::NullPointer,
        }
    };
}

/// A static description of a status code, for error messages. Never
/// null; the string is NUL-terminated and owned by the library.
#[no_mangle]
pub extern "C" fn ict_status_message(status: IctStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        IctStatus::Ok => b"ok\0",
        IctStatus::InvalidArgument => b"invalid argument\0",
        IctStatus::NumericalFailure => b"numerical failure\0",
        IctStatus::NullPointer => b"null pointer\0",
    };
    text.as_ptr().cast()
}

// ---------------------------------------------------------------------
// Species
// ---------------------------------------------------------------------

/// New handle for 138Ba+, the default species. Free with
/// [`ict_species_free`].
#[no_mangle]
pub extern "C" fn ict_species_barium138() -> *mut IctSpecies {
    Box::into_raw(Box::new(IctSpecies {
        inner: IonSpecies::barium138(),
    }))
}

/// New species from a mass in atomic mass units and a signed charge
/// state in units of e. On success writes the handle to `out`; free it
/// with [`ict_species_free`].
///
/// # Safety
/// `out` must be a valid pointer to a species-handle slot.
#[no_mangle]
pub unsafe extern "C" fn ict_species_new(
    mass_amu: f64,
    charge_state: i32,
    out: *mut *mut IctSpecies,
) -> IctStatus {
    let out = try_mut!(out);
    match IonSpecies::from_amu(mass_amu, charge_state) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(IctSpecies { inner }));
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Particle mass in kg.
///
/// # Safety
/// `species` must be a live handle from this library and `out` a valid
/// double slot.
#[no_mangle]
pub unsafe extern "C" fn ict_species_mass_kg(
    species: *const IctSpecies,
    out: *mut f64,
) -> IctStatus {
    let species = try_ref!(species);
    let out = try_mut!(out);
    *out = species.inner.mass;
    IctStatus::Ok
}

/// Releases a species handle. Null is a no-op.
///
/// # Safety
/// `species` must be null or a live handle from this library; the handle
/// is dead afterwards.
#[no_mangle]
pub unsafe extern "C" fn ict_species_free(species: *mut IctSpecies) {
    if !species.is_null() {
        drop(Box::from_raw(species));
    }
}

// ---------------------------------------------------------------------
// Beam
// ---------------------------------------------------------------------

/// New handle for the visible-beam preset (532 nm, 2.6 um waist, 9.5 W).
/// Free with [`ict_beam_free`].
#[no_mangle]
pub extern "C" fn ict_beam_preset_vis() -> *mut IctBeam {
    Box::into_raw(Box::new(IctBeam {
        inner: GaussianBeam::preset_vis(),
    }))
}

/// New handle for the near-infrared preset (1064 nm, 5 um waist, 20 W).
/// Free with [`ict_beam_free`].
#[no_mangle]
pub extern "C" fn ict_beam_preset_nir() -> *mut IctBeam {
    Box::into_raw(Box::new(IctBeam {
        inner: GaussianBeam::preset_nir(),
    }))
}

/// New beam from explicit optics: wavelength and waist in meters, power
/// in watts, and the focal depth gained per watt in joules per watt. On
/// success writes the handle to `out`; free it with [`ict_beam_free`].
///
/// # Safety
/// `out` must be a valid pointer to a beam-handle slot.
#[no_mangle]
pub unsafe extern "C" fn ict_beam_new(
    wavelength_m: f64,
    waist_m: f64,
    power_w: f64,
    depth_per_watt_j: f64,
    out: *mut *mut IctBeam,
) -> IctStatus {
    let out = try_mut!(out);
    match GaussianBeam::new(wavelength_m, waist_m, power_w, depth_per_watt_j) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(IctBeam { inner }));
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Changes the beam power in place.
///
/// # Safety
/// `beam` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ict_beam_set_power(beam: *mut IctBeam, power_w: f64) -> IctStatus {
    let beam = try_mut!(beam);
    match beam.inner.with_power(power_w) {
        Ok(updated) => {
            beam.inner = updated;
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Rayleigh length in meters.
///
/// # Safety
/// `beam` must be a live handle and `out` a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn ict_beam_rayleigh_length_m(
    beam: *const IctBeam,
    out: *mut f64,
) -> IctStatus {
    let beam = try_ref!(beam);
    let out = try_mut!(out);
    *out = beam.inner.rayleigh_length();
    IctStatus::Ok
}

/// Optical trap depth at axial offset `z_m` from the focus, in joules.
///
/// # Safety
/// `beam` must be a live handle and `out` a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn ict_beam_depth_at_j(
    beam: *const IctBeam,
    z_m: f64,
    out: *mut f64,
) -> IctStatus {
    let beam = try_ref!(beam);
    let out = try_mut!(out);
    *out = beam.inner.optical_depth_at(z_m);
    IctStatus::Ok
}

/// Small-oscillation radial frequency of an ion at the focus, rad/s.
///
/// # Safety
/// `beam` and `species` must be live handles and `out` a valid double
/// slot.
#[no_mangle]
pub unsafe extern "C" fn ict_beam_radial_frequency_rad(
    beam: *const IctBeam,
    species: *const IctSpecies,
    out: *mut f64,
) -> IctStatus {
    let beam = try_ref!(beam);
    let species = try_ref!(species);
    let out = try_mut!(out);
    *out = beam.inner.radial_optical_frequency(&species.inner);
    IctStatus::Ok
}

/// Releases a beam handle. Null is a no-op.
///
/// # Safety
/// `beam` must be null or a live handle from this library; the handle is
/// dead afterwards.
#[no_mangle]
pub unsafe extern "C" fn ict_beam_free(beam: *mut IctBeam) {
    if !beam.is_null() {
        drop(Box::from_raw(beam));
    }
}

// ---------------------------------------------------------------------
// Chain equilibrium and modes
// ---------------------------------------------------------------------

/// Solves the equilibrium of `n` ions in a harmonic axial well of
/// angular frequency `omega_z_rad` (rad/s). On success writes the handle
/// to `out`; free it with [`ict_equilibrium_free`].
///
/// # Safety
/// `species` must be a live handle and `out` a valid pointer to an
/// equilibrium-handle slot.
#[no_mangle]
pub unsafe extern "C" fn ict_equilibrium_solve(
    n: usize,
    omega_z_rad: f64,
    species: *const IctSpecies,
    out: *mut *mut IctEquilibrium,
) -> IctStatus {
    let species = try_ref!(species);
    let out = try_mut!(out);
    match equilibrium_positions(n, omega_z_rad, &species.inner) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(IctEquilibrium { inner }));
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Number of ions in the chain; 0 for a null handle.
///
/// # Safety
/// `eq` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ict_equilibrium_len(eq: *const IctEquilibrium) -> usize {
    eq.as_ref().map_or(0, |eq| eq.inner.len())
}

/// Characteristic length scale of the chain, meters.
///
/// # Safety
/// `eq` must be a live handle and `out` a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn ict_equilibrium_scale_length_m(
    eq: *const IctEquilibrium,
    out: *mut f64,
) -> IctStatus {
    let eq = try_ref!(eq);
    let out = try_mut!(out);
    *out = eq.inner.scale_length;
    IctStatus::Ok
}

/// Copies the ion positions (meters, ascending) into `buf`, which must
/// hold exactly `len == ict_equilibrium_len(eq)` doubles.
///
/// # Safety
/// `eq` must be a live handle and `buf` a valid array of `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ict_equilibrium_positions_m(
    eq: *const IctEquilibrium,
    buf: *mut f64,
    len: usize,
) -> IctStatus {
    let eq = try_ref!(eq);
    if buf.is_null() {
        return IctStatus::NullPointer;
    }
    if len != eq.inner.len() {
        return IctStatus::InvalidArgument;
    }
    std::ptr::copy_nonoverlapping(eq.inner.axial_positions.as_ptr(), buf, len);
    IctStatus::Ok
}

/// Copies the axial normal-mode angular frequencies (rad/s, ascending)
/// into `buf`, which must hold exactly `len == ict_equilibrium_len(eq)`
/// doubles.
///
/// # Safety
/// `eq` must be a live handle and `buf` a valid array of `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ict_mode_frequencies_rad(
    eq: *const IctEquilibrium,
    buf: *mut f64,
    len: usize,
) -> IctStatus {
    let eq = try_ref!(eq);
    if buf.is_null() {
        return IctStatus::NullPointer;
    }
    if len != eq.inner.len() {
        return IctStatus::InvalidArgument;
    }
    let modes = mode_spectrum(&eq.inner);
    std::ptr::copy_nonoverlapping(modes.frequencies.as_ptr(), buf, len);
    IctStatus::Ok
}

/// Worst axial RMS-displacement-to-spacing ratio across the chain at the
/// given temperature (kelvin). Needs at least two ions.
///
/// # Safety
/// `eq` must be a live handle and `out` a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn ict_lindemann_max(
    eq: *const IctEquilibrium,
    temperature_k: f64,
    out: *mut f64,
) -> IctStatus {
    let eq = try_ref!(eq);
    let out = try_mut!(out);
    let modes = mode_spectrum(&eq.inner);
    match thermal_axial_amplitude(&eq.inner, &modes, temperature_k) {
        Ok(motion) => match motion.max_lindemann() {
            Some(worst) => {
                *out = worst;
                IctStatus::Ok
            }
            None => IctStatus::InvalidArgument,
        },
        Err(e) => status_of(&e),
    }
}

/// Releases an equilibrium handle. Null is a no-op.
///
/// # Safety
/// `eq` must be null or a live handle from this library; the handle is
/// dead afterwards.
#[no_mangle]
pub unsafe extern "C" fn ict_equilibrium_free(eq: *mut IctEquilibrium) {
    if !eq.is_null() {
        drop(Box::from_raw(eq));
    }
}

// ---------------------------------------------------------------------
// Trap depth
// ---------------------------------------------------------------------

/// Per-ion radial trap depth (joules) for a chain held in the beam, with
/// the standard quadrupole split (radial defocusing equal to the axial
/// curvature) derived from the equilibrium's axial frequency. `buf` must
/// hold exactly `len == ict_equilibrium_len(eq)` doubles.
///
/// # Safety
/// `beam` and `eq` must be live handles and `buf` a valid array of `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ict_depth_profile_j(
    beam: *const IctBeam,
    eq: *const IctEquilibrium,
    buf: *mut f64,
    len: usize,
) -> IctStatus {
    let beam = try_ref!(beam);
    let eq = try_ref!(eq);
    if buf.is_null() {
        return IctStatus::NullPointer;
    }
    if len != eq.inner.len() {
        return IctStatus::InvalidArgument;
    }
    let config = match ElectrostaticConfig::axial(eq.inner.omega_z) {
        Ok(config) => config,
        Err(e) => return status_of(&e),
    };
    match depth_profile(&beam.inner, &config, &eq.inner) {
        Ok(profile) => {
            for (slot, record) in (0..len).zip(&profile.records) {
                *buf.add(slot) = record.depth;
            }
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Shallowest per-ion trap depth of the chain (joules) and the index of
/// the ion that has it.
///
/// # Safety
/// `beam` and `eq` must be live handles; `out_depth_j` and `out_index`
/// must be valid slots.
#[no_mangle]
pub unsafe extern "C" fn ict_min_trap_depth_j(
    beam: *const IctBeam,
    eq: *const IctEquilibrium,
    out_depth_j: *mut f64,
    out_index: *mut usize,
) -> IctStatus {
    let beam = try_ref!(beam);
    let eq = try_ref!(eq);
    let out_depth_j = try_mut!(out_depth_j);
    let out_index = try_mut!(out_index);
    let config = match ElectrostaticConfig::axial(eq.inner.omega_z) {
        Ok(config) => config,
        Err(e) => return status_of(&e),
    };
    match depth_profile(&beam.inner, &config, &eq.inner) {
        Ok(profile) => {
            *out_depth_j = profile.min_depth();
            *out_index = profile.min_index();
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

// ---------------------------------------------------------------------
// Survival statistics
// ---------------------------------------------------------------------

/// Radial-cutoff capture probability for a depth-to-thermal-energy ratio
/// `xi >= 0`.
///
/// # Safety
/// `out` must be a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn ict_capture_probability(xi: f64, out: *mut f64) -> IctStatus {
    let out = try_mut!(out);
    match capture_probability(xi) {
        Ok(p) => {
            *out = p;
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Probability that a whole chain at `temperature_k` survives transfer
/// into the beam (product of per-ion capture probabilities, standard
/// quadrupole split).
///
/// # Safety
/// `beam` and `eq` must be live handles and `out` a valid double slot.
#[no_mangle]
pub unsafe extern "C" fn ict_ensemble_survival(
    beam: *const IctBeam,
    eq: *const IctEquilibrium,
    temperature_k: f64,
    out: *mut f64,
) -> IctStatus {
    let beam = try_ref!(beam);
    let eq = try_ref!(eq);
    let out = try_mut!(out);
    let config = match ElectrostaticConfig::axial(eq.inner.omega_z) {
        Ok(config) => config,
        Err(e) => return status_of(&e),
    };
    let profile = match depth_profile(&beam.inner, &config, &eq.inner) {
        Ok(profile) => profile,
        Err(e) => return status_of(&e),
    };
    match ensemble_survival(&profile, temperature_k) {
        Ok(p) => {
            *out = p;
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Wilson score interval for `successes` out of `attempts` at confidence
/// multiplier `z`.
///
/// # Safety
/// `out_low` and `out_high` must be valid double slots.
#[no_mangle]
pub unsafe extern "C" fn ict_wilson_interval(
    successes: u64,
    attempts: u64,
    z: f64,
    out_low: *mut f64,
    out_high: *mut f64,
) -> IctStatus {
    let out_low = try_mut!(out_low);
    let out_high = try_mut!(out_high);
    match wilson_interval(successes, attempts, z) {
        Ok((low, high)) => {
            *out_low = low;
            *out_high = high;
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Probability that a random bright/dark assignment reproduces one
/// specific configuration: 1 / C(n_bright + n_dark, n_dark).
#[no_mangle]
pub extern "C" fn ict_configuration_probability(n_bright: u64, n_dark: u64) -> f64 {
    configuration_probability(n_bright, n_dark)
}

/// Fits the chain temperature (kelvin) to a survival-vs-power scan. The
/// observation arrays run in parallel: `power_w[i]` watts gave
/// `successes[i]` full-chain survivals out of `attempts[i]`, all with
/// `n_ions` ions at axial frequency `omega_z_rad`. Writes the best-fit
/// temperature and its one-sigma error (infinity when the objective is
/// locally flat).
///
/// # Safety
/// The three arrays must each hold `count` valid elements; `beam` and
/// `species` must be live handles; the out-pointers must be valid double
/// slots.
#[no_mangle]
pub unsafe extern "C" fn ict_fit_temperature(
    power_w: *const f64,
    successes: *const u64,
    attempts: *const u64,
    count: usize,
    n_ions: usize,
    beam: *const IctBeam,
    omega_z_rad: f64,
    species: *const IctSpecies,
    out_temperature_k: *mut f64,
    out_std_error_k: *mut f64,
) -> IctStatus {
    let beam = try_ref!(beam);
    let species = try_ref!(species);
    let out_temperature_k = try_mut!(out_temperature_k);
    let out_std_error_k = try_mut!(out_std_error_k);
    if power_w.is_null() || successes.is_null() || attempts.is_null() {
        return IctStatus::NullPointer;
    }

    let mut observations = Vec::with_capacity(count);
    for i in 0..count {
        match SurvivalObservation::new(
            *power_w.add(i),
            n_ions,
            *successes.add(i),
            *attempts.add(i),
        ) {
            Ok(obs) => observations.push(obs),
            Err(e) => return status_of(&e),
        }
    }
    let config = match ElectrostaticConfig::axial(omega_z_rad) {
        Ok(config) => config,
        Err(e) => return status_of(&e),
    };
    match fit_temperature(&observations, &beam.inner, &config, omega_z_rad, &species.inner) {
        Ok(fit) => {
            *out_temperature_k = fit.temperature;
            *out_std_error_k = fit.std_error;
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

// ---------------------------------------------------------------------
// Driven dynamics
// ---------------------------------------------------------------------

/// Integrates a resonantly driven mode from rest and reports the
/// response amplitude (max minus min over the window, halved, meters)
/// and whether the run aborted on an ion collision. `field_vpm` is the
/// drive amplitude in V/m and `omega_mod_rad` the drive frequency;
/// non-positive `duration_s` or `timestep_s` select the defaults (10 ms,
/// 1 us).
///
/// # Safety
/// `species` must be a live handle; `out_amplitude_m` and `out_aborted`
/// must be valid slots.
#[no_mangle]
pub unsafe extern "C" fn ict_drive_response(
    mode: IctDriveMode,
    field_vpm: f64,
    omega_mod_rad: f64,
    omega_z_rad: f64,
    species: *const IctSpecies,
    duration_s: f64,
    timestep_s: f64,
    out_amplitude_m: *mut f64,
    out_aborted: *mut bool,
) -> IctStatus {
    let species = try_ref!(species);
    let out_amplitude_m = try_mut!(out_amplitude_m);
    let out_aborted = try_mut!(out_aborted);

    let base = match mode {
        IctDriveMode::Com => DriveConfig::com(field_vpm, omega_mod_rad, omega_z_rad),
        IctDriveMode::Stretch => DriveConfig::stretch(field_vpm, omega_mod_rad, omega_z_rad),
    };
    let mut cfg = match base.and_then(|c| c.with_species(species.inner)) {
        Ok(cfg) => cfg,
        Err(e) => return status_of(&e),
    };
    if duration_s > 0.0 {
        cfg = match cfg.with_duration(duration_s) {
            Ok(cfg) => cfg,
            Err(e) => return status_of(&e),
        };
    }
    if timestep_s > 0.0 {
        cfg = match cfg.with_timestep(timestep_s) {
            Ok(cfg) => cfg,
            Err(e) => return status_of(&e),
        };
    }
    match simulate(&cfg) {
        Ok(traj) => {
            *out_amplitude_m = response_amplitude(&traj);
            *out_aborted = traj.aborted;
            IctStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

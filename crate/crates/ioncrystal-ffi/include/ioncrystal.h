#ifndef IONCRYSTAL_H
#define IONCRYSTAL_H

/* Generated from the Rust sources by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum IctStatus {
  /**
   * The call succeeded and all out-parameters are set.
   */
  ICT_STATUS_OK = 0,
  /**
   * A parameter or configuration was rejected before any computation.
   */
  ICT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation itself failed (no convergence, domain violation,
   * unidentifiable fit).
   */
  ICT_STATUS_NUMERICAL_FAILURE = 3,
  /**
   * A required pointer was null.
   */
  ICT_STATUS_NULL_POINTER = 4,
} IctStatus;

/**
 * Driven coordinate for [`ict_drive_response`].
 */
typedef enum IctDriveMode {
  /**
   * In-phase (center-of-mass) motion at the axial frequency.
   */
  ICT_DRIVE_MODE_COM = 0,
  /**
   * Out-of-phase two-ion breathing, sqrt(3) times the axial frequency
   * when linear.
   */
  ICT_DRIVE_MODE_STRETCH = 1,
} IctDriveMode;

/**
 * Opaque Gaussian beam handle.
 */
typedef struct IctBeam IctBeam;

/**
 * Opaque solved chain equilibrium handle.
 */
typedef struct IctEquilibrium IctEquilibrium;

/**
 * Opaque ion species handle (mass and charge).
 */
typedef struct IctSpecies IctSpecies;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * A static description of a status code, for error messages. Never
 * null; the string is NUL-terminated and owned by the library.
 */
const char *ict_status_message(enum IctStatus status);

/**
 * New handle for 138Ba+, the default species. Free with
 * [`ict_species_free`].
 */
struct IctSpecies *ict_species_barium138(void);

/**
 * New species from a mass in atomic mass units and a signed charge
 * state in units of e. On success writes the handle to `out`; free it
 * with [`ict_species_free`].
 *
 * # Safety
 * `out` must be a valid pointer to a species-handle slot.
 */
enum IctStatus ict_species_new(double mass_amu, int32_t charge_state, struct IctSpecies **out);

/**
 * Particle mass in kg.
 *
 * # Safety
 * `species` must be a live handle from this library and `out` a valid
 * double slot.
 */
enum IctStatus ict_species_mass_kg(const struct IctSpecies *species, double *out);

/**
 * Releases a species handle. Null is a no-op.
 *
 * # Safety
 * `species` must be null or a live handle from this library; the handle
 * is dead afterwards.
 */
void ict_species_free(struct IctSpecies *species);

/**
 * New handle for the visible-beam preset (532 nm, 2.6 um waist, 9.5 W).
 * Free with [`ict_beam_free`].
 */
struct IctBeam *ict_beam_preset_vis(void);

/**
 * New handle for the near-infrared preset (1064 nm, 5 um waist, 20 W).
 * Free with [`ict_beam_free`].
 */
struct IctBeam *ict_beam_preset_nir(void);

/**
 * New beam from explicit optics: wavelength and waist in meters, power
 * in watts, and the focal depth gained per watt in joules per watt. On
 * success writes the handle to `out`; free it with [`ict_beam_free`].
 *
 * # Safety
 * `out` must be a valid pointer to a beam-handle slot.
 */
enum IctStatus ict_beam_new(double wavelength_m,
                            double waist_m,
                            double power_w,
                            double depth_per_watt_j,
                            struct IctBeam **out);

/**
 * Changes the beam power in place.
 *
 * # Safety
 * `beam` must be a live handle from this library.
 */
enum IctStatus ict_beam_set_power(struct IctBeam *beam, double power_w);

/**
 * Rayleigh length in meters.
 *
 * # Safety
 * `beam` must be a live handle and `out` a valid double slot.
 */
enum IctStatus ict_beam_rayleigh_length_m(const struct IctBeam *beam, double *out);

/**
 * Optical trap depth at axial offset `z_m` from the focus, in joules.
 *
 * # Safety
 * `beam` must be a live handle and `out` a valid double slot.
 */
enum IctStatus ict_beam_depth_at_j(const struct IctBeam *beam, double z_m, double *out);

/**
 * Small-oscillation radial frequency of an ion at the focus, rad/s.
 *
 * # Safety
 * `beam` and `species` must be live handles and `out` a valid double
 * slot.
 */
enum IctStatus ict_beam_radial_frequency_rad(const struct IctBeam *beam,
                                             const struct IctSpecies *species,
                                             double *out);

/**
 * Releases a beam handle. Null is a no-op.
 *
 * # Safety
 * `beam` must be null or a live handle from this library; the handle is
 * dead afterwards.
 */
void ict_beam_free(struct IctBeam *beam);

/**
 * Solves the equilibrium of `n` ions in a harmonic axial well of
 * angular frequency `omega_z_rad` (rad/s). On success writes the handle
 * to `out`; free it with [`ict_equilibrium_free`].
 *
 * # Safety
 * `species` must be a live handle and `out` a valid pointer to an
 * equilibrium-handle slot.
 */
enum IctStatus ict_equilibrium_solve(size_t n,
                                     double omega_z_rad,
                                     const struct IctSpecies *species,
                                     struct IctEquilibrium **out);

/**
 * Number of ions in the chain; 0 for a null handle.
 *
 * # Safety
 * `eq` must be null or a live handle from this library.
 */
size_t ict_equilibrium_len(const struct IctEquilibrium *eq);

/**
 * Characteristic length scale of the chain, meters.
 *
 * # Safety
 * `eq` must be a live handle and `out` a valid double slot.
 */
enum IctStatus ict_equilibrium_scale_length_m(const struct IctEquilibrium *eq, double *out);

/**
 * Copies the ion positions (meters, ascending) into `buf`, which must
 * hold exactly `len == ict_equilibrium_len(eq)` doubles.
 *
 * # Safety
 * `eq` must be a live handle and `buf` a valid array of `len` doubles.
 */
enum IctStatus ict_equilibrium_positions_m(const struct IctEquilibrium *eq,
                                           double *buf,
                                           size_t len);

/**
 * Copies the axial normal-mode angular frequencies (rad/s, ascending)
 * into `buf`, which must hold exactly `len == ict_equilibrium_len(eq)`
 * doubles.
 *
 * # Safety
 * `eq` must be a live handle and `buf` a valid array of `len` doubles.
 */
enum IctStatus ict_mode_frequencies_rad(const struct IctEquilibrium *eq, double *buf, size_t len);

/**
 * Worst axial RMS-displacement-to-spacing ratio across the chain at the
 * given temperature (kelvin). Needs at least two ions.
 *
 * # Safety
 * `eq` must be a live handle and `out` a valid double slot.
 */
enum IctStatus ict_lindemann_max(const struct IctEquilibrium *eq,
                                 double temperature_k,
                                 double *out);

/**
 * Releases an equilibrium handle. Null is a no-op.
 *
 * # Safety
 * `eq` must be null or a live handle from this library; the handle is
 * dead afterwards.
 */
void ict_equilibrium_free(struct IctEquilibrium *eq);

/**
 * Per-ion radial trap depth (joules) for a chain held in the beam, with
 * the standard quadrupole split (radial defocusing equal to the axial
 * curvature) derived from the equilibrium's axial frequency. `buf` must
 * hold exactly `len == ict_equilibrium_len(eq)` doubles.
 *
 * # Safety
 * `beam` and `eq` must be live handles and `buf` a valid array of `len`
 * doubles.
 */
enum IctStatus ict_depth_profile_j(const struct IctBeam *beam,
                                   const struct IctEquilibrium *eq,
                                   double *buf,
                                   size_t len);

/**
 * Shallowest per-ion trap depth of the chain (joules) and the index of
 * the ion that has it.
 *
 * # Safety
 * `beam` and `eq` must be live handles; `out_depth_j` and `out_index`
 * must be valid slots.
 */
enum IctStatus ict_min_trap_depth_j(const struct IctBeam *beam,
                                    const struct IctEquilibrium *eq,
                                    double *out_depth_j,
                                    size_t *out_index);

/**
 * Radial-cutoff capture probability for a depth-to-thermal-energy ratio
 * `xi >= 0`.
 *
 * # Safety
 * `out` must be a valid double slot.
 */
enum IctStatus ict_capture_probability(double xi, double *out);

/**
 * Probability that a whole chain at `temperature_k` survives transfer
 * into the beam (product of per-ion capture probabilities, standard
 * quadrupole split).
 *
 * # Safety
 * `beam` and `eq` must be live handles and `out` a valid double slot.
 */
enum IctStatus ict_ensemble_survival(const struct IctBeam *beam,
                                     const struct IctEquilibrium *eq,
                                     double temperature_k,
                                     double *out);

/**
 * Wilson score interval for `successes` out of `attempts` at confidence
 * multiplier `z`.
 *
 * # Safety
 * `out_low` and `out_high` must be valid double slots.
 */
enum IctStatus ict_wilson_interval(uint64_t successes,
                                   uint64_t attempts,
                                   double z,
                                   double *out_low,
                                   double *out_high);

/**
 * Probability that a random bright/dark assignment reproduces one
 * specific configuration: 1 / C(n_bright + n_dark, n_dark).
 */
double ict_configuration_probability(uint64_t n_bright, uint64_t n_dark);

/**
 * Fits the chain temperature (kelvin) to a survival-vs-power scan. The
 * observation arrays run in parallel: `power_w[i]` watts gave
 * `successes[i]` full-chain survivals out of `attempts[i]`, all with
 * `n_ions` ions at axial frequency `omega_z_rad`. Writes the best-fit
 * temperature and its one-sigma error (infinity when the objective is
 * locally flat).
 *
 * # Safety
 * The three arrays must each hold `count` valid elements; `beam` and
 * `species` must be live handles; the out-pointers must be valid double
 * slots.
 */
enum IctStatus ict_fit_temperature(const double *power_w,
                                   const uint64_t *successes,
                                   const uint64_t *attempts,
                                   size_t count,
                                   size_t n_ions,
                                   const struct IctBeam *beam,
                                   double omega_z_rad,
                                   const struct IctSpecies *species,
                                   double *out_temperature_k,
                                   double *out_std_error_k);

/**
 * Integrates a resonantly driven mode from rest and reports the
 * response amplitude (max minus min over the window, halved, meters)
 * and whether the run aborted on an ion collision. `field_vpm` is the
 * drive amplitude in V/m and `omega_mod_rad` the drive frequency;
 * non-positive `duration_s` or `timestep_s` select the defaults (10 ms,
 * 1 us).
 *
 * # Safety
 * `species` must be a live handle; `out_amplitude_m` and `out_aborted`
 * must be valid slots.
 */
enum IctStatus ict_drive_response(enum IctDriveMode mode,
                                  double field_vpm,
                                  double omega_mod_rad,
                                  double omega_z_rad,
                                  const struct IctSpecies *species,
                                  double duration_s,
                                  double timestep_s,
                                  double *out_amplitude_m,
                                  bool *out_aborted);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IONCRYSTAL_H */

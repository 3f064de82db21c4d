//! Acceptance gate: nine numbered end-to-end checks, each printing one
//! PASS/FAIL line (visible with `cargo test -- --nocapture`). Tolerances
//! are pinned in the assertions, not in shared constants, so each
//! criterion reads as a standalone contract.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ioncrystal::beam::GaussianBeam;
use ioncrystal::crystal::{
    configuration_probability, equilibrium_positions, mode_spectrum, thermal_axial_amplitude,
};
use ioncrystal::dynamics::{frequency_scan, simulate, DriveConfig};
use ioncrystal::potential::{
    finite_difference_hessian, ElectrostaticConfig, IonConfiguration, FD_DEFAULT_STEP,
};
use ioncrystal::survival::{ensemble_survival, fit_temperature, SurvivalObservation};
use ioncrystal::trapdepth::{depth_profile, radial_barrier};
use ioncrystal::IonSpecies;

const TWO_PI: f64 = std::f64::consts::TAU;

fn verdict(criterion: usize, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {status} — {detail}");
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn ba() -> IonSpecies {
    IonSpecies::barium138()
}

#[test]
fn criterion_1_beam_presets_are_self_consistent() {
    let t0 = Instant::now();
    let vis = GaussianBeam::preset_vis();
    let nir = GaussianBeam::preset_nir();

    let zr_vis = vis.rayleigh_length() * 1e6;
    let zr_nir = nir.rayleigh_length() * 1e6;
    let zr_ok = (zr_vis - 40.0).abs() <= 2.0 && (zr_nir - 74.0).abs() <= 1.0;

    let f_vis = vis.radial_optical_frequency(&ba()) / TWO_PI / 1e3;
    let f_nir = nir.radial_optical_frequency(&ba()) / TWO_PI / 1e3;
    let f_ok = (f_vis - 315.0).abs() <= 0.05 * 315.0 && (f_nir - 62.0).abs() <= 0.05 * 62.0;

    verdict(
        1,
        zr_ok && f_ok,
        &format!(
            "z_R = {zr_vis:.2}/{zr_nir:.2} um (40±2/74±1), \
             f_rad = {f_vis:.1}/{f_nir:.1} kHz (315/62 ±5%), {:?}",
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion_2_two_ion_separation() {
    let t0 = Instant::now();
    let eq = equilibrium_positions(2, TWO_PI * 24.96e3, &ba()).unwrap();
    let separation = (eq.axial_positions[1] - eq.axial_positions[0]) * 1e6;
    let ok = (separation - 43.0).abs() <= 0.02 * 43.0;
    verdict(
        2,
        ok,
        &format!("separation {separation:.3} um vs 43 um ±2%, {:?}", t0.elapsed()),
    );
}

#[test]
fn criterion_3_mode_ratios_and_hessian_oracle() {
    let t0 = Instant::now();
    let omega_z = TWO_PI * 25e3;

    // Two ions: {1, √3}·ω_z analytically.
    let eq2 = equilibrium_positions(2, omega_z, &ba()).unwrap();
    let m2 = mode_spectrum(&eq2);
    let r0 = (m2.frequencies[0] / omega_z - 1.0).abs();
    let r1 = (m2.frequencies[1] / (3.0f64.sqrt() * omega_z) - 1.0).abs();
    let two_ok = r0 < 1e-9 && r1 < 1e-9;

    // Three ions: third mode at √(29/5)·ω_z, and the whole spectrum
    // against an independent finite-difference Hessian of the full
    // 3N-coordinate energy.
    let eq3 = equilibrium_positions(3, omega_z, &ba()).unwrap();
    let m3 = mode_spectrum(&eq3);
    let third_ok = (m3.frequencies[2] / ((29.0f64 / 5.0).sqrt() * omega_z) - 1.0).abs() < 1e-9;

    let ions = IonConfiguration::axial_chain(&eq3.axial_positions, ba()).unwrap();
    let config = ElectrostaticConfig::axial(omega_z).unwrap();
    let dark = GaussianBeam::preset_vis().with_power(0.0).unwrap();
    let h = finite_difference_hessian(&dark, &config, &ions, FD_DEFAULT_STEP);
    let mut axial = DMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            axial[(i, j)] = h[(3 * i + 2, 3 * j + 2)] / ba().mass;
        }
    }
    let mut evs: Vec<f64> = axial.symmetric_eigen().eigenvalues.iter().cloned().collect();
    evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let oracle_ok = evs
        .iter()
        .zip(&m3.frequencies)
        .all(|(&ev, &f)| (ev.sqrt() / f - 1.0).abs() < 1e-6);

    verdict(
        3,
        two_ok && third_ok && oracle_ok,
        &format!(
            "N=2 ratios off by {r0:.1e}/{r1:.1e} (<1e-9), N=3 third mode and \
             finite-difference oracle within 1e-6, {:?}",
            t0.elapsed()
        ),
    );
}

/// Brute-force barrier height: scan the radial potential — optical well
/// plus the defocusing inverted parabola — on a fine grid, zooming once
/// around the coarse maximum, then sharpening with a parabolic fit
/// through the best three samples.
fn scanned_barrier(optical_depth: f64, stiffness: f64, waist: f64) -> f64 {
    let v = |x: f64| {
        -0.5 * stiffness * x * x - optical_depth * (-2.0 * x * x / (waist * waist)).exp()
    };
    let v0 = v(0.0);

    // Global pass; widen until the maximum is interior.
    let mut x_hi = 8.0 * waist;
    let coarse_n = 50_000usize;
    let mut best_i;
    let mut h;
    loop {
        h = x_hi / coarse_n as f64;
        best_i = (0..=coarse_n)
            .map(|i| (i, v(i as f64 * h)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
            .0;
        if best_i < coarse_n - coarse_n / 50 {
            break;
        }
        x_hi *= 2.0;
    }

    // Local zoom around the coarse maximum.
    let lo = (best_i as f64 - 2.0) * h;
    let hi = (best_i as f64 + 2.0) * h;
    let fine_n = 20_000usize;
    let hf = (hi - lo) / fine_n as f64;
    let (fi, _) = (0..=fine_n)
        .map(|i| (i, v(lo + i as f64 * hf)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();

    // Parabola through the three samples around the winner.
    let xc = lo + fi as f64 * hf;
    let (ym, yc, yp) = (v(xc - hf), v(xc), v(xc + hf));
    let denom = ym - 2.0 * yc + yp;
    let peak = if denom < 0.0 {
        let dx = 0.5 * hf * (ym - yp) / denom;
        yc - 0.25 * dx / hf * (ym - yp)
    } else {
        yc
    };
    (peak - v0).max(0.0)
}

#[test]
fn criterion_4_depth_closed_form_vs_scan_oracle() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    // Randomized scenarios: preset-anchored beams with jittered optics,
    // random power (including sub-threshold), chain size, and axial
    // frequency.
    let cases: Vec<(GaussianBeam, usize, f64, usize)> = (0..1000)
        .map(|_| {
            let base = if rng.gen_bool(0.5) {
                GaussianBeam::preset_vis()
            } else {
                GaussianBeam::preset_nir()
            };
            let beam = GaussianBeam::new(
                base.wavelength * rng.gen_range(0.8..1.2),
                base.waist * rng.gen_range(0.7..1.3),
                base.power * rng.gen_range(0.0..1.2),
                base.depth_per_watt,
            )
            .unwrap();
            let n = rng.gen_range(1..=6usize);
            let omega_z = TWO_PI * rng.gen_range(8.0..40.0) * 1e3;
            let ion = rng.gen_range(0..n);
            (beam, n, omega_z, ion)
        })
        .collect();

    let outcomes: Vec<(f64, bool)> = cases
        .par_iter()
        .map(|&(ref beam, n, omega_z, ion)| {
            let config = ElectrostaticConfig::axial(omega_z).unwrap();
            let eq = equilibrium_positions(n, omega_z, &ba()).unwrap();
            let profile = depth_profile(beam, &config, &eq).unwrap();
            let r = &profile.records[ion];
            let waist = beam.waist_at(r.axial_position);
            let oracle =
                scanned_barrier(r.optical_depth, ba().mass * r.defocus_curvature, waist);
            if r.depth > 0.0 {
                let rel = (r.depth - oracle).abs() / r.depth;
                (rel, true)
            } else {
                // A closed-form zero must be a scan zero (up to grid dust).
                ((oracle / (r.optical_depth + f64::MIN_POSITIVE)).abs(), false)
            }
        })
        .collect();

    let positive: Vec<f64> = outcomes.iter().filter(|o| o.1).map(|o| o.0).collect();
    let zero_dust = outcomes
        .iter()
        .filter(|o| !o.1)
        .map(|o| o.0)
        .fold(0.0f64, f64::max);
    let worst = positive.iter().cloned().fold(0.0f64, f64::max);
    let agreement_ok = worst < 1e-6 && zero_dust < 1e-9;
    let coverage_ok = positive.len() >= 400 && positive.len() <= 990;

    // Boundary continuity: approaching the vanishing condition
    // 4U = κW² from either side leaves only an O(1e-9·U) barrier.
    let kappa = 1e10f64 * ba().mass;
    let waist = 2.6e-6;
    let u_threshold = kappa * waist * waist / 4.0;
    let (below, _) = radial_barrier(u_threshold * (1.0 - 1e-9), kappa, waist);
    let (above, _) = radial_barrier(u_threshold * (1.0 + 1e-9), kappa, waist);
    let boundary_ok = below.abs() <= 1e-8 * u_threshold && above.abs() <= 1e-8 * u_threshold;

    verdict(
        4,
        agreement_ok && coverage_ok && boundary_ok,
        &format!(
            "worst relative error {worst:.2e} over {} positive-depth cases of 1000 \
             (zero cases dust {zero_dust:.1e}), threshold continuous, {:?}",
            positive.len(),
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion_5_stretch_spectrometry_reproduction() {
    let t0 = Instant::now();
    let omega_z = TWO_PI * 24.96e3;
    let grid: Vec<f64> = (0..=100).map(|i| TWO_PI * (38.0 + 0.1 * i as f64) * 1e3).collect();

    let scan_at = |e_mvpm: f64| {
        let cfg = DriveConfig::stretch(e_mvpm * 1e-3, grid[0], omega_z).unwrap();
        frequency_scan(&cfg, &grid).unwrap()
    };
    let scans = [scan_at(0.3), scan_at(1.8), scan_at(4.0)];
    let peaks_khz: Vec<f64> = scans
        .iter()
        .map(|s| s.peak_omega() / TWO_PI / 1e3)
        .collect();

    // The reference curve (1.8 mV/m) must peak inside [43.0, 43.8] kHz,
    // bracketing both the measured 43.3 ± 0.15 kHz and √3·ω_z = 43.23 kHz.
    let window_ok = peaks_khz[1] >= 43.0 && peaks_khz[1] <= 43.8;

    // Hardening skews the response upward: mirror the curve about the
    // linear stretch frequency and compare at ±0.5 kHz.
    let linear_khz = 3.0f64.sqrt() * 24.96;
    let center = ((linear_khz - 38.0) / 0.1).round() as usize;
    let (lo, hi) = (center - 5, center + 5);
    let asym: Vec<f64> = scans
        .iter()
        .map(|s| s.amplitudes[hi] / s.amplitudes[lo])
        .collect();
    let asym_ok = asym.iter().all(|&r| r > 1.0);

    let monotone_ok = peaks_khz[0] < peaks_khz[1] && peaks_khz[1] < peaks_khz[2];

    verdict(
        5,
        window_ok && asym_ok && monotone_ok,
        &format!(
            "peaks {:.1}/{:.1}/{:.1} kHz (0.3/1.8/4.0 mV/m) in [43.0, 43.8] and \
             rising, high/low asymmetry {:.2}/{:.2}/{:.2} at ±0.5 kHz, {:?}",
            peaks_khz[0], peaks_khz[1], peaks_khz[2], asym[0], asym[1], asym[2],
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion_6_com_integrator_vs_closed_form() {
    let t0 = Instant::now();
    let omega_z = TWO_PI * 24.96e3;
    let omega_mod = 0.8 * omega_z;
    let field = 1.8e-3;

    // Driven harmonic oscillator from rest:
    //   z(t) = A·(sin ωt − (ω/ω₀)·sin ω₀t),  A = (qE/m)/(ω₀² − ω²).
    let drive = ba().charge.abs() * field / ba().mass;
    let amp = drive / (omega_z * omega_z - omega_mod * omega_mod);
    let closed = |t: f64| amp * ((omega_mod * t).sin() - omega_mod / omega_z * (omega_z * t).sin());

    let error_at = |timestep: f64| {
        let cfg = DriveConfig::com(field, omega_mod, omega_z)
            .unwrap()
            .with_timestep(timestep)
            .unwrap();
        let traj = simulate(&cfg).unwrap();
        assert!(!traj.aborted);
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for (&t, &z) in traj.times.iter().zip(&traj.values) {
            let exact = closed(t);
            worst = worst.max((z - exact).abs());
            scale = scale.max(exact.abs());
        }
        worst / scale
    };

    let e1 = error_at(10e-9);
    let e2 = error_at(5e-9);
    let ratio = e1 / e2;
    let ok = e1 < 1e-3 && ratio >= 4.0;

    verdict(
        6,
        ok,
        &format!(
            "relative error {e1:.3e} at 10 ns (<1e-3), shrinks {ratio:.9}x at 5 ns (>=4), {:?}",
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion_7_temperature_fit_round_trip() {
    let t0 = Instant::now();
    let truth = 0.7e-3;
    let omega_z = TWO_PI * 25e3;
    let species = ba();
    let config = ElectrostaticConfig::axial(omega_z).unwrap();
    let eq = equilibrium_positions(3, omega_z, &species).unwrap();
    let powers = [0.6, 0.8, 1.0, 1.2, 1.4, 1.7, 2.0, 2.4];

    let survival_at: Vec<f64> = powers
        .iter()
        .map(|&p| {
            let beam = GaussianBeam::preset_vis().with_power(p).unwrap();
            let profile = depth_profile(&beam, &config, &eq).unwrap();
            ensemble_survival(&profile, truth).unwrap()
        })
        .collect();

    let hits = (0..100u64)
        .into_par_iter()
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let observations: Vec<SurvivalObservation> = powers
                .iter()
                .zip(&survival_at)
                .map(|(&p, &prob)| {
                    let successes = (0..200).filter(|_| rng.gen_bool(prob)).count() as u64;
                    SurvivalObservation::new(p, 3, successes, 200).unwrap()
                })
                .collect();
            let beam = GaussianBeam::preset_vis();
            let fit = fit_temperature(&observations, &beam, &config, omega_z, &species).unwrap();
            (fit.temperature - truth).abs() <= 0.15 * truth
        })
        .count();

    verdict(
        7,
        hits >= 95,
        &format!(
            "{hits}/100 seeded binomial repetitions recover 0.7 mK within 15% (>=95), {:?}",
            t0.elapsed()
        ),
    );
}

#[test]
fn criterion_8_dark_configuration_odds() {
    let t0 = Instant::now();
    let p = configuration_probability(3, 1);
    let p15 = p.powi(15);
    // 0.25 exactly, and 0.25^15 = 9.3e-10 at the printed precision.
    let ok = p == 0.25 && (p15 * 1e11).round() == 93.0 && (p15 / 9.3e-10 - 1.0).abs() < 2e-3;
    verdict(
        8,
        ok,
        &format!("p_rand(3 bright, 1 dark) = {p}, p^15 = {p15:.3e} vs 9.3e-10, {:?}", t0.elapsed()),
    );
}

#[test]
fn criterion_9_lindemann_ratio_stays_crystalline() {
    let t0 = Instant::now();
    let eq = equilibrium_positions(5, TWO_PI * 25e3, &ba()).unwrap();
    let modes = mode_spectrum(&eq);
    let motion = thermal_axial_amplitude(&eq, &modes, 2e-3).unwrap();
    let worst = motion.max_lindemann().unwrap();
    verdict(
        9,
        worst < 0.10,
        &format!("max axial RMS / nearest-neighbor ratio {worst:.4} at 2 mK (<0.10), {:?}", t0.elapsed()),
    );
}


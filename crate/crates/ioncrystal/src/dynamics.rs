//! Driven axial-mode dynamics of a two-ion chain.
//!
//! A uniform oscillating field excites the center-of-mass coordinate
//! directly; the stretch coordinate z_str (half the ion separation)
//! feels the axial well, the Coulomb repulsion, and — because the two
//! ions carry equal charge — the same drive in its own frame:
//!
//! ```text
//! COM:      z̈ = −ω_z²·z + (qE/m)·sin(ω_mod·t)
//! stretch:  z̈ = −ω_z²·z + q²/(16πε₀·m·z²) + (qE/m)·sin(ω_mod·t)
//! ```
//!
//! The stretch equation is force-free at the equilibrium half-separation
//! and linearizes to √3·ω_z; at larger drive the Coulomb term stiffens
//! the restoring force, bending the resonance upward — the asymmetric,
//! amplitude-dependent response the frequency scans map out. Both
//! equations are integrated with fixed-step velocity Verlet and zero
//! damping, so phase-space volume (and energy, up to a bounded wobble)
//! is conserved over the full record.

use rayon::prelude::*;

use crate::beam::GaussianBeam;
use crate::constants::{BOLTZMANN, COULOMB_SCALE, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::potential::ElectrostaticConfig;
use crate::species::IonSpecies;
use crate::trapdepth::axial_depth_at;

/// Default integration window, s.
pub const DEFAULT_DURATION: f64 = 10e-3;

/// Default integration step, s.
pub const DEFAULT_TIMESTEP: f64 = 1e-6;

/// Default depth threshold for radial-loss flagging, K.
pub const DEFAULT_LOSS_TEMPERATURE: f64 = 2e-3;

/// Which axial coordinate is being driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// In-phase motion of the whole chain at ω_z.
    Com,
    /// Out-of-phase breathing of a two-ion chain, √3·ω_z when linear.
    Stretch,
}

/// Drive and integration parameters for one simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    /// Coordinate being driven.
    pub mode_kind: ModeKind,
    /// Drive field amplitude E, V/m.
    pub field_amplitude: f64,
    /// Drive angular frequency, rad/s.
    pub omega_mod: f64,
    /// Integration window, s.
    pub duration: f64,
    /// Integration step, s.
    pub timestep: f64,
    /// Axial trap frequency, rad/s.
    pub omega_z: f64,
    /// Starting half-separation for the stretch coordinate, m
    /// (zero for a COM run of a single ion).
    pub initial_stretch: f64,
    /// Ion species (sets q/m and the Coulomb stiffness).
    pub species: IonSpecies,
}

/// Half-separation at which two ions of the given species rest in a well
/// of frequency `omega_z`: `(q²/(16πε₀·m·ω_z²))^(1/3)`.
pub fn equilibrium_half_separation(omega_z: f64, species: &IonSpecies) -> Result<f64> {
    if !(omega_z > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "axial frequency must be positive, got {omega_z} rad/s"
        )));
    }
    let k = COULOMB_SCALE * (species.charge / ELEMENTARY_CHARGE).powi(2);
    Ok((k / (4.0 * species.mass * omega_z * omega_z)).cbrt())
}

impl DriveConfig {
    /// COM drive of a single ion (or a rigid chain), default window and
    /// step.
    pub fn com(field_amplitude: f64, omega_mod: f64, omega_z: f64) -> Result<Self> {
        let cfg = Self {
            mode_kind: ModeKind::Com,
            field_amplitude,
            omega_mod,
            duration: DEFAULT_DURATION,
            timestep: DEFAULT_TIMESTEP,
            omega_z,
            initial_stretch: 0.0,
            species: IonSpecies::barium138(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Stretch drive of a two-ion chain starting at rest at its
    /// equilibrium half-separation.
    pub fn stretch(field_amplitude: f64, omega_mod: f64, omega_z: f64) -> Result<Self> {
        let species = IonSpecies::barium138();
        let cfg = Self {
            mode_kind: ModeKind::Stretch,
            field_amplitude,
            omega_mod,
            duration: DEFAULT_DURATION,
            timestep: DEFAULT_TIMESTEP,
            omega_z,
            initial_stretch: equilibrium_half_separation(omega_z, &species)?,
            species,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Replaces the integration window.
    pub fn with_duration(mut self, duration: f64) -> Result<Self> {
        self.duration = duration;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the integration step.
    pub fn with_timestep(mut self, timestep: f64) -> Result<Self> {
        self.timestep = timestep;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the drive frequency.
    pub fn with_omega_mod(mut self, omega_mod: f64) -> Result<Self> {
        self.omega_mod = omega_mod;
        self.validate()?;
        Ok(self)
    }

    /// Replaces the starting stretch coordinate (e.g. to displace the
    /// chain from equilibrium for a free-oscillation run).
    pub fn with_initial_stretch(mut self, initial_stretch: f64) -> Result<Self> {
        self.initial_stretch = initial_stretch;
        self.validate()?;
        Ok(self)
    }

    /// Swaps the species; a stretch config is re-seated at the new
    /// species' equilibrium half-separation.
    pub fn with_species(mut self, species: IonSpecies) -> Result<Self> {
        self.species = species;
        if self.mode_kind == ModeKind::Stretch {
            self.initial_stretch = equilibrium_half_separation(self.omega_z, &species)?;
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.field_amplitude >= 0.0) || !self.field_amplitude.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "field amplitude must be finite and non-negative, got {}",
                self.field_amplitude
            )));
        }
        if !(self.omega_mod >= 0.0) || !self.omega_mod.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "drive frequency must be finite and non-negative, got {}",
                self.omega_mod
            )));
        }
        if !(self.omega_z > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "axial frequency must be positive, got {}",
                self.omega_z
            )));
        }
        if !(self.timestep > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "timestep must be positive, got {}",
                self.timestep
            )));
        }
        if self.duration < 100.0 * self.timestep {
            return Err(Error::InvalidConfig(format!(
                "duration {} s is shorter than 100 timesteps",
                self.duration
            )));
        }
        match self.mode_kind {
            ModeKind::Stretch => {
                if !(self.initial_stretch > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "stretch runs need a positive starting half-separation, got {}",
                        self.initial_stretch
                    )));
                }
            }
            ModeKind::Com => {
                if !(self.initial_stretch >= 0.0) || !self.initial_stretch.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "half-separation must be finite and non-negative, got {}",
                        self.initial_stretch
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One integrated run on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Coordinate recorded in `values`.
    pub mode_kind: ModeKind,
    /// Sample times, s, starting at 0.
    pub times: Vec<f64>,
    /// z_COM(t) or z_str(t), m.
    pub values: Vec<f64>,
    /// Matching velocities, m/s.
    pub velocities: Vec<f64>,
    /// True when the run was cut short by an ion collision (stretch
    /// coordinate reaching zero) or numerical divergence; the record
    /// holds the samples up to the abort.
    pub aborted: bool,
    /// Half-separation of the underlying chain (for COM runs of a pair),
    /// m; zero for a single ion.
    pub initial_stretch: f64,
}

/// Shared velocity-Verlet loop. `accel(t, z)` must be the full
/// instantaneous acceleration; `abort(z)` cuts the run short.
fn integrate(
    cfg: &DriveConfig,
    z0: f64,
    accel: impl Fn(f64, f64) -> f64,
    abort: impl Fn(f64) -> bool,
) -> Trajectory {
    let h = cfg.timestep;
    let steps = (cfg.duration / h).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut velocities = Vec::with_capacity(steps + 1);

    let mut z = z0;
    let mut v = 0.0;
    times.push(0.0);
    values.push(z);
    velocities.push(v);

    let mut aborted = false;
    let mut a = accel(0.0, z);
    for step in 0..steps {
        let t_next = (step + 1) as f64 * h;
        let z_next = z + v * h + 0.5 * a * h * h;
        if !z_next.is_finite() || abort(z_next) {
            aborted = true;
            break;
        }
        let a_next = accel(t_next, z_next);
        let v_next = v + 0.5 * (a + a_next) * h;
        if !v_next.is_finite() {
            aborted = true;
            break;
        }
        z = z_next;
        v = v_next;
        a = a_next;
        times.push(t_next);
        values.push(z);
        velocities.push(v);
    }

    Trajectory {
        mode_kind: cfg.mode_kind,
        times,
        values,
        velocities,
        aborted,
        initial_stretch: cfg.initial_stretch,
    }
}

/// Integrates the driven COM coordinate from rest at z = 0.
pub fn simulate_com(cfg: &DriveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.mode_kind != ModeKind::Com {
        return Err(Error::InvalidConfig(
            "simulate_com called with a stretch config".into(),
        ));
    }
    let omega_z2 = cfg.omega_z * cfg.omega_z;
    let drive = cfg.species.charge.abs() * cfg.field_amplitude / cfg.species.mass;
    let omega_mod = cfg.omega_mod;
    Ok(integrate(
        cfg,
        0.0,
        |t, z| -omega_z2 * z + drive * (omega_mod * t).sin(),
        |_| false,
    ))
}

/// Integrates the driven stretch coordinate from rest at
/// `initial_stretch`. A collision (z_str reaching zero) aborts the run
/// with a flagged, truncated record.
pub fn simulate_stretch(cfg: &DriveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if cfg.mode_kind != ModeKind::Stretch {
        return Err(Error::InvalidConfig(
            "simulate_stretch called with a COM config".into(),
        ));
    }
    let omega_z2 = cfg.omega_z * cfg.omega_z;
    let drive = cfg.species.charge.abs() * cfg.field_amplitude / cfg.species.mass;
    let omega_mod = cfg.omega_mod;
    // Repulsive Coulomb stiffness in the relative coordinate: for equal
    // charges at separation 2z, the per-ion force q²/(4πε₀(2z)²) maps to
    // +q²/(16πε₀·m·z²) acceleration on the half-separation.
    let coulomb = COULOMB_SCALE * (cfg.species.charge / ELEMENTARY_CHARGE).powi(2)
        / (4.0 * cfg.species.mass);
    Ok(integrate(
        cfg,
        cfg.initial_stretch,
        |t, z| -omega_z2 * z + coulomb / (z * z) + drive * (omega_mod * t).sin(),
        |z| z <= 0.0,
    ))
}

/// Runs whichever coordinate the config selects.
pub fn simulate(cfg: &DriveConfig) -> Result<Trajectory> {
    match cfg.mode_kind {
        ModeKind::Com => simulate_com(cfg),
        ModeKind::Stretch => simulate_stretch(cfg),
    }
}

/// Half the peak-to-peak swing of the recorded coordinate. For an
/// aborted run this is the pre-abort swing.
pub fn response_amplitude(traj: &Trajectory) -> f64 {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &z in &traj.values {
        min = min.min(z);
        max = max.max(z);
    }
    if min > max {
        0.0
    } else {
        0.5 * (max - min)
    }
}

/// Response amplitudes over a drive-frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveScan {
    /// Drive frequencies, rad/s, strictly increasing.
    pub omega_grid: Vec<f64>,
    /// Response amplitude at each frequency, m.
    pub amplitudes: Vec<f64>,
    /// Per-point loss flag: the run collided/diverged, or (when the scan
    /// was given a beam to check against) the instantaneous radial depth
    /// dropped to the loss threshold.
    pub loss_flags: Vec<bool>,
}

impl DriveScan {
    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.omega_grid.len()
    }

    /// True when the scan is empty.
    pub fn is_empty(&self) -> bool {
        self.omega_grid.is_empty()
    }

    /// Index of the largest response (first on ties).
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (i, &a) in self.amplitudes.iter().enumerate() {
            if a > self.amplitudes[best] {
                best = i;
            }
        }
        best
    }

    /// Drive frequency of the largest response, rad/s.
    pub fn peak_omega(&self) -> f64 {
        self.omega_grid[self.peak_index()]
    }
}

fn validate_grid(omega_grid: &[f64]) -> Result<()> {
    if omega_grid.is_empty() {
        return Err(Error::InvalidConfig("frequency grid is empty".into()));
    }
    for (i, &w) in omega_grid.iter().enumerate() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid frequency {i} must be finite and non-negative, got {w}"
            )));
        }
        if i > 0 && w <= omega_grid[i - 1] {
            return Err(Error::InvalidConfig(
                "frequency grid must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Simulates the template config at every grid frequency, in parallel,
/// and records amplitudes and collision flags in grid order.
pub fn frequency_scan(cfg: &DriveConfig, omega_grid: &[f64]) -> Result<DriveScan> {
    cfg.validate()?;
    validate_grid(omega_grid)?;
    let results: Vec<(f64, bool)> = omega_grid
        .par_iter()
        .map(|&omega| {
            let point = DriveConfig {
                omega_mod: omega,
                ..*cfg
            };
            let traj = simulate(&point).expect("template validated; grid checked");
            (response_amplitude(&traj), traj.aborted)
        })
        .collect();
    Ok(DriveScan {
        omega_grid: omega_grid.to_vec(),
        amplitudes: results.iter().map(|r| r.0).collect(),
        loss_flags: results.iter().map(|r| r.1).collect(),
    })
}

/// Like [`frequency_scan`], but each point's loss flag also checks the
/// instantaneous radial trap depth against `k_B·t_ref` via
/// [`loss_indicator`].
pub fn frequency_scan_with_loss(
    cfg: &DriveConfig,
    omega_grid: &[f64],
    beam: &GaussianBeam,
    electrostatic: &ElectrostaticConfig,
    t_ref: f64,
) -> Result<DriveScan> {
    cfg.validate()?;
    validate_grid(omega_grid)?;
    if !(t_ref >= 0.0) || !t_ref.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "loss threshold temperature must be finite and non-negative, got {t_ref}"
        )));
    }
    let results: Vec<Result<(f64, bool)>> = omega_grid
        .par_iter()
        .map(|&omega| {
            let point = DriveConfig {
                omega_mod: omega,
                ..*cfg
            };
            let traj = simulate(&point)?;
            let lost = loss_indicator(&traj, beam, electrostatic, &cfg.species, t_ref)?;
            Ok((response_amplitude(&traj), lost))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(DriveScan {
        omega_grid: omega_grid.to_vec(),
        amplitudes: results.iter().map(|r| r.0).collect(),
        loss_flags: results.iter().map(|r| r.1).collect(),
    })
}

/// Flags radial loss along a trajectory: reconstructs the ions' axial
/// positions at every sample (±z_str for a stretch run; the rigid pair
/// or single ion shifted by z_COM for a COM run), evaluates the
/// instantaneous local radial depth with the neighbors at their
/// momentary positions, and reports whether it ever dropped to
/// `k_B·t_ref` or below. An aborted (collided) trajectory counts as
/// lost outright. With `t_ref = 0`, only an exactly vanished barrier
/// flags.
pub fn loss_indicator(
    traj: &Trajectory,
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    species: &IonSpecies,
    t_ref: f64,
) -> Result<bool> {
    if !(t_ref >= 0.0) || !t_ref.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "loss threshold temperature must be finite and non-negative, got {t_ref}"
        )));
    }
    if traj.aborted {
        return Ok(true);
    }
    let threshold = BOLTZMANN * t_ref;
    for &z in &traj.values {
        let depth = match traj.mode_kind {
            ModeKind::Stretch => {
                // Symmetric pair: both ions see the same well.
                axial_depth_at(beam, config, species, &[-z, z], 1, 0.0)?.depth
            }
            ModeKind::Com => {
                if traj.initial_stretch > 0.0 {
                    let s = traj.initial_stretch;
                    let positions = [z - s, z + s];
                    let a = axial_depth_at(beam, config, species, &positions, 0, 0.0)?.depth;
                    let b = axial_depth_at(beam, config, species, &positions, 1, 0.0)?.depth;
                    a.min(b)
                } else {
                    axial_depth_at(beam, config, species, &[z], 0, 0.0)?.depth
                }
            }
        };
        if depth <= threshold {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Self-convergence report: trajectory differences at step h vs h/2 and
/// h/2 vs h/4, compared on the coarse grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// max |z_h − z_{h/2}| over the coarse grid, m.
    pub coarse_error: f64,
    /// max |z_{h/2} − z_{h/4}| over the coarse grid, m.
    pub fine_error: f64,
    /// coarse_error / fine_error; ≈ 4 for a second-order integrator.
    pub ratio: f64,
}

/// Reruns the config at h, h/2 and h/4 and measures how fast the
/// trajectories converge; the ratio approaches 4 for a second-order
/// method. Errors if any run aborts.
pub fn convergence_check(cfg: &DriveConfig) -> Result<ConvergenceReport> {
    let run = |divisor: u32| -> Result<Trajectory> {
        let fine = cfg.with_timestep(cfg.timestep / divisor as f64)?;
        let traj = simulate(&fine)?;
        if traj.aborted {
            return Err(Error::NoConvergence(
                "trajectory aborted during the convergence check".into(),
            ));
        }
        Ok(traj)
    };
    let base = run(1)?;
    let half = run(2)?;
    let quarter = run(4)?;
    let mut coarse_error = 0.0f64;
    let mut fine_error = 0.0f64;
    for i in 0..base.values.len() {
        coarse_error = coarse_error.max((base.values[i] - half.values[2 * i]).abs());
        fine_error = fine_error.max((half.values[2 * i] - quarter.values[4 * i]).abs());
    }
    Ok(ConvergenceReport {
        coarse_error,
        fine_error,
        ratio: coarse_error / fine_error,
    })
}

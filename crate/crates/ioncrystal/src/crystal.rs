//! Linear-chain equilibria, axial normal modes, thermal motion, and
//! chain statistics.
//!
//! In a harmonic axial well of frequency `ω_z`, N ions settle onto the
//! axis at positions that minimize
//!
//! ```text
//! V(u) = Σᵢ uᵢ²/2 + Σ_{i<j} 1/|uᵢ − uⱼ|
//! ```
//!
//! once lengths are expressed in units of the Coulomb scale length
//! `ℓ = (q²/(4πε₀·m·ω_z²))^(1/3)`. Everything about the chain layout is
//! universal in these units; the species and frequency only set ℓ.
//!
//! Small axial oscillations about the equilibrium are the eigenmodes of
//! the (dimensionless) Hessian of V; their frequencies are `ω_z·√λ` with
//! λ the eigenvalues. The lowest mode is always the center-of-mass at
//! exactly `ω_z`, and for two ions the next one is the stretch mode at
//! `√3·ω_z`.

use nalgebra::{DMatrix, DVector};

use crate::constants::{BOLTZMANN, COULOMB_SCALE, ELEMENTARY_CHARGE};
use crate::error::{Error, Result};
use crate::species::IonSpecies;

/// Largest chain the solver accepts; longer chains stop being a clean 1D
/// problem and deserve a different treatment.
pub const MAX_IONS: usize = 64;

/// Dimensionless residual-force target for the equilibrium solver, in
/// units of `q²/(4πε₀·ℓ²)`.
pub const FORCE_TOL: f64 = 1e-12;

/// A solved linear-chain equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalEquilibrium {
    /// Species the chain is made of.
    pub species: IonSpecies,
    /// Axial trap frequency, rad/s.
    pub omega_z: f64,
    /// Coulomb scale length ℓ, m.
    pub scale_length: f64,
    /// Ion z-positions, m, ascending and symmetric about 0.
    pub axial_positions: Vec<f64>,
}

impl CrystalEquilibrium {
    /// Number of ions.
    pub fn len(&self) -> usize {
        self.axial_positions.len()
    }

    /// True for an empty chain (never, post-construction).
    pub fn is_empty(&self) -> bool {
        self.axial_positions.is_empty()
    }

    /// End-to-end chain length, m (zero for a single ion).
    pub fn total_length(&self) -> f64 {
        match (self.axial_positions.first(), self.axial_positions.last()) {
            (Some(first), Some(last)) => last - first,
            _ => 0.0,
        }
    }

    /// Distance from ion `i` to its nearest neighbor, m. `None` for a
    /// single-ion chain.
    pub fn nearest_neighbor_distance(&self, i: usize) -> Option<f64> {
        let n = self.len();
        if n < 2 || i >= n {
            return None;
        }
        let z = &self.axial_positions;
        let left = (i > 0).then(|| z[i] - z[i - 1]);
        let right = (i + 1 < n).then(|| z[i + 1] - z[i]);
        match (left, right) {
            (Some(l), Some(r)) => Some(l.min(r)),
            (Some(l), None) => Some(l),
            (None, Some(r)) => Some(r),
            (None, None) => None,
        }
    }
}

/// Axial normal modes of a chain equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    /// Mode angular frequencies, rad/s, ascending. The first is `ω_z`.
    pub frequencies: Vec<f64>,
    /// Orthonormal mode shapes; row m, column i is ion i's amplitude in
    /// mode m. Sign convention: the largest-magnitude component of each
    /// row is positive.
    pub eigenvectors: DMatrix<f64>,
}

/// Thermal axial displacement statistics of a chain at temperature T.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalMotion {
    /// Per-ion RMS axial displacement √⟨zᵢ²⟩, m.
    pub rms: Vec<f64>,
    /// Per-ion ratio of RMS displacement to nearest-neighbor distance.
    /// `None` for a single ion (no neighbor to compare against).
    pub lindemann: Option<Vec<f64>>,
}

impl ThermalMotion {
    /// Largest per-ion Lindemann ratio, the melting-criterion headline
    /// number. `None` for a single ion.
    pub fn max_lindemann(&self) -> Option<f64> {
        self.lindemann
            .as_ref()
            .map(|l| l.iter().cloned().fold(0.0f64, f64::max))
    }
}

/// Dimensionless chain potential `V(u) = Σ u²/2 + Σ_{i<j} 1/|uᵢ−uⱼ|`.
fn chain_potential(u: &DVector<f64>) -> f64 {
    let n = u.len();
    let mut v = 0.0;
    for i in 0..n {
        v += 0.5 * u[i] * u[i];
        for j in (i + 1)..n {
            v += 1.0 / (u[i] - u[j]).abs();
        }
    }
    v
}

/// Gradient of the dimensionless chain potential.
fn chain_gradient(u: &DVector<f64>) -> DVector<f64> {
    let n = u.len();
    let mut g = DVector::zeros(n);
    for i in 0..n {
        g[i] = u[i];
        for j in 0..n {
            if j != i {
                let d = u[i] - u[j];
                g[i] -= d.signum() / (d * d);
            }
        }
    }
    g
}

/// Hessian of the dimensionless chain potential (positive definite for
/// ordered chains, which is what makes plain damped Newton globally
/// convergent here).
fn chain_hessian(u: &DVector<f64>) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if j != i {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                diag += c;
                h[(i, j)] = -c;
            }
        }
        h[(i, i)] = diag;
    }
    h
}

/// Solves the dimensionless chain equilibrium by damped Newton iteration
/// from a uniformly spaced seed.
fn solve_dimensionless(n: usize) -> Result<DVector<f64>> {
    if n == 1 {
        return Ok(DVector::from_element(1, 0.0));
    }
    // Seed spacing shrinks with N roughly like the true mean spacing.
    let spacing = 2.4 / (n as f64).powf(2.0 / 3.0);
    let mut u = DVector::from_fn(n, |i, _| (i as f64 - (n as f64 - 1.0) / 2.0) * spacing);

    for _ in 0..1000 {
        let g = chain_gradient(&u);
        if g.amax() < FORCE_TOL * 1e-2 {
            break;
        }
        let h = chain_hessian(&u);
        let delta = h
            .clone()
            .cholesky()
            .map(|c| c.solve(&g))
            .or_else(|| h.lu().solve(&g))
            .ok_or_else(|| {
                Error::NoConvergence("chain Hessian solve failed".into())
            })?;

        // Backtracking: halve the step until the energy stops increasing.
        let v0 = chain_potential(&u);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &u - step * &delta;
            let vt = chain_potential(&trial);
            if vt.is_finite() && vt <= v0 {
                u = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence(
                "chain energy could not be decreased along the Newton direction".into(),
            ));
        }
    }

    // The minimizer is symmetric about the origin; project onto that
    // symmetry to strip accumulated roundoff, then polish once.
    let mut v: Vec<f64> = u.iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("positions are finite"));
    let sym: Vec<f64> = (0..n).map(|i| 0.5 * (v[i] - v[n - 1 - i])).collect();
    let mut u = DVector::from_vec(sym);
    let g = chain_gradient(&u);
    if let Some(delta) = chain_hessian(&u).cholesky().map(|c| c.solve(&g)) {
        u -= delta;
    }

    let residual = chain_gradient(&u).amax();
    if residual > FORCE_TOL {
        return Err(Error::NoConvergence(format!(
            "chain equilibrium residual {residual:e} exceeds {FORCE_TOL:e}"
        )));
    }
    Ok(u)
}

/// Solves the equilibrium positions of `n` ions of the given species in a
/// harmonic axial well of frequency `omega_z` (rad/s).
///
/// Only the electrostatic axial well and the mutual Coulomb repulsion
/// enter; the optical well is orders of magnitude weaker axially and is
/// treated as a perturbation elsewhere.
pub fn equilibrium_positions(
    n: usize,
    omega_z: f64,
    species: &IonSpecies,
) -> Result<CrystalEquilibrium> {
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one ion".into()));
    }
    if n > MAX_IONS {
        return Err(Error::InvalidConfig(format!(
            "chains longer than {MAX_IONS} ions are outside this model, got {n}"
        )));
    }
    if !(omega_z > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "axial frequency must be positive, got {omega_z} rad/s"
        )));
    }
    let k = COULOMB_SCALE * (species.charge / ELEMENTARY_CHARGE).powi(2);
    let scale_length = (k / (species.mass * omega_z * omega_z)).cbrt();
    let u = solve_dimensionless(n)?;
    Ok(CrystalEquilibrium {
        species: *species,
        omega_z,
        scale_length,
        axial_positions: u.iter().map(|ui| ui * scale_length).collect(),
    })
}

/// Axial normal modes of a solved equilibrium: eigen-decomposition of the
/// dimensionless chain Hessian, frequencies `ω_z·√λ` ascending.
pub fn mode_spectrum(eq: &CrystalEquilibrium) -> ModeSpectrum {
    let n = eq.len();
    let u = DVector::from_fn(n, |i, _| eq.axial_positions[i] / eq.scale_length);
    let h = chain_hessian(&u);
    let decomp = h.symmetric_eigen();

    // Sort modes by eigenvalue, ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[a]
            .partial_cmp(&decomp.eigenvalues[b])
            .expect("eigenvalues are finite")
    });

    let mut eigenvectors = DMatrix::zeros(n, n);
    let mut frequencies = Vec::with_capacity(n);
    for (row, &m) in order.iter().enumerate() {
        frequencies.push(eq.omega_z * decomp.eigenvalues[m].sqrt());
        let col = decomp.eigenvectors.column(m);
        // Deterministic sign: largest-magnitude component positive.
        let mut lead = 0;
        for i in 0..n {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        let sign = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[(row, i)] = sign * col[i];
        }
    }
    ModeSpectrum {
        frequencies,
        eigenvectors,
    }
}

/// Thermal axial displacement per ion at temperature `temperature` (K) by
/// equipartition over the normal modes:
///
/// ```text
/// ⟨zᵢ²⟩ = Σ_m (k_B·T / (m·ω_m²)) · v_{m,i}²
/// ```
pub fn thermal_axial_amplitude(
    eq: &CrystalEquilibrium,
    modes: &ModeSpectrum,
    temperature: f64,
) -> Result<ThermalMotion> {
    if !(temperature >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "temperature must be non-negative, got {temperature} K"
        )));
    }
    let n = eq.len();
    let m = eq.species.mass;
    let mut rms = Vec::with_capacity(n);
    for i in 0..n {
        let mut z2 = 0.0;
        for (mode, &omega) in modes.frequencies.iter().enumerate() {
            let v = modes.eigenvectors[(mode, i)];
            z2 += BOLTZMANN * temperature / (m * omega * omega) * v * v;
        }
        rms.push(z2.sqrt());
    }
    let lindemann = (n >= 2).then(|| {
        (0..n)
            .map(|i| {
                rms[i]
                    / eq.nearest_neighbor_distance(i)
                        .expect("n >= 2 guarantees a neighbor")
            })
            .collect()
    });
    Ok(ThermalMotion { rms, lindemann })
}

/// 1D plasma coupling parameter `Γ = q²/(4πε₀·k_B·T·a)` for unit charges
/// at temperature `temperature` (K) and characteristic spacing `spacing`
/// (m). Γ ≳ 1 marks the onset of spatial ordering.
pub fn plasma_coupling_1d(temperature: f64, spacing: f64) -> Result<f64> {
    if !(temperature > 0.0) || !(spacing > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "plasma coupling needs positive temperature and spacing, got \
             {temperature} K and {spacing} m"
        )));
    }
    Ok(COULOMB_SCALE / (BOLTZMANN * temperature * spacing))
}

/// Temperature (K) at which the 1D plasma coupling crosses Γ = 1 for the
/// given spacing: the crystallization scale for unit charges.
pub fn critical_temperature_1d(spacing: f64) -> Result<f64> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "spacing must be positive, got {spacing} m"
        )));
    }
    Ok(COULOMB_SCALE / (BOLTZMANN * spacing))
}

/// Binomial coefficient C(n, k) in floating point.
fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * ((n - k + i) as f64) / (i as f64))
}

/// Probability that a uniformly random arrangement of `n_bright`
/// indistinguishable bright and `n_dark` indistinguishable dark ions on a
/// chain reproduces one particular pattern:
/// `p = n_bright!·n_dark!/(n_bright+n_dark)! = 1/C(n, n_dark)`.
pub fn configuration_probability(n_bright: u64, n_dark: u64) -> f64 {
    1.0 / binomial(n_bright + n_dark, n_dark)
}

//! Total potential energy of an ion configuration and its derivatives.
//!
//! Three contributions add up:
//!
//! * **Electrostatic**: a quadrupole described by mass-normalized
//!   curvatures `ω̃²` per axis, `U = (m/2)·Σᵢ (ω̃²_x xᵢ² + ω̃²_y yᵢ² +
//!   ω̃²_z zᵢ²)`, plus an optional uniform stray field `U = −q·E·rᵢ`.
//!   Vacuum electrostatics forces the curvatures to satisfy Laplace's
//!   equation: they must sum to zero, so radial confinement is bought with
//!   axial anti-confinement and vice versa.
//! * **Coulomb**: pairwise repulsion `Σ_{i<j} q²/(4πε₀·r_ij)`.
//! * **Optical**: each ion sits in the Gaussian well
//!   `−U(zᵢ)·exp(−2(xᵢ²+yᵢ²)/w(zᵢ)²)` of the beam propagating along z.
//!
//! Gradient and Hessian are analytic; central-finite-difference versions
//! (step [`FD_DEFAULT_STEP`]) are provided as an independent cross-check
//! and are what the test suite diffs the analytic forms against.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::beam::GaussianBeam;
use crate::constants::COULOMB_SCALE;
use crate::error::{Error, Result};
use crate::species::IonSpecies;

/// Relative tolerance on the Laplace constraint `Σ curvatures = 0`.
pub const LAPLACE_REL_TOL: f64 = 1e-9;

/// Step (m) for the finite-difference derivative fallbacks; about 1e-4 of
/// a typical waist, small enough for curvature, large enough to stay clear
/// of cancellation noise.
pub const FD_DEFAULT_STEP: f64 = 1e-9;

/// Mass-normalized curvatures of the electrostatic trap, (rad/s)².
///
/// `curvature_z > 0` confines the chain axially; the radial curvatures are
/// then necessarily not both positive (Laplace). Signs are carried
/// explicitly — a negative radial curvature is the defocusing that the
/// optical well has to fight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectrostaticConfig {
    /// ω̃²_x, (rad/s)².
    pub curvature_x: f64,
    /// ω̃²_y, (rad/s)².
    pub curvature_y: f64,
    /// ω̃²_z, (rad/s)², strictly positive.
    pub curvature_z: f64,
    /// Uniform residual (stray) field, V/m per axis. Default zero; kept as
    /// a knob for compensation sensitivity studies.
    pub stray_field: [f64; 3],
}

impl ElectrostaticConfig {
    /// Builds a config from explicit curvatures, enforcing positive axial
    /// confinement and the Laplace sum rule to within [`LAPLACE_REL_TOL`].
    pub fn new(curvature_x: f64, curvature_y: f64, curvature_z: f64) -> Result<Self> {
        if !(curvature_z > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "axial curvature must be positive, got {curvature_z} (rad/s)^2"
            )));
        }
        let sum = curvature_x + curvature_y + curvature_z;
        let scale = curvature_x
            .abs()
            .max(curvature_y.abs())
            .max(curvature_z.abs());
        if !sum.is_finite() || sum.abs() > LAPLACE_REL_TOL * scale {
            return Err(Error::InvalidConfig(format!(
                "curvatures must sum to zero (Laplace), got {sum:e} (rad/s)^2 \
                 against scale {scale:e}"
            )));
        }
        Ok(ElectrostaticConfig {
            curvature_x,
            curvature_y,
            curvature_z,
            stray_field: [0.0; 3],
        })
    }

    /// Default curvature split for an axial frequency `ω_z`: all the
    /// anti-confinement on x, none on y, i.e. `(−ω_z², 0, +ω_z²)`.
    pub fn axial(omega_z: f64) -> Result<Self> {
        if !(omega_z > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "axial frequency must be positive, got {omega_z} rad/s"
            )));
        }
        let wz2 = omega_z * omega_z;
        Self::new(-wz2, 0.0, wz2)
    }

    /// Axial secular frequency `ω_z = √curvature_z`, rad/s.
    pub fn omega_z(&self) -> f64 {
        self.curvature_z.sqrt()
    }

    /// Same config with a uniform stray field, V/m.
    pub fn with_stray_field(mut self, field: [f64; 3]) -> Self {
        self.stray_field = field;
        self
    }
}

/// A set of ion positions plus the species they share.
#[derive(Debug, Clone, PartialEq)]
pub struct IonConfiguration {
    /// Cartesian ion positions, m. The beam propagates along z.
    pub positions: Vec<Vector3<f64>>,
    /// Species common to all ions.
    pub species: IonSpecies,
}

impl IonConfiguration {
    /// Builds a configuration, rejecting empty sets, non-finite
    /// coordinates, and coincident ions (the Coulomb energy would be
    /// singular).
    pub fn new(positions: Vec<Vector3<f64>>, species: IonSpecies) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidConfig("need at least one ion".into()));
        }
        for (i, p) in positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "ion {i} has a non-finite coordinate"
                )));
            }
        }
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                if positions[i] == positions[j] {
                    return Err(Error::InvalidConfig(format!(
                        "ions {i} and {j} are coincident"
                    )));
                }
            }
        }
        Ok(IonConfiguration { positions, species })
    }

    /// Convenience: ions on the beam axis at the given z coordinates.
    pub fn axial_chain(zs: &[f64], species: IonSpecies) -> Result<Self> {
        Self::new(
            zs.iter().map(|&z| Vector3::new(0.0, 0.0, z)).collect(),
            species,
        )
    }

    /// Number of ions.
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// True when the configuration is empty (never, post-construction).
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Electrostatic energy (quadrupole + stray field), J.
pub fn electrostatic_energy(config: &ElectrostaticConfig, ions: &IonConfiguration) -> f64 {
    let m = ions.species.mass;
    let q = ions.species.charge;
    let e = Vector3::from(config.stray_field);
    ions.positions
        .iter()
        .map(|p| {
            0.5 * m
                * (config.curvature_x * p.x * p.x
                    + config.curvature_y * p.y * p.y
                    + config.curvature_z * p.z * p.z)
                - q * e.dot(p)
        })
        .sum()
}

/// Pairwise Coulomb energy `Σ_{i<j} q²/(4πε₀ r_ij)`, J. Zero for a single
/// ion (no pairs).
pub fn coulomb_energy(ions: &IonConfiguration) -> f64 {
    let q = ions.species.charge;
    let k = COULOMB_SCALE * (q / crate::constants::ELEMENTARY_CHARGE).powi(2);
    let n = ions.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += k / (ions.positions[i] - ions.positions[j]).norm();
        }
    }
    sum
}

/// Optical energy `Σᵢ −U(zᵢ)·exp(−2(xᵢ²+yᵢ²)/w(zᵢ)²)`, J (≤ 0 for an
/// attractive well).
pub fn optical_energy(beam: &GaussianBeam, ions: &IonConfiguration) -> f64 {
    ions.positions
        .iter()
        .map(|p| {
            let w2 = {
                let w = beam.waist_at(p.z);
                w * w
            };
            let rho2 = p.x * p.x + p.y * p.y;
            -beam.optical_depth_at(p.z) * (-2.0 * rho2 / w2).exp()
        })
        .sum()
}

/// Total potential energy, J.
pub fn total_energy(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    ions: &IonConfiguration,
) -> f64 {
    electrostatic_energy(config, ions) + coulomb_energy(ions) + optical_energy(beam, ions)
}

/// Partial derivatives of one ion's optical energy with respect to
/// `p = x²+y²` and `s = 1+(z/z_R)²`, used by gradient and Hessian.
struct OpticalPartials {
    f_p: f64,
    f_pp: f64,
    f_s: f64,
    f_ps: f64,
    f_ss: f64,
}

fn optical_partials(beam: &GaussianBeam, pos: &Vector3<f64>) -> (OpticalPartials, f64, f64) {
    let a = beam.depth_per_watt * beam.power;
    let zr = beam.rayleigh_length();
    let s = 1.0 + (pos.z / zr).powi(2);
    let s_prime = 2.0 * pos.z / (zr * zr);
    let qw = 2.0 / (beam.waist * beam.waist);
    let p = pos.x * pos.x + pos.y * pos.y;
    let e = (-qw * p / s).exp();
    let qps = qw * p / s;
    (
        OpticalPartials {
            f_p: a * qw * e / (s * s),
            f_pp: -a * qw * qw * e / (s * s * s),
            f_s: a * e * (1.0 - qps) / (s * s),
            f_ps: a * qw * e * (qps - 2.0) / (s * s * s),
            f_ss: a * e * (-2.0 + 4.0 * qps - qps * qps) / (s * s * s),
        },
        s_prime,
        2.0 / (zr * zr),
    )
}

/// Analytic gradient of the total energy, J/m, in ion-major order
/// `(x₀, y₀, z₀, x₁, …)`.
pub fn total_gradient(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    ions: &IonConfiguration,
) -> DVector<f64> {
    let n = ions.len();
    let m = ions.species.mass;
    let q = ions.species.charge;
    let k = COULOMB_SCALE * (q / crate::constants::ELEMENTARY_CHARGE).powi(2);
    let stray = Vector3::from(config.stray_field);
    let mut g = DVector::zeros(3 * n);

    for (i, p) in ions.positions.iter().enumerate() {
        // Quadrupole + stray field.
        g[3 * i] += m * config.curvature_x * p.x - q * stray.x;
        g[3 * i + 1] += m * config.curvature_y * p.y - q * stray.y;
        g[3 * i + 2] += m * config.curvature_z * p.z - q * stray.z;

        // Optical: dU/dx = F_p·2x, dU/dy = F_p·2y, dU/dz = F_s·s'.
        let (op, s_prime, _) = optical_partials(beam, p);
        g[3 * i] += op.f_p * 2.0 * p.x;
        g[3 * i + 1] += op.f_p * 2.0 * p.y;
        g[3 * i + 2] += op.f_s * s_prime;
    }

    // Coulomb: dU/drᵢ = −k·(rᵢ−rⱼ)/r³ summed over partners.
    for i in 0..n {
        for j in (i + 1)..n {
            let d = ions.positions[i] - ions.positions[j];
            let r = d.norm();
            let f = k / (r * r * r);
            for ax in 0..3 {
                g[3 * i + ax] -= f * d[ax];
                g[3 * j + ax] += f * d[ax];
            }
        }
    }
    g
}

/// Analytic Hessian of the total energy, J/m², same index order as
/// [`total_gradient`]. Symmetric by construction.
pub fn total_hessian(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    ions: &IonConfiguration,
) -> DMatrix<f64> {
    let n = ions.len();
    let m = ions.species.mass;
    let q = ions.species.charge;
    let k = COULOMB_SCALE * (q / crate::constants::ELEMENTARY_CHARGE).powi(2);
    let mut h = DMatrix::zeros(3 * n, 3 * n);

    for (i, p) in ions.positions.iter().enumerate() {
        h[(3 * i, 3 * i)] += m * config.curvature_x;
        h[(3 * i + 1, 3 * i + 1)] += m * config.curvature_y;
        h[(3 * i + 2, 3 * i + 2)] += m * config.curvature_z;

        let (op, s_prime, s_second) = optical_partials(beam, p);
        let (x, y) = (p.x, p.y);
        let hxx = 4.0 * x * x * op.f_pp + 2.0 * op.f_p;
        let hyy = 4.0 * y * y * op.f_pp + 2.0 * op.f_p;
        let hxy = 4.0 * x * y * op.f_pp;
        let hxz = 2.0 * x * s_prime * op.f_ps;
        let hyz = 2.0 * y * s_prime * op.f_ps;
        let hzz = op.f_ss * s_prime * s_prime + op.f_s * s_second;
        h[(3 * i, 3 * i)] += hxx;
        h[(3 * i + 1, 3 * i + 1)] += hyy;
        h[(3 * i + 2, 3 * i + 2)] += hzz;
        h[(3 * i, 3 * i + 1)] += hxy;
        h[(3 * i + 1, 3 * i)] += hxy;
        h[(3 * i, 3 * i + 2)] += hxz;
        h[(3 * i + 2, 3 * i)] += hxz;
        h[(3 * i + 1, 3 * i + 2)] += hyz;
        h[(3 * i + 2, 3 * i + 1)] += hyz;
    }

    // Coulomb pair blocks: ∂²(k/r)/∂rᵢ∂rᵢ = k(3·d dᵀ − r²·I)/r⁵, and the
    // cross block is its negative.
    for i in 0..n {
        for j in (i + 1)..n {
            let d = ions.positions[i] - ions.positions[j];
            let r = d.norm();
            let r5 = r.powi(5);
            for a in 0..3 {
                for b in 0..3 {
                    // (d[a]·d[b]) first, so the (a,b) and (b,a) entries
                    // round identically and the matrix is exactly symmetric.
                    let block = k * (3.0 * (d[a] * d[b]) - if a == b { r * r } else { 0.0 }) / r5;
                    h[(3 * i + a, 3 * i + b)] += block;
                    h[(3 * j + a, 3 * j + b)] += block;
                    h[(3 * i + a, 3 * j + b)] -= block;
                    h[(3 * j + a, 3 * i + b)] -= block;
                }
            }
        }
    }
    h
}

fn displaced(ions: &IonConfiguration, idx: usize, delta: f64) -> IonConfiguration {
    let mut moved = ions.clone();
    moved.positions[idx / 3][idx % 3] += delta;
    moved
}

/// Central-finite-difference gradient of the total energy (step in m).
/// Independent of the analytic path; tests use it as the oracle.
pub fn finite_difference_gradient(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    ions: &IonConfiguration,
    step: f64,
) -> DVector<f64> {
    let n3 = 3 * ions.len();
    DVector::from_fn(n3, |k, _| {
        let plus = total_energy(beam, config, &displaced(ions, k, step));
        let minus = total_energy(beam, config, &displaced(ions, k, -step));
        (plus - minus) / (2.0 * step)
    })
}

/// Central-finite-difference Hessian of the total energy (step in m).
pub fn finite_difference_hessian(
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    ions: &IonConfiguration,
    step: f64,
) -> DMatrix<f64> {
    let n3 = 3 * ions.len();
    let f0 = total_energy(beam, config, ions);
    let mut h = DMatrix::zeros(n3, n3);
    for a in 0..n3 {
        let fpp = total_energy(beam, config, &displaced(ions, a, step));
        let fmm = total_energy(beam, config, &displaced(ions, a, -step));
        h[(a, a)] = (fpp - 2.0 * f0 + fmm) / (step * step);
        for b in (a + 1)..n3 {
            let pp = total_energy(beam, config, &displaced(&displaced(ions, a, step), b, step));
            let pm = total_energy(beam, config, &displaced(&displaced(ions, a, step), b, -step));
            let mp = total_energy(beam, config, &displaced(&displaced(ions, a, -step), b, step));
            let mm = total_energy(
                beam,
                config,
                &displaced(&displaced(ions, a, -step), b, -step),
            );
            let val = (pp - pm - mp + mm) / (4.0 * step * step);
            h[(a, b)] = val;
            h[(b, a)] = val;
        }
    }
    h
}

//! Survival statistics and temperature inference.
//!
//! A thermal ion in a radial well of finite depth ΔU either stays or
//! boils out; integrating a Boltzmann distribution up to the barrier
//! gives the radial-cutoff capture probability
//!
//! ```text
//! p(ξ) = 1 − e^(−2ξ) − 2ξ·e^(−ξ),   ξ = ΔU/(k_B·T)
//! ```
//!
//! A chain survives only if every ion does, so the ensemble probability
//! is the product of per-ion factors. Measured survival fractions over a
//! beam-power scan then pin down the temperature: each power sets a depth
//! profile, the model predicts the survival probability as a function of
//! T, and a one-parameter weighted least-squares fit inverts it.

use std::io::Read as IoRead;
use std::path::Path;

use serde::Deserialize;

use crate::beam::GaussianBeam;
use crate::constants::BOLTZMANN;
use crate::crystal::equilibrium_positions;
use crate::error::{Error, Result};
use crate::potential::ElectrostaticConfig;
use crate::species::IonSpecies;
use crate::trapdepth::{depth_profile, DepthProfile};

/// Default confidence multiplier for Wilson intervals (one sigma).
pub const DEFAULT_CONFIDENCE_Z: f64 = 1.0;

/// Temperature search window for the fit, K.
pub const FIT_TEMPERATURE_RANGE: (f64, f64) = (1e-5, 1.0);

/// One survival measurement: how many of `attempts` transfers at a given
/// beam power kept all `n_ions` ions.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SurvivalObservation {
    /// Beam power for this data point, W.
    #[serde(rename = "power_w")]
    pub power: f64,
    /// Chain size the attempts were made with.
    pub n_ions: usize,
    /// Attempts in which the full chain survived.
    pub successes: u64,
    /// Total attempts.
    pub attempts: u64,
}

impl SurvivalObservation {
    /// Validates counts and power.
    pub fn new(power: f64, n_ions: usize, successes: u64, attempts: u64) -> Result<Self> {
        let obs = Self {
            power,
            n_ions,
            successes,
            attempts,
        };
        obs.validate()?;
        Ok(obs)
    }

    fn validate(&self) -> Result<()> {
        if !(self.power >= 0.0) || !self.power.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "power must be finite and non-negative, got {}",
                self.power
            )));
        }
        if self.n_ions == 0 {
            return Err(Error::InvalidConfig("n_ions must be at least 1".into()));
        }
        if self.attempts == 0 {
            return Err(Error::InvalidConfig("attempts must be at least 1".into()));
        }
        if self.successes > self.attempts {
            return Err(Error::InvalidConfig(format!(
                "{} successes out of {} attempts",
                self.successes, self.attempts
            )));
        }
        Ok(())
    }

    /// Observed survival fraction.
    pub fn fraction(&self) -> f64 {
        self.successes as f64 / self.attempts as f64
    }
}

/// Result of a temperature fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureFit {
    /// Best-fit temperature, K.
    pub temperature: f64,
    /// One-sigma statistical error from the objective's curvature, K.
    /// Infinite when the objective is locally flat.
    pub std_error: f64,
    /// Weighted sum of squared residuals at the minimum.
    pub residual: f64,
    /// Number of observations used.
    pub n_points: usize,
}

/// Radial-cutoff capture probability `p(ξ) = 1 − e^(−2ξ) − 2ξe^(−ξ)` for
/// a well of `ξ` thermal units, clamped to [0, 1].
pub fn capture_probability(xi: f64) -> Result<f64> {
    if !(xi >= 0.0) {
        return Err(Error::Domain(format!(
            "depth-to-temperature ratio must be non-negative, got {xi}"
        )));
    }
    let p = 1.0 - (-2.0 * xi).exp() - 2.0 * xi * (-xi).exp();
    Ok(p.clamp(0.0, 1.0))
}

/// Probability that a whole chain with the given depth profile survives
/// at temperature `temperature` (K): the product of per-ion capture
/// probabilities. Any ion with zero depth makes the product zero.
pub fn ensemble_survival(profile: &DepthProfile, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "temperature must be positive, got {temperature} K"
        )));
    }
    let kt = BOLTZMANN * temperature;
    let mut p = 1.0;
    for record in &profile.records {
        p *= capture_probability(record.depth / kt)?;
    }
    Ok(p)
}

/// Wilson score interval for `successes` out of `attempts`, with
/// confidence multiplier `z` (1.0 ≈ one sigma, 1.96 ≈ 95%). Both bounds
/// lie in [0, 1] and always bracket the raw fraction.
pub fn wilson_interval(successes: u64, attempts: u64, z: f64) -> Result<(f64, f64)> {
    if attempts == 0 {
        return Err(Error::InvalidConfig("attempts must be at least 1".into()));
    }
    if successes > attempts {
        return Err(Error::InvalidConfig(format!(
            "{successes} successes out of {attempts} attempts"
        )));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "confidence multiplier must be positive and finite, got {z}"
        )));
    }
    let n = attempts as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p_hat + z2 / (2.0 * n);
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    // At the count boundaries the score bound is exactly the boundary;
    // computing it would leave ±1 ulp of sqrt roundoff behind.
    let low = if successes == 0 {
        0.0
    } else {
        ((center - half) / denom).clamp(0.0, 1.0)
    };
    let high = if successes == attempts {
        1.0
    } else {
        ((center + half) / denom).clamp(0.0, 1.0)
    };
    Ok((low, high))
}

/// Reads survival observations from CSV with the header
/// `power_w,n_ions,successes,attempts`. Malformed or invalid rows are
/// collected and reported together with their file line numbers.
pub fn read_observations_csv<P: AsRef<Path>>(path: P) -> Result<Vec<SurvivalObservation>> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| {
        Error::InvalidConfig(format!("cannot open {}: {e}", path.as_ref().display()))
    })?;
    read_observations(file)
}

/// Reads survival observations from any CSV reader; see
/// [`read_observations_csv`].
pub fn read_observations<R: IoRead>(reader: R) -> Result<Vec<SurvivalObservation>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    // Header match is case-insensitive (`power_W` and `power_w` both occur
    // in the wild).
    let lowered: csv::StringRecord = match csv_reader.headers() {
        Ok(h) => h.iter().map(str::to_lowercase).collect(),
        Err(_) => {
            return Err(Error::MalformedInput {
                lines: vec![1],
                reason: "line 1: unreadable header row".to_string(),
            })
        }
    };
    csv_reader.set_headers(lowered);
    let mut observations = Vec::new();
    let mut bad_lines = Vec::new();
    let mut problems = Vec::new();
    for (index, row) in csv_reader.deserialize::<SurvivalObservation>().enumerate() {
        // Data rows start on line 2, after the header.
        let fallback_line = index + 2;
        match row {
            Ok(obs) => match obs.validate() {
                Ok(()) => observations.push(obs),
                Err(e) => {
                    bad_lines.push(fallback_line);
                    problems.push(format!("line {fallback_line}: {e}"));
                }
            },
            Err(e) => {
                let line = e
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or(fallback_line);
                bad_lines.push(line);
                problems.push(format!("line {line}: unparsable row"));
            }
        }
    }
    if !bad_lines.is_empty() {
        return Err(Error::MalformedInput {
            lines: bad_lines,
            reason: problems.join("; "),
        });
    }
    Ok(observations)
}

/// Fits the chain temperature to a power scan of survival fractions.
///
/// For each observation the depth profile is rebuilt at that power (same
/// species, chain size, and trap frequency throughout) and the model
/// probability is compared to the observed fraction, weighted by the
/// inverse squared half-width of its one-sigma Wilson interval. The
/// single parameter T is found by golden-section search on ln T over
/// [`FIT_TEMPERATURE_RANGE`]; the quoted error comes from the curvature
/// of the objective at the minimum. Observation order does not affect
/// the result.
pub fn fit_temperature(
    observations: &[SurvivalObservation],
    beam: &GaussianBeam,
    config: &ElectrostaticConfig,
    omega_z: f64,
    species: &IonSpecies,
) -> Result<TemperatureFit> {
    if observations.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "need at least 3 observations, got {}",
            observations.len()
        )));
    }
    for obs in observations {
        obs.validate()?;
    }
    let n_ions = observations[0].n_ions;
    if observations.iter().any(|o| o.n_ions != n_ions) {
        return Err(Error::InvalidConfig(
            "all observations must share the same chain size".into(),
        ));
    }
    let mut powers: Vec<f64> = observations.iter().map(|o| o.power).collect();
    powers.sort_by(|a, b| a.partial_cmp(b).expect("powers are finite"));
    powers.dedup();
    if powers.len() < 2 {
        return Err(Error::InvalidConfig(
            "observations must span at least 2 distinct powers".into(),
        ));
    }
    if observations.iter().all(|o| o.successes == 0)
        || observations.iter().all(|o| o.successes == o.attempts)
    {
        return Err(Error::FitUnidentifiable(
            "all survival fractions saturated at 0 or 1; the data carry no \
             temperature information"
                .into(),
        ));
    }

    // Sort a private copy so the floating-point accumulation order, and
    // with it the result, is independent of input order.
    let mut sorted: Vec<SurvivalObservation> = observations.to_vec();
    sorted.sort_by(|a, b| {
        (a.power, a.successes, a.attempts)
            .partial_cmp(&(b.power, b.successes, b.attempts))
            .expect("fields are finite")
    });

    let eq = equilibrium_positions(n_ions, omega_z, species)?;
    let mut points = Vec::with_capacity(sorted.len());
    for obs in &sorted {
        let profile = depth_profile(&beam.with_power(obs.power)?, config, &eq)?;
        let (low, high) = wilson_interval(obs.successes, obs.attempts, DEFAULT_CONFIDENCE_Z)?;
        let half_width = 0.5 * (high - low);
        points.push((profile, obs.fraction(), 1.0 / (half_width * half_width)));
    }

    let objective = |ln_t: f64| -> f64 {
        let t = ln_t.exp();
        points
            .iter()
            .map(|(profile, fraction, weight)| {
                let model = ensemble_survival(profile, t).expect("t > 0 by construction");
                weight * (fraction - model) * (fraction - model)
            })
            .sum()
    };

    // Golden-section search on ln T; 160 iterations shrink the bracket
    // far below f64 resolution, deterministically.
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (FIT_TEMPERATURE_RANGE.0.ln(), FIT_TEMPERATURE_RANGE.1.ln());
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = objective(c);
    let mut fd = objective(d);
    for _ in 0..160 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = objective(d);
        }
    }
    let temperature = (0.5 * (a + b)).exp();
    let residual = objective(temperature.ln());

    // One-sigma parameter error from the local curvature: Δχ² = 1 at
    // δT = √(2/χ″).
    let h = 1e-4 * temperature;
    let second = (objective((temperature + h).ln()) - 2.0 * residual
        + objective((temperature - h).ln()))
        / (h * h);
    let std_error = if second > 0.0 {
        (2.0 / second).sqrt()
    } else {
        f64::INFINITY
    };

    Ok(TemperatureFit {
        temperature,
        std_error,
        residual,
        n_points: observations.len(),
    })
}

//! Command-line front end: equilibrium, mode, depth, survival-fit, and
//! drive-scan analyses with CSV/JSON emission.
//!
//! Every float in a data file is printed with 9 significant digits, data
//! files carry no timestamps, and scans run on a fixed grid in a fixed
//! order, so identical invocations produce byte-identical outputs. Run
//! metadata (tool version, resolved parameters) goes to a `.meta.json`
//! sidecar next to `--out`, never into the data file itself.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use ioncrystal::beam::GaussianBeam;
use ioncrystal::constants::BOLTZMANN;
use ioncrystal::crystal::{equilibrium_positions, mode_spectrum};
use ioncrystal::dynamics::{frequency_scan_with_loss, DriveConfig};
use ioncrystal::fmt_sig9;
use ioncrystal::potential::ElectrostaticConfig;
use ioncrystal::survival::{fit_temperature, read_observations_csv};
use ioncrystal::trapdepth::depth_profile;
use ioncrystal::{Error, IonSpecies, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Largest modulation grid a single scan will accept.
const MAX_GRID_POINTS: usize = 4096;

#[derive(Parser)]
#[command(
    name = "ioncrystal",
    version,
    about = "Optical-trap ion-chain analysis: equilibria, modes, depths, survival fits, drive scans",
    propagate_version = true
)]
struct Cli {
    /// JSON scenario file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the result here instead of stdout; a FILE.meta.json sidecar
    /// records the tool version and resolved parameters.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Emit JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,

    /// Emit CSV (the default for everything except survival-fit).
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the linear-chain equilibrium positions.
    Equilibrium(ChainArgs),
    /// Axial normal-mode frequencies and eigenvectors.
    Modes(ChainArgs),
    /// Per-ion radial trap depth along the chain.
    Depth(DepthArgs),
    /// Fit the chain temperature to a survival-vs-power scan.
    SurvivalFit(FitArgs),
    /// Scan a modulation drive across a frequency grid and record the
    /// response amplitude and loss flag at each point.
    Spectrometry(SpectrometryArgs),
}

#[derive(Args)]
struct SpeciesArgs {
    /// Ion mass in atomic mass units [default: 138].
    #[arg(long, value_name = "AMU")]
    species_amu: Option<f64>,

    /// Charge state in units of e [default: +1].
    #[arg(long, value_name = "Z")]
    charge: Option<i32>,
}

#[derive(Args)]
struct ChainArgs {
    /// Number of ions [default: 2].
    #[arg(long)]
    n: Option<usize>,

    /// Axial secular frequency omega_z/2pi in kHz [default: 25].
    #[arg(long, value_name = "KHZ")]
    omega_z_khz: Option<f64>,

    #[command(flatten)]
    species: SpeciesArgs,
}

#[derive(Args)]
struct BeamArgs {
    /// Beam preset [default: vis].
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,

    /// Beam power in W [default: the preset's full power].
    #[arg(long, value_name = "W")]
    power: Option<f64>,

    /// Explicit beam wavelength in nm, replacing the preset; needs
    /// --waist-um, --mk-per-watt, and --power as well.
    #[arg(long, value_name = "NM")]
    wavelength_nm: Option<f64>,

    /// Explicit beam waist in um.
    #[arg(long, value_name = "UM")]
    waist_um: Option<f64>,

    /// Explicit focal optical depth per watt, mK/W.
    #[arg(long, value_name = "MK")]
    mk_per_watt: Option<f64>,
}

#[derive(Args)]
struct DepthArgs {
    #[command(flatten)]
    chain: ChainArgs,

    #[command(flatten)]
    beam: BeamArgs,
}

#[derive(Args)]
struct FitArgs {
    /// Observation CSV with header power_w,n_ions,successes,attempts.
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,

    /// Axial secular frequency omega_z/2pi in kHz [default: 25].
    #[arg(long, value_name = "KHZ")]
    omega_z_khz: Option<f64>,

    #[command(flatten)]
    species: SpeciesArgs,

    #[command(flatten)]
    beam: BeamArgs,
}

#[derive(Args)]
struct SpectrometryArgs {
    /// Driven mode [default: stretch].
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,

    /// Drive field amplitude in mV/m [default: 1.8].
    #[arg(long, value_name = "MVPM")]
    e_mvpm: Option<f64>,

    /// Modulation grid start:stop:step in kHz [default: 38:48:0.1].
    #[arg(long, value_name = "START:STOP:STEP")]
    grid: Option<String>,

    /// Axial secular frequency omega_z/2pi in kHz [default: 24.96].
    #[arg(long, value_name = "KHZ")]
    omega_z_khz: Option<f64>,

    /// Simulated window per grid point in ms [default: 10].
    #[arg(long, value_name = "MS")]
    duration_ms: Option<f64>,

    /// Integrator timestep in us [default: 1].
    #[arg(long, value_name = "US")]
    timestep_us: Option<f64>,

    /// Loss reference temperature in mK: a point is flagged when the
    /// instantaneous radial barrier dips to k_B*T_ref [default: 2].
    #[arg(long, value_name = "MK")]
    tref_mk: Option<f64>,

    #[command(flatten)]
    species: SpeciesArgs,

    #[command(flatten)]
    beam: BeamArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Vis,
    Nir,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Com,
    Stretch,
}

// ---------------------------------------------------------------------
// Scenario file: a single JSON document whose fields mirror the flags.
// Field names embed their units; anything else is rejected.
// ---------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    species: Option<SpeciesSection>,
    beam: Option<BeamSection>,
    electrostatic: Option<ElectrostaticSection>,
    n: Option<usize>,
    fit_data: Option<PathBuf>,
    drive: Option<DriveSection>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpeciesSection {
    mass_amu: Option<f64>,
    charge_state: Option<i32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamSection {
    preset: Option<String>,
    power_w: Option<f64>,
    wavelength_nm: Option<f64>,
    waist_um: Option<f64>,
    mk_per_watt: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElectrostaticSection {
    omega_z_khz: Option<f64>,
    /// Radial/axial curvature split as multipliers of omega_z^2;
    /// must sum to zero. Default (-1, 0, 1).
    split: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveSection {
    mode: Option<String>,
    e_mvpm: Option<f64>,
    grid_khz: Option<String>,
    duration_ms: Option<f64>,
    timestep_us: Option<f64>,
    tref_mk: Option<f64>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("bad config {}: {e}", path.display())))
}

// ---------------------------------------------------------------------
// Flag/config/default resolution
// ---------------------------------------------------------------------

fn resolve_species(args: &SpeciesArgs, cfg: &FileConfig) -> Result<IonSpecies> {
    let section = cfg.species.as_ref();
    let mass_amu = args
        .species_amu
        .or(section.and_then(|s| s.mass_amu))
        .unwrap_or(138.0);
    let charge_state = args
        .charge
        .or(section.and_then(|s| s.charge_state))
        .unwrap_or(1);
    IonSpecies::from_amu(mass_amu, charge_state)
}

fn resolve_omega_z(flag: Option<f64>, cfg: &FileConfig, default_khz: f64) -> Result<f64> {
    let khz = flag
        .or(cfg.electrostatic.as_ref().and_then(|e| e.omega_z_khz))
        .unwrap_or(default_khz);
    if !(khz > 0.0) || !khz.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "axial frequency must be positive and finite, got {khz} kHz"
        )));
    }
    Ok(TWO_PI * khz * 1e3)
}

fn resolve_electrostatic(omega_z: f64, cfg: &FileConfig) -> Result<ElectrostaticConfig> {
    let split = cfg
        .electrostatic
        .as_ref()
        .and_then(|e| e.split)
        .unwrap_or([-1.0, 0.0, 1.0]);
    let wz2 = omega_z * omega_z;
    ElectrostaticConfig::new(split[0] * wz2, split[1] * wz2, split[2] * wz2)
}

/// The resolved beam plus its parameter echo for the metadata sidecar.
fn resolve_beam(args: &BeamArgs, cfg: &FileConfig) -> Result<GaussianBeam> {
    let section = cfg.beam.as_ref();
    let wavelength_nm = args.wavelength_nm.or(section.and_then(|b| b.wavelength_nm));
    let waist_um = args.waist_um.or(section.and_then(|b| b.waist_um));
    let mk_per_watt = args.mk_per_watt.or(section.and_then(|b| b.mk_per_watt));
    let power = args.power.or(section.and_then(|b| b.power_w));

    let explicit = [
        wavelength_nm.is_some(),
        waist_um.is_some(),
        mk_per_watt.is_some(),
    ];
    if explicit.iter().any(|&set| set) {
        if !explicit.iter().all(|&set| set) {
            return Err(Error::InvalidConfig(
                "an explicit beam needs all of wavelength_nm, waist_um, mk_per_watt".into(),
            ));
        }
        let Some(power) = power else {
            return Err(Error::InvalidConfig(
                "an explicit beam needs a power in W".into(),
            ));
        };
        return GaussianBeam::new(
            wavelength_nm.unwrap() * 1e-9,
            waist_um.unwrap() * 1e-6,
            power,
            mk_per_watt.unwrap() * 1e-3 * BOLTZMANN,
        );
    }

    let preset_name = match args.preset {
        Some(PresetArg::Vis) => "vis".to_string(),
        Some(PresetArg::Nir) => "nir".to_string(),
        None => section
            .and_then(|b| b.preset.clone())
            .unwrap_or_else(|| "vis".to_string()),
    };
    let preset = match preset_name.as_str() {
        "vis" => GaussianBeam::preset_vis(),
        "nir" => GaussianBeam::preset_nir(),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown beam preset {other:?} (expected vis or nir)"
            )))
        }
    };
    match power {
        Some(p) => preset.with_power(p),
        None => Ok(preset),
    }
}

fn resolve_mode(args: &SpectrometryArgs, cfg: &FileConfig) -> Result<ModeArg> {
    if let Some(mode) = args.mode {
        return Ok(mode);
    }
    match cfg.drive.as_ref().and_then(|d| d.mode.as_deref()) {
        None | Some("stretch") => Ok(ModeArg::Stretch),
        Some("com") => Ok(ModeArg::Com),
        Some(other) => Err(Error::InvalidConfig(format!(
            "unknown drive mode {other:?} (expected com or stretch)"
        ))),
    }
}

/// Parses `start:stop:step` in kHz into an ascending grid, endpoints
/// inclusive up to rounding of the step count.
fn parse_grid_khz(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!(
            "grid must be start:stop:step in kHz, got {spec:?}"
        )));
    }
    let mut nums = [0.0f64; 3];
    for (slot, part) in nums.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| Error::InvalidConfig(format!("grid {spec:?}: {e}")))?;
    }
    let [start, stop, step] = nums;
    if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "grid {spec:?} has a non-finite endpoint or step"
        )));
    }
    if step <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "grid step must be positive, got {step}"
        )));
    }
    if stop < start {
        return Err(Error::InvalidConfig(format!(
            "grid stop {stop} precedes start {start}"
        )));
    }
    // A hair of slack so 38:48:0.1 lands exactly on 48.
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > MAX_GRID_POINTS {
        return Err(Error::InvalidConfig(format!(
            "grid has {count} points; the limit is {MAX_GRID_POINTS}"
        )));
    }
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

// ---------------------------------------------------------------------
// Output plumbing
// ---------------------------------------------------------------------

#[derive(Copy, Clone, PartialEq, Eq)]
enum OutFormat {
    Csv,
    Json,
}

impl OutFormat {
    fn name(self) -> &'static str {
        match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        }
    }
}

fn resolve_format(cli: &Cli) -> OutFormat {
    if cli.json {
        OutFormat::Json
    } else if cli.csv {
        OutFormat::Csv
    } else if matches!(cli.command, Command::SurvivalFit(_)) {
        OutFormat::Json
    } else {
        OutFormat::Csv
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Assembles `{"k":v,...}` preserving field order; values arrive
/// pre-rendered (numbers, strings, arrays, nulls).
fn json_object(fields: &[(&str, String)]) -> String {
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("\"{k}\":{v}"))
        .collect();
    format!("{{{}}}", body.join(","))
}

fn json_array<I: IntoIterator<Item = String>>(items: I) -> String {
    let body: Vec<String> = items.into_iter().collect();
    format!("[{}]", body.join(","))
}

fn json_string(s: &str) -> String {
    format!("\"{}\"", json_escape(s))
}

/// Run metadata for the sidecar: tool, version, command, format, and the
/// resolved parameters — everything needed to reproduce the data file,
/// and nothing volatile.
fn sidecar_body(command: &str, format: OutFormat, params: &[(String, String)]) -> String {
    let rendered: Vec<String> = params
        .iter()
        .map(|(k, v)| format!("{}:{}", json_string(k), json_string(v)))
        .collect();
    let mut fields = vec![
        ("tool", json_string("ioncrystal")),
        ("version", json_string(env!("CARGO_PKG_VERSION"))),
        ("command", json_string(command)),
        ("format", json_string(format.name())),
    ];
    fields.push(("params", format!("{{{}}}", rendered.join(","))));
    let mut body = json_object(&fields);
    body.push('\n');
    body
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn emit(out: Option<&Path>, payload: &str, sidecar: &str) -> Result<()> {
    match out {
        None => {
            print!("{payload}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, payload).map_err(|e| {
                Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))
            })?;
            let meta = sidecar_path(path);
            std::fs::write(&meta, sidecar).map_err(|e| {
                Error::InvalidConfig(format!("cannot write {}: {e}", meta.display()))
            })
        }
    }
}

// Unit helpers: the library speaks SI, the tables speak um/kHz/mK.
fn um(x_m: f64) -> String {
    fmt_sig9(x_m * 1e6)
}
fn khz(omega_rad_per_s: f64) -> String {
    fmt_sig9(omega_rad_per_s / (TWO_PI * 1e3))
}
fn mk(x_kelvin: f64) -> String {
    fmt_sig9(x_kelvin * 1e3)
}

fn species_params(species: &IonSpecies) -> Vec<(String, String)> {
    vec![
        (
            "mass_amu".into(),
            fmt_sig9(species.mass / ioncrystal::constants::ATOMIC_MASS),
        ),
        (
            "charge_e".into(),
            fmt_sig9(species.charge / ioncrystal::constants::ELEMENTARY_CHARGE),
        ),
    ]
}

fn beam_params(beam: &GaussianBeam) -> Vec<(String, String)> {
    vec![
        ("wavelength_nm".into(), fmt_sig9(beam.wavelength * 1e9)),
        ("waist_um".into(), fmt_sig9(beam.waist * 1e6)),
        ("power_w".into(), fmt_sig9(beam.power)),
        (
            "mk_per_watt".into(),
            fmt_sig9(beam.depth_per_watt / BOLTZMANN * 1e3),
        ),
    ]
}

// ---------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------

fn cmd_equilibrium(args: &ChainArgs, cfg: &FileConfig, format: OutFormat) -> Result<Payload> {
    let species = resolve_species(&args.species, cfg)?;
    let omega_z = resolve_omega_z(args.omega_z_khz, cfg, 25.0)?;
    let n = args.n.or(cfg.n).unwrap_or(2);
    let eq = equilibrium_positions(n, omega_z, &species)?;

    let body = match format {
        OutFormat::Csv => {
            let mut s = String::from("ion_index,z_um,scale_length_um\n");
            for (i, &z) in eq.axial_positions.iter().enumerate() {
                s.push_str(&format!("{i},{},{}\n", um(z), um(eq.scale_length)));
            }
            s
        }
        OutFormat::Json => {
            let mut s = json_object(&[
                ("n", n.to_string()),
                ("omega_z_khz", khz(omega_z)),
                ("scale_length_um", um(eq.scale_length)),
                (
                    "positions_um",
                    json_array(eq.axial_positions.iter().map(|&z| um(z))),
                ),
            ]);
            s.push('\n');
            s
        }
    };

    let mut params = vec![
        ("n".to_string(), n.to_string()),
        ("omega_z_khz".to_string(), khz(omega_z)),
    ];
    params.extend(species_params(&species));
    Ok(Payload {
        command: "equilibrium",
        body,
        params,
    })
}

fn cmd_modes(args: &ChainArgs, cfg: &FileConfig, format: OutFormat) -> Result<Payload> {
    let species = resolve_species(&args.species, cfg)?;
    let omega_z = resolve_omega_z(args.omega_z_khz, cfg, 25.0)?;
    let n = args.n.or(cfg.n).unwrap_or(2);
    let eq = equilibrium_positions(n, omega_z, &species)?;
    let modes = mode_spectrum(&eq);

    let body = match format {
        OutFormat::Csv => {
            let mut s = String::from("mode_index,freq_khz");
            for i in 0..n {
                s.push_str(&format!(",v{i}"));
            }
            s.push('\n');
            for (m, &freq) in modes.frequencies.iter().enumerate() {
                s.push_str(&format!("{m},{}", khz(freq)));
                for i in 0..n {
                    s.push_str(&format!(",{}", fmt_sig9(modes.eigenvectors[(m, i)])));
                }
                s.push('\n');
            }
            s
        }
        OutFormat::Json => {
            let rows = (0..n).map(|m| {
                json_array((0..n).map(|i| fmt_sig9(modes.eigenvectors[(m, i)])))
            });
            let mut s = json_object(&[
                ("n", n.to_string()),
                ("omega_z_khz", khz(omega_z)),
                (
                    "frequencies_khz",
                    json_array(modes.frequencies.iter().map(|&f| khz(f))),
                ),
                ("eigenvectors", json_array(rows)),
            ]);
            s.push('\n');
            s
        }
    };

    let mut params = vec![
        ("n".to_string(), n.to_string()),
        ("omega_z_khz".to_string(), khz(omega_z)),
    ];
    params.extend(species_params(&species));
    Ok(Payload {
        command: "modes",
        body,
        params,
    })
}

fn cmd_depth(args: &DepthArgs, cfg: &FileConfig, format: OutFormat) -> Result<Payload> {
    let species = resolve_species(&args.chain.species, cfg)?;
    let omega_z = resolve_omega_z(args.chain.omega_z_khz, cfg, 25.0)?;
    let electrostatic = resolve_electrostatic(omega_z, cfg)?;
    let beam = resolve_beam(&args.beam, cfg)?;
    let n = args.chain.n.or(cfg.n).unwrap_or(2);
    let eq = equilibrium_positions(n, omega_z, &species)?;
    let profile = depth_profile(&beam, &electrostatic, &eq)?;

    let body = match format {
        OutFormat::Csv => {
            let mut s = String::from("ion_index,z_um,depth_mK,curvature,x_max_um\n");
            for r in &profile.records {
                let x_max = r.x_max.map(um).unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{x_max}\n",
                    r.ion_index,
                    um(r.axial_position),
                    mk(r.depth / BOLTZMANN),
                    fmt_sig9(r.defocus_curvature),
                ));
            }
            s
        }
        OutFormat::Json => {
            let rows = profile.records.iter().map(|r| {
                json_object(&[
                    ("ion_index", r.ion_index.to_string()),
                    ("z_um", um(r.axial_position)),
                    ("depth_mk", mk(r.depth / BOLTZMANN)),
                    ("curvature", fmt_sig9(r.defocus_curvature)),
                    (
                        "x_max_um",
                        r.x_max.map(um).unwrap_or_else(|| "null".to_string()),
                    ),
                ])
            });
            let mut s = json_object(&[
                ("n", n.to_string()),
                ("omega_z_khz", khz(omega_z)),
                ("records", json_array(rows)),
                ("min_depth_mk", mk(profile.min_depth() / BOLTZMANN)),
                ("min_ion_index", profile.min_index().to_string()),
            ]);
            s.push('\n');
            s
        }
    };

    let mut params = vec![
        ("n".to_string(), n.to_string()),
        ("omega_z_khz".to_string(), khz(omega_z)),
    ];
    params.extend(species_params(&species));
    params.extend(beam_params(&beam));
    Ok(Payload {
        command: "depth",
        body,
        params,
    })
}

fn cmd_survival_fit(args: &FitArgs, cfg: &FileConfig, format: OutFormat) -> Result<Payload> {
    let species = resolve_species(&args.species, cfg)?;
    let omega_z = resolve_omega_z(args.omega_z_khz, cfg, 25.0)?;
    let electrostatic = resolve_electrostatic(omega_z, cfg)?;
    let beam = resolve_beam(&args.beam, cfg)?;
    let data = args
        .data
        .clone()
        .or_else(|| cfg.fit_data.clone())
        .ok_or_else(|| {
            Error::InvalidConfig(
                "no observation file: pass --data or set fit_data in the config".into(),
            )
        })?;
    let observations = read_observations_csv(&data)?;
    let fit = fit_temperature(&observations, &beam, &electrostatic, omega_z, &species)?;

    // The statistical error can be infinite (flat objective); JSON has no
    // Infinity, so that case becomes null.
    let std_error_json = if fit.std_error.is_finite() {
        mk(fit.std_error)
    } else {
        "null".to_string()
    };
    let std_error_csv = if fit.std_error.is_finite() {
        mk(fit.std_error)
    } else {
        "inf".to_string()
    };

    let body = match format {
        OutFormat::Json => {
            let mut s = json_object(&[
                ("temperature_mk", mk(fit.temperature)),
                ("std_error_mk", std_error_json),
                ("residual", fmt_sig9(fit.residual)),
                ("n_points", fit.n_points.to_string()),
            ]);
            s.push('\n');
            s
        }
        OutFormat::Csv => format!(
            "temperature_mk,std_error_mk,residual,n_points\n{},{},{},{}\n",
            mk(fit.temperature),
            std_error_csv,
            fmt_sig9(fit.residual),
            fit.n_points
        ),
    };

    let mut params = vec![
        ("data".to_string(), data.display().to_string()),
        ("omega_z_khz".to_string(), khz(omega_z)),
    ];
    params.extend(species_params(&species));
    params.extend(beam_params(&beam));
    Ok(Payload {
        command: "survival-fit",
        body,
        params,
    })
}

fn cmd_spectrometry(
    args: &SpectrometryArgs,
    cfg: &FileConfig,
    format: OutFormat,
) -> Result<Payload> {
    let species = resolve_species(&args.species, cfg)?;
    let omega_z = resolve_omega_z(args.omega_z_khz, cfg, 24.96)?;
    let electrostatic = resolve_electrostatic(omega_z, cfg)?;
    let beam = resolve_beam(&args.beam, cfg)?;
    let drive = cfg.drive.as_ref();

    let mode = resolve_mode(args, cfg)?;
    let e_mvpm = args
        .e_mvpm
        .or(drive.and_then(|d| d.e_mvpm))
        .unwrap_or(1.8);
    let grid_spec = args
        .grid
        .clone()
        .or_else(|| drive.and_then(|d| d.grid_khz.clone()))
        .unwrap_or_else(|| "38:48:0.1".to_string());
    let duration_ms = args
        .duration_ms
        .or(drive.and_then(|d| d.duration_ms))
        .unwrap_or(10.0);
    let timestep_us = args
        .timestep_us
        .or(drive.and_then(|d| d.timestep_us))
        .unwrap_or(1.0);
    let tref_mk = args.tref_mk.or(drive.and_then(|d| d.tref_mk)).unwrap_or(2.0);

    let grid_khz = parse_grid_khz(&grid_spec)?;
    let grid_rad: Vec<f64> = grid_khz.iter().map(|&f| TWO_PI * f * 1e3).collect();

    let field = e_mvpm * 1e-3;
    let drive_cfg = match mode {
        ModeArg::Com => DriveConfig::com(field, grid_rad[0], omega_z)?,
        ModeArg::Stretch => DriveConfig::stretch(field, grid_rad[0], omega_z)?,
    }
    .with_species(species)?
    .with_duration(duration_ms * 1e-3)?
    .with_timestep(timestep_us * 1e-6)?;

    let scan = frequency_scan_with_loss(
        &drive_cfg,
        &grid_rad,
        &beam,
        &electrostatic,
        tref_mk * 1e-3,
    )?;

    let body = match format {
        OutFormat::Csv => {
            let mut s = String::from("omega_mod_kHz,amplitude_um,loss_flag\n");
            for i in 0..scan.len() {
                s.push_str(&format!(
                    "{},{},{}\n",
                    khz(scan.omega_grid[i]),
                    um(scan.amplitudes[i]),
                    u8::from(scan.loss_flags[i]),
                ));
            }
            s
        }
        OutFormat::Json => {
            let mut s = json_object(&[
                (
                    "omega_mod_khz",
                    json_array(scan.omega_grid.iter().map(|&w| khz(w))),
                ),
                (
                    "amplitude_um",
                    json_array(scan.amplitudes.iter().map(|&a| um(a))),
                ),
                (
                    "loss_flags",
                    json_array(scan.loss_flags.iter().map(|&f| f.to_string())),
                ),
                ("peak_omega_khz", khz(scan.peak_omega())),
                (
                    "peak_amplitude_um",
                    um(scan.amplitudes[scan.peak_index()]),
                ),
            ]);
            s.push('\n');
            s
        }
    };

    let mode_name = match mode {
        ModeArg::Com => "com",
        ModeArg::Stretch => "stretch",
    };
    let mut params = vec![
        ("mode".to_string(), mode_name.to_string()),
        ("e_mvpm".to_string(), fmt_sig9(e_mvpm)),
        ("grid_khz".to_string(), grid_spec),
        ("omega_z_khz".to_string(), khz(omega_z)),
        ("duration_ms".to_string(), fmt_sig9(duration_ms)),
        ("timestep_us".to_string(), fmt_sig9(timestep_us)),
        ("tref_mk".to_string(), fmt_sig9(tref_mk)),
    ];
    params.extend(species_params(&species));
    params.extend(beam_params(&beam));
    Ok(Payload {
        command: "spectrometry",
        body,
        params,
    })
}

/// One finished analysis: the data file body plus what the sidecar needs.
struct Payload {
    command: &'static str,
    body: String,
    params: Vec<(String, String)>,
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref())?;
    let format = resolve_format(cli);
    let out = cli.out.clone().or_else(|| cfg.out.clone());

    let payload = match &cli.command {
        Command::Equilibrium(args) => cmd_equilibrium(args, &cfg, format)?,
        Command::Modes(args) => cmd_modes(args, &cfg, format)?,
        Command::Depth(args) => cmd_depth(args, &cfg, format)?,
        Command::SurvivalFit(args) => cmd_survival_fit(args, &cfg, format)?,
        Command::Spectrometry(args) => cmd_spectrometry(args, &cfg, format)?,
    };

    let sidecar = sidecar_body(payload.command, format, &payload.params);
    emit(out.as_deref(), &payload.body, &sidecar)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

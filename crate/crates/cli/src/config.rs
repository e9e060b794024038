//! Run configuration. All frequencies are ω/2π in Hz, times in seconds.

use std::path::{Path, PathBuf};

use qnd_core::params::SystemParams;
use qnd_core::protocol::{
    default_photon_grid, SweepAxis, DEFAULT_CAVITY_LEVELS, DEFAULT_PULSE_FWHM, EFFICIENCY_GATE_INTERVAL, TOMOGRAPHY_GATE_INTERVAL,
};
use qnd_core::tomography::{COMPOSITE_LEVELS, DEFAULT_PHASES, DEFAULT_SHOTS, SINGLE_MODE_LEVELS};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Table,
    Ideal,
}

impl Preset {
    fn params(self) -> SystemParams {
        match self {
            Preset::Table => SystemParams::table(),
            Preset::Ideal => SystemParams::ideal(),
        }
    }
}

/// Config file as written by the user. `params` is kept as a raw table so it
/// can be overlaid on the preset.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    preset: Preset,
    out: Option<PathBuf>,
    params: toml::Table,
    schedule: ScheduleConfig,
    spectrum: SpectrumConfig,
    protocol: ProtocolConfig,
    tomography: TomographyConfig,
    sweep: SweepConfig,
}

/// Fully resolved configuration; this is what the manifest records.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub preset: Preset,
    pub out: PathBuf,
    pub params: SystemParams,
    pub schedule: ScheduleConfig,
    pub spectrum: SpectrumConfig,
    pub protocol: ProtocolConfig,
    pub tomography: TomographyConfig,
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    /// FWHM of the Gaussian input mode.
    pub pulse_fwhm: f64,
    /// t_g − t_i. Defaults to 800 ns, or 1100 ns for `protocol` and
    /// `tomo-selftest`.
    pub gate_interval: Option<f64>,
    pub t_i: Option<f64>,
    pub t_g: Option<f64>,
    pub t_f: Option<f64>,
    /// |α_in|² used by `protocol`, `tomo-selftest` and `sweep`.
    pub mean_photons: f64,
    /// |α_in|² grid of the efficiency curve.
    pub photon_grid: Vec<f64>,
    pub cavity_levels: usize,
    pub max_dt: Option<f64>,
    /// Highest Fock level kept in the moment inversion.
    pub photon_truncation: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            pulse_fwhm: DEFAULT_PULSE_FWHM,
            gate_interval: None,
            t_i: None,
            t_g: None,
            t_f: None,
            mean_photons: 0.165,
            photon_grid: default_photon_grid(),
            cavity_levels: DEFAULT_CAVITY_LEVELS,
            max_dt: None,
            photon_truncation: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Full width of the frequency window around ω_c/2π.
    pub span_hz: f64,
    pub points: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { span_hz: 12e6, points: 1201 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    /// Wigner grid spans [−half, half] in Re α and Im α.
    pub wigner_half_width: f64,
    pub wigner_points: usize,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self { wigner_half_width: 2.0, wigner_points: 81 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographyConfig {
    pub phases: usize,
    pub shots: u64,
    /// Detection efficiency; defaults to `params.measurement_efficiency`.
    pub eta: Option<f64>,
    pub seed: Option<u64>,
    pub iterations: usize,
    pub tolerance: f64,
    pub levels: usize,
    pub composite_levels: usize,
    /// Mean photon number of the coherent test state.
    pub coherent_photons: f64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            phases: DEFAULT_PHASES,
            shots: DEFAULT_SHOTS,
            eta: None,
            seed: None,
            iterations: 10_000,
            tolerance: 1e-10,
            levels: SINGLE_MODE_LEVELS,
            composite_levels: COMPOSITE_LEVELS,
            coherent_photons: 0.137,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    /// Axis values; defaults depend on the axis.
    pub values: Option<Vec<f64>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { axis: SweepAxis::GateInterval, values: None }
    }
}

fn range(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start + k as f64 * step).collect()
}

pub fn default_sweep_values(axis: SweepAxis) -> Vec<f64> {
    match axis {
        SweepAxis::GateInterval => range(500e-9, 50e-9, 15),
        SweepAxis::PulseLength => range(200e-9, 50e-9, 13),
        SweepAxis::KappaEx => range(1e6, 0.2e6, 21),
        SweepAxis::KappaIn => range(0.0, 0.1e6, 11),
        SweepAxis::Gamma => range(0.0, 1e4, 11),
        SweepAxis::GammaPhi => range(0.0, 1e4, 11),
    }
}

/// Which subcommand is being resolved; decides schedule defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Spectrum,
    Efficiency,
    Protocol,
    TomoSelftest,
    Sweep,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Spectrum => "spectrum",
            Stage::Efficiency => "efficiency",
            Stage::Protocol => "protocol",
            Stage::TomoSelftest => "tomo-selftest",
            Stage::Sweep => "sweep",
        }
    }
}

pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

pub fn load(path: Option<&Path>, stage: Stage, ov: Overrides) -> Result<RunConfig, CliError> {
    let raw: RawConfig = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => RawConfig::default(),
    };
    resolve(raw, stage, ov)
}

#[cfg(test)]
pub fn parse(text: &str, stage: Stage, ov: Overrides) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    resolve(raw, stage, ov)
}

fn resolve(raw: RawConfig, stage: Stage, ov: Overrides) -> Result<RunConfig, CliError> {
    let base = toml::Value::try_from(raw.preset.params()).map_err(|e| CliError::Config(e.to_string()))?;
    let toml::Value::Table(mut merged) = base else { unreachable!() };
    merged.extend(raw.params);
    let params: SystemParams = toml::Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("[params]: {e}")))?;
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let mut schedule = raw.schedule;
    let interval = match stage {
        Stage::Protocol | Stage::TomoSelftest => TOMOGRAPHY_GATE_INTERVAL,
        _ => EFFICIENCY_GATE_INTERVAL,
    };
    let interval = *schedule.gate_interval.get_or_insert(interval);
    let t_i = *schedule.t_i.get_or_insert(-0.5 * interval);
    let t_g = *schedule.t_g.get_or_insert(t_i + interval);
    schedule.t_f.get_or_insert(t_g + 100e-9);
    if (t_g - t_i - interval).abs() > 1e-15 {
        return Err(CliError::Config(format!(
            "[schedule]: t_g − t_i = {:e} s disagrees with gate_interval = {interval:e} s",
            t_g - t_i
        )));
    }

    let mut tomography = raw.tomography;
    if ov.seed.is_some() {
        tomography.seed = ov.seed;
    }
    tomography.eta.get_or_insert(params.measurement_efficiency);

    let mut sweep = raw.sweep;
    let axis = sweep.axis;
    sweep.values.get_or_insert_with(|| default_sweep_values(axis));

    Ok(RunConfig {
        preset: raw.preset,
        out: ov.out.or(raw.out).unwrap_or_else(|| PathBuf::from("out")),
        params,
        schedule,
        spectrum: raw.spectrum,
        protocol: raw.protocol,
        tomography,
        sweep,
    })
}

impl RunConfig {
    /// Resolved config as TOML, loadable again with `--config`.
    pub fn manifest(&self, stage: Stage) -> Result<String, CliError> {
        let body = toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(format!("# qnd {} {}\n{body}", stage.name(), env!("CARGO_PKG_VERSION")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> Overrides {
        Overrides { out: None, seed: None }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in ["bogus = 1", "[params]\nkappa = 1.0", "[schedule]\nwidth = 1.0", "[tomography]\nshot = 3"] {
            assert!(matches!(parse(text, Stage::Protocol, none()), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn params_overlay_the_preset() {
        let c = parse("preset = \"ideal\"\n[params]\nkappa_in_hz = 1e5", Stage::Efficiency, none()).unwrap();
        assert_eq!(c.params.kappa_in_hz, 1e5);
        assert_eq!(c.params.kappa_ex_hz, 3.0e6);
        assert!(c.params.t1.is_infinite());
    }

    #[test]
    fn schedule_defaults_follow_the_stage() {
        let e = parse("", Stage::Efficiency, none()).unwrap();
        let p = parse("", Stage::Protocol, none()).unwrap();
        assert_eq!(e.schedule.gate_interval, Some(800e-9));
        assert_eq!(p.schedule.gate_interval, Some(1100e-9));
        assert_eq!(p.schedule.t_i, Some(-550e-9));
        assert!((p.schedule.t_f.unwrap() - 650e-9).abs() < 1e-18);
    }

    #[test]
    fn manifest_round_trips() {
        let c = parse("preset = \"ideal\"\n[tomography]\nseed = 4", Stage::TomoSelftest, none()).unwrap();
        let text = c.manifest(Stage::TomoSelftest).unwrap();
        assert!(text.starts_with("# qnd tomo-selftest"));
        let again = parse(&text, Stage::TomoSelftest, none()).unwrap();
        assert_eq!(again.manifest(Stage::TomoSelftest).unwrap(), text);
    }

    #[test]
    fn seed_flag_overrides_config() {
        let c = parse("[tomography]\nseed = 4", Stage::TomoSelftest, Overrides { out: None, seed: Some(9) }).unwrap();
        assert_eq!(c.tomography.seed, Some(9));
    }

    #[test]
    fn inconsistent_schedule_is_rejected() {
        let text = "[schedule]\ngate_interval = 8e-7\nt_i = -4e-7\nt_g = 5e-7";
        assert!(matches!(parse(text, Stage::Efficiency, none()), Err(CliError::Config(_))));
    }
}

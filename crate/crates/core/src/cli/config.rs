//! Run configuration: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::model::ModeSpace;
use crate::source::{gamma_from_physical, SchmidtModel, SourceParams};

use super::CliError;

/// Keys accepted in a config file; flags use the same names with dashes.
pub const KEYS: &[&str] = &[
    "gamma",
    "pump_waist_um",
    "crystal_length_mm",
    "pump_wavelength_nm",
    "schmidt_waist_um",
    "modes_k",
    "modes_l",
    "sep_start",
    "sep_stop",
    "sep_step",
    "sep_convention",
    "photons",
    "trials",
    "seed",
    "out_dir",
    "calibrate",
    "k_values",
    "alpha",
    "beta",
];

const SOURCE_KEYS: &[&str] = &["gamma", "pump_waist_um", "crystal_length_mm", "pump_wavelength_nm"];
const PHYSICAL_KEYS: &[&str] = &["pump_waist_um", "crystal_length_mm", "pump_wavelength_nm"];

pub const DEFAULT_GAMMA: f64 = 0.15;
pub const DEFAULT_PHOTONS: u64 = 37_000;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_K_VALUES: &[f64] = &[
    1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 11.6, 15.0, 20.0, 30.0, 50.0, 100.0,
];

/// Which quantity separation values on the command line refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Per-arm shift `d`.
    PerArm,
    /// Total separation `delta = 2d`.
    Total,
}

impl Convention {
    pub fn to_per_arm(self, v: f64) -> f64 {
        match self {
            Convention::PerArm => v,
            Convention::Total => 0.5 * v,
        }
    }

    pub fn from_per_arm(self, d: f64) -> f64 {
        match self {
            Convention::PerArm => d,
            Convention::Total => 2.0 * d,
        }
    }
}

impl FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "d" => Ok(Convention::PerArm),
            "delta" => Ok(Convention::Total),
            other => Err(format!("unknown separation convention '{other}' (expected d or delta)")),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::PerArm => "d",
            Convention::Total => "delta",
        })
    }
}

/// Separation grid, in the units named by `convention`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub convention: Convention,
}

impl SeparationGrid {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(CliError::Usage(format!("sep_step must be positive, got {}", self.step)));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start >= 0.0 && self.stop >= self.start) {
            return Err(CliError::Usage(format!(
                "separation range [{}, {}] must be non-negative and ordered",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    /// Grid points as per-arm shifts, endpoints included.
    pub fn per_arm_values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|i| {
                let v = self.start + self.step * i as f64;
                self.convention.to_per_arm((v * 1e12).round() / 1e12)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    Gamma(f64),
    Physical(SourceParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: SourceSpec,
    pub schmidt_waist_um: Option<f64>,
    pub modes_k: usize,
    pub modes_l: usize,
    pub grid: SeparationGrid,
    pub photons: u64,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub calibrate: bool,
    pub k_values: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl RunConfig {
    pub fn gamma(&self) -> Result<f64, CliError> {
        match &self.source {
            SourceSpec::Gamma(g) => Ok(*g),
            SourceSpec::Physical(p) => gamma_from_physical(p).map_err(|e| CliError::Usage(e.to_string())),
        }
    }

    pub fn schmidt(&self) -> Result<SchmidtModel, CliError> {
        SchmidtModel::new(self.gamma()?).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn space(&self) -> ModeSpace {
        ModeSpace::grid(self.modes_k, self.modes_l)
    }

    /// Builds a configuration from `flags` laid over the file at `path`.
    pub fn resolve(
        flags: &BTreeMap<String, String>,
        path: Option<&Path>,
        grid_default: (f64, f64, f64),
    ) -> Result<Self, CliError> {
        let mut merged = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                parse_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
            }
            None => BTreeMap::new(),
        };
        // a source given on the command line replaces the file's source entirely
        if flags.keys().any(|k| SOURCE_KEYS.contains(&k.as_str())) {
            merged.retain(|k, _| !SOURCE_KEYS.contains(&k.as_str()));
        }
        for (k, v) in flags {
            merged.insert(k.clone(), v.clone());
        }
        Self::from_map(&merged, grid_default)
    }

    pub fn from_map(map: &BTreeMap<String, String>, grid_default: (f64, f64, f64)) -> Result<Self, CliError> {
        for key in map.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("unknown configuration key '{key}'")));
            }
        }
        let physical: Vec<&str> = PHYSICAL_KEYS.iter().copied().filter(|k| map.contains_key(*k)).collect();
        let schmidt_waist_um = get::<f64>(map, "schmidt_waist_um")?;
        let source = match (get::<f64>(map, "gamma")?, physical.is_empty()) {
            (Some(_), false) => {
                return Err(CliError::Usage(
                    "give either gamma or the physical source parameters, not both".into(),
                ))
            }
            (Some(g), true) => SourceSpec::Gamma(g),
            (None, true) => SourceSpec::Gamma(DEFAULT_GAMMA),
            (None, false) => {
                let need = |k: &str| -> Result<f64, CliError> {
                    get::<f64>(map, k)?.ok_or_else(|| CliError::Usage(format!("missing source parameter {k}")))
                };
                SourceSpec::Physical(SourceParams {
                    pump_waist: need("pump_waist_um")? * 1e-6,
                    crystal_length: need("crystal_length_mm")? * 1e-3,
                    pump_wavelength: need("pump_wavelength_nm")? * 1e-9,
                    schmidt_waist: schmidt_waist_um.map(|w| w * 1e-6),
                })
            }
        };

        let convention = get::<Convention>(map, "sep_convention")?.unwrap_or(Convention::PerArm);
        let grid = SeparationGrid {
            start: get(map, "sep_start")?.unwrap_or(grid_default.0),
            stop: get(map, "sep_stop")?.unwrap_or(grid_default.1),
            step: get(map, "sep_step")?.unwrap_or(grid_default.2),
            convention,
        };
        grid.validate()?;

        let k_values = match map.get("k_values") {
            Some(list) => list
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|e| CliError::Usage(format!("k_values entry '{s}': {e}"))))
                .collect::<Result<Vec<_>, _>>()?,
            None => DEFAULT_K_VALUES.to_vec(),
        };
        if k_values.is_empty() || k_values.iter().any(|k| !(k.is_finite() && *k >= 1.0)) {
            return Err(CliError::Usage("k_values must be a non-empty list of numbers >= 1".into()));
        }

        let cfg = Self {
            source,
            schmidt_waist_um,
            modes_k: get(map, "modes_k")?.unwrap_or(6),
            modes_l: get(map, "modes_l")?.unwrap_or(0),
            grid,
            photons: get(map, "photons")?.unwrap_or(DEFAULT_PHOTONS),
            trials: get(map, "trials")?.unwrap_or(DEFAULT_TRIALS),
            seed: get(map, "seed")?.unwrap_or(DEFAULT_SEED),
            out_dir: map.get("out_dir").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
            calibrate: get(map, "calibrate")?.unwrap_or(false),
            k_values,
            alpha: get(map, "alpha")?.unwrap_or(1.0),
            beta: get(map, "beta")?.unwrap_or(0.0),
        };
        if cfg.photons < 1 {
            return Err(CliError::Usage("photons must be at least 1".into()));
        }
        if cfg.trials < 2 {
            return Err(CliError::Usage("trials must be at least 2".into()));
        }
        if let Some(w) = cfg.schmidt_waist_um {
            if !(w.is_finite() && w > 0.0) {
                return Err(CliError::Usage(format!("schmidt_waist_um must be positive, got {w}")));
            }
        }
        if !(cfg.alpha.is_finite() && cfg.alpha >= 0.0) || !(0.0..=1.0).contains(&cfg.beta) {
            return Err(CliError::Usage("alpha must be >= 0 and beta in [0, 1]".into()));
        }
        cfg.schmidt()?;
        Ok(cfg)
    }
}

fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError>
where
    T::Err: fmt::Display,
{
    map.get(key)
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|e| CliError::Usage(format!("invalid value '{v}' for {key}: {e}")))
        })
        .transpose()
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let key = k.trim().replace('-', "_");
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key '{key}'", no + 1));
        }
    }
    Ok(map)
}

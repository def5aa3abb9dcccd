use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{TimeGrid, DEFAULT_T_MAX_S, DEFAULT_T_POINTS};
use crate::error::{Error, Result};
use crate::functionals::JointProbability;
use crate::ingest::{SnapshotFormat, UncertaintyConfig};
use crate::states::ThermalParameters;
use crate::tolerances;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Simulate,
    Analyze,
}

/// Interaction times, in milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Uniform { t_max_ms: f64, t_points: usize },
    Explicit { times_ms: Vec<f64> },
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::Uniform {
            t_max_ms: DEFAULT_T_MAX_S * 1e3,
            t_points: DEFAULT_T_POINTS,
        }
    }
}

impl GridSpec {
    pub fn to_grid(&self) -> Result<TimeGrid> {
        match self {
            GridSpec::Uniform { t_max_ms, t_points } => TimeGrid::uniform(t_max_ms / 1e3, *t_points),
            GridSpec::Explicit { times_ms } => TimeGrid::from_times(times_ms.iter().map(|t| t / 1e3).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    pub joint_probability: JointProbability,
    /// Heat snapping distance in peV.
    pub heat_snap_pev: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            joint_probability: JointProbability::Evolved,
            heat_snap_pev: tolerances::HEAT_SNAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckTolerances {
    pub integral: f64,
    pub detailed: f64,
    pub jensen: f64,
    pub structural: f64,
    pub excluded_mass: f64,
    /// Width of the Monte-Carlo acceptance band in standard deviations.
    pub sigma_multiplier: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            integral: tolerances::INTEGRAL_FT,
            detailed: tolerances::DETAILED_FT,
            jensen: tolerances::JENSEN,
            structural: tolerances::HERMITIAN,
            excluded_mass: tolerances::EXCLUDED_MASS,
            sigma_multiplier: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub snapshots: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<SnapshotFormat>,
}

impl InputSpec {
    pub fn resolved_format(&self) -> Result<SnapshotFormat> {
        self.format
            .or_else(|| SnapshotFormat::from_path(&self.snapshots))
            .ok_or_else(|| Error::param("input.format", "cannot infer snapshot format from the file extension"))
    }
}

/// Everything a run needs. Serialized as TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "ThermalParameters::correlated")]
    pub thermal: ThermalParameters,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub tolerances: CheckTolerances,
    #[serde(default)]
    pub uncertainty: UncertaintyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::simulate(ThermalParameters::correlated())
    }
}

impl RunConfig {
    pub fn simulate(thermal: ThermalParameters) -> Self {
        Self {
            mode: Mode::Simulate,
            output_dir: None,
            thermal,
            grid: GridSpec::default(),
            analysis: AnalysisOptions::default(),
            tolerances: CheckTolerances::default(),
            uncertainty: UncertaintyConfig::default(),
            input: None,
        }
    }

    pub fn analyze(thermal: ThermalParameters, snapshots: impl Into<PathBuf>) -> Self {
        Self {
            mode: Mode::Analyze,
            input: Some(InputSpec {
                snapshots: snapshots.into(),
                format: None,
            }),
            ..Self::simulate(thermal)
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a TOML config. A relative `input.snapshots` path is resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(input), Some(dir)) = (cfg.input.as_mut(), path.parent()) {
            if input.snapshots.is_relative() {
                input.snapshots = dir.join(&input.snapshots);
            }
        }
        Ok(cfg)
    }
}

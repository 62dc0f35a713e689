//! Run configuration, read from TOML.
//!
//! Every section except `[grid]` and `[time]` may be omitted. Defaults:
//!
//! | key | default |
//! |-----|---------|
//! | `grid.lengths` | `2π` on every axis |
//! | `truncation.cutoff` | largest mode kept by the 2/3 rule, `min_j n_j / 3` |
//! | `model.*` | `coupling = 1`, `interaction = 1`, `viscosity = 0.1`, `density_min = 0.5`, `density_max = 2`, `density_floor = 0.1` |
//! | `initial` | unit plane wave along the first axis, zero velocity, unit density |
//! | `time.stepper` | `{ kind = "rk4" }`; Picard defaults `tol = 1e-10`, `max_iter = 50` |
//! | `time.output_interval` | 1 step |
//! | `time.checkpoint_interval` | 0 (only at termination) |
//! | `time.max_halvings` | 4 |
//! | `output.directory` | `$PITAEVSKII_OUTPUT_DIR`, else `pitaevskii-out` |

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pitaevskii_core::{
    DensitySpec, GalerkinTruncation, Grid, InitialDataSpec, ModelParams, PicardOptions, VelocitySpec,
    WavefunctionSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const OUTPUT_DIR_ENV: &str = "PITAEVSKII_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "pitaevskii-out";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points per axis; its length is the dimension.
    pub resolution: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Stepper {
    #[default]
    Rk4,
    Picard {
        #[serde(default = "default_picard_tol")]
        tol: f64,
        #[serde(default = "default_picard_iter")]
        max_iter: usize,
    },
}

fn default_picard_tol() -> f64 {
    PicardOptions::default().tol
}

fn default_picard_iter() -> usize {
    PicardOptions::default().max_iter
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub stepper: Stepper,
    /// Steps between diagnostics rows.
    #[serde(default = "one")]
    pub output_interval: u64,
    /// Steps between checkpoints; 0 writes one only at termination.
    #[serde(default)]
    pub checkpoint_interval: u64,
    /// How many times a rejected step may be split in two.
    #[serde(default = "default_halvings")]
    pub max_halvings: u32,
}

fn one() -> u64 {
    1
}

fn default_halvings() -> u32 {
    4
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialDataSpec>,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig {
                resolution: vec![32, 32],
                lengths: None,
            },
            truncation: TruncationConfig::default(),
            model: ModelParams::default(),
            initial: None,
            time: TimeConfig {
                dt: 1e-3,
                t_end: 1.0,
                stepper: Stepper::Rk4,
                output_interval: 1,
                checkpoint_interval: 0,
                max_halvings: default_halvings(),
            },
            output: OutputConfig::default(),
        }
    }
}

fn invalid(invariant: &'static str, message: impl Into<String>) -> SimError {
    SimError::Invalid {
        invariant,
        message: message.into(),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    pub fn dim(&self) -> usize {
        self.grid.resolution.len()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.grid
            .lengths
            .clone()
            .unwrap_or_else(|| vec![2.0 * PI; self.dim()])
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        Ok(Grid::new(&self.grid.resolution, &self.lengths())?)
    }

    /// The largest cutoff the 2/3 rule allows on every axis.
    pub fn max_cutoff(&self) -> usize {
        self.grid.resolution.iter().map(|n| n / 3).min().unwrap_or(0)
    }

    pub fn truncation(&self) -> GalerkinTruncation {
        GalerkinTruncation::new(self.truncation.cutoff.unwrap_or_else(|| self.max_cutoff()))
    }

    pub fn initial_data(&self) -> InitialDataSpec {
        self.initial.clone().unwrap_or_else(|| {
            let mut k = vec![0; self.dim()];
            if let Some(first) = k.first_mut() {
                *first = 1;
            }
            InitialDataSpec {
                wavefunction: WavefunctionSpec::PlaneWave {
                    amplitude: 1.0,
                    wavevector: k,
                },
                velocity: VelocitySpec::Zero,
                density: DensitySpec::Constant { value: 1.0 },
                seed: 0,
            }
        })
    }

    pub fn picard_options(&self) -> Option<PicardOptions> {
        match self.time.stepper {
            Stepper::Rk4 => None,
            Stepper::Picard { tol, max_iter } => Some(PicardOptions { tol, max_iter }),
        }
    }

    /// Number of steps to reach `t_end`; the last one is shortened when
    /// `t_end` is not a multiple of `dt`.
    pub fn total_steps(&self) -> u64 {
        let ratio = self.time.t_end / self.time.dt;
        (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as u64
    }

    /// Time at the end of step `k`.
    pub fn step_time(&self, k: u64) -> f64 {
        if k >= self.total_steps() {
            self.time.t_end
        } else {
            k as f64 * self.time.dt
        }
    }

    /// Output directory: the explicit argument, then `[output] directory`,
    /// then the environment variable, then a fixed default.
    pub fn output_dir(&self, explicit: Option<&Path>) -> PathBuf {
        if let Some(p) = explicit {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output.directory {
            return p.clone();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if !(1..=3).contains(&dim) {
            return Err(invalid("grid dimension", format!("resolution must list 1 to 3 axes, got {dim}")));
        }
        if self.grid.resolution.iter().any(|&n| n < 2) {
            return Err(invalid("grid resolution", "every axis needs at least 2 points"));
        }
        let lengths = self.lengths();
        if lengths.len() != dim || lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(invalid(
                "grid lengths",
                format!("need {dim} positive box lengths, got {lengths:?}"),
            ));
        }
        let cutoff = self.truncation().cutoff;
        if cutoff > self.max_cutoff() {
            return Err(invalid(
                "truncation cutoff",
                format!(
                    "cutoff {cutoff} exceeds {} allowed by 2/3 dealiasing on {:?}",
                    self.max_cutoff(),
                    self.grid.resolution
                ),
            ));
        }
        self.model.validate().map_err(|e| {
            let name = if self.model.density_floor >= self.model.density_min || self.model.density_floor <= 0.0 {
                "density floor"
            } else {
                "model parameters"
            };
            invalid(name, e.to_string())
        })?;
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return Err(invalid("time step", format!("dt must be positive, got {}", t.dt)));
        }
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return Err(invalid("final time", format!("t_end must be nonnegative, got {}", t.t_end)));
        }
        if t.output_interval == 0 {
            return Err(invalid("output interval", "output_interval must be at least 1"));
        }
        if let Stepper::Picard { tol, max_iter } = t.stepper {
            if tol.is_nan() || tol <= 0.0 || max_iter == 0 {
                return Err(invalid(
                    "Picard controls",
                    format!("need tol > 0 and max_iter >= 1, got {tol} and {max_iter}"),
                ));
            }
        }
        Ok(())
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg = RunConfig::from_toml(&text).map_err(|message| SimError::Parse {
        path: path.to_path_buf(),
        message,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

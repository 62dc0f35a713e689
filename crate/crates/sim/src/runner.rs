//! The time loop: stepping with step-halving retries, the density-floor
//! monitor, diagnostics rows and checkpoints.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use pitaevskii_core::{
    build_initial_state, compute_diagnostics, existence_monitor, picard_step, rk4_step, total_energy,
    DiagnosticsRecord, Error as CoreError, GalerkinTruncation, Grid, ModelParams, MonitorStatus, PicardOptions,
    SimState,
};

use crate::checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
use crate::config::RunConfig;
use crate::error::{Result, SimError};
use crate::ledger;

pub const CONFIG_ECHO: &str = "config.toml";
pub const FINAL_CHECKPOINT: &str = "checkpoint_final.bin";

pub fn checkpoint_name(step: u64) -> String {
    format!("checkpoint_{step:08}.bin")
}

/// How a run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum ExitReport {
    Completed { t: f64, steps: u64 },
    /// The density minimum fell below the floor: the end of the existence interval.
    HaltedDensityFloor { t: f64, min_density: f64 },
    StepperFailure { t: f64, message: String },
}

impl ExitReport {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExitReport::Completed { .. } => 0,
            ExitReport::HaltedDensityFloor { .. } => 2,
            ExitReport::StepperFailure { .. } => 1,
        }
    }
}

impl fmt::Display for ExitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExitReport::Completed { t, steps } => write!(f, "completed at t = {t} after {steps} steps"),
            ExitReport::HaltedDensityFloor { t, min_density } => {
                write!(f, "halted at the density floor at t = {t} (min density {min_density})")
            }
            ExitReport::StepperFailure { t, message } => write!(f, "stepper failure at t = {t}: {message}"),
        }
    }
}

/// An in-memory run.
pub struct Simulation {
    config: RunConfig,
    grid: Arc<Grid>,
    trunc: GalerkinTruncation,
    picard: Option<PicardOptions>,
    state: SimState,
    step: u64,
    e0: f64,
    records: Vec<DiagnosticsRecord>,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.build_grid()?;
        let trunc = config.truncation();
        let state = build_initial_state(&config.initial_data(), &grid, &trunc, &config.model)?;
        let e0 = total_energy(&state, &config.model);
        let mut sim = Simulation {
            picard: config.picard_options(),
            config,
            grid,
            trunc,
            state,
            step: 0,
            e0,
            records: Vec::new(),
        };
        sim.record();
        Ok(sim)
    }

    /// Continues from a checkpoint. `prior` rows later than the checkpoint are
    /// dropped; with no prior rows the checkpoint state opens the ledger.
    pub fn resume(config: RunConfig, ck: Checkpoint, prior: Vec<DiagnosticsRecord>) -> Result<Self> {
        config.validate()?;
        check_compatible(&config, &ck.config)?;
        let grid = ck.state.grid().clone();
        let mut records: Vec<DiagnosticsRecord> = prior.into_iter().filter(|r| r.t <= ck.state.t).collect();
        let mut sim = Simulation {
            picard: config.picard_options(),
            trunc: config.truncation(),
            config,
            grid,
            state: ck.state,
            step: ck.step,
            e0: ck.e0,
            records: Vec::new(),
        };
        if records.last().map(|r| r.t) != Some(sim.state.t) {
            records.clear();
            sim.record();
            records = std::mem::take(&mut sim.records);
        }
        sim.records = records;
        Ok(sim)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn truncation(&self) -> &GalerkinTruncation {
        &self.trunc
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn initial_energy(&self) -> f64 {
        self.e0
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            state: self.state.clone(),
            step: self.step,
            e0: self.e0,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.config.total_steps()
    }

    fn record(&mut self) {
        let r = compute_diagnostics(&self.state, &self.trunc, &self.config.model, Some(self.e0));
        self.records.push(r);
    }

    fn single(&self, s: &SimState, h: f64, params: &ModelParams) -> pitaevskii_core::Result<SimState> {
        match &self.picard {
            None => rk4_step(s, h, &self.trunc, params),
            Some(opts) => picard_step(s, h, &self.trunc, params, opts).map(|(z, _)| z),
        }
    }

    /// A step of length `h`, split in two on a floor rejection or a failed
    /// contraction. At the deepest level the stage check is relaxed to
    /// positivity so that the monitor, not the stepper, sees the floor.
    /// Returns early with the first sub-step state that is below the floor.
    fn try_step(&self, s: &SimState, h: f64, level: u32) -> pitaevskii_core::Result<SimState> {
        let params = &self.config.model;
        match self.single(s, h, params) {
            Err(e @ (CoreError::DensityFloor { .. } | CoreError::Contraction { .. })) => {
                if level < self.config.time.max_halvings {
                    let mid = self.try_step(s, 0.5 * h, level + 1)?;
                    if mid.min_density() < params.density_floor {
                        return Ok(mid);
                    }
                    self.try_step(&mid, 0.5 * h, level + 1)
                } else if matches!(e, CoreError::DensityFloor { .. }) {
                    let relaxed = ModelParams {
                        density_floor: f64::MIN_POSITIVE,
                        ..*params
                    };
                    self.single(s, h, &relaxed)
                } else {
                    Err(e)
                }
            }
            other => other,
        }
    }

    /// Takes one step; `Some` when the run has ended.
    pub fn advance(&mut self) -> Option<ExitReport> {
        if self.is_finished() {
            return Some(ExitReport::Completed {
                t: self.state.t,
                steps: self.step,
            });
        }
        let target = self.config.step_time(self.step + 1);
        let h = target - self.state.t;
        let next = match self.try_step(&self.state, h, 0) {
            Ok(s) => s,
            Err(e) => {
                return Some(ExitReport::StepperFailure {
                    t: self.state.t,
                    message: e.to_string(),
                })
            }
        };
        self.state = next;
        if let MonitorStatus::Halt { min_density, t } = existence_monitor(&self.state, &self.config.model) {
            self.step += 1;
            self.record();
            return Some(ExitReport::HaltedDensityFloor { t, min_density });
        }
        self.state.t = target;
        self.step += 1;
        let finished = self.is_finished();
        if finished || self.step.is_multiple_of(self.config.time.output_interval) {
            self.record();
        }
        finished.then_some(ExitReport::Completed {
            t: self.state.t,
            steps: self.step,
        })
    }

    /// Steps to the end, calling `after_step` after every step that did not end the run.
    pub fn run_with(&mut self, mut after_step: impl FnMut(&Simulation) -> Result<()>) -> Result<ExitReport> {
        loop {
            if let Some(report) = self.advance() {
                return Ok(report);
            }
            after_step(self)?;
        }
    }

    pub fn run(&mut self) -> ExitReport {
        self.run_with(|_| Ok(())).expect("no callback errors")
    }
}

/// The physics of a resumed run must match the checkpoint's; the final time,
/// output schedule and directory may change.
fn check_compatible(config: &RunConfig, saved: &RunConfig) -> Result<()> {
    let strip = |c: &RunConfig| {
        let mut c = c.clone();
        c.time.t_end = 0.0;
        c.time.output_interval = 1;
        c.time.checkpoint_interval = 0;
        c.output = Default::default();
        c
    };
    if strip(config) != strip(saved) {
        return Err(SimError::Invalid {
            invariant: "resume compatibility",
            message: "the configuration differs from the checkpoint's in grid, truncation, model, initial data, dt or stepper"
                .into(),
        });
    }
    Ok(())
}

/// Result of [`run_simulation`].
#[derive(Debug)]
pub struct RunOutcome {
    pub report: ExitReport,
    pub output_dir: PathBuf,
    pub records: Vec<DiagnosticsRecord>,
}

/// Runs a configuration to the end, writing `config.toml`, `diagnostics.csv`,
/// scheduled checkpoints and `checkpoint_final.bin` into `output_dir`.
pub fn run_simulation(config: &RunConfig, output_dir: &Path, resume: Option<&Path>) -> Result<RunOutcome> {
    let mut sim = match resume {
        None => Simulation::new(config.clone())?,
        Some(path) => {
            let ck = read_checkpoint(path)?;
            let csv = output_dir.join(ledger::FILE_NAME);
            let prior = if csv.exists() {
                ledger::read_diagnostics(&csv)?
            } else {
                Vec::new()
            };
            Simulation::resume(config.clone(), ck, prior)?
        }
    };
    crate::checkpoint::write_atomic(&output_dir.join(CONFIG_ECHO), config.to_toml().as_bytes())?;
    let csv = output_dir.join(ledger::FILE_NAME);
    ledger::emit_diagnostics(sim.records(), &csv)?;
    let every = config.time.checkpoint_interval;
    let report = sim.run_with(|s| {
        if every > 0 && s.step() % every == 0 {
            write_checkpoint(&s.checkpoint(), &output_dir.join(checkpoint_name(s.step())))?;
            ledger::emit_diagnostics(s.records(), &csv)?;
        }
        Ok(())
    })?;
    let ck = sim.checkpoint();
    if every > 0 && sim.step() % every == 0 && !matches!(report, ExitReport::StepperFailure { .. }) {
        write_checkpoint(&ck, &output_dir.join(checkpoint_name(sim.step())))?;
    }
    write_checkpoint(&ck, &output_dir.join(FINAL_CHECKPOINT))?;
    ledger::emit_diagnostics(sim.records(), &csv)?;
    Ok(RunOutcome {
        report,
        output_dir: output_dir.to_path_buf(),
        records: sim.records,
    })
}

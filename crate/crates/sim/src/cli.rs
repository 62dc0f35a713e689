//! Command-line verbs. Each returns the process exit code: 0 on success, 2
//! when a run halts at the density floor, 1 on any error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use pitaevskii_core::{
    build_initial_state, compute_diagnostics, density_oracle, gronwall_monitor, renormalized_check,
    DiagnosticsRecord, FlowHistory,
};

use crate::checkpoint::read_checkpoint;
use crate::config::load_config;
use crate::error::{Result, SimError};
use crate::ledger;
use crate::runner::{run_simulation, ExitReport, Simulation, FINAL_CHECKPOINT};

#[derive(Debug, Parser)]
#[command(name = "pitaevskii", version, about = "Semi-Galerkin simulator for the coupled superfluid/normal-fluid model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a configuration, writing diagnostics and checkpoints.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config and PITAEVSKII_OUTPUT_DIR.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Continue from this checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Check a configuration and its initial data without stepping.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare a finished run's density with the characteristics solution.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Directory of the run to check.
        #[arg(long)]
        against: PathBuf,
        /// Use every `stride`-th grid point.
        #[arg(long, default_value_t = 4)]
        stride: usize,
        /// Largest characteristic sub-step, as a fraction of dt.
        #[arg(long, default_value_t = 0.25)]
        substep: f64,
        /// Largest acceptable max-norm deviation.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Summarise a run directory's diagnostics.
    Report { run_dir: PathBuf },
}

/// Parses `args` and runs the verb.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn io(e: std::io::Error) -> SimError {
    SimError::Write {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Run { config, output, resume } => run(config, output.as_deref(), resume.as_deref(), out),
        Command::Validate { config } => validate(config, out),
        Command::Oracle {
            config,
            against,
            stride,
            substep,
            tol,
        } => oracle(config, against, *stride, *substep, *tol, out),
        Command::Report { run_dir } => report(run_dir, out),
    }
}

fn run(config: &Path, output: Option<&Path>, resume: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(config)?;
    let dir = cfg.output_dir(output);
    let outcome = run_simulation(&cfg, &dir, resume)?;
    writeln!(out, "{}", outcome.report).map_err(io)?;
    if let Some(last) = outcome.records.last() {
        writeln!(
            out,
            "final: total mass {:.12e}, energy {:.12e}, energy residual {:.3e}, min density {:.6}",
            last.total_mass,
            last.energy(),
            last.energy_residual,
            last.min_density
        )
        .map_err(io)?;
    }
    writeln!(out, "output written to {}", dir.display()).map_err(io)?;
    Ok(outcome.report.exit_code())
}

fn validate(config: &Path, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(config)?;
    let grid = cfg.build_grid()?;
    let trunc = cfg.truncation();
    let s = build_initial_state(&cfg.initial_data(), &grid, &trunc, &cfg.model)?;
    let r = compute_diagnostics(&s, &trunc, &cfg.model, None);
    writeln!(
        out,
        "grid {:?}, lengths {:?}, cutoff {} (max {})",
        cfg.grid.resolution,
        cfg.lengths(),
        trunc.cutoff,
        cfg.max_cutoff()
    )
    .map_err(io)?;
    writeln!(
        out,
        "steps {} of dt {} to t_end {}",
        cfg.total_steps(),
        cfg.time.dt,
        cfg.time.t_end
    )
    .map_err(io)?;
    writeln!(
        out,
        "initial density in [{:.6}, {:.6}] (bounds [{}, {}], floor {})",
        r.min_density, r.max_density, cfg.model.density_min, cfg.model.density_max, cfg.model.density_floor
    )
    .map_err(io)?;
    writeln!(
        out,
        "divergence defect {:.3e}, superfluid mass {:.12e}, normal mass {:.12e}, energy {:.12e}, X0 {:.6e}",
        s.u.divergence_defect(),
        r.superfluid_mass,
        r.normal_mass,
        r.energy(),
        r.x_monitor
    )
    .map_err(io)?;
    writeln!(out, "configuration is valid").map_err(io)?;
    Ok(0)
}

fn oracle(config: &Path, run_dir: &Path, stride: usize, substep: f64, tol: f64, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(config)?;
    let ck = read_checkpoint(&run_dir.join(FINAL_CHECKPOINT))?;
    let mut sim = Simulation::new(cfg.clone())?;
    let rho0 = sim.state().rho.clone();
    let mut history = FlowHistory::new();
    history.record(sim.state(), sim.truncation(), &cfg.model)?;
    while sim.step() < ck.step {
        if let Some(ExitReport::StepperFailure { message, .. }) = sim.advance() {
            return Err(pitaevskii_core::Error::Validation(format!("replay failed: {message}")).into());
        }
        history.record(sim.state(), sim.truncation(), &cfg.model)?;
    }
    if sim.state() != &ck.state {
        writeln!(out, "warning: the replayed state differs from the run's final checkpoint").map_err(io)?;
    }
    let grid = ck.state.grid().clone();
    let points: Vec<Vec<f64>> = (0..grid.len())
        .step_by(stride.max(1))
        .map(|i| grid.point(i)[..grid.dim()].to_vec())
        .collect();
    let dt_sub = substep * cfg.time.dt;
    let oracle = density_oracle(&rho0, &history, &points, ck.state.t, dt_sub)?;
    let worst = points
        .iter()
        .zip(&oracle)
        .map(|(x, o)| (ck.state.rho.evaluate_at(x).re - o).abs())
        .fold(0.0f64, f64::max);
    let renorm = renormalized_check(&history)?;
    writeln!(
        out,
        "t = {}: {} points, max |rho_spectral - rho_characteristics| = {worst:.3e} (tol {tol:e})",
        ck.state.t,
        points.len()
    )
    .map_err(io)?;
    writeln!(out, "renormalized (rho^2) defect {renorm:.3e}").map_err(io)?;
    Ok(if worst <= tol { 0 } else { 1 })
}

/// Summary statistics of a diagnostics ledger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerSummary {
    pub rows: usize,
    pub t_end: f64,
    pub max_energy_residual: f64,
    pub max_total_mass_drift: f64,
    /// Largest relative increase of `‖ψ‖²` between consecutive rows.
    pub superfluid_mass_increase: f64,
    /// Largest relative decrease of `∫ρ` between consecutive rows.
    pub normal_mass_decrease: f64,
    pub min_density: f64,
}

pub fn summarize(records: &[DiagnosticsRecord]) -> Option<LedgerSummary> {
    let first = records.first()?;
    let mut s = LedgerSummary {
        rows: records.len(),
        t_end: records.last()?.t,
        max_energy_residual: 0.0,
        max_total_mass_drift: 0.0,
        superfluid_mass_increase: 0.0,
        normal_mass_decrease: 0.0,
        min_density: f64::INFINITY,
    };
    for r in records {
        s.max_energy_residual = s.max_energy_residual.max(r.energy_residual);
        s.max_total_mass_drift = s
            .max_total_mass_drift
            .max((r.total_mass - first.total_mass).abs() / first.total_mass);
        s.min_density = s.min_density.min(r.min_density);
    }
    for w in records.windows(2) {
        s.superfluid_mass_increase = s
            .superfluid_mass_increase
            .max((w[1].superfluid_mass - w[0].superfluid_mass) / first.superfluid_mass.max(f64::MIN_POSITIVE));
        s.normal_mass_decrease = s
            .normal_mass_decrease
            .max((w[0].normal_mass - w[1].normal_mass) / first.normal_mass.max(f64::MIN_POSITIVE));
    }
    Some(s)
}

fn report(run_dir: &Path, out: &mut dyn Write) -> Result<i32> {
    let records = ledger::read_diagnostics(&run_dir.join(ledger::FILE_NAME))?;
    let g = gronwall_monitor(&records)?;
    let s = summarize(&records).expect("gronwall_monitor rejects empty ledgers");
    let (first, last) = (records[0], records[records.len() - 1]);
    let mut w = |line: String| writeln!(out, "{line}").map_err(io);
    w(format!("{} rows, t = {} .. {}", s.rows, first.t, s.t_end))?;
    w(format!("{:<22} {:>24} {:>24}", "quantity", "initial", "final"))?;
    for (name, a, b) in [
        ("superfluid mass", first.superfluid_mass, last.superfluid_mass),
        ("normal mass", first.normal_mass, last.normal_mass),
        ("total mass", first.total_mass, last.total_mass),
        ("energy", first.energy(), last.energy()),
        ("viscous dissipation", first.viscous_dissipation, last.viscous_dissipation),
        ("coupling dissipation", first.coupling_dissipation, last.coupling_dissipation),
        ("min density", first.min_density, last.min_density),
        ("max density", first.max_density, last.max_density),
        ("X", first.x_monitor, last.x_monitor),
    ] {
        w(format!("{name:<22} {a:>24.16e} {b:>24.16e}"))?;
    }
    w(format!("max energy residual      {:.3e}", s.max_energy_residual))?;
    w(format!("max total mass drift     {:.3e}", s.max_total_mass_drift))?;
    w(format!("superfluid mass increase {:.3e}", s.superfluid_mass_increase))?;
    w(format!("normal mass decrease     {:.3e}", s.normal_mass_decrease))?;
    w(format!(
        "X(t) <= 2 X0: {} (max X/X0 = {:.6})",
        g.x_bound_holds, g.max_x_ratio
    ))?;
    w(format!(
        "int Y dt <= 31 X0: {} (int Y = {:.6e}, 31 X0 = {:.6e})",
        g.y_bound_holds,
        g.y_integral,
        31.0 * g.x0
    ))?;
    Ok(0)
}

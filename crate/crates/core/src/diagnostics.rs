//! Mass, energy and monitor quantities computed from a state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::{evaluate, gradient_norm_sqr, solve_mass, GalerkinTruncation, SimState};
use crate::params::ModelParams;
use crate::spectral;

/// One row of the conservation and energy ledger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `‖ψ‖²`.
    pub superfluid_mass: f64,
    /// `∫ρ`.
    pub normal_mass: f64,
    pub total_mass: f64,
    /// `½‖√ρ u‖²`.
    pub kinetic_energy: f64,
    /// `½‖∇ψ‖²`.
    pub gradient_energy: f64,
    /// `μ/2 ‖ψ‖⁴_{L⁴}`.
    pub potential_energy: f64,
    /// `∫₀ᵗ ν‖∇u‖²`.
    pub viscous_dissipation: f64,
    /// `∫₀ᵗ 2Λ‖Bψ‖²`.
    pub coupling_dissipation: f64,
    /// `|E + dissipation − E₀| / E₀` (absolute when `E₀ = 0`).
    pub energy_residual: f64,
    pub min_density: f64,
    pub max_density: f64,
    /// `1 + ‖Δψ‖² + ν‖∇u‖²`.
    pub x_monitor: f64,
    /// `Λ‖∇(Bψ)‖² + ‖√ρ ∂ₜu‖² + ν²/M' ‖Δu‖²`.
    pub y_monitor: f64,
    /// `‖Bψ‖_{L^∞}`.
    pub bpsi_sup: f64,
}

impl DiagnosticsRecord {
    pub fn energy(&self) -> f64 {
        self.kinetic_energy + self.gradient_energy + self.potential_energy
    }

    pub const COLUMNS: [&'static str; 15] = [
        "t",
        "superfluid_mass",
        "normal_mass",
        "total_mass",
        "kinetic_energy",
        "gradient_energy",
        "potential_energy",
        "viscous_dissipation",
        "coupling_dissipation",
        "energy_residual",
        "min_density",
        "max_density",
        "x_monitor",
        "y_monitor",
        "bpsi_sup",
    ];

    pub fn values(&self) -> [f64; 15] {
        [
            self.t,
            self.superfluid_mass,
            self.normal_mass,
            self.total_mass,
            self.kinetic_energy,
            self.gradient_energy,
            self.potential_energy,
            self.viscous_dissipation,
            self.coupling_dissipation,
            self.energy_residual,
            self.min_density,
            self.max_density,
            self.x_monitor,
            self.y_monitor,
            self.bpsi_sup,
        ]
    }

    pub fn from_values(v: &[f64; 15]) -> Self {
        DiagnosticsRecord {
            t: v[0],
            superfluid_mass: v[1],
            normal_mass: v[2],
            total_mass: v[3],
            kinetic_energy: v[4],
            gradient_energy: v[5],
            potential_energy: v[6],
            viscous_dissipation: v[7],
            coupling_dissipation: v[8],
            energy_residual: v[9],
            min_density: v[10],
            max_density: v[11],
            x_monitor: v[12],
            y_monitor: v[13],
            bpsi_sup: v[14],
        }
    }
}

/// `E = ½‖√ρ u‖² + ½‖∇ψ‖² + μ/2‖ψ‖⁴_{L⁴}` by grid quadrature.
pub fn total_energy(s: &SimState, params: &ModelParams) -> f64 {
    let (k, g, p) = energy_parts(s, params);
    k + g + p
}

fn energy_parts(s: &SimState, params: &ModelParams) -> (f64, f64, f64) {
    let grid = s.grid();
    let w = grid.cell_volume();
    let rho = s.rho.to_real_values();
    let u = s.u.to_real_values();
    let mut kin = 0.0;
    for x in 0..grid.len() {
        let u2: f64 = u.iter().map(|c| c[x] * c[x]).sum();
        kin += rho[x] * u2;
    }
    let grad: f64 = spectral::gradient(&s.psi).iter().map(|g| g.norm_sqr()).sum();
    let quartic: f64 = s.psi.to_physical().iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * w;
    (0.5 * kin * w, 0.5 * grad, 0.5 * params.interaction * quartic)
}

/// Computes every ledger quantity. `e0` is the run's initial energy; when it is
/// `None` the state itself defines it, so the residual is zero.
pub fn compute_diagnostics(
    s: &SimState,
    trunc: &GalerkinTruncation,
    params: &ModelParams,
    e0: Option<f64>,
) -> DiagnosticsRecord {
    let grid = s.grid().clone();
    let keep = trunc.mask(&grid);
    let (kinetic, gradient, potential) = energy_parts(s, params);
    let energy = kinetic + gradient + potential;
    let dissipated = s.viscous_dissipation + s.coupling_dissipation;
    let e0 = e0.unwrap_or(energy + dissipated);
    let gap = (energy + dissipated - e0).abs();
    let energy_residual = if e0 != 0.0 { gap / e0.abs() } else { gap };

    let superfluid_mass = s.psi.norm_sqr();
    let normal_mass = s.rho.coeffs()[0].re * grid.volume();
    let rho = s.rho.to_real_values();
    let min_density = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let max_density = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let lap_psi = spectral::laplacian(&s.psi).norm_sqr();
    let x_monitor = 1.0 + lap_psi + params.viscosity * gradient_norm_sqr(&s.u);

    let (y_monitor, bpsi_sup) = match evaluate(&s.psi, &s.u, &s.rho, &keep, params) {
        Ok(ev) => {
            let grad_b: f64 = spectral::gradient(&ev.b).iter().map(|g| g.norm_sqr()).sum();
            let bsup = ev.b.to_physical().iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let accel = solve_mass(&grid, &ev.rho_phys, &ev.force_field, &keep).map(|ud| {
                let w = grid.cell_volume();
                let mut sum = 0.0;
                for mut c in ud {
                    grid.inverse(&mut c);
                    sum += c.iter().zip(&rho).map(|(v, r)| r * v.re * v.re).sum::<f64>();
                }
                sum * w
            });
            let lap_u: f64 = s.u.components().iter().map(|c| spectral::laplacian(c).norm_sqr()).sum();
            let y = match accel {
                Ok(a) => {
                    params.coupling * grad_b
                        + a
                        + params.viscosity * params.viscosity / params.density_upper_bound() * lap_u
                }
                Err(_) => f64::NAN,
            };
            (y, bsup)
        }
        Err(_) => (f64::NAN, f64::NAN),
    };

    DiagnosticsRecord {
        t: s.t,
        superfluid_mass,
        normal_mass,
        total_mass: superfluid_mass + normal_mass,
        kinetic_energy: kinetic,
        gradient_energy: gradient,
        potential_energy: potential,
        viscous_dissipation: s.viscous_dissipation,
        coupling_dissipation: s.coupling_dissipation,
        energy_residual,
        min_density,
        max_density,
        x_monitor,
        y_monitor,
        bpsi_sup,
    }
}

/// Outcome of the density-floor check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MonitorStatus {
    Continue,
    Halt { min_density: f64, t: f64 },
}

/// Halts exactly when the grid minimum of `ρ` is below the floor `ε`.
pub fn existence_monitor(s: &SimState, params: &ModelParams) -> MonitorStatus {
    let min = s.min_density();
    if min < params.density_floor {
        MonitorStatus::Halt { min_density: min, t: s.t }
    } else {
        MonitorStatus::Continue
    }
}

/// Whether a run stayed inside the a priori regime `X ≤ 2X₀`, `∫Y ≤ 31X₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub x0: f64,
    /// `max_t X(t) / X₀`.
    pub max_x_ratio: f64,
    pub x_bound_holds: bool,
    /// `∫ Y dt` by the trapezoid rule.
    pub y_integral: f64,
    pub y_bound_holds: bool,
}

pub fn gronwall_monitor(records: &[DiagnosticsRecord]) -> Result<GronwallReport> {
    let first = records
        .first()
        .ok_or_else(|| Error::Input("no diagnostics records".into()))?;
    let x0 = first.x_monitor;
    let max_x = records.iter().fold(f64::NEG_INFINITY, |m, r| m.max(r.x_monitor));
    let y_integral: f64 = records
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].y_monitor + w[1].y_monitor))
        .sum();
    Ok(GronwallReport {
        x0,
        max_x_ratio: max_x / x0,
        x_bound_holds: max_x <= 2.0 * x0,
        y_integral,
        y_bound_holds: y_integral <= 31.0 * x0,
    })
}

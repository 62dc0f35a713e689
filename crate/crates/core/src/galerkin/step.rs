use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{rates, truncate_state, GalerkinTruncation, Rates, SimState};
use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, VelocityField};
use crate::grid::Grid;
use crate::params::ModelParams;

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("time step must be positive, got {dt}")))
    }
}

fn axpy(x: &[Complex64], a: f64, y: &[Complex64]) -> Vec<Complex64> {
    x.iter().zip(y).map(|(p, q)| p + q * a).collect()
}

/// `s + a·r` for the three fields; the clock and accumulators are left alone.
fn advance(grid: &Arc<Grid>, s: &SimState, a: f64, r: &Rates) -> Result<SimState> {
    let psi = SpectralScalarField::from_coefficients(grid, axpy(s.psi.coeffs(), a, &r.psi), false)?;
    let comps = s
        .u
        .components()
        .iter()
        .zip(&r.u)
        .map(|(c, d)| SpectralScalarField::from_coefficients(grid, axpy(c.coeffs(), a, d), true))
        .collect::<Result<Vec<_>>>()?;
    let rho = SpectralScalarField::from_coefficients(grid, axpy(s.rho.coeffs(), a, &r.rho), true)?;
    Ok(SimState {
        psi,
        u: VelocityField::from_components_unchecked(comps)?,
        rho,
        ..s.clone()
    })
}

fn stage(s: &SimState, keep: &[bool], params: &ModelParams) -> Result<Rates> {
    rates(&s.psi, &s.u, &s.rho, keep, params)
}

/// One classical fourth-order Runge-Kutta step of the truncated system.
///
/// The dissipation integrals are advanced with the same stage weights, so the
/// energy residual stays at the order of the scheme.
pub fn rk4_step(s: &SimState, dt: f64, trunc: &GalerkinTruncation, params: &ModelParams) -> Result<SimState> {
    check_dt(dt)?;
    let grid = s.grid().clone();
    let keep = trunc.mask(&grid);
    let s0 = truncate_state(s, trunc);
    let k1 = stage(&s0, &keep, params)?;
    let s1 = truncate_state(&advance(&grid, &s0, 0.5 * dt, &k1)?, trunc);
    let k2 = stage(&s1, &keep, params)?;
    let s2 = truncate_state(&advance(&grid, &s0, 0.5 * dt, &k2)?, trunc);
    let k3 = stage(&s2, &keep, params)?;
    let s3 = truncate_state(&advance(&grid, &s0, dt, &k3)?, trunc);
    let k4 = stage(&s3, &keep, params)?;

    let combo = |f: &dyn Fn(&Rates) -> &Vec<Complex64>| -> Vec<Complex64> {
        let (a, b, c, d) = (f(&k1), f(&k2), f(&k3), f(&k4));
        (0..a.len()).map(|i| (a[i] + (b[i] + c[i]) * 2.0 + d[i]) / 6.0).collect()
    };
    let combined = Rates {
        psi: combo(&|r| &r.psi),
        u: (0..grid.dim()).map(|a| combo(&|r: &Rates| &r.u[a])).collect(),
        rho: combo(&|r| &r.rho),
        viscous: (k1.viscous + 2.0 * (k2.viscous + k3.viscous) + k4.viscous) / 6.0,
        coupling: (k1.coupling + 2.0 * (k2.coupling + k3.coupling) + k4.coupling) / 6.0,
    };
    let mut out = truncate_state(&advance(&grid, &s0, dt, &combined)?, trunc);
    out.t = s.t + dt;
    out.viscous_dissipation = s.viscous_dissipation + dt * combined.viscous;
    out.coupling_dissipation = s.coupling_dissipation + dt * combined.coupling;
    Ok(out)
}

/// Convergence controls for [`picard_step`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

fn midpoint(grid: &Arc<Grid>, a: &SimState, b: &SimState) -> Result<SimState> {
    let avg = |x: &SpectralScalarField, y: &SpectralScalarField| -> Result<SpectralScalarField> {
        let c = x.coeffs().iter().zip(y.coeffs()).map(|(p, q)| (p + q) * 0.5).collect();
        SpectralScalarField::from_coefficients(grid, c, x.is_real())
    };
    let comps = a
        .u
        .components()
        .iter()
        .zip(b.u.components())
        .map(|(x, y)| avg(x, y))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimState {
        psi: avg(&a.psi, &b.psi)?,
        u: VelocityField::from_components_unchecked(comps)?,
        rho: avg(&a.rho, &b.rho)?,
        ..a.clone()
    })
}

fn distance(a: &SimState, b: &SimState) -> f64 {
    let d = |x: &SpectralScalarField, y: &SpectralScalarField| SpectralScalarField::lincomb(1.0, x, -1.0, y).norm_sqr().sqrt();
    let du = a
        .u
        .components()
        .iter()
        .zip(b.u.components())
        .map(|(x, y)| SpectralScalarField::lincomb(1.0, x, -1.0, y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    d(&a.psi, &b.psi) + du + d(&a.rho, &b.rho)
}

/// Implicit-midpoint step solved by the fixed-point iteration
/// `z ← s + dt·RHS((s + z)/2)` starting from `z = s`.
///
/// Returns the converged state and the number of iterations taken.
pub fn picard_step(
    s: &SimState,
    dt: f64,
    trunc: &GalerkinTruncation,
    params: &ModelParams,
    opts: &PicardOptions,
) -> Result<(SimState, usize)> {
    check_dt(dt)?;
    if !(opts.tol > 0.0) {
        return Err(Error::Parameter(format!("Picard tolerance must be positive, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::Parameter("Picard iteration budget must be at least 1".into()));
    }
    let grid = s.grid().clone();
    let keep = trunc.mask(&grid);
    let s0 = truncate_state(s, trunc);
    let mut z = s0.clone();
    let mut last = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let mid = midpoint(&grid, &s0, &z)?;
        let r = stage(&mid, &keep, params)?;
        let mut next = truncate_state(&advance(&grid, &s0, dt, &r)?, trunc);
        last = distance(&next, &z);
        next.t = s.t + dt;
        next.viscous_dissipation = s.viscous_dissipation + dt * r.viscous;
        next.coupling_dissipation = s.coupling_dissipation + dt * r.coupling;
        z = next;
        if last < opts.tol {
            return Ok((z, iter));
        }
    }
    Err(Error::Contraction {
        iterations: opts.max_iter,
        last_update: last,
    })
}

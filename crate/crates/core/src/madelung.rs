//! Polar decomposition `ψ = √ρ_s e^{iS}` into superfluid density and velocity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{PointEvaluator, SpectralScalarField};
use crate::spectral;

/// Grid samples of `ρ_s = |ψ|²` and `v_s = Im(ψ̄∇ψ)/|ψ|²`.
#[derive(Clone, Debug, PartialEq)]
pub struct MadelungFields {
    pub density: Vec<f64>,
    /// One array per axis; zero where `valid` is false.
    pub velocity: Vec<Vec<f64>>,
    /// False in vacuum regions, where `|ψ|²` is below the threshold.
    pub valid: Vec<bool>,
}

pub fn madelung(psi: &SpectralScalarField, vacuum_threshold: f64) -> Result<MadelungFields> {
    if !(vacuum_threshold > 0.0) {
        return Err(Error::Parameter(format!(
            "vacuum threshold must be positive, got {vacuum_threshold}"
        )));
    }
    let values = psi.to_physical();
    let grads: Vec<_> = spectral::gradient(psi).iter().map(|g| g.to_physical()).collect();
    let density: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    let valid: Vec<bool> = density.iter().map(|&r| r >= vacuum_threshold).collect();
    let velocity = grads
        .iter()
        .map(|g| {
            (0..values.len())
                .map(|x| {
                    if valid[x] {
                        (values[x].conj() * g[x]).im / density[x]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    Ok(MadelungFields {
        density,
        velocity,
        valid,
    })
}

/// `∮ v_s·dl` around the circle of radius `radius` centred at `center` in the
/// plane of the first two axes, with `ψ` and `∇ψ` evaluated by Fourier
/// interpolation and the trapezoid rule on `samples` points.
pub fn circulation(psi: &SpectralScalarField, center: &[f64], radius: f64, samples: usize) -> Result<f64> {
    let dim = psi.grid().dim();
    if dim < 2 {
        return Err(Error::Dimension("circulation needs at least two dimensions".into()));
    }
    if center.len() != dim {
        return Err(Error::Dimension(format!(
            "centre has {} coordinates on a {dim}-dimensional grid",
            center.len()
        )));
    }
    if !(radius > 0.0) || samples < 3 {
        return Err(Error::Parameter("circle needs a positive radius and at least 3 samples".into()));
    }
    let grads = spectral::gradient(psi);
    let ev = PointEvaluator::for_fields(&[psi, &grads[0], &grads[1]]);
    let mut sum = 0.0;
    for j in 0..samples {
        let theta = 2.0 * PI * j as f64 / samples as f64;
        let mut x = center.to_vec();
        x[0] += radius * theta.cos();
        x[1] += radius * theta.sin();
        let v = ev.eval_all(&x);
        let rho = v[0].norm_sqr();
        if rho == 0.0 {
            return Err(Error::Validation("contour passes through a zero of the wavefunction".into()));
        }
        let vx = (v[0].conj() * v[1]).im / rho;
        let vy = (v[0].conj() * v[2]).im / rho;
        // dl = r(−sin θ, cos θ) dθ
        sum += radius * (-vx * theta.sin() + vy * theta.cos());
    }
    Ok(sum * 2.0 * PI / samples as f64)
}

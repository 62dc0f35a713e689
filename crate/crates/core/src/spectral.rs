//! Transforms, differential operators, Leray projection and norms.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, VelocityField};
use crate::grid::Grid;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Physical samples to Fourier amplitudes. The result is a complex field.
pub fn to_spectral(values: &[Complex64], grid: &Arc<Grid>) -> Result<SpectralScalarField> {
    SpectralScalarField::from_physical(grid, values, false)
}

/// Real physical samples to Fourier amplitudes with the reality flag set.
pub fn to_spectral_real(values: &[f64], grid: &Arc<Grid>) -> Result<SpectralScalarField> {
    SpectralScalarField::from_real_values(grid, values)
}

pub fn to_physical(f: &SpectralScalarField) -> Vec<Complex64> {
    f.to_physical()
}

fn map_modes(f: &SpectralScalarField, real: bool, g: impl Fn(usize, Complex64) -> Complex64) -> SpectralScalarField {
    let coeffs = f.coeffs().iter().enumerate().map(|(flat, &c)| g(flat, c)).collect();
    SpectralScalarField::from_coefficients(f.grid(), coeffs, real).expect("same grid")
}

/// `∂f/∂x_axis`.
pub fn partial(f: &SpectralScalarField, axis: usize) -> SpectralScalarField {
    let grid = f.grid().clone();
    map_modes(f, f.is_real(), |flat, c| I * grid.derivative_wavevector(flat)[axis] * c)
}

/// `∇f`, one component per axis.
pub fn gradient(f: &SpectralScalarField) -> Vec<SpectralScalarField> {
    (0..f.grid().dim()).map(|axis| partial(f, axis)).collect()
}

/// `∇·v` for components on a shared grid.
pub fn divergence(v: &[SpectralScalarField]) -> Result<SpectralScalarField> {
    let first = v
        .first()
        .ok_or_else(|| Error::Dimension("empty vector field".into()))?;
    let grid = first.grid().clone();
    if v.len() != grid.dim() {
        return Err(Error::Dimension(format!(
            "{} components for a {}-dimensional grid",
            v.len(),
            grid.dim()
        )));
    }
    for c in v {
        first.check_grid(c)?;
    }
    let real = v.iter().all(|c| c.is_real());
    let coeffs = (0..grid.len())
        .map(|flat| {
            let k = grid.derivative_wavevector(flat);
            v.iter()
                .enumerate()
                .map(|(axis, c)| I * k[axis] * c.coeffs()[flat])
                .sum()
        })
        .collect();
    SpectralScalarField::from_coefficients(&grid, coeffs, real)
}

/// `Δf`.
pub fn laplacian(f: &SpectralScalarField) -> SpectralScalarField {
    let grid = f.grid().clone();
    map_modes(f, f.is_real(), |flat, c| -grid.wavenumber_squared(flat) * c)
}

/// `(−Δ)^s f`, with the mean mode sent to zero.
pub fn fractional_laplacian(f: &SpectralScalarField, s: f64) -> Result<SpectralScalarField> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Parameter(format!(
            "fractional power must be a finite nonnegative number, got {s}"
        )));
    }
    let grid = f.grid().clone();
    Ok(map_modes(f, f.is_real(), |flat, c| {
        let k2 = grid.wavenumber_squared(flat);
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * k2.powf(s)
        }
    }))
}

/// Orthogonal projection onto divergence-free fields, `v̂ − k(k·v̂)/|k|²` per mode.
pub fn leray_project(v: &[SpectralScalarField]) -> Result<VelocityField> {
    let first = v
        .first()
        .ok_or_else(|| Error::Dimension("empty vector field".into()))?;
    let grid = first.grid().clone();
    let dim = grid.dim();
    if v.len() != dim {
        return Err(Error::Dimension(format!(
            "{} components for a {dim}-dimensional grid",
            v.len()
        )));
    }
    for c in v {
        first.check_grid(c)?;
    }
    let mut out: Vec<Vec<Complex64>> = v.iter().map(|c| c.coeffs().to_vec()).collect();
    for flat in 0..grid.len() {
        let k = grid.derivative_wavevector(flat);
        let k2: f64 = k[..dim].iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for axis in 0..dim {
            dot += out[axis][flat] * k[axis];
        }
        let dot = dot / k2;
        for axis in 0..dim {
            out[axis][flat] -= dot * k[axis];
        }
    }
    let components = out
        .into_iter()
        .map(|c| SpectralScalarField::from_coefficients(&grid, c, true))
        .collect::<Result<Vec<_>>>()?;
    VelocityField::from_components_unchecked(components)
}

/// `(Σ (1+|k|²)^s |f̂|² · vol)^{1/2}`.
pub fn sobolev_norm(f: &SpectralScalarField, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Parameter(format!(
            "Sobolev index must be a finite nonnegative number, got {s}"
        )));
    }
    let grid = f.grid();
    let sum: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(flat, c)| (1.0 + grid.wavenumber_squared(flat)).powf(s) * c.norm_sqr())
        .sum();
    Ok((sum * grid.volume()).sqrt())
}

/// `L^p` norm for `p ∈ {2, 4, ∞}`, evaluated on the grid.
pub fn lp_norm(f: &SpectralScalarField, p: f64) -> Result<f64> {
    let values = f.to_physical();
    let w = f.grid().cell_volume();
    if p == 2.0 {
        Ok((values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w).sqrt())
    } else if p == 4.0 {
        Ok((values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * w).powf(0.25))
    } else if p == f64::INFINITY {
        Ok(values.iter().fold(0.0, |m, v| m.max(v.norm())))
    } else {
        Err(Error::Parameter(format!("unsupported L^p exponent {p}; use 2, 4 or infinity")))
    }
}

/// Zeroes every mode outside the 2/3-rule box.
pub fn dealias(f: &SpectralScalarField) -> SpectralScalarField {
    let grid = f.grid().clone();
    let cut: Vec<usize> = (0..grid.dim()).map(|a| grid.dealias_cutoff(a)).collect();
    f.masked(|flat| grid.in_box(flat, &cut))
}

pub(crate) fn dealias_in_place(coeffs: &mut [Complex64], grid: &Grid) {
    let cut: Vec<usize> = (0..grid.dim()).map(|a| grid.dealias_cutoff(a)).collect();
    for (flat, c) in coeffs.iter_mut().enumerate() {
        if !grid.in_box(flat, &cut) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Dealiased spectral field from physical samples.
pub(crate) fn from_physical_dealiased(grid: &Arc<Grid>, mut values: Vec<Complex64>, real: bool) -> SpectralScalarField {
    if real {
        for v in values.iter_mut() {
            v.im = 0.0;
        }
    }
    grid.forward(&mut values);
    dealias_in_place(&mut values, grid);
    SpectralScalarField::from_coefficients(grid, values, real).expect("grid-sized")
}

/// Dealiased real field from real physical samples.
pub(crate) fn from_real_dealiased(grid: &Arc<Grid>, values: &[f64]) -> SpectralScalarField {
    let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    from_physical_dealiased(grid, v, true)
}

//! The coupling operator `B = ½(−i∇ − u)² + μ|ψ|²` and the source terms it feeds
//! into the continuity and momentum equations.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{SpectralScalarField, VelocityField};
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::spectral::{self, from_real_dealiased};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Physical-space samples of `ψ`, `∇ψ` and `u` shared by every product.
pub(crate) struct PhysicalFields {
    pub grid: Arc<Grid>,
    pub psi: Vec<Complex64>,
    pub grad_psi: Vec<Vec<Complex64>>,
    pub u: Vec<Vec<f64>>,
}

impl PhysicalFields {
    pub fn new(psi: &SpectralScalarField, u: &VelocityField) -> Result<Self> {
        psi.check_grid(u.component(0))?;
        Ok(PhysicalFields {
            grid: psi.grid().clone(),
            psi: psi.to_physical(),
            grad_psi: spectral::gradient(psi).iter().map(|g| g.to_physical()).collect(),
            u: u.to_real_values(),
        })
    }

    /// Samples of `iu·∇ψ + ½|u|²ψ (+ μ|ψ|²ψ)`.
    fn products(&self, mu: Option<f64>) -> Vec<Complex64> {
        let dim = self.u.len();
        (0..self.psi.len())
            .map(|x| {
                let mut adv = Complex64::new(0.0, 0.0);
                let mut u2 = 0.0;
                for a in 0..dim {
                    adv += self.grad_psi[a][x] * self.u[a][x];
                    u2 += self.u[a][x] * self.u[a][x];
                }
                let p = self.psi[x];
                let mut v = I * adv + p * (0.5 * u2);
                if let Some(mu) = mu {
                    v += p * (mu * p.norm_sqr());
                }
                v
            })
            .collect()
    }

    /// `−½Δψ + products`, restricted to the modes allowed by `keep`.
    pub fn b_masked(
        &self,
        psi: &SpectralScalarField,
        mu: Option<f64>,
        keep: impl Fn(usize) -> bool,
    ) -> SpectralScalarField {
        let grid = &self.grid;
        let mut coeffs = self.products(mu);
        grid.forward(&mut coeffs);
        for (flat, c) in coeffs.iter_mut().enumerate() {
            if keep(flat) {
                *c += psi.coeffs()[flat] * (0.5 * grid.wavenumber_squared(flat));
            } else {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        SpectralScalarField::from_coefficients(grid, coeffs, false).expect("grid-sized")
    }

    /// Raw samples of `Ψ = 2Λ Re(ψ̄ b)` and of `−2Λ Im(∇ψ̄ b) − uΨ`.
    pub fn sources(&self, b: &[Complex64], lambda: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
        let dim = self.u.len();
        let source: Vec<f64> = self
            .psi
            .iter()
            .zip(b)
            .map(|(p, bv)| 2.0 * lambda * (p.conj() * bv).re)
            .collect();
        let force = (0..dim)
            .map(|a| {
                (0..self.psi.len())
                    .map(|x| {
                        -2.0 * lambda * (self.grad_psi[a][x].conj() * b[x]).im - self.u[a][x] * source[x]
                    })
                    .collect()
            })
            .collect();
        (source, force)
    }
}

fn dealias_mask(grid: &Grid) -> impl Fn(usize) -> bool + '_ {
    let cut: Vec<usize> = (0..grid.dim()).map(|a| grid.dealias_cutoff(a)).collect();
    move |flat| grid.in_box(flat, &cut)
}

/// `Bψ = −½Δψ + iu·∇ψ + ½|u|²ψ + μ|ψ|²ψ`, products dealiased.
pub fn apply_b(psi: &SpectralScalarField, u: &VelocityField, params: &ModelParams) -> Result<SpectralScalarField> {
    let pf = PhysicalFields::new(psi, u)?;
    let grid = pf.grid.clone();
    Ok(pf.b_masked(psi, Some(params.interaction), dealias_mask(&grid)))
}

/// `B_Lψ = Bψ − μ|ψ|²ψ`, the part of `B` linear in `ψ`.
pub fn apply_bl(psi: &SpectralScalarField, u: &VelocityField, _params: &ModelParams) -> Result<SpectralScalarField> {
    let pf = PhysicalFields::new(psi, u)?;
    let grid = pf.grid.clone();
    Ok(pf.b_masked(psi, None, dealias_mask(&grid)))
}

/// `Ψ = 2Λ Re(ψ̄ Bψ)`, the mass transfer rate into the normal fluid.
pub fn coupling_source(
    psi: &SpectralScalarField,
    u: &VelocityField,
    params: &ModelParams,
) -> Result<SpectralScalarField> {
    let pf = PhysicalFields::new(psi, u)?;
    let grid = pf.grid.clone();
    let b = pf.b_masked(psi, Some(params.interaction), dealias_mask(&grid)).to_physical();
    let (source, _) = pf.sources(&b, params.coupling);
    Ok(from_real_dealiased(&grid, &source))
}

/// `F = −2Λ Im(∇ψ̄ Bψ) − 2Λu Re(ψ̄ Bψ)`, not projected.
pub fn momentum_source(
    psi: &SpectralScalarField,
    u: &VelocityField,
    params: &ModelParams,
) -> Result<Vec<SpectralScalarField>> {
    let pf = PhysicalFields::new(psi, u)?;
    let grid = pf.grid.clone();
    let b = pf.b_masked(psi, Some(params.interaction), dealias_mask(&grid)).to_physical();
    let (_, force) = pf.sources(&b, params.coupling);
    Ok(force.iter().map(|f| from_real_dealiased(&grid, f)).collect())
}

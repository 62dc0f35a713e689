//! Semi-Galerkin right-hand sides: truncated wavefunction and velocity,
//! untruncated density, and the variable-density velocity solve.

mod basis;
mod step;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::PhysicalFields;
use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, VelocityField};
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::spectral::{self, dealias_in_place};

pub use basis::{assemble_mass_matrix, DivFreeBasis};
pub use step::{picard_step, rk4_step, PicardOptions};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Mode box `|m_j| <= cutoff` onto which `ψ` and `u` are projected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GalerkinTruncation {
    pub cutoff: usize,
}

impl GalerkinTruncation {
    pub fn new(cutoff: usize) -> Self {
        GalerkinTruncation { cutoff }
    }

    /// The largest cutoff compatible with 2/3-rule dealiasing on `grid`.
    pub fn dealiased(grid: &Grid) -> Self {
        let cutoff = (0..grid.dim()).map(|a| grid.dealias_cutoff(a)).min().unwrap_or(0);
        GalerkinTruncation { cutoff }
    }

    pub fn contains(&self, grid: &Grid, flat: usize) -> bool {
        let s = grid.signed_index(flat);
        (0..grid.dim()).all(|a| s[a].unsigned_abs() as usize <= self.cutoff)
    }

    pub(crate) fn mask(&self, grid: &Grid) -> Vec<bool> {
        (0..grid.len()).map(|flat| self.contains(grid, flat)).collect()
    }

    /// `Q^N ψ`.
    pub fn project(&self, f: &SpectralScalarField) -> SpectralScalarField {
        let grid = f.grid().clone();
        f.masked(|flat| self.contains(&grid, flat))
    }

    /// `P^N u`.
    pub fn project_velocity(&self, u: &VelocityField) -> VelocityField {
        let comps = u.components().iter().map(|c| self.project(c)).collect();
        VelocityField::from_components_unchecked(comps).expect("same grid")
    }
}

/// The triplet `(ψ, u, ρ)` with its clock and dissipation integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub psi: SpectralScalarField,
    pub u: VelocityField,
    pub rho: SpectralScalarField,
    pub t: f64,
    /// `∫₀ᵗ ν‖∇u‖² dτ`.
    pub viscous_dissipation: f64,
    /// `∫₀ᵗ 2Λ‖Bψ‖² dτ`.
    pub coupling_dissipation: f64,
}

impl SimState {
    /// Checks that the three fields share a grid and have the expected reality flags.
    pub fn new(psi: SpectralScalarField, u: VelocityField, rho: SpectralScalarField) -> Result<Self> {
        psi.check_grid(&rho)?;
        psi.check_grid(u.component(0))?;
        if !rho.is_real() {
            return Err(Error::Dimension("density must be a real field".into()));
        }
        Ok(SimState {
            psi,
            u,
            rho,
            t: 0.0,
            viscous_dissipation: 0.0,
            coupling_dissipation: 0.0,
        })
    }

    /// The all-zero wavefunction and velocity with constant density.
    pub fn quiescent(grid: &Arc<Grid>, density: f64) -> Self {
        SimState {
            psi: SpectralScalarField::zeros(grid, false),
            u: VelocityField::zeros(grid),
            rho: SpectralScalarField::from_real_fn(grid, |_| density),
            t: 0.0,
            viscous_dissipation: 0.0,
            coupling_dissipation: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.psi.grid()
    }

    /// Grid minimum of the physical density.
    pub fn min_density(&self) -> f64 {
        self.rho.to_real_values().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_density(&self) -> f64 {
        self.rho.to_real_values().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

}

fn check_floor_values(rho: &[f64], floor: f64) -> Result<()> {
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    if min < floor || min.is_nan() {
        Err(Error::DensityFloor { min, floor })
    } else {
        Ok(())
    }
}

/// `ψ`, `u`, `ρ` with every coefficient outside the cutoff removed from `ψ` and `u`.
pub fn truncate_state(s: &SimState, trunc: &GalerkinTruncation) -> SimState {
    SimState {
        psi: trunc.project(&s.psi),
        u: trunc.project_velocity(&s.u),
        ..s.clone()
    }
}

/// Time derivatives of the truncated system and the instantaneous dissipation rates.
#[derive(Clone, Debug)]
pub(crate) struct Rates {
    pub psi: Vec<Complex64>,
    pub u: Vec<Vec<Complex64>>,
    pub rho: Vec<Complex64>,
    /// `ν‖∇u‖²`.
    pub viscous: f64,
    /// `2Λ‖Bψ‖²`.
    pub coupling: f64,
}

/// Every intermediate of one right-hand-side evaluation.
pub(crate) struct Evaluation {
    pub b: SpectralScalarField,
    pub rho_dot: Vec<Complex64>,
    pub psi_dot: Vec<Complex64>,
    pub force_field: Vec<Vec<Complex64>>,
    pub rho_phys: Vec<f64>,
    pub viscous: f64,
}

/// Grid-function part of the evaluation shared by the public wrappers and the steppers.
pub(crate) fn evaluate(
    psi: &SpectralScalarField,
    u: &VelocityField,
    rho: &SpectralScalarField,
    keep: &[bool],
    params: &ModelParams,
) -> Result<Evaluation> {
    psi.check_grid(rho)?;
    let pf = PhysicalFields::new(psi, u)?;
    let grid = pf.grid.clone();
    let n = grid.len();
    let dim = grid.dim();
    let lambda = params.coupling;
    let mu = params.interaction;

    // products of B: the cubic part separately so that Hψ is available
    let mut cubic = Vec::with_capacity(n);
    let mut linear = Vec::with_capacity(n);
    for x in 0..n {
        let p = pf.psi[x];
        cubic.push(p * (mu * p.norm_sqr()));
        let mut adv = ZERO;
        let mut u2 = 0.0;
        for a in 0..dim {
            adv += pf.grad_psi[a][x] * pf.u[a][x];
            u2 += pf.u[a][x] * pf.u[a][x];
        }
        linear.push(I * adv + p * (0.5 * u2));
    }
    grid.forward(&mut cubic);
    grid.forward(&mut linear);

    let mut b = vec![ZERO; n];
    let mut psi_dot = vec![ZERO; n];
    for flat in 0..n {
        if !keep[flat] {
            continue;
        }
        let h = psi.coeffs()[flat] * (0.5 * grid.wavenumber_squared(flat)) + cubic[flat];
        b[flat] = h + linear[flat];
        psi_dot[flat] = -I * h - b[flat] * lambda;
    }
    let b = SpectralScalarField::from_coefficients(&grid, b, false)?;
    let b_phys = b.to_physical();
    let (source, force) = pf.sources(&b_phys, lambda);

    // density: skew-symmetric advection, D(−½[∇·(ρu) + u·∇ρ] + Ψ)
    let rho_phys = rho.to_real_values();
    let grad_rho: Vec<Vec<f64>> = spectral::gradient(rho).iter().map(|g| g.to_real_values()).collect();
    let mut div_rho_u = vec![ZERO; n];
    for a in 0..dim {
        let mut c: Vec<Complex64> = (0..n).map(|x| Complex64::new(rho_phys[x] * pf.u[a][x], 0.0)).collect();
        grid.forward(&mut c);
        for flat in 0..n {
            div_rho_u[flat] += I * grid.derivative_wavevector(flat)[a] * c[flat];
        }
    }
    grid.inverse(&mut div_rho_u);
    let mut rho_dot: Vec<Complex64> = (0..n)
        .map(|x| {
            let mut adv = 0.0;
            for a in 0..dim {
                adv += pf.u[a][x] * grad_rho[a][x];
            }
            Complex64::new(-0.5 * (div_rho_u[x].re + adv) + source[x], 0.0)
        })
        .collect();
    grid.forward(&mut rho_dot);
    dealias_in_place(&mut rho_dot, &grid);
    let mut rho_dot_phys = rho_dot.clone();
    grid.inverse(&mut rho_dot_phys);

    // momentum: −½ρu·∇u − ½∇·(ρu⊗u) − ½u(ρ̇ − Ψ) + F, then νΔu in spectral space
    let grad_u: Vec<Vec<Vec<f64>>> = u
        .components()
        .iter()
        .map(|c| spectral::gradient(c).iter().map(|g| g.to_real_values()).collect())
        .collect();
    let mut force_field = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut div_flux = vec![ZERO; n];
        for j in 0..dim {
            let mut flux: Vec<Complex64> = (0..n)
                .map(|x| Complex64::new(rho_phys[x] * pf.u[i][x] * pf.u[j][x], 0.0))
                .collect();
            grid.forward(&mut flux);
            for flat in 0..n {
                div_flux[flat] += I * grid.derivative_wavevector(flat)[j] * flux[flat];
            }
        }
        grid.inverse(&mut div_flux);
        let mut g: Vec<Complex64> = (0..n)
            .map(|x| {
                let mut adv = 0.0;
                for j in 0..dim {
                    adv += pf.u[j][x] * grad_u[i][j][x];
                }
                let s = -0.5 * rho_phys[x] * adv - 0.5 * div_flux[x].re;
                let a = s - 0.5 * pf.u[i][x] * (rho_dot_phys[x].re - source[x]);
                Complex64::new(a + force[i][x], 0.0)
            })
            .collect();
        grid.forward(&mut g);
        let ui = u.component(i).coeffs();
        for flat in 0..n {
            g[flat] -= ui[flat] * (params.viscosity * grid.wavenumber_squared(flat));
        }
        force_field.push(g);
    }

    let viscous = params.viscosity * gradient_norm_sqr(u);
    Ok(Evaluation {
        b,
        rho_dot,
        psi_dot,
        force_field,
        rho_phys,
        viscous,
    })
}

/// `‖∇u‖²` over all components.
pub(crate) fn gradient_norm_sqr(u: &VelocityField) -> f64 {
    let grid = u.grid();
    let mut sum = 0.0;
    for c in u.components() {
        for (flat, v) in c.coeffs().iter().enumerate() {
            let k = grid.derivative_wavevector(flat);
            let k2: f64 = k.iter().map(|x| x * x).sum();
            sum += k2 * v.norm_sqr();
        }
    }
    sum * grid.volume()
}

/// Full right-hand side at a state.
pub(crate) fn rates(
    psi: &SpectralScalarField,
    u: &VelocityField,
    rho: &SpectralScalarField,
    keep: &[bool],
    params: &ModelParams,
) -> Result<Rates> {
    let ev = evaluate(psi, u, rho, keep, params)?;
    check_floor_values(&ev.rho_phys, params.density_floor)?;
    let grid = psi.grid();
    let u_dot = solve_mass(grid, &ev.rho_phys, &ev.force_field, keep)?;
    let coupling = 2.0 * params.coupling * ev.b.norm_sqr();
    Ok(Rates {
        psi: ev.psi_dot,
        u: u_dot,
        rho: ev.rho_dot,
        viscous: ev.viscous,
        coupling,
    })
}

/// Cutoff truncation followed by the Leray projection, in place.
pub(crate) fn project_div_free(grid: &Grid, v: &mut [Vec<Complex64>], keep: &[bool]) {
    let dim = grid.dim();
    for flat in 0..grid.len() {
        if !keep[flat] {
            for c in v.iter_mut() {
                c[flat] = ZERO;
            }
            continue;
        }
        let k = grid.derivative_wavevector(flat);
        let k2: f64 = k[..dim].iter().map(|x| x * x).sum();
        if k2 == 0.0 {
            continue;
        }
        let mut dot = ZERO;
        for a in 0..dim {
            dot += v[a][flat] * k[a];
        }
        let dot = dot / k2;
        for a in 0..dim {
            v[a][flat] -= dot * k[a];
        }
    }
}

fn hermitian_part(grid: &Grid, c: &mut [Complex64]) {
    for flat in 0..grid.len() {
        let j = grid.conjugate_index(flat);
        if j == flat {
            c[flat].im = 0.0;
        } else if j > flat {
            let avg = (c[flat] + c[j].conj()) * 0.5;
            c[flat] = avg;
            c[j] = avg.conj();
        }
    }
}

fn vinner(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p.conj() * q).re).sum::<f64>())
        .sum()
}

fn weighted(grid: &Grid, v: &[Vec<Complex64>], w: &[f64], keep: &[bool], divide: bool) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = v
        .iter()
        .map(|c| {
            let mut p = c.clone();
            grid.inverse(&mut p);
            for (x, val) in p.iter_mut().enumerate() {
                let r = if divide { val.re / w[x] } else { val.re * w[x] };
                *val = Complex64::new(r, 0.0);
            }
            grid.forward(&mut p);
            p
        })
        .collect();
    project_div_free(grid, &mut out, keep);
    out
}

/// Solves `Π(ρ u̇) = Π(g)` for divergence-free `u̇` inside the cutoff, where `Π`
/// is the cutoff-plus-Leray projection. Preconditioned conjugate gradients with
/// `Π(r/ρ)` as preconditioner.
pub(crate) fn solve_mass(
    grid: &Arc<Grid>,
    rho: &[f64],
    g: &[Vec<Complex64>],
    keep: &[bool],
) -> Result<Vec<Vec<Complex64>>> {
    const RTOL: f64 = 1e-14;
    const ACCEPT: f64 = 1e-10;
    const MAX_ITER: usize = 500;

    let mut rhs = g.to_vec();
    // when g is nearly a gradient, one pass leaves a divergent part at the rounding
    // level of g, which can be large next to the solenoidal part; a second pass removes it
    project_div_free(grid, &mut rhs, keep);
    project_div_free(grid, &mut rhs, keep);
    // the operator only sees the real part of a field; drop the rounding-level imaginary part
    for c in rhs.iter_mut() {
        hermitian_part(grid, c);
    }
    let dim = rhs.len();
    let mut x: Vec<Vec<Complex64>> = vec![vec![ZERO; grid.len()]; dim];
    let bnorm = vinner(&rhs, &rhs).sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs;
    let mut z = weighted(grid, &r, rho, keep, true);
    let mut p = z.clone();
    let mut rz = vinner(&r, &z);
    let mut best = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let ap = weighted(grid, &p, rho, keep, false);
        let pap = vinner(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolve(format!(
                "mass operator is not positive definite (pᵀRp = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        for a in 0..dim {
            for i in 0..grid.len() {
                x[a][i] += p[a][i] * alpha;
                r[a][i] -= ap[a][i] * alpha;
            }
        }
        let rnorm = vinner(&r, &r).sqrt() / bnorm;
        best = best.min(rnorm);
        if rnorm <= RTOL {
            return Ok(x);
        }
        z = weighted(grid, &r, rho, keep, true);
        let rz_new = vinner(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for a in 0..dim {
            for i in 0..grid.len() {
                p[a][i] = z[a][i] + p[a][i] * beta;
            }
        }
    }
    if best <= ACCEPT {
        Ok(x)
    } else {
        Err(Error::LinearSolve(format!(
            "conjugate gradients stalled at relative residual {best:e}"
        )))
    }
}

fn to_velocity(grid: &Arc<Grid>, v: Vec<Vec<Complex64>>) -> Result<VelocityField> {
    let comps = v
        .into_iter()
        .map(|c| SpectralScalarField::from_coefficients(grid, c, true))
        .collect::<Result<Vec<_>>>()?;
    VelocityField::from_components_unchecked(comps)
}

/// `Ψ = 2Λ Re(ψ̄ Q^N Bψ)`, dealiased: the mass source seen by the truncated density equation.
pub fn truncated_coupling_source(
    psi: &SpectralScalarField,
    u: &VelocityField,
    trunc: &GalerkinTruncation,
    params: &ModelParams,
) -> Result<SpectralScalarField> {
    let pf = PhysicalFields::new(psi, u)?;
    let grid = pf.grid.clone();
    let b = pf
        .b_masked(psi, Some(params.interaction), |flat| trunc.contains(&grid, flat))
        .to_physical();
    let (source, _) = pf.sources(&b, params.coupling);
    Ok(spectral::from_real_dealiased(&grid, &source))
}

/// `∂ψ/∂t = −(1/2i)Δψ + (μ/i)|ψ|²ψ − ΛBψ`, re-truncated to the cutoff.
pub fn nls_rhs(
    psi: &SpectralScalarField,
    u: &VelocityField,
    trunc: &GalerkinTruncation,
    params: &ModelParams,
) -> Result<SpectralScalarField> {
    let pf = PhysicalFields::new(psi, u)?;
    let grid = pf.grid.clone();
    let keep = trunc.mask(&grid);
    let rho = SpectralScalarField::zeros(&grid, true);
    let ev = evaluate(psi, u, &rho, &keep, params)?;
    SpectralScalarField::from_coefficients(&grid, ev.psi_dot, false)
}

/// `∂ρ/∂t = −u·∇ρ + Ψ`, with the advection written in skew-symmetric form and dealiased.
pub fn continuity_rhs(s: &SimState, params: &ModelParams) -> Result<SpectralScalarField> {
    let grid = s.grid().clone();
    let keep = GalerkinTruncation::dealiased(&grid).mask(&grid);
    let ev = evaluate(&s.psi, &s.u, &s.rho, &keep, params)?;
    let mut rho_dot = ev.rho_dot;
    // the transform of real data is Hermitian up to rounding; keep it exact
    hermitian_part(&grid, &mut rho_dot);
    SpectralScalarField::from_coefficients(&grid, rho_dot, true)
}

/// Galerkin velocity tendency `u̇ ∈ V_N` solving `R ċ = G`, where
/// `G_j = −ν⟨∇a_j, ∇u⟩ − ⟨a_j, ρu·∇u⟩ + ⟨a_j, F⟩`.
pub fn nse_coeff_rhs(s: &SimState, trunc: &GalerkinTruncation, params: &ModelParams) -> Result<VelocityField> {
    let grid = s.grid().clone();
    let keep = trunc.mask(&grid);
    let ev = evaluate(&s.psi, &s.u, &s.rho, &keep, params)?;
    check_floor_values(&ev.rho_phys, params.density_floor)?;
    let u_dot = solve_mass(&grid, &ev.rho_phys, &ev.force_field, &keep)?;
    to_velocity(&grid, u_dot)
}

/// Instantaneous energy budget of the truncated system: `dE/dt` computed from
/// the right-hand sides, and the dissipation `ν‖∇u‖² + 2Λ‖Bψ‖²` it should cancel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBudget {
    pub energy_rate: f64,
    pub dissipation: f64,
}

/// Contracts the right-hand sides against the energy variations.
pub fn energy_budget(s: &SimState, trunc: &GalerkinTruncation, params: &ModelParams) -> Result<EnergyBudget> {
    let grid = s.grid().clone();
    let keep = trunc.mask(&grid);
    let r = rates(&s.psi, &s.u, &s.rho, &keep, params)?;
    let n = grid.len();
    let w = grid.cell_volume();

    // ψ part: 2 Re⟨−½Δψ + μ|ψ|²ψ, ψ̇⟩ on the grid
    let psi_phys = s.psi.to_physical();
    let mut h: Vec<Complex64> = psi_phys
        .iter()
        .map(|p| p * (params.interaction * p.norm_sqr()))
        .collect();
    grid.forward(&mut h);
    for flat in 0..n {
        h[flat] += s.psi.coeffs()[flat] * (0.5 * grid.wavenumber_squared(flat));
    }
    let psi_part: f64 = 2.0 * h.iter().zip(&r.psi).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * grid.volume();

    // kinetic part: Σ ρ u·u̇ + ½ Σ |u|² ρ̇
    let u_phys = s.u.to_real_values();
    let rho_phys = s.rho.to_real_values();
    let mut rho_dot = r.rho.clone();
    grid.inverse(&mut rho_dot);
    let mut kin = 0.0;
    for a in 0..grid.dim() {
        let mut ud = r.u[a].clone();
        grid.inverse(&mut ud);
        for x in 0..n {
            kin += rho_phys[x] * u_phys[a][x] * ud[x].re + 0.5 * u_phys[a][x] * u_phys[a][x] * rho_dot[x].re;
        }
    }
    Ok(EnergyBudget {
        energy_rate: psi_part + kin * w,
        dissipation: r.viscous + r.coupling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(lambda: f64, mu: f64, nu: f64) -> ModelParams {
        ModelParams {
            coupling: lambda,
            interaction: mu,
            viscosity: nu,
            density_min: 0.5,
            density_max: 2.0,
            density_floor: 0.1,
        }
    }

    fn plane(g: &Arc<Grid>, amp: f64, k: [f64; 2]) -> SpectralScalarField {
        SpectralScalarField::from_fn(g, false, |x| Complex64::new(0.0, k[0] * x[0] + k[1] * x[1]).exp() * amp)
    }

    #[test]
    fn truncation_examples() {
        let g = Grid::periodic(&[16]).unwrap();
        let e1 = SpectralScalarField::from_fn(&g, false, |x| Complex64::new(0.0, x[0]).exp());
        let e5 = SpectralScalarField::from_fn(&g, false, |x| Complex64::new(0.0, 5.0 * x[0]).exp());
        let sum = SpectralScalarField::lincomb(1.0, &e1, 1.0, &e5);
        let t = GalerkinTruncation::new(2);
        let p = t.project(&sum);
        assert!(SpectralScalarField::lincomb(1.0, &p, -1.0, &e1).max_abs_coeff() < 1e-15);
        let tail = SpectralScalarField::lincomb(1.0, &sum, -1.0, &p);
        // ‖e^{5ix}‖_{H¹}² = (1 + 25) · 2π
        let want = (26.0 * 2.0 * PI).sqrt();
        assert!((spectral::sobolev_norm(&tail, 1.0).unwrap() - want).abs() < 1e-12);
        let all = GalerkinTruncation::new(8);
        assert_eq!(all.project(&sum), sum);
        assert_eq!(t.project(&p), p);
    }

    #[test]
    fn plane_wave_nls_rhs() {
        let g = Grid::periodic(&[16, 16]).unwrap();
        let trunc = GalerkinTruncation::dealiased(&g);
        let u = VelocityField::zeros(&g);
        let psi = plane(&g, 0.7, [1.0, 2.0]);
        let r = nls_rhs(&psi, &u, &trunc, &params(0.0, 1.3, 0.1)).unwrap();
        let omega = 2.5 + 1.3 * 0.49;
        let mut want = psi.clone();
        want.scale_complex(Complex64::new(0.0, -omega));
        assert!(SpectralScalarField::lincomb(1.0, &r, -1.0, &want).max_abs_coeff() < 1e-13);

        let psi = plane(&g, 1.0, [1.0, 0.0]);
        let r = nls_rhs(&psi, &u, &trunc, &params(1.0, 1.0, 0.1)).unwrap();
        let mut want = psi.clone();
        want.scale_complex(Complex64::new(-1.5, -1.5));
        assert!(SpectralScalarField::lincomb(1.0, &r, -1.0, &want).max_abs_coeff() < 1e-13);

        let z = SpectralScalarField::zeros(&g, false);
        assert_eq!(nls_rhs(&z, &u, &trunc, &params(1.0, 1.0, 0.1)).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn shear_mode_decays_like_stokes() {
        let g = Grid::periodic(&[16, 16]).unwrap();
        let trunc = GalerkinTruncation::dealiased(&g);
        let ux = SpectralScalarField::from_real_fn(&g, |x| 0.8 * (3.0 * x[1]).sin());
        let u = VelocityField::new(vec![ux.clone(), SpectralScalarField::zeros(&g, true)]).unwrap();
        let s = SimState::new(SpectralScalarField::zeros(&g, false), u, SpectralScalarField::from_real_fn(&g, |_| 1.0))
            .unwrap();
        let nu = 0.05;
        let ud = nse_coeff_rhs(&s, &trunc, &params(0.0, 1.0, nu)).unwrap();
        let want = ux.scaled(-nu * 9.0);
        assert!(SpectralScalarField::lincomb(1.0, ud.component(0), -1.0, &want).max_abs_coeff() < 1e-13);
        assert!(ud.component(1).max_abs_coeff() < 1e-13);
    }

    #[test]
    fn taylor_green_tendency_is_viscous_only() {
        let g = Grid::periodic(&[16, 16]).unwrap();
        let trunc = GalerkinTruncation::dealiased(&g);
        let ux = SpectralScalarField::from_real_fn(&g, |x| x[0].sin() * x[1].cos());
        let uy = SpectralScalarField::from_real_fn(&g, |x| -x[0].cos() * x[1].sin());
        let u = VelocityField::new(vec![ux, uy]).unwrap();
        let s = SimState::new(SpectralScalarField::zeros(&g, false), u.clone(), SpectralScalarField::from_real_fn(&g, |_| 1.0))
            .unwrap();
        let nu = 0.1;
        let ud = nse_coeff_rhs(&s, &trunc, &params(0.0, 1.0, nu)).unwrap();
        for a in 0..2 {
            let want = u.component(a).scaled(-2.0 * nu);
            assert!(SpectralScalarField::lincomb(1.0, ud.component(a), -1.0, &want).max_abs_coeff() < 1e-13);
        }
    }

    #[test]
    fn continuity_rhs_vanishes_without_flow_or_coupling() {
        let g = Grid::periodic(&[16, 16]).unwrap();
        let mut s = SimState::quiescent(&g, 1.0);
        s.rho = SpectralScalarField::from_real_fn(&g, |x| 1.0 + 0.2 * x[0].sin());
        s.psi = plane(&g, 1.0, [1.0, 0.0]);
        let r = continuity_rhs(&s, &params(0.0, 1.0, 0.1)).unwrap();
        assert!(r.max_abs_coeff() < 1e-15);
    }

    #[test]
    fn zero_velocity_real_wavefunction_has_no_velocity_tendency() {
        let g = Grid::periodic(&[16, 16]).unwrap();
        let trunc = GalerkinTruncation::dealiased(&g);
        let mut s = SimState::quiescent(&g, 1.0);
        s.psi = SpectralScalarField::from_fn(&g, false, |x| Complex64::new(0.5 + 0.2 * x[0].cos(), 0.0));
        let ud = nse_coeff_rhs(&s, &trunc, &params(1.0, 1.0, 0.1)).unwrap();
        assert!(ud.norm_sqr() < 1e-28);
    }

    #[test]
    fn density_floor_violation_is_reported() {
        let g = Grid::periodic(&[8, 8]).unwrap();
        let trunc = GalerkinTruncation::dealiased(&g);
        let s = SimState::quiescent(&g, 0.05);
        assert!(matches!(
            nse_coeff_rhs(&s, &trunc, &params(1.0, 1.0, 0.1)),
            Err(Error::DensityFloor { .. })
        ));
    }
}

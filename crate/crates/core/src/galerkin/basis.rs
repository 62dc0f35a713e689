use std::f64::consts::SQRT_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{check_floor_values, GalerkinTruncation};
use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, VelocityField};
use crate::grid::Grid;
use crate::params::ModelParams;

#[derive(Clone, Copy, Debug)]
enum Parity {
    Constant,
    Cos,
    Sin,
}

#[derive(Clone, Debug)]
struct BasisFunction {
    flat: usize,
    polarization: [f64; 3],
    parity: Parity,
}

/// Real orthonormal divergence-free basis of `V_N`: constants `e_j/√|Ω|` and
/// `√2 cos(k·x) e/√|Ω|`, `√2 sin(k·x) e/√|Ω|` for one representative `k` of
/// each pair `±k` and polarizations `e ⊥ k`.
#[derive(Clone, Debug)]
pub struct DivFreeBasis {
    grid: Arc<Grid>,
    functions: Vec<BasisFunction>,
}

fn is_representative(s: &[i64; 3], dim: usize) -> bool {
    for &m in &s[..dim] {
        if m != 0 {
            return m > 0;
        }
    }
    false
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn polarizations(k: [f64; 3], dim: usize) -> Vec<[f64; 3]> {
    match dim {
        1 => vec![],
        2 => vec![normalize([-k[1], k[0], 0.0])],
        _ => {
            let kn = normalize(k);
            let mut axis = 0;
            for a in 1..3 {
                if kn[a].abs() < kn[axis].abs() {
                    axis = a;
                }
            }
            let mut e = [0.0; 3];
            e[axis] = 1.0;
            let e1 = normalize(cross(kn, e));
            let e2 = cross(kn, e1);
            vec![e1, e2]
        }
    }
}

impl DivFreeBasis {
    pub fn new(grid: &Arc<Grid>, trunc: &GalerkinTruncation) -> Self {
        let dim = grid.dim();
        let mut functions = Vec::new();
        for a in 0..dim {
            let mut e = [0.0; 3];
            e[a] = 1.0;
            functions.push(BasisFunction {
                flat: 0,
                polarization: e,
                parity: Parity::Constant,
            });
        }
        for flat in 0..grid.len() {
            let s = grid.signed_index(flat);
            let below_nyquist = (0..dim).all(|a| s[a].unsigned_abs() < grid.shape()[a] as u64 / 2);
            if !trunc.contains(grid, flat) || !below_nyquist || !is_representative(&s, dim) {
                continue;
            }
            for e in polarizations(grid.wavevector(flat), dim) {
                for parity in [Parity::Cos, Parity::Sin] {
                    functions.push(BasisFunction {
                        flat,
                        polarization: e,
                        parity,
                    });
                }
            }
        }
        DivFreeBasis {
            grid: grid.clone(),
            functions,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Grid samples of basis function `j`, component by component.
    pub fn sample(&self, j: usize) -> Vec<Vec<f64>> {
        let f = &self.functions[j];
        let grid = &self.grid;
        let dim = grid.dim();
        let scale = 1.0 / grid.volume().sqrt();
        let k = grid.wavevector(f.flat);
        let values: Vec<f64> = (0..grid.len())
            .map(|x| {
                let p = grid.point(x);
                let phase: f64 = (0..dim).map(|a| k[a] * p[a]).sum();
                match f.parity {
                    Parity::Constant => scale,
                    Parity::Cos => SQRT_2 * scale * phase.cos(),
                    Parity::Sin => SQRT_2 * scale * phase.sin(),
                }
            })
            .collect();
        (0..dim)
            .map(|a| values.iter().map(|v| v * f.polarization[a]).collect())
            .collect()
    }

    /// Coefficients `c_j = ⟨a_j, u⟩` of a field in the span of the basis.
    pub fn coefficients(&self, u: &VelocityField) -> DVector<f64> {
        let grid = &self.grid;
        let sv = grid.volume().sqrt();
        DVector::from_iterator(
            self.len(),
            self.functions.iter().map(|f| {
                let mut dot = Complex64::new(0.0, 0.0);
                for (a, c) in u.components().iter().enumerate() {
                    dot += c.coeffs()[f.flat] * f.polarization[a];
                }
                match f.parity {
                    Parity::Constant => dot.re * sv,
                    // ⟨√2 cos(k·x)/√|Ω|, û e^{ik·x} + conj⟩ = √2 √|Ω| Re û
                    Parity::Cos => SQRT_2 * sv * dot.re,
                    Parity::Sin => -SQRT_2 * sv * dot.im,
                }
            }),
        )
    }

    /// The field `Σ c_j a_j`.
    pub fn synthesize(&self, c: &DVector<f64>) -> VelocityField {
        let grid = &self.grid;
        let dim = grid.dim();
        let sv = grid.volume().sqrt();
        let mut comps = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; dim];
        for (f, &cj) in self.functions.iter().zip(c.iter()) {
            let conj = grid.conjugate_index(f.flat);
            for a in 0..dim {
                let e = f.polarization[a] * cj;
                match f.parity {
                    Parity::Constant => comps[a][0] += Complex64::new(e / sv, 0.0),
                    Parity::Cos => {
                        let v = Complex64::new(e / (SQRT_2 * sv), 0.0);
                        comps[a][f.flat] += v;
                        comps[a][conj] += v;
                    }
                    Parity::Sin => {
                        let v = Complex64::new(0.0, -e / (SQRT_2 * sv));
                        comps[a][f.flat] += v;
                        comps[a][conj] += v.conj();
                    }
                }
            }
        }
        let fields = comps
            .into_iter()
            .map(|c| SpectralScalarField::from_coefficients(grid, c, true).expect("grid-sized"))
            .collect();
        VelocityField::from_components_unchecked(fields).expect("same grid")
    }
}

/// `R_jk = ∫ ρ a_j·a_k` by grid quadrature against the orthonormal divergence-free basis.
pub fn assemble_mass_matrix(
    rho: &SpectralScalarField,
    trunc: &GalerkinTruncation,
    params: &ModelParams,
) -> Result<DMatrix<f64>> {
    if !rho.is_real() {
        return Err(Error::Dimension("density must be a real field".into()));
    }
    let rho_phys = rho.to_real_values();
    check_floor_values(&rho_phys, params.density_floor)?;
    let grid = rho.grid();
    let basis = DivFreeBasis::new(grid, trunc);
    let n = basis.len();
    let dim = grid.dim();
    let npts = grid.len();
    let w = grid.cell_volume();
    // rows: basis functions, columns: (component, point)
    let mut a = DMatrix::<f64>::zeros(n, dim * npts);
    let mut aw = DMatrix::<f64>::zeros(n, dim * npts);
    for j in 0..n {
        let s = basis.sample(j);
        for c in 0..dim {
            for x in 0..npts {
                a[(j, c * npts + x)] = s[c][x];
                aw[(j, c * npts + x)] = s[c][x] * rho_phys[x] * w;
            }
        }
    }
    let r = &aw * a.transpose();
    Ok((&r + r.transpose()) * 0.5)
}

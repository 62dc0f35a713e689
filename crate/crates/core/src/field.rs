//! Scalar and vector fields stored as Fourier coefficients.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A scalar field on a periodic grid held as Fourier mode amplitudes.
///
/// `real` marks fields whose physical values are real; their coefficients are
/// Hermitian (`f(-k) = conj f(k)`) and conversions to physical space drop the
/// rounding-level imaginary part.
#[derive(Clone, Debug)]
pub struct SpectralScalarField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl PartialEq for SpectralScalarField {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.real == other.real && self.coeffs == other.coeffs
    }
}

impl SpectralScalarField {
    pub fn zeros(grid: &Arc<Grid>, real: bool) -> Self {
        SpectralScalarField {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
            real,
        }
    }

    pub fn from_coefficients(grid: &Arc<Grid>, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralScalarField {
            grid: grid.clone(),
            coeffs,
            real,
        })
    }

    /// Transforms physical samples to spectral space.
    pub fn from_physical(grid: &Arc<Grid>, values: &[Complex64], real: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "physical array has {} samples but the grid has {}",
                values.len(),
                grid.len()
            )));
        }
        let mut coeffs: Vec<Complex64> = if real {
            values.iter().map(|v| Complex64::new(v.re, 0.0)).collect()
        } else {
            values.to_vec()
        };
        grid.forward(&mut coeffs);
        Ok(SpectralScalarField {
            grid: grid.clone(),
            coeffs,
            real,
        })
    }

    /// Transforms real physical samples to spectral space.
    pub fn from_real_values(grid: &Arc<Grid>, values: &[f64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "physical array has {} samples but the grid has {}",
                values.len(),
                grid.len()
            )));
        }
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.forward(&mut coeffs);
        Ok(SpectralScalarField {
            grid: grid.clone(),
            coeffs,
            real: true,
        })
    }

    /// Samples a function of position on the grid.
    pub fn from_fn(grid: &Arc<Grid>, real: bool, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let values: Vec<Complex64> = (0..grid.len())
            .map(|flat| f(&grid.point(flat)[..dim]))
            .collect();
        SpectralScalarField::from_physical(grid, &values, real).expect("sizes agree")
    }

    /// Samples a real function of position on the grid.
    pub fn from_real_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values: Vec<f64> = (0..grid.len()).map(|flat| f(&grid.point(flat)[..dim])).collect();
        SpectralScalarField::from_real_values(grid, &values).expect("sizes agree")
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Physical-space samples.
    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut values = self.coeffs.clone();
        self.grid.inverse(&mut values);
        if self.real {
            for v in values.iter_mut() {
                v.im = 0.0;
            }
        }
        values
    }

    /// Real parts of the physical-space samples.
    pub fn to_real_values(&self) -> Vec<f64> {
        let mut values = self.coeffs.clone();
        self.grid.inverse(&mut values);
        values.into_iter().map(|v| v.re).collect()
    }

    /// Coefficient of the mode with the given signed mode numbers (zero if off-grid).
    pub fn mode(&self, signed: &[i64]) -> Complex64 {
        self.grid
            .flat_index(signed)
            .map(|flat| self.coeffs[flat])
            .unwrap_or(ZERO)
    }

    pub fn same_grid(&self, other: &SpectralScalarField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_grid(&self, other: &SpectralScalarField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "fields live on different grids ({:?} vs {:?})",
                self.grid, other.grid
            )))
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= a;
        }
    }

    pub fn scale_complex(&mut self, a: Complex64) {
        for c in self.coeffs.iter_mut() {
            *c *= a;
        }
        if a.im != 0.0 {
            self.real = false;
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralScalarField) {
        debug_assert!(self.same_grid(other));
        for (c, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *c += o * a;
        }
    }

    /// `a * x + b * y` on matching grids.
    pub fn lincomb(a: f64, x: &SpectralScalarField, b: f64, y: &SpectralScalarField) -> Self {
        debug_assert!(x.same_grid(y));
        let coeffs = x
            .coeffs
            .iter()
            .zip(&y.coeffs)
            .map(|(p, q)| p * a + q * b)
            .collect();
        SpectralScalarField {
            grid: x.grid.clone(),
            coeffs,
            real: x.real && y.real,
        }
    }

    /// `⟨self, other⟩ = ∫ conj(self) other`, evaluated by grid quadrature.
    pub fn inner(&self, other: &SpectralScalarField) -> Complex64 {
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.grid.volume()
    }

    /// `‖f‖²_{L²}` from the coefficients.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.volume()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest relative violation of `f(-k) = conj f(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for flat in 0..self.coeffs.len() {
            let c = self.grid.conjugate_index(flat);
            worst = worst.max((self.coeffs[flat] - self.coeffs[c].conj()).norm());
        }
        worst / scale
    }

    /// Keeps only modes satisfying `keep`.
    pub fn masked(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = self.clone();
        for (flat, c) in out.coeffs.iter_mut().enumerate() {
            if !keep(flat) {
                *c = ZERO;
            }
        }
        out
    }

    /// Keeps the box `|m_j| <= cutoff` along every axis.
    pub fn box_truncated(&self, cutoff: usize) -> Self {
        let cut = vec![cutoff; self.grid.dim()];
        let grid = self.grid.clone();
        self.masked(|flat| grid.in_box(flat, &cut))
    }

    /// Evaluates the trigonometric interpolant at an arbitrary point.
    pub fn evaluate_at(&self, x: &[f64]) -> Complex64 {
        PointEvaluator::new(self).eval(x)
    }
}

/// Exact evaluation of Fourier series at off-grid points.
///
/// Several fields on one grid can share an evaluator; the per-axis phase
/// tables are then built once per point. The Nyquist mode is evaluated as a
/// cosine, which matches the grid samples and keeps interpolants of real
/// fields real.
#[derive(Clone, Debug)]
pub struct PointEvaluator {
    dim: usize,
    lengths: [f64; 3],
    shape: [usize; 3],
    // table offsets of each retained mode, one per axis
    modes: Vec<[usize; 3]>,
    // coefficients, mode-major: modes.len() x fields
    coeffs: Vec<Complex64>,
    real: Vec<bool>,
}

impl PointEvaluator {
    pub fn new(field: &SpectralScalarField) -> Self {
        PointEvaluator::for_fields(&[field])
    }

    /// One evaluator for several fields on the same grid.
    pub fn for_fields(fields: &[&SpectralScalarField]) -> Self {
        let grid = fields[0].grid();
        let dim = grid.dim();
        let mut lengths = [1.0; 3];
        let mut shape = [1usize; 3];
        lengths[..dim].copy_from_slice(&grid.lengths()[..dim]);
        shape[..dim].copy_from_slice(&grid.shape()[..dim]);
        let nf = fields.len();
        let mut modes = Vec::new();
        let mut coeffs = Vec::new();
        for flat in 0..grid.len() {
            if fields.iter().all(|f| f.coeffs()[flat] == ZERO) {
                continue;
            }
            let s = grid.signed_index(flat);
            let mut idx = [0usize; 3];
            for axis in 0..dim {
                idx[axis] = (s[axis] + shape[axis] as i64 / 2 - 1) as usize;
            }
            modes.push(idx);
            coeffs.extend(fields.iter().map(|f| f.coeffs()[flat]));
        }
        debug_assert_eq!(coeffs.len(), modes.len() * nf);
        PointEvaluator {
            dim,
            lengths,
            shape,
            modes,
            coeffs,
            real: fields.iter().map(|f| f.is_real()).collect(),
        }
    }

    /// Values of every field at `x`.
    pub fn eval_all(&self, x: &[f64]) -> Vec<Complex64> {
        let nf = self.real.len();
        // table[axis][m + n/2 - 1] = e^{i m θ}, m = -n/2+1 ..= n/2
        let mut tables: [Vec<Complex64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for axis in 0..self.dim {
            let n = self.shape[axis] as i64;
            let theta = 2.0 * std::f64::consts::PI * x[axis] / self.lengths[axis];
            tables[axis] = (-n / 2 + 1..=n / 2)
                .map(|m| {
                    let arg = m as f64 * theta;
                    if m == n / 2 {
                        Complex64::new(arg.cos(), 0.0)
                    } else {
                        Complex64::new(arg.cos(), arg.sin())
                    }
                })
                .collect();
        }
        let mut out = vec![ZERO; nf];
        for (j, idx) in self.modes.iter().enumerate() {
            let mut phase = tables[0][idx[0]];
            for axis in 1..self.dim {
                phase *= tables[axis][idx[axis]];
            }
            for (f, o) in out.iter_mut().enumerate() {
                *o += self.coeffs[j * nf + f] * phase;
            }
        }
        for (o, &r) in out.iter_mut().zip(&self.real) {
            if r {
                o.im = 0.0;
            }
        }
        out
    }

    /// Value of the first field at `x`.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.eval_all(x)[0]
    }
}

/// A real vector field with one spectral component per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    components: Vec<SpectralScalarField>,
}

impl VelocityField {
    /// Zero field on `grid`.
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VelocityField {
            components: (0..grid.dim())
                .map(|_| SpectralScalarField::zeros(grid, true))
                .collect(),
        }
    }

    /// Wraps real components after checking the divergence-free invariant
    /// `max_k |k·û(k)| <= 1e-10 max |û|`.
    pub fn new(components: Vec<SpectralScalarField>) -> Result<Self> {
        let v = VelocityField::from_components_unchecked(components)?;
        let defect = v.divergence_defect();
        if defect > 1e-10 {
            return Err(Error::Validation(format!(
                "velocity is not divergence-free (relative defect {defect:e})"
            )));
        }
        Ok(v)
    }

    /// Wraps components, checking only that they share a grid and are real.
    pub fn from_components_unchecked(components: Vec<SpectralScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Dimension("velocity needs at least one component".into()))?;
        let dim = first.grid().dim();
        if components.len() != dim {
            return Err(Error::Dimension(format!(
                "{} components for a {dim}-dimensional grid",
                components.len()
            )));
        }
        for c in &components {
            first.check_grid(c)?;
            if !c.is_real() {
                return Err(Error::Dimension("velocity components must be real fields".into()));
            }
        }
        Ok(VelocityField { components })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SpectralScalarField] {
        &self.components
    }

    pub fn component(&self, axis: usize) -> &SpectralScalarField {
        &self.components[axis]
    }

    pub fn into_components(self) -> Vec<SpectralScalarField> {
        self.components
    }

    /// `max_k |k·û(k)| / max |û|`, zero for the zero field.
    pub fn divergence_defect(&self) -> f64 {
        let grid = self.grid();
        let scale = self
            .components
            .iter()
            .fold(0.0f64, |m, c| m.max(c.max_abs_coeff()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for flat in 0..grid.len() {
            let k = grid.derivative_wavevector(flat);
            let kmag = k.iter().map(|v| v * v).sum::<f64>().sqrt();
            if kmag == 0.0 {
                continue;
            }
            let mut dot = ZERO;
            for (axis, c) in self.components.iter().enumerate() {
                dot += c.coeffs()[flat] * k[axis];
            }
            worst = worst.max(dot.norm() / kmag);
        }
        worst / scale
    }

    /// `∫ u·v` by grid quadrature.
    pub fn inner(&self, other: &VelocityField) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b).re)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.components.iter_mut() {
            c.scale(a);
        }
    }

    pub fn axpy(&mut self, a: f64, other: &VelocityField) {
        for (c, o) in self.components.iter_mut().zip(&other.components) {
            c.axpy(a, o);
        }
    }

    pub fn lincomb(a: f64, x: &VelocityField, b: f64, y: &VelocityField) -> Self {
        VelocityField {
            components: x
                .components
                .iter()
                .zip(&y.components)
                .map(|(p, q)| SpectralScalarField::lincomb(a, p, b, q))
                .collect(),
        }
    }

    pub fn box_truncated(&self, cutoff: usize) -> Self {
        VelocityField {
            components: self.components.iter().map(|c| c.box_truncated(cutoff)).collect(),
        }
    }

    /// Physical samples of every component.
    pub fn to_real_values(&self) -> Vec<Vec<f64>> {
        self.components.iter().map(|c| c.to_real_values()).collect()
    }
}

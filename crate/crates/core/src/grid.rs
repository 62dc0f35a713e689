//! Periodic grids and the multi-dimensional FFT used by every field.
//!
//! Coefficients are stored in row-major order (last axis fastest) using the
//! usual FFT index layout: index `i` along an axis of `n` points carries the
//! signed mode `i` for `i <= n/2` and `i - n` otherwise, so the retained
//! wavenumbers are `{-n/2+1, ..., n/2} * 2π/L`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A periodic box `[0, L_1) x ... x [0, L_d)` sampled on `N_1 x ... x N_d` points.
pub struct Grid {
    shape: Vec<usize>,
    lengths: Vec<f64>,
    len: usize,
    signed: Vec<[i64; 3]>,
    // first-derivative wavenumbers; the Nyquist index is mapped to 0
    dk: Vec<[f64; 3]>,
    ksq: Vec<f64>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("shape", &self.shape)
            .field("lengths", &self.lengths)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.lengths == other.lengths
    }
}

impl Grid {
    /// Builds a grid with explicit box lengths.
    pub fn new(shape: &[usize], lengths: &[f64]) -> Result<Arc<Grid>> {
        let dim = shape.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(format!(
                "grid dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if lengths.len() != dim {
            return Err(Error::Dimension(format!(
                "{} lengths given for a {dim}-dimensional grid",
                lengths.len()
            )));
        }
        for (axis, &n) in shape.iter().enumerate() {
            if n == 0 || n % 2 != 0 {
                return Err(Error::Dimension(format!(
                    "resolution along axis {axis} must be a positive even integer, got {n}"
                )));
            }
        }
        for (axis, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Parameter(format!(
                    "domain length along axis {axis} must be positive, got {l}"
                )));
            }
        }

        let len: usize = shape.iter().product();
        let mut signed = Vec::with_capacity(len);
        let mut dk = Vec::with_capacity(len);
        let mut ksq = Vec::with_capacity(len);
        for flat in 0..len {
            let idx = unravel(shape, flat);
            let mut s = [0i64; 3];
            let mut d = [0.0; 3];
            let mut k2 = 0.0;
            for axis in 0..dim {
                let n = shape[axis];
                let i = idx[axis];
                let m = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
                let k = m as f64 * 2.0 * PI / lengths[axis];
                s[axis] = m;
                d[axis] = if i == n / 2 { 0.0 } else { k };
                k2 += k * k;
            }
            signed.push(s);
            dk.push(d);
            ksq.push(k2);
        }

        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();

        Ok(Arc::new(Grid {
            shape: shape.to_vec(),
            lengths: lengths.to_vec(),
            len,
            signed,
            dk,
            ksq,
            forward,
            inverse,
        }))
    }

    /// Builds a grid on the `2π`-periodic box.
    pub fn periodic(shape: &[usize]) -> Result<Arc<Grid>> {
        Grid::new(shape, &vec![2.0 * PI; shape.len()])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Number of grid points, equal to the number of Fourier modes.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Quadrature weight of a single grid point.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len as f64
    }

    /// Signed mode numbers of the coefficient stored at `flat`.
    pub fn signed_index(&self, flat: usize) -> [i64; 3] {
        self.signed[flat]
    }

    /// Physical wavevector of a mode, Nyquist included.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let s = self.signed[flat];
        let mut k = [0.0; 3];
        for axis in 0..self.dim() {
            k[axis] = s[axis] as f64 * 2.0 * PI / self.lengths[axis];
        }
        k
    }

    /// Wavevector used by first derivatives. The Nyquist component is zero so
    /// that odd derivatives of real fields stay real.
    pub fn derivative_wavevector(&self, flat: usize) -> [f64; 3] {
        self.dk[flat]
    }

    /// `|k|^2` of a mode.
    pub fn wavenumber_squared(&self, flat: usize) -> f64 {
        self.ksq[flat]
    }

    /// Physical coordinates of grid point `flat`.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = unravel(&self.shape, flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim() {
            x[axis] = idx[axis] as f64 * self.lengths[axis] / self.shape[axis] as f64;
        }
        x
    }

    /// Flat position of the mode `-k` given the flat position of `k`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let idx = unravel(&self.shape, flat);
        let mut out = 0;
        for axis in 0..self.dim() {
            let n = self.shape[axis];
            out = out * n + (n - idx[axis]) % n;
        }
        out
    }

    /// Flat position of a mode given its signed mode numbers, if it is on the grid.
    pub fn flat_index(&self, signed: &[i64]) -> Option<usize> {
        if signed.len() != self.dim() {
            return None;
        }
        let mut out = 0;
        for (axis, &m) in signed.iter().enumerate() {
            let n = self.shape[axis] as i64;
            if m <= -n / 2 || m > n / 2 {
                return None;
            }
            out = out * n as usize + m.rem_euclid(n) as usize;
        }
        Some(out)
    }

    /// Largest `|mode|` along `axis` kept by the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self, axis: usize) -> usize {
        self.shape[axis] / 3
    }

    /// Whether mode `flat` lies in the box `|m_j| <= cutoff_j`.
    pub fn in_box(&self, flat: usize, cutoff: &[usize]) -> bool {
        let s = self.signed[flat];
        (0..self.dim()).all(|axis| s[axis].unsigned_abs() as usize <= cutoff[axis])
    }

    /// Forward transform in place, normalised by `1/len` so coefficients are mode amplitudes.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Inverse transform in place (synthesis, no normalisation).
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        debug_assert_eq!(data.len(), self.len);
        let dim = self.dim();
        for axis in 0..dim {
            let n = self.shape[axis];
            let plan = &plans[axis];
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            let stride: usize = self.shape[axis + 1..].iter().product();
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let outer: usize = self.shape[..axis].iter().product();
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            for o in 0..outer {
                let base = o * n * stride;
                for j in 0..stride {
                    for (i, v) in line.iter_mut().enumerate() {
                        *v = data[base + i * stride + j];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, v) in line.iter().enumerate() {
                        data[base + i * stride + j] = *v;
                    }
                }
            }
        }
    }
}

pub(crate) fn unravel(shape: &[usize], mut flat: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    for axis in (0..shape.len()).rev() {
        idx[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
    idx
}

#![allow(dead_code)]

use std::sync::Arc;

use pitaevskii_core::{leray_project, Complex64, Grid, SpectralScalarField, VelocityField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random field whose modes all satisfy `|m_j| <= cutoff`, amplitudes decaying like `(1+|k|²)^{-1}`.
pub fn random_field(grid: &Arc<Grid>, cutoff: usize, seed: u64, real: bool) -> SpectralScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (flat, v) in c.iter_mut().enumerate() {
        let s = grid.signed_index(flat);
        let inside = (0..grid.dim()).all(|a| s[a].unsigned_abs() as usize <= cutoff);
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        if inside {
            *v = Complex64::new(re, im) / (1.0 + grid.wavenumber_squared(flat));
        }
    }
    if real {
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
    SpectralScalarField::from_coefficients(grid, c, real).unwrap()
}

pub fn random_velocity(grid: &Arc<Grid>, cutoff: usize, seed: u64) -> VelocityField {
    let comps: Vec<_> = (0..grid.dim())
        .map(|a| random_field(grid, cutoff, seed.wrapping_mul(31).wrapping_add(a as u64 + 1), true))
        .collect();
    leray_project(&comps).unwrap()
}

/// `1 + a·f/max|f|` for a random real band-limited `f`, so the result lies in `[1-a, 1+a]`.
pub fn random_density(grid: &Arc<Grid>, cutoff: usize, seed: u64, a: f64) -> SpectralScalarField {
    let f = random_field(grid, cutoff, seed, true);
    let vals = f.to_real_values();
    let m = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let out: Vec<f64> = vals.iter().map(|v| 1.0 + a * v / m).collect();
    SpectralScalarField::from_real_values(grid, &out).unwrap()
}

pub fn diff(a: &SpectralScalarField, b: &SpectralScalarField) -> SpectralScalarField {
    SpectralScalarField::lincomb(1.0, a, -1.0, b)
}

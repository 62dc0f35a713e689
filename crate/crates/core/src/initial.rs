//! Admissible initial triplets `(ψ₀, u₀, ρ₀)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralScalarField, VelocityField};
use crate::galerkin::{truncate_state, GalerkinTruncation, SimState};
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::spectral;

/// One Fourier term `(re + i·im) e^{i k·x}` with integer mode numbers `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    pub k: Vec<i64>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WavefunctionSpec {
    Zero,
    /// `A e^{i k·x}` with integer mode numbers `k`.
    PlaneWave { amplitude: f64, wavevector: Vec<i64> },
    /// A finite sum of Fourier terms.
    Modes { terms: Vec<ModeTerm> },
    /// Gaussian coefficients with standard deviation `∝ (1+|k|²)^{−decay/2}`,
    /// scaled to root-mean-square modulus `amplitude`.
    RandomSmooth { amplitude: f64, decay: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocitySpec {
    Zero,
    /// `A (sin x cos y, −cos x sin y)` on the first two axes (scaled for non-square boxes).
    TaylorGreen { amplitude: f64 },
    /// `(A sin(k y), 0, …)`.
    ShearMode { amplitude: f64, wavenumber: i64 },
    /// Random divergence-free field with root-mean-square speed `amplitude`.
    RandomSmooth { amplitude: f64, decay: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySpec {
    Constant { value: f64 },
    /// `mean + amplitude · sin(k·x)`.
    SinePerturbed { mean: f64, amplitude: f64, wavevector: Vec<i64> },
    /// A step from `high` (first half of axis 0) to `low`, convolved with the
    /// exponential bump of radius `width · L` and clamped to `[m, M]`.
    Mollified { low: f64, high: f64, width: f64 },
}

/// Initial data for the three fields; any combination of the per-field kinds is allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialDataSpec {
    pub wavefunction: WavefunctionSpec,
    pub velocity: VelocitySpec,
    pub density: DensitySpec,
    #[serde(default)]
    pub seed: u64,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        InitialDataSpec {
            wavefunction: WavefunctionSpec::PlaneWave {
                amplitude: 1.0,
                wavevector: vec![1],
            },
            velocity: VelocitySpec::Zero,
            density: DensitySpec::Constant { value: 1.0 },
            seed: 0,
        }
    }
}

fn set_mode(coeffs: &mut [Complex64], grid: &Grid, k: &[i64], value: Complex64) -> Result<()> {
    let flat = grid.flat_index(k).ok_or_else(|| {
        Error::Validation(format!("mode {k:?} is not resolved by a grid of shape {:?}", grid.shape()))
    })?;
    coeffs[flat] += value;
    Ok(())
}

fn check_decay(decay: f64) -> Result<()> {
    if decay > 4.0 && decay.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("random spectral decay exponent must exceed 4, got {decay}")))
    }
}

fn rms(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

fn wavefunction(spec: &WavefunctionSpec, grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Result<SpectralScalarField> {
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    match spec {
        WavefunctionSpec::Zero => {}
        WavefunctionSpec::PlaneWave { amplitude, wavevector } => {
            set_mode(&mut c, grid, wavevector, Complex64::new(*amplitude, 0.0))?;
        }
        WavefunctionSpec::Modes { terms } => {
            for t in terms {
                set_mode(&mut c, grid, &t.k, Complex64::new(t.re, t.im))?;
            }
        }
        WavefunctionSpec::RandomSmooth { amplitude, decay } => {
            check_decay(*decay)?;
            for (flat, v) in c.iter_mut().enumerate() {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                let w = (1.0 + grid.wavenumber_squared(flat)).powf(-decay / 2.0);
                *v = Complex64::new(re, im) * w;
            }
            let f = SpectralScalarField::from_coefficients(grid, c, false)?;
            let modulus: Vec<f64> = f.to_physical().iter().map(|v| v.norm()).collect();
            let r = rms(&modulus);
            return Ok(f.scaled(amplitude / r));
        }
    }
    SpectralScalarField::from_coefficients(grid, c, false)
}

fn velocity(spec: &VelocitySpec, grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> Result<VelocityField> {
    let dim = grid.dim();
    let need_2d = |what: &str| -> Result<()> {
        if dim < 2 {
            Err(Error::Validation(format!("{what} velocity needs at least two dimensions")))
        } else {
            Ok(())
        }
    };
    match spec {
        VelocitySpec::Zero => Ok(VelocityField::zeros(grid)),
        VelocitySpec::TaylorGreen { amplitude } => {
            need_2d("Taylor-Green")?;
            let a = 2.0 * PI / grid.lengths()[0];
            let b = 2.0 * PI / grid.lengths()[1];
            let amp = *amplitude;
            let mut comps = vec![
                SpectralScalarField::from_real_fn(grid, |x| amp * (a * x[0]).sin() * (b * x[1]).cos()),
                SpectralScalarField::from_real_fn(grid, |x| -amp * (a / b) * (a * x[0]).cos() * (b * x[1]).sin()),
            ];
            if dim == 3 {
                let c = 2.0 * PI / grid.lengths()[2];
                for comp in comps.iter_mut() {
                    let vals: Vec<f64> = comp
                        .to_real_values()
                        .iter()
                        .enumerate()
                        .map(|(flat, v)| v * (c * grid.point(flat)[2]).cos())
                        .collect();
                    *comp = SpectralScalarField::from_real_values(grid, &vals)?;
                }
                comps.push(SpectralScalarField::zeros(grid, true));
            }
            VelocityField::new(comps)
        }
        VelocitySpec::ShearMode { amplitude, wavenumber } => {
            need_2d("shear")?;
            let k = 2.0 * PI * *wavenumber as f64 / grid.lengths()[1];
            let amp = *amplitude;
            let mut comps = vec![SpectralScalarField::from_real_fn(grid, |x| amp * (k * x[1]).sin())];
            for _ in 1..dim {
                comps.push(SpectralScalarField::zeros(grid, true));
            }
            VelocityField::new(comps)
        }
        VelocitySpec::RandomSmooth { amplitude, decay } => {
            need_2d("random")?;
            check_decay(*decay)?;
            let mut comps = Vec::with_capacity(dim);
            for _ in 0..dim {
                let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
                for (flat, v) in c.iter_mut().enumerate() {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    let w = (1.0 + grid.wavenumber_squared(flat)).powf(-decay / 2.0);
                    *v = Complex64::new(re, im) * w;
                }
                // Hermitian symmetry; the mean flow is removed
                c[0] = Complex64::new(0.0, 0.0);
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
                comps.push(SpectralScalarField::from_coefficients(grid, c, true)?);
            }
            let mut u = spectral::leray_project(&comps)?;
            let speed: Vec<f64> = {
                let vals = u.to_real_values();
                (0..grid.len()).map(|x| vals.iter().map(|c| c[x] * c[x]).sum::<f64>().sqrt()).collect()
            };
            let r = rms(&speed);
            if r > 0.0 {
                u.scale(amplitude / r);
            }
            Ok(u)
        }
    }
}

/// Periodic exponential bump `exp(−1/(1−(r/w)²))` sampled on the grid and
/// normalised to unit discrete mass.
pub fn mollifier(grid: &Arc<Grid>, radius: f64) -> Result<Vec<f64>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Validation(format!("mollifier radius must be positive, got {radius}")));
    }
    let dim = grid.dim();
    let mut z: Vec<f64> = (0..grid.len())
        .map(|flat| {
            let p = grid.point(flat);
            let mut r2 = 0.0;
            for a in 0..dim {
                let l = grid.lengths()[a];
                let d = p[a].min(l - p[a]);
                r2 += d * d;
            }
            let s = r2 / (radius * radius);
            if s < 1.0 {
                (-1.0 / (1.0 - s)).exp()
            } else {
                0.0
            }
        })
        .collect();
    let mass: f64 = z.iter().sum::<f64>() * grid.cell_volume();
    for v in z.iter_mut() {
        *v /= mass;
    }
    Ok(z)
}

/// Periodic convolution `f * ζ` by grid quadrature, done spectrally.
pub fn convolve(grid: &Arc<Grid>, f: &[f64], kernel: &[f64]) -> Result<Vec<f64>> {
    let a = SpectralScalarField::from_real_values(grid, f)?;
    let b = SpectralScalarField::from_real_values(grid, kernel)?;
    let vol = grid.volume();
    let c = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y * vol).collect();
    Ok(SpectralScalarField::from_coefficients(grid, c, true)?.to_real_values())
}

/// The unclamped step profile used by the mollified density.
pub fn step_profile(grid: &Arc<Grid>, low: f64, high: f64) -> Vec<f64> {
    let half = 0.5 * grid.lengths()[0];
    (0..grid.len())
        .map(|flat| if grid.point(flat)[0] < half { high } else { low })
        .collect()
}

fn density(spec: &DensitySpec, grid: &Arc<Grid>, params: &ModelParams) -> Result<SpectralScalarField> {
    match spec {
        DensitySpec::Constant { value } => Ok(SpectralScalarField::from_real_fn(grid, |_| *value)),
        DensitySpec::SinePerturbed {
            mean,
            amplitude,
            wavevector,
        } => {
            if wavevector.len() != grid.dim() {
                return Err(Error::Validation(format!(
                    "density wavevector {wavevector:?} does not match the grid dimension {}",
                    grid.dim()
                )));
            }
            let k: Vec<f64> = wavevector
                .iter()
                .zip(grid.lengths())
                .map(|(&m, &l)| 2.0 * PI * m as f64 / l)
                .collect();
            Ok(SpectralScalarField::from_real_fn(grid, |x| {
                let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
                mean + amplitude * phase.sin()
            }))
        }
        DensitySpec::Mollified { low, high, width } => {
            let radius = width * grid.lengths()[0];
            let z = mollifier(grid, radius)?;
            let target = step_profile(grid, *low, *high);
            let smooth: Vec<f64> = convolve(grid, &target, &z)?
                .into_iter()
                .map(|v| v.clamp(params.density_min, params.density_max))
                .collect();
            SpectralScalarField::from_real_values(grid, &smooth)
        }
    }
}

/// Builds `(Q^N ψ₀, P^N u₀, ρ₀)` at `t = 0` and checks `m ≤ ρ₀ ≤ M` on the grid.
pub fn build_initial_state(
    spec: &InitialDataSpec,
    grid: &Arc<Grid>,
    trunc: &GalerkinTruncation,
    params: &ModelParams,
) -> Result<SimState> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let psi = wavefunction(&spec.wavefunction, grid, &mut rng)?;
    let u = velocity(&spec.velocity, grid, &mut rng)?;
    let rho = density(&spec.density, grid, params)?;
    let values = rho.to_real_values();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // the transform round trip may move exact bound values by a few ulps
    let slack = 1e-12 * params.density_max;
    if min < params.density_min - slack || max > params.density_max + slack {
        return Err(Error::Validation(format!(
            "initial density range [{min}, {max}] violates the bounds [{}, {}]",
            params.density_min, params.density_max
        )));
    }
    let s = truncate_state(&SimState::new(psi, u, rho)?, trunc);
    let defect = s.u.divergence_defect();
    if defect > 1e-10 {
        return Err(Error::Validation(format!("initial velocity is not divergence-free ({defect:e})")));
    }
    Ok(s)
}

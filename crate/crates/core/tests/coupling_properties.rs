mod common;

use common::{random_density, random_field, random_velocity};
use pitaevskii_core::{
    apply_b, apply_bl, assemble_mass_matrix, continuity_rhs, coupling_source, energy_budget, laplacian, lp_norm,
    momentum_source, nls_rhs, sobolev_norm, Complex64, GalerkinTruncation, Grid, ModelParams, SimState,
    SpectralScalarField, VelocityField,
};
use proptest::prelude::*;

fn params(lambda: f64, mu: f64, nu: f64) -> ModelParams {
    ModelParams {
        coupling: lambda,
        interaction: mu,
        viscosity: nu,
        ..ModelParams::default()
    }
}

/// `∫ f` of a real field by grid quadrature.
fn integral(f: &SpectralScalarField) -> f64 {
    f.coeffs()[0].re * f.grid().volume()
}

/// `∫ f g` of real fields.
fn dot(f: &SpectralScalarField, g: &SpectralScalarField) -> f64 {
    f.inner(g).re
}

/// `∫ |u|² f` of real fields by grid quadrature.
fn weighted_kinetic(u: &VelocityField, f: &SpectralScalarField) -> f64 {
    let uv = u.to_real_values();
    let fv = f.to_real_values();
    let w = u.grid().cell_volume();
    (0..fv.len())
        .map(|x| uv.iter().map(|c| c[x] * c[x]).sum::<f64>() * fv[x])
        .sum::<f64>()
        * w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_part_is_symmetric(seed in any::<u64>(), amp in 0.1f64..3.0) {
        let g = Grid::periodic(&[32, 32]).unwrap();
        let p = params(1.0, 1.0, 0.1);
        let psi = random_field(&g, 10, seed, false);
        let phi = random_field(&g, 10, seed ^ 0x55, false);
        let mut u = random_velocity(&g, 10, seed ^ 0xaa);
        u.scale(amp);
        let lhs = phi.inner(&apply_bl(&psi, &u, &p).unwrap());
        let rhs = apply_bl(&phi, &u, &p).unwrap().inner(&psi);
        let scale = phi.norm_sqr().sqrt() * sobolev_norm(&psi, 2.0).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale, "defect {}", (lhs - rhs).norm() / scale);
    }

    #[test]
    fn b_is_nonnegative(seed in any::<u64>(), amp in 0.1f64..3.0, mu in 0.0f64..5.0) {
        let g = Grid::periodic(&[32, 32]).unwrap();
        let p = params(1.0, mu, 0.1);
        let psi = random_field(&g, 8, seed, false);
        let mut u = random_velocity(&g, 8, seed ^ 0xaa);
        u.scale(amp);
        let q = psi.inner(&apply_b(&psi, &u, &p).unwrap()).re;
        let l4 = lp_norm(&psi, 4.0).unwrap().powi(4);
        prop_assert!(q >= mu * l4 - 1e-10, "{q} < {}", mu * l4);
    }

    #[test]
    fn mass_transfer_is_nonnegative(seed in any::<u64>(), lambda in 0.0f64..5.0) {
        let g = Grid::periodic(&[32, 32]).unwrap();
        let p = params(lambda, 1.0, 0.1);
        let psi = random_field(&g, 8, seed, false);
        let u = random_velocity(&g, 8, seed ^ 0xaa);
        prop_assert!(integral(&coupling_source(&psi, &u, &p).unwrap()) >= -1e-12);
    }

    #[test]
    fn energy_exchange_cancels(seed in any::<u64>(), lambda in 0.1f64..3.0, mu in 0.0f64..3.0) {
        // cubic products of cutoff-3 fields stay below the dealiasing band of a 32-point grid
        let g = Grid::periodic(&[32, 32]).unwrap();
        let p = params(lambda, mu, 0.1);
        let psi = random_field(&g, 3, seed, false);
        let u = random_velocity(&g, 3, seed ^ 0xaa);
        let b = apply_b(&psi, &u, &p).unwrap();

        // superfluid side: d/dt(½‖∇ψ‖² + μ/2‖ψ‖⁴) = −2Λ Re⟨Hψ, Bψ⟩ = −2Λ‖Bψ‖² + exchange
        let vals = psi.to_physical();
        let cubic: Vec<Complex64> = vals.iter().map(|v| v * (mu * v.norm_sqr())).collect();
        let mut h = SpectralScalarField::from_physical(&g, &cubic, false).unwrap();
        h.axpy(-0.5, &laplacian(&psi));
        let superfluid = -2.0 * lambda * h.inner(&b).re + 2.0 * lambda * b.norm_sqr();

        // normal side: ∫u·F + ½∫|u|²Ψ
        let f = momentum_source(&psi, &u, &p).unwrap();
        let src = coupling_source(&psi, &u, &p).unwrap();
        let work: f64 = u.components().iter().zip(&f).map(|(a, b)| dot(a, b)).sum();
        let normal = work + 0.5 * weighted_kinetic(&u, &src);

        let scale = superfluid.abs().max(1.0);
        prop_assert!((superfluid + normal).abs() <= 1e-9 * scale, "{superfluid} vs {normal}");
    }

    #[test]
    fn nls_real_part_is_pure_dissipation(seed in any::<u64>(), lambda in 0.0f64..3.0, mu in 0.0f64..3.0) {
        let g = Grid::periodic(&[32, 32]).unwrap();
        let p = params(lambda, mu, 0.1);
        let trunc = GalerkinTruncation::new(6);
        let psi = trunc.project(&random_field(&g, 6, seed, false));
        let u = trunc.project_velocity(&random_velocity(&g, 6, seed ^ 0xaa));
        let lhs = psi.inner(&nls_rhs(&psi, &u, &trunc, &p).unwrap()).re;
        let b = apply_b(&psi, &u, &p).unwrap();
        let rhs = -lambda * psi.inner(&b).re;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn continuity_integrates_to_source(seed in any::<u64>(), lambda in 0.0f64..3.0) {
        let g = Grid::periodic(&[32, 32]).unwrap();
        let p = params(lambda, 1.0, 0.1);
        let trunc = GalerkinTruncation::new(6);
        let psi = trunc.project(&random_field(&g, 6, seed, false));
        let u = trunc.project_velocity(&random_velocity(&g, 6, seed ^ 0xaa));
        let rho = random_density(&g, 6, seed ^ 0x77, 0.5);
        let src = pitaevskii_core::truncated_coupling_source(&psi, &u, &trunc, &p).unwrap();
        let s = SimState::new(psi, u, rho).unwrap();
        let rate = integral(&continuity_rhs(&s, &p).unwrap());
        prop_assert!((rate - integral(&src)).abs() <= 1e-10 * integral(&src).abs().max(1.0));
        prop_assert!(rate >= -1e-12);
    }

    #[test]
    fn energy_budget_closes(seed in any::<u64>(), lambda in 0.0f64..2.0, mu in 0.0f64..2.0, nu in 0.01f64..1.0, cutoff in 2usize..=10) {
        let g = Grid::periodic(&[32, 32]).unwrap();
        let p = params(lambda, mu, nu);
        let trunc = GalerkinTruncation::new(cutoff);
        let psi = trunc.project(&random_field(&g, cutoff, seed, false));
        let u = trunc.project_velocity(&random_velocity(&g, cutoff, seed ^ 0xaa));
        let rho = random_density(&g, 10, seed ^ 0x77, 0.5);
        let s = SimState::new(psi, u, rho).unwrap();
        let eb = energy_budget(&s, &trunc, &p).unwrap();
        prop_assert!(eb.dissipation >= 0.0);
        let scale = eb.energy_rate.abs().max(eb.dissipation).max(1.0);
        prop_assert!((eb.energy_rate + eb.dissipation).abs() <= 1e-9 * scale,
            "rate {} dissipation {}", eb.energy_rate, eb.dissipation);
    }

    #[test]
    fn mass_matrix_is_spd_above_floor(seed in any::<u64>(), a in 0.0f64..0.8, cutoff in 1usize..=4) {
        let g = Grid::periodic(&[16, 16]).unwrap();
        let p = params(1.0, 1.0, 0.1);
        let rho = random_density(&g, 5, seed, a);
        let m = assemble_mass_matrix(&rho, &GalerkinTruncation::new(cutoff), &p).unwrap();
        prop_assert!((&m - m.transpose()).amax() <= 1e-14 * m.amax());
        let eig = m.symmetric_eigen().eigenvalues;
        let rmin = rho.to_real_values().into_iter().fold(f64::INFINITY, f64::min);
        let rmax = rho.to_real_values().into_iter().fold(0.0, f64::max);
        prop_assert!(eig.min() >= rmin * (1.0 - 1e-12), "{} < {rmin}", eig.min());
        prop_assert!(eig.max() <= rmax * (1.0 + 1e-12));
    }
}

#[test]
fn mass_matrix_refuses_densities_below_floor() {
    let g = Grid::periodic(&[16, 16]).unwrap();
    let p = params(1.0, 1.0, 0.1);
    let rho = SpectralScalarField::from_real_fn(&g, |x| 0.5 + 0.45 * x[0].cos());
    assert!(matches!(
        assemble_mass_matrix(&rho, &GalerkinTruncation::new(3), &p),
        Err(pitaevskii_core::Error::DensityFloor { .. })
    ));
}

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use pitaevskii_core::{
    apply_b, apply_bl, build_initial_state, circulation, density_oracle, gronwall_monitor, lp_norm, rk4_step,
    sobolev_norm, total_energy, Complex64, DensitySpec, FlowHistory, GalerkinTruncation, Grid, InitialDataSpec,
    ModeTerm, ModelParams, SimState, SpectralScalarField, VelocitySpec, WavefunctionSpec,
};
use pitaevskii_sim::runner::{checkpoint_name, FINAL_CHECKPOINT};
use pitaevskii_sim::{read_diagnostics, run_simulation, ExitReport, RunConfig, Simulation};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn params(lambda: f64, mu: f64, nu: f64) -> ModelParams {
    ModelParams {
        coupling: lambda,
        interaction: mu,
        viscosity: nu,
        ..ModelParams::default()
    }
}

fn l2_distance(a: &SpectralScalarField, b: &SpectralScalarField) -> f64 {
    SpectralScalarField::lincomb(1.0, a, -1.0, b).norm_sqr().sqrt()
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

// 1. Symmetry of B_L and non-negativity of B on random band-limited states.
fn operator_structure() -> Outcome {
    let g = Grid::periodic(&[32, 32]).unwrap();
    let trunc = GalerkinTruncation::new(10);
    let p = params(1.0, 1.0, 0.1);
    let mut worst_sym = 0.0f64;
    let mut worst_pos = f64::INFINITY;
    for seed in 0..50u64 {
        let spec = |seed: u64, amp: f64| InitialDataSpec {
            wavefunction: WavefunctionSpec::RandomSmooth { amplitude: amp, decay: 5.0 },
            velocity: VelocitySpec::RandomSmooth { amplitude: 1.0, decay: 5.0 },
            density: DensitySpec::Constant { value: 1.0 },
            seed,
        };
        let s = build_initial_state(&spec(seed, 1.0), &g, &trunc, &p).unwrap();
        let phi = build_initial_state(&spec(seed + 1000, 1.0), &g, &trunc, &p).unwrap().psi;
        let (psi, u) = (&s.psi, &s.u);
        let lhs = phi.inner(&apply_bl(psi, u, &p).unwrap());
        let rhs = apply_bl(&phi, u, &p).unwrap().inner(psi);
        let scale = phi.norm_sqr().sqrt() * sobolev_norm(psi, 2.0).unwrap();
        worst_sym = worst_sym.max((lhs - rhs).norm() / scale);
        let q = psi.inner(&apply_b(psi, u, &p).unwrap()).re;
        worst_pos = worst_pos.min(q - p.interaction * lp_norm(psi, 4.0).unwrap().powi(4));
    }
    outcome(
        worst_sym <= 1e-10 && worst_pos >= -1e-10,
        format!("max symmetry defect {worst_sym:.2e}·‖φ‖‖ψ‖_H2 (≤ 1e-10); min Re⟨ψ,Bψ⟩ − μ‖ψ‖⁴_L4 = {worst_pos:.3e} (≥ −1e-10)"),
    )
}

fn plane_wave_error(dt: f64, steps: usize) -> f64 {
    let g = Grid::periodic(&[32, 32]).unwrap();
    let trunc = GalerkinTruncation::dealiased(&g);
    let p = params(0.0, 1.0, 0.1);
    let spec = InitialDataSpec {
        wavefunction: WavefunctionSpec::PlaneWave { amplitude: 1.0, wavevector: vec![2, 1] },
        velocity: VelocitySpec::Zero,
        density: DensitySpec::Constant { value: 1.0 },
        seed: 0,
    };
    let mut s = build_initial_state(&spec, &g, &trunc, &p).unwrap();
    for _ in 0..steps {
        s = rk4_step(&s, dt, &trunc, &p).unwrap();
    }
    // e^{i(k·x − ωt)}, ω = ½|k|² + μA²
    let omega = 0.5 * 5.0 + 1.0;
    let t = s.t;
    let exact = SpectralScalarField::from_fn(&g, false, |x| Complex64::new(0.0, 2.0 * x[0] + x[1] - omega * t).exp());
    l2_distance(&s.psi, &exact)
}

// 2. Plane wave with Λ = 0.
fn plane_wave() -> Outcome {
    let err = plane_wave_error(1e-3, 1000);
    // coarse steps keep the truncation error well above rounding; 0.02 is inside
    // the RK4 stability interval for the highest retained mode
    let errs: Vec<f64> = [0.02, 0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| plane_wave_error(dt, (1.0 / dt).round() as usize))
        .collect();
    let ord = orders(&errs);
    outcome(
        err <= 1e-8 && min_of(&ord) >= 3.8,
        format!(
            "L2 error {err:.3e} at T=1, dt=1e-3 (≤ 1e-8); errors at dt=0.02..0.0025 [{}], orders [{}] (≥ 3.8)",
            fmt_list(&errs),
            ord.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

// 3. Taylor-Green decay with Λ = 0 and unit density.
fn taylor_green() -> Outcome {
    let g = Grid::periodic(&[32, 32]).unwrap();
    let trunc = GalerkinTruncation::dealiased(&g);
    let nu = 0.1;
    let p = params(0.0, 1.0, nu);
    let spec = InitialDataSpec {
        wavefunction: WavefunctionSpec::Zero,
        velocity: VelocitySpec::TaylorGreen { amplitude: 1.0 },
        density: DensitySpec::Constant { value: 1.0 },
        seed: 0,
    };
    let mut s = build_initial_state(&spec, &g, &trunc, &p).unwrap();
    let a0 = s.u.norm_sqr().sqrt();
    for _ in 0..500 {
        s = rk4_step(&s, 1e-3, &trunc, &p).unwrap();
    }
    let t = s.t;
    let ratio = s.u.norm_sqr().sqrt() / a0;
    let exact = (-2.0 * nu * t).exp();
    let amp_err = (ratio - exact).abs() / exact;
    let rate = -ratio.ln() / t;
    let rate_err = (rate - 2.0 * nu).abs() / (2.0 * nu);
    outcome(
        amp_err <= 1e-6 && rate_err <= 1e-6,
        format!("T={t}: amplitude ratio rel. error {amp_err:.3e}, decay rate {rate:.12} vs 2ν, rel. error {rate_err:.3e} (≤ 1e-6)"),
    )
}

fn coupled_spec() -> InitialDataSpec {
    InitialDataSpec {
        wavefunction: WavefunctionSpec::Modes {
            terms: vec![
                ModeTerm { k: vec![0, 0], re: 0.6, im: 0.0 },
                ModeTerm { k: vec![1, 0], re: 0.3, im: 0.1 },
                ModeTerm { k: vec![0, -1], re: 0.0, im: 0.2 },
                ModeTerm { k: vec![1, 1], re: -0.1, im: 0.05 },
            ],
        },
        velocity: VelocitySpec::TaylorGreen { amplitude: 0.5 },
        density: DensitySpec::SinePerturbed { mean: 1.0, amplitude: 0.3, wavevector: vec![1, 1] },
        seed: 0,
    }
}

struct CoupledRun {
    masses: Vec<(f64, f64)>,
    residual: f64,
}

fn coupled_run(dt: f64, steps: usize) -> CoupledRun {
    let g = Grid::periodic(&[32, 32]).unwrap();
    let trunc = GalerkinTruncation::dealiased(&g);
    let p = params(1.0, 1.0, 0.1);
    let mut s = build_initial_state(&coupled_spec(), &g, &trunc, &p).unwrap();
    let e0 = total_energy(&s, &p);
    let vol = g.volume();
    let mass = |s: &SimState| (s.psi.norm_sqr(), s.rho.coeffs()[0].re * vol);
    let mut masses = vec![mass(&s)];
    for _ in 0..steps {
        s = rk4_step(&s, dt, &trunc, &p).unwrap();
        masses.push(mass(&s));
    }
    let e = total_energy(&s, &p) + s.viscous_dissipation + s.coupling_dissipation;
    CoupledRun {
        masses,
        residual: (e - e0).abs() / e0,
    }
}

struct Shared {
    main: CoupledRun,
    main_time: Duration,
}

// 4. Total mass over the coupled run.
fn total_mass(run: &Shared) -> Outcome {
    let m = &run.main.masses;
    let total = |x: &(f64, f64)| x.0 + x.1;
    let m0 = total(&m[0]);
    let drift = m.iter().map(|x| (total(x) - m0).abs() / m0).fold(0.0, f64::max);
    let secs = run.main_time.as_secs_f64();
    outcome(
        drift <= 1e-8 && secs < 60.0,
        format!("max relative drift of ∫ρ + ‖ψ‖² over 1000 steps: {drift:.3e} (≤ 1e-8); run took {secs:.1} s (< 60 s)"),
    )
}

// 5. Mass monotonicity over the same run.
fn mass_monotonicity(run: &Shared) -> Outcome {
    let m = &run.main.masses;
    let mut sf_up = f64::NEG_INFINITY;
    let mut nf_down = f64::NEG_INFINITY;
    for w in m.windows(2) {
        sf_up = sf_up.max((w[1].0 - w[0].0) / w[0].0);
        nf_down = nf_down.max((w[0].1 - w[1].1) / w[0].1);
    }
    let transferred = m.last().unwrap().1 - m[0].1;
    outcome(
        sf_up <= 1e-10 && nf_down <= 1e-10,
        format!(
            "largest per-step superfluid gain {sf_up:.3e}, normal loss {nf_down:.3e} (≤ 1e-10 relative); mass transferred {transferred:.4e}"
        ),
    )
}

// 6. Energy equality and the order of its residual.
fn energy_equality(run: &Shared) -> Outcome {
    let res = run.main.residual;
    let dts = [0.02, 0.01, 0.005];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| coupled_run(dt, (1.0 / dt).round() as usize).residual)
        .collect();
    let ord = orders(&errs);
    outcome(
        res <= 1e-6 && min_of(&ord) >= 3.0,
        format!(
            "residual {res:.3e} at T=1, dt=1e-3 (≤ 1e-6); residuals at dt=0.02,0.01,0.005 [{}], orders [{}] (≥ 3)",
            fmt_list(&errs),
            ord.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

// 7. Inhomogeneous Navier-Stokes energy equality with Λ = 0.
fn ns_energy() -> Outcome {
    let g = Grid::periodic(&[32, 32]).unwrap();
    let trunc = GalerkinTruncation::dealiased(&g);
    let p = params(0.0, 1.0, 0.1);
    let spec = InitialDataSpec {
        wavefunction: WavefunctionSpec::Zero,
        velocity: VelocitySpec::RandomSmooth { amplitude: 0.5, decay: 6.0 },
        density: DensitySpec::SinePerturbed { mean: 1.25, amplitude: 0.75, wavevector: vec![1, 2] },
        seed: 5,
    };
    let mut s = build_initial_state(&spec, &g, &trunc, &p).unwrap();
    let (lo, hi) = (s.min_density(), s.max_density());
    let kinetic = |s: &SimState| total_energy(s, &p);
    let k0 = kinetic(&s);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        s = rk4_step(&s, 1e-3, &trunc, &p).unwrap();
        worst = worst.max((kinetic(&s) + s.viscous_dissipation - k0).abs() / k0);
    }
    outcome(
        worst <= 1e-7,
        format!(
            "ρ₀ ∈ [{lo:.3}, {hi:.3}]; max |½‖√ρu‖² + ν∫‖∇u‖² − E₀|/E₀ over 500 steps {worst:.3e} (≤ 1e-7); dissipated {:.4e}",
            s.viscous_dissipation
        ),
    )
}

// 8. Characteristics density against the spectral density.
fn density_oracle_check() -> Outcome {
    let g = Grid::periodic(&[32, 32]).unwrap();
    let trunc = GalerkinTruncation::dealiased(&g);
    let p = params(1.0, 1.0, 0.1);
    let mut s = build_initial_state(&coupled_spec(), &g, &trunc, &p).unwrap();
    let rho0 = s.rho.clone();
    let mut h = FlowHistory::new();
    h.record(&s, &trunc, &p).unwrap();
    for _ in 0..100 {
        s = rk4_step(&s, 1e-3, &trunc, &p).unwrap();
        h.record(&s, &trunc, &p).unwrap();
    }
    let points: Vec<Vec<f64>> = (0..g.len()).map(|i| g.point(i)[..2].to_vec()).collect();
    let oracle = density_oracle(&rho0, &h, &points, s.t, 2.5e-4).unwrap();
    let spectral = s.rho.to_real_values();
    let worst = spectral.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let change = spectral
        .iter()
        .zip(rho0.to_real_values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-4,
        format!("T={}: max |ρ_spectral − ρ_characteristics| over {} points {worst:.3e} (≤ 1e-4); max |ρ(T) − ρ₀| {change:.3e}", s.t, points.len()),
    )
}

fn halt_config(lambda: f64) -> RunConfig {
    let text = format!(
        r#"
[grid]
resolution = [32, 32]

[model]
coupling = {lambda:?}
interaction = 1.0
viscosity = 0.1
density_min = 1.0
density_max = 1.0
density_floor = 0.9

[initial]
wavefunction = {{ kind = "modes", terms = [{{ k = [0, 0], re = 1.0 }}, {{ k = [1, 0], re = 0.5 }}, {{ k = [-1, 0], re = 0.5 }}] }}
velocity = {{ kind = "zero" }}
density = {{ kind = "constant", value = 1.0 }}

[time]
dt = 0.001
t_end = 2.0
output_interval = 10
"#
    );
    let c = RunConfig::from_toml(&text).unwrap();
    c.validate().unwrap();
    c
}

// 9. Existence-time halt for a strong-coupling configuration.
fn existence_halt() -> Outcome {
    let mut times = Vec::new();
    let mut ok = true;
    let mut notes = Vec::new();
    for lambda in [5.0, 10.0, 20.0] {
        let mut sim = Simulation::new(halt_config(lambda)).unwrap();
        match sim.run() {
            ExitReport::HaltedDensityFloor { t, min_density } => {
                notes.push(format!("Λ={lambda}: halt at t={t:.6} (min ρ {min_density:.6})"));
                times.push(t);
            }
            other => {
                ok = false;
                notes.push(format!("Λ={lambda}: {other}"));
            }
        }
    }
    let monotone = times.len() == 3 && times.windows(2).all(|w| w[1] <= w[0]);
    outcome(ok && monotone, format!("{}; halt time nonincreasing in Λ: {monotone}", notes.join("; ")))
}

// 10. Grönwall monitor on small data.
fn gronwall() -> Outcome {
    let text = r#"
[grid]
resolution = [32, 32]

[model]
coupling = 1.0
interaction = 1.0
viscosity = 0.1

[initial]
seed = 2
wavefunction = { kind = "random_smooth", amplitude = 0.05, decay = 8.0 }
velocity = { kind = "random_smooth", amplitude = 0.05, decay = 8.0 }
density = { kind = "sine_perturbed", mean = 1.0, amplitude = 0.1, wavevector = [1, 0] }

[time]
dt = 0.002
t_end = 1.0
output_interval = 1
"#;
    let c = RunConfig::from_toml(text).unwrap();
    c.validate().unwrap();
    let mut sim = Simulation::new(c).unwrap();
    let report = sim.run();
    let recs = sim.records();
    // the bounds must hold on every prefix of the run
    let mut all_ok = true;
    let mut worst_y = 0.0f64;
    for n in 2..=recs.len() {
        let g = gronwall_monitor(&recs[..n]).unwrap();
        all_ok &= g.x_bound_holds && g.y_bound_holds;
        worst_y = worst_y.max(g.y_integral / g.x0);
    }
    let g = gronwall_monitor(recs).unwrap();
    outcome(
        all_ok && matches!(report, ExitReport::Completed { .. }) && recs.iter().all(|r| r.y_monitor.is_finite()),
        format!(
            "X₀ = {:.6}, max X/X₀ = {:.6} (≤ 2), ∫Y/X₀ = {worst_y:.4e} (≤ 31) over {} rows",
            g.x0,
            g.max_x_ratio,
            recs.len()
        ),
    )
}

// 11. Circulation around a constructed phase singularity.
fn madelung_circulation() -> Outcome {
    let g = Grid::periodic(&[32, 32]).unwrap();
    let trunc = GalerkinTruncation::dealiased(&g);
    let p = ModelParams::default();
    // ψ = sin x + i sin y ≈ x + iy near the origin
    let spec = InitialDataSpec {
        wavefunction: WavefunctionSpec::Modes {
            terms: vec![
                ModeTerm { k: vec![1, 0], re: 0.0, im: -0.5 },
                ModeTerm { k: vec![-1, 0], re: 0.0, im: 0.5 },
                ModeTerm { k: vec![0, 1], re: 0.5, im: 0.0 },
                ModeTerm { k: vec![0, -1], re: -0.5, im: 0.0 },
            ],
        },
        velocity: VelocitySpec::Zero,
        density: DensitySpec::Constant { value: 1.0 },
        seed: 0,
    };
    let psi = build_initial_state(&spec, &g, &trunc, &p).unwrap().psi;
    let c = circulation(&psi, &[0.0, 0.0], 0.5, 256).unwrap();
    let free = circulation(&psi, &[PI / 2.0, PI / 2.0], 0.5, 256).unwrap();
    outcome(
        (c - 2.0 * PI).abs() <= 1e-6,
        format!("∮v_s·dl around the zero at the origin = {c:.12} (2π ± 1e-6, error {:.2e}); around a vortex-free disc {free:.2e}", (c - 2.0 * PI).abs()),
    )
}

// 12. Determinism, resume equivalence and configuration round trip.
fn infrastructure() -> Outcome {
    let text = r#"
[grid]
resolution = [32, 32]

[model]
coupling = 1.0
interaction = 1.0
viscosity = 0.1

[initial]
seed = 9
wavefunction = { kind = "random_smooth", amplitude = 0.4, decay = 6.0 }
velocity = { kind = "random_smooth", amplitude = 0.3, decay = 6.0 }
density = { kind = "mollified", low = 0.7, high = 1.5, width = 0.05 }

[time]
dt = 0.001
t_end = 1.0
output_interval = 20
checkpoint_interval = 500
"#;
    let c = RunConfig::from_toml(text).unwrap();
    c.validate().unwrap();
    let round_trip = RunConfig::from_toml(&c.to_toml()).unwrap() == c
        && RunConfig::from_toml(&RunConfig::default().to_toml()).unwrap() == RunConfig::default();

    let (a, b, r) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_simulation(&c, a.path(), None).unwrap();
    run_simulation(&c, b.path(), None).unwrap();
    let read = |d: &std::path::Path, n: &str| std::fs::read(d.join(n)).unwrap();
    let deterministic = read(a.path(), "diagnostics.csv") == read(b.path(), "diagnostics.csv")
        && read(a.path(), FINAL_CHECKPOINT) == read(b.path(), FINAL_CHECKPOINT);

    run_simulation(&c, r.path(), Some(&a.path().join(checkpoint_name(500)))).unwrap();
    let full = read_diagnostics(&a.path().join("diagnostics.csv")).unwrap();
    let resumed = read_diagnostics(&r.path().join("diagnostics.csv")).unwrap();
    let last_equal = full.last().map(|x| x.values().map(f64::to_bits)) == resumed.last().map(|x| x.values().map(f64::to_bits));
    let state_equal = read(a.path(), FINAL_CHECKPOINT) == read(r.path(), FINAL_CHECKPOINT);
    outcome(
        round_trip && deterministic && last_equal && state_equal,
        format!(
            "config round trip {round_trip}; two runs bit-identical (CSV + checkpoint) {deterministic}; resume at step 500 of 1000: final row bit-identical {last_equal}, final checkpoint identical {state_equal}"
        ),
    )
}

fn main() {
    let suite_start = Instant::now();
    println!("acceptance suite");
    let t = Instant::now();
    let main = coupled_run(1e-3, 1000);
    let shared = Shared {
        main,
        main_time: t.elapsed(),
    };
    type Check<'a> = (&'a str, Option<f64>, Box<dyn Fn() -> Outcome + 'a>);
    let checks: Vec<Check> = vec![
        ("C1 operator structure", Some(5.0), Box::new(operator_structure)),
        ("C2 plane-wave NLS", Some(10.0), Box::new(plane_wave)),
        ("C3 Taylor-Green decay", Some(10.0), Box::new(taylor_green)),
        ("C4 total mass", None, Box::new(|| total_mass(&shared))),
        ("C5 mass monotonicity", None, Box::new(|| mass_monotonicity(&shared))),
        ("C6 energy equality", None, Box::new(|| energy_equality(&shared))),
        ("C7 Navier-Stokes energy (Λ=0)", None, Box::new(ns_energy)),
        ("C8 density oracle", Some(120.0), Box::new(density_oracle_check)),
        ("C9 existence-time halt", None, Box::new(existence_halt)),
        ("C10 Grönwall monitor", None, Box::new(gronwall)),
        ("C11 Madelung circulation", None, Box::new(madelung_circulation)),
        ("C12 infrastructure", None, Box::new(infrastructure)),
    ];
    let mut failed = 0;
    for (name, limit, check) in &checks {
        let t = Instant::now();
        let mut o = check();
        let secs = t.elapsed().as_secs_f64();
        if let Some(limit) = limit {
            if secs >= *limit {
                o.pass = false;
                o.detail.push_str(&format!("; runtime {secs:.2} s exceeds {limit} s"));
            }
        }
        if !o.pass {
            failed += 1;
        }
        println!("{} {name} [{secs:.2} s]: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        checks.len() - failed,
        checks.len(),
        suite_start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Pseudo-spectral semi-Galerkin solver for the Pitaevskii two-fluid model:
//! a nonlinear Schrödinger equation for the superfluid wavefunction coupled
//! through the operator `B` to the inhomogeneous incompressible Navier-Stokes
//! equations for the normal fluid, on a periodic box.

// Index loops mirror the component notation; `!(x > 0.0)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod galerkin;
pub mod grid;
pub mod initial;
pub mod madelung;
pub mod params;
pub mod spectral;
pub mod transport;

pub use coupling::{apply_b, apply_bl, coupling_source, momentum_source};
pub use diagnostics::{
    compute_diagnostics, existence_monitor, gronwall_monitor, total_energy, DiagnosticsRecord, GronwallReport,
    MonitorStatus,
};
pub use error::{Error, Result};
pub use field::{PointEvaluator, SpectralScalarField, VelocityField};
pub use galerkin::{
    assemble_mass_matrix, continuity_rhs, energy_budget, nls_rhs, nse_coeff_rhs, picard_step, rk4_step,
    truncate_state, truncated_coupling_source, DivFreeBasis, EnergyBudget, GalerkinTruncation, PicardOptions, SimState,
};
pub use grid::Grid;
pub use initial::{build_initial_state, DensitySpec, InitialDataSpec, ModeTerm, VelocitySpec, WavefunctionSpec};
pub use madelung::{circulation, madelung, MadelungFields};
pub use params::ModelParams;
pub use spectral::{
    dealias, divergence, fractional_laplacian, gradient, laplacian, leray_project, lp_norm, partial,
    sobolev_norm, to_physical, to_spectral, to_spectral_real,
};
pub use transport::{
    density_oracle, integrate_samples, renormalized_check, trace_characteristics, CharacteristicTrace, FlowHistory,
    FlowSnapshot,
};
pub use num_complex::Complex64;

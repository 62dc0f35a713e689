use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants of the coupled model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Coupling strength `Λ ≥ 0`.
    pub coupling: f64,
    /// Self-interaction `μ > 0`.
    pub interaction: f64,
    /// Viscosity `ν > 0`.
    pub viscosity: f64,
    /// Lower initial density bound `m`.
    pub density_min: f64,
    /// Upper initial density bound `M`.
    pub density_max: f64,
    /// Density floor `ε ∈ (0, m)`.
    pub density_floor: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            coupling: 1.0,
            interaction: 1.0,
            viscosity: 0.1,
            density_min: 0.5,
            density_max: 2.0,
            density_floor: 0.1,
        }
    }
}

impl ModelParams {
    pub fn new(
        coupling: f64,
        interaction: f64,
        viscosity: f64,
        density_min: f64,
        density_max: f64,
        density_floor: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            coupling,
            interaction,
            viscosity,
            density_min,
            density_max,
            density_floor,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks `0 < ε < m ≤ M`, `μ > 0`, `ν > 0`, `Λ ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.coupling,
            self.interaction,
            self.viscosity,
            self.density_min,
            self.density_max,
            self.density_floor,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("model parameters must be finite".into()));
        }
        if self.coupling < 0.0 {
            return Err(Error::Parameter(format!(
                "coupling strength must be nonnegative, got {}",
                self.coupling
            )));
        }
        if self.interaction <= 0.0 {
            return Err(Error::Parameter(format!(
                "interaction must be positive, got {}",
                self.interaction
            )));
        }
        if self.viscosity <= 0.0 {
            return Err(Error::Parameter(format!(
                "viscosity must be positive, got {}",
                self.viscosity
            )));
        }
        if !(self.density_floor > 0.0 && self.density_floor < self.density_min) {
            return Err(Error::Parameter(format!(
                "density floor must satisfy 0 < floor < density_min, got floor {} and density_min {}",
                self.density_floor, self.density_min
            )));
        }
        if self.density_min > self.density_max {
            return Err(Error::Parameter(format!(
                "density bounds must satisfy density_min <= density_max, got {} > {}",
                self.density_min, self.density_max
            )));
        }
        Ok(())
    }

    /// `M' = M + m − ε`, the a priori upper density bound.
    pub fn density_upper_bound(&self) -> f64 {
        self.density_max + self.density_min - self.density_floor
    }
}

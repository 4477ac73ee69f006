use crate::error::{ensure, Result};

/// Reduced Planck constant in the internal unit system.
pub const HBAR: f64 = 1.0;
/// Particle mass in the internal unit system.
pub const MASS: f64 = 1.0;

/// Unit system of a run. Propagators are written for `ħ = m = 1`; a
/// non-natural choice is rejected at configuration time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationUnits {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for SimulationUnits {
    fn default() -> Self {
        Self { hbar: HBAR, mass: MASS }
    }
}

impl SimulationUnits {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        ensure(hbar.is_finite() && hbar > 0.0, "hbar", "must be positive")?;
        ensure(mass.is_finite() && mass > 0.0, "mass", "must be positive")?;
        Ok(Self { hbar, mass })
    }

    pub fn is_natural(&self) -> bool {
        self.hbar == HBAR && self.mass == MASS
    }
}

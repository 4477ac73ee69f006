//! Standalone oracles.

use qdyn_core::potential::{DEFAULT_OMEGA0, DEFAULT_V0};
use qdyn_core::{init_wavefunction, GaussianPacket, Grid1D, Kinetic, Potential, PotentialKind};
use qdyn_observables::{ellipse_transmission_oracle, ObservableRecord, DEFAULT_NORM_FLOOR};
use qdyn_reference::{truncation_order, DiagOracle};

use crate::error::CliError;
use crate::output;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseQuery {
    pub omega0: f64,
    pub v0: f64,
    pub packet: GaussianPacket,
}

impl Default for EllipseQuery {
    fn default() -> Self {
        Self { omega0: DEFAULT_OMEGA0, v0: DEFAULT_V0, packet: GaussianPacket::default() }
    }
}

pub fn ellipse(q: &EllipseQuery) -> f64 {
    ellipse_transmission_oracle(&q.packet, q.omega0, q.v0)
}

/// Minimal Chebyshev order for the argument `x = a·Δt/ħ` and the
/// coefficient magnitudes `|J_k(x)|` up to it.
pub fn bessel(x: f64, cutoff: f64) -> Result<(usize, Vec<f64>), CliError> {
    Ok(truncation_order(x, cutoff)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagQuery {
    pub potential: PotentialKind,
    pub grid_n: usize,
    pub dq: f64,
    pub t: f64,
    pub kinetic: Kinetic,
}

/// Exact propagation of the default packet to `t` by dense diagonalization.
pub fn diag(q: &DiagQuery, density_out: Option<&std::path::Path>) -> Result<ObservableRecord, CliError> {
    let potential = Potential::from_kind(q.potential)?;
    let grid = Grid1D::centered(q.grid_n, q.dq)?;
    let oracle = DiagOracle::new(&potential, &grid, q.kinetic)?;
    let psi = oracle.propagate(&init_wavefunction(&GaussianPacket::default(), &grid)?, q.t)?;
    let density = psi.density();
    if let Some(path) = density_out {
        output::write_density(path, &grid, &density)?;
    }
    Ok(ObservableRecord::from_density(q.t, &grid, &density, Some(oracle.energy(&psi)), DEFAULT_NORM_FLOOR))
}

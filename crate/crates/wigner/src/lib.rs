//! Phase-space propagation of the Wigner function.
//!
//! First order: classical transport of sampled trajectories, deposited on a
//! phase-space grid at output times only. Second order: a deterministic grid
//! scheme adding one momentum jump per step at the interval midpoint.

pub mod ensemble;
pub mod kernel;
pub mod second_order;

pub use ensemble::{
    advance, classical_step, deposit_cic, sample_initial, verlet, DepositStats, InitialWigner, Stencil,
    TrajectoryEnsemble, SAMPLE_CHUNK,
};
pub use kernel::{build_jump_kernel, build_jump_kernel_with, delta_prime, JumpKernel, KernelOptions, DEFAULT_Q_CUT};
pub use second_order::{wigner_second_order, GridSnapshot, SecondOrderOptions, DEFAULT_BLOWUP_FACTOR, DEFAULT_DT};

use qdyn_core::{Execution, GaussianPacket, PhaseSpaceField, PhaseSpaceGrid, Potential, QdynError, Result};

pub const DEFAULT_PARTICLES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderOptions {
    pub n_particles: usize,
    /// Upper bound on the Verlet step; each output interval is split evenly.
    pub dt: f64,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for FirstOrderOptions {
    fn default() -> Self {
        Self { n_particles: DEFAULT_PARTICLES, dt: 0.01, seed: 1, exec: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: PhaseSpaceField,
    pub stats: DepositStats,
}

/// Samples once, transports continuously and deposits at each of `times`.
pub fn wigner_first_order(
    packet: &GaussianPacket,
    potential: &Potential,
    psg: &PhaseSpaceGrid,
    opts: &FirstOrderOptions,
    times: &[f64],
) -> Result<Vec<Snapshot>> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(QdynError::InvalidParameter { name: "dt", reason: format!("{} must be positive", opts.dt) });
    }
    let mut ens = sample_initial(InitialWigner::Gaussian(packet), opts.n_particles, opts.seed, opts.exec)?;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !(t >= now) {
            return Err(QdynError::InvalidParameter { name: "times", reason: "must be ascending and non-negative".into() });
        }
        let span = t - now;
        if span > 0.0 {
            let steps = (span / opts.dt).ceil() as usize;
            advance(&mut ens, potential, span / steps as f64, steps, opts.exec)?;
        }
        now = t;
        let (field, stats) = deposit_cic(&ens, psg, opts.exec);
        out.push(Snapshot { t, field, stats });
    }
    Ok(out)
}

//! Propagation of the quantum tomogram `w̃(X, μ, ν)`.
//!
//! The tomogram is the Radon transform of the Wigner function and is
//! non-negative by construction. Frames `(X, μ, ν)` are moved along the
//! characteristics of a local harmonic expansion of the potential, taken at
//! the positions of auxiliary classical trajectories.

pub mod characteristics;
pub mod frame;
pub mod radon;
pub mod sde;
pub mod stochastic;

pub use characteristics::{
    tomographic_evolve_characteristics, CharacteristicsOptions, TomTrajectory, TomogramSnapshot, DEFAULT_TRAJECTORIES,
    DEFAULT_WINDOW,
};
pub use frame::{harmonic_frame_step, HarmonicFrameMap};
pub use radon::{inverse_radon, kinetic_energy_from_tomogram, radon_transform, Reconstruction, Sinogram, MIN_FRAMES};
pub use sde::{
    cholesky_psd, drift_diffusion_estimate, stochastic_step, DriftDiffusion, PsdFactor, StochasticIncrement,
    StochasticOptions,
};
pub use stochastic::{tomographic_evolve_stochastic, StochasticEvolveOptions};

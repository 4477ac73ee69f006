//! Shared building blocks for one-dimensional wave-packet dynamics.
//!
//! Everything is expressed in natural units with `ħ = m = 1`.

pub mod error;
pub mod exec;
pub mod field;
pub mod grid;
pub mod hamiltonian;
pub mod packet;
pub mod potential;
pub mod units;

pub use error::{QdynError, Result};
pub use exec::Execution;
pub use field::{PhaseSpaceField, WaveField};
pub use grid::{Grid1D, PhaseSpaceGrid};
pub use hamiltonian::{apply_hamiltonian, spectral_bounds, Hamiltonian, Kinetic};
pub use packet::{init_tomogram, init_wavefunction, init_wigner, GaussianPacket, GaussianProfile};
pub use potential::{Potential, PotentialKind, Quadratic};
pub use units::SimulationUnits;

pub use num_complex::Complex64;

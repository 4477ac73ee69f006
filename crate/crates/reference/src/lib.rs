//! Reference propagators: a Chebyshev expansion accurate to a coefficient
//! cutoff, a Crank–Nicolson baseline and a dense-diagonalization oracle.

pub mod bessel;
pub mod chebyshev;
pub mod crank_nicolson;
pub mod diag;

pub use bessel::{bessel_j_sequence, truncation_order};
pub use chebyshev::{
    chebyshev_propagate, chebyshev_step, plan_chebyshev, plan_chebyshev_with, ChebyshevOptions, ChebyshevPlan,
    SpectralBounds,
};
pub use crank_nicolson::{crank_nicolson_propagate, crank_nicolson_step, CrankNicolson};
pub use diag::{diag_propagate, DiagOracle};

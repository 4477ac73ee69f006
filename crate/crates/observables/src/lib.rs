//! Observables and comparison metrics for simulated states.

pub mod metrics;
pub mod oracle;
pub mod reduced;
pub mod wigner;

pub use metrics::{compare_densities, compare_fields, compare_phase_space, FieldMetrics};
pub use oracle::ellipse_transmission_oracle;
pub use reduced::{
    half_axis_integrals, partial_norms, reduced_means, ObservableRecord, PartialNorms, ReducedMeans, DEFAULT_NORM_FLOOR,
};
pub use wigner::wigner_from_wavefunction;

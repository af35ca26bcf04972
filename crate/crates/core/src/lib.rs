//! Entanglement of two freely moving particles prepared in a symmetric
//! Gaussian state with thermally distributed drift velocities.
//!
//! The crate computes the raw second moments of the state, evolves them in
//! free flight, forms the dimensionless variance matrix, extracts its local
//! determinant invariants and applies the Duan separability test. The state
//! turns separable at `T* = hbar² |a12| / (2 m k)`, at every time.
//!
//! [`oracles`] holds independent Monte Carlo, quadrature and closed-form
//! routes to the same quantities, and [`checks`] wraps them as named,
//! runtime-selectable verification checks.

pub mod checks;
pub mod dd;
pub mod error;
pub mod model;
pub mod oracles;
pub mod separability;

pub use error::{Error, Result};
pub use model::{
    evolve_moments, initial_moments, thermal_moments, validate_params, wavefunction_amplitude,
    GaussianParams, Moment, MomentSet, PhysicalConstants, VelocityPair,
};
pub use separability::{
    analyze, covariance_blocks, critical_a12, default_length_scale, det_invariants, duan_separable,
    separability_threshold, standard_form, Analysis, CovarianceBlocks, DetInvariants, DuanDecision,
    SeparabilityReport, StandardForm, DEFAULT_TOLERANCE,
};

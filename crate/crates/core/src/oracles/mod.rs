//! Independent routes to the same numbers: closed forms, a Monte Carlo
//! thermal ensemble and direct quadrature of the wave function.

pub mod closed_form;
pub mod monte_carlo;
pub mod quadrature;
pub mod verify;

pub use closed_form::{closed_forms, ClosedForms};
pub use monte_carlo::{mc_thermal_moments, McConfig, McEstimate, RNG_BLOCK};
pub use quadrature::{gaussian_moment_identity, quadrature_moments, QuadratureSpec, RawMoments};
pub use verify::{scaled_deviation, verify_closed_forms, Deviation, VerificationReport};

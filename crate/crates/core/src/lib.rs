//! Casimir-Lifshitz pressure between parallel plates at rest and in
//! nonrelativistic relative motion, and the Casimir-Polder force on a small
//! particle obtained from the plate result in the dilute-plate limit.
//!
//! Each quantity is available through more than one formulation (real
//! frequency, rearranged real frequency, imaginary-frequency Matsubara sums,
//! analytic versus finite-difference dilute limits) so that results can be
//! checked against each other.

pub mod constants;
pub mod materials;
pub mod optics;
pub mod quadrature;
pub mod error;
pub mod lifshitz_static;
pub mod lifshitz_dynamic;
pub mod polder_transition;
pub mod cli;

pub use error::{Error, Result};

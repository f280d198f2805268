//! Casimir and van der Waals forces between real metals computed from
//! optical data with Lifshitz theory.

pub mod constants;
pub mod optical_data;
pub mod permittivity;
pub mod quadrature;
pub mod lifshitz;
pub mod warning;
pub mod perturbation;
pub mod analysis;

//! Exact-arithmetic verification of the linear isotropic indeterminate couple
//! stress model: stresses, couple stresses, hyperstresses and boundary
//! tractions computed from polynomial displacement fields on level-set
//! surfaces, with a catalogue of identity checks.

pub mod boundary_tractions;
pub mod config;
pub mod constitutive;
pub mod identity_suite;
pub mod poly_fields;
pub mod report;
pub mod scalar;
pub mod surface_geom;
pub mod tensor_core;

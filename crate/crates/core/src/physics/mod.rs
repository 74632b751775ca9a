//! Porosity, coefficients, stabilization and manufactured cases.

pub mod cases;
pub mod flux;
pub mod porosity;
pub mod stabilization;

pub use cases::{
    builtin_case, verify_case_residual, verify_case_residual_in, CaseKind, CaseParams, ExactSample,
    ManufacturedCase, Regularity, CASE_NAMES,
};
pub use flux::{flux_eigen, flux_jacobian, FluxEigen};
pub use porosity::{eval_coefficients, CoefficientSample, PorosityField, PorosityModel};
pub use stabilization::{eval_tau, FaceContext, PositiveRule, StabilizationPolicy};

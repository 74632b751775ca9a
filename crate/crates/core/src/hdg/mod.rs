//! Hybridizable discontinuous Galerkin solver.

mod diagnostics;
mod local;
mod postprocess;
mod problem;
mod solver;
mod space;

pub use diagnostics::{MonolithicSystem, MONOLITHIC_ELEMENT_LIMIT};
pub use local::{Condensed, LocalSystem};
pub use postprocess::{
    l2_projection, post_process_fluid, post_process_scaled, recover_unscaled, ElementField,
};
pub use problem::{FaceData, HdgProblem, InterfaceTau, Rhs, SolverOptions, TauLength};
pub use solver::{solve, HdgSolution, SolveInfo, TraceSystem};
pub use space::{ElementQuadrature, Space};

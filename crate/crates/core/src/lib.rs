//! Hybridized discontinuous Galerkin solver for the scaled degenerate elliptic
//! equation of two-phase mixtures.

pub mod analysis;
pub mod config;
pub mod discretization;
pub mod error;
pub mod hdg;
pub mod linalg;
pub mod mesh;
pub mod output;
pub mod physics;
pub mod verify;

pub use error::{Error, Result};

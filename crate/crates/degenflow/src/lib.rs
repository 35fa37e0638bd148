//! Finite-volume simulation and entropy-solution verification for mixed
//! Dirichlet/Neumann problems of anisotropic degenerate parabolic-hyperbolic
//! equations on a product domain Ω = Ω'×Ω''.
//!
//! The core is generic over [`Scalar`] (`f32`, `f64`); the aliases below fix `f64`.

pub mod artifact;
pub mod cli;
pub mod config;
pub mod domain;
pub mod entropy;
pub mod field;
pub mod model;
pub mod scalar;
pub mod solver;
pub mod testfn;
pub mod trace;
pub mod verify;

pub use scalar::Scalar;

pub type Grid64 = domain::Grid<f64>;
pub type GridSpec64 = domain::GridSpec<f64>;
pub type Field64 = field::Field<f64>;
pub type ProblemSpec64 = model::ProblemSpec<f64>;
pub type SolverConfig64 = solver::SolverConfig<f64>;
pub type RunArtifacts64 = solver::RunArtifacts<f64>;
pub type Grid32 = domain::Grid<f32>;
pub type Field32 = field::Field<f32>;
pub type ProblemSpec32 = model::ProblemSpec<f32>;

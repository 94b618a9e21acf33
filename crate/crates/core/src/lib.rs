//! Deflated and augmented Krylov subspace methods.
//!
//! The crate provides dense complex linear algebra ([`linalg`]), a linear
//! operator abstraction ([`operator`]), the deflation projections
//! `P_B`, `Q_B`, `M_B` ([`projection`]), base CG / MINRES / GMRES iterations
//! ([`solvers`]), the deflated method variants built from them
//! ([`deflated`]), breakdown and spectral diagnostics ([`analysis`]) and
//! deterministic test problem generators ([`problems`]).

pub mod analysis;
pub mod deflated;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod problems;
pub mod projection;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector, C64};

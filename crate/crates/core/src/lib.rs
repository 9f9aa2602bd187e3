//! Finite-volume solver for the kinetic Fokker-Planck equation with a
//! confining potential `V = ⟨x⟩^α/α` and sub-exponential or polynomial
//! velocity equilibria. The crate also evaluates Lyapunov functions in
//! closed form and checks their drift inequality numerically.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod lyapunov;
pub mod model;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};

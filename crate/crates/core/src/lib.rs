//! Numerical laboratory for the Navier-slip thin-film equation
//! `x∂ₜu + p(D)u = 𝓝(u)` written in hodograph variables, `D = x∂ₓ = ∂ₛ`.

pub mod error;
pub mod exec;
pub mod exponents;
pub mod hodograph;

pub use error::{Error, Result};
pub mod linalg;
pub mod linear_solver;
pub mod loggrid;
pub mod nonlinear_solver;
pub mod operators;

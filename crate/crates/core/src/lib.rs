//! Guaranteed-precision solver for polynomial initial value problems
//! `y' = p(y)`, `y(t0) = y0`.
//!
//! Given a horizon `T`, a precision exponent `mu` and a bound `Y` on the
//! solution, [`solver::solve_guaranteed`] returns `y(t0 + T)` within
//! `e^(-mu)` using a fixed-step Taylor method whose order and step count are
//! chosen from explicit a priori bounds.

pub mod bounds;
pub mod error;
pub mod exec;
pub mod numeric;
pub mod poly;
pub mod solver;
pub mod taylor;

pub use error::{Error, Result};
pub use exec::Execution;
pub use num_bigint::BigInt;
pub use num_rational::BigRational;

//! Taylor coefficients of solutions of `y' = p(y)`.
//!
//! The coefficients are obtained by lifting the solution as a power series
//! one order at a time (see [`program`]), which yields the same values as
//! repeated symbolic differentiation of `p(y)` without ever forming the
//! derivative polynomials.

pub mod program;
pub mod scalar;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numeric::{factorial, pow, round_to_precision, PrecisionSpec};
use crate::poly::PolyVector;

pub use program::SeriesProgram;
pub use scalar::{Ball, BallCtx, SeriesScalar};

/// An instance `y' = p(y), y(t0) = y0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivpProblem {
    pub p: PolyVector,
    pub t0: BigRational,
    pub y0: Vec<BigRational>,
}

impl PivpProblem {
    pub fn new(p: PolyVector, t0: BigRational, y0: Vec<BigRational>) -> Result<Self> {
        if y0.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), found: y0.len() });
        }
        Ok(Self { p, t0, y0 })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }
}

/// Taylor coefficients `c_0, ..., c_{n-1}` with `c_j = y^(j)(a) / j!`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaylorJet {
    coeffs: Vec<Vec<BigRational>>,
}

impl TaylorJet {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn coeff(&self, j: usize) -> &[BigRational] {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[Vec<BigRational>] {
        &self.coeffs
    }

    /// `y^(j)(a) = j! c_j`.
    pub fn derivative(&self, j: usize) -> Vec<BigRational> {
        let f = BigRational::from_integer(factorial(j as u64));
        self.coeffs[j].iter().map(|c| c * &f).collect()
    }

    pub fn truncated(&self, m: usize) -> TaylorJet {
        TaylorJet { coeffs: self.coeffs[..m].to_vec() }
    }

    /// The Taylor polynomial `sum_j c_j t^j` at offset `t`.
    pub fn eval(&self, t: &BigRational) -> Vec<BigRational> {
        let mut acc = vec![BigRational::zero(); self.dim()];
        for c in self.coeffs.iter().rev() {
            for (a, ci) in acc.iter_mut().zip(c) {
                *a = &*a * t + ci;
            }
        }
        acc
    }
}

/// Exact jet of order `n` of the solution of `y' = p(y)`, `y(0) = z`.
pub fn ode_taylor_jet(p: &PolyVector, z: &[BigRational], n: usize) -> Result<TaylorJet> {
    if z.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: z.len() });
    }
    if n == 0 {
        return Err(Error::ZeroCount { name: "jet order" });
    }
    let program = SeriesProgram::compile(p);
    let coeffs = program.lift(z, n, &BigRational::one(), &());
    Ok(TaylorJet { coeffs })
}

/// `y^(n)(0)` to within `e^(-xi)`, for `y' = p(y)`, `y(0) = z`.
///
/// The derivative is computed exactly and then rounded to a dyadic.
pub fn nth_deriv(p: &PolyVector, z: &[BigRational], n: usize, xi: &PrecisionSpec) -> Result<Vec<BigRational>> {
    let jet = ode_taylor_jet(p, z, n + 1)?;
    Ok(jet.derivative(n).iter().map(|v| round_to_precision(v, xi)).collect())
}

/// `d^n n! max(1, k! sigma(p) max(1, Y^k))^n`, a bound on `||y^(n)(t)||_inf`
/// wherever `||y(t)||_inf <= Y`.
pub fn deriv_norm_bound(p: &PolyVector, y_bound: &BigRational, n: u64) -> BigRational {
    let d = BigRational::from_integer(BigInt::from(p.dim()));
    let k = p.degree() as u64;
    let yk = pow(&y_bound.abs(), k).max(BigRational::one());
    let inner = (BigRational::from_integer(factorial(k)) * p.sigma() * yk).max(BigRational::one());
    pow(&d, n) * BigRational::from_integer(factorial(n)) * pow(&inner, n)
}

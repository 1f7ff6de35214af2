//! Coefficient arithmetics for truncated power series.
//!
//! [`BigRational`] gives exact jets. [`Ball`] is fixed-point midpoint-radius
//! arithmetic: a value `(mid, rad)` at `bits` fractional bits encloses every
//! real in `[(mid - rad) 2^-bits, (mid + rad) 2^-bits]`. Rounding goes into
//! the radius, so any computation over balls encloses the exact result.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exec::Execution;

/// Coefficient type of a series.
pub trait SeriesScalar: Clone + Send + Sync {
    type Ctx: Sync;

    fn zero_in(ctx: &Self::Ctx) -> Self;
    fn from_rational(q: &BigRational, ctx: &Self::Ctx) -> Self;
    fn add_assign(&mut self, other: &Self);
    /// `sum_{i=0}^{j} a[i] * b[j - i]`
    fn convolve(a: &[Self], b: &[Self], j: usize, ctx: &Self::Ctx) -> Self;
    /// `sum_{i=0}^{j} a[i] * a[j - i]`
    fn square_coeff(a: &[Self], j: usize, ctx: &Self::Ctx) -> Self {
        Self::convolve(a, a, j, ctx)
    }
    fn scale(&self, q: &BigRational, ctx: &Self::Ctx) -> Self;
}

impl SeriesScalar for BigRational {
    type Ctx = ();

    fn zero_in(_: &()) -> Self {
        BigRational::zero()
    }

    fn from_rational(q: &BigRational, _: &()) -> Self {
        q.clone()
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn convolve(a: &[Self], b: &[Self], j: usize, _: &()) -> Self {
        (0..=j).map(|i| &a[i] * &b[j - i]).sum()
    }

    fn scale(&self, q: &BigRational, _: &()) -> Self {
        self * q
    }
}

/// Series lengths from which a convolution is split across threads.
const PARALLEL_CONVOLUTION_LEN: usize = 160;

#[derive(Debug, Clone, Copy)]
pub struct BallCtx {
    pub bits: u64,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub mid: BigInt,
    pub rad: BigUint,
}

impl Ball {
    pub fn exact(mid: BigInt) -> Self {
        Self { mid, rad: BigUint::zero() }
    }

    /// Exact midpoint `mid * 2^-bits`.
    pub fn mid_rational(&self, bits: u64) -> BigRational {
        crate::numeric::dyadic(self.mid.clone(), bits)
    }

    /// `(mid, rad)` from exact products at `2 * bits` fractional bits.
    fn from_double_width(mid: BigInt, rad: BigUint, bits: u64) -> Self {
        let shift = bits as usize;
        let floor = &mid >> shift;
        let inexact = (&floor << shift) != mid;
        let mut r = ceil_shift(&rad, shift);
        if inexact {
            r += 1u32;
        }
        Self { mid: floor, rad: r }
    }
}

fn ceil_shift(x: &BigUint, shift: usize) -> BigUint {
    if x.is_zero() {
        return BigUint::zero();
    }
    ((x - 1u32) >> shift) + 1u32
}

fn accumulate(acc: &mut (BigInt, BigUint), a: &Ball, b: &Ball) {
    acc.0 += &a.mid * &b.mid;
    if !b.rad.is_zero() {
        acc.1 += a.mid.magnitude() * &b.rad;
    }
    if !a.rad.is_zero() {
        acc.1 += &a.rad * b.mid.magnitude();
        if !b.rad.is_zero() {
            acc.1 += &a.rad * &b.rad;
        }
    }
}

fn sum_pairs(pairs: impl Iterator<Item = (usize, usize)>, a: &[Ball], b: &[Ball]) -> (BigInt, BigUint) {
    let mut acc = (BigInt::zero(), BigUint::zero());
    for (i, k) in pairs {
        accumulate(&mut acc, &a[i], &b[k]);
    }
    acc
}

fn merge(mut x: (BigInt, BigUint), y: (BigInt, BigUint)) -> (BigInt, BigUint) {
    x.0 += y.0;
    x.1 += y.1;
    x
}

impl SeriesScalar for Ball {
    type Ctx = BallCtx;

    fn zero_in(_: &BallCtx) -> Self {
        Ball::exact(BigInt::zero())
    }

    fn from_rational(q: &BigRational, ctx: &BallCtx) -> Self {
        let (mid, rem) = (q.numer() << ctx.bits as usize).div_mod_floor(q.denom());
        let rad = if rem.is_zero() { BigUint::zero() } else { BigUint::one() };
        Ball { mid, rad }
    }

    fn add_assign(&mut self, other: &Self) {
        self.mid += &other.mid;
        self.rad += &other.rad;
    }

    fn convolve(a: &[Self], b: &[Self], j: usize, ctx: &BallCtx) -> Self {
        let (mid, rad) = if j + 1 >= PARALLEL_CONVOLUTION_LEN {
            ctx.execution.chunked_reduce(j + 1, |range| sum_pairs(range.map(|i| (i, j - i)), a, b), merge)
        } else {
            sum_pairs((0..=j).map(|i| (i, j - i)), a, b)
        };
        Ball::from_double_width(mid, rad, ctx.bits)
    }

    fn square_coeff(a: &[Self], j: usize, ctx: &BallCtx) -> Self {
        // pairs (i, j - i) with i < j - i appear twice
        let half = j.div_ceil(2);
        let (mut mid, mut rad) = if half >= PARALLEL_CONVOLUTION_LEN / 2 {
            ctx.execution.chunked_reduce(half, |range| sum_pairs(range.map(|i| (i, j - i)), a, a), merge)
        } else {
            sum_pairs((0..half).map(|i| (i, j - i)), a, a)
        };
        mid <<= 1;
        rad <<= 1;
        if j.is_multiple_of(2) {
            let mut acc = (mid, rad);
            accumulate(&mut acc, &a[j / 2], &a[j / 2]);
            (mid, rad) = acc;
        }
        Ball::from_double_width(mid, rad, ctx.bits)
    }

    fn scale(&self, q: &BigRational, _: &BallCtx) -> Self {
        let (n, d) = (q.numer(), q.denom());
        let prod = &self.mid * n;
        let rad_prod = &self.rad * n.magnitude();
        if d.is_one() {
            return Ball { mid: prod, rad: rad_prod };
        }
        let (mid, rem) = prod.div_mod_floor(d);
        let dm = d.magnitude();
        let mut rad = (&rad_prod + dm - 1u32) / dm;
        if !rem.is_zero() {
            rad += 1u32;
        }
        Ball { mid, rad }
    }
}

impl Ball {
    pub fn abs_upper(&self) -> BigUint {
        self.mid.magnitude() + &self.rad
    }

    pub fn sign(&self) -> Sign {
        self.mid.sign()
    }

    pub fn is_negative(&self) -> bool {
        self.mid.is_negative()
    }
}

//! Exact rationals, dyadic rounding and one-sided transcendental bounds.
//!
//! Everything here works on [`BigRational`] values. The only irrational
//! quantities the solver ever touches are `e`, `ln` and `exp`, and those are
//! produced as rational enclosures whose direction is always stated.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default relative precision (in bits) of the exponential enclosures used by
/// the bound calculators.
pub const ENCLOSURE_BITS: u64 = 96;

fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(int(n), int(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(int(n))
}

/// `ln 2` rounded down to 18 decimals.
pub fn ln2_lower() -> BigRational {
    BigRational::new(int(693_147_180_559_945_309), int(1_000_000_000_000_000_000))
}

/// `ln 2` rounded up to 18 decimals.
pub fn ln2_upper() -> BigRational {
    BigRational::new(int(693_147_180_559_945_310), int(1_000_000_000_000_000_000))
}

/// Target absolute error `e^(-xi)` on the natural-log scale.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrecisionSpec {
    xi: BigRational,
}

impl PrecisionSpec {
    pub fn new(xi: BigRational) -> Result<Self> {
        if xi.is_negative() {
            return Err(Error::NegativePrecision(xi));
        }
        Ok(Self { xi })
    }

    pub fn from_integer(xi: u64) -> Self {
        Self { xi: BigRational::from_integer(BigInt::from(xi)) }
    }

    pub fn xi(&self) -> &BigRational {
        &self.xi
    }

    /// Number of fractional bits used by [`round_to_precision`]:
    /// `ceil(xi / ln2_lower) + 1`.
    pub fn bits(&self) -> u64 {
        ceil_u64(&(&self.xi / ln2_lower())) + 1
    }

    /// `2^(-bits)`, which never exceeds `e^(-xi)`.
    pub fn dyadic_tolerance(&self) -> BigRational {
        dyadic(BigInt::one(), self.bits() - 1)
    }

    pub fn tightened(&self, extra: &BigRational) -> Self {
        Self { xi: &self.xi + extra }
    }
}

impl fmt::Display for PrecisionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e^-({})", self.xi)
    }
}

/// `mantissa / 2^bits`.
pub fn dyadic(mantissa: BigInt, bits: u64) -> BigRational {
    BigRational::new(mantissa, BigInt::one() << bits as usize)
}

/// `floor(x * 2^bits)`.
pub fn floor_scaled(x: &BigRational, bits: u64) -> BigInt {
    (x.numer() << bits as usize).div_floor(x.denom())
}

/// `ceil(x * 2^bits)`.
pub fn ceil_scaled(x: &BigRational, bits: u64) -> BigInt {
    -((-x.numer() << bits as usize).div_floor(x.denom()))
}

pub fn ceil_u64(x: &BigRational) -> u64 {
    x.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
}

pub fn is_dyadic(x: &BigRational) -> bool {
    let d = x.denom();
    (d & (d - BigInt::one())).is_zero()
}

/// Largest bit length among numerator and denominator.
pub fn bit_size(x: &BigRational) -> u64 {
    x.numer().bits().max(x.denom().bits())
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn pow(x: &BigRational, n: u64) -> BigRational {
    num_traits::pow(x.clone(), n as usize)
}

/// Rounds to the nearest multiple of `2^(-prec.bits())`, ties upward.
///
/// The error is at most `2^(-bits-1) <= e^(-xi) / 2`.
pub fn round_to_precision(x: &BigRational, prec: &PrecisionSpec) -> BigRational {
    let bits = prec.bits();
    if is_dyadic(x) && x.denom().bits() <= bits + 1 {
        return x.clone();
    }
    let twice = floor_scaled(x, bits + 1);
    let rounded = (twice + BigInt::one()).div_floor(&int(2));
    dyadic(rounded, bits)
}

/// A rational upper bound on `e`, with `e < u < e + 10^-9`.
pub fn e_upper() -> BigRational {
    BigRational::new(int(2_718_281_829), int(1_000_000_000))
}

/// A rational upper bound on `ln x` within `10^-15` of the true value.
pub fn ln_upper(x: &BigRational) -> Result<BigRational> {
    if *x < BigRational::one() {
        return Err(Error::LogArgumentBelowOne(x.clone()));
    }
    // x = 2^m * r with r in [1, 2)
    let mut m = x.numer().bits() as i64 - x.denom().bits() as i64;
    let two = rat_int(2);
    let mut r = x / pow2(m);
    while r >= two {
        r /= &two;
        m += 1;
    }
    while r < BigRational::one() {
        r *= &two;
        m -= 1;
    }
    const W: u64 = 96;
    // ln r = 2 atanh(z), z = (r - 1)/(r + 1) in [0, 1/3)
    let z = (&r - BigRational::one()) / (&r + BigRational::one());
    let z_hi = ceil_scaled(&z, W);
    let z2_hi = ceil_div_shift(&(&z_hi * &z_hi), W);
    let mut power = z_hi.clone();
    let mut sum = BigInt::zero();
    let mut i = 0u64;
    // upward-rounded powers stay >= 1 ulp; stop once they reach it
    while power > BigInt::one() {
        sum += ceil_div(&power, &BigInt::from(2 * i + 1));
        power = ceil_div_shift(&(&power * &z2_hi), W);
        i += 1;
    }
    // tail: power / (1 - z^2) <= power * 9/8
    sum += ceil_div(&(&power * BigInt::from(9)), &BigInt::from(8));
    let series = dyadic(sum * 2, W);
    Ok(ln2_upper() * rat_int(m) + series)
}

fn pow2(m: i64) -> BigRational {
    if m >= 0 {
        BigRational::from_integer(BigInt::one() << m as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-m) as usize)
    }
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn ceil_div_shift(a: &BigInt, bits: u64) -> BigInt {
    -((-a) >> bits as usize)
}

/// A closed rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Enclosure {
    pub fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    /// Largest possible `|x - v|` over `v` in the interval.
    pub fn max_distance(&self, x: &BigRational) -> BigRational {
        (x - &self.lo).abs().max((x - &self.hi).abs())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn neg(&self) -> Self {
        Self { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let c = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Self { lo, hi }
    }

    /// Reciprocal of an interval not containing zero.
    pub fn recip(&self) -> Self {
        assert!(self.lo.is_positive() || self.hi.is_negative(), "reciprocal of an interval containing zero");
        Self { lo: self.hi.recip(), hi: self.lo.recip() }
    }

    /// Outward rounding to `bits` significant bits.
    pub fn rounded(&self, bits: u64) -> Self {
        Self { lo: round_down_rel(&self.lo, bits), hi: round_up_rel(&self.hi, bits) }
    }
}

fn magnitude_shift(x: &BigRational, bits: u64) -> i64 {
    let e = x.numer().bits() as i64 - x.denom().bits() as i64;
    bits as i64 + 2 - e
}

fn scale_pow2(x: &BigRational, f: i64) -> BigRational {
    x * pow2(f)
}

/// Rounds down to about `bits` significant bits.
pub fn round_down_rel(x: &BigRational, bits: u64) -> BigRational {
    if x.is_zero() {
        return x.clone();
    }
    let f = magnitude_shift(x, bits);
    let scaled = scale_pow2(x, f).floor();
    scale_pow2(&scaled, -f)
}

/// Rounds up to about `bits` significant bits.
pub fn round_up_rel(x: &BigRational, bits: u64) -> BigRational {
    if x.is_zero() {
        return x.clone();
    }
    let f = magnitude_shift(x, bits);
    let scaled = scale_pow2(x, f).ceil();
    scale_pow2(&scaled, -f)
}

/// Rational enclosure of `exp(x)` with roughly `bits` bits of relative
/// accuracy. Terms of the series are rounded outward and the truncated tail
/// is added to the upper end.
pub fn exp_enclosure(x: &BigRational, bits: u64) -> Enclosure {
    if x.is_zero() {
        return Enclosure::point(BigRational::one());
    }
    if x.is_negative() {
        return exp_enclosure(&-x, bits + 2).recip().rounded(bits + 2);
    }
    let half = rat(1, 2);
    let mut r = 0u64;
    let mut y = x.clone();
    while y > half {
        y /= rat_int(2);
        r += 1;
    }
    let w = bits + r + 24;
    let one = BigInt::one() << w as usize;
    let y_lo = floor_scaled(&y, w);
    let y_hi = ceil_scaled(&y, w);

    let mut lo_sum = one.clone();
    let mut lo_term = one.clone();
    let mut hi_sum = one.clone();
    let mut hi_term = one.clone();
    let mut i = 1u64;
    while !hi_term.is_zero() && hi_term > BigInt::one() {
        let k = BigInt::from(i);
        lo_term = ((&lo_term * &y_lo) >> w as usize) / &k;
        hi_term = ceil_div(&ceil_div_shift(&(&hi_term * &y_hi), w), &k);
        lo_sum += &lo_term;
        hi_sum += &hi_term;
        i += 1;
    }
    // remaining tail is geometric with ratio <= 1/2 relative to the last term
    hi_sum += &hi_term + BigInt::one();

    for _ in 0..r {
        lo_sum = (&lo_sum * &lo_sum) >> w as usize;
        hi_sum = ceil_div_shift(&(&hi_sum * &hi_sum), w);
    }
    Enclosure { lo: dyadic(lo_sum, w), hi: dyadic(hi_sum, w) }.rounded(bits + 2)
}

pub fn exp_upper(x: &BigRational) -> BigRational {
    exp_enclosure(x, ENCLOSURE_BITS).hi
}

pub fn exp_lower(x: &BigRational) -> BigRational {
    exp_enclosure(x, ENCLOSURE_BITS).lo
}

/// `true` only if `q <= e^(-xi)` is certain.
pub fn certainly_le_exp_neg(q: &BigRational, xi: &BigRational) -> bool {
    *q <= exp_lower(&-xi)
}

/// A rational upper bound on `e^(-xi)` for presentation of guarantees.
pub fn exp_neg_upper(xi: &BigRational) -> BigRational {
    exp_upper(&-xi)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

/// Parses `123`, `-7/3` or `+4`. No decimal point, no whitespace.
pub fn parse_rational(s: &str) -> std::result::Result<BigRational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (n, d) = match body.split_once('/') {
        Some((n, d)) => (n, d),
        None => (body, "1"),
    };
    if !digits(n) || !digits(d) {
        return Err(err());
    }
    let n = BigInt::from_str(n).map_err(|_| err())?;
    let d = BigInt::from_str(d).map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    let q = BigRational::new(n, d);
    Ok(if neg { -q } else { q })
}

/// Decimal presentation of `q` rounded to nearest with `digits` fractional
/// digits.
pub fn to_decimal(q: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = q * BigRational::from_integer(scale.clone());
    let n = (scaled + rat(1, 2)).floor().to_integer();
    let (sign, mag) = match n.sign() {
        Sign::Minus => ("-", -n),
        _ => ("", n),
    };
    let (int_part, frac) = mag.div_rem(&scale);
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    let frac = frac.to_string();
    format!("{sign}{int_part}.{}{frac}", "0".repeat(digits - frac.len()))
}

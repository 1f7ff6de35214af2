//! Error bounds: divergence of perturbed solutions, the self-referential
//! exponential fixed point, combined Taylor and perturbation error, and
//! error accumulation across steps.
//!
//! Every bound is evaluated in exact rational arithmetic, with exponentials
//! replaced by upper (or, for hypotheses, conservative) rational enclosures.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::{
    certainly_le_exp_neg, dyadic, e_upper, exp_enclosure, exp_upper, factorial, pow, rat, rat_int, round_to_precision,
    Enclosure, PrecisionSpec, ENCLOSURE_BITS,
};

fn nonneg(name: &'static str, value: &BigRational) -> Result<()> {
    if value.is_negative() {
        return Err(Error::Negative { name, value: value.clone() });
    }
    Ok(())
}

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Inputs of the divergence estimate between two solutions started at
/// `y0` and `z0` with `||y0 - z0|| = eps0`, over a time span `dt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceQuery {
    pub k: u32,
    pub sigma_p: BigRational,
    pub y_bound: BigRational,
    pub dt: BigRational,
    pub eps0: BigRational,
    /// Target bound on the divergence, at most 1/3.
    pub mu: BigRational,
}

impl DivergenceQuery {
    pub fn new(
        k: u32,
        sigma_p: BigRational,
        y_bound: BigRational,
        dt: BigRational,
        eps0: BigRational,
        mu: BigRational,
    ) -> Result<Self> {
        nonneg("sigma_p", &sigma_p)?;
        nonneg("y_bound", &y_bound)?;
        nonneg("dt", &dt)?;
        nonneg("eps0", &eps0)?;
        nonneg("mu", &mu)?;
        if mu > rat(1, 3) {
            return Err(Error::Negative { name: "1/3 - mu", value: rat(1, 3) - mu });
        }
        Ok(Self { k, sigma_p, y_bound, dt, eps0, mu })
    }

    /// `k 4^k sigma_p dt (1 + Y^(k-1))`
    fn hypothesis_exponent(&self) -> BigRational {
        if self.k == 0 {
            return BigRational::zero();
        }
        let k = self.k as u64;
        int(k) * int(4u64.pow(self.k)) * &self.sigma_p * &self.dt * (BigRational::one() + pow(&self.y_bound, k - 1))
    }

    /// `k (2 + Y)^(k-1) sigma_p dt`
    fn growth_exponent(&self) -> BigRational {
        if self.k == 0 {
            return BigRational::zero();
        }
        let k = self.k as u64;
        int(k) * pow(&(rat_int(2) + &self.y_bound), k - 1) * &self.sigma_p * &self.dt
    }
}

/// `eps0 exp(k 4^k sigma_p dt (1 + Y^(k-1))) <= mu`, decided with an upper
/// enclosure of the exponential. A `true` answer is always correct.
pub fn divergence_hypothesis_holds(q: &DivergenceQuery) -> bool {
    holds_with(q, &q.mu)
}

fn holds_with(q: &DivergenceQuery, mu: &BigRational) -> bool {
    if q.eps0.is_zero() {
        return true;
    }
    &q.eps0 * exp_upper(&q.hypothesis_exponent()) <= *mu
}

/// Upper bound on `||z(t) - y(t)||`: `eps0 exp(k (2 + Y)^(k-1) sigma_p dt)`.
///
/// Requires the divergence hypothesis at level 1/3.
pub fn divergence_bound(q: &DivergenceQuery) -> Result<BigRational> {
    if !holds_with(q, &rat(1, 3)) {
        return Err(Error::DivergenceHypothesis);
    }
    Ok(divergence_bound_unchecked(q))
}

/// The divergence formula without checking its hypothesis.
pub fn divergence_bound_unchecked(q: &DivergenceQuery) -> BigRational {
    if q.eps0.is_zero() {
        return BigRational::zero();
    }
    &q.eps0 * exp_upper(&q.growth_exponent())
}

/// `w e^w - x` enclosed at `bits` relative precision.
fn w_residual(w: &BigRational, x: &BigRational, bits: u64) -> Enclosure {
    let e = exp_enclosure(w, bits);
    Enclosure::point(w.clone()).mul(&e).add(&Enclosure::point(-x))
}

/// Sign of `w e^w - x`, refining the enclosure as needed. `None` when the
/// sign is still undecided at the precision cap.
fn w_sign(w: &BigRational, x: &BigRational, bits: u64) -> Option<std::cmp::Ordering> {
    let mut b = bits;
    while b <= 8 * bits.max(64) {
        let r = w_residual(w, x, b);
        if r.hi.is_negative() {
            return Some(std::cmp::Ordering::Less);
        }
        if r.lo.is_positive() {
            return Some(std::cmp::Ordering::Greater);
        }
        if r.lo.is_zero() && r.hi.is_zero() {
            return Some(std::cmp::Ordering::Equal);
        }
        b *= 2;
    }
    None
}

fn f64_guess(x: f64) -> f64 {
    let mut w = if x < 1.0 { 0.0 } else { x.ln() - x.ln().ln().max(0.0) };
    if x < -0.3 {
        w = -1.0 + (2.0 * (1.0 + std::f64::consts::E * x)).max(0.0).sqrt();
    }
    for _ in 0..50 {
        let e = w.exp();
        let f = w * e - x;
        let d = e * (w + 1.0);
        if d.abs() < 1e-300 {
            break;
        }
        let step = f / (d - (w + 2.0) * f / (2.0 * w + 2.0));
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.abs() < 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

/// Principal branch `W(x)` to within `e^(-xi)`, certified by bisection on
/// the sign of `w e^w - x`.
pub fn lambert_w(x: &BigRational, prec: &PrecisionSpec) -> Result<BigRational> {
    if x.is_zero() {
        return Ok(BigRational::zero());
    }
    if x.is_negative() {
        // x < -1/e iff x e < -1
        let mut bits = ENCLOSURE_BITS;
        loop {
            let e = exp_enclosure(&BigRational::one(), bits);
            if x * &e.lo < -BigRational::one() {
                return Err(Error::LambertDomain(x.clone()));
            }
            if x * &e.hi >= -BigRational::one() {
                break;
            }
            if bits > 4096 {
                return Err(Error::LambertDomain(x.clone()));
            }
            bits *= 2;
        }
    }
    let target_bits = prec.bits();
    let tol = dyadic(BigInt::one(), target_bits);
    let work = target_bits + 24;

    let (mut lo, mut hi) = if x.is_negative() {
        (rat_int(-1), BigRational::zero())
    } else {
        (BigRational::zero(), x.clone().max(BigRational::one()))
    };
    // narrow the bracket around a floating-point estimate when it certifies
    if let Some(xf) = x.to_f64().filter(|v| v.is_finite()) {
        let g = f64_guess(xf);
        if g.is_finite() {
            let spread = 1e-9 * (1.0 + g.abs());
            let a = BigRational::from_float(g - spread);
            let b = BigRational::from_float(g + spread);
            if let (Some(a), Some(b)) = (a, b) {
                if a > lo && b < hi {
                    let sa = w_sign(&a, x, work);
                    let sb = w_sign(&b, x, work);
                    if sa == Some(std::cmp::Ordering::Less) && sb == Some(std::cmp::Ordering::Greater) {
                        lo = a;
                        hi = b;
                    }
                }
            }
        }
    }
    let two = rat_int(2);
    while &hi - &lo > &tol * &two {
        let mid = (&lo + &hi) / &two;
        match w_sign(&mid, x, work) {
            Some(std::cmp::Ordering::Less) => lo = mid,
            Some(std::cmp::Ordering::Greater) => hi = mid,
            _ => return Ok(mid),
        }
    }
    Ok((lo + hi) / two)
}

/// Smallest solution of `x = alpha e^(beta x^k)` when `k beta alpha^k <= 1/3`,
/// via `x = alpha exp(-W(-k beta alpha^k) / k)`. The returned `x` has
/// residual at most `e^(-xi)` and satisfies `x <= 4 alpha`.
pub fn solve_exp_fixed_point(
    alpha: &BigRational,
    beta: &BigRational,
    k: u32,
    prec: &PrecisionSpec,
) -> Result<BigRational> {
    nonneg("alpha", alpha)?;
    nonneg("beta", beta)?;
    if k == 0 {
        return Err(Error::ZeroCount { name: "k" });
    }
    let s = int(k as u64) * beta * pow(alpha, k as u64);
    if s > rat(1, 3) {
        return Err(Error::FixedPointUnbounded(s));
    }
    if alpha.is_zero() {
        return Ok(BigRational::zero());
    }
    if beta.is_zero() {
        return Ok(alpha.clone());
    }
    let four_alpha = rat_int(4) * alpha;
    let scale_guard = (alpha.to_f64().unwrap_or(1.0).max(1.0).ln() * (k as f64 + 1.0)).ceil() as u64;
    let mut extra = 8 + 2 * k as u64 + scale_guard;
    for _ in 0..8 {
        let work = prec.tightened(&int(extra));
        let w = lambert_w(&-&s, &work)?;
        let arg = -w / int(k as u64);
        let e = exp_enclosure(&arg, work.bits() + 16);
        let x = round_to_precision(&(alpha * (&e.lo + &e.hi) / rat_int(2)), &work);
        if x <= four_alpha && fixed_point_residual_ok(&x, alpha, beta, k, prec) {
            return Ok(x);
        }
        extra += 16;
    }
    Err(Error::PrecisionExhausted(8))
}

fn fixed_point_residual_ok(
    x: &BigRational,
    alpha: &BigRational,
    beta: &BigRational,
    k: u32,
    prec: &PrecisionSpec,
) -> bool {
    let e = exp_enclosure(&(beta * pow(x, k as u64)), prec.bits() + 16);
    let rhs = Enclosure { lo: alpha * &e.lo, hi: alpha * &e.hi };
    certainly_le_exp_neg(&rhs.max_distance(x), prec.xi())
}

/// `mu + (d dt (1 + k! sigma_p (1 + mu + Y)^k))^n`: bound on the distance
/// between the true solution and the order-`n` Taylor polynomial of a
/// solution started within the divergence hypothesis.
pub fn taylor_total_error(
    k: u32,
    sigma_p: &BigRational,
    d: usize,
    y_bound: &BigRational,
    mu: &BigRational,
    dt: &BigRational,
    n: u64,
) -> BigRational {
    let growth =
        BigRational::from_integer(factorial(k as u64)) * sigma_p * pow(&(BigRational::one() + mu + y_bound), k as u64);
    let base = int(d as u64) * dt * (BigRational::one() + growth);
    mu + pow(&base, n)
}

/// `a^n u0 + b (a^n - 1) / (a - 1)`, bounding any `u` with
/// `u_{j+1} <= a u_j + b`.
pub fn accumulate_error(a: &BigRational, b: &BigRational, u0: &BigRational, n: u64) -> Result<BigRational> {
    if *a <= BigRational::one() {
        return Err(Error::RatioNotAboveOne(a.clone()));
    }
    nonneg("b", b)?;
    nonneg("u0", u0)?;
    let an = pow(a, n);
    Ok(&an * u0 + b * (&an - BigRational::one()) / (a - BigRational::one()))
}

/// `per_term_err * sum_{k<n} dt^k / k!`, the error of a Taylor sum whose
/// coefficients are each known to within `per_term_err`.
pub fn sum_jet_error(n: u64, dt: &BigRational, per_term_err: &BigRational) -> BigRational {
    let mut term = BigRational::one();
    let mut total = BigRational::zero();
    for k in 0..n {
        if k > 0 {
            term = term * dt / int(k);
        }
        total += &term;
    }
    per_term_err * total
}

/// One step of the error recurrence `eps e^B + (Delta A)^omega + e^(-omega)`,
/// with upper enclosures for both exponentials.
pub fn step_error_recurrence(eps: &BigRational, b: &BigRational, delta_a: &BigRational, omega: u64) -> BigRational {
    eps * exp_upper(b) + pow(delta_a, omega) + exp_upper(&-int(omega))
}

/// `Delta A <= 1/e`, checked with the rational lower bound `1/e_upper`.
pub fn step_contracts(delta_a: &BigRational) -> bool {
    delta_a * e_upper() <= BigRational::one()
}

//! Fixed-step Taylor integration with an a priori parameter schedule.
//!
//! [`choose_parameters`] turns `(T, mu, Y)` into a step count `N` and an
//! order `omega` such that `N` Taylor steps of order `omega`, each rounded to
//! `e^(-omega)`, land within `e^(-mu)` of the true solution.
//! [`solve_guaranteed`] runs the whole pipeline and re-checks the
//! accumulated bound before returning.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bounds::{accumulate_error, step_contracts};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::{
    bit_size, ceil_u64, e_upper, exp_lower, exp_neg_upper, exp_upper, factorial, ln_upper, pow, rat,
    round_to_precision, PrecisionSpec,
};
use crate::poly::PolyVector;
use crate::taylor::{Ball, BallCtx, PivpProblem, SeriesProgram, SeriesScalar};

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Step size, step count and order for a horizon `T` at precision `e^(-mu)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterSchedule {
    /// `(2 + Y)^k`
    pub m: BigRational,
    /// `d (1 + k! sigma(p) M)`
    pub a: BigRational,
    /// `ceil(T e A)` with an upper bound on `e`
    pub n: u64,
    /// `T / N`
    pub delta: BigRational,
    /// `k 4^k sigma(p) Delta M`
    pub b: BigRational,
    /// `ceil(2 + mu + ln N + N B)` with an upper bound on `ln N`
    pub omega: u64,
    /// Initial rounding exponent `N B + mu + 1`.
    pub eta: BigRational,
}

impl ParameterSchedule {
    pub fn nb(&self) -> BigRational {
        int(self.n) * &self.b
    }

    pub fn delta_a(&self) -> BigRational {
        &self.delta * &self.a
    }
}

pub fn choose_parameters(
    d: usize,
    k: u32,
    sigma_p: &BigRational,
    t: &BigRational,
    mu: u64,
    y_bound: &BigRational,
) -> Result<ParameterSchedule> {
    if mu < 2 {
        return Err(Error::PrecisionTooLow(mu));
    }
    if !t.is_positive() {
        return Err(Error::NonPositiveHorizon(t.clone()));
    }
    if k == 0 {
        return Err(Error::ConstantField);
    }
    if y_bound.is_negative() {
        return Err(Error::Negative { name: "Y", value: y_bound.clone() });
    }
    let kk = k as u64;
    let m = pow(&(int(2) + y_bound), kk);
    let a = int(d as u64) * (BigRational::one() + BigRational::from_integer(factorial(kk)) * sigma_p * &m);
    let n = ceil_u64(&(t * e_upper() * &a)).max(1);
    let delta = t / int(n);
    let b = int(kk) * int(4u64.pow(k)) * sigma_p * &delta * &m;
    let nb = int(n) * &b;
    let omega = ceil_u64(&(int(2 + mu) + ln_upper(&int(n))? + &nb));
    let eta = nb + int(mu + 1);
    Ok(ParameterSchedule { m, a, n, delta, b, omega, eta })
}

/// How each Taylor step is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepArithmetic {
    /// Fixed-point ball arithmetic at a working precision derived from the
    /// requested tolerance, retried at higher precision if the enclosure is
    /// too wide.
    #[default]
    Ball,
    /// Exact rational jets; only practical for small orders.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverOptions {
    pub arithmetic: StepArithmetic,
    pub execution: Execution,
}

const MAX_PRECISION_ATTEMPTS: u32 = 6;

/// Compiled right-hand side, reused across steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    program: SeriesProgram,
    options: SolverOptions,
}

impl Stepper {
    pub fn new(p: &PolyVector, options: SolverOptions) -> Self {
        Self { program: SeriesProgram::compile(p), options }
    }

    /// A dyadic `x'` within `e^(-xi)` of the order-`omega` Taylor polynomial
    /// of the solution through `x`, evaluated at `delta`.
    pub fn step(
        &self,
        x: &[BigRational],
        delta: &BigRational,
        omega: u64,
        xi: &PrecisionSpec,
    ) -> Result<Vec<BigRational>> {
        if x.len() != self.program.dim() {
            return Err(Error::DimensionMismatch { expected: self.program.dim(), found: x.len() });
        }
        if omega == 0 {
            return Err(Error::ZeroCount { name: "omega" });
        }
        if delta.is_negative() {
            return Err(Error::Negative { name: "delta", value: delta.clone() });
        }
        match self.options.arithmetic {
            StepArithmetic::Exact => Ok(self.exact_step(x, delta, omega, xi)),
            StepArithmetic::Ball => self.ball_step(x, delta, omega, xi),
        }
    }

    fn exact_step(&self, x: &[BigRational], delta: &BigRational, omega: u64, xi: &PrecisionSpec) -> Vec<BigRational> {
        let coeffs = self.program.lift(x, omega as usize, delta, &());
        let mut sum = vec![BigRational::zero(); x.len()];
        for row in &coeffs {
            for (s, c) in sum.iter_mut().zip(row) {
                *s += c;
            }
        }
        sum.iter().map(|v| round_to_precision(v, xi)).collect()
    }

    fn ball_step(
        &self,
        x: &[BigRational],
        delta: &BigRational,
        omega: u64,
        xi: &PrecisionSpec,
    ) -> Result<Vec<BigRational>> {
        let target = xi.bits();
        let mut guard = 24 + 2 * (64 - omega.leading_zeros() as u64);
        for _ in 0..MAX_PRECISION_ATTEMPTS {
            let bits = target + guard;
            let ctx = BallCtx { bits, execution: self.options.execution };
            let z: Vec<Ball> = x.iter().map(|v| Ball::from_rational(v, &ctx)).collect();
            let coeffs = self.program.lift(&z, omega as usize, delta, &ctx);
            let mut sum: Vec<Ball> = (0..x.len()).map(|_| Ball::zero_in(&ctx)).collect();
            for row in &coeffs {
                for (s, c) in sum.iter_mut().zip(row) {
                    s.add_assign(c);
                }
            }
            // radius <= 2^-target, rounding <= 2^-(target+1): total < 2^-(target-1) <= e^-xi
            let limit = BigUint::one() << (bits - target) as usize;
            if sum.iter().all(|b| b.rad <= limit) {
                return Ok(sum.iter().map(|b| round_to_precision(&b.mid_rational(bits), xi)).collect());
            }
            guard *= 2;
        }
        Err(Error::PrecisionExhausted(MAX_PRECISION_ATTEMPTS))
    }
}

/// One Taylor step; see [`Stepper::step`].
pub fn taylor_step(
    p: &PolyVector,
    x: &[BigRational],
    delta: &BigRational,
    omega: u64,
    xi: &PrecisionSpec,
) -> Result<Vec<BigRational>> {
    Stepper::new(p, SolverOptions::default()).step(x, delta, omega, xi)
}

/// `n_steps` Taylor steps of width `t / n_steps` from `y0`, each rounded to
/// `e^(-xi)`. The system is autonomous, so no start time is needed.
pub fn solve_pivp(
    p: &PolyVector,
    y0: &[BigRational],
    t: &BigRational,
    xi: &PrecisionSpec,
    n_steps: u64,
    omega: u64,
) -> Result<Vec<BigRational>> {
    solve_pivp_with(p, y0, t, xi, n_steps, omega, SolverOptions::default(), |_, _| {})
}

/// All grid values `x_0 = y0, x_1, ..., x_N` of [`solve_pivp`].
pub fn solve_pivp_trajectory(
    p: &PolyVector,
    y0: &[BigRational],
    t: &BigRational,
    xi: &PrecisionSpec,
    n_steps: u64,
    omega: u64,
    options: SolverOptions,
) -> Result<Vec<Vec<BigRational>>> {
    let mut out = vec![y0.to_vec()];
    solve_pivp_with(p, y0, t, xi, n_steps, omega, options, |_, x| out.push(x.to_vec()))?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_pivp_with(
    p: &PolyVector,
    y0: &[BigRational],
    t: &BigRational,
    xi: &PrecisionSpec,
    n_steps: u64,
    omega: u64,
    options: SolverOptions,
    mut on_step: impl FnMut(u64, &[BigRational]),
) -> Result<Vec<BigRational>> {
    if n_steps == 0 {
        return Err(Error::ZeroCount { name: "N" });
    }
    let stepper = Stepper::new(p, options);
    let delta = t / int(n_steps);
    let mut x = y0.to_vec();
    for n in 1..=n_steps {
        x = stepper.step(&x, &delta, omega, xi)?;
        on_step(n, &x);
    }
    Ok(x)
}

/// A request for `y(t0 + T)` at precision `e^(-mu)`, trusting `Y` to bound
/// the solution on the whole interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveRequest {
    pub problem: PivpProblem,
    pub t: BigRational,
    pub mu: u64,
    pub y_bound: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolveStats {
    pub steps: u64,
    pub max_order: u64,
    pub wall_time: Duration,
    /// Largest numerator or denominator bit length of any grid value.
    pub peak_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub value: Vec<BigRational>,
    /// Upper enclosure of `e^(-mu)`.
    pub guaranteed_error: BigRational,
    /// `None` when the answer was produced without stepping (`T = 0` or a
    /// constant field).
    pub schedule: Option<ParameterSchedule>,
    /// The accumulated worst-case error bound recomputed from the schedule.
    pub accumulated_bound: Option<BigRational>,
    pub stats: SolveStats,
}

pub fn solve_guaranteed(req: &SolveRequest) -> Result<SolveResult> {
    solve_guaranteed_with(req, SolverOptions::default())
}

pub fn solve_guaranteed_with(req: &SolveRequest, options: SolverOptions) -> Result<SolveResult> {
    let start = Instant::now();
    if req.mu < 2 {
        return Err(Error::PrecisionTooLow(req.mu));
    }
    if req.y_bound.is_negative() {
        return Err(Error::Negative { name: "Y", value: req.y_bound.clone() });
    }
    let problem = &req.problem;
    if problem.y0.len() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), found: problem.y0.len() });
    }
    let target = PrecisionSpec::from_integer(req.mu);
    let guaranteed_error = exp_neg_upper(target.xi());
    let direct = |value: Vec<BigRational>| {
        let peak_bits = value.iter().map(bit_size).max().unwrap_or(0);
        SolveResult {
            value,
            guaranteed_error: guaranteed_error.clone(),
            schedule: None,
            accumulated_bound: None,
            stats: SolveStats { steps: 0, max_order: 0, wall_time: start.elapsed(), peak_bits },
        }
    };

    if req.t.is_zero() {
        return Ok(direct(problem.y0.iter().map(|v| round_to_precision(v, &target)).collect()));
    }
    // backward in time: tau = -t solves y' = -p(y)
    let (p, t) = if req.t.is_negative() { (problem.p.negated(), -&req.t) } else { (problem.p.clone(), req.t.clone()) };
    let k = p.degree();
    if k == 0 {
        let rate = p.evaluate(&problem.y0)?;
        return Ok(direct(
            problem.y0.iter().zip(&rate).map(|(y, r)| round_to_precision(&(y + &t * r), &target)).collect(),
        ));
    }

    let schedule = choose_parameters(p.dim(), k, &p.sigma(), &t, req.mu, &req.y_bound)?;
    let eta = PrecisionSpec::new(schedule.eta.clone())?;
    let y0_rounded: Vec<BigRational> = problem.y0.iter().map(|v| round_to_precision(v, &eta)).collect();
    let eps0 = problem.y0.iter().zip(&y0_rounded).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(BigRational::zero);
    let bound = check_accumulated_bound(&schedule, k, &p.sigma(), &req.y_bound, &eps0, req.mu)?;

    let xi = PrecisionSpec::from_integer(schedule.omega);
    let mut peak_bits = y0_rounded.iter().map(bit_size).max().unwrap_or(0);
    let value = solve_pivp_with(&p, &y0_rounded, &t, &xi, schedule.n, schedule.omega, options, |_, x| {
        peak_bits = peak_bits.max(x.iter().map(bit_size).max().unwrap_or(0));
    })?;
    Ok(SolveResult {
        value,
        guaranteed_error,
        accumulated_bound: Some(bound),
        stats: SolveStats { steps: schedule.n, max_order: schedule.omega, wall_time: start.elapsed(), peak_bits },
        schedule: Some(schedule),
    })
}

/// Recomputes `eps_N` from `eps_{n+1} <= eps_n e^B + (Delta A)^omega + e^-omega`
/// and checks `eps_N <= e^-mu`, `Delta A <= 1/e`, and that every `eps_n`
/// keeps the next step inside the divergence hypothesis at level 1/3.
fn check_accumulated_bound(
    s: &ParameterSchedule,
    k: u32,
    sigma_p: &BigRational,
    y_bound: &BigRational,
    eps0: &BigRational,
    mu: u64,
) -> Result<BigRational> {
    let delta_a = s.delta_a();
    let growth = exp_upper(&s.b);
    let per_step = pow(&delta_a, s.omega) + exp_upper(&-int(s.omega));
    let bound = accumulate_error(&growth, &per_step, eps0, s.n)?;
    let target = exp_lower(&-int(mu));
    let hyp_exponent =
        int(k as u64) * int(4u64.pow(k)) * sigma_p * &s.delta * (BigRational::one() + pow(y_bound, k as u64 - 1));
    let hypothesis_ok = &bound * exp_upper(&hyp_exponent) <= rat(1, 3);
    if !step_contracts(&delta_a) || bound > target || !hypothesis_ok {
        return Err(Error::GuaranteeCheck {
            bound: crate::numeric::to_decimal(&bound, 30),
            target: crate::numeric::to_decimal(&target, 30),
        });
    }
    Ok(bound)
}

/// Solves independent requests, in parallel when `options.execution` allows.
pub fn solve_batch(requests: &[SolveRequest], options: SolverOptions) -> Vec<Result<SolveResult>> {
    let inner = SolverOptions { execution: Execution::Sequential, ..options };
    options.execution.map(requests, |r| solve_guaranteed_with(r, inner))
}

//! Randomized oracle checks shared by the core integration tests and the
//! workspace acceptance target. Each check returns a one-line summary or the
//! first counterexample.
#![allow(dead_code)]

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pivp_core::bounds::{divergence_bound, solve_exp_fixed_point, taylor_total_error, DivergenceQuery};
use pivp_core::numeric::{certainly_le_exp_neg, exp_enclosure, exp_upper, pow, rat, rat_int, PrecisionSpec};
use pivp_core::poly::{Exponent, PolyVector, SparsePoly};
use pivp_core::taylor::{deriv_norm_bound, ode_taylor_jet};
use pivp_core::BigRational;

pub type Check = Result<String, String>;

pub fn random_poly(rng: &mut impl Rng, d: usize, k: u32, max_terms: usize) -> SparsePoly {
    let mut p = SparsePoly::zero(d);
    for _ in 0..rng.gen_range(1..=max_terms) {
        let total = rng.gen_range(0..=k);
        let mut powers = vec![0u32; d];
        for _ in 0..total {
            powers[rng.gen_range(0..d)] += 1;
        }
        p.add_term(Exponent::new(powers), rat_int(rng.gen_range(-2..=2)));
    }
    p
}

/// Integer coefficients in `[-2, 2]`, `d <= 3`, `deg <= 3`.
pub fn random_system(rng: &mut impl Rng) -> PolyVector {
    let d = rng.gen_range(1..=3);
    let k = rng.gen_range(1..=3);
    PolyVector::new((0..d).map(|_| random_poly(rng, d, k, 4)).collect()).unwrap()
}

pub fn random_point(rng: &mut impl Rng, d: usize, span: i64, den: i64) -> Vec<BigRational> {
    (0..d).map(|_| rat(rng.gen_range(-span..=span), rng.gen_range(1..=den))).collect()
}

fn sup_norm(v: &[BigRational]) -> BigRational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigRational::zero)
}

/// `y^(n)(0)` by repeated symbolic differentiation along the flow.
pub fn brute_force_derivatives(p: &PolyVector, z: &[BigRational], max_n: usize) -> Vec<Vec<BigRational>> {
    let mut out = vec![z.to_vec()];
    let mut current: Vec<SparsePoly> = p.components().to_vec();
    for n in 1..=max_n {
        out.push(current.iter().map(|q| q.evaluate(z).unwrap()).collect());
        if n < max_n {
            current = current.iter().map(|q| p.lie_derivative(q)).collect();
        }
    }
    out
}

/// Jet derivatives against symbolic differentiation, and the derivative norm
/// bound against the same values.
pub fn derivative_oracle(systems: usize, max_n: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    for s in 0..systems {
        let p = random_system(&mut rng);
        let z = random_point(&mut rng, p.dim(), 3, 3);
        let brute = brute_force_derivatives(&p, &z, max_n);
        let jet = ode_taylor_jet(&p, &z, max_n + 1).map_err(|e| e.to_string())?;
        let y = sup_norm(&z);
        for (n, expected) in brute.iter().enumerate() {
            let got = jet.derivative(n);
            if &got != expected {
                return Err(format!(
                    "system {s} (p = {p:?}, z = {z:?}) order {n}: jet {got:?} != symbolic {expected:?}"
                ));
            }
            if n >= 1 {
                let bound = deriv_norm_bound(&p, &y, n as u64);
                if sup_norm(&got) > bound {
                    return Err(format!("system {s} order {n}: |y^(n)| = {} exceeds bound {bound}", sup_norm(&got)));
                }
            }
            compared += 1;
        }
    }
    Ok(format!("{systems} systems, {compared} derivative vectors equal and dominated"))
}

pub fn lipschitz_pairs(pairs: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..pairs {
        let d = rng.gen_range(1..=3);
        let k = rng.gen_range(1..=4);
        let q = random_poly(&mut rng, d, k, 5);
        let m = rat(rng.gen_range(1..=32), 8);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<BigRational> {
            (0..d).map(|_| &m * rat(rng.gen_range(-64..=64), 64)).collect()
        };
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let lhs = (q.evaluate(&x).unwrap() - q.evaluate(&y).unwrap()).abs();
        let diff: Vec<BigRational> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let rhs = q.lipschitz_bound(&m) * sup_norm(&diff);
        if lhs > rhs {
            return Err(format!("pair {i}: P = {q}, M = {m}: |P(x) - P(y)| = {lhs} > {rhs}"));
        }
    }
    Ok(format!("{pairs} pairs dominated"))
}

/// Divergence bound against closed-form divergence for `y' = y` and
/// `y' = y^2`.
pub fn divergence_dominance(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    for _ in 0..40 {
        let dt = rat(1, 1 << rng.gen_range(2..=5));
        let eps0 = rat(rng.gen_range(1..=9), 1_000_000_000);
        let sign = if rng.gen_bool(0.5) { rat_int(1) } else { rat_int(-1) };

        // y' = y: |z - y| = eps0 e^dt
        let q = DivergenceQuery::new(1, rat_int(1), rat_int(2), dt.clone(), eps0.clone(), rat(1, 3))
            .map_err(|e| e.to_string())?;
        let bound = divergence_bound(&q).map_err(|e| e.to_string())?;
        let actual_hi = &eps0 * exp_enclosure(&dt, 256).hi;
        if actual_hi > bound {
            return Err(format!("y' = y, dt = {dt}, eps0 = {eps0}: {actual_hi} > {bound}"));
        }

        // y' = y^2: y(t) = y0 / (1 - y0 t)
        let y0 = rat(rng.gen_range(-8..=8), 16);
        let z0 = &y0 + &sign * &eps0;
        let flow = |a: &BigRational| a / (BigRational::one() - a * &dt);
        let actual = (flow(&z0) - flow(&y0)).abs();
        let q = DivergenceQuery::new(2, rat_int(1), rat_int(1), dt.clone(), eps0.clone(), rat(1, 3))
            .map_err(|e| e.to_string())?;
        let bound = divergence_bound(&q).map_err(|e| e.to_string())?;
        if actual > bound {
            return Err(format!("y' = y^2, y0 = {y0}, dt = {dt}, eps0 = {eps0}: {actual} > {bound}"));
        }
        cases += 2;
    }
    Ok(format!("{cases} perturbed starts dominated"))
}

/// Taylor truncation plus start perturbation against the closed forms, for
/// orders `1..=max_n` and `dt <= 1/4`.
pub fn taylor_error_dominance(max_n: u64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp_p = PolyVector::new(vec![SparsePoly::var(1, 0)]).unwrap();
    let ric_p = PolyVector::new(vec![SparsePoly::from_terms(1, [(vec![2], rat_int(1))])]).unwrap();
    let mut cases = 0;
    for _ in 0..6 {
        let dt = rat(1, 1 << rng.gen_range(2..=4));
        let eps0 = rat(rng.gen_range(0..=9), 1_000_000_000);
        let y0 = rat(rng.gen_range(-8..=8), 16);
        let z0 = vec![&y0 + &eps0];
        for (k, p, y_bound) in [(1u32, &exp_p, rat_int(2)), (2, &ric_p, rat_int(1))] {
            // level mu at which the perturbed start meets the divergence hypothesis
            let hyp =
                rat_int(k as i64) * rat_int(4i64.pow(k)) * &dt * (BigRational::one() + pow(&y_bound, (k - 1) as u64));
            let mu = &eps0 * exp_upper(&hyp);
            if mu > rat(1, 3) {
                return Err(format!("test setup: mu = {mu} exceeds 1/3"));
            }
            let jet = ode_taylor_jet(p, &z0, max_n as usize).map_err(|e| e.to_string())?;
            for n in 1..=max_n {
                let approx = jet.truncated(n as usize).eval(&dt)[0].clone();
                let actual = if k == 1 {
                    exp_enclosure(&dt, 256).mul(&pivp_core::numeric::Enclosure::point(y0.clone())).max_distance(&approx)
                } else {
                    (&y0 / (BigRational::one() - &y0 * &dt) - &approx).abs()
                };
                let bound = taylor_total_error(k, &rat_int(1), 1, &y_bound, &mu, &dt, n);
                if actual > bound {
                    return Err(format!("k = {k}, y0 = {y0}, dt = {dt}, n = {n}: {actual} > {bound}"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (order, step) cases dominated"))
}

/// `f(x) = alpha e^(beta x^k) - x` has one root in `[alpha, alpha e^(1/k)]`
/// when `k beta alpha^k <= 1/3`; bisect it with certified signs.
fn bisect_fixed_point(alpha: &BigRational, beta: &BigRational, k: u32) -> (BigRational, BigRational) {
    let mut lo = alpha.clone();
    let mut hi = alpha * exp_enclosure(&rat(1, k as i64), 128).hi;
    for _ in 0..80 {
        let mid = (&lo + &hi) / rat_int(2);
        let e = exp_enclosure(&(beta * pow(&mid, k as u64)), 160);
        if alpha * &e.lo > mid {
            lo = mid;
        } else if alpha * &e.hi < mid {
            hi = mid;
        } else {
            break;
        }
    }
    ((&lo + &hi) / rat_int(2), hi - lo)
}

pub fn fixed_point_cases(count: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prec = PrecisionSpec::from_integer(30);
    for i in 0..count {
        let k = rng.gen_range(1..=3u32);
        let alpha = rat(rng.gen_range(1..=32), 8);
        let s = rat(rng.gen_range(1..=10), 30);
        let beta = &s / (rat_int(k as i64) * pow(&alpha, k as u64));
        let x = solve_exp_fixed_point(&alpha, &beta, k, &prec).map_err(|e| format!("case {i}: {e}"))?;
        let e = exp_enclosure(&(&beta * pow(&x, k as u64)), 200);
        let rhs = pivp_core::numeric::Enclosure { lo: &alpha * &e.lo, hi: &alpha * &e.hi };
        if !certainly_le_exp_neg(&rhs.max_distance(&x), &rat_int(30)) {
            return Err(format!("case {i} (alpha = {alpha}, beta = {beta}, k = {k}): residual too large"));
        }
        if x > rat_int(4) * &alpha {
            return Err(format!("case {i}: x = {x} exceeds 4 alpha"));
        }
        let (root, width) = bisect_fixed_point(&alpha, &beta, k);
        if !certainly_le_exp_neg(&((&x - &root).abs() + width), &rat_int(25)) {
            return Err(format!("case {i}: solver {x} vs bisection {root}"));
        }
    }
    Ok(format!("{count} admissible cases within e^-30 residual and e^-25 of bisection"))
}

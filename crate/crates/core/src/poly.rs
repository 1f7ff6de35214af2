//! Sparse multivariate polynomials over the rationals and the elementary
//! bounds on their values, derivatives and Lipschitz constants.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numeric::{factorial, pow};

/// Exponent vector `alpha` of a monomial `X^alpha`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// of `X1`, then `X2`, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(powers: Vec<u32>) -> Self {
        Self(powers)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn unit(dim: usize, var: usize) -> Self {
        let mut v = vec![0; dim];
        v[var] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn powers(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        self.0.iter().zip(&other.0).map(|(a, b)| a.checked_sub(*b)).collect::<Option<Vec<_>>>().map(Self)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total().cmp(&other.total()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial {
    pub exponent: Exponent,
    pub coeff: BigRational,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponent.total()
    }
}

/// A polynomial in `dim` variables with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    dim: usize,
    terms: BTreeMap<Exponent, BigRational>,
}

impl SparsePoly {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Exponent::zero(dim), c);
        p
    }

    /// The coordinate polynomial `X_{var+1}`.
    pub fn var(dim: usize, var: usize) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(Exponent::unit(dim, var), BigRational::one());
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigRational)>) -> Self {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            assert_eq!(alpha.len(), dim, "exponent length must equal dimension");
            p.add_term(Exponent::new(alpha), c);
        }
        p
    }

    pub fn add_term(&mut self, exponent: Exponent, coeff: BigRational) {
        debug_assert_eq!(exponent.dim(), self.dim);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exponent) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &BigRational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms.iter().map(|(e, c)| Monomial { exponent: e.clone(), coeff: c.clone() }).collect()
    }

    pub fn coeff(&self, exponent: &Exponent) -> BigRational {
        self.terms.get(exponent).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Maximal total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, Exponent::total)
    }

    /// Sum of absolute values of the coefficients.
    pub fn sigma(&self) -> BigRational {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn evaluate(&self, x: &[BigRational]) -> Result<BigRational> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &a) in x.iter().zip(e.powers()) {
                if a > 0 {
                    t *= pow(xi, a as u64);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self { dim: self.dim, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(self.dim, BigRational::one());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Mixed partial derivative `d^alpha P`.
    pub fn partial_derivative(&self, alpha: &Exponent) -> Self {
        assert_eq!(alpha.dim(), self.dim, "exponent length must equal dimension");
        let mut out = Self::zero(self.dim);
        for (beta, c) in &self.terms {
            let Some(rest) = beta.checked_sub(alpha) else { continue };
            let mut factor = BigInt::one();
            for (&b, &a) in beta.powers().iter().zip(alpha.powers()) {
                for j in 0..a {
                    factor *= BigInt::from(b - j);
                }
            }
            out.add_term(rest, c * BigRational::from_integer(factor));
        }
        out
    }

    /// `sigma(P) * max(1, xmax^deg P)`, an upper bound on `|P(x)|` over the
    /// box `||x||_inf <= xmax`.
    pub fn eval_bound(&self, xmax: &BigRational) -> BigRational {
        self.sigma() * max_one(pow(xmax, self.degree() as u64))
    }

    /// The literal product `|alpha|! * sigma(P) * max(1, xmax^(deg P - |alpha|))`.
    ///
    /// This does not bound the derivative in general: for `P = X1^2`,
    /// `alpha = (1)`, `xmax = 3` it gives 3 while `|P'(3)| = 6`. Use
    /// [`SparsePoly::deriv_eval_bound`] for a sound bound.
    pub fn deriv_eval_bound_literal(&self, alpha: &Exponent, xmax: &BigRational) -> Result<BigRational> {
        let order = self.check_order(alpha)?;
        let f = BigRational::from_integer(factorial(order as u64));
        Ok(f * self.sigma() * max_one(pow(xmax, (self.degree() - order) as u64)))
    }

    /// `sigma(d^alpha P) * max(1, xmax^(deg P - |alpha|))`, an upper bound on
    /// `|d^alpha P(x)|` over the box `||x||_inf <= xmax`.
    pub fn deriv_eval_bound(&self, alpha: &Exponent, xmax: &BigRational) -> Result<BigRational> {
        let order = self.check_order(alpha)?;
        let d = self.partial_derivative(alpha);
        Ok(d.sigma() * max_one(pow(xmax, (self.degree() - order) as u64)))
    }

    fn check_order(&self, alpha: &Exponent) -> Result<u32> {
        let order = alpha.total();
        if order > self.degree() {
            return Err(Error::DerivativeOrderTooHigh { order, degree: self.degree() });
        }
        Ok(order)
    }

    /// `k * max(1, m)^(k-1) * sigma(P)` with `k = deg P`; zero for constants.
    ///
    /// A Lipschitz constant for `P` on the box `||x||_inf <= m`. The clamp
    /// matters only for `m < 1`, where low-degree terms dominate: `X1 + X1^3`
    /// has slope 1 at the origin but `3 m^2 * 2 < 1` for `m = 1/4`.
    pub fn lipschitz_bound(&self, m: &BigRational) -> BigRational {
        let k = self.degree();
        if k == 0 {
            return BigRational::zero();
        }
        let m = m.clone().max(BigRational::one());
        BigRational::from_integer(BigInt::from(k)) * pow(&m, (k - 1) as u64) * self.sigma()
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        assert_eq!(self.dim, other.dim, "polynomial dimensions differ");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), if negate { -c } else { c.clone() });
        }
        out
    }
}

fn max_one(x: BigRational) -> BigRational {
    x.max(BigRational::one())
}

impl Add for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        self.combine(rhs, false)
    }
}

impl Sub for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        self.combine(rhs, true)
    }
}

impl Mul for &SparsePoly {
    type Output = SparsePoly;
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        assert_eq!(self.dim, rhs.dim, "polynomial dimensions differ");
        let mut out = SparsePoly::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.add(b), ca * cb);
            }
        }
        out
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        self.scale(&-BigRational::one())
    }
}

impl fmt::Display for SparsePoly {
    /// Canonical form: descending graded-lex order, variables `y1..yd`,
    /// e.g. `3*y1^2 - 2*y1*y2 + 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let vars: Vec<String> = e
                .powers()
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(v, &a)| if a == 1 { format!("y{}", v + 1) } else { format!("y{}^{a}", v + 1) })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// The right-hand side `p = (p_1, ..., p_d)` of an autonomous system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyVector {
    components: Vec<SparsePoly>,
}

impl PolyVector {
    pub fn new(components: Vec<SparsePoly>) -> Result<Self> {
        let d = components.len();
        if d == 0 {
            return Err(Error::ZeroCount { name: "dimension" });
        }
        if let Some(bad) = components.iter().find(|c| c.dim() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
        }
        Ok(Self { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SparsePoly] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(SparsePoly::degree).max().unwrap_or(0)
    }

    pub fn sigma(&self) -> BigRational {
        self.components.iter().map(SparsePoly::sigma).max().unwrap_or_else(BigRational::zero)
    }

    pub fn evaluate(&self, x: &[BigRational]) -> Result<Vec<BigRational>> {
        self.components.iter().map(|c| c.evaluate(x)).collect()
    }

    pub fn negated(&self) -> Self {
        Self { components: self.components.iter().map(|c| -c).collect() }
    }

    /// `sum_i (dq/dy_i) p_i`, the time derivative of `q(y(t))` along
    /// solutions of `y' = p(y)`.
    pub fn lie_derivative(&self, q: &SparsePoly) -> SparsePoly {
        let d = self.dim();
        let mut out = SparsePoly::zero(d);
        for (i, pi) in self.components.iter().enumerate() {
            let dq = q.partial_derivative(&Exponent::unit(d, i));
            if !dq.is_zero() {
                out = &out + &(&dq * pi);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};
    use proptest::prelude::*;

    fn x1sq_plus_1() -> SparsePoly {
        SparsePoly::from_terms(1, [(vec![2], rat_int(1)), (vec![0], rat_int(1))])
    }

    fn sample() -> SparsePoly {
        // 3*y1^2 - 2*y1*y2
        SparsePoly::from_terms(2, [(vec![2, 0], rat_int(3)), (vec![1, 1], rat_int(-2))])
    }

    #[test]
    fn evaluation() {
        assert_eq!(x1sq_plus_1().evaluate(&[rat_int(2)]).unwrap(), rat_int(5));
        assert_eq!(SparsePoly::zero(2).evaluate(&[rat_int(7), rat(1, 3)]).unwrap(), rat_int(0));
        assert_eq!(sample().evaluate(&[rat_int(2), rat_int(1)]).unwrap(), rat_int(8));
        assert!(matches!(sample().evaluate(&[rat_int(2)]), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
    }

    #[test]
    fn sigma_and_degree() {
        assert_eq!(sample().sigma(), rat_int(5));
        assert_eq!(sample().degree(), 2);
        assert_eq!(SparsePoly::zero(3).sigma(), rat_int(0));
        assert_eq!(SparsePoly::zero(3).degree(), 0);
        let p = &(&SparsePoly::var(2, 0) + &SparsePoly::var(2, 1)) + &SparsePoly::constant(2, rat_int(1));
        assert_eq!(p.sigma(), rat_int(3));
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn derivatives() {
        let p = SparsePoly::from_terms(2, [(vec![2, 1], rat_int(1))]);
        let d = p.partial_derivative(&Exponent::new(vec![1, 0]));
        assert_eq!(d, SparsePoly::from_terms(2, [(vec![1, 1], rat_int(2))]));
        assert_eq!(p.partial_derivative(&Exponent::zero(2)), p);
        let q = SparsePoly::from_terms(2, [(vec![2, 0], rat_int(1))]);
        assert!(q.partial_derivative(&Exponent::new(vec![3, 0])).is_zero());
    }

    #[test]
    fn eval_bound_examples() {
        assert_eq!(sample().eval_bound(&rat_int(2)), rat_int(20));
        assert!(sample().evaluate(&[rat_int(2), rat_int(1)]).unwrap().abs() <= rat_int(20));
        assert_eq!(SparsePoly::zero(1).eval_bound(&rat_int(9)), rat_int(0));
        assert_eq!(SparsePoly::var(1, 0).eval_bound(&rat(1, 2)), rat_int(1));
    }

    #[test]
    fn literal_derivative_bound_examples() {
        let sq = SparsePoly::from_terms(1, [(vec![2], rat_int(1))]);
        let a = Exponent::new(vec![1]);
        assert_eq!(sq.deriv_eval_bound_literal(&a, &rat_int(3)).unwrap(), rat_int(3));
        // the literal product undershoots |2x| = 6 at x = 3
        let actual = sq.partial_derivative(&a).evaluate(&[rat_int(3)]).unwrap();
        assert_eq!(actual, rat_int(6));
        assert!(actual > sq.deriv_eval_bound_literal(&a, &rat_int(3)).unwrap());
        // the sound bound covers it
        assert_eq!(sq.deriv_eval_bound(&a, &rat_int(3)).unwrap(), rat_int(6));

        let z = Exponent::zero(2);
        assert_eq!(sample().deriv_eval_bound_literal(&z, &rat_int(2)).unwrap(), sample().eval_bound(&rat_int(2)));
        assert_eq!(sample().deriv_eval_bound(&z, &rat_int(2)).unwrap(), sample().eval_bound(&rat_int(2)));

        let xy = SparsePoly::from_terms(2, [(vec![1, 1], rat_int(1))]);
        let a11 = Exponent::new(vec![1, 1]);
        assert_eq!(xy.deriv_eval_bound_literal(&a11, &rat_int(5)).unwrap(), rat_int(2));
        assert_eq!(xy.deriv_eval_bound(&a11, &rat_int(5)).unwrap(), rat_int(1));

        assert!(matches!(
            sq.deriv_eval_bound(&Exponent::new(vec![3]), &rat_int(1)),
            Err(Error::DerivativeOrderTooHigh { order: 3, degree: 2 })
        ));
    }

    #[test]
    fn lipschitz_examples() {
        let sq = SparsePoly::from_terms(1, [(vec![2], rat_int(1))]);
        assert_eq!(sq.lipschitz_bound(&rat_int(2)), rat_int(4));
        assert_eq!(SparsePoly::constant(2, rat_int(7)).lipschitz_bound(&rat_int(100)), rat_int(0));
        let s = &SparsePoly::var(2, 0) + &SparsePoly::var(2, 1);
        assert_eq!(s.lipschitz_bound(&rat_int(10)), rat_int(2));
        // small boxes: the slope of y1 + y1^3 at 0 is 1
        let cubic = SparsePoly::from_terms(1, [(vec![1], rat_int(1)), (vec![3], rat_int(1))]);
        assert_eq!(cubic.lipschitz_bound(&rat(1, 4)), rat_int(6));
        let (a, b) = ([rat_int(0)], [rat(1, 100)]);
        let rise = cubic.evaluate(&b).unwrap() - cubic.evaluate(&a).unwrap();
        assert!(rise > rat_int(3) * rat(1, 16) * rat_int(2) * rat(1, 100));
        // grid check of |b^2 - a^2| <= 4 |b - a| on [-2, 2]
        let pts: Vec<_> = (-8..=8).map(|i| rat(i, 4)).collect();
        for a in &pts {
            for b in &pts {
                let lhs = (b * b - a * a).abs();
                assert!(lhs <= rat_int(4) * (b - a).abs());
            }
        }
    }

    #[test]
    fn canonical_display() {
        assert_eq!(sample().to_string(), "3*y1^2 - 2*y1*y2");
        assert_eq!(SparsePoly::zero(1).to_string(), "0");
        let p =
            SparsePoly::from_terms(2, [(vec![0, 0], rat(-1, 2)), (vec![0, 1], rat_int(-1)), (vec![1, 0], rat(7, 3))]);
        assert_eq!(p.to_string(), "7/3*y1 - y2 - 1/2");
    }

    #[test]
    fn polyvector_measures() {
        let v = PolyVector::new(vec![sample(), SparsePoly::var(2, 0)]).unwrap();
        assert_eq!(v.degree(), 2);
        assert_eq!(v.sigma(), rat_int(5));
        assert!(PolyVector::new(vec![sample()]).is_err());
        assert!(PolyVector::new(vec![]).is_err());
    }

    #[test]
    fn lie_derivative_of_harmonic_energy() {
        let h = PolyVector::new(vec![SparsePoly::var(2, 1), -&SparsePoly::var(2, 0)]).unwrap();
        let energy = SparsePoly::from_terms(2, [(vec![2, 0], rat_int(1)), (vec![0, 2], rat_int(1))]);
        assert!(h.lie_derivative(&energy).is_zero());
        assert_eq!(h.lie_derivative(&SparsePoly::var(2, 0)), SparsePoly::var(2, 1));
    }

    fn arb_rational(span: i64) -> impl Strategy<Value = BigRational> {
        (-span * 8..=span * 8, 1i64..=8).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_poly() -> impl Strategy<Value = SparsePoly> {
        (1usize..=3).prop_flat_map(|dim| {
            prop::collection::vec((prop::collection::vec(0u32..=2, dim), -3i64..=3), 0..6).prop_map(move |terms| {
                let mut p = SparsePoly::zero(dim);
                for (mut alpha, c) in terms {
                    // keep total degree <= 4
                    while alpha.iter().sum::<u32>() > 4 {
                        let i = alpha.iter().position(|&a| a > 0).unwrap();
                        alpha[i] -= 1;
                    }
                    p.add_term(Exponent::new(alpha), rat_int(c));
                }
                p
            })
        })
    }

    fn arb_point(dim: usize, xmax: BigRational) -> impl Strategy<Value = Vec<BigRational>> {
        prop::collection::vec(-64i64..=64, dim).prop_map(move |v| v.into_iter().map(|i| &xmax * rat(i, 64)).collect())
    }

    fn all_alphas(dim: usize, max: u32) -> Vec<Exponent> {
        let mut out = vec![Exponent::zero(dim)];
        for v in 0..dim {
            let mut next = Vec::new();
            for e in &out {
                for a in 0..=max {
                    let mut p = e.powers().to_vec();
                    p[v] = a;
                    if p.iter().sum::<u32>() <= max {
                        next.push(Exponent::new(p));
                    }
                }
            }
            out = next;
        }
        out
    }

    proptest! {
        #[test]
        fn value_bound_dominates(
            (p, x, xmax) in (arb_poly(), arb_rational(2).prop_map(|q| q.abs()))
                .prop_flat_map(|(p, xmax)| {
                    let d = p.dim();
                    (Just(p), arb_point(d, xmax.clone()), Just(xmax))
                })
        ) {
            prop_assert!(p.evaluate(&x).unwrap().abs() <= p.eval_bound(&xmax));
        }

        #[test]
        fn derivative_bound_dominates(
            (p, x, xmax) in (arb_poly(), arb_rational(2).prop_map(|q| q.abs()))
                .prop_flat_map(|(p, xmax)| {
                    let d = p.dim();
                    (Just(p), arb_point(d, xmax.clone()), Just(xmax))
                })
        ) {
            for alpha in all_alphas(p.dim(), p.degree()) {
                let v = p.partial_derivative(&alpha).evaluate(&x).unwrap().abs();
                prop_assert!(v <= p.deriv_eval_bound(&alpha, &xmax).unwrap());
            }
        }

        #[test]
        fn lipschitz_bound_dominates(
            (p, a, b, m) in (arb_poly(), arb_rational(2).prop_map(|q| q.abs()))
                .prop_flat_map(|(p, m)| {
                    let d = p.dim();
                    (Just(p), arb_point(d, m.clone()), arb_point(d, m.clone()), Just(m))
                })
        ) {
            let lhs = (p.evaluate(&b).unwrap() - p.evaluate(&a).unwrap()).abs();
            let dist = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).max().unwrap();
            prop_assert!(lhs <= p.lipschitz_bound(&m) * dist);
        }

        #[test]
        fn partials_commute(p in arb_poly(), s in 0usize..3, t in 0usize..3) {
            let d = p.dim();
            let a = Exponent::unit(d, s % d);
            let b = Exponent::new((0..d).map(|i| u32::from(i == t % d) * 2).collect());
            let ab = p.partial_derivative(&a).partial_derivative(&b);
            let ba = p.partial_derivative(&b).partial_derivative(&a);
            prop_assert_eq!(&ab, &ba);
            prop_assert_eq!(&ab, &p.partial_derivative(&a.add(&b)));
        }
    }
}

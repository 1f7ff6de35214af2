//! Built-in problems with closed-form solutions.

use num_traits::{One, Signed, Zero};
use pivp_core::numeric::{ceil_u64, exp_enclosure, exp_upper, ln2_lower, rat, rat_int, Enclosure};
use pivp_core::poly::{PolyVector, SparsePoly};
use pivp_core::taylor::PivpProblem;
use pivp_core::{BigInt, BigRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Exp,
    Decay,
    Harmonic,
    Riccati,
    Logistic,
}

#[derive(Debug, Clone)]
pub struct ReferenceProblem {
    pub name: &'static str,
    pub kind: ReferenceKind,
    pub problem: PivpProblem,
}

pub const NAMES: [&str; 5] = ["exp", "decay", "harmonic", "riccati", "logistic"];

fn scalar(terms: &[(u32, i64)]) -> PolyVector {
    PolyVector::new(vec![SparsePoly::from_terms(1, terms.iter().map(|&(e, c)| (vec![e], rat_int(c))))]).unwrap()
}

impl ReferenceProblem {
    pub fn by_name(name: &str) -> Option<Self> {
        let (kind, p, y0) = match name {
            "exp" => (ReferenceKind::Exp, scalar(&[(1, 1)]), vec![rat_int(1)]),
            "decay" => (ReferenceKind::Decay, scalar(&[(1, -1)]), vec![rat_int(1)]),
            "harmonic" => (
                ReferenceKind::Harmonic,
                PolyVector::new(vec![SparsePoly::var(2, 1), -&SparsePoly::var(2, 0)]).unwrap(),
                vec![rat_int(1), rat_int(0)],
            ),
            "riccati" => (ReferenceKind::Riccati, scalar(&[(2, 1)]), vec![rat(1, 2)]),
            "logistic" => (ReferenceKind::Logistic, scalar(&[(1, 1), (2, -1)]), vec![rat(1, 2)]),
            _ => return None,
        };
        let name = NAMES.iter().find(|n| **n == name).expect("listed");
        Some(Self { name, kind, problem: PivpProblem::new(p, rat_int(0), y0).unwrap() })
    }

    pub fn all() -> Vec<Self> {
        NAMES.iter().map(|n| Self::by_name(n).unwrap()).collect()
    }

    /// A bound on `sup |y(t)|` over `[t0, t0 + T]` for `T >= 0`; `None` if
    /// the solution does not exist that long.
    pub fn y_bound(&self, t: &BigRational) -> Option<BigRational> {
        if t.is_negative() {
            return None;
        }
        match self.kind {
            ReferenceKind::Exp => Some(BigRational::from_integer(BigInt::from(ceil_u64(&exp_upper(t))))),
            ReferenceKind::Decay | ReferenceKind::Harmonic | ReferenceKind::Logistic => Some(rat_int(1)),
            // y = 1 / (2 - t)
            ReferenceKind::Riccati => (*t < rat_int(2)).then(|| (rat_int(2) - t).recip()),
        }
    }

    /// Encloses `y(t0 + T)` with width below `2^-bits`.
    pub fn oracle(&self, t: &BigRational, bits: u64) -> Vec<Enclosure> {
        let work = bits + 8;
        match self.kind {
            ReferenceKind::Exp => vec![exp_enclosure(t, work)],
            ReferenceKind::Decay => vec![exp_enclosure(&-t, work)],
            ReferenceKind::Harmonic => {
                let (s, c) = sin_cos_enclosure(t, work);
                vec![c, s.neg()]
            }
            ReferenceKind::Riccati => vec![Enclosure::point((rat_int(2) - t).recip())],
            ReferenceKind::Logistic => {
                // 1 / (1 + e^-t)
                let e = exp_enclosure(&-t, work + 2);
                let one = BigRational::one();
                vec![Enclosure { lo: (&one + &e.hi).recip(), hi: (&one + &e.lo).recip() }]
            }
        }
    }

    /// Oracle precision whose width stays below `e^(-mu-2)`.
    pub fn oracle_bits(mu: u64) -> u64 {
        ceil_u64(&(rat_int(mu as i64 + 2) / ln2_lower())) + 4
    }
}

/// Enclosures of `sin x` and `cos x`, from the alternating series with the
/// first omitted term as remainder bound.
pub fn sin_cos_enclosure(x: &BigRational, bits: u64) -> (Enclosure, Enclosure) {
    let tol = BigRational::new(BigInt::one(), BigInt::one() << (bits as usize + 1));
    let mut sin = BigRational::zero();
    let mut cos = BigRational::zero();
    // term = x^n / n!
    let mut term = BigRational::one();
    let mut n: u64 = 0;
    loop {
        if n > 0 {
            term = term * x / rat_int(n as i64);
        }
        let signed = if (n / 2).is_multiple_of(2) { term.clone() } else { -term.clone() };
        if n.is_multiple_of(2) {
            cos += signed;
        } else {
            sin += signed;
        }
        n += 1;
        // once terms decrease, the next one bounds both remainders
        if term.abs() * x.abs() < &tol * rat_int(n as i64) && rat_int(n as i64) > x.abs() {
            let rem = (&term * x).abs() / rat_int(n as i64);
            let rem2 = (&rem * x).abs() / rat_int(n as i64 + 1);
            let r = rem.max(rem2);
            return (Enclosure { lo: &sin - &r, hi: &sin + &r }, Enclosure { lo: &cos - &r, hi: &cos + &r });
        }
    }
}

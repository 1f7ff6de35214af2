//! Evaluation of `p` on truncated power series.
//!
//! Every monomial of `p` is decomposed into a chain of binary products whose
//! intermediate series are shared between monomials. Coefficient `j` of a
//! product series only needs coefficients `0..=j` of its operands, so the
//! solution series can be lifted one coefficient at a time:
//! `y_{j+1} = h * [p(y)]_j / (j + 1)` for the time-scaled series `y(h s)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::scalar::SeriesScalar;
use crate::poly::{Exponent, PolyVector};

#[derive(Debug, Clone)]
enum Node {
    Square(usize),
    Product(usize, usize),
}

#[derive(Debug, Clone)]
pub struct SeriesProgram {
    dim: usize,
    /// Series `dim + k` is `nodes[k]`; series `0..dim` are the state variables.
    nodes: Vec<Node>,
    /// Per component: constant term and `(series, coefficient)` pairs.
    outputs: Vec<(BigRational, Vec<(usize, BigRational)>)>,
}

impl SeriesProgram {
    pub fn compile(p: &PolyVector) -> Self {
        let dim = p.dim();
        let mut memo: HashMap<Exponent, usize> = HashMap::new();
        for v in 0..dim {
            memo.insert(Exponent::unit(dim, v), v);
        }
        let mut nodes = Vec::new();
        let mut outputs = Vec::with_capacity(dim);
        for component in p.components() {
            let mut constant = BigRational::zero();
            let mut terms = Vec::new();
            for (e, c) in component.terms() {
                if e.is_zero() {
                    constant = c.clone();
                } else {
                    terms.push((intern(e, dim, &mut memo, &mut nodes), c.clone()));
                }
            }
            outputs.push((constant, terms));
        }
        Self { dim, nodes, outputs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn product_count(&self) -> usize {
        self.nodes.len()
    }

    /// Coefficients `0..order` of `y(h s)` where `y' = p(y)`, `y(0) = z`.
    /// Returns `coeffs[j][i]`.
    pub fn lift<S: SeriesScalar>(&self, z: &[S], order: usize, h: &BigRational, ctx: &S::Ctx) -> Vec<Vec<S>> {
        assert_eq!(z.len(), self.dim);
        assert!(order >= 1);
        let total = self.dim + self.nodes.len();
        let mut series: Vec<Vec<S>> = (0..total).map(|_| Vec::with_capacity(order)).collect();
        for (v, zv) in z.iter().enumerate() {
            series[v].push(zv.clone());
        }
        let constants: Vec<S> = self.outputs.iter().map(|(c, _)| S::from_rational(c, ctx)).collect();
        for j in 0..order - 1 {
            for (k, node) in self.nodes.iter().enumerate() {
                let value = match *node {
                    Node::Square(a) => S::square_coeff(&series[a], j, ctx),
                    Node::Product(a, b) => S::convolve(&series[a], &series[b], j, ctx),
                };
                series[self.dim + k].push(value);
            }
            let factor = h / BigRational::from_integer(BigInt::from(j + 1));
            for (i, (_, terms)) in self.outputs.iter().enumerate() {
                let mut acc = if j == 0 { constants[i].clone() } else { S::zero_in(ctx) };
                for (s, c) in terms {
                    acc.add_assign(&series[*s][j].scale(c, ctx));
                }
                let next = acc.scale(&factor, ctx);
                series[i].push(next);
            }
        }
        (0..order).map(|j| (0..self.dim).map(|v| series[v][j].clone()).collect()).collect()
    }
}

fn intern(e: &Exponent, dim: usize, memo: &mut HashMap<Exponent, usize>, nodes: &mut Vec<Node>) -> usize {
    if let Some(&idx) = memo.get(e) {
        return idx;
    }
    let powers = e.powers();
    let node = if powers.iter().all(|a| a % 2 == 0) {
        let half = Exponent::new(powers.iter().map(|a| a / 2).collect());
        Node::Square(intern(&half, dim, memo, nodes))
    } else {
        let v = powers.iter().position(|&a| a % 2 == 1).expect("odd exponent exists");
        let rest = e.checked_sub(&Exponent::unit(dim, v)).expect("positive exponent");
        Node::Product(intern(&rest, dim, memo, nodes), v)
    };
    nodes.push(node);
    let idx = dim + nodes.len() - 1;
    memo.insert(e.clone(), idx);
    idx
}

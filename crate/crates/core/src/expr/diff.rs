use std::collections::HashMap;

use num_traits::One;

use super::{Expr, Func, Kind, Rational};

/// Partial differentiation with respect to one symbol.
///
/// Shared subtrees are differentiated once; keep the differentiator around
/// when taking the derivative of many expressions that share structure.
pub struct Differentiator {
    symbol: String,
    memo: HashMap<usize, (Expr, Expr)>,
}

impl Differentiator {
    pub fn new(symbol: &str) -> Self {
        Differentiator { symbol: symbol.to_string(), memo: HashMap::new() }
    }

    pub fn diff(&mut self, e: &Expr) -> Expr {
        if let Some((key, d)) = self.memo.get(&e.node_id()) {
            // node ids are only stable while the node is alive; the memo holds it
            debug_assert!(key.ptr_eq(e));
            return d.clone();
        }
        let d = match e.kind() {
            Kind::Rational(_) => Expr::zero(),
            Kind::Symbol(s) => {
                if s.as_ref() == self.symbol {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| self.diff(x))),
            Kind::Product(xs) => {
                let mut terms = Vec::with_capacity(xs.len());
                for i in 0..xs.len() {
                    let di = self.diff(&xs[i]);
                    if di.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = xs.clone();
                    factors[i] = di;
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Kind::Power(b, exp) => {
                let db = self.diff(b);
                if db.is_zero() {
                    Expr::zero()
                } else {
                    Expr::product([
                        Expr::rational(*exp),
                        Expr::pow(b, exp - Rational::one()),
                        db,
                    ])
                }
            }
            Kind::Func(f, a) => {
                let da = self.diff(a);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    let outer = match f {
                        Func::Sin => Expr::cos(a.clone()),
                        Func::Cos => Expr::sin(a.clone()).neg(),
                        Func::Cot => Expr::sin(a.clone()).powi(-2).neg(),
                        Func::Sqrt => Expr::product([
                            Expr::frac(1, 2),
                            Expr::pow(a, Rational::new(-1, 2)),
                        ]),
                    };
                    Expr::product([outer, da])
                }
            }
        };
        self.memo.insert(e.node_id(), (e.clone(), d.clone()));
        d
    }
}

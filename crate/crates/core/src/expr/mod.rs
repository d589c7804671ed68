//! Symbolic scalar expressions with exact rational coefficients.
//!
//! Every [`Expr`] is kept in an automatically canonical form by its
//! constructors: sums and products are flattened, like terms and like bases
//! are merged, rational constants are folded and the children are ordered by
//! a fixed total order. [`simplify`] adds the heavier rewrites (expansion,
//! `sin² = 1 - cos²`, `cot = cos/sin`, `sqrt(u) = u^(1/2)`).
//!
//! No floating-point value is ever stored inside an expression; floats appear
//! only when an expression is evaluated against a [`Binding`].

mod diff;
mod eval;
mod parse;
mod print;
mod simplify;
mod verdict;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

pub use diff::Differentiator;
pub use eval::{Binding, Compiled};
pub use parse::parse;
pub use simplify::{expand, simplify};
pub use verdict::{is_zero, is_zero_all, Constraint, Method, SamplingDomain, Status, Verdict, ZeroTestPolicy};

/// Exact rational number used for coefficients and exponents.
pub type Rational = Rational64;

/// Errors raised by parsing and evaluating expressions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("sampling domain is empty or singular: {0}")]
    EmptyDomain(String),
}

/// The frozen set of elementary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Cot,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Cot => "cot",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "cot" => Some(Func::Cot),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// Node variants of an expression tree.
#[derive(Debug)]
pub enum Kind {
    Rational(Rational),
    Symbol(Arc<str>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Expr, Rational),
    Func(Func, Expr),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
    size: usize,
}

/// Immutable, cheaply clonable symbolic expression.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

fn rat_add(a: Rational, b: Rational) -> Rational {
    num_traits::CheckedAdd::checked_add(&a, &b).expect("rational overflow in addition")
}

fn rat_mul(a: Rational, b: Rational) -> Rational {
    num_traits::CheckedMul::checked_mul(&a, &b).expect("rational overflow in multiplication")
}

fn rat_pow(base: Rational, exp: i64) -> Option<Rational> {
    if exp == 0 {
        return Some(Rational::one());
    }
    if base.is_zero() {
        return if exp > 0 { Some(Rational::zero()) } else { None };
    }
    let mut acc = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        acc = num_traits::CheckedMul::checked_mul(&acc, &base)?;
    }
    Some(if exp < 0 { acc.recip() } else { acc })
}

fn int_root(value: i64, q: u32) -> Option<i64> {
    if value < 0 {
        return None;
    }
    let guess = (value as f64).powf(1.0 / q as f64).round() as i64;
    (guess.saturating_sub(1)..=guess + 1).find(|&c| c >= 0 && c.checked_pow(q) == Some(value))
}

fn kind_rank(kind: &Kind) -> u8 {
    match kind {
        Kind::Rational(_) => 0,
        Kind::Symbol(_) => 1,
        Kind::Func(..) => 2,
        Kind::Power(..) => 3,
        Kind::Product(_) => 4,
        Kind::Sum(_) => 5,
    }
}

fn hash_kind(kind: &Kind) -> u64 {
    let mut h = std::hash::DefaultHasher::new();
    kind_rank(kind).hash(&mut h);
    match kind {
        Kind::Rational(r) => {
            r.numer().hash(&mut h);
            r.denom().hash(&mut h);
        }
        Kind::Symbol(s) => s.hash(&mut h),
        Kind::Sum(xs) | Kind::Product(xs) => {
            xs.len().hash(&mut h);
            for x in xs {
                x.0.hash.hash(&mut h);
            }
        }
        Kind::Power(b, e) => {
            b.0.hash.hash(&mut h);
            e.numer().hash(&mut h);
            e.denom().hash(&mut h);
        }
        Kind::Func(f, a) => {
            f.hash(&mut h);
            a.0.hash.hash(&mut h);
        }
    }
    h.finish()
}

impl Expr {
    fn from_kind(kind: Kind) -> Expr {
        let size = match &kind {
            Kind::Rational(_) | Kind::Symbol(_) => 0,
            Kind::Sum(xs) | Kind::Product(xs) => xs.iter().fold(0usize, |acc, x| acc.saturating_add(x.0.size)),
            Kind::Power(b, _) => b.0.size,
            Kind::Func(_, a) => a.0.size,
        }
        .saturating_add(1);
        let hash = hash_kind(&kind);
        Expr(Arc::new(Node { kind, hash, size }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Number of nodes in the tree (shared subtrees counted once per use).
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn rational(r: Rational) -> Expr {
        Expr::from_kind(Kind::Rational(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(Rational::from_integer(n))
    }

    pub fn frac(p: i64, q: i64) -> Expr {
        Expr::rational(Rational::new(p, q))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn symbol(name: &str) -> Expr {
        Expr::from_kind(Kind::Symbol(Arc::from(name)))
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.kind() {
            Kind::Rational(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self.kind() {
            Kind::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind(), Kind::Rational(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.kind(), Kind::Rational(r) if r.is_one())
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub(crate) fn node_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Canonical sum of `terms`.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut order: Vec<Expr> = Vec::new();
        let mut coeffs: HashMap<Expr, Rational> = HashMap::new();
        let mut stack: Vec<Expr> = terms.into_iter().collect();
        stack.reverse();
        while let Some(t) = stack.pop() {
            match t.kind() {
                Kind::Rational(r) => constant = rat_add(constant, *r),
                Kind::Sum(xs) => stack.extend(xs.iter().rev().cloned()),
                _ => {
                    let (c, rest) = t.split_coefficient();
                    match coeffs.get_mut(&rest) {
                        Some(acc) => *acc = rat_add(*acc, c),
                        None => {
                            coeffs.insert(rest.clone(), c);
                            order.push(rest);
                        }
                    }
                }
            }
        }
        let mut out: Vec<Expr> = order
            .into_iter()
            .filter_map(|rest| {
                let c = coeffs[&rest];
                (!c.is_zero()).then(|| rest.scaled(c))
            })
            .collect();
        out.sort();
        if !constant.is_zero() {
            out.insert(0, Expr::rational(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_kind(Kind::Sum(out)),
        }
    }

    /// Canonical product of `factors`.
    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coef = Rational::one();
        let mut order: Vec<Expr> = Vec::new();
        let mut exps: HashMap<Expr, Rational> = HashMap::new();
        let mut stack: Vec<Expr> = factors.into_iter().collect();
        stack.reverse();
        let (mut zero, mut undefined) = (false, false);
        while let Some(f) = stack.pop() {
            match f.kind() {
                Kind::Rational(r) => {
                    zero |= r.is_zero();
                    coef = rat_mul(coef, *r);
                }
                Kind::Product(xs) => stack.extend(xs.iter().rev().cloned()),
                _ => {
                    let (base, e) = f.base_exponent();
                    if base.is_zero() {
                        undefined = true;
                        continue;
                    }
                    match exps.get_mut(&base) {
                        Some(acc) => *acc = rat_add(*acc, e),
                        None => {
                            exps.insert(base.clone(), e);
                            order.push(base);
                        }
                    }
                }
            }
        }
        // a reciprocal of zero poisons the whole product
        if undefined {
            return Expr::zero().recip();
        }
        if zero {
            return Expr::zero();
        }
        let mut out: Vec<Expr> = Vec::with_capacity(order.len());
        let mut refold: Vec<Expr> = Vec::new();
        for base in order {
            let e = exps[&base];
            if e.is_zero() {
                continue;
            }
            let p = Expr::pow(&base, e);
            match p.kind() {
                Kind::Rational(r) => {
                    if r.is_zero() {
                        return Expr::zero();
                    }
                    coef = rat_mul(coef, *r);
                }
                Kind::Product(_) => refold.push(p),
                _ => out.push(p),
            }
        }
        if !refold.is_empty() {
            out.extend(refold);
            out.push(Expr::rational(coef));
            return Expr::product(out);
        }
        out.sort();
        if out.is_empty() {
            return Expr::rational(coef);
        }
        if !coef.is_one() {
            out.insert(0, Expr::rational(coef));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::from_kind(Kind::Product(out))
        }
    }

    /// Canonical power `base^exp` for a rational exponent.
    pub fn pow(base: &Expr, exp: Rational) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base.clone();
        }
        match base.kind() {
            Kind::Rational(c) => {
                if exp.is_integer() {
                    if let Some(v) = rat_pow(*c, exp.to_integer()) {
                        return Expr::rational(v);
                    }
                } else if c.is_positive() {
                    let q = *exp.denom() as u32;
                    if let (Some(n), Some(d)) = (int_root(*c.numer(), q), int_root(*c.denom(), q)) {
                        if let Some(v) = rat_pow(Rational::new(n, d), *exp.numer()) {
                            return Expr::rational(v);
                        }
                    }
                } else if c.is_zero() && exp.is_positive() {
                    return Expr::zero();
                }
                if c.is_zero() {
                    // every negative power of zero is the same undefined value
                    return Expr::from_kind(Kind::Power(base.clone(), -Rational::one()));
                }
                Expr::from_kind(Kind::Power(base.clone(), exp))
            }
            Kind::Power(inner, e1) => {
                let even_integer = e1.is_integer() && e1.to_integer() % 2 == 0;
                if exp.is_integer() || !even_integer {
                    Expr::pow(inner, rat_mul(*e1, exp))
                } else {
                    Expr::from_kind(Kind::Power(base.clone(), exp))
                }
            }
            Kind::Product(xs) => {
                if exp.is_integer() {
                    Expr::product(xs.iter().map(|x| Expr::pow(x, exp)))
                } else {
                    let (c, rest) = base.split_coefficient();
                    if c.is_positive() && !c.is_one() {
                        Expr::product([
                            Expr::pow(&Expr::rational(c), exp),
                            Expr::from_kind(Kind::Power(rest, exp)),
                        ])
                    } else {
                        Expr::from_kind(Kind::Power(base.clone(), exp))
                    }
                }
            }
            Kind::Func(Func::Sqrt, arg) => Expr::pow(&Expr::pow(arg, Rational::new(1, 2)), exp),
            _ => Expr::from_kind(Kind::Power(base.clone(), exp)),
        }
    }

    pub fn powi(&self, n: i64) -> Expr {
        Expr::pow(self, Rational::from_integer(n))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_rational() {
            if c.is_zero() {
                return match func {
                    Func::Sin | Func::Sqrt => Expr::zero(),
                    Func::Cos => Expr::one(),
                    Func::Cot => Expr::from_kind(Kind::Func(func, arg)),
                };
            }
            if func == Func::Sqrt && c.is_positive() {
                return Expr::pow(&arg, Rational::new(1, 2));
            }
        }
        let (c, rest) = arg.split_coefficient();
        if c.is_negative() && func != Func::Sqrt {
            let flipped = rest.scaled(-c);
            let inner = Expr::from_kind(Kind::Func(func, flipped));
            return match func {
                Func::Cos => inner,
                _ => inner.neg(),
            };
        }
        Expr::from_kind(Kind::Func(func, arg))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::apply(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::apply(Func::Cos, arg)
    }

    pub fn cot(arg: Expr) -> Expr {
        Expr::apply(Func::Cot, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::apply(Func::Sqrt, arg)
    }

    pub fn neg(&self) -> Expr {
        self.scaled(-Rational::one())
    }

    /// Multiply by a rational constant.
    pub fn scaled(&self, c: Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        match self.kind() {
            Kind::Rational(r) => Expr::rational(rat_mul(*r, c)),
            Kind::Power(b, _) if b.is_zero() => self.clone(),
            Kind::Product(xs) => {
                let (c0, _) = self.split_coefficient();
                let coef = rat_mul(c0, c);
                let rest = if xs[0].as_rational().is_some() { &xs[1..] } else { &xs[..] };
                let mut out = Vec::with_capacity(rest.len() + 1);
                if !coef.is_one() {
                    out.push(Expr::rational(coef));
                }
                out.extend(rest.iter().cloned());
                if out.len() == 1 {
                    out.pop().unwrap()
                } else {
                    Expr::from_kind(Kind::Product(out))
                }
            }
            _ => Expr::from_kind(Kind::Product(vec![Expr::rational(c), self.clone()])),
        }
    }

    /// Split into `(coefficient, rest)` with `coefficient * rest == self`.
    pub fn split_coefficient(&self) -> (Rational, Expr) {
        match self.kind() {
            Kind::Rational(r) => (*r, Expr::one()),
            Kind::Product(xs) => match xs[0].as_rational() {
                Some(c) => {
                    let rest = if xs.len() == 2 {
                        xs[1].clone()
                    } else {
                        Expr::from_kind(Kind::Product(xs[1..].to_vec()))
                    };
                    (c, rest)
                }
                None => (Rational::one(), self.clone()),
            },
            _ => (Rational::one(), self.clone()),
        }
    }

    fn base_exponent(&self) -> (Expr, Rational) {
        match self.kind() {
            Kind::Power(b, e) => (b.clone(), *e),
            _ => (self.clone(), Rational::one()),
        }
    }

    /// Free symbols in sorted order.
    pub fn symbols(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.node_id()) {
                continue;
            }
            match e.kind() {
                Kind::Rational(_) => {}
                Kind::Symbol(s) => {
                    out.insert(s.to_string());
                }
                Kind::Sum(xs) | Kind::Product(xs) => stack.extend(xs.iter().cloned()),
                Kind::Power(b, _) => stack.push(b.clone()),
                Kind::Func(_, a) => stack.push(a.clone()),
            }
        }
        out.into_iter().collect()
    }

    pub fn depends_on(&self, symbol: &str) -> bool {
        self.symbols().iter().any(|s| s == symbol)
    }

    /// Replace symbols by expressions.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        let mut memo: HashMap<usize, Expr> = HashMap::new();
        self.substitute_memo(map, &mut memo)
    }

    fn substitute_memo(&self, map: &HashMap<String, Expr>, memo: &mut HashMap<usize, Expr>) -> Expr {
        if let Some(hit) = memo.get(&self.node_id()) {
            return hit.clone();
        }
        let out = match self.kind() {
            Kind::Rational(_) => self.clone(),
            Kind::Symbol(s) => map.get(s.as_ref()).cloned().unwrap_or_else(|| self.clone()),
            Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| x.substitute_memo(map, memo))),
            Kind::Product(xs) => Expr::product(xs.iter().map(|x| x.substitute_memo(map, memo))),
            Kind::Power(b, e) => Expr::pow(&b.substitute_memo(map, memo), *e),
            Kind::Func(f, a) => Expr::apply(*f, a.substitute_memo(map, memo)),
        };
        memo.insert(self.node_id(), out.clone());
        out
    }

    /// Evaluate at a binding.
    pub fn eval(&self, binding: &Binding) -> Result<f64, ExprError> {
        Compiled::new(std::slice::from_ref(self)).eval_one(binding)
    }

    /// Symbolic partial derivative.
    pub fn diff(&self, symbol: &str) -> Expr {
        Differentiator::new(symbol).diff(self)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.clone()])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs.neg()])
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sum([self.clone(), rhs.neg()])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.clone()])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs.recip()])
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::product([self.clone(), rhs.recip()])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.size != other.0.size {
            return false;
        }
        match (self.kind(), other.kind()) {
            (Kind::Rational(a), Kind::Rational(b)) => a == b,
            (Kind::Symbol(a), Kind::Symbol(b)) => a == b,
            (Kind::Sum(a), Kind::Sum(b)) | (Kind::Product(a), Kind::Product(b)) => a == b,
            (Kind::Power(a, e), Kind::Power(b, f)) => e == f && a == b,
            (Kind::Func(f, a), Kind::Func(g, b)) => f == g && a == b,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Expr) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let (ra, rb) = (kind_rank(self.kind()), kind_rank(other.kind()));
        if ra != rb {
            return ra.cmp(&rb);
        }
        match (self.kind(), other.kind()) {
            (Kind::Rational(a), Kind::Rational(b)) => a.cmp(b),
            (Kind::Symbol(a), Kind::Symbol(b)) => a.cmp(b),
            (Kind::Func(f, a), Kind::Func(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            (Kind::Power(a, e), Kind::Power(b, f)) => a.cmp(b).then_with(|| e.cmp(f)),
            (Kind::Sum(a), Kind::Sum(b)) | (Kind::Product(a), Kind::Product(b)) => {
                a.len().cmp(&b.len()).then_with(|| a.cmp(b))
            }
            _ => unreachable!("ranks already compared"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Expr) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::symbol("x")
    }

    #[test]
    fn like_terms_collect() {
        let e = &(&x() + &x()) - &x().scaled(Rational::from_integer(2));
        assert!(e.is_zero());
        let e = Expr::sum([x(), Expr::int(3), x(), Expr::int(-1)]);
        assert_eq!(e, Expr::sum([Expr::int(2), x().scaled(Rational::from_integer(2))]));
    }

    #[test]
    fn like_bases_merge() {
        let e = &x() * &x().recip();
        assert!(e.is_one());
        let e = Expr::product([x(), x(), x().powi(3)]);
        assert_eq!(e, x().powi(5));
    }

    #[test]
    fn power_rules() {
        assert!(Expr::pow(&x(), Rational::zero()).is_one());
        assert_eq!(Expr::pow(&x(), Rational::one()), x());
        assert_eq!(Expr::pow(&Expr::int(4), Rational::new(1, 2)), Expr::int(2));
        assert_eq!(Expr::pow(&Expr::frac(8, 27), Rational::new(-1, 3)), Expr::frac(3, 2));
        // (x^2)^(1/2) is |x|, so it must not collapse
        let sq = Expr::pow(&x().powi(2), Rational::new(1, 2));
        assert!(matches!(sq.kind(), Kind::Power(_, e) if *e == Rational::new(1, 2)));
        let half = Expr::pow(&x(), Rational::new(1, 2));
        assert_eq!(half.powi(2), x());
    }

    #[test]
    fn odd_functions_pull_sign() {
        let s = Expr::sin(x().neg());
        assert_eq!(s, Expr::sin(x()).neg());
        assert_eq!(Expr::cos(x().neg()), Expr::cos(x()));
        assert!(Expr::sin(Expr::zero()).is_zero());
    }

    #[test]
    fn zero_product_annihilates() {
        assert!(Expr::product([x(), Expr::zero(), Expr::sin(x())]).is_zero());
    }

    #[test]
    fn symbols_are_sorted_and_unique() {
        let e = parse("b*a + sin(a) + c^2").unwrap();
        assert_eq!(e.symbols(), vec!["a", "b", "c"]);
    }

    #[test]
    fn substitute_replaces() {
        let e = parse("x^2 + y").unwrap();
        let mut map = HashMap::new();
        map.insert("x".to_string(), Expr::int(3));
        assert_eq!(e.substitute(&map), parse("9 + y").unwrap());
    }
}

use std::collections::HashMap;

use num_traits::Signed;

use super::{Expr, Func, Kind, Rational};

/// Upper bound on the number of terms a single distribution may produce.
const EXPANSION_LIMIT: usize = 20_000;
/// Largest positive integer power of a sum that is multiplied out.
const MAX_EXPANDED_POWER: i64 = 8;

/// Bounded rewrite to canonical form.
///
/// Applies `cot(u) -> cos(u)/sin(u)` and `sqrt(u) -> u^(1/2)`, distributes
/// products over sums, and reduces `sin(u)^k` for `k >= 2` with
/// `sin² = 1 - cos²`. Anything beyond that (common denominators, factoring)
/// is left to the numeric zero test.
pub fn simplify(e: &Expr) -> Expr {
    let mut memo = HashMap::new();
    let mut cur = expand(&normalize_functions(e, &mut memo));
    for _ in 0..16 {
        let mut memo = HashMap::new();
        let next = reduce_sine_powers(&cur, &mut memo);
        if next == cur {
            break;
        }
        cur = expand(&next);
    }
    cur
}

fn normalize_functions(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(hit) = memo.get(&e.node_id()) {
        return hit.clone();
    }
    let out = match e.kind() {
        Kind::Rational(_) | Kind::Symbol(_) => e.clone(),
        Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| normalize_functions(x, memo))),
        Kind::Product(xs) => Expr::product(xs.iter().map(|x| normalize_functions(x, memo))),
        Kind::Power(b, p) => Expr::pow(&normalize_functions(b, memo), *p),
        Kind::Func(f, a) => {
            let a = normalize_functions(a, memo);
            match f {
                Func::Cot => Expr::product([Expr::cos(a.clone()), Expr::sin(a).recip()]),
                Func::Sqrt => Expr::pow(&a, Rational::new(1, 2)),
                _ => Expr::apply(*f, a),
            }
        }
    };
    memo.insert(e.node_id(), out.clone());
    out
}

fn reduce_sine_powers(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(hit) = memo.get(&e.node_id()) {
        return hit.clone();
    }
    let out = match e.kind() {
        Kind::Rational(_) | Kind::Symbol(_) => e.clone(),
        Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| reduce_sine_powers(x, memo))),
        Kind::Product(xs) => Expr::product(xs.iter().map(|x| reduce_sine_powers(x, memo))),
        Kind::Power(b, p) => {
            let b = reduce_sine_powers(b, memo);
            match b.kind() {
                Kind::Func(Func::Sin, u) if p.is_integer() && p.to_integer() >= 2 => {
                    let one_minus_cos2 = Expr::sum([Expr::one(), Expr::cos(u.clone()).powi(2).neg()]);
                    Expr::product([Expr::pow(&b, p - Rational::from_integer(2)), one_minus_cos2])
                }
                _ => Expr::pow(&b, *p),
            }
        }
        Kind::Func(f, a) => Expr::apply(*f, reduce_sine_powers(a, memo)),
    };
    memo.insert(e.node_id(), out.clone());
    out
}

/// Distribute products over sums and multiply out small positive integer
/// powers of sums.
pub fn expand(e: &Expr) -> Expr {
    let mut memo = HashMap::new();
    expand_memo(e, &mut memo)
}

fn terms_of(e: &Expr) -> Vec<Expr> {
    match e.kind() {
        Kind::Sum(xs) => xs.clone(),
        _ => vec![e.clone()],
    }
}

fn distribute(factors: Vec<Expr>) -> Expr {
    let mut acc: Vec<Expr> = vec![Expr::one()];
    let mut held: Vec<Expr> = Vec::new();
    for f in factors {
        let terms = terms_of(&f);
        if terms.len() == 1 || acc.len() * terms.len() > EXPANSION_LIMIT {
            if terms.len() == 1 {
                acc = acc.iter().map(|a| a * &f).collect();
            } else {
                held.push(f);
            }
            continue;
        }
        let mut next = Vec::with_capacity(acc.len() * terms.len());
        for a in &acc {
            for t in &terms {
                next.push(a * t);
            }
        }
        acc = terms_of(&Expr::sum(next));
    }
    let total = Expr::sum(acc);
    if held.is_empty() {
        total
    } else {
        held.push(total);
        Expr::product(held)
    }
}

fn expand_memo(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(hit) = memo.get(&e.node_id()) {
        return hit.clone();
    }
    let out = match e.kind() {
        Kind::Rational(_) | Kind::Symbol(_) => e.clone(),
        Kind::Sum(xs) => Expr::sum(xs.iter().map(|x| expand_memo(x, memo))),
        Kind::Product(xs) => {
            let mut factors = Vec::with_capacity(xs.len());
            for x in xs {
                let ex = expand_memo(x, memo);
                factors.extend(power_factors(&ex));
            }
            distribute(factors)
        }
        Kind::Power(..) => {
            let ex = expand_power(e, memo);
            distribute(power_factors(&ex))
        }
        Kind::Func(f, a) => Expr::apply(*f, expand_memo(a, memo)),
    };
    memo.insert(e.node_id(), out.clone());
    out
}

fn expand_power(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    match e.kind() {
        Kind::Power(b, p) => Expr::pow(&expand_memo(b, memo), *p),
        _ => e.clone(),
    }
}

/// Split `sum^n` with small positive `n` into `n` copies of the sum.
fn power_factors(e: &Expr) -> Vec<Expr> {
    if let Kind::Power(b, p) = e.kind() {
        if matches!(b.kind(), Kind::Sum(_))
            && p.is_integer()
            && p.is_positive()
            && p.to_integer() <= MAX_EXPANDED_POWER
        {
            return vec![b.clone(); p.to_integer() as usize];
        }
    }
    if let Kind::Product(xs) = e.kind() {
        if xs.iter().any(|x| matches!(x.kind(), Kind::Power(b, p) if matches!(b.kind(), Kind::Sum(_)) && p.is_integer() && p.is_positive())) {
            return xs.iter().flat_map(power_factors).collect();
        }
    }
    vec![e.clone()]
}

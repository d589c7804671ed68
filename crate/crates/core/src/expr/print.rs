use std::fmt::{self, Write};

use num_traits::{One, Signed};

use super::{Expr, Kind, Rational};

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Factor,
    Base,
}

fn write_rational(out: &mut String, r: Rational) {
    if r.is_integer() {
        write!(out, "{}", r.numer()).unwrap();
    } else {
        write!(out, "{}/{}", r.numer(), r.denom()).unwrap();
    }
}

fn needs_parens(e: &Expr, ctx: Ctx) -> bool {
    match (e.kind(), ctx) {
        (_, Ctx::Top) => false,
        (Kind::Sum(_), _) => true,
        (Kind::Rational(r), Ctx::Base) => r.is_negative() || !r.is_integer(),
        (Kind::Rational(r), Ctx::Factor) => r.is_negative(),
        (Kind::Product(_), Ctx::Base) | (Kind::Power(..), Ctx::Base) => true,
        (Kind::Product(_), Ctx::Factor) => e.split_coefficient().0.is_negative(),
        (Kind::Power(_, exp), Ctx::Factor) => exp.is_negative(),
        _ => false,
    }
}

fn write(out: &mut String, e: &Expr, ctx: Ctx) {
    if needs_parens(e, ctx) {
        out.push('(');
        write(out, e, Ctx::Top);
        out.push(')');
        return;
    }
    match e.kind() {
        Kind::Rational(r) => write_rational(out, *r),
        Kind::Symbol(s) => out.push_str(s),
        Kind::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write(out, a, Ctx::Top);
            out.push(')');
        }
        Kind::Power(b, exp) if exp.is_negative() => write_fraction(out, Rational::one(), &[], &[(b, -exp)]),
        Kind::Power(b, exp) => write_power(out, b, *exp),
        Kind::Product(_) => {
            let (coef, rest) = e.split_coefficient();
            let factors: Vec<Expr> = match rest.kind() {
                Kind::Product(xs) => xs.clone(),
                _ => vec![rest.clone()],
            };
            let mut num = Vec::new();
            let mut den = Vec::new();
            for f in &factors {
                match f.kind() {
                    Kind::Power(b, exp) if exp.is_negative() => den.push((b, -exp)),
                    _ => num.push(f.clone()),
                }
            }
            write_fraction(out, coef, &num, &den);
        }
        Kind::Sum(xs) => {
            for (i, t) in xs.iter().enumerate() {
                let (c, _) = t.split_coefficient();
                if i == 0 {
                    write(out, t, Ctx::Top);
                } else if c.is_negative() {
                    out.push_str(" - ");
                    let t = t.neg();
                    let ctx = if matches!(t.kind(), Kind::Sum(_)) { Ctx::Factor } else { Ctx::Top };
                    write(out, &t, ctx);
                } else {
                    out.push_str(" + ");
                    write(out, t, Ctx::Top);
                }
            }
        }
    }
}

fn write_fraction(out: &mut String, coef: Rational, num: &[Expr], den: &[(&Expr, Rational)]) {
    if coef.is_negative() {
        out.push('-');
    }
    let mag = coef.abs();
    let mut first = true;
    if !mag.is_one() || num.is_empty() {
        write_rational(out, mag);
        first = false;
    }
    for f in num {
        if !first {
            out.push('*');
        }
        write(out, f, Ctx::Factor);
        first = false;
    }
    if den.is_empty() {
        return;
    }
    out.push('/');
    // written as stored: rebuilding the power would fold e.g. 0^2 to 0
    let write_den = |out: &mut String, (b, e): &(&Expr, Rational)| {
        if e.is_one() {
            write(out, b, Ctx::Factor);
        } else {
            write_power(out, b, *e);
        }
    };
    if den.len() == 1 {
        write_den(out, &den[0]);
    } else {
        out.push('(');
        for (i, d) in den.iter().enumerate() {
            if i > 0 {
                out.push('*');
            }
            write_den(out, d);
        }
        out.push(')');
    }
}

fn write_power(out: &mut String, base: &Expr, exp: Rational) {
    write(out, base, Ctx::Base);
    out.push('^');
    if exp.is_integer() {
        write!(out, "{}", exp.numer()).unwrap();
    } else {
        out.push('(');
        write_rational(out, exp);
        out.push(')');
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write(&mut s, self, Ctx::Top);
        f.write_str(&s)
    }
}

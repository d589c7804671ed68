use std::collections::{BTreeMap, HashMap};

use super::{Expr, ExprError, Func, Kind};

/// Numeric values for symbols: coordinates and model parameters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding {
    values: BTreeMap<String, f64>,
}

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        let mut b = Binding::new();
        for (k, v) in pairs {
            b.set(k, *v);
        }
        b
    }

    pub fn set(&mut self, symbol: &str, value: f64) -> &mut Self {
        self.values.insert(symbol.to_string(), value);
        self
    }

    pub fn with(mut self, symbol: &str, value: f64) -> Self {
        self.set(symbol, value);
        self
    }

    pub fn get(&self, symbol: &str) -> Option<f64> {
        self.values.get(symbol).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Mul(usize, usize),
    Powi(usize, i32),
    Powf(usize, f64),
    Sin(usize),
    Cos(usize),
    Cot(usize),
    Sqrt(usize),
}

/// A batch of expressions flattened into one straight-line program.
///
/// Structurally equal subexpressions are computed once, so evaluating many
/// related expressions (the components of a differential form, say) at many
/// sample points stays linear in the size of the shared DAG.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    args: Vec<usize>,
    outputs: Vec<usize>,
    symbols: Vec<String>,
}

struct Builder {
    ops: Vec<Op>,
    args: Vec<usize>,
    index: HashMap<Expr, usize>,
    symbols: Vec<String>,
    symbol_slot: HashMap<String, usize>,
}

impl Builder {
    fn emit(&mut self, e: &Expr) -> usize {
        if let Some(&slot) = self.index.get(e) {
            return slot;
        }
        let op = match e.kind() {
            Kind::Rational(r) => Op::Const(*r.numer() as f64 / *r.denom() as f64),
            Kind::Symbol(s) => {
                let next = self.symbols.len();
                let var = *self.symbol_slot.entry(s.to_string()).or_insert(next);
                if var == next {
                    self.symbols.push(s.to_string());
                }
                Op::Var(var)
            }
            Kind::Sum(xs) | Kind::Product(xs) => {
                let slots: Vec<usize> = xs.iter().map(|x| self.emit(x)).collect();
                let start = self.args.len();
                self.args.extend(slots);
                match e.kind() {
                    Kind::Sum(_) => Op::Add(start, xs.len()),
                    _ => Op::Mul(start, xs.len()),
                }
            }
            Kind::Power(b, exp) => {
                let s = self.emit(b);
                if exp.is_integer() && exp.numer().abs() <= i32::MAX as i64 {
                    Op::Powi(s, *exp.numer() as i32)
                } else {
                    Op::Powf(s, *exp.numer() as f64 / *exp.denom() as f64)
                }
            }
            Kind::Func(f, a) => {
                let s = self.emit(a);
                match f {
                    Func::Sin => Op::Sin(s),
                    Func::Cos => Op::Cos(s),
                    Func::Cot => Op::Cot(s),
                    Func::Sqrt => Op::Sqrt(s),
                }
            }
        };
        self.ops.push(op);
        let slot = self.ops.len() - 1;
        self.index.insert(e.clone(), slot);
        slot
    }
}

impl Compiled {
    pub fn new(exprs: &[Expr]) -> Compiled {
        let mut b = Builder {
            ops: Vec::new(),
            args: Vec::new(),
            index: HashMap::new(),
            symbols: Vec::new(),
            symbol_slot: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| b.emit(e)).collect();
        Compiled { ops: b.ops, args: b.args, outputs, symbols: b.symbols }
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Symbols the program reads, in first-use order.
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Evaluate every output; fails on the first unbound symbol or singular operation.
    pub fn eval(&self, binding: &Binding) -> Result<Vec<f64>, ExprError> {
        let vars = self
            .symbols
            .iter()
            .map(|s| binding.get(s).ok_or_else(|| ExprError::Unbound(s.clone())))
            .collect::<Result<Vec<f64>, _>>()?;
        let mut reg = vec![0.0f64; self.ops.len()];
        for (i, op) in self.ops.iter().enumerate() {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var(k) => vars[k],
                Op::Add(start, n) => self.args[start..start + n].iter().map(|&s| reg[s]).sum(),
                Op::Mul(start, n) => self.args[start..start + n].iter().map(|&s| reg[s]).product(),
                Op::Powi(s, n) => {
                    if n < 0 && reg[s] == 0.0 {
                        return Err(ExprError::DivisionByZero);
                    }
                    reg[s].powi(n)
                }
                Op::Powf(s, p) => {
                    let base = reg[s];
                    if base < 0.0 {
                        return Err(ExprError::Domain(format!("fractional power of negative value {base}")));
                    }
                    if base == 0.0 && p < 0.0 {
                        return Err(ExprError::DivisionByZero);
                    }
                    base.powf(p)
                }
                Op::Sin(s) => reg[s].sin(),
                Op::Cos(s) => reg[s].cos(),
                Op::Cot(s) => {
                    let sn = reg[s].sin();
                    if sn == 0.0 {
                        return Err(ExprError::DivisionByZero);
                    }
                    reg[s].cos() / sn
                }
                Op::Sqrt(s) => {
                    if reg[s] < 0.0 {
                        return Err(ExprError::Domain(format!("sqrt of negative value {}", reg[s])));
                    }
                    reg[s].sqrt()
                }
            };
            if !v.is_finite() {
                return Err(ExprError::Domain(format!("non-finite intermediate value {v}")));
            }
            reg[i] = v;
        }
        Ok(self.outputs.iter().map(|&o| reg[o]).collect())
    }

    pub fn eval_one(&self, binding: &Binding) -> Result<f64, ExprError> {
        Ok(self.eval(binding)?[0])
    }
}

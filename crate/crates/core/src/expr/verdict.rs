use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{simplify, Binding, Compiled, Expr, ExprError};
use crate::par;

/// Expressions larger than this skip the symbolic attempt and go straight
/// to sampling.
const SYMBOLIC_SIZE_LIMIT: usize = 4_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Zero,
    Nonzero,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Symbolic,
    Numeric,
}

/// Outcome of an identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub method: Method,
    pub max_abs_residual: f64,
    pub samples_used: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        self.status == Status::Zero
    }

    pub fn symbolic_zero(policy: &ZeroTestPolicy) -> Verdict {
        Verdict {
            status: Status::Zero,
            method: Method::Symbolic,
            max_abs_residual: 0.0,
            samples_used: 0,
            tolerance: policy.tolerance,
            seed: policy.seed,
        }
    }

    /// Classify a residual observed over `samples` points.
    pub fn from_residual(max_abs_residual: f64, samples: usize, policy: &ZeroTestPolicy) -> Verdict {
        let tol = policy.tolerance;
        let status = if max_abs_residual < tol {
            Status::Zero
        } else if max_abs_residual > 10.0 * tol {
            Status::Nonzero
        } else {
            Status::Inconclusive
        };
        Verdict {
            status,
            method: Method::Numeric,
            max_abs_residual,
            samples_used: samples,
            tolerance: tol,
            seed: policy.seed,
        }
    }

    /// Combine verdicts over independent parts of one identity.
    pub fn merge(verdicts: &[Verdict], policy: &ZeroTestPolicy) -> Verdict {
        if verdicts.is_empty() || verdicts.iter().all(|v| v.method == Method::Symbolic && v.is_zero()) {
            return Verdict::symbolic_zero(policy);
        }
        let worst = verdicts.iter().map(|v| v.max_abs_residual).fold(0.0, f64::max);
        let samples = verdicts.iter().map(|v| v.samples_used).max().unwrap_or(0);
        let mut v = Verdict::from_residual(worst, samples, policy);
        if verdicts.iter().any(|v| v.status == Status::Nonzero) {
            v.status = Status::Nonzero;
        } else if v.status == Status::Zero && verdicts.iter().any(|v| v.status == Status::Inconclusive) {
            v.status = Status::Inconclusive;
        }
        v
    }
}

/// Inequality `lo < expr < hi` that a sample point must satisfy.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub expr: Expr,
    pub lo: f64,
    pub hi: f64,
}

/// Box of coordinate intervals, fixed parameter values and extra constraints.
#[derive(Debug, Clone, Default)]
pub struct SamplingDomain {
    pub intervals: Vec<(String, f64, f64)>,
    pub fixed: Vec<(String, f64)>,
    pub constraints: Vec<Constraint>,
}

impl SamplingDomain {
    pub fn new() -> Self {
        SamplingDomain::default()
    }

    pub fn interval(mut self, symbol: &str, lo: f64, hi: f64) -> Self {
        self.intervals.push((symbol.to_string(), lo, hi));
        self
    }

    pub fn fixed(mut self, symbol: &str, value: f64) -> Self {
        self.fixed.push((symbol.to_string(), value));
        self
    }

    pub fn constraint(mut self, expr: Expr, lo: f64, hi: f64) -> Self {
        self.constraints.push(Constraint { expr, lo, hi });
        self
    }

    fn check(&self) -> Result<(), ExprError> {
        for (s, lo, hi) in &self.intervals {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ExprError::EmptyDomain(format!("interval for `{s}` is empty: ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    /// Draw `count` candidate points that satisfy the constraints, in a
    /// deterministic order for a fixed seed.
    pub fn candidates(&self, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Binding>, ExprError> {
        self.check()?;
        let constraints = Compiled::new(&self.constraints.iter().map(|c| c.expr.clone()).collect::<Vec<_>>());
        let mut out = Vec::with_capacity(count);
        let max_draws = count.max(1) * 200;
        for _ in 0..max_draws {
            if out.len() == count {
                break;
            }
            let mut b = Binding::new();
            for (s, v) in &self.fixed {
                b.set(s, *v);
            }
            for (s, lo, hi) in &self.intervals {
                let u: f64 = rng.random_range(0.0..1.0);
                let v = lo + (hi - lo) * u;
                if v <= *lo || v >= *hi {
                    continue;
                }
                b.set(s, v);
            }
            if constraints.is_empty() {
                out.push(b);
                continue;
            }
            if let Ok(vals) = constraints.eval(&b) {
                if vals.iter().zip(&self.constraints).all(|(v, c)| *v > c.lo && *v < c.hi) {
                    out.push(b);
                }
            }
        }
        if out.is_empty() {
            return Err(ExprError::EmptyDomain("no point satisfies the constraints".into()));
        }
        Ok(out)
    }

    /// Sample points at which every expression in `program` evaluates.
    ///
    /// Returns the accepted points together with the values.
    pub fn sample(
        &self,
        program: &Compiled,
        samples: usize,
        seed: u64,
    ) -> Result<Vec<(Binding, Vec<f64>)>, ExprError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut accepted = Vec::with_capacity(samples);
        for _round in 0..20 {
            let need = samples - accepted.len();
            let batch = self.candidates(need * 2 + 2, &mut rng)?;
            let values = par::map(&batch, |b| program.eval(b));
            for (b, v) in batch.into_iter().zip(values) {
                if accepted.len() == samples {
                    break;
                }
                if let Ok(v) = v {
                    accepted.push((b, v));
                }
            }
            if accepted.len() == samples {
                break;
            }
        }
        if accepted.is_empty() {
            return Err(ExprError::EmptyDomain("every sample point is singular".into()));
        }
        Ok(accepted)
    }
}

/// How a zero test is run.
#[derive(Debug, Clone)]
pub struct ZeroTestPolicy {
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub domain: SamplingDomain,
    /// Try `simplify` before sampling.
    pub symbolic: bool,
}

impl ZeroTestPolicy {
    pub const DEFAULT_TOLERANCE: f64 = 1e-9;
    pub const DEFAULT_SAMPLES: usize = 20;
    pub const DEFAULT_SEED: u64 = 42;

    pub fn new(domain: SamplingDomain) -> Self {
        ZeroTestPolicy {
            tolerance: Self::DEFAULT_TOLERANCE,
            samples: Self::DEFAULT_SAMPLES,
            seed: Self::DEFAULT_SEED,
            domain,
            symbolic: true,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn numeric_only(mut self) -> Self {
        self.symbolic = false;
        self
    }
}

/// Zero test for a single expression.
pub fn is_zero(e: &Expr, policy: &ZeroTestPolicy) -> Result<Verdict, ExprError> {
    is_zero_all(std::slice::from_ref(e), policy)
}

/// Zero test for a family of expressions sharing one set of sample points.
pub fn is_zero_all(exprs: &[Expr], policy: &ZeroTestPolicy) -> Result<Verdict, ExprError> {
    let mut pending: Vec<Expr> = exprs.iter().filter(|e| !e.is_zero()).cloned().collect();
    if policy.symbolic {
        pending = par::map(&pending, |e| {
            if e.size() <= SYMBOLIC_SIZE_LIMIT {
                simplify(e)
            } else {
                e.clone()
            }
        })
        .into_iter()
        .filter(|e| !e.is_zero())
        .collect();
    }
    if pending.is_empty() {
        return Ok(Verdict::symbolic_zero(policy));
    }
    let program = Compiled::new(&pending);
    let points = policy.domain.sample(&program, policy.samples, policy.seed)?;
    let worst = points
        .iter()
        .flat_map(|(_, vals)| vals.iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    Ok(Verdict::from_residual(worst, points.len(), policy))
}

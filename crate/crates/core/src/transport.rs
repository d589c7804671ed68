//! Geodesics, parallel transport, holonomy and the quadrilateral torsion
//! estimator.
//!
//! Transported vectors are carried in frame components whenever the
//! connection has a frame description, and in coordinate components
//! otherwise. Integration is a fixed-step classical Runge-Kutta scheme;
//! transport by a teleparallel connection needs no integration at all.

use serde::Serialize;

use crate::expr::{Binding, Compiled, Constraint, Expr, SamplingDomain};
use crate::forms::Chart;
use crate::frames::{Connection, ConnectionKind};
use crate::{Error, Result};

/// Default step count per `2π` of curve parameter.
pub const STEPS_PER_TURN: usize = 4096;

/// Closure tolerance for loops, in coordinates.
pub const LOOP_TOLERANCE: f64 = 1e-10;

/// Where curves are allowed to go: closed coordinate bounds, extra
/// constraints, and periodic coordinates used when closing loops.
#[derive(Debug, Clone, Default)]
pub struct Region {
    bounds: Vec<(String, f64, f64)>,
    periods: Vec<(String, f64)>,
    constraints: Vec<Constraint>,
}

impl Region {
    pub fn new() -> Region {
        Region::default()
    }

    /// The closure of a sampling box.
    pub fn from_domain(domain: &SamplingDomain) -> Region {
        Region { bounds: domain.intervals.clone(), periods: Vec::new(), constraints: domain.constraints.clone() }
    }

    pub fn bound(mut self, symbol: &str, lo: f64, hi: f64) -> Region {
        self.bounds.retain(|(s, _, _)| s != symbol);
        self.bounds.push((symbol.to_string(), lo, hi));
        self
    }

    pub fn unbound(mut self, symbol: &str) -> Region {
        self.bounds.retain(|(s, _, _)| s != symbol);
        self
    }

    pub fn periodic(mut self, symbol: &str, period: f64) -> Region {
        self.periods.push((symbol.to_string(), period));
        self
    }

    pub fn constraint(mut self, expr: Expr, lo: f64, hi: f64) -> Region {
        self.constraints.push(Constraint { expr, lo, hi });
        self
    }

    pub fn bounds(&self) -> &[(String, f64, f64)] {
        &self.bounds
    }

    pub fn periods(&self) -> &[(String, f64)] {
        &self.periods
    }

    pub fn contains(&self, b: &Binding) -> bool {
        let inside = self.bounds.iter().all(|(s, lo, hi)| b.get(s).is_none_or(|v| v >= *lo && v <= *hi));
        inside && self.constraints.iter().all(|c| c.expr.eval(b).is_ok_and(|v| v >= c.lo && v <= c.hi))
    }

    /// Largest coordinate difference between two points, modulo periods.
    pub fn gap(&self, coords: &[String], a: &[f64], b: &[f64]) -> f64 {
        coords
            .iter()
            .zip(a.iter().zip(b))
            .map(|(c, (x, y))| {
                let d = (x - y).abs();
                match self.periods.iter().find(|(s, _)| s == c) {
                    Some((_, p)) => {
                        let r = d.rem_euclid(*p);
                        r.min(p - r)
                    }
                    None => d,
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Analytic { program: Compiled, constants: Vec<(String, f64)>, param: String, dim: usize },
    Polyline(Vec<Vec<f64>>),
    Sampled { s: Vec<f64>, points: Vec<Vec<f64>>, velocities: Vec<Vec<f64>> },
}

/// A parametrized curve `s ↦ x^μ(s)` on `[s0, s1]`.
#[derive(Debug, Clone)]
pub struct Curve {
    shape: Shape,
    s0: f64,
    s1: f64,
}

impl Curve {
    /// Coordinates given as expressions in `param`, possibly using named
    /// constants supplied with [`Curve::with_constant`].
    pub fn analytic(param: &str, coords: Vec<Expr>, s0: f64, s1: f64) -> Curve {
        let dim = coords.len();
        let velocity: Vec<Expr> = coords.iter().map(|c| c.diff(param)).collect();
        let program = Compiled::new(&coords.into_iter().chain(velocity).collect::<Vec<_>>());
        Curve { shape: Shape::Analytic { program, constants: Vec::new(), param: param.to_string(), dim }, s0, s1 }
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Curve {
        if let Shape::Analytic { constants, .. } = &mut self.shape {
            constants.push((name.to_string(), value));
        }
        self
    }

    /// Piecewise-linear curve through `points`, parametrized by `s ∈ [0, k]`
    /// with one unit of parameter per segment.
    pub fn polyline(points: Vec<Vec<f64>>) -> Result<Curve> {
        if points.len() < 2 {
            return Err(Error::Model("a polyline needs at least two points".into()));
        }
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::Dimension { expected: dim, found: points.iter().map(|p| p.len()).find(|&l| l != dim).unwrap_or(0) });
        }
        let s1 = (points.len() - 1) as f64;
        Ok(Curve { shape: Shape::Polyline(points), s0: 0.0, s1 })
    }

    /// Latitude circle `θ = θ0`, `φ = s` on a `(θ, φ)` chart.
    pub fn latitude(theta0: f64) -> Curve {
        Curve::analytic("s", vec![Expr::symbol("theta0"), Expr::symbol("s")], 0.0, std::f64::consts::TAU)
            .with_constant("theta0", theta0)
    }

    /// Meridian `φ = φ0`, `θ = s` for `s ∈ [θa, θb]` on a `(θ, φ)` chart.
    pub fn meridian(phi0: f64, theta_a: f64, theta_b: f64) -> Curve {
        Curve::analytic("s", vec![Expr::symbol("s"), Expr::symbol("phi0")], theta_a, theta_b).with_constant("phi0", phi0)
    }

    /// Parse a path specification:
    ///
    /// ```text
    /// latitude:<θ0>                      (θ, φ) charts, φ from 0 to 2π
    /// meridian:<φ0>:<θa>:<θb>            (θ, φ) charts
    /// curve:<x0>,<x1>,...:<s0>:<s1>      coordinates as expressions in `s`
    /// polyline:<x0>,<x1>,...;<y0>,...    corner points
    /// ```
    ///
    /// Numbers may be decimals or constant expressions; `constants` supplies
    /// `pi` and model parameters.
    pub fn parse(spec: &str, dim: usize, constants: &Binding) -> Result<Curve> {
        let bad = |why: &str| Error::Model(format!("path `{spec}`: {why}"));
        let value = |text: &str| -> Result<f64> {
            if let Ok(v) = text.trim().parse::<f64>() {
                return Ok(v);
            }
            let e = crate::expr::parse(text).map_err(|e| bad(&e.to_string()))?;
            e.eval(constants).map_err(|e| bad(&e.to_string()))
        };
        let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("expected `<kind>:<arguments>`"))?;
        let args: Vec<&str> = rest.split(':').collect();
        let curve = match (kind.trim(), args.as_slice()) {
            ("latitude", [t]) => Curve::latitude(value(t)?),
            ("meridian", [p, a, b]) => Curve::meridian(value(p)?, value(a)?, value(b)?),
            ("curve", [coords, s0, s1]) => {
                let exprs = coords
                    .split(',')
                    .map(|c| crate::expr::parse(c).map_err(|e| bad(&e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                let mut curve = Curve::analytic("s", exprs, value(s0)?, value(s1)?);
                for (k, v) in constants.iter() {
                    curve = curve.with_constant(k, v);
                }
                curve
            }
            ("polyline", [points]) => Curve::polyline(
                points
                    .split(';')
                    .map(|p| p.split(',').map(value).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?,
            )?,
            ("latitude" | "meridian" | "curve" | "polyline", _) => return Err(bad("wrong number of arguments")),
            _ => return Err(bad("unknown kind; expected latitude, meridian, curve or polyline")),
        };
        if curve.dim() != dim {
            return Err(Error::Dimension { expected: dim, found: curve.dim() });
        }
        let (s0, s1) = curve.interval();
        if !(s0.is_finite() && s1.is_finite()) || s0 >= s1 {
            return Err(bad("parameter interval must be increasing"));
        }
        // every symbol must be bound
        curve.state(s0).map_err(|e| bad(&e.to_string()))?;
        Ok(curve)
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Analytic { dim, .. } => *dim,
            Shape::Polyline(p) => p[0].len(),
            Shape::Sampled { points, .. } => points[0].len(),
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.s0, self.s1)
    }

    /// Point and velocity at parameter `s`.
    pub fn state(&self, s: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.state_on(s, None)
    }

    /// Like [`Curve::state`], but a polyline uses segment `piece` even at its
    /// endpoints so kinks are approached from the right side.
    fn state_on(&self, s: f64, piece: Option<usize>) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.shape {
            Shape::Analytic { program, constants, param, dim } => {
                let mut b = Binding::new().with(param, s);
                for (k, v) in constants {
                    b.set(k, *v);
                }
                let vals = program.eval(&b)?;
                Ok((vals[..*dim].to_vec(), vals[*dim..].to_vec()))
            }
            Shape::Polyline(points) => {
                let k = piece.unwrap_or_else(|| (s - self.s0).max(0.0).floor() as usize).min(points.len() - 2);
                let t = s - k as f64;
                let (a, b) = (&points[k], &points[k + 1]);
                let x = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
                let v = a.iter().zip(b).map(|(p, q)| q - p).collect();
                Ok((x, v))
            }
            Shape::Sampled { s: grid, points, velocities } => {
                let k = match grid.binary_search_by(|g| g.total_cmp(&s)) {
                    Ok(i) => i.min(grid.len() - 2),
                    Err(i) => i.saturating_sub(1).min(grid.len() - 2),
                };
                let h = grid[k + 1] - grid[k];
                let t = (s - grid[k]) / h;
                // cubic Hermite on each interval
                let (h00, h10, h01, h11) =
                    (2.0 * t.powi(3) - 3.0 * t * t + 1.0, t.powi(3) - 2.0 * t * t + t, -2.0 * t.powi(3) + 3.0 * t * t, t.powi(3) - t * t);
                let (d00, d10, d01, d11) = (6.0 * t * t - 6.0 * t, 3.0 * t * t - 4.0 * t + 1.0, -6.0 * t * t + 6.0 * t, 3.0 * t * t - 2.0 * t);
                let n = points[k].len();
                let x = (0..n)
                    .map(|i| {
                        h00 * points[k][i] + h10 * h * velocities[k][i] + h01 * points[k + 1][i] + h11 * h * velocities[k + 1][i]
                    })
                    .collect();
                let v = (0..n)
                    .map(|i| {
                        (d00 * points[k][i] + d10 * h * velocities[k][i] + d01 * points[k + 1][i] + d11 * h * velocities[k + 1][i])
                            / h
                    })
                    .collect();
                Ok((x, v))
            }
        }
    }

    /// Parameter values splitting the curve into smooth pieces.
    fn pieces(&self) -> Vec<(f64, f64)> {
        match &self.shape {
            Shape::Polyline(points) => (0..points.len() - 1).map(|k| (k as f64, (k + 1) as f64)).collect(),
            _ => vec![(self.s0, self.s1)],
        }
    }

    /// Coordinate gap between the two endpoints, modulo the region's periods.
    pub fn closure_gap(&self, coords: &[String], region: &Region) -> Result<f64> {
        let (a, _) = self.state(self.s0)?;
        let (b, _) = self.state(self.s1)?;
        Ok(region.gap(coords, &a, &b))
    }
}

/// Default RK4 step count for a curve: [`STEPS_PER_TURN`] per `2π` of parameter.
pub fn default_steps(curve: &Curve) -> usize {
    let (s0, s1) = curve.interval();
    (((s1 - s0).abs() / std::f64::consts::TAU) * STEPS_PER_TURN as f64).ceil().max(16.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Frame,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Rk4,
    Exact,
}

/// Sampled transport of one vector along a curve.
#[derive(Debug, Clone, Serialize)]
pub struct TransportResult {
    pub basis: Basis,
    pub integrator: Integrator,
    pub steps: usize,
    pub s: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub components: Vec<Vec<f64>>,
    /// `g(V, V)`, when a metric is available.
    pub norm: Option<Vec<f64>>,
    /// `g(γ*, V)`, when a metric is available.
    pub tangent_product: Option<Vec<f64>>,
}

impl TransportResult {
    pub fn final_vector(&self) -> &[f64] {
        self.components.last().expect("at least one sample")
    }

    fn drift(trace: &Option<Vec<f64>>) -> Option<f64> {
        trace.as_ref().map(|t| t.iter().map(|v| (v - t[0]).abs()).fold(0.0, f64::max))
    }

    /// Largest deviation of `g(V, V)` from its initial value.
    pub fn norm_drift(&self) -> Option<f64> {
        Self::drift(&self.norm)
    }

    pub fn tangent_drift(&self) -> Option<f64> {
        Self::drift(&self.tangent_product)
    }
}

/// Numeric access to the connection coefficients along a chart.
struct Coefficients {
    coords: Vec<String>,
    params: Vec<(String, f64)>,
    basis: Basis,
    n: usize,
    /// Frame basis: `θ^j_μ` then `ω^k_{ji}` at `[k][j][i]`, then `e_a^μ`.
    /// Coordinate basis: `Γ^ρ_μν`, then `g_μν` when available.
    program: Compiled,
    has_metric: bool,
    signature: Vec<f64>,
}

struct Sample {
    theta: Vec<f64>,
    omega: Vec<f64>,
    frame: Vec<f64>,
    gamma: Vec<f64>,
    metric: Vec<f64>,
}

impl Coefficients {
    fn new(conn: &Connection) -> Result<Coefficients> {
        let chart = conn.chart();
        let n = chart.dim();
        let params = chart.domain().fixed.clone();
        let coords = chart.coords().to_vec();
        if let Some(cf) = conn.coframe() {
            let w = conn.frame_coefficients()?;
            let mut exprs: Vec<Expr> = Vec::new();
            for j in 0..n {
                for mu in 0..n {
                    exprs.push(cf.theta(j, mu).clone());
                }
            }
            for row in &w {
                for col in row {
                    exprs.extend(col.iter().cloned());
                }
            }
            for a in 0..n {
                for mu in 0..n {
                    exprs.push(cf.frame(a, mu).clone());
                }
            }
            let mut gamma_exprs = Vec::new();
            for r in conn.christoffel_symbols() {
                for m in r {
                    gamma_exprs.extend(m.iter().cloned());
                }
            }
            exprs.extend(gamma_exprs);
            Ok(Coefficients {
                coords,
                params,
                basis: Basis::Frame,
                n,
                program: Compiled::new(&exprs),
                has_metric: true,
                signature: cf.signature().iter().map(|&s| s as f64).collect(),
            })
        } else {
            let mut exprs: Vec<Expr> = Vec::new();
            for r in conn.christoffel_symbols() {
                for m in r {
                    exprs.extend(m.iter().cloned());
                }
            }
            let has_metric = conn.metric().is_some();
            if let Some(g) = conn.metric() {
                for row in g.components() {
                    exprs.extend(row.iter().cloned());
                }
            }
            Ok(Coefficients {
                coords,
                params,
                basis: Basis::Coordinate,
                n,
                program: Compiled::new(&exprs),
                has_metric,
                signature: Vec::new(),
            })
        }
    }

    fn binding(&self, x: &[f64]) -> Binding {
        let mut b = Binding::new();
        for (k, v) in &self.params {
            b.set(k, *v);
        }
        for (c, v) in self.coords.iter().zip(x) {
            b.set(c, *v);
        }
        b
    }

    fn at(&self, x: &[f64]) -> Result<Sample> {
        let vals = self.program.eval(&self.binding(x))?;
        let n = self.n;
        Ok(match self.basis {
            Basis::Frame => {
                let (theta, rest) = vals.split_at(n * n);
                let (omega, rest) = rest.split_at(n * n * n);
                let (frame, gamma) = rest.split_at(n * n);
                Sample { theta: theta.to_vec(), omega: omega.to_vec(), frame: frame.to_vec(), gamma: gamma.to_vec(), metric: Vec::new() }
            }
            Basis::Coordinate => {
                let (gamma, metric) = vals.split_at(n * n * n);
                Sample { theta: Vec::new(), omega: Vec::new(), frame: Vec::new(), gamma: gamma.to_vec(), metric: metric.to_vec() }
            }
        })
    }

    /// Frame components `θ^j_μ u^μ` of a coordinate vector.
    fn to_frame(&self, s: &Sample, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|j| (0..n).map(|mu| s.theta[j * n + mu] * u[mu]).sum()).collect()
    }

    fn to_coordinates(&self, s: &Sample, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|mu| (0..n).map(|a| s.frame[a * n + mu] * v[a]).sum()).collect()
    }

    /// `dV/ds` for velocity `u` (coordinate components).
    fn transport_rate(&self, s: &Sample, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        match self.basis {
            Basis::Frame => {
                let g = self.to_frame(s, u);
                (0..n)
                    .map(|k| {
                        let mut acc = 0.0;
                        for (j, gj) in g.iter().enumerate() {
                            for (i, vi) in v.iter().enumerate() {
                                acc += s.omega[(k * n + j) * n + i] * gj * vi;
                            }
                        }
                        -acc
                    })
                    .collect()
            }
            Basis::Coordinate => (0..n)
                .map(|r| {
                    let mut acc = 0.0;
                    for (m, um) in u.iter().enumerate() {
                        for (nu, vn) in v.iter().enumerate() {
                            acc += s.gamma[(r * n + m) * n + nu] * um * vn;
                        }
                    }
                    -acc
                })
                .collect(),
        }
    }

    /// Geodesic acceleration `-Γ^ρ_μν u^μ u^ν`.
    fn acceleration(&self, s: &Sample, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|r| {
                let mut acc = 0.0;
                for m in 0..n {
                    for k in 0..n {
                        acc += s.gamma[(r * n + m) * n + k] * u[m] * u[k];
                    }
                }
                -acc
            })
            .collect()
    }

    fn inner(&self, s: &Sample, a: &[f64], b: &[f64]) -> Option<f64> {
        match self.basis {
            Basis::Frame => Some(self.signature.iter().zip(a.iter().zip(b)).map(|(e, (x, y))| e * x * y).sum()),
            Basis::Coordinate if self.has_metric => {
                let n = self.n;
                let mut acc = 0.0;
                for m in 0..n {
                    for k in 0..n {
                        acc += s.metric[m * n + k] * a[m] * b[k];
                    }
                }
                Some(acc)
            }
            Basis::Coordinate => None,
        }
    }

    /// `g(u, V)` with `u` in coordinate and `V` in transport components.
    fn tangent_inner(&self, s: &Sample, u: &[f64], v: &[f64]) -> Option<f64> {
        match self.basis {
            Basis::Frame => self.inner(s, &self.to_frame(s, u), v),
            Basis::Coordinate => self.inner(s, u, v),
        }
    }
}

fn rk4<F>(y: &[f64], s: f64, h: f64, f: &F) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, d)| x + c * d).collect() };
    let k1 = f(s, y)?;
    let k2 = f(s + h / 2.0, &axpy(y, &k1, h / 2.0))?;
    let k3 = f(s + h / 2.0, &axpy(y, &k2, h / 2.0))?;
    let k4 = f(s + h, &axpy(y, &k3, h))?;
    Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

fn check_dim(chart: &Chart, len: usize) -> Result<()> {
    if len == chart.dim() {
        Ok(())
    } else {
        Err(Error::Dimension { expected: chart.dim(), found: len })
    }
}

struct Recorder<'a> {
    coeffs: &'a Coefficients,
    region: &'a Region,
    out: TransportResult,
}

impl Recorder<'_> {
    fn push(&mut self, s: f64, x: Vec<f64>, u: &[f64], v: Vec<f64>) -> Result<()> {
        if !self.region.contains(&self.coeffs.binding(&x)) {
            return Err(Error::DomainExit { s });
        }
        let sample = self.coeffs.at(&x)?;
        if let Some(norm) = self.out.norm.as_mut() {
            norm.push(self.coeffs.inner(&sample, &v, &v).unwrap_or(f64::NAN));
        }
        if let Some(tp) = self.out.tangent_product.as_mut() {
            tp.push(self.coeffs.tangent_inner(&sample, u, &v).unwrap_or(f64::NAN));
        }
        self.out.s.push(s);
        self.out.points.push(x);
        self.out.components.push(v);
        Ok(())
    }
}

fn recorder<'a>(coeffs: &'a Coefficients, region: &'a Region, integrator: Integrator, steps: usize) -> Recorder<'a> {
    let metric = coeffs.basis == Basis::Frame || coeffs.has_metric;
    Recorder {
        coeffs,
        region,
        out: TransportResult {
            basis: coeffs.basis,
            integrator,
            steps,
            s: Vec::with_capacity(steps + 1),
            points: Vec::with_capacity(steps + 1),
            components: Vec::with_capacity(steps + 1),
            norm: metric.then(Vec::new),
            tangent_product: metric.then(Vec::new),
        },
    }
}

/// Split `steps` over the smooth pieces of a curve, at least one per piece.
fn allocate(pieces: &[(f64, f64)], steps: usize) -> Vec<usize> {
    let total: f64 = pieces.iter().map(|(a, b)| (b - a).abs()).sum();
    pieces.iter().map(|(a, b)| ((steps as f64) * (b - a).abs() / total).round().max(1.0) as usize).collect()
}

/// Solve `D_{γ*} V = 0` along `curve` starting from `v0`.
///
/// `v0` is in frame components for connections with a frame and in
/// coordinate components otherwise. Teleparallel connections are handled
/// exactly.
pub fn parallel_transport(
    conn: &Connection,
    curve: &Curve,
    v0: &[f64],
    steps: usize,
    region: &Region,
) -> Result<TransportResult> {
    check_dim(conn.chart(), v0.len())?;
    check_dim(conn.chart(), curve.dim())?;
    if conn.kind() == ConnectionKind::Teleparallel {
        return exact_transport(conn, curve, v0, steps, region);
    }
    let coeffs = Coefficients::new(conn)?;
    let pieces = curve.pieces();
    let counts = allocate(&pieces, steps.max(1));
    let mut rec = recorder(&coeffs, region, Integrator::Rk4, counts.iter().sum());
    let (x0, u0) = curve.state(curve.s0)?;
    rec.push(curve.s0, x0, &u0, v0.to_vec())?;
    let mut v = v0.to_vec();
    for (piece, (&(a, b), &count)) in pieces.iter().zip(&counts).enumerate() {
        let rate = |s: f64, v: &[f64]| -> Result<Vec<f64>> {
            let (x, u) = curve.state_on(s, Some(piece))?;
            let sample = coeffs.at(&x)?;
            Ok(coeffs.transport_rate(&sample, &u, v))
        };
        let h = (b - a) / count as f64;
        for step in 0..count {
            let s = a + step as f64 * h;
            v = rk4(&v, s, h, &rate)?;
            let s_next = if step + 1 == count { b } else { a + (step + 1) as f64 * h };
            let (x, u) = curve.state_on(s_next, Some(piece))?;
            rec.push(s_next, x, &u, v.clone())?;
        }
    }
    Ok(rec.out)
}

/// Transport by the teleparallel connection of a coframe: the frame
/// components never change. The curve is still sampled so that region
/// checks and traces match the integrated case.
pub fn nunes_transport(conn: &Connection, curve: &Curve, v0: &[f64], steps: usize, region: &Region) -> Result<TransportResult> {
    if conn.kind() != ConnectionKind::Teleparallel {
        return Err(Error::Chart("exact transport needs a teleparallel connection".into()));
    }
    check_dim(conn.chart(), v0.len())?;
    check_dim(conn.chart(), curve.dim())?;
    exact_transport(conn, curve, v0, steps, region)
}

fn exact_transport(conn: &Connection, curve: &Curve, v0: &[f64], steps: usize, region: &Region) -> Result<TransportResult> {
    let coeffs = Coefficients::new(conn)?;
    let steps = steps.max(1);
    let mut rec = recorder(&coeffs, region, Integrator::Exact, steps);
    let (s0, s1) = curve.interval();
    for k in 0..=steps {
        let s = s0 + (s1 - s0) * k as f64 / steps as f64;
        let (x, u) = curve.state(s)?;
        rec.push(s, x, &u, v0.to_vec())?;
    }
    Ok(rec.out)
}

/// Integrate `D_{c*} c* = 0` from `x0` with velocity `u0` (coordinate
/// components). The result is a curve interpolating the RK4 samples.
pub fn geodesic(conn: &Connection, x0: &[f64], u0: &[f64], interval: (f64, f64), steps: usize, region: &Region) -> Result<Curve> {
    let (curve, _) = geodesic_transport(conn, x0, u0, None, interval, steps, region)?;
    Ok(curve)
}

/// Geodesic together with a vector transported along it, integrated as one
/// system so both share the same step error.
pub fn geodesic_transport(
    conn: &Connection,
    x0: &[f64],
    u0: &[f64],
    v0: Option<&[f64]>,
    interval: (f64, f64),
    steps: usize,
    region: &Region,
) -> Result<(Curve, Option<TransportResult>)> {
    let chart = conn.chart();
    check_dim(chart, x0.len())?;
    check_dim(chart, u0.len())?;
    if let Some(v) = v0 {
        check_dim(chart, v.len())?;
    }
    if steps < 16 {
        return Err(Error::Model(format!("geodesic integration needs at least 16 steps, got {steps}")));
    }
    let n = chart.dim();
    let coeffs = Coefficients::new(conn)?;
    let (s0, s1) = interval;
    let h = (s1 - s0) / steps as f64;
    let system = |_: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (x, rest) = y.split_at(n);
        let (u, v) = rest.split_at(n);
        let sample = coeffs.at(x)?;
        let mut out = u.to_vec();
        out.extend(coeffs.acceleration(&sample, u));
        if !v.is_empty() {
            out.extend(coeffs.transport_rate(&sample, u, v));
        }
        Ok(out)
    };
    let mut y: Vec<f64> = x0.iter().chain(u0).copied().collect();
    if let Some(v) = v0 {
        y.extend_from_slice(v);
    }
    let mut grid = vec![s0];
    let mut points = vec![x0.to_vec()];
    let mut velocities = vec![u0.to_vec()];
    let mut rec = recorder(&coeffs, region, Integrator::Rk4, steps);
    if let Some(v) = v0 {
        rec.push(s0, x0.to_vec(), u0, v.to_vec())?;
    } else if !region.contains(&coeffs.binding(x0)) {
        return Err(Error::DomainExit { s: s0 });
    }
    for k in 0..steps {
        let s = s0 + k as f64 * h;
        y = rk4(&y, s, h, &system)?;
        let s_next = s0 + (k + 1) as f64 * h;
        let x = y[..n].to_vec();
        let u = y[n..2 * n].to_vec();
        if v0.is_some() {
            rec.push(s_next, x.clone(), &u, y[2 * n..].to_vec())?;
        } else if !region.contains(&coeffs.binding(&x)) {
            return Err(Error::DomainExit { s: s_next });
        }
        grid.push(s_next);
        points.push(x);
        velocities.push(u);
    }
    let curve = Curve { shape: Shape::Sampled { s: grid, points, velocities }, s0, s1 };
    Ok((curve, v0.map(|_| rec.out)))
}

/// Linear map induced by transport around a closed loop.
#[derive(Debug, Clone, Serialize)]
pub struct Holonomy {
    pub basis: Basis,
    /// Column `j` is the image of the `j`-th basis vector.
    pub matrix: Vec<Vec<f64>>,
    /// Rotation angle in `[0, 2π)` for two-dimensional charts.
    pub angle: Option<f64>,
    /// `max |M - I|`.
    pub identity_deviation: f64,
    pub steps: usize,
    pub integrator: Integrator,
}

pub fn holonomy(conn: &Connection, curve: &Curve, steps: usize, region: &Region) -> Result<Holonomy> {
    let n = conn.chart().dim();
    let gap = curve.closure_gap(conn.chart().coords(), region)?;
    if gap > LOOP_TOLERANCE {
        return Err(Error::OpenLoop { gap });
    }
    let mut matrix = vec![vec![0.0; n]; n];
    let mut integrator = Integrator::Rk4;
    for j in 0..n {
        let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        let run = parallel_transport(conn, curve, &e, steps, region)?;
        integrator = run.integrator;
        for (i, row) in matrix.iter_mut().enumerate() {
            row[j] = run.final_vector()[i];
        }
    }
    let identity_deviation = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (matrix[i][j] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    let angle = (n == 2).then(|| matrix[1][0].atan2(matrix[0][0]).rem_euclid(std::f64::consts::TAU));
    Ok(Holonomy { basis: Coefficients::new(conn)?.basis, matrix, angle, identity_deviation, steps, integrator })
}

/// Finite torsion estimate from the closure defect of a transported
/// parallelogram.
#[derive(Debug, Clone, Serialize)]
pub struct QuadEstimate {
    /// Gap `u` between the two far corners, coordinate components.
    pub gap: Vec<f64>,
    /// `u^ρ / (Δa Δb)`, an estimate of `T^ρ_ab` in coordinates.
    pub coordinate: Vec<f64>,
    /// Frame components of the same estimate, when a frame is available.
    pub frame: Option<Vec<f64>>,
    /// `|g(u, u)|^{1/2}` at the base point, when a metric is available.
    pub gap_norm: Option<f64>,
}

/// Transport the edge `Δb ∂_b` along `Δa ∂_a` and vice versa, step off
/// along the transported edges and compare the two far corners.
///
/// The gap approximates `T(Δa ∂_a, Δb ∂_b)` with an `O(Δ)` relative error.
pub fn quadrilateral_torsion_estimate(
    conn: &Connection,
    p: &[f64],
    (a, da): (usize, f64),
    (b, db): (usize, f64),
    steps: usize,
    region: &Region,
) -> Result<QuadEstimate> {
    let chart = conn.chart();
    let n = chart.dim();
    check_dim(chart, p.len())?;
    if a >= n || b >= n || a == b {
        return Err(Error::Chart(format!("edge directions ({a}, {b}) are not two distinct coordinates")));
    }
    let coeffs = Coefficients::new(conn)?;
    let unit = |k: usize, len: f64| -> Vec<f64> { (0..n).map(|i| if i == k { len } else { 0.0 }).collect() };
    let edge = |k: usize, len: f64| -> Result<Curve> {
        let mut q = p.to_vec();
        q[k] += len;
        Curve::polyline(vec![p.to_vec(), q])
    };
    // moves a coordinate vector at p along an edge, returns it in coordinates at the far end
    let carry = |along: &Curve, w: &[f64]| -> Result<(Vec<f64>, Vec<f64>)> {
        let start = coeffs.at(p)?;
        let w0 = match coeffs.basis {
            Basis::Frame => coeffs.to_frame(&start, w),
            Basis::Coordinate => w.to_vec(),
        };
        let run = parallel_transport(conn, along, &w0, steps, region)?;
        let end = run.points.last().expect("samples").clone();
        let w1 = match coeffs.basis {
            Basis::Frame => coeffs.to_coordinates(&coeffs.at(&end)?, run.final_vector()),
            Basis::Coordinate => run.final_vector().to_vec(),
        };
        Ok((end, w1))
    };
    let (q, side_b) = carry(&edge(a, da)?, &unit(b, db))?;
    let (s, side_a) = carry(&edge(b, db)?, &unit(a, da))?;
    let r1: Vec<f64> = q.iter().zip(&side_b).map(|(x, y)| x + y).collect();
    let r2: Vec<f64> = s.iter().zip(&side_a).map(|(x, y)| x + y).collect();
    let gap: Vec<f64> = r2.iter().zip(&r1).map(|(x, y)| x - y).collect();
    let coordinate: Vec<f64> = gap.iter().map(|u| u / (da * db)).collect();
    let base = coeffs.at(p)?;
    let (frame, gap_norm) = match coeffs.basis {
        Basis::Frame => {
            let uf = coeffs.to_frame(&base, &gap);
            // normalize by the frame lengths of the two edges
            let length = |w: Vec<f64>| -> f64 {
                let f = coeffs.to_frame(&base, &w);
                coeffs.inner(&base, &f, &f).unwrap_or(f64::NAN).abs().sqrt()
            };
            let area = length(unit(a, da)) * length(unit(b, db));
            let norm = coeffs.inner(&base, &uf, &uf).map(|v| v.abs().sqrt());
            (Some(uf.iter().map(|u| u / area).collect()), norm)
        }
        Basis::Coordinate => (None, coeffs.inner(&base, &gap, &gap).map(|v| v.abs().sqrt())),
    };
    Ok(QuadEstimate { gap, coordinate, frame, gap_norm })
}

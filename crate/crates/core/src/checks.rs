//! Named verification checks.
//!
//! Each check runs a family of identities against a [`Model`] and returns
//! one [`CheckResult`] per identity. Result names are `<check>/<identity>`,
//! so a report holding several checks stays sorted by check.

use std::f64::consts::TAU;
use std::str::FromStr;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{
    conservation_check, equivalence_check, field_equation_residual, lagrangian_decomposition_check, Conventions,
    DuplicateTerm, MatterSource,
};
use crate::expr::{is_zero, is_zero_all, parse, Compiled, Expr, Method, Verdict, ZeroTestPolicy};
use crate::forms::{blades, Coframe, MultiForm};
use crate::frames::{
    cartan_curvature, einstein_3forms_from, einstein_tensor, frame_to_coordinate, lower_first, nonmetricity,
    strain_tensor, Connection, CoordinateCurvature, Metric,
};
use crate::models::{Expectation, Model, Quantity};
use crate::par;
use crate::report::{CheckResult, Expect, ModelInfo, Report};
use crate::transport::{
    default_steps, geodesic_transport, holonomy, nunes_transport, parallel_transport, quadrilateral_torsion_estimate,
    Curve, TransportResult,
};
use crate::{Error, Result};

pub const CHECKS: [&str; 12] = [
    "curvature",
    "torsion",
    "nonmetricity",
    "strain",
    "einstein",
    "field-equations",
    "equivalence",
    "lagrangian-decomposition",
    "conservation",
    "transport",
    "holonomy",
    "quad-torsion",
];

/// Random forms used for the `d² = 0` and `δ² = 0` checks.
pub const RANDOM_FORMS: usize = 100;

/// Edge lengths of the quadrilateral torsion estimate, halving each time.
pub const QUAD_EDGES: [f64; 3] = [0.04, 0.02, 0.01];

/// Accepted range for the error ratio between consecutive edge lengths.
pub const FIRST_ORDER_RATIO: (f64, f64) = (1.6, 2.4);

const QUAD_STEPS: usize = 64;
const GEODESIC_STEPS: usize = 1024;
/// Expressions longer than this are left out of reports.
const MAX_PRINTED: usize = 400;
const SIMPLIFY_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionChoice {
    /// Levi-Civita connection of the coframe metric.
    Lc,
    /// Teleparallel connection that keeps the coframe parallel.
    Nunes,
}

impl FromStr for ConnectionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<ConnectionChoice> {
        match s {
            "lc" => Ok(ConnectionChoice::Lc),
            "nunes" => Ok(ConnectionChoice::Nunes),
            other => Err(Error::Model(format!("unknown connection `{other}`; expected lc or nunes"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOptions {
    pub seed: u64,
    pub samples: usize,
    /// Overrides every per-check default tolerance.
    pub tolerance: Option<f64>,
    pub duplicate_term: DuplicateTerm,
    /// Restricts the transport check to one connection.
    pub connection: Option<ConnectionChoice>,
    /// Transport path, overriding the model default.
    pub path: Option<String>,
    pub steps: Option<usize>,
    /// Initial vector for transport, overriding the model default.
    pub vector: Option<Vec<f64>>,
}

impl Default for CheckOptions {
    fn default() -> CheckOptions {
        CheckOptions {
            seed: ZeroTestPolicy::DEFAULT_SEED,
            samples: ZeroTestPolicy::DEFAULT_SAMPLES,
            tolerance: None,
            duplicate_term: DuplicateTerm::default(),
            connection: None,
            path: None,
            steps: None,
            vector: None,
        }
    }
}

impl CheckOptions {
    pub fn with_seed(mut self, seed: u64) -> CheckOptions {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> CheckOptions {
        self.samples = samples;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> CheckOptions {
        self.tolerance = Some(tol);
        self
    }
}

/// Default tolerance of each check.
pub fn default_tolerance(check: &str) -> f64 {
    match check {
        "einstein" => 1e-8,
        "field-equations" | "equivalence" | "lagrangian-decomposition" | "conservation" => 1e-7,
        "holonomy" => 1e-9,
        "quad-torsion" => 1e-2,
        _ => 1e-9,
    }
}

/// Run a single check and wrap it in a report.
pub fn run_check(model: &Model, name: &str, opts: &CheckOptions) -> Result<Report> {
    run_checks(model, &[name], opts)
}

/// Run several checks concurrently; the report is ordered by result name.
pub fn run_checks(model: &Model, names: &[&str], opts: &CheckOptions) -> Result<Report> {
    for name in names {
        if !CHECKS.contains(name) {
            return Err(Error::UnknownCheck(name.to_string()));
        }
    }
    let outcomes = par::map(names, |name| check_results(model, name, opts));
    let mut results = Vec::new();
    for r in outcomes {
        results.extend(r?);
    }
    let info = ModelInfo { name: model.name().to_string(), parameters: model.parameters.clone() };
    Ok(Report::new(&names.join(","), info, opts.clone(), Conventions::new(&model.coframe, opts.duplicate_term), results))
}

/// The individual results of one check.
pub fn check_results(model: &Model, name: &str, opts: &CheckOptions) -> Result<Vec<CheckResult>> {
    let ctx = Ctx { model, opts, check: name };
    match name {
        "curvature" => curvature(&ctx),
        "torsion" => torsion(&ctx),
        "nonmetricity" => nonmetricity_check(&ctx),
        "strain" => strain(&ctx),
        "einstein" => einstein(&ctx),
        "field-equations" => field_equations(&ctx),
        "equivalence" => equivalence(&ctx),
        "lagrangian-decomposition" => decomposition(&ctx),
        "conservation" => conservation(&ctx),
        "transport" => transport(&ctx),
        "holonomy" => holonomy_check(&ctx),
        "quad-torsion" => quad_torsion(&ctx),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

struct Ctx<'a> {
    model: &'a Model,
    opts: &'a CheckOptions,
    check: &'a str,
}

impl Ctx<'_> {
    fn cf(&self) -> &std::sync::Arc<Coframe> {
        &self.model.coframe
    }

    fn tolerance(&self) -> f64 {
        self.opts.tolerance.unwrap_or_else(|| default_tolerance(self.check))
    }

    fn policy(&self) -> ZeroTestPolicy {
        self.model
            .chart()
            .policy()
            .with_seed(self.opts.seed)
            .with_samples(self.opts.samples)
            .with_tolerance(self.tolerance())
    }

    fn name(&self, identity: &str) -> String {
        format!("{}/{identity}", self.check)
    }

    fn zero(&self, identity: &str, v: Verdict) -> CheckResult {
        CheckResult::zero(self.name(identity), v)
    }

    fn background(&self) -> Result<&Metric> {
        self.model
            .background
            .as_ref()
            .ok_or_else(|| Error::Model(format!("model `{}` declares no background metric", self.model.name())))
    }

    /// Symbolic expectations of this check. `lookup` returns the computed
    /// value of a quantity, or `None` when the check does not produce it.
    fn expectations(&self, lookup: impl Fn(Quantity, &[usize]) -> Option<Expr>) -> Result<Vec<CheckResult>> {
        let p = self.policy();
        let mut out = Vec::new();
        for x in self.model.expectations(self.check) {
            let computed = lookup(x.quantity, &x.indices).ok_or_else(|| {
                Error::Model(format!("expectation `{}`: check `{}` cannot provide {:?} {:?}", x.label, self.check, x.quantity, x.indices))
            })?;
            let expected = parse(&x.value)?;
            let residual = match x.quantity {
                Quantity::TorsionMagnitude => &(&computed * &computed) - &(&expected * &expected),
                _ => &computed - &expected,
            };
            let policy = x.tolerance.map_or_else(|| p.clone(), |t| p.clone().with_tolerance(t));
            let verdict = is_zero(&residual, &policy)?;
            let mut r = CheckResult::zero(expectation_name(self.check, x), verdict.clone())
                .required(x.required)
                .expression("expected", x.value.clone());
            if verdict.method == Method::Symbolic {
                let (worst, samples) = sampled_difference(&computed, &expected, &policy)?;
                r = r.value("sampled_max_abs_difference", worst).value("samples", samples as f64);
            }
            out.push(annotate(with_expression(r, "computed", &computed), x));
        }
        Ok(out)
    }

    /// A numeric expectation compared against `value`.
    fn numeric_expectation(&self, x: &Expectation, value: f64, distance: impl Fn(f64, f64) -> f64) -> Result<CheckResult> {
        let expected = self.model.constant(&x.value, &format!("expectation `{}`", x.label))?;
        let policy = x.tolerance.map_or_else(|| self.policy(), |t| self.policy().with_tolerance(t));
        let v = Verdict::from_residual(distance(value, expected), 1, &policy);
        let r = CheckResult::zero(expectation_name(self.check, x), v)
            .required(x.required)
            .value("computed", value)
            .value("expected", expected);
        Ok(annotate(r, x))
    }
}

/// Largest `|a - b|` with both sides evaluated separately at the policy's
/// sample points.
fn sampled_difference(a: &Expr, b: &Expr, policy: &ZeroTestPolicy) -> Result<(f64, usize)> {
    let program = Compiled::new(&[a.clone(), b.clone()]);
    let points = policy.domain.sample(&program, policy.samples, policy.seed)?;
    let worst = points.iter().map(|(_, v)| (v[0] - v[1]).abs()).fold(0.0, f64::max);
    Ok((worst, points.len()))
}

fn expectation_name(check: &str, x: &Expectation) -> String {
    format!("{check}/expect/{}", x.label)
}

fn annotate(r: CheckResult, x: &Expectation) -> CheckResult {
    match &x.note {
        Some(n) => r.note(n.clone()),
        None => r,
    }
}

fn with_expression(r: CheckResult, key: &str, e: &Expr) -> CheckResult {
    let text = e.to_string();
    if text.len() <= MAX_PRINTED {
        r.expression(key, text)
    } else {
        r
    }
}

fn at3(t: &[Vec<Vec<Expr>>], idx: &[usize]) -> Option<Expr> {
    match idx {
        [a, b, c] => t.get(*a)?.get(*b)?.get(*c).cloned(),
        _ => None,
    }
}

fn differences(a: &[Vec<Expr>], b: &[Vec<Expr>]) -> Vec<Expr> {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(x, y)| x - y)).collect()
}

fn differences3(a: &[Vec<Vec<Expr>>], b: &[Vec<Vec<Expr>>]) -> Vec<Expr> {
    a.iter().zip(b).flat_map(|(x, y)| differences(x, y)).collect()
}

fn merged(forms: &[MultiForm], policy: &ZeroTestPolicy) -> Result<Verdict> {
    let vs = forms.iter().map(|f| f.verdict(policy)).collect::<Result<Vec<_>>>()?;
    Ok(Verdict::merge(&vs, policy))
}

fn curvature(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (cf, p, metric) = (ctx.cf(), ctx.policy(), &ctx.model.metric);
    let lc = Connection::levi_civita(cf)?;
    let data = cartan_curvature(&lc)?;
    let oracle = CoordinateCurvature::of_metric(metric);
    let gamma = lc.christoffel_symbols();
    let mut out = vec![
        ctx.zero("torsion-free", data.torsion_verdict(&p)?),
        ctx.zero("connection-antisymmetric", lc.antisymmetry_verdict(&p)?),
        ctx.zero("metric-compatible", lc.metric_compatible(metric, &p)?),
        ctx.zero("ricci-symmetric", data.ricci_symmetry_verdict(&p)?),
        ctx.zero("christoffel-matches-metric", is_zero_all(&differences3(gamma, &oracle.christoffel), &p)?),
        ctx.zero("ricci-matches-metric", is_zero_all(&differences(&frame_to_coordinate(cf, &data.ricci), &oracle.ricci), &p)?),
        with_expression(ctx.zero("scalar-matches-metric", is_zero(&(&data.scalar - &oracle.scalar), &p)?), "scalar", &data.scalar),
    ];
    let lowered = lower_first(gamma, metric);
    out.extend(ctx.expectations(|q, idx| match q {
        Quantity::Christoffel => at3(gamma, idx),
        Quantity::LoweredChristoffel => at3(&lowered, idx),
        Quantity::FrameConnection => match idx {
            [a, k, b] => lc.frame_coefficient(*a, *k, *b).ok(),
            _ => None,
        },
        Quantity::ScalarCurvature => idx.is_empty().then(|| data.scalar.clone()),
        _ => None,
    })?);
    Ok(out)
}

fn torsion(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (cf, p) = (ctx.cf(), ctx.policy());
    let tp = Connection::teleparallel(cf);
    let data = cartan_curvature(&tp)?;
    let flat = if data.curvature_structurally_zero() {
        Verdict::symbolic_zero(&p)
    } else {
        data.curvature_verdict(&p)?
    };
    let mut out = vec![
        ctx.zero("curvature-vanishes", flat)
            .value("structural", if data.curvature_structurally_zero() { 1.0 } else { 0.0 }),
        ctx.zero("metric-compatible", tp.metric_compatible(&ctx.model.metric, &p)?),
    ];
    out.extend(ctx.expectations(|q, idx| match q {
        Quantity::TorsionMagnitude => at3(&data.torsion_components, idx),
        _ => None,
    })?);
    Ok(out)
}

fn nonmetricity_check(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (p, metric) = (ctx.policy(), &ctx.model.metric);
    let background = ctx.background()?;
    let conn = Connection::christoffel(background);
    let q = nonmetricity(&conn, metric)?;
    let deformed = is_zero_all(&differences(metric.components(), background.components()), &p)?;
    let expect = if deformed.is_zero() { Expect::Zero } else { Expect::Nonzero };
    let mut nonzero = CheckResult::new(ctx.name("nonmetricity"), expect, is_zero_all(&q.flatten(), &p)?);
    let n = metric.dim();
    for mu in 0..n {
        for a in 0..n {
            for b in a..n {
                let c = crate::expr::simplify(q.get(mu, a, b));
                if !c.is_zero() {
                    nonzero = with_expression(nonzero, &format!("Q_{mu}{a}{b}"), &c);
                }
            }
        }
    }
    let mut out = vec![
        ctx.zero("background-compatible", conn.metric_compatible(background, &p)?),
        ctx.zero("symmetric", q.symmetry_verdict(&p)?),
        nonzero,
    ];
    out.extend(ctx.expectations(|quantity, idx| match quantity {
        Quantity::Nonmetricity => at3(&q.q, idx),
        _ => None,
    })?);
    Ok(out)
}

fn strain(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (p, metric) = (ctx.policy(), &ctx.model.metric);
    let background = ctx.background()?;
    let flat = Connection::christoffel(background);
    let q = nonmetricity(&flat, metric)?;
    let s = strain_tensor(&q, metric);
    let gamma = metric.christoffel();
    let l = flat.christoffel_symbols();
    let half = Rational64::new(1, 2);
    let relation = |sign: i64| -> Vec<Expr> {
        let n = metric.dim();
        let mut res = Vec::with_capacity(n * n * n);
        for r in 0..n {
            for a in 0..n {
                for b in 0..n {
                    res.push(Expr::sum([l[r][a][b].clone(), gamma[r][a][b].neg(), s[r][a][b].scaled(half * sign)]));
                }
            }
        }
        res
    };
    let mut out = vec![
        ctx.zero("relation", is_zero_all(&relation(1), &p)?).expression("form", "L = Gamma - S/2"),
        ctx.zero("relation-flipped", is_zero_all(&relation(-1), &p)?)
            .optional()
            .expression("form", "L = Gamma + S/2")
            .note("opposite-sign form, kept for comparison; holds only where the strain vanishes"),
    ];
    let lowered_gamma = lower_first(&gamma, metric);
    let lowered_strain = lower_first(&s, metric);
    out.extend(ctx.expectations(|quantity, idx| match quantity {
        Quantity::Christoffel => at3(&gamma, idx),
        Quantity::LoweredChristoffel => at3(&lowered_gamma, idx),
        Quantity::LoweredStrain => at3(&lowered_strain, idx),
        Quantity::Nonmetricity => at3(&q.q, idx),
        _ => None,
    })?);
    Ok(out)
}

fn einstein(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (cf, p, metric) = (ctx.cf(), ctx.policy(), &ctx.model.metric);
    let data = cartan_curvature(&Connection::levi_civita(cf)?)?;
    let oracle = CoordinateCurvature::of_metric(metric);
    let expect = if ctx.model.definition.vacuum { Expect::Zero } else { Expect::Nonzero };
    let mixed = einstein_tensor(cf, &data);
    let n = cf.dim();
    let lowered: Vec<Vec<Expr>> =
        (0..n).map(|d| (0..n).map(|a| mixed[d][a].scaled(cf.eta(d).into())).collect()).collect();
    Ok(vec![
        CheckResult::new(ctx.name("ricci"), expect, data.ricci_verdict(&p)?),
        CheckResult::new(ctx.name("ricci-metric"), expect, is_zero_all(&oracle.ricci.iter().flatten().cloned().collect::<Vec<_>>(), &p)?),
        ctx.zero("ricci-matches-metric", is_zero_all(&differences(&frame_to_coordinate(cf, &data.ricci), &oracle.ricci), &p)?),
        ctx.zero("tensor-matches-metric", is_zero_all(&differences(&frame_to_coordinate(cf, &lowered), &oracle.einstein(metric)), &p)?),
    ])
}

fn source(model: &Model) -> MatterSource {
    model.source.clone().unwrap_or_else(|| MatterSource::vacuum(&model.coframe))
}

fn field_equations(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let p = ctx.policy();
    let report = field_equation_residual(ctx.cf(), &source(ctx.model), ctx.opts.duplicate_term, &p)?;
    let required = ctx.model.has_field_equations();
    let mut residual = ctx.zero("residual", report.residual_verdict(&p)).required(required);
    for ix in &report.indices {
        residual = residual.value(format!("max_residual_d{}", ix.index), ix.residual_verdict.max_abs_residual);
    }
    let mut out = vec![residual, ctx.zero("coderivative", report.coderivative_verdict(&p)).required(required)];
    if !required {
        for r in &mut out {
            r.note = Some("model declares neither vacuum nor a source table".into());
        }
    }
    Ok(out)
}

fn equivalence(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (cf, p) = (ctx.cf(), ctx.policy());
    let report = equivalence_check(cf, ctx.opts.duplicate_term, &p)?;
    let v = report.equivalence_verdict(&p).expect("equivalence reports carry the Einstein comparison");
    let mut out = vec![ctx.zero("einstein-forms", v)];
    if !ctx.model.definition.vacuum {
        // both sides must be nonzero for the comparison to mean anything
        let lhs: Vec<MultiForm> = report.indices.iter().map(|ix| ix.residual.clone()).collect();
        let data = cartan_curvature(&Connection::levi_civita(cf)?)?;
        let g = einstein_3forms_from(cf, &data)?;
        out.push(CheckResult::nonzero(ctx.name("teleparallel-side-nonzero"), merged(&lhs, &p)?));
        out.push(CheckResult::nonzero(ctx.name("einstein-side-nonzero"), merged(&g, &p)?));
    }
    Ok(out)
}

fn decomposition(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    Ok(vec![ctx.zero("boundary-term", lagrangian_decomposition_check(ctx.cf(), &ctx.policy())?)])
}

fn conservation(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (cf, p) = (ctx.cf(), ctx.policy());
    let v = conservation_check(cf, &source(ctx.model), ctx.opts.duplicate_term, &p)?;
    let forms = random_forms(cf, RANDOM_FORMS, ctx.opts.seed);
    let twice = |op: &(dyn Fn(&MultiForm) -> MultiForm + Sync)| -> Result<CheckResult> {
        let results = par::map(&forms, |f| {
            let r = op(&op(f));
            // past this size the simplifier rarely finishes the cancellation
            if r.terms().values().map(Expr::size).sum::<usize>() <= SIMPLIFY_LIMIT {
                r.simplified()
            } else {
                r
            }
        });
        let structural = results.iter().filter(|f| f.is_structurally_zero()).count();
        let pending: Vec<MultiForm> = results.into_iter().filter(|f| !f.is_structurally_zero()).collect();
        let verdict = merged(&pending, &p)?;
        Ok(CheckResult::zero(String::new(), verdict)
            .value("forms", forms.len() as f64)
            .value("structurally_zero", structural as f64))
    };
    let mut d2 = twice(&|f: &MultiForm| f.exterior_d())?;
    d2.name = ctx.name("d-squared");
    let mut delta2 = twice(&|f: &MultiForm| f.coderivative())?;
    delta2.name = ctx.name("coderivative-squared");
    Ok(vec![ctx.zero("energy-momentum", v).required(ctx.model.has_field_equations()), d2, delta2])
}

/// Deterministic random forms with small polynomial and trigonometric
/// coefficients in the chart coordinates.
pub fn random_forms(cf: &std::sync::Arc<Coframe>, count: usize, seed: u64) -> Vec<MultiForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cf.dim();
    let coords: Vec<Expr> = (0..n).map(|mu| cf.chart().coord(mu)).collect();
    let coefficient = |rng: &mut ChaCha8Rng| -> Expr {
        let terms = rng.random_range(1..=2);
        Expr::sum((0..terms).map(|_| {
            let c = Expr::int([-3, -2, -1, 1, 2, 3][rng.random_range(0..6)]);
            let x = coords[rng.random_range(0..n)].clone();
            let factor = match rng.random_range(0..4) {
                0 => x,
                1 => &x * &coords[rng.random_range(0..n)],
                2 => Expr::sin(x),
                _ => Expr::cos(x),
            };
            &c * &factor
        }))
    };
    (0..count)
        .map(|_| {
            let grade = rng.random_range(0..=n);
            let all = blades(n, grade);
            let picks = rng.random_range(1..=all.len().min(3));
            let terms: Vec<_> = (0..picks).map(|_| (all[rng.random_range(0..all.len())], coefficient(&mut rng))).collect();
            MultiForm::from_terms(cf, terms)
        })
        .collect()
}

/// Curve, initial vector and step count of the transport check.
pub struct TransportSetup {
    pub curve: Curve,
    pub vector: Vec<f64>,
    pub steps: usize,
}

pub fn transport_setup(model: &Model, opts: &CheckOptions) -> Result<TransportSetup> {
    let defaults = model.definition.transport.clone().unwrap_or_default();
    let n = model.dim();
    let curve = match opts.path.as_ref().or(defaults.path.as_ref()) {
        Some(spec) => Curve::parse(spec, n, &model.constants())?,
        None => {
            let p = base_point(model)?;
            let widths = widths(model);
            let mut q = p.clone();
            for (x, w) in q.iter_mut().zip(&widths) {
                *x += 0.01 * w;
            }
            Curve::polyline(vec![p, q])?
        }
    };
    let vector = opts
        .vector
        .clone()
        .or(defaults.vector)
        .unwrap_or_else(|| (0..n).map(|i| 1.0 / (i + 1) as f64).collect());
    if vector.len() != n {
        return Err(Error::Dimension { expected: n, found: vector.len() });
    }
    let steps = opts.steps.unwrap_or_else(|| default_steps(&curve));
    Ok(TransportSetup { curve, vector, steps })
}

fn base_point(model: &Model) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let b = model
        .chart()
        .domain()
        .candidates(1, &mut rng)?
        .pop()
        .ok_or_else(|| Error::Model("no valid base point".into()))?;
    model.chart().coords().iter().map(|c| b.get(c).ok_or_else(|| Error::Model(format!("no value for `{c}`")))).collect()
}

fn widths(model: &Model) -> Vec<f64> {
    let domain = model.chart().domain();
    model
        .chart()
        .coords()
        .iter()
        .map(|c| domain.intervals.iter().find(|(s, _, _)| s == c).map_or(1.0, |(_, lo, hi)| hi - lo))
        .collect()
}

/// Transport the setup vector with the chosen connection, for traces.
pub fn transport_run(model: &Model, connection: ConnectionChoice, opts: &CheckOptions) -> Result<TransportResult> {
    let setup = transport_setup(model, opts)?;
    match connection {
        ConnectionChoice::Lc => {
            let lc = Connection::levi_civita(&model.coframe)?;
            parallel_transport(&lc, &setup.curve, &setup.vector, setup.steps, &model.region)
        }
        ConnectionChoice::Nunes => {
            let tp = Connection::teleparallel(&model.coframe);
            nunes_transport(&tp, &setup.curve, &setup.vector, setup.steps, &model.region)
        }
    }
}

fn transport(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let p = ctx.policy();
    let model = ctx.model;
    let setup = transport_setup(model, ctx.opts)?;
    let mut out = Vec::new();
    if ctx.opts.connection != Some(ConnectionChoice::Nunes) {
        let run = transport_run(model, ConnectionChoice::Lc, ctx.opts)?;
        let drift = run.norm_drift().unwrap_or(f64::NAN);
        out.push(
            ctx.zero("lc-norm-conserved", Verdict::from_residual(drift, run.s.len(), &p))
                .value("steps", run.steps as f64)
                .value("norm", run.norm.as_ref().map_or(f64::NAN, |t| t[0])),
        );
        let lc = Connection::levi_civita(&model.coframe)?;
        let (s0, _) = setup.curve.interval();
        let (x0, u0) = setup.curve.state(s0)?;
        let (_, run) =
            geodesic_transport(&lc, &x0, &u0, Some(&setup.vector), (0.0, 1.0), GEODESIC_STEPS, &model.region)?;
        let run = run.expect("a vector was transported");
        let drift = run.tangent_drift().unwrap_or(f64::NAN).max(run.norm_drift().unwrap_or(f64::NAN));
        out.push(
            ctx.zero("lc-geodesic-products-conserved", Verdict::from_residual(drift, run.s.len(), &p))
                .value("steps", run.steps as f64),
        );
    }
    if ctx.opts.connection != Some(ConnectionChoice::Lc) {
        let run = transport_run(model, ConnectionChoice::Nunes, ctx.opts)?;
        let change = run
            .components
            .iter()
            .flat_map(|c| c.iter().zip(&setup.vector).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        out.push(
            ctx.zero("nunes-components-constant", Verdict::from_residual(change, run.s.len(), &p))
                .value("steps", run.steps as f64),
        );
    }
    Ok(out)
}

fn loop_curve(model: &Model) -> Result<Curve> {
    let defaults = model.definition.transport.clone().unwrap_or_default();
    match defaults.loop_path {
        Some(spec) => Curve::parse(&spec, model.dim(), &model.constants()),
        None => {
            let p = base_point(model)?;
            let w = widths(model);
            let corner = |da: f64, db: f64| {
                let mut q = p.clone();
                q[0] += da * w[0];
                q[1] += db * w[1];
                q
            };
            Curve::polyline(vec![corner(0.0, 0.0), corner(0.01, 0.0), corner(0.01, 0.01), corner(0.0, 0.01), corner(0.0, 0.0)])
        }
    }
}

fn holonomy_check(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (model, p) = (ctx.model, ctx.policy());
    let curve = loop_curve(model)?;
    let steps = ctx.opts.steps.unwrap_or_else(|| default_steps(&curve));
    let lc = holonomy(&Connection::levi_civita(&model.coframe)?, &curve, steps, &model.region)?;
    let tp = holonomy(&Connection::teleparallel(&model.coframe), &curve, steps, &model.region)?;
    // Mᵀ η M = η in the orthonormal frame
    let n = model.dim();
    let eta: Vec<f64> = (0..n).map(|a| model.coframe.eta(a) as f64).collect();
    let mut isometry = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n).map(|k| lc.matrix[k][i] * eta[k] * lc.matrix[k][j]).sum();
            isometry = isometry.max((v - if i == j { eta[i] } else { 0.0 }).abs());
        }
    }
    let mut iso = ctx
        .zero("lc-isometry", Verdict::from_residual(isometry, 1, &p))
        .value("steps", steps as f64)
        .value("identity_deviation", lc.identity_deviation);
    if let Some(a) = lc.angle {
        iso = iso.value("angle", a);
    }
    let mut out = vec![
        iso,
        ctx.zero("nunes-identity", Verdict::from_residual(tp.identity_deviation, 1, &p)),
    ];
    for x in model.expectations(ctx.check) {
        let angle = match (x.quantity, lc.angle) {
            (Quantity::HolonomyAngle, Some(a)) => a,
            _ => return Err(Error::Model(format!("expectation `{}` needs a two-dimensional holonomy angle", x.label))),
        };
        out.push(ctx.numeric_expectation(x, angle, |a, b| {
            let d = (a - b).rem_euclid(TAU);
            d.min(TAU - d)
        })?);
    }
    Ok(out)
}

fn quad_torsion(ctx: &Ctx) -> Result<Vec<CheckResult>> {
    let (model, p) = (ctx.model, ctx.policy());
    let n = model.dim();
    let defaults = model.definition.transport.clone().unwrap_or_default();
    let point = match &defaults.quad_point {
        Some(xs) => xs
            .iter()
            .enumerate()
            .map(|(i, x)| model.constant(x, &format!("quad_point[{i}]")))
            .collect::<Result<Vec<_>>>()?,
        None => base_point(model)?,
    };
    if point.len() != n {
        return Err(Error::Dimension { expected: n, found: point.len() });
    }
    let [a, b] = defaults.quad_directions.unwrap_or([0, 1]);
    let mut at = model.constants();
    for (c, x) in model.chart().coords().iter().zip(&point) {
        at.set(c, *x);
    }
    for (c, x) in &model.chart().domain().fixed {
        at.set(c, *x);
    }
    let tp = Connection::teleparallel(&model.coframe);
    let lc = Connection::levi_civita(&model.coframe)?;
    let gamma = tp.christoffel_symbols();
    // T^ρ_ab = Γ^ρ_ab - Γ^ρ_ba
    let torsion: Vec<Expr> = (0..n).map(|r| &gamma[r][a][b] - &gamma[r][b][a]).collect();
    let t = Compiled::new(&torsion).eval(&at)?;
    let g: Vec<f64> = Compiled::new(&model.metric.components().iter().flatten().cloned().collect::<Vec<_>>()).eval(&at)?;
    let gm = |i: usize, j: usize| g[i * n + j];
    let scale = (gm(a, a) * gm(b, b)).abs().sqrt();
    let norm = |u: &[f64]| -> f64 {
        let s: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| gm(i, j) * u[i] * u[j]).sum();
        s.abs().sqrt()
    };
    let exact = norm(&t) / scale;
    let estimate = |conn: &Connection, d: f64| -> Result<f64> {
        let q = quadrilateral_torsion_estimate(conn, &point, (a, d), (b, d), QUAD_STEPS, &model.region)?;
        Ok(norm(&q.gap) / (d * d * scale))
    };
    let tele: Vec<f64> = QUAD_EDGES.iter().map(|&d| estimate(&tp, d)).collect::<Result<_>>()?;
    let levi: Vec<f64> = QUAD_EDGES.iter().map(|&d| estimate(&lc, d)).collect::<Result<_>>()?;
    let errors: Vec<f64> = tele.iter().map(|e| (e - exact).abs()).collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let (lo, hi) = FIRST_ORDER_RATIO;
    let outside = ratios.iter().map(|r| if r.is_nan() { f64::NAN } else { (lo - r).max(r - hi).max(0.0) }).fold(0.0, f64::max);
    let k = QUAD_EDGES.len();
    let richardson = |v: &[f64]| 2.0 * v[k - 1] - v[k - 2];
    let limit = richardson(&tele);

    let mut convergence = ctx
        .zero("first-order-convergence", Verdict::from_residual(outside, k, &p.clone().with_tolerance(1e-12)))
        .required(exact > 1e-6)
        .value("exact", exact);
    for (i, (d, e)) in QUAD_EDGES.iter().zip(&tele).enumerate() {
        convergence = convergence.value(format!("estimate_{i}"), *e).value(format!("edge_{i}"), *d);
    }
    for (i, r) in ratios.iter().enumerate() {
        convergence = convergence.value(format!("error_ratio_{i}"), *r);
    }
    let mut out = vec![
        convergence,
        ctx.zero("limit", Verdict::from_residual((limit - exact).abs(), k, &p))
            .value("extrapolated", limit)
            .value("exact", exact),
        ctx.zero("lc-limit-vanishes", Verdict::from_residual(richardson(&levi).abs(), k, &p))
            .value("extrapolated", richardson(&levi))
            .value("estimate_smallest", levi[k - 1]),
    ];
    for x in model.expectations(ctx.check) {
        if x.quantity != Quantity::QuadTorsionLimit {
            return Err(Error::Model(format!("expectation `{}` is not a quadrilateral limit", x.label)));
        }
        out.push(ctx.numeric_expectation(x, limit, |a, b| (a - b).abs())?);
    }
    Ok(out)
}

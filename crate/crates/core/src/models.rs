//! Model definitions: JSON documents with expression strings, and the
//! registry of shipped models.
//!
//! A definition either gives an orthonormal coframe directly or a metric,
//! which is factorized at load as `g = L D Lᵀ` with `L` unit lower
//! triangular. The coframe is then `θ^a = |D_a|^{1/2} Σ_μ L_μa dx^μ` with
//! signature `sign D_a`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::MatterSource;
use crate::expr::{parse, Binding, Compiled, Expr, Rational, SamplingDomain, ZeroTestPolicy};
use crate::forms::{Chart, Coframe};
use crate::frames::Metric;
use crate::transport::Region;
use crate::{Error, Result};

const REGISTRY: [(&str, &str); 5] = [
    ("minkowski-cartesian", include_str!("../models/minkowski-cartesian.json")),
    ("schwarzschild-cartesian", include_str!("../models/schwarzschild-cartesian.json")),
    ("schwarzschild-spherical", include_str!("../models/schwarzschild-spherical.json")),
    ("sphere-unit", include_str!("../models/sphere-unit.json")),
    ("conformal-test", include_str!("../models/conformal-test.json")),
];

/// Probe points used for invertibility and pivot-sign checks.
const PROBES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordRange {
    pub coord: String,
    pub lo: String,
    pub hi: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub expr: String,
    pub lo: String,
    pub hi: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Periodic {
    pub coord: String,
    pub period: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// `θ^a_μ`, row `a`.
    Coframe(Vec<Vec<String>>),
    /// `g_μν`.
    Metric(Vec<Vec<String>>),
}

/// Defaults for the transport, holonomy and quadrilateral checks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportDefaults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "loop")]
    pub loop_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_point: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_directions: Option<[usize; 2]>,
}

/// Which computed quantity an [`Expectation`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `Γ^ρ_μν` of the Levi-Civita connection, `[ρ, μ, ν]`.
    Christoffel,
    /// `g_ρσ Γ^σ_μν`, `[ρ, μ, ν]`.
    LoweredChristoffel,
    /// `ω^a_{kb}` of the Levi-Civita connection, `[a, k, b]`.
    FrameConnection,
    /// Scalar curvature.
    ScalarCurvature,
    /// `|T^a_bc|` of the teleparallel connection, compared by squares.
    TorsionMagnitude,
    /// `Q_μαβ` of the background connection, `[μ, α, β]`.
    Nonmetricity,
    /// `g_ρσ S^σ_μν`, `[ρ, μ, ν]`.
    LoweredStrain,
    /// Levi-Civita holonomy angle around the default loop.
    HolonomyAngle,
    /// Limit of the quadrilateral estimate at the default point.
    QuadTorsionLimit,
}

/// A model-specific value a check must reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub check: String,
    pub label: String,
    pub quantity: Quantity,
    #[serde(default)]
    pub indices: Vec<usize>,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDefinition {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub coords: Vec<String>,
    pub ranges: Vec<CoordRange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub periodic: Vec<Periodic>,
    /// Bounds replacing `ranges` when building transport regions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transport_bounds: Vec<CoordRange>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<i64>>,
    pub geometry: Geometry,
    /// Flat comparison metric in the same chart, for nonmetricity checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub vacuum: bool,
    /// Matter table `𝒯_da` in frame components, both indices down.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportDefaults>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expectations: Vec<Expectation>,
}

impl ModelDefinition {
    pub fn from_json(text: &str) -> Result<ModelDefinition> {
        serde_json::from_str(text).map_err(|e| Error::Model(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("definitions always serialize")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Names of the shipped models.
pub fn registry_names() -> Vec<&'static str> {
    REGISTRY.iter().map(|(n, _)| *n).collect()
}

/// All shipped definitions.
pub fn registry() -> Vec<ModelDefinition> {
    REGISTRY.iter().map(|(_, text)| ModelDefinition::from_json(text).expect("shipped models parse")).collect()
}

/// Registry name or path to a JSON model file.
pub fn load_definition(name_or_path: &str) -> Result<ModelDefinition> {
    if let Some((_, text)) = REGISTRY.iter().find(|(n, _)| *n == name_or_path) {
        return ModelDefinition::from_json(text);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::Model(format!(
            "`{name_or_path}` is neither a registered model ({}) nor an existing file",
            registry_names().join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    ModelDefinition::from_json(&text).map_err(|e| Error::Model(format!("{}: {e}", path.display())))
}

/// Load and validate with default parameters.
pub fn load_model(name_or_path: &str) -> Result<Model> {
    Model::build(load_definition(name_or_path)?, &BTreeMap::new())
}

/// A validated model instantiated at concrete parameter values.
#[derive(Debug, Clone)]
pub struct Model {
    pub definition: ModelDefinition,
    pub parameters: BTreeMap<String, f64>,
    pub coframe: Arc<Coframe>,
    pub metric: Metric,
    pub background: Option<Metric>,
    pub source: Option<MatterSource>,
    pub region: Region,
}

fn parse_at(text: &str, place: &str) -> Result<Expr> {
    parse(text).map_err(|e| Error::Model(format!("{place}: {e}")))
}

impl Model {
    pub fn name(&self) -> &str {
        &self.definition.name
    }

    pub fn chart(&self) -> &Chart {
        self.coframe.chart()
    }

    pub fn dim(&self) -> usize {
        self.coframe.dim()
    }

    /// Whether the field equations should hold with the model's source.
    pub fn has_field_equations(&self) -> bool {
        self.definition.vacuum || self.source.is_some()
    }

    /// Constant binding: parameters and `pi`.
    pub fn constants(&self) -> Binding {
        constants(&self.parameters)
    }

    /// Evaluate a constant expression such as a bound or an expected value.
    pub fn constant(&self, text: &str, place: &str) -> Result<f64> {
        constant(text, place, &self.parameters)
    }

    pub fn expectations(&self, check: &str) -> Vec<&Expectation> {
        self.definition.expectations.iter().filter(|e| e.check == check).collect()
    }

    /// Validate `def` and instantiate it with `overrides` applied to the
    /// parameter defaults.
    pub fn build(def: ModelDefinition, overrides: &BTreeMap<String, f64>) -> Result<Model> {
        let n = def.dim();
        if n == 0 || n > 8 {
            return Err(Error::Model(format!("{n} coordinates; between 1 and 8 are supported")));
        }
        let mut parameters = def.parameters.clone();
        for (k, v) in overrides {
            match parameters.get_mut(k) {
                Some(slot) => *slot = *v,
                None => return Err(Error::Model(format!("unknown parameter `{k}` for model `{}`", def.name))),
            }
            if !v.is_finite() {
                return Err(Error::Model(format!("parameter `{k}` must be finite")));
            }
        }
        for (k, _) in &parameters {
            if def.coords.contains(k) || k == "pi" {
                return Err(Error::Model(format!("parameter `{k}` shadows a coordinate or constant")));
            }
        }

        let mut domain = SamplingDomain::new();
        for coord in &def.coords {
            let r = def
                .ranges
                .iter()
                .find(|r| &r.coord == coord)
                .ok_or_else(|| Error::Model(format!("coordinate `{coord}` has no range")))?;
            let lo = constant(&r.lo, &format!("ranges.{coord}.lo"), &parameters)?;
            let hi = constant(&r.hi, &format!("ranges.{coord}.hi"), &parameters)?;
            if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                return Err(Error::Model(format!("range of `{coord}` is empty: ({lo}, {hi})")));
            }
            domain = domain.interval(coord, lo, hi);
        }
        if let Some(r) = def.ranges.iter().find(|r| !def.coords.contains(&r.coord)) {
            return Err(Error::Model(format!("range for unknown coordinate `{}`", r.coord)));
        }
        for (k, v) in &parameters {
            domain = domain.fixed(k, *v);
        }
        let mut constraints = Vec::new();
        for (i, c) in def.constraints.iter().enumerate() {
            let place = format!("constraints[{i}]");
            let expr = parse_at(&c.expr, &format!("{place}.expr"))?;
            let lo = constant(&c.lo, &format!("{place}.lo"), &parameters)?;
            let hi = constant(&c.hi, &format!("{place}.hi"), &parameters)?;
            constraints.push((expr, lo, hi));
        }
        for (expr, lo, hi) in &constraints {
            domain = domain.constraint(expr.clone(), *lo, *hi);
        }
        // the parameter values must leave room for sample points
        let mut rng = ChaCha8Rng::seed_from_u64(ZeroTestPolicy::DEFAULT_SEED);
        let probes = domain
            .candidates(PROBES, &mut rng)
            .map_err(|e| Error::Model(format!("parameters {parameters:?} leave no valid points: {e}")))?;
        if probes.len() < PROBES {
            return Err(Error::Model(format!("parameters {parameters:?} leave too few valid points in the domain")));
        }

        let coords: Vec<&str> = def.coords.iter().map(String::as_str).collect();
        let chart = Chart::new(&def.name, &coords, domain)?;
        let square = |rows: &[Vec<String>], what: &str| -> Result<Vec<Vec<Expr>>> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Model(format!("{what} must be a {n}x{n} table")));
            }
            rows.iter()
                .enumerate()
                .map(|(i, r)| r.iter().enumerate().map(|(j, s)| parse_at(s, &format!("{what}[{i}][{j}]"))).collect())
                .collect()
        };
        let known: Vec<&str> = def.coords.iter().map(String::as_str).chain(parameters.keys().map(String::as_str)).collect();
        let check_symbols = |table: &[Vec<Expr>], what: &str| -> Result<()> {
            for e in table.iter().flatten() {
                if let Some(s) = e.symbols().into_iter().find(|s| !known.contains(&s.as_str())) {
                    return Err(Error::Model(format!("{what} uses unknown symbol `{s}`")));
                }
            }
            Ok(())
        };

        let coframe = match &def.geometry {
            Geometry::Coframe(rows) => {
                let theta = square(rows, "coframe")?;
                check_symbols(&theta, "coframe")?;
                let signature =
                    def.signature.clone().ok_or_else(|| Error::Model("a coframe model needs a signature".into()))?;
                Coframe::new(chart.clone(), theta, signature).map_err(|e| Error::Model(format!("coframe: {e}")))?
            }
            Geometry::Metric(rows) => {
                let g = square(rows, "metric")?;
                check_symbols(&g, "metric")?;
                let (theta, signature) = factorize(&g, &probes)?;
                if let Some(declared) = &def.signature {
                    if declared != &signature {
                        return Err(Error::Model(format!(
                            "metric factorizes with signature {signature:?}, declared {declared:?}"
                        )));
                    }
                }
                Coframe::new(chart.clone(), theta, signature).map_err(|e| Error::Model(format!("metric: {e}")))?
            }
        };
        let metric = match &def.geometry {
            Geometry::Metric(rows) => Metric::new(chart.clone(), square(rows, "metric")?)?,
            Geometry::Coframe(_) => Metric::of_coframe(&coframe),
        };
        let background = match &def.background {
            Some(rows) => {
                let b = square(rows, "background")?;
                check_symbols(&b, "background")?;
                Some(Metric::new(chart.clone(), b)?)
            }
            None => None,
        };
        let source = match &def.source {
            Some(rows) => {
                let t = square(rows, "source")?;
                check_symbols(&t, "source")?;
                Some(MatterSource::from_tensor(&coframe, &t)?)
            }
            None => None,
        };

        let mut region = Region::new();
        for coord in &def.coords {
            if def.periodic.iter().any(|p| &p.coord == coord) {
                continue;
            }
            let r = def.transport_bounds.iter().find(|r| &r.coord == coord).or_else(|| def.ranges.iter().find(|r| &r.coord == coord));
            if let Some(r) = r {
                let lo = constant(&r.lo, &format!("bounds.{coord}.lo"), &parameters)?;
                let hi = constant(&r.hi, &format!("bounds.{coord}.hi"), &parameters)?;
                region = region.bound(coord, lo, hi);
            }
        }
        for p in &def.periodic {
            if !def.coords.contains(&p.coord) {
                return Err(Error::Model(format!("periodic entry for unknown coordinate `{}`", p.coord)));
            }
            let period = constant(&p.period, &format!("periodic.{}", p.coord), &parameters)?;
            region = region.periodic(&p.coord, period);
        }
        for (expr, lo, hi) in constraints {
            region = region.constraint(expr, lo, hi);
        }
        for (i, x) in def.expectations.iter().enumerate() {
            parse_at(&x.value, &format!("expectations[{i}].value"))?;
        }

        Ok(Model { definition: def, parameters, coframe, metric, background, source, region })
    }
}

fn constants(parameters: &BTreeMap<String, f64>) -> Binding {
    let mut b = Binding::new().with("pi", PI);
    for (k, v) in parameters {
        b.set(k, *v);
    }
    b
}

/// Evaluate a constant: a decimal literal or an expression in the
/// parameters and `pi`.
fn constant(text: &str, place: &str, parameters: &BTreeMap<String, f64>) -> Result<f64> {
    if let Ok(v) = text.trim().parse::<f64>() {
        return Ok(v);
    }
    let e = parse_at(text, place)?;
    e.eval(&constants(parameters)).map_err(|err| Error::Model(format!("{place}: {err}")))
}

/// Symbolic `g = L D Lᵀ`; returns `θ^a_μ = |D_a|^{1/2} L_μa` and the
/// pivot signs, which must agree at every probe point.
pub fn factorize(g: &[Vec<Expr>], probes: &[Binding]) -> Result<(Vec<Vec<Expr>>, Vec<i64>)> {
    let n = g.len();
    let mut l = vec![vec![Expr::zero(); n]; n];
    let mut d = vec![Expr::zero(); n];
    for j in 0..n {
        let mut pivot = vec![g[j][j].clone()];
        for k in 0..j {
            if !l[j][k].is_zero() {
                pivot.push((&(&l[j][k] * &l[j][k]) * &d[k]).neg());
            }
        }
        d[j] = Expr::sum(pivot);
        if d[j].is_zero() {
            return Err(Error::Singular(format!("metric pivot {j} vanishes identically")));
        }
        l[j][j] = Expr::one();
        let inv = d[j].recip();
        for i in j + 1..n {
            let mut t = vec![g[i][j].clone()];
            for k in 0..j {
                if !l[i][k].is_zero() && !l[j][k].is_zero() {
                    t.push((&(&l[i][k] * &l[j][k]) * &d[k]).neg());
                }
            }
            let v = Expr::sum(t);
            l[i][j] = if v.is_zero() { v } else { &v * &inv };
        }
    }
    let program = Compiled::new(&d);
    let mut signs: Option<Vec<i64>> = None;
    for b in probes {
        let vals = program.eval(b).map_err(|e| Error::Singular(format!("metric pivots undefined: {e}")))?;
        if let Some(v) = vals.iter().find(|v| v.abs() < 1e-12) {
            return Err(Error::Singular(format!("metric pivot {v:e} at a probe point")));
        }
        let s: Vec<i64> = vals.iter().map(|v| if *v > 0.0 { 1 } else { -1 }).collect();
        match &signs {
            None => signs = Some(s),
            Some(prev) if *prev != s => return Err(Error::Singular("metric pivot signs change across the domain".into())),
            Some(_) => {}
        }
    }
    let signs = signs.ok_or_else(|| Error::Singular("no probe points".into()))?;
    let theta = (0..n)
        .map(|a| {
            let amplitude = Expr::pow(&d[a].scaled(Rational::from(signs[a])), Rational::new(1, 2));
            (0..n).map(|mu| if l[mu][a].is_zero() { Expr::zero() } else { &amplitude * &l[mu][a] }).collect()
        })
        .collect();
    Ok((theta, signs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_parses_and_round_trips() {
        for def in registry() {
            let again = ModelDefinition::from_json(&def.to_json()).unwrap();
            assert_eq!(again, def);
        }
        assert_eq!(registry_names().len(), 5);
    }

    #[test]
    fn constants_accept_decimals_and_pi() {
        let p = BTreeMap::from([("m".to_string(), 2.0)]);
        assert_eq!(constant("0.05", "x", &p).unwrap(), 0.05);
        assert!((constant("2*pi - 1/5", "x", &p).unwrap() - (2.0 * PI - 0.2)).abs() < 1e-15);
        assert_eq!(constant("3*m", "x", &p).unwrap(), 6.0);
        let err = constant("3*", "ranges.r.lo", &p).unwrap_err().to_string();
        assert!(err.contains("ranges.r.lo") && err.contains("offset"), "{err}");
    }
}

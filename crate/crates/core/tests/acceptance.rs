//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero only when a criterion misses its recorded outcome.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use cartanlab::checks::{random_forms, run_check, run_checks, CheckOptions, RANDOM_FORMS};
use cartanlab::expr::{is_zero, parse, simplify, Binding, Compiled, Expr, Status};
use cartanlab::forms::{blades, grade, Blade, Chart, Coframe, MultiForm};
use cartanlab::frames::{cartan_curvature, lower_first, Connection};
use cartanlab::models::{load_model, registry_names, Model};
use cartanlab::report::{emit, CheckResult, Format, Report};
use cartanlab::transport::{holonomy, nunes_transport, parallel_transport, Curve, Region};

type Outcome = Result<Verdict, cartanlab::Error>;

/// `pass` is the literal criterion. `recorded` holds when a failing
/// criterion fails in exactly the known way.
struct Verdict {
    pass: bool,
    recorded: bool,
    detail: String,
}

impl Verdict {
    fn of(pass: bool, detail: String) -> Verdict {
        Verdict { pass, recorded: pass, detail }
    }
}

struct Tally {
    ok: bool,
    notes: Vec<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally { ok: true, notes: Vec::new() }
    }

    fn need(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.ok = false;
            self.notes.push(format!("missed: {}", what.into()));
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }

    fn finish(self) -> Verdict {
        Verdict::of(self.ok, self.notes.join("; "))
    }
}

fn model(name: &str) -> Model {
    load_model(name).unwrap_or_else(|e| panic!("model {name}: {e}"))
}

fn result<'a>(r: &'a Report, name: &str) -> &'a CheckResult {
    r.check(name).unwrap_or_else(|| panic!("report {} lacks {name}", r.command))
}

fn passed(r: &Report, name: &str) -> bool {
    result(r, name).passed
}

fn residual(r: &Report, name: &str) -> f64 {
    result(r, name).verdict.max_abs_residual
}

fn samples(m: &Model, count: usize, seed: u64) -> Vec<Binding> {
    let policy = m.chart().policy().with_samples(count).with_seed(seed);
    let probe = Compiled::new(&[Expr::zero()]);
    policy.domain.sample(&probe, count, seed).expect("domain samples").into_iter().map(|(b, _)| b).collect()
}

fn criterion_1() -> Outcome {
    let m = model("sphere-unit");
    let mut t = Tally::new();
    let report = run_check(&m, "curvature", &CheckOptions::default())?;
    t.need(report.passed, "curvature report passes");
    for name in [
        "curvature/expect/Gamma^phi_theta phi",
        "curvature/expect/Gamma^theta_phi phi",
        "curvature/expect/omega^1_10",
        "curvature/expect/omega^0_11",
        "curvature/expect/R",
        "curvature/torsion-free",
        "curvature/ricci-matches-metric",
        "curvature/scalar-matches-metric",
    ] {
        t.need(passed(&report, name), name);
    }

    // hand-written Christoffel symbols of dθ² + sin²θ dφ²
    let gamma = m.metric.christoffel();
    let closed = |theta: f64| -> [[[f64; 2]; 2]; 2] {
        let (s, c) = theta.sin_cos();
        [[[0.0, 0.0], [0.0, -s * c]], [[0.0, c / s], [c / s, 0.0]]]
    };
    let flat: Vec<Expr> = gamma.iter().flatten().flatten().cloned().collect();
    let program = Compiled::new(&flat);
    let mut worst: f64 = 0.0;
    for b in samples(&m, 20, 1) {
        let got = program.eval(&b)?;
        let want = closed(b.get("theta").unwrap());
        for (k, v) in got.iter().enumerate() {
            worst = worst.max((v - want[k / 4][(k / 2) % 2][k % 2]).abs());
        }
    }
    t.need(worst < 1e-10, format!("Christoffel oracle {worst:.1e}"));

    let data = cartan_curvature(&Connection::levi_civita(&m.coframe)?)?;
    t.need(data.torsion.iter().all(|f| f.simplified().is_structurally_zero()), "torsion 2-forms vanish");
    let comps: Vec<Expr> = data.riemann.iter().flatten().flatten().flatten().cloned().collect();
    let program = Compiled::new(&comps);
    let mut off_unit: f64 = 0.0;
    let mut nonzero = 0;
    for b in samples(&m, 20, 2) {
        for v in program.eval(&b)? {
            if v.abs() > 1e-10 {
                nonzero += 1;
                off_unit = off_unit.max((v.abs() - 1.0).abs());
            }
        }
    }
    t.need(nonzero > 0 && off_unit < 1e-10, format!("|R^a_bcd| = 1 ({off_unit:.1e})"));
    t.need(simplify(&data.scalar) == Expr::int(2), format!("R = {}", data.scalar));
    t.note(format!("scalar-matches-metric {:.1e}", residual(&report, "curvature/scalar-matches-metric")));
    Ok(t.finish())
}

fn criterion_2() -> Outcome {
    let m = model("sphere-unit");
    let mut t = Tally::new();
    let torsion = run_check(&m, "torsion", &CheckOptions::default())?;
    let flat = result(&torsion, "torsion/curvature-vanishes");
    t.need(flat.passed && flat.verdict.method == cartanlab::expr::Method::Symbolic, "curvature vanishes structurally");
    t.need(passed(&torsion, "torsion/metric-compatible"), "metric compatible");
    t.need(passed(&torsion, "torsion/expect/|T^1_01|"), "|T| = cot theta");

    let quad = run_check(&m, "quad-torsion", &CheckOptions::default())?;
    let conv = result(&quad, "quad-torsion/first-order-convergence");
    let exact = conv.values["exact"];
    t.need((exact - (PI / 3.0).tan().recip()).abs() < 1e-12, format!("exact torsion {exact} = cot(pi/3)"));
    let ratios: Vec<f64> = (0..2).map(|i| conv.values[&format!("error_ratio_{i}")]).collect();
    t.need(ratios.iter().all(|r| (1.6..=2.4).contains(r)), format!("error ratios {ratios:.3?} in [1.6, 2.4]"));
    t.need(passed(&quad, "quad-torsion/limit"), "Richardson limit");
    t.note(format!("error ratios {:.3}, {:.3}; limit {:.5}", ratios[0], ratios[1], result(&quad, "quad-torsion/limit").values["extrapolated"]));
    Ok(t.finish())
}

fn criterion_3() -> Outcome {
    let cart = model("schwarzschild-cartesian");
    let sph = model("schwarzschild-spherical");
    let opts = CheckOptions::default();
    let mut t = Tally::new();
    let q = run_check(&cart, "nonmetricity", &opts)?;
    let q100 = result(&q, "nonmetricity/expect/Q_100");
    t.need(q100.passed && q100.verdict.method == cartanlab::expr::Method::Symbolic, "Q_100 = 2m x1/r^3 symbolically");
    t.need(passed(&q, "nonmetricity/expect/Q_010") && passed(&q, "nonmetricity/expect/Q_001"), "Q_010 = Q_001 = 0");

    // the stated relation g_1r Gamma^r_00 = +m x1/r^3, checked directly
    let lowered = lower_first(&cart.metric.christoffel(), &cart.metric);
    let stated = &lowered[1][0][0] - &parse("m*x1*(x1^2 + x2^2 + x3^2)^(-3/2)")?;
    let policy = cart.chart().policy();
    let literal = is_zero(&stated, &policy)?;
    let corrected = is_zero(&(&lowered[1][0][0] + &parse("m*x1*(x1^2 + x2^2 + x3^2)^(-3/2)")?), &policy)?;
    t.need(literal.status == Status::Zero, format!("g_1r Gamma^r_00 = +m x1/r^3 (residual {:.2e})", literal.max_abs_residual));

    let strain = run_check(&sph, "strain", &opts)?;
    let flipped = result(&strain, "strain/relation-flipped");
    t.need(flipped.passed, "L = Gamma + S/2 in the spherical chart");
    let fixed = result(&strain, "strain/relation");

    let cart_strain = run_check(&cart, "strain", &opts)?;
    let recorded = !t.ok
        && q100.passed
        && literal.status == Status::Nonzero
        && corrected.status == Status::Zero
        && corrected.max_abs_residual < 1e-9
        && flipped.verdict.status == Status::Nonzero
        && fixed.passed
        && passed(&cart_strain, "strain/relation")
        && passed(&cart_strain, "strain/expect/S_100");
    t.note(format!(
        "opposite sign holds: g_1r Gamma^r_00 = -m x1/r^3 ({:?}, {:.1e}), L = Gamma - S/2 ({:?} spherical, {:?} Cartesian)",
        corrected.status,
        corrected.max_abs_residual,
        fixed.verdict.status,
        result(&cart_strain, "strain/relation").verdict.status
    ));
    let mut v = t.finish();
    v.recorded = recorded || v.pass;
    Ok(v)
}

fn criterion_4() -> Outcome {
    let mut t = Tally::new();
    for name in ["schwarzschild-spherical", "schwarzschild-cartesian"] {
        let r = run_check(&model(name), "einstein", &CheckOptions::default())?;
        for c in ["einstein/ricci", "einstein/ricci-metric", "einstein/ricci-matches-metric"] {
            let res = result(&r, c);
            t.need(res.passed && res.verdict.max_abs_residual < 1e-8, format!("{name} {c}"));
        }
        t.note(format!("{name} ricci {:.1e}", residual(&r, "einstein/ricci")));
    }
    Ok(t.finish())
}

fn criterion_5() -> Outcome {
    let mut t = Tally::new();
    for name in ["minkowski-cartesian", "schwarzschild-spherical", "schwarzschild-cartesian", "conformal-test"] {
        let r = run_check(&model(name), "equivalence", &CheckOptions::default())?;
        let v = result(&r, "equivalence/einstein-forms");
        t.need(v.passed && v.verdict.max_abs_residual < 1e-7 && v.verdict.samples_used <= 20, format!("{name} equivalence"));
        if name == "conformal-test" {
            t.need(passed(&r, "equivalence/teleparallel-side-nonzero"), "teleparallel side nonzero");
            t.need(passed(&r, "equivalence/einstein-side-nonzero"), "Einstein side nonzero");
        }
        t.note(format!("{name} {:?} {:.1e}", v.verdict.method, v.verdict.max_abs_residual));
    }
    Ok(t.finish())
}

fn four_dimensional() -> Vec<Model> {
    registry_names().into_iter().map(model).filter(|m| m.dim() == 4).collect()
}

fn criterion_6() -> Outcome {
    let mut t = Tally::new();
    for m in four_dimensional() {
        let r = run_check(&m, "lagrangian-decomposition", &CheckOptions::default())?;
        let v = result(&r, "lagrangian-decomposition/boundary-term");
        t.need(v.passed && v.verdict.max_abs_residual < 1e-7, format!("{} boundary term", m.name()));
    }
    t.note("all 4-dimensional models");
    Ok(t.finish())
}

/// Structural count and leftover residual of δ² over the standard random forms.
fn coderivative_squared(m: &Model) -> Result<(usize, f64), cartanlab::Error> {
    let forms = random_forms(&m.coframe, RANDOM_FORMS, CheckOptions::default().seed);
    let p = m.chart().policy();
    let mut structural = 0;
    let mut worst: f64 = 0.0;
    for f in &forms {
        let r = f.coderivative().coderivative().simplified();
        if r.is_structurally_zero() {
            structural += 1;
        } else {
            worst = worst.max(r.verdict(&p)?.max_abs_residual);
        }
    }
    Ok((structural, worst))
}

fn criterion_7() -> Outcome {
    let mut t = Tally::new();
    let mut recorded = true;
    for name in registry_names() {
        let m = model(name);
        let (structural, leftover) = if m.dim() == 4 {
            let r = run_check(&m, "conservation", &CheckOptions::default())?;
            if m.definition.vacuum {
                t.need(passed(&r, "conservation/energy-momentum"), format!("{name} energy-momentum conserved"));
            }
            let d2 = result(&r, "conservation/coderivative-squared");
            (d2.values["structurally_zero"] as usize, if d2.passed { d2.verdict.max_abs_residual } else { f64::INFINITY })
        } else {
            coderivative_squared(&m)?
        };
        t.need(structural == RANDOM_FORMS, format!("{name}: {structural}/{RANDOM_FORMS} structurally zero"));
        if structural != RANDOM_FORMS {
            // the radicals of the factorized Cartesian coframe defeat the rewrite simplifier
            recorded &= name == "schwarzschild-cartesian" && leftover < 1e-9;
            t.note(format!("{name}: remaining forms vanish numerically, max {leftover:.1e}"));
        }
    }
    let mut v = t.finish();
    v.recorded = v.pass || recorded;
    Ok(v)
}

fn criterion_8() -> Outcome {
    let mut t = Tally::new();
    let m = model("sphere-unit");
    let region = Region::new().bound("theta", 0.05, PI - 0.05).periodic("phi", TAU);
    let lc = Connection::levi_civita(&m.coframe)?;
    let wobble = Curve::analytic("s", vec![parse("1 + 1/2*sin(s)")?, parse("s + 3/10*cos(2*s)")?], 0.0, 3.0 * TAU);
    let run = parallel_transport(&lc, &wobble, &[0.3, -1.2], 10_000, &region)?;
    let drift = run.norm_drift().unwrap_or(f64::INFINITY);
    t.need(drift < 1e-9, format!("g(V,V) drift {drift:.1e} over 10^4 steps"));

    // frame components rotate at rate cos(theta0) per unit phi
    let mut worst: f64 = 0.0;
    for theta0 in [0.3, PI / 3.0, 1.2, 2.5] {
        let h = holonomy(&lc, &Curve::latitude(theta0), 4096, &region)?;
        let oracle = (-TAU * theta0.cos()).rem_euclid(TAU);
        let closed = (TAU * (1.0 - theta0.cos())).rem_euclid(TAU);
        let gap = |a: f64, b: f64| {
            let d = (a - b).rem_euclid(TAU);
            d.min(TAU - d)
        };
        worst = worst.max(gap(h.angle.unwrap(), oracle)).max(gap(oracle, closed));
    }
    t.need(worst < 1e-6, format!("holonomy angle error {worst:.1e}"));

    let nunes = Connection::teleparallel(&m.coframe);
    let run = nunes_transport(&nunes, &wobble, &[0.3, -1.2], 1000, &region)?;
    t.need(run.components.iter().all(|v| v == &[0.3, -1.2]), "Nunes components exactly constant");
    let h = holonomy(&nunes, &Curve::latitude(PI / 3.0), 4096, &region)?;
    t.need(h.identity_deviation == 0.0, "Nunes holonomy exactly identity");
    let report = run_check(&m, "transport", &CheckOptions::default())?;
    t.need(report.passed, "transport report passes");
    t.note(format!("norm drift {drift:.1e}, angle error {worst:.1e}"));
    Ok(t.finish())
}

fn flat(signature: &[i64]) -> std::sync::Arc<Coframe> {
    let n = signature.len();
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let coords: Vec<&str> = names.iter().map(String::as_str).collect();
    let domain = coords.iter().fold(cartanlab::expr::SamplingDomain::new(), |d, c| d.interval(c, -1.0, 1.0));
    let chart = Chart::new("flat", &coords, domain).expect("chart");
    let theta = (0..n).map(|a| (0..n).map(|mu| Expr::int((a == mu) as i64)).collect()).collect();
    Coframe::new(chart, theta, signature.to_vec()).expect("coframe")
}

fn criterion_9() -> Outcome {
    let mut t = Tally::new();
    let mut triples = 0;
    let mut stars = 0;
    for n in 2..=4usize {
        let mut lorentz = vec![-1; n];
        lorentz[0] = 1;
        for sig in [vec![1; n], lorentz] {
            let cf = flat(&sig);
            let all: Vec<Blade> = (0..=n).flat_map(|r| blades(n, r)).collect();
            let basis = |b: Blade| MultiForm::from_terms(&cf, [(b, Expr::one())]);
            for &x in &all {
                for &y in &all {
                    let (x, y) = (basis(x), basis(y));
                    let (l, r) = (x.left_contract(&y)?, x.right_contract(&y)?);
                    for &z in &all {
                        let z = basis(z);
                        triples += 1;
                        t.need(l.scalar_product(&z)? == y.scalar_product(&x.reversion().wedge(&z)?)?, "left adjunction");
                        t.need(r.scalar_product(&z)? == x.scalar_product(&z.wedge(&y.reversion())?)?, "right adjunction");
                    }
                }
            }
            let f = parse("x0^2 + sin(x1)")?;
            for &b in &all {
                let a = MultiForm::from_terms(&cf, [(b, f.clone())]);
                let r = grade(b);
                let sign = if (r * (n - r)) % 2 == 0 { cf.metric_sign() } else { -cf.metric_sign() };
                stars += 1;
                t.need(a.hodge().hodge().simplified() == a.scale_int(sign).simplified(), format!("double star, grade {r}, {sig:?}"));
            }
        }
    }
    t.note(format!("{triples} adjunction triples, {stars} double-star blades"));

    for name in registry_names() {
        let m = model(name);
        let p = m.chart().policy();
        let mut worst: f64 = 0.0;
        for f in random_forms(&m.coframe, 20, 3) {
            let v = (&f.exterior_d() - &f.exterior_d_coordinate()).verdict(&p)?;
            t.need(v.status == Status::Zero, format!("{name}: exterior derivatives agree"));
            worst = worst.max(v.max_abs_residual);
            let dd = f.exterior_d().exterior_d();
            t.need(dd.verdict(&p)?.status == Status::Zero, format!("{name}: d^2 = 0"));
        }
        t.need(worst < 1e-9, format!("{name}: exterior derivatives differ by {worst:.1e}"));
    }
    Ok(t.finish())
}

fn criterion_10() -> Outcome {
    let mut t = Tally::new();
    let opts = CheckOptions::default().with_seed(1234);
    for (name, checks) in [
        ("sphere-unit", vec!["curvature", "torsion", "transport", "holonomy", "quad-torsion"]),
        ("schwarzschild-cartesian", vec!["nonmetricity", "strain", "einstein"]),
        ("conformal-test", vec!["equivalence", "field-equations"]),
    ] {
        let m = model(name);
        let first = emit(&run_checks(&m, &checks, &opts)?, Format::Json);
        let again = emit(&run_checks(&model(name), &checks, &opts)?, Format::Json);
        t.need(first == again, format!("{name}: repeated runs identical"));
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("pool");
        let single = serial.install(|| run_checks(&m, &checks, &opts).map(|r| emit(&r, Format::Json)))?;
        t.need(first == single, format!("{name}: one thread matches the pool"));
        let csv = emit(&run_checks(&m, &checks, &opts)?, Format::CsvSummary);
        t.need(csv == emit(&run_checks(&m, &checks, &opts)?, Format::CsvSummary), format!("{name}: CSV identical"));
        t.note(format!("{name} {} bytes", first.len()));
    }
    Ok(t.finish())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("sphere Levi-Civita geometry", criterion_1),
        ("navigator connection", criterion_2),
        ("nonmetricity and strain", criterion_3),
        ("Schwarzschild vacuum", criterion_4),
        ("teleparallel and Einstein equivalence", criterion_5),
        ("Lagrangian decomposition", criterion_6),
        ("conservation and coderivative squared", criterion_7),
        ("transport suite", criterion_8),
        ("forms algebra", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut unexpected = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (line, ok) = match run() {
            Ok(v) => {
                let status = if v.pass { "PASS" } else { "FAIL" };
                let known = if !v.pass && v.recorded { " [known outcome]" } else { "" };
                (format!("{status}{known} ({}) {}", v.detail, format_args!("{:.1?}", start.elapsed())), v.recorded)
            }
            Err(e) => (format!("FAIL (error: {e})"), false),
        };
        println!("criterion {:>2} {title}: {line}", i + 1);
        if !ok {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria missed their recorded outcome");
        ExitCode::FAILURE
    }
}

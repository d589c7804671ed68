mod common;

use cartanlab::expr::{is_zero, is_zero_all, Binding, Expr, Status, Verdict};
use cartanlab::forms::MultiForm;
use cartanlab::frames::*;
use common::*;

fn assert_zero(v: &Verdict, what: &str) {
    assert_eq!(v.status, Status::Zero, "{what}: residual {:e}", v.max_abs_residual);
}

#[test]
fn sphere_christoffel_symbols() {
    let cf = sphere();
    let p = cf.chart().policy();
    let gamma = Metric::of_coframe(&cf).christoffel();
    // coordinates: 0 = theta, 1 = phi
    assert_zero(&is_zero(&(&gamma[1][0][1] - &e("cot(theta)")), &p).unwrap(), "Γ^φ_θφ");
    assert_zero(&is_zero(&(&gamma[1][1][0] - &e("cot(theta)")), &p).unwrap(), "Γ^φ_φθ");
    assert_zero(&is_zero(&(&gamma[0][1][1] + &e("cos(theta)*sin(theta)")), &p).unwrap(), "Γ^θ_φφ");
    let others = [&gamma[0][0][0], &gamma[0][0][1], &gamma[0][1][0], &gamma[1][0][0], &gamma[1][1][1]];
    assert!(others.iter().all(|g| g.is_zero()));
}

#[test]
fn sphere_levi_civita_frame_coefficients() {
    let cf = sphere();
    let p = cf.chart().policy();
    let lc = Connection::levi_civita(&cf).unwrap();
    // ω^2_{21} = cot and ω^1_{22} = -cot with 1-based frame labels
    assert_zero(&is_zero(&(&lc.frame_coefficient(1, 1, 0).unwrap() - &e("cot(theta)")), &p).unwrap(), "ω^2_21");
    assert_zero(&is_zero(&(&lc.frame_coefficient(0, 1, 1).unwrap() + &e("cot(theta)")), &p).unwrap(), "ω^1_22");
    let w = lc.frame_coefficients().unwrap();
    let nonzero = w.iter().flatten().flatten().filter(|x| !x.is_zero()).count();
    assert_eq!(nonzero, 2);
    assert_zero(&lc.antisymmetry_verdict(&p).unwrap(), "antisymmetry");
    // the frame description reproduces the Christoffel symbols
    let gamma = Metric::of_coframe(&cf).christoffel();
    let ours = lc.christoffel_symbols();
    let res: Vec<Expr> = (0..2)
        .flat_map(|r| (0..2).flat_map(move |m| (0..2).map(move |n| (r, m, n))))
        .map(|(r, m, n)| &ours[r][m][n] - &gamma[r][m][n])
        .collect();
    assert_zero(&is_zero_all(&res, &p).unwrap(), "Γ from ω");
}

#[test]
fn sphere_curvature() {
    let cf = sphere();
    let p = cf.chart().policy();
    let data = cartan_curvature(&Connection::levi_civita(&cf).unwrap()).unwrap();
    assert_zero(&data.torsion_verdict(&p).unwrap(), "torsion");
    let mut nonzero = 0;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    let r = &data.riemann[a][b][c][d];
                    if is_zero(r, &p).unwrap().status == Status::Zero {
                        continue;
                    }
                    nonzero += 1;
                    let plus = is_zero(&(r - &Expr::one()), &p).unwrap().status;
                    let minus = is_zero(&(r + &Expr::one()), &p).unwrap().status;
                    assert!(plus == Status::Zero || minus == Status::Zero, "|R^{a}_{b}{c}{d}| != 1");
                }
            }
        }
    }
    assert_eq!(nonzero, 4);
    assert_zero(&is_zero(&(&data.scalar - &Expr::int(2)), &p).unwrap(), "R = 2");
    assert_zero(&data.ricci_symmetry_verdict(&p).unwrap(), "Ricci symmetry");
}

/// Gaussian curvature of `dθ² + G(θ) dφ²` is `-(√G)''/√G`; by central differences.
#[test]
fn sphere_scalar_against_gauss_formula() {
    let cf = sphere();
    let data = cartan_curvature(&Connection::levi_civita(&cf).unwrap()).unwrap();
    let sqrt_g = |t: f64| t.sin();
    for t in [0.4, 1.0, 1.7, 2.6] {
        let h = 1e-4;
        let second = (sqrt_g(t + h) - 2.0 * sqrt_g(t) + sqrt_g(t - h)) / (h * h);
        let gauss = -second / sqrt_g(t);
        let ours = data.scalar.eval(&Binding::from_pairs(&[("theta", t), ("phi", 1.0)])).unwrap();
        assert!((ours - 2.0 * gauss).abs() < 1e-6, "{ours} vs {}", 2.0 * gauss);
    }
}

fn ricci_oracle_agreement(cf: &std::sync::Arc<cartanlab::forms::Coframe>) -> Verdict {
    let p = cf.chart().policy();
    let data = cartan_curvature(&Connection::levi_civita(cf).unwrap()).unwrap();
    let frame_ricci = frame_to_coordinate(cf, &data.ricci);
    let oracle = CoordinateCurvature::of_metric(&Metric::of_coframe(cf));
    let n = cf.dim();
    let mut res: Vec<Expr> = (0..n).flat_map(|m| (0..n).map(move |k| (m, k))).map(|(m, k)| &frame_ricci[m][k] - &oracle.ricci[m][k]).collect();
    res.push(&data.scalar - &oracle.scalar);
    is_zero_all(&res, &p).unwrap()
}

#[test]
fn frame_ricci_matches_coordinate_oracle() {
    for cf in [sphere(), schwarzschild(), conformal()] {
        let v = ricci_oracle_agreement(&cf);
        assert_zero(&v, cf.chart().name());
        assert!(v.max_abs_residual < 1e-10);
    }
}

#[test]
fn schwarzschild_is_ricci_flat() {
    let cf = schwarzschild();
    let p = cf.chart().policy();
    let data = cartan_curvature(&Connection::levi_civita(&cf).unwrap()).unwrap();
    let v = data.ricci_verdict(&p).unwrap();
    assert_zero(&v, "Ricci");
    assert!(v.max_abs_residual < 1e-8);
    assert_zero(&data.torsion_verdict(&p).unwrap(), "torsion");
    assert!(einstein_3forms(&cf).unwrap().iter().all(|g| g.verdict(&p).unwrap().is_zero()));
    // Cartesian chart, straight from the metric
    let m = Metric::new(cartesian_chart(), cartesian_schwarzschild_metric()).unwrap();
    let cp = m.chart().policy();
    assert_zero(&m.inverse_verdict(&cp).unwrap(), "inverse");
    let oracle = CoordinateCurvature::of_metric(&m);
    let v = is_zero_all(&oracle.ricci.iter().flatten().cloned().collect::<Vec<_>>(), &cp).unwrap();
    assert_zero(&v, "Cartesian Ricci");
    assert!(v.max_abs_residual < 1e-8);
}

#[test]
fn conformal_einstein_forms_match_oracle() {
    let cf = conformal();
    let p = cf.chart().policy();
    let data = cartan_curvature(&Connection::levi_civita(&cf).unwrap()).unwrap();
    let metric = Metric::of_coframe(&cf);
    let oracle = CoordinateCurvature::of_metric(&metric);
    let g_coord = oracle.einstein(&metric);
    // G_ab in the frame: lower G^d_a with η, then push to coordinates
    let mixed = einstein_tensor(&cf, &data);
    let lowered: Vec<Vec<Expr>> = (0..4).map(|d| (0..4).map(|a| mixed[d][a].scaled(cf.eta(d).into())).collect()).collect();
    let ours = frame_to_coordinate(&cf, &lowered);
    let res: Vec<Expr> = (0..4).flat_map(|m| (0..4).map(move |k| (m, k))).map(|(m, k)| &ours[m][k] - &g_coord[m][k]).collect();
    assert_zero(&is_zero_all(&res, &p).unwrap(), "G_μν");
    // and the 3-forms are genuinely nonzero here
    let forms = einstein_3forms(&cf).unwrap();
    assert_eq!(forms[0].verdict(&p).unwrap().status, Status::Nonzero);
    for (d, f) in forms.iter().enumerate() {
        let expected = MultiForm::from_terms(&cf, (0..4).map(|a| (1u8 << a, mixed[d][a].clone()))).hodge();
        assert_eq!(f, &expected);
    }
}

#[test]
fn structure_coefficients_match_coordinate_derivative() {
    for cf in [sphere(), schwarzschild(), conformal(), minkowski()] {
        let p = cf.chart().policy();
        assert_zero(&structure_equation_verdict(&cf, &p).unwrap(), cf.chart().name());
        let c = structure_coefficients(&cf);
        for k in 0..cf.dim() {
            for a in 0..cf.dim() {
                for b in 0..cf.dim() {
                    assert_eq!(c[k][a][b], c[k][b][a].neg());
                }
            }
        }
    }
    assert!(structure_coefficients(&minkowski()).iter().flatten().flatten().all(|x| x.is_zero()));
}

#[test]
fn levi_civita_is_torsion_free_and_compatible() {
    for cf in [sphere(), schwarzschild(), conformal()] {
        let p = cf.chart().policy();
        let lc = Connection::levi_civita(&cf).unwrap();
        assert_zero(&lc.torsion_free(&p).unwrap(), "torsion free");
        assert_zero(&lc.metric_compatible(&Metric::of_coframe(&cf), &p).unwrap(), "compatible");
        let ch = Connection::christoffel(&Metric::of_coframe(&cf));
        assert_zero(&ch.torsion_free(&p).unwrap(), "Christoffel symmetric");
        assert_zero(&ch.metric_compatible(&Metric::of_coframe(&cf), &p).unwrap(), "Dg = 0");
    }
    let lc = Connection::levi_civita(&minkowski()).unwrap();
    assert!(lc.frame_coefficients().unwrap().iter().flatten().flatten().all(|x| x.is_zero()));
}

#[test]
fn nunes_connection_on_sphere() {
    let cf = sphere();
    let p = cf.chart().policy();
    let nunes = Connection::teleparallel(&cf);
    let data = cartan_curvature(&nunes).unwrap();
    assert!(data.curvature_structurally_zero());
    assert_zero(&data.curvature_verdict(&p).unwrap(), "curvature");
    // |T^2_12| = cot θ (1-based labels)
    let t = &data.torsion_components[1][0][1];
    assert_zero(&is_zero(&(t - &e("cot(theta)")), &p).unwrap(), "T^2_12");
    assert_zero(&is_zero(&(&data.torsion_components[1][1][0] + &e("cot(theta)")), &p).unwrap(), "T^2_21");
    assert!(data.torsion_components[0].iter().flatten().all(|x| x.is_zero()));
    assert_zero(&nunes.metric_compatible(&Metric::of_coframe(&cf), &p).unwrap(), "∇g = 0");
    assert_eq!(nunes.torsion_free(&p).unwrap().status, Status::Nonzero);
}

#[test]
fn minkowski_connection_data_vanishes() {
    let cf = minkowski();
    let data = cartan_curvature(&Connection::levi_civita(&cf).unwrap()).unwrap();
    assert!(data.curvature_structurally_zero());
    assert!(data.torsion.iter().all(|t| t.is_structurally_zero()));
    assert!(Metric::of_coframe(&cf).christoffel().iter().flatten().flatten().all(|x| x.is_zero()));
}

#[test]
fn nonmetricity_of_schwarzschild_against_flat_connection() {
    let m = Metric::new(cartesian_chart(), cartesian_schwarzschild_metric()).unwrap();
    let p = m.chart().policy();
    let flat = Connection::flat_coordinate(m.chart());
    let q = nonmetricity(&flat, &m).unwrap();
    let r3 = "(x1^2 + x2^2 + x3^2)^(3/2)";
    assert_zero(&is_zero(&(q.get(1, 0, 0) - &e(&format!("2*m*x1/{r3}"))), &p).unwrap(), "Q_100");
    assert!(q.get(0, 1, 0).is_zero() && q.get(0, 0, 1).is_zero());
    assert_zero(&q.symmetry_verdict(&p).unwrap(), "Q symmetric");
    // the flat connection is not compatible with g, while Christoffel is
    assert_eq!(flat.metric_compatible(&m, &p).unwrap().status, Status::Nonzero);
    // Minkowski metric with the same flat connection: Q = 0
    let eta: Vec<Vec<Expr>> =
        (0..4).map(|a| (0..4).map(|b| Expr::int(if a != b { 0 } else if a == 0 { 1 } else { -1 })).collect()).collect();
    let mink = Metric::new(cartesian_chart(), eta).unwrap();
    assert!(nonmetricity(&flat, &mink).unwrap().flatten().iter().all(|x| x.is_zero()));
}

#[test]
fn strain_relation_in_cartesian_chart() {
    let m = Metric::new(cartesian_chart(), cartesian_schwarzschild_metric()).unwrap();
    let p = m.chart().policy();
    let flat = Connection::flat_coordinate(m.chart());
    let q = nonmetricity(&flat, &m).unwrap();
    let s = strain_tensor(&q, &m);
    let gamma = m.christoffel();
    // with vanishing flat coefficients, S = 2Γ
    let mut res = Vec::new();
    for r in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                res.push(&s[r][a][b] - &gamma[r][a][b].scaled(2.into()));
            }
        }
    }
    assert_zero(&is_zero_all(&res, &p).unwrap(), "S = 2Γ");
    // lowered component g_1ρ Γ^ρ_00 = -m x1 / r^3
    let lowered = lower_first(&gamma, &m);
    let expected = e("-m*x1*(x1^2 + x2^2 + x3^2)^(-3/2)");
    assert_zero(&is_zero(&(&lowered[1][0][0] - &expected), &p).unwrap(), "Γ_1,00");
    // zero nonmetricity gives zero strain
    let lc = Connection::christoffel(&m);
    let s0 = strain_tensor(&nonmetricity(&lc, &m).unwrap(), &m);
    assert_zero(&is_zero_all(&s0.into_iter().flatten().flatten().collect::<Vec<_>>(), &p).unwrap(), "S(Q=0)");
}

#[test]
fn chart_mismatch_is_reported() {
    let m = Metric::of_coframe(&sphere());
    let flat = Connection::flat_coordinate(minkowski().chart());
    assert!(nonmetricity(&flat, &m).is_err());
}

mod common;

use std::f64::consts::{PI, TAU};

use cartanlab::expr::Expr;
use cartanlab::frames::{Connection, Metric};
use cartanlab::transport::{
    default_steps, geodesic, geodesic_transport, holonomy, nunes_transport, parallel_transport,
    quadrilateral_torsion_estimate, Basis, Curve, Integrator, Region,
};
use cartanlab::Error;
use common::{e, minkowski, sphere};

fn sphere_region() -> Region {
    Region::new().bound("theta", 0.05, PI - 0.05).periodic("phi", TAU)
}

/// Oracle for transport around a latitude: frame components rotate
/// at the constant rate `cos θ0` per unit of `φ`.
fn latitude_angle(theta0: f64) -> f64 {
    (-TAU * theta0.cos()).rem_euclid(TAU)
}

fn angle_error(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn wobbly_curve() -> Curve {
    Curve::analytic("s", vec![e("1 + 1/2*sin(s)"), e("s + 3/10*cos(2*s)")], 0.0, 3.0 * TAU)
}

#[test]
fn levi_civita_transport_conserves_norm() {
    let lc = Connection::levi_civita(&sphere()).unwrap();
    let run = parallel_transport(&lc, &wobbly_curve(), &[0.3, -1.2], 10_000, &sphere_region()).unwrap();
    assert_eq!(run.basis, Basis::Frame);
    assert_eq!(run.integrator, Integrator::Rk4);
    assert_eq!(run.s.len(), 10_001);
    assert_eq!(run.points.len(), run.components.len());
    assert!(run.norm_drift().unwrap() < 1e-9, "drift {:e}", run.norm_drift().unwrap());
    // the vector actually moves
    let end = run.final_vector();
    assert!((end[0] - 0.3).abs() + (end[1] + 1.2).abs() > 1e-2);
}

#[test]
fn coordinate_christoffel_transport_conserves_norm() {
    let cf = sphere();
    let metric = Metric::of_coframe(&cf);
    let conn = Connection::christoffel(&metric);
    let run = parallel_transport(&conn, &wobbly_curve(), &[0.3, -1.2], 10_000, &sphere_region()).unwrap();
    assert_eq!(run.basis, Basis::Coordinate);
    assert!(run.norm_drift().unwrap() < 1e-9);
}

#[test]
fn latitude_holonomy_matches_closed_form() {
    let lc = Connection::levi_civita(&sphere()).unwrap();
    for theta0 in [0.3, PI / 3.0, 1.2, PI / 2.0, 2.5] {
        let loop_ = Curve::latitude(theta0);
        let h = holonomy(&lc, &loop_, default_steps(&loop_), &sphere_region()).unwrap();
        let angle = h.angle.unwrap();
        let expected = latitude_angle(theta0);
        assert!(angle_error(angle, expected) < 1e-6, "θ0 = {theta0}: {angle} vs {expected}");
        let closed = (TAU * (1.0 - theta0.cos())).rem_euclid(TAU);
        assert!(angle_error(expected, closed) < 1e-12);
    }
}

#[test]
fn step_halving_is_fourth_order() {
    let lc = Connection::levi_civita(&sphere()).unwrap();
    let theta0 = 1.0;
    let loop_ = Curve::latitude(theta0);
    let err = |steps: usize| {
        let h = holonomy(&lc, &loop_, steps, &sphere_region()).unwrap();
        angle_error(h.angle.unwrap(), latitude_angle(theta0))
    };
    for steps in [12, 24, 48] {
        let (coarse, fine) = (err(steps), err(2 * steps));
        assert!(coarse / fine >= 8.0, "{steps}: {coarse:e} / {fine:e}");
    }
}

#[test]
fn nunes_transport_is_exact() {
    let cf = sphere();
    let nunes = Connection::teleparallel(&cf);
    let v0 = [0.6, -0.8];
    let run = nunes_transport(&nunes, &wobbly_curve(), &v0, 500, &sphere_region()).unwrap();
    assert_eq!(run.integrator, Integrator::Exact);
    assert!(run.components.iter().all(|v| v.as_slice() == v0));
    assert_eq!(run.norm_drift(), Some(0.0));
    // parallel_transport dispatches to the same exact rule
    let same = parallel_transport(&nunes, &wobbly_curve(), &v0, 500, &sphere_region()).unwrap();
    assert_eq!(same.components, run.components);

    for loop_ in [Curve::latitude(0.7), wobbly_curve()] {
        let h = holonomy(&nunes, &loop_, 64, &sphere_region()).unwrap();
        assert_eq!(h.matrix, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(h.identity_deviation, 0.0);
        assert_eq!(h.angle, Some(0.0));
    }
}

#[test]
fn nunes_paths_agree_where_levi_civita_does_not() {
    let cf = sphere();
    let (p, q, r, s) = (vec![0.8, 0.5], vec![1.3, 0.5], vec![1.3, 1.4], vec![0.8, 1.4]);
    let pqr = Curve::polyline(vec![p.clone(), q, r.clone()]).unwrap();
    let psr = Curve::polyline(vec![p, s, r]).unwrap();
    let v0 = [0.0, 1.0];
    let region = sphere_region();

    let nunes = Connection::teleparallel(&cf);
    let a = parallel_transport(&nunes, &pqr, &v0, 400, &region).unwrap();
    let b = parallel_transport(&nunes, &psr, &v0, 400, &region).unwrap();
    assert_eq!(a.final_vector(), b.final_vector());

    let lc = Connection::levi_civita(&cf).unwrap();
    let a = parallel_transport(&lc, &pqr, &v0, 400, &region).unwrap();
    let b = parallel_transport(&lc, &psr, &v0, 400, &region).unwrap();
    let gap: f64 = a.final_vector().iter().zip(b.final_vector()).map(|(x, y)| (x - y).abs()).sum();
    assert!(gap > 1e-2);
    assert!(a.norm_drift().unwrap() < 1e-12 && b.norm_drift().unwrap() < 1e-12);
}

#[test]
fn equator_is_a_geodesic() {
    let lc = Connection::levi_civita(&sphere()).unwrap();
    let curve = geodesic(&lc, &[PI / 2.0, 0.0], &[0.0, 1.0], (0.0, TAU), 2048, &sphere_region()).unwrap();
    for k in 0..=64 {
        let (x, u) = curve.state(TAU * k as f64 / 64.0).unwrap();
        assert!((x[0] - PI / 2.0).abs() < 1e-12);
        assert!((u[1] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn generic_geodesic_is_a_great_circle() {
    let lc = Connection::levi_civita(&sphere()).unwrap();
    let (x0, u0) = ([1.0, 0.4], [0.3, 0.9]);
    let (curve, run) =
        geodesic_transport(&lc, &x0, &u0, Some(&[1.0, 0.0]), (0.0, 4.0), 4096, &sphere_region()).unwrap();
    let run = run.unwrap();
    assert!(run.norm_drift().unwrap() < 1e-10);
    assert!(run.tangent_drift().unwrap() < 1e-10);

    // great circles lie in a plane through the origin: n · X(s) = 0
    let embed = |x: &[f64]| [x[0].sin() * x[1].cos(), x[0].sin() * x[1].sin(), x[0].cos()];
    let (p, _) = curve.state(0.0).unwrap();
    let (q, _) = curve.state(0.1).unwrap();
    let (a, b) = (embed(&p), embed(&q));
    let n = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    for k in 0..=40 {
        let (x, _) = curve.state(4.0 * k as f64 / 40.0).unwrap();
        let y = embed(&x);
        let dot: f64 = (0..3).map(|i| n[i] * y[i]).sum();
        assert!(dot.abs() < 1e-9, "s index {k}: {dot:e}");
    }
}

#[test]
fn minkowski_transport_is_trivial() {
    let cf = minkowski();
    let lc = Connection::levi_civita(&cf).unwrap();
    let region = Region::from_domain(cf.chart().domain());
    let curve = Curve::analytic("s", vec![e("s"), e("sin(s)"), e("s^2/4"), e("cos(s)")], 0.0, 3.0);
    let run = parallel_transport(&lc, &curve, &[1.0, 2.0, -0.5, 0.25], 300, &region).unwrap();
    assert!(run.components.iter().all(|v| v.as_slice() == [1.0, 2.0, -0.5, 0.25]));

    let line = geodesic(&lc, &[0.0, 1.0, 2.0, 3.0], &[1.0, 0.5, -0.25, 0.0], (0.0, 4.0), 64, &region).unwrap();
    let (x, _) = line.state(4.0).unwrap();
    assert_eq!(x, vec![4.0, 3.0, 1.0, 3.0]);

    let h = holonomy(&lc, &Curve::polyline(vec![vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0], vec![1.0, 1.0, 0.0, 0.0], vec![0.0; 4]]).unwrap(), 30, &region)
        .unwrap();
    assert_eq!(h.identity_deviation, 0.0);
}

#[test]
fn quadrilateral_estimate_converges_to_torsion() {
    let cf = sphere();
    let nunes = Connection::teleparallel(&cf);
    let region = sphere_region();
    let theta = PI / 3.0;
    let exact = 1.0 / theta.tan();
    let estimate = |d: f64| quadrilateral_torsion_estimate(&nunes, &[theta, 1.0], (0, d), (1, d), 64, &region).unwrap();

    let mut errors = Vec::new();
    for d in [0.04, 0.02, 0.01, 0.005] {
        let q = estimate(d);
        assert!(q.gap[0].abs() < 1e-15);
        let coord = q.coordinate[1];
        let frame = q.frame.as_ref().unwrap()[1];
        assert!((coord.abs() - frame.abs()).abs() < 1e-12);
        let gap = q.gap_norm.unwrap();
        assert!((gap / (theta.cos() * d * d) - 1.0).abs() < 2.0 * d);
        errors.push((coord.abs() - exact).abs());
    }
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }
    assert!(errors[3] < 0.01);

    let lc = Connection::levi_civita(&cf).unwrap();
    let small = quadrilateral_torsion_estimate(&lc, &[theta, 1.0], (0, 0.01), (1, 0.01), 256, &region).unwrap();
    let large = quadrilateral_torsion_estimate(&lc, &[theta, 1.0], (0, 0.04), (1, 0.04), 256, &region).unwrap();
    let size = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    // no torsion: the estimate is a pure O(Δ) artifact
    let shrink = size(&large.coordinate) / size(&small.coordinate);
    assert!((3.6..=4.4).contains(&shrink), "{shrink}");
    assert!(size(&small.coordinate) < 0.01);
}

#[test]
fn leaving_the_region_is_reported() {
    let lc = Connection::levi_civita(&sphere()).unwrap();
    let meridian = Curve::meridian(0.3, 1.0, 3.1);
    match parallel_transport(&lc, &meridian, &[1.0, 0.0], 200, &sphere_region()) {
        Err(Error::DomainExit { s }) => assert!(s > PI - 0.06 && s < PI - 0.04, "{s}"),
        other => panic!("expected domain exit, got {other:?}"),
    }
    let err = geodesic(&lc, &[1.0, 0.0], &[1.0, 0.0], (0.0, 3.0), 300, &sphere_region()).unwrap_err();
    assert!(matches!(err, Error::DomainExit { .. }));
}

#[test]
fn open_loops_and_bad_inputs_are_rejected() {
    let lc = Connection::levi_civita(&sphere()).unwrap();
    let arc = Curve::analytic("s", vec![Expr::frac(1, 1), e("s")], 0.0, 3.0);
    assert!(matches!(holonomy(&lc, &arc, 100, &sphere_region()), Err(Error::OpenLoop { .. })));
    assert!(matches!(parallel_transport(&lc, &arc, &[1.0], 10, &sphere_region()), Err(Error::Dimension { .. })));
    assert!(geodesic(&lc, &[1.0, 0.0], &[0.0, 1.0], (0.0, 1.0), 8, &sphere_region()).is_err());
    let nunes_on_lc = nunes_transport(&lc, &arc, &[1.0, 0.0], 10, &sphere_region());
    assert!(nunes_on_lc.is_err());
}

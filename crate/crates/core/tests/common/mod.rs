#![allow(dead_code)]

use std::sync::Arc;

use cartanlab::expr::{parse, Expr, SamplingDomain};
use cartanlab::forms::{Chart, Coframe};

pub fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

pub fn coframe(name: &str, coords: &[&str], domain: SamplingDomain, rows: &[&[&str]], signature: &[i64]) -> Arc<Coframe> {
    let chart = Chart::new(name, coords, domain).unwrap();
    let theta = rows.iter().map(|r| r.iter().map(|s| e(s)).collect()).collect();
    Coframe::new(chart, theta, signature.to_vec()).unwrap()
}

pub fn sphere() -> Arc<Coframe> {
    let pi = std::f64::consts::PI;
    coframe(
        "sphere",
        &["theta", "phi"],
        SamplingDomain::new().interval("theta", 0.2, pi - 0.2).interval("phi", 0.2, 2.0 * pi - 0.2),
        &[&["1", "0"], &["0", "sin(theta)"]],
        &[1, 1],
    )
}

pub fn minkowski() -> Arc<Coframe> {
    let mut d = SamplingDomain::new();
    for c in ["t", "x", "y", "z"] {
        d = d.interval(c, -10.0, 10.0);
    }
    coframe(
        "minkowski",
        &["t", "x", "y", "z"],
        d,
        &[&["1", "0", "0", "0"], &["0", "1", "0", "0"], &["0", "0", "1", "0"], &["0", "0", "0", "1"]],
        &[1, -1, -1, -1],
    )
}

pub fn schwarzschild() -> Arc<Coframe> {
    let pi = std::f64::consts::PI;
    let d = SamplingDomain::new()
        .interval("t", -10.0, 10.0)
        .interval("r", 3.0, 10.0)
        .interval("theta", 0.2, pi - 0.2)
        .interval("phi", 0.2, 2.0 * pi - 0.2)
        .fixed("m", 1.0);
    coframe(
        "schwarzschild",
        &["t", "r", "theta", "phi"],
        d,
        &[
            &["(1 - 2*m/r)^(1/2)", "0", "0", "0"],
            &["0", "(1 - 2*m/r)^(-1/2)", "0", "0"],
            &["0", "0", "r", "0"],
            &["0", "0", "0", "r*sin(theta)"],
        ],
        &[1, -1, -1, -1],
    )
}

pub fn conformal() -> Arc<Coframe> {
    let mut d = SamplingDomain::new();
    for c in ["x0", "x1", "x2", "x3"] {
        d = d.interval(c, -2.0, 2.0);
    }
    coframe(
        "conformal",
        &["x0", "x1", "x2", "x3"],
        d,
        &[
            &["2 + sin(x1)", "0", "0", "0"],
            &["0", "2 + sin(x1)", "0", "0"],
            &["0", "0", "2 + sin(x1)", "0"],
            &["0", "0", "0", "2 + sin(x1)"],
        ],
        &[1, -1, -1, -1],
    )
}

/// Cartesian Schwarzschild chart on the shell `3m < r < 10m`.
pub fn cartesian_chart() -> Chart {
    let mut d = SamplingDomain::new().interval("x0", -10.0, 10.0);
    for c in ["x1", "x2", "x3"] {
        d = d.interval(c, -10.0, 10.0);
    }
    let d = d.fixed("m", 1.0).constraint(e("x1^2 + x2^2 + x3^2"), 9.0, 100.0);
    Chart::new("schwarzschild-cartesian", &["x0", "x1", "x2", "x3"], d).unwrap()
}

/// `g00 = 1 - 2m/r`, `g_ij = -[δ_ij + ((1 - 2m/r)^-1 - 1) x_i x_j / r²]`.
pub fn cartesian_schwarzschild_metric() -> Vec<Vec<Expr>> {
    let r2 = "(x1^2 + x2^2 + x3^2)";
    let f = format!("(1 - 2*m*{r2}^(-1/2))");
    let mut g = vec![vec![Expr::zero(); 4]; 4];
    g[0][0] = e(&f);
    for i in 1..4 {
        for j in 1..4 {
            let delta = if i == j { "1" } else { "0" };
            g[i][j] = e(&format!("-({delta} + ({f}^(-1) - 1)*x{i}*x{j}/{r2})"));
        }
    }
    g
}

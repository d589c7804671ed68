use crate::expr::{is_zero_all, Expr, Verdict, ZeroTestPolicy};
use crate::forms::{Chart, Coframe};
use crate::{par, Error, Result};

/// A coordinate metric `g_μν` together with its symbolic inverse.
#[derive(Debug, Clone)]
pub struct Metric {
    chart: Chart,
    g: Vec<Vec<Expr>>,
    inv: Vec<Vec<Expr>>,
}

/// Christoffel symbols `Γ^ρ_μν` indexed `[ρ][μ][ν]`, with `D_{∂μ} ∂ν = Γ^ρ_μν ∂ρ`.
pub type Christoffel = Vec<Vec<Vec<Expr>>>;

impl Metric {
    /// Inverse by adjugate and determinant.
    pub fn new(chart: Chart, g: Vec<Vec<Expr>>) -> Result<Metric> {
        let n = chart.dim();
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, found: g.len() });
        }
        for mu in 0..n {
            for nu in 0..mu {
                if g[mu][nu] != g[nu][mu] {
                    return Err(Error::Chart(format!("metric is not symmetric in ({nu}, {mu})")));
                }
            }
        }
        let det = crate::forms::determinant(&g);
        if det.is_zero() {
            return Err(Error::Singular("metric determinant is identically zero".into()));
        }
        let inv_det = det.recip();
        let all: Vec<usize> = (0..n).collect();
        let inv = par::map_range(n, |mu| {
            (0..n)
                .map(|nu| {
                    // (g^-1)^{μν} = cofactor(ν, μ) / det
                    let rows: Vec<usize> = all.iter().copied().filter(|&r| r != nu).collect();
                    let cols: Vec<usize> = all.iter().copied().filter(|&c| c != mu).collect();
                    let sub: Vec<Vec<Expr>> =
                        rows.iter().map(|&r| cols.iter().map(|&c| g[r][c].clone()).collect()).collect();
                    let sign = if (mu + nu) % 2 == 0 { 1 } else { -1 };
                    (&crate::forms::determinant(&sub) * &inv_det).scaled(sign.into())
                })
                .collect()
        });
        Ok(Metric { chart, g, inv })
    }

    /// Metric induced by a coframe, reusing its frame for the inverse.
    pub fn of_coframe(cf: &Coframe) -> Metric {
        Metric { chart: cf.chart().clone(), g: cf.metric(), inv: cf.inverse_metric() }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn g(&self, mu: usize, nu: usize) -> &Expr {
        &self.g[mu][nu]
    }

    pub fn inv(&self, mu: usize, nu: usize) -> &Expr {
        &self.inv[mu][nu]
    }

    pub fn components(&self) -> &[Vec<Expr>] {
        &self.g
    }

    fn coord(&self, mu: usize) -> &str {
        &self.chart.coords()[mu]
    }

    /// `∂_μ g_αβ` indexed `[μ][α][β]`.
    pub fn derivatives(&self) -> Vec<Vec<Vec<Expr>>> {
        let n = self.dim();
        par::map_range(n, |mu| {
            (0..n).map(|a| (0..n).map(|b| self.g[a][b].diff(self.coord(mu))).collect()).collect()
        })
    }

    /// Levi-Civita coefficients
    /// `Γ^ρ_μν = ½ g^{ρσ}(∂_μ g_νσ + ∂_ν g_μσ - ∂_σ g_μν)`.
    pub fn christoffel(&self) -> Christoffel {
        let n = self.dim();
        let dg = self.derivatives();
        // first kind: Γ_σμν
        let first: Vec<Vec<Vec<Expr>>> = (0..n)
            .map(|s| {
                (0..n)
                    .map(|mu| {
                        (0..n)
                            .map(|nu| {
                                Expr::sum([dg[mu][nu][s].clone(), dg[nu][mu][s].clone(), dg[s][mu][nu].neg()])
                                    .scaled(crate::expr::Rational::new(1, 2))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        par::map_range(n, |rho| {
            (0..n)
                .map(|mu| (0..n).map(|nu| Expr::sum((0..n).map(|s| &self.inv[rho][s] * &first[s][mu][nu]))).collect())
                .collect()
        })
    }

    /// `g^{μρ} g_ρν - δ^μ_ν` vanishes.
    pub fn inverse_verdict(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let n = self.dim();
        let mut res = Vec::new();
        for mu in 0..n {
            for nu in 0..n {
                let prod = Expr::sum((0..n).map(|r| &self.inv[mu][r] * &self.g[r][nu]));
                res.push(prod - Expr::int((mu == nu) as i64));
            }
        }
        Ok(is_zero_all(&res, policy)?)
    }
}

/// Riemann, Ricci and scalar curvature from coordinate Christoffels; the
/// independent oracle for the frame computation.
#[derive(Debug, Clone)]
pub struct CoordinateCurvature {
    pub christoffel: Christoffel,
    /// `R^ρ_σμν` indexed `[ρ][σ][μ][ν]`.
    pub riemann: Vec<Vec<Vec<Vec<Expr>>>>,
    /// `R_σν = R^ρ_σρν`
    pub ricci: Vec<Vec<Expr>>,
    pub scalar: Expr,
}

impl CoordinateCurvature {
    pub fn of_metric(metric: &Metric) -> CoordinateCurvature {
        let n = metric.dim();
        let gamma = metric.christoffel();
        let coords = metric.chart().coords().to_vec();
        let dgamma: Vec<Vec<Vec<Vec<Expr>>>> = par::map_range(n, |rho| {
            (0..n)
                .map(|mu| (0..n).map(|nu| (0..n).map(|d| gamma[rho][mu][nu].diff(&coords[d])).collect()).collect())
                .collect()
        });
        let riemann: Vec<Vec<Vec<Vec<Expr>>>> = par::map_range(n, |rho| {
            (0..n)
                .map(|s| {
                    (0..n)
                        .map(|mu| {
                            (0..n)
                                .map(|nu| {
                                    if mu == nu {
                                        return Expr::zero();
                                    }
                                    let mut t = vec![dgamma[rho][nu][s][mu].clone(), dgamma[rho][mu][s][nu].neg()];
                                    for l in 0..n {
                                        t.push(&gamma[rho][mu][l] * &gamma[l][nu][s]);
                                        t.push((&gamma[rho][nu][l] * &gamma[l][mu][s]).neg());
                                    }
                                    Expr::sum(t)
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        });
        let ricci: Vec<Vec<Expr>> = (0..n)
            .map(|s| (0..n).map(|nu| Expr::sum((0..n).map(|rho| riemann[rho][s][rho][nu].clone()))).collect())
            .collect();
        let scalar = Expr::sum((0..n).flat_map(|s| (0..n).map(move |nu| (s, nu))).map(|(s, nu)| metric.inv(s, nu) * &ricci[s][nu]));
        CoordinateCurvature { christoffel: gamma, riemann, ricci, scalar }
    }

    /// Einstein tensor `G_μν = R_μν - ½ R g_μν`.
    pub fn einstein(&self, metric: &Metric) -> Vec<Vec<Expr>> {
        let n = metric.dim();
        let half_r = self.scalar.scaled(crate::expr::Rational::new(1, 2));
        (0..n).map(|mu| (0..n).map(|nu| &self.ricci[mu][nu] - &(&half_r * metric.g(mu, nu))).collect()).collect()
    }
}

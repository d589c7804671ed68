//! Connections and the geometry they induce: structure coefficients,
//! torsion and curvature 2-forms, Ricci and Einstein data, Christoffel
//! symbols, nonmetricity and strain.
//!
//! Index conventions: frame indices are raised and lowered with `η`,
//! coordinate indices with `g`. Curvature components follow
//! `R^a_b = ½ R^a_{b cd} θ^c ∧ θ^d`, torsion `Θ^a = ½ T^a_{bc} θ^b ∧ θ^c`, and
//! the Ricci tensor contracts the upper index with the first form index,
//! `R_bd = R^a_{b ad}`, so the unit sphere has scalar curvature `+2`.

mod connection;
mod metric;

use std::sync::Arc;

pub use connection::{Connection, ConnectionKind};
pub use metric::{Christoffel, CoordinateCurvature, Metric};

use crate::expr::{is_zero_all, Expr, Rational, Verdict, ZeroTestPolicy};
use crate::forms::{Coframe, MultiForm};
use crate::{par, Error, Result};

/// Structure coefficients `c^k_ab` of `[e_a, e_b] = c^k_ab e_k`, `[k][a][b]`.
pub fn structure_coefficients(cf: &Coframe) -> Vec<Vec<Vec<Expr>>> {
    cf.structure_coefficients().clone()
}

/// `dθ^a + ½ c^a_kl θ^k ∧ θ^l` vanishes, with `dθ^a` taken through
/// coordinate components so the two sides are computed independently.
pub fn structure_equation_verdict(cf: &Arc<Coframe>, policy: &ZeroTestPolicy) -> Result<Verdict> {
    let n = cf.dim();
    let c = cf.structure_coefficients();
    let mut res = Vec::new();
    for a in 0..n {
        let d = MultiForm::theta(cf, a).exterior_d_coordinate();
        for k in 0..n {
            for l in k + 1..n {
                res.push(&d.component((1 << k) | (1 << l)) + &c[a][k][l]);
            }
        }
    }
    Ok(is_zero_all(&res, policy)?)
}

/// Torsion and curvature of a frame connection.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub kind: ConnectionKind,
    /// `Θ^a = dθ^a + ω^a_b ∧ θ^b`
    pub torsion: Vec<MultiForm>,
    /// `R^a_b = dω^a_b + ω^a_c ∧ ω^c_b`, indexed `[a][b]`.
    pub curvature: Vec<Vec<MultiForm>>,
    /// `T^a_{bc}` indexed `[a][b][c]`.
    pub torsion_components: Vec<Vec<Vec<Expr>>>,
    /// `R^a_{b cd}` indexed `[a][b][c][d]`.
    pub riemann: Vec<Vec<Vec<Vec<Expr>>>>,
    /// `R_bd = R^a_{b ad}`
    pub ricci: Vec<Vec<Expr>>,
    pub scalar: Expr,
}

/// Cartan structure equations for a connection with a frame description.
pub fn cartan_curvature(conn: &Connection) -> Result<CurvatureData> {
    let cf = conn.coframe().ok_or_else(|| Error::Chart("curvature needs a frame connection".into()))?.clone();
    let n = cf.dim();
    let omega: Vec<Vec<MultiForm>> = (0..n).map(|a| (0..n).map(|b| conn.omega(a, b).cloned()).collect::<Result<_>>()).collect::<Result<_>>()?;
    let torsion: Vec<MultiForm> = par::map_range(n, |a| {
        let mut t = MultiForm::theta(&cf, a).exterior_d();
        for (b, w) in omega[a].iter().enumerate() {
            if !w.is_structurally_zero() {
                t = &t + &w.wedge(&MultiForm::theta(&cf, b)).expect("same coframe");
            }
        }
        t
    });
    let flat: Vec<MultiForm> = par::map_range(n * n, |ab| {
        let (a, b) = (ab / n, ab % n);
        let mut r = omega[a][b].exterior_d();
        for c in 0..n {
            if !omega[a][c].is_structurally_zero() && !omega[c][b].is_structurally_zero() {
                r = &r + &omega[a][c].wedge(&omega[c][b]).expect("same coframe");
            }
        }
        r
    });
    let curvature: Vec<Vec<MultiForm>> = flat.chunks(n).map(|row| row.to_vec()).collect();
    let pair = |form: &MultiForm, c: usize, d: usize| -> Expr {
        match c.cmp(&d) {
            std::cmp::Ordering::Less => form.component((1 << c) | (1 << d)),
            std::cmp::Ordering::Greater => form.component((1 << c) | (1 << d)).neg(),
            std::cmp::Ordering::Equal => Expr::zero(),
        }
    };
    let torsion_components =
        (0..n).map(|a| (0..n).map(|b| (0..n).map(|c| pair(&torsion[a], b, c)).collect()).collect()).collect();
    let riemann: Vec<Vec<Vec<Vec<Expr>>>> = (0..n)
        .map(|a| (0..n).map(|b| (0..n).map(|c| (0..n).map(|d| pair(&curvature[a][b], c, d)).collect()).collect()).collect())
        .collect();
    let ricci: Vec<Vec<Expr>> =
        (0..n).map(|b| (0..n).map(|d| Expr::sum((0..n).map(|a| riemann[a][b][a][d].clone()))).collect()).collect();
    let scalar = Expr::sum((0..n).map(|a| ricci[a][a].scaled(cf.eta(a).into())));
    Ok(CurvatureData { kind: conn.kind(), torsion, curvature, torsion_components, riemann, ricci, scalar })
}

impl CurvatureData {
    pub fn torsion_verdict(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let comps: Vec<Expr> = self.torsion.iter().flat_map(|t| t.terms().values().cloned()).collect();
        Ok(is_zero_all(&comps, policy)?)
    }

    pub fn curvature_verdict(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let comps: Vec<Expr> =
            self.curvature.iter().flatten().flat_map(|r| r.terms().values().cloned()).collect();
        Ok(is_zero_all(&comps, policy)?)
    }

    pub fn curvature_structurally_zero(&self) -> bool {
        self.curvature.iter().flatten().all(|r| r.is_structurally_zero())
    }

    /// `R_bd - R_db` vanishes.
    pub fn ricci_symmetry_verdict(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let n = self.ricci.len();
        let res: Vec<Expr> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .map(|(a, b)| &self.ricci[a][b] - &self.ricci[b][a])
            .collect();
        Ok(is_zero_all(&res, policy)?)
    }

    /// `R_bd = 0` for every pair.
    pub fn ricci_verdict(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        Ok(is_zero_all(&self.ricci.iter().flatten().cloned().collect::<Vec<_>>(), policy)?)
    }
}

/// Frame tensor `X_ab` to coordinate components `θ^a_μ θ^b_ν X_ab`.
pub fn frame_to_coordinate(cf: &Coframe, x: &[Vec<Expr>]) -> Vec<Vec<Expr>> {
    let n = cf.dim();
    (0..n)
        .map(|mu| {
            (0..n)
                .map(|nu| {
                    Expr::sum((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|(a, b)| !x[*a][*b].is_zero()).map(
                        |(a, b)| Expr::product([cf.theta(a, mu).clone(), cf.theta(b, nu).clone(), x[a][b].clone()]),
                    ))
                })
                .collect()
        })
        .collect()
}

/// Einstein 3-forms `★G^d = ★(R^d - ½ R θ^d)` with Ricci 1-forms `R^d = R^d_a θ^a`.
pub fn einstein_3forms(cf: &Arc<Coframe>) -> Result<Vec<MultiForm>> {
    if cf.dim() != 4 {
        return Err(Error::Dimension { expected: 4, found: cf.dim() });
    }
    let data = cartan_curvature(&Connection::levi_civita(cf)?)?;
    einstein_3forms_from(cf, &data)
}

pub fn einstein_3forms_from(cf: &Arc<Coframe>, data: &CurvatureData) -> Result<Vec<MultiForm>> {
    if cf.dim() != 4 {
        return Err(Error::Dimension { expected: 4, found: cf.dim() });
    }
    let n = cf.dim();
    let g = einstein_tensor(cf, data);
    Ok((0..n).map(|d| MultiForm::from_terms(cf, (0..n).map(|a| (1u8 << a, g[d][a].clone()))).hodge()).collect())
}

/// Mixed Einstein tensor `G^d_a = R^d_a - ½ R δ^d_a` with `R^d_a = η^dd R_da`.
pub fn einstein_tensor(cf: &Coframe, data: &CurvatureData) -> Vec<Vec<Expr>> {
    let n = cf.dim();
    let half_r = data.scalar.scaled(Rational::new(1, 2));
    (0..n)
        .map(|d| {
            (0..n)
                .map(|a| {
                    let r = data.ricci[d][a].scaled(cf.eta(d).into());
                    if a == d {
                        &r - &half_r
                    } else {
                        r
                    }
                })
                .collect()
        })
        .collect()
}

/// Nonmetricity `Q_μαβ = (D_μ g)_αβ` indexed `[μ][α][β]`.
#[derive(Debug, Clone)]
pub struct NonmetricityData {
    pub q: Vec<Vec<Vec<Expr>>>,
}

impl NonmetricityData {
    pub fn get(&self, mu: usize, a: usize, b: usize) -> &Expr {
        &self.q[mu][a][b]
    }

    pub fn flatten(&self) -> Vec<Expr> {
        self.q.iter().flatten().flatten().cloned().collect()
    }

    /// `Q_μαβ - Q_μβα` vanishes.
    pub fn symmetry_verdict(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let n = self.q.len();
        let mut res = Vec::new();
        for mu in 0..n {
            for a in 0..n {
                for b in a + 1..n {
                    res.push(&self.q[mu][a][b] - &self.q[mu][b][a]);
                }
            }
        }
        Ok(is_zero_all(&res, policy)?)
    }
}

/// `Q_μαβ = ∂_μ g_αβ - Γ^λ_μα g_λβ - Γ^λ_μβ g_αλ` for the connection's
/// coordinate coefficients.
pub fn nonmetricity(conn: &Connection, metric: &Metric) -> Result<NonmetricityData> {
    if conn.chart().coords() != metric.chart().coords() {
        return Err(Error::Chart(format!(
            "connection chart `{}` differs from metric chart `{}`",
            conn.chart().name(),
            metric.chart().name()
        )));
    }
    let n = metric.dim();
    let gamma = conn.christoffel_symbols();
    let dg = metric.derivatives();
    let q = par::map_range(n, |mu| {
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        let mut t = vec![dg[mu][a][b].clone()];
                        for l in 0..n {
                            if !gamma[l][mu][a].is_zero() {
                                t.push((&gamma[l][mu][a] * metric.g(l, b)).neg());
                            }
                            if !gamma[l][mu][b].is_zero() {
                                t.push((&gamma[l][mu][b] * metric.g(a, l)).neg());
                            }
                        }
                        Expr::sum(t)
                    })
                    .collect()
            })
            .collect()
    });
    Ok(NonmetricityData { q })
}

/// Strain `S^ρ_αβ = g^{ρσ}(Q_αβσ + Q_βσα - Q_σαβ)` indexed `[ρ][α][β]`.
pub fn strain_tensor(q: &NonmetricityData, metric: &Metric) -> Vec<Vec<Vec<Expr>>> {
    let n = metric.dim();
    let lower: Vec<Vec<Vec<Expr>>> = (0..n)
        .map(|s| {
            (0..n)
                .map(|a| (0..n).map(|b| Expr::sum([q.q[a][b][s].clone(), q.q[b][s][a].clone(), q.q[s][a][b].neg()])).collect())
                .collect()
        })
        .collect();
    par::map_range(n, |rho| {
        (0..n)
            .map(|a| (0..n).map(|b| Expr::sum((0..n).map(|s| metric.inv(rho, s) * &lower[s][a][b]))).collect())
            .collect()
    })
}

/// Lower the first index of a `[ρ][α][β]` table with `g`.
pub fn lower_first(t: &[Vec<Vec<Expr>>], metric: &Metric) -> Vec<Vec<Vec<Expr>>> {
    let n = metric.dim();
    (0..n)
        .map(|s| (0..n).map(|a| (0..n).map(|b| Expr::sum((0..n).map(|r| metric.g(s, r) * &t[r][a][b]))).collect()).collect())
        .collect()
}

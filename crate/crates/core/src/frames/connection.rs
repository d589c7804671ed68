use std::sync::Arc;

use crate::expr::{is_zero_all, Expr, Rational, Verdict, ZeroTestPolicy};
use crate::forms::{Chart, Coframe, MultiForm, Side};
use crate::{par, Error, Result};

use super::metric::{Christoffel, Metric};
use super::nonmetricity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionKind {
    /// Torsion-free and metric compatible with the coframe's metric.
    LeviCivita,
    /// Declares the coframe parallel: every `ω^a_b` vanishes.
    Teleparallel,
    /// Arbitrary frame coefficients `ω^a_{kb}`.
    Frame,
    /// Arbitrary coordinate coefficients `Γ^ρ_μν`.
    Coordinate,
}

/// A linear connection, described in the frame basis when a coframe is
/// attached and always by its coordinate coefficients.
///
/// Frame coefficients follow `D_{e_k} e_b = ω^a_{kb} e_a`, so the connection
/// 1-forms are `ω^a_b = ω^a_{kb} θ^k`.
#[derive(Debug, Clone)]
pub struct Connection {
    kind: ConnectionKind,
    chart: Chart,
    coframe: Option<Arc<Coframe>>,
    omega: Option<Vec<Vec<MultiForm>>>,
    gamma: Christoffel,
    metric: Option<Metric>,
}

impl Connection {
    /// Levi-Civita connection 1-forms
    /// `ω^{cd} = ½[θ^d ⌟ dθ^c - θ^c ⌟ dθ^d + θ^c ⌟ (θ^d ⌟ dθ_a) θ^a]`.
    pub fn levi_civita(cf: &Arc<Coframe>) -> Result<Connection> {
        let n = cf.dim();
        let dtheta: Vec<MultiForm> = par::map_range(n, |a| MultiForm::theta(cf, a).exterior_d());
        let dtheta_lower: Vec<MultiForm> = (0..n).map(|a| dtheta[a].scale_int(cf.eta(a))).collect();
        let theta: Vec<MultiForm> = (0..n).map(|a| MultiForm::theta(cf, a)).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|c| (0..n).map(move |d| (c, d))).collect();
        let upper = par::map(&pairs, |&(c, d)| -> Result<MultiForm> {
            if c == d {
                return Ok(MultiForm::zero(cf));
            }
            let mut acc = theta[d].contract(&dtheta[c], Side::Left)?;
            acc = &acc - &theta[c].contract(&dtheta[d], Side::Left)?;
            for a in 0..n {
                let inner = theta[d].left_contract(&dtheta_lower[a])?;
                let coef = theta[c].left_contract(&inner)?;
                acc = &acc + &coef.wedge(&theta[a])?;
            }
            Ok(acc.scale(&Expr::rational(Rational::new(1, 2))))
        });
        let mut omega = vec![vec![MultiForm::zero(cf); n]; n];
        for (&(c, d), w) in pairs.iter().zip(upper) {
            // ω^c_d = ω^{ce} η_ed
            omega[c][d] = w?.scale_int(cf.eta(d));
        }
        Ok(Connection::from_forms(ConnectionKind::LeviCivita, cf, omega))
    }

    /// The teleparallel connection of a coframe: `ω^a_b = 0`.
    pub fn teleparallel(cf: &Arc<Coframe>) -> Connection {
        let n = cf.dim();
        Connection::from_forms(ConnectionKind::Teleparallel, cf, vec![vec![MultiForm::zero(cf); n]; n])
    }

    /// Connection from frame coefficients `ω^a_{kb}` indexed `[a][k][b]`.
    pub fn from_frame_coefficients(cf: &Arc<Coframe>, coeffs: &[Vec<Vec<Expr>>]) -> Connection {
        let n = cf.dim();
        let omega = (0..n)
            .map(|a| {
                (0..n).map(|b| MultiForm::from_terms(cf, (0..n).map(|k| (1u8 << k, coeffs[a][k][b].clone())))).collect()
            })
            .collect();
        Connection::from_forms(ConnectionKind::Frame, cf, omega)
    }

    /// Connection given by coordinate coefficients `Γ^ρ_μν` (`[ρ][μ][ν]`).
    pub fn coordinate(chart: &Chart, gamma: Christoffel) -> Result<Connection> {
        let n = chart.dim();
        if gamma.len() != n || gamma.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
            return Err(Error::Dimension { expected: n, found: gamma.len() });
        }
        Ok(Connection { kind: ConnectionKind::Coordinate, chart: chart.clone(), coframe: None, omega: None, gamma, metric: None })
    }

    /// Levi-Civita connection of a coordinate metric, as Christoffel symbols.
    pub fn christoffel(metric: &Metric) -> Connection {
        Connection {
            kind: ConnectionKind::Coordinate,
            chart: metric.chart().clone(),
            coframe: None,
            omega: None,
            gamma: metric.christoffel(),
            metric: Some(metric.clone()),
        }
    }

    /// Connection whose coefficients vanish in the chart basis.
    pub fn flat_coordinate(chart: &Chart) -> Connection {
        let n = chart.dim();
        Connection {
            kind: ConnectionKind::Coordinate,
            chart: chart.clone(),
            coframe: None,
            omega: None,
            gamma: vec![vec![vec![Expr::zero(); n]; n]; n],
            metric: None,
        }
    }

    fn from_forms(kind: ConnectionKind, cf: &Arc<Coframe>, omega: Vec<Vec<MultiForm>>) -> Connection {
        let gamma = coordinate_coefficients(cf, &omega);
        Connection {
            kind,
            chart: cf.chart().clone(),
            coframe: Some(cf.clone()),
            omega: Some(omega),
            gamma,
            metric: Some(Metric::of_coframe(cf)),
        }
    }

    pub fn kind(&self) -> ConnectionKind {
        self.kind
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coframe(&self) -> Option<&Arc<Coframe>> {
        self.coframe.as_ref()
    }

    /// Metric the connection was built from, if any.
    pub fn metric(&self) -> Option<&Metric> {
        self.metric.as_ref()
    }

    fn require_frame(&self) -> Result<(&Arc<Coframe>, &Vec<Vec<MultiForm>>)> {
        match (&self.coframe, &self.omega) {
            (Some(cf), Some(w)) => Ok((cf, w)),
            _ => Err(Error::Chart("connection has no frame description".into())),
        }
    }

    /// Connection 1-form `ω^a_b`.
    pub fn omega(&self, a: usize, b: usize) -> Result<&MultiForm> {
        Ok(&self.require_frame()?.1[a][b])
    }

    /// `ω^a_{kb}`, the `θ^k` component of `ω^a_b`.
    pub fn frame_coefficient(&self, a: usize, k: usize, b: usize) -> Result<Expr> {
        Ok(self.omega(a, b)?.component(1 << k))
    }

    /// All `ω^a_{kb}` indexed `[a][k][b]`.
    pub fn frame_coefficients(&self) -> Result<Vec<Vec<Vec<Expr>>>> {
        let (cf, w) = self.require_frame()?;
        let n = cf.dim();
        Ok((0..n).map(|a| (0..n).map(|k| (0..n).map(|b| w[a][b].component(1 << k)).collect()).collect()).collect())
    }

    /// `Γ^ρ_μν` indexed `[ρ][μ][ν]`.
    pub fn christoffel_symbols(&self) -> &Christoffel {
        &self.gamma
    }

    /// Torsion `Γ^ρ_μν - Γ^ρ_νμ` vanishes.
    pub fn torsion_free(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let n = self.chart.dim();
        let mut res = Vec::new();
        for rho in 0..n {
            for mu in 0..n {
                for nu in mu + 1..n {
                    res.push(&self.gamma[rho][mu][nu] - &self.gamma[rho][nu][mu]);
                }
            }
        }
        Ok(is_zero_all(&res, policy)?)
    }

    /// `Dg = 0` for the given metric.
    pub fn metric_compatible(&self, metric: &Metric, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let q = nonmetricity(self, metric)?;
        Ok(is_zero_all(&q.flatten(), policy)?)
    }

    /// `ω^{ab} + ω^{ba}` vanishes, i.e. the frame is orthonormal-compatible.
    pub fn antisymmetry_verdict(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let (cf, w) = self.require_frame()?;
        let n = cf.dim();
        let mut res = Vec::new();
        for a in 0..n {
            for b in a..n {
                // ω^{ab} = ω^a_c η^{cb}
                let sym = &w[a][b].scale_int(cf.eta(b)) + &w[b][a].scale_int(cf.eta(a));
                res.extend(sym.terms().values().cloned());
            }
        }
        Ok(is_zero_all(&res, policy)?)
    }
}

/// `Γ^ρ_μν = e_a^ρ (∂_μ θ^a_ν + ω^a_{kb} θ^k_μ θ^b_ν)`.
fn coordinate_coefficients(cf: &Arc<Coframe>, omega: &[Vec<MultiForm>]) -> Christoffel {
    let n = cf.dim();
    let coords = cf.chart().coords().to_vec();
    // ω^a_b(∂_μ) = ω^a_{kb} θ^k_μ
    let along: Vec<Vec<Vec<Expr>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    (0..n)
                        .map(|mu| Expr::sum((0..n).map(|k| &omega[a][b].component(1 << k) * cf.theta(k, mu))))
                        .collect()
                })
                .collect()
        })
        .collect();
    // Σ_a e_a^ρ (…)^a_μν
    let inner: Vec<Vec<Vec<Expr>>> = par::map_range(n, |a| {
        (0..n)
            .map(|mu| {
                (0..n)
                    .map(|nu| {
                        let mut t = vec![cf.theta(a, nu).diff(&coords[mu])];
                        for b in 0..n {
                            if !along[a][b][mu].is_zero() {
                                t.push(&along[a][b][mu] * cf.theta(b, nu));
                            }
                        }
                        Expr::sum(t)
                    })
                    .collect()
            })
            .collect()
    });
    (0..n)
        .map(|rho| {
            (0..n)
                .map(|mu| (0..n).map(|nu| Expr::sum((0..n).map(|a| cf.frame(a, rho) * &inner[a][mu][nu]))).collect())
                .collect()
        })
        .collect()
}

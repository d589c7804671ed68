use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::expr::{Binding, Compiled, Expr, SamplingDomain, ZeroTestPolicy};
use crate::{par, Error, Result};

use super::{blades, indices, Blade};

/// Coordinate chart with its sampling box.
///
/// The domain carries one interval per coordinate, fixed parameter values
/// (for example `m = 1`) and any extra constraints that cut out excluded
/// surfaces.
#[derive(Debug, Clone)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    domain: SamplingDomain,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], domain: SamplingDomain) -> Result<Chart> {
        let n = coords.len();
        if !(2..=4).contains(&n) {
            return Err(Error::Chart(format!("dimension {n} outside 2..=4")));
        }
        for (i, c) in coords.iter().enumerate() {
            if coords[..i].contains(c) {
                return Err(Error::Chart(format!("coordinate `{c}` repeated")));
            }
            match domain.intervals.iter().find(|(s, _, _)| s == c) {
                Some((_, lo, hi)) if lo < hi => {}
                Some((_, lo, hi)) => return Err(Error::Chart(format!("empty interval ({lo}, {hi}) for `{c}`"))),
                None => return Err(Error::Chart(format!("no interval for coordinate `{c}`"))),
            }
        }
        Ok(Chart { name: name.to_string(), coords: coords.iter().map(|s| s.to_string()).collect(), domain })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord(&self, mu: usize) -> Expr {
        Expr::symbol(&self.coords[mu])
    }

    pub fn domain(&self) -> &SamplingDomain {
        &self.domain
    }

    /// Default zero-test policy over this chart's domain.
    pub fn policy(&self) -> ZeroTestPolicy {
        ZeroTestPolicy::new(self.domain.clone())
    }
}

/// An orthonormal coframe `θ^a = θ^a_μ dx^μ` with metric `g = η_ab θ^a ⊗ θ^b`.
///
/// The inverse frame `e_a = e_a^μ ∂_μ` is computed symbolically from the
/// adjugate. Structure coefficients and minors are computed on first use.
pub struct Coframe {
    chart: Chart,
    theta: Vec<Vec<Expr>>,
    signature: Vec<i64>,
    det: Expr,
    frame: Vec<Vec<Expr>>,
    structure: OnceLock<Vec<Vec<Vec<Expr>>>>,
    theta_minors: OnceLock<HashMap<(Blade, Blade), Expr>>,
    frame_minors: OnceLock<HashMap<(Blade, Blade), Expr>>,
}

impl std::fmt::Debug for Coframe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Coframe")
            .field("chart", &self.chart.name)
            .field("signature", &self.signature)
            .field("theta", &self.theta)
            .finish()
    }
}

/// Determinant by permutation expansion; fine for n ≤ 4.
pub fn determinant(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 0 {
        return Expr::one();
    }
    let mut terms = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, 1, &mut |p, sign| {
        let factors: Vec<Expr> = (0..n).map(|i| m[i][p[i]].clone()).collect();
        if factors.iter().all(|f| !f.is_zero()) {
            terms.push(Expr::product(factors).scaled(sign.into()));
        }
    });
    Expr::sum(terms)
}

fn permute(p: &mut Vec<usize>, k: usize, sign: i64, visit: &mut impl FnMut(&[usize], i64)) {
    if k == p.len() {
        visit(p, sign);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, if i == k { sign } else { -sign }, visit);
        p.swap(k, i);
    }
}

fn submatrix(m: &[Vec<Expr>], rows: &[usize], cols: &[usize]) -> Vec<Vec<Expr>> {
    rows.iter().map(|&r| cols.iter().map(|&c| m[r][c].clone()).collect()).collect()
}

impl Coframe {
    /// Build a coframe from `θ^a_μ` (row `a`, column `μ`) and a diagonal
    /// signature. Fails if the determinant vanishes at every probe point.
    pub fn new(chart: Chart, theta: Vec<Vec<Expr>>, signature: Vec<i64>) -> Result<Arc<Coframe>> {
        let n = chart.dim();
        if theta.len() != n || theta.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension { expected: n, found: theta.len() });
        }
        if signature.len() != n || signature.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Chart(format!("signature {signature:?} is not a ±1 vector of length {n}")));
        }
        let det = determinant(&theta);
        if det.is_zero() {
            return Err(Error::Singular("determinant is identically zero".into()));
        }
        let all: Vec<usize> = (0..n).collect();
        let inv_det = det.recip();
        // e_a^μ = cofactor(a, μ) / det
        let frame: Vec<Vec<Expr>> = par::map_range(n, |a| {
            (0..n)
                .map(|mu| {
                    let rows: Vec<usize> = all.iter().copied().filter(|&r| r != a).collect();
                    let cols: Vec<usize> = all.iter().copied().filter(|&c| c != mu).collect();
                    let minor = determinant(&submatrix(&theta, &rows, &cols));
                    let sign = if (a + mu) % 2 == 0 { 1 } else { -1 };
                    (&minor * &inv_det).scaled(sign.into())
                })
                .collect()
        });
        let cf = Coframe {
            chart,
            theta,
            signature,
            det,
            frame,
            structure: OnceLock::new(),
            theta_minors: OnceLock::new(),
            frame_minors: OnceLock::new(),
        };
        cf.probe_invertible(5)?;
        Ok(Arc::new(cf))
    }

    fn probe_invertible(&self, probes: usize) -> Result<()> {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(ZeroTestPolicy::DEFAULT_SEED);
        let points = self.chart.domain.candidates(probes, &mut rng)?;
        let det = Compiled::new(std::slice::from_ref(&self.det));
        for b in &points {
            match det.eval_one(b) {
                Ok(v) if v.abs() > 1e-12 => {}
                Ok(v) => return Err(Error::Singular(format!("det = {v:e} at {}", describe(b)))),
                Err(e) => return Err(Error::Singular(format!("det undefined at {}: {e}", describe(b)))),
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// `θ^a_μ`
    pub fn theta(&self, a: usize, mu: usize) -> &Expr {
        &self.theta[a][mu]
    }

    pub fn theta_matrix(&self) -> &[Vec<Expr>] {
        &self.theta
    }

    /// `e_a^μ`
    pub fn frame(&self, a: usize, mu: usize) -> &Expr {
        &self.frame[a][mu]
    }

    pub fn determinant(&self) -> &Expr {
        &self.det
    }

    pub fn signature(&self) -> &[i64] {
        &self.signature
    }

    /// `η_aa` (equal to `η^aa` for a diagonal ±1 signature).
    pub fn eta(&self, a: usize) -> i64 {
        self.signature[a]
    }

    /// Product of `η` over the indices of a blade.
    pub fn eta_blade(&self, b: Blade) -> i64 {
        indices(b).iter().map(|&a| self.signature[a]).product()
    }

    /// Sign of the metric determinant.
    pub fn metric_sign(&self) -> i64 {
        self.signature.iter().product()
    }

    pub fn top_blade(&self) -> Blade {
        ((1u16 << self.dim()) - 1) as Blade
    }

    /// `g_μν = η_ab θ^a_μ θ^b_ν`
    pub fn metric(&self) -> Vec<Vec<Expr>> {
        let n = self.dim();
        (0..n)
            .map(|mu| {
                (0..n)
                    .map(|nu| {
                        Expr::sum((0..n).map(|a| (&self.theta[a][mu] * &self.theta[a][nu]).scaled(self.eta(a).into())))
                    })
                    .collect()
            })
            .collect()
    }

    /// `g^μν = η^ab e_a^μ e_b^ν`
    pub fn inverse_metric(&self) -> Vec<Vec<Expr>> {
        let n = self.dim();
        (0..n)
            .map(|mu| {
                (0..n)
                    .map(|nu| {
                        Expr::sum((0..n).map(|a| (&self.frame[a][mu] * &self.frame[a][nu]).scaled(self.eta(a).into())))
                    })
                    .collect()
            })
            .collect()
    }

    /// Directional derivative `e_a(f) = e_a^μ ∂_μ f`.
    pub fn directional(&self, a: usize, f: &Expr) -> Expr {
        Expr::sum(
            (0..self.dim())
                .filter(|&mu| !self.frame[a][mu].is_zero())
                .map(|mu| &self.frame[a][mu] * &f.diff(&self.chart.coords[mu])),
        )
    }

    /// Structure coefficients `c^k_ab` defined by `[e_a, e_b] = c^k_ab e_k`,
    /// indexed `[k][a][b]`.
    pub fn structure_coefficients(&self) -> &Vec<Vec<Vec<Expr>>> {
        self.structure.get_or_init(|| {
            let n = self.dim();
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let brackets = par::map(&pairs, |&(a, b)| {
                let bracket: Vec<Expr> = (0..n)
                    .map(|mu| self.directional(a, &self.frame[b][mu]) - self.directional(b, &self.frame[a][mu]))
                    .collect();
                (0..n)
                    .map(|k| Expr::sum((0..n).map(|mu| &self.theta[k][mu] * &bracket[mu])))
                    .collect::<Vec<Expr>>()
            });
            let mut c = vec![vec![vec![Expr::zero(); n]; n]; n];
            for (&(a, b), ck) in pairs.iter().zip(brackets) {
                for (k, v) in ck.into_iter().enumerate() {
                    c[k][b][a] = v.neg();
                    c[k][a][b] = v;
                }
            }
            c
        })
    }

    /// Minor of `θ` with frame rows `frame_blade` and coordinate columns
    /// `coord_blade`; `dx^M` components of `θ^I`.
    pub fn theta_minor(&self, frame_blade: Blade, coord_blade: Blade) -> Expr {
        let table = self.theta_minors.get_or_init(|| self.minors(&self.theta, false));
        table.get(&(frame_blade, coord_blade)).cloned().unwrap_or_else(Expr::zero)
    }

    /// Minor of `e` with coordinate rows `coord_blade` and frame columns
    /// `frame_blade`; `θ^I` components of `dx^M`.
    pub fn frame_minor(&self, coord_blade: Blade, frame_blade: Blade) -> Expr {
        let table = self.frame_minors.get_or_init(|| self.minors(&self.frame, true));
        table.get(&(coord_blade, frame_blade)).cloned().unwrap_or_else(Expr::zero)
    }

    // `m[row][col]`; when `transpose` the matrix is read as `m[col][row]`.
    fn minors(&self, m: &[Vec<Expr>], transpose: bool) -> HashMap<(Blade, Blade), Expr> {
        let n = self.dim();
        let read: Vec<Vec<Expr>> = if transpose {
            (0..n).map(|i| (0..n).map(|j| m[j][i].clone()).collect()).collect()
        } else {
            m.to_vec()
        };
        let mut keys = Vec::new();
        for r in 0..=n {
            for rows in blades(n, r) {
                for cols in blades(n, r) {
                    keys.push((rows, cols));
                }
            }
        }
        let values = par::map(&keys, |&(rows, cols)| determinant(&submatrix(&read, &indices(rows), &indices(cols))));
        keys.into_iter().zip(values).filter(|(_, v)| !v.is_zero()).collect()
    }

    /// Coframe `θ'^a = Λ^a_b θ^b` for a constant matrix `Λ`.
    pub fn transformed(&self, lambda: &[Vec<Expr>]) -> Result<Arc<Coframe>> {
        let n = self.dim();
        let theta = (0..n)
            .map(|a| (0..n).map(|mu| Expr::sum((0..n).map(|b| &lambda[a][b] * &self.theta[b][mu]))).collect())
            .collect();
        Coframe::new(self.chart.clone(), theta, self.signature.clone())
    }
}

fn describe(b: &Binding) -> String {
    b.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
}

//! Teleparallel Lagrangian, field equations and their comparison with the
//! Einstein 3-forms.
//!
//! Everything is built from the coframe alone: `θ^a`, `dθ^a`, Hodge duals and
//! contractions. Frame indices are lowered with `η`, so `θ_d = η_dd θ^d`.

use std::sync::Arc;

use serde::Serialize;

use crate::expr::{Expr, Rational, Verdict, ZeroTestPolicy};
use crate::forms::{Coframe, MultiForm};
use crate::frames::{cartan_curvature, einstein_3forms_from, Connection};
use crate::{par, Error, Result};

/// Which form of the gravitational energy-momentum 3-forms `★t_d` to use.
///
/// The published expression repeats `½ d(θ_d ⌟ ★θ^a) ∧ ★d★θ_a` and has no
/// term coming from the variation of the volume form in `½ δθ^a ∧ ★δθ_a`.
/// Comparison with a direct variation of the Lagrangian shows that both
/// copies belong there and that `-θ_d ⌟ (½ δθ^a ∧ ★δθ_a)` is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DuplicateTerm {
    /// Exactly as published: both copies, no volume term.
    Verbatim,
    /// One copy of the repeated term, no volume term.
    SingleCopy,
    /// Both copies plus `-θ_d ⌟ (½ δθ^a ∧ ★δθ_a)`; the Euler-Lagrange form.
    #[default]
    Complete,
}

fn half() -> Expr {
    Expr::rational(Rational::new(1, 2))
}

fn quarter() -> Expr {
    Expr::rational(Rational::new(1, 4))
}

fn require_4d(cf: &Coframe) -> Result<()> {
    if cf.dim() == 4 {
        Ok(())
    } else {
        Err(Error::Dimension { expected: 4, found: cf.dim() })
    }
}

/// Forms shared by every term of the Lagrangian and the field equations.
#[derive(Debug, Clone)]
pub struct Ingredients {
    pub coframe: Arc<Coframe>,
    /// `θ^a`
    pub theta: Vec<MultiForm>,
    /// `θ_a`
    pub theta_lower: Vec<MultiForm>,
    /// `dθ^a`
    pub dtheta: Vec<MultiForm>,
    /// `dθ_a`
    pub dtheta_lower: Vec<MultiForm>,
    /// `★dθ_a`
    pub star_dtheta_lower: Vec<MultiForm>,
    /// `★θ^a`
    pub star_theta: Vec<MultiForm>,
    /// `★d★θ_a`
    pub star_d_star_theta_lower: Vec<MultiForm>,
    /// `δθ^a`
    pub codiff_theta: Vec<MultiForm>,
    /// `dθ^a ∧ θ_a` summed over `a`
    pub twist: MultiForm,
    /// `★(dθ^a ∧ θ_a)`
    pub star_twist: MultiForm,
}

impl Ingredients {
    pub fn new(cf: &Arc<Coframe>) -> Result<Ingredients> {
        let n = cf.dim();
        let theta: Vec<MultiForm> = (0..n).map(|a| MultiForm::theta(cf, a)).collect();
        let theta_lower: Vec<MultiForm> = (0..n).map(|a| MultiForm::theta_lower(cf, a)).collect();
        let dtheta: Vec<MultiForm> = par::map(&theta, |t| t.exterior_d());
        let dtheta_lower: Vec<MultiForm> = (0..n).map(|a| dtheta[a].scale_int(cf.eta(a))).collect();
        let star_dtheta_lower = dtheta_lower.iter().map(|f| f.hodge()).collect();
        let star_theta: Vec<MultiForm> = theta.iter().map(|t| t.hodge()).collect();
        let star_d_star_theta_lower =
            par::map_range(n, |a| star_theta[a].scale_int(cf.eta(a)).exterior_d().hodge());
        let codiff_theta = par::map(&theta, |t| t.coderivative());
        let mut twist = MultiForm::zero(cf);
        for a in 0..n {
            twist = &twist + &dtheta[a].wedge(&theta_lower[a])?;
        }
        let star_twist = twist.hodge();
        Ok(Ingredients {
            coframe: cf.clone(),
            theta,
            theta_lower,
            dtheta,
            dtheta_lower,
            star_dtheta_lower,
            star_theta,
            star_d_star_theta_lower,
            codiff_theta,
            twist,
            star_twist,
        })
    }

    fn dim(&self) -> usize {
        self.coframe.dim()
    }

    /// `½ δθ^a ∧ ★δθ_a`
    fn codiff_density(&self) -> Result<MultiForm> {
        let mut acc = MultiForm::zero(&self.coframe);
        for a in 0..self.dim() {
            let lower = self.codiff_theta[a].scale_int(self.coframe.eta(a));
            acc = &acc + &self.codiff_theta[a].wedge(&lower.hodge())?;
        }
        Ok(acc.scale(&half()))
    }

    /// `Σ_a (θ_d ⌟ ★θ^a) ∧ ★d★θ_a`
    fn dual_divergence_term(&self, d: usize) -> Result<MultiForm> {
        let mut acc = MultiForm::zero(&self.coframe);
        for a in 0..self.dim() {
            let c = self.theta_lower[d].left_contract(&self.star_theta[a])?;
            acc = &acc + &c.wedge(&self.star_d_star_theta_lower[a])?;
        }
        Ok(acc)
    }

    /// `Σ_a d(θ_d ⌟ ★θ^a) ∧ ★d★θ_a`
    fn d_dual_divergence_term(&self, d: usize) -> Result<MultiForm> {
        let mut acc = MultiForm::zero(&self.coframe);
        for a in 0..self.dim() {
            let c = self.theta_lower[d].left_contract(&self.star_theta[a])?.exterior_d();
            acc = &acc + &c.wedge(&self.star_d_star_theta_lower[a])?;
        }
        Ok(acc)
    }
}

/// Teleparallel Lagrangian 4-form
/// `-½ dθ^a ∧ ★dθ_a + ½ δθ^a ∧ ★δθ_a + ¼ (dθ^a ∧ θ_a) ∧ ★(dθ^b ∧ θ_b)`.
pub fn lagrangian_g(cf: &Arc<Coframe>) -> Result<MultiForm> {
    require_4d(cf)?;
    lagrangian_g_from(&Ingredients::new(cf)?)
}

pub fn lagrangian_g_from(ing: &Ingredients) -> Result<MultiForm> {
    let cf = &ing.coframe;
    let mut first = MultiForm::zero(cf);
    for a in 0..ing.dim() {
        first = &first + &ing.dtheta[a].wedge(&ing.star_dtheta_lower[a])?;
    }
    let third = ing.twist.wedge(&ing.star_twist)?;
    Ok(&(&first.scale(&half().neg()) + &ing.codiff_density()?) + &third.scale(&quarter()))
}

/// Einstein-Hilbert 4-form `½ R_cd ∧ ★(θ^c ∧ θ^d)` with `R_cd = η_ce R^e_d`.
pub fn lagrangian_eh(cf: &Arc<Coframe>) -> Result<MultiForm> {
    require_4d(cf)?;
    let data = cartan_curvature(&Connection::levi_civita(cf)?)?;
    let n = cf.dim();
    let mut acc = MultiForm::zero(cf);
    for c in 0..n {
        for d in 0..n {
            let r = data.curvature[c][d].scale_int(cf.eta(c));
            if r.is_structurally_zero() {
                continue;
            }
            let dual = MultiForm::theta(cf, c).wedge(&MultiForm::theta(cf, d))?.hodge();
            acc = &acc + &r.wedge(&dual)?;
        }
    }
    Ok(acc.scale(&half()))
}

/// Superpotential 2-forms
/// `★S_d = -★dθ_d - (θ_d ⌟ ★θ^a) ∧ ★d★θ_a + ½ θ_d ∧ ★(dθ^a ∧ θ_a)`.
pub fn superpotential(cf: &Arc<Coframe>) -> Result<Vec<MultiForm>> {
    require_4d(cf)?;
    superpotential_from(&Ingredients::new(cf)?)
}

pub fn superpotential_from(ing: &Ingredients) -> Result<Vec<MultiForm>> {
    par::map_range(ing.dim(), |d| {
        let mut s = -&ing.star_dtheta_lower[d];
        s = &s - &ing.dual_divergence_term(d)?;
        s = &s + &ing.theta_lower[d].wedge(&ing.star_twist)?.scale(&half());
        Ok(s)
    })
    .into_iter()
    .collect()
}

/// Gravitational energy-momentum 3-forms `★t_d`.
pub fn pseudo_energy_momentum(cf: &Arc<Coframe>, variant: DuplicateTerm) -> Result<Vec<MultiForm>> {
    require_4d(cf)?;
    pseudo_energy_momentum_from(&Ingredients::new(cf)?, variant)
}

pub fn pseudo_energy_momentum_from(ing: &Ingredients, variant: DuplicateTerm) -> Result<Vec<MultiForm>> {
    let cf = &ing.coframe;
    let n = ing.dim();
    par::map_range(n, |d| {
        let td = &ing.theta_lower[d];
        // ½[(θ_d ⌟ dθ^a) ∧ ★dθ_a - dθ^a ∧ (θ_d ⌟ ★dθ_a)]
        let mut bracket = MultiForm::zero(cf);
        for a in 0..n {
            bracket = &bracket + &td.left_contract(&ing.dtheta[a])?.wedge(&ing.star_dtheta_lower[a])?;
            bracket = &bracket - &ing.dtheta[a].wedge(&td.left_contract(&ing.star_dtheta_lower[a])?)?;
        }
        let mut t = bracket.scale(&half());
        // ½ d(θ_d ⌟ ★θ^a) ∧ ★d★θ_a, which appears twice
        let dual = ing.d_dual_divergence_term(d)?.scale(&half());
        t = &t + &dual;
        if variant != DuplicateTerm::SingleCopy {
            t = &t + &dual;
        }
        if variant == DuplicateTerm::Complete {
            t = &t - &td.left_contract(&ing.codiff_density()?)?;
        }
        // ½ dθ_d ∧ ★(dθ^a ∧ θ_a)
        t = &t + &ing.dtheta_lower[d].wedge(&ing.star_twist)?.scale(&half());
        // -¼ (dθ^a ∧ θ_a) ∧ [θ_d ⌟ ★(dθ^c ∧ θ_c)]
        t = &t - &ing.twist.wedge(&td.left_contract(&ing.star_twist)?)?.scale(&quarter());
        // -¼ [θ_d ⌟ (dθ^c ∧ θ_c)] ∧ ★(dθ^a ∧ θ_a)
        t = &t - &td.left_contract(&ing.twist)?.wedge(&ing.star_twist)?.scale(&quarter());
        Ok(t)
    })
    .into_iter()
    .collect()
}

/// `h_d = d[(θ_d ⌟ ★θ^a) ∧ ★d★θ_a - ½ θ_d ∧ ★(dθ^a ∧ θ_a)]`.
pub fn h_forms(cf: &Arc<Coframe>) -> Result<Vec<MultiForm>> {
    require_4d(cf)?;
    h_forms_from(&Ingredients::new(cf)?)
}

pub fn h_forms_from(ing: &Ingredients) -> Result<Vec<MultiForm>> {
    par::map_range(ing.dim(), |d| {
        let inner = &ing.dual_divergence_term(d)? - &ing.theta_lower[d].wedge(&ing.star_twist)?.scale(&half());
        Ok(inner.exterior_d())
    })
    .into_iter()
    .collect()
}

/// Matter energy-momentum 3-forms `★𝒯_d` as they enter the field equations.
///
/// The physical energy-momentum 3-forms are `★T_d = -★𝒯_d`.
#[derive(Debug, Clone)]
pub struct MatterSource {
    forms: Vec<MultiForm>,
}

impl MatterSource {
    pub fn vacuum(cf: &Arc<Coframe>) -> MatterSource {
        MatterSource { forms: vec![MultiForm::zero(cf); cf.dim()] }
    }

    /// From the tensor `𝒯_da` (frame components): `★𝒯_d = ★(𝒯_da θ^a)`.
    pub fn from_tensor(cf: &Arc<Coframe>, table: &[Vec<Expr>]) -> Result<MatterSource> {
        let n = cf.dim();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, found: table.len() });
        }
        let forms =
            (0..n).map(|d| MultiForm::from_terms(cf, (0..n).map(|a| (1u8 << a, table[d][a].clone()))).hodge()).collect();
        Ok(MatterSource { forms })
    }

    /// `★𝒯_d`
    pub fn star_forms(&self) -> &[MultiForm] {
        &self.forms
    }

    /// The physical `★T_d = -★𝒯_d`.
    pub fn physical_forms(&self) -> Vec<MultiForm> {
        self.forms.iter().map(|f| -f).collect()
    }

    pub fn is_vacuum(&self) -> bool {
        self.forms.iter().all(|f| f.is_structurally_zero())
    }
}

/// Sign and orientation conventions, embedded in every report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Conventions {
    pub signature: Vec<i64>,
    pub orientation: String,
    pub torsion: String,
    pub curvature: String,
    pub source: String,
    pub duplicate_term: DuplicateTerm,
}

impl Conventions {
    pub fn new(cf: &Coframe, duplicate_term: DuplicateTerm) -> Conventions {
        let n = cf.dim();
        Conventions {
            signature: cf.signature().to_vec(),
            orientation: (0..n).map(|a| format!("theta^{a}")).collect::<Vec<_>>().join("^"),
            torsion: "Theta^a = d theta^a + omega^a_b ^ theta^b, tau(u,v) = D_u v - D_v u - [u,v]".into(),
            curvature: "R^a_b = d omega^a_b + omega^a_c ^ omega^c_b, Ricci R_bd = R^a_{b ad}".into(),
            source: "residual adds *calT_d; the physical energy-momentum is *T_d = -*calT_d".into(),
            duplicate_term,
        }
    }
}

/// Field-equation data for one index `d`.
#[derive(Debug, Clone)]
pub struct IndexReport {
    pub index: usize,
    /// `★S_d`
    pub superpotential: MultiForm,
    /// `★t_d`
    pub pseudo_energy: MultiForm,
    /// `h_d`
    pub h: MultiForm,
    /// `d★S_d + ★t_d + ★𝒯_d`
    pub residual: MultiForm,
    pub residual_verdict: Verdict,
    /// `δF^d + 𝒯^d + 𝐭^d` with `F_d = -dθ_d`, `𝐭^d = t^d + 𝔥^d`, `★𝔥_d = -h_d`.
    pub coderivative_residual: MultiForm,
    pub coderivative_verdict: Verdict,
    /// `(d★S_d + ★t_d) + ★G_d`, present for equivalence checks.
    pub equivalence_residual: Option<MultiForm>,
    pub equivalence_verdict: Option<Verdict>,
}

#[derive(Debug, Clone)]
pub struct FieldEquationReport {
    pub conventions: Conventions,
    pub indices: Vec<IndexReport>,
}

impl FieldEquationReport {
    pub fn residual_verdict(&self, policy: &ZeroTestPolicy) -> Verdict {
        Verdict::merge(&self.indices.iter().map(|i| i.residual_verdict.clone()).collect::<Vec<_>>(), policy)
    }

    pub fn coderivative_verdict(&self, policy: &ZeroTestPolicy) -> Verdict {
        Verdict::merge(&self.indices.iter().map(|i| i.coderivative_verdict.clone()).collect::<Vec<_>>(), policy)
    }

    pub fn equivalence_verdict(&self, policy: &ZeroTestPolicy) -> Option<Verdict> {
        let vs: Option<Vec<Verdict>> = self.indices.iter().map(|i| i.equivalence_verdict.clone()).collect();
        vs.map(|v| Verdict::merge(&v, policy))
    }
}

/// Left side `d★S_d + ★t_d` of the field equations.
pub fn field_equation_lhs(ing: &Ingredients, variant: DuplicateTerm) -> Result<Vec<MultiForm>> {
    let s = superpotential_from(ing)?;
    let t = pseudo_energy_momentum_from(ing, variant)?;
    Ok(s.iter().zip(&t).map(|(s, t)| &s.exterior_d() + t).collect())
}

/// `d★S_d + ★t_d + ★𝒯_d` per index, plus the coderivative form of the
/// same equations.
pub fn field_equation_residual(
    cf: &Arc<Coframe>,
    src: &MatterSource,
    variant: DuplicateTerm,
    policy: &ZeroTestPolicy,
) -> Result<FieldEquationReport> {
    require_4d(cf)?;
    let ing = Ingredients::new(cf)?;
    build_report(&ing, src, variant, None, policy)
}

fn build_report(
    ing: &Ingredients,
    src: &MatterSource,
    variant: DuplicateTerm,
    einstein: Option<&[MultiForm]>,
    policy: &ZeroTestPolicy,
) -> Result<FieldEquationReport> {
    let cf = &ing.coframe;
    let n = ing.dim();
    let s = superpotential_from(ing)?;
    let t = pseudo_energy_momentum_from(ing, variant)?;
    let h = h_forms_from(ing)?;
    let mut indices = Vec::with_capacity(n);
    for d in 0..n {
        let lhs = &s[d].exterior_d() + &t[d];
        let residual = &lhs + &src.star_forms()[d];
        let residual_verdict = residual.verdict(policy)?;
        // δF^d + 𝒯^d + t^d + 𝔥^d, all with the index raised by η_dd
        let eta = cf.eta(d);
        let f_up = ing.dtheta_lower[d].scale_int(-eta);
        let matter = src.star_forms()[d].hodge_inverse();
        let grav = &t[d].hodge_inverse() - &h[d].hodge_inverse();
        let coderivative_residual = &f_up.coderivative() + &(&matter + &grav).scale_int(eta);
        let coderivative_verdict = coderivative_residual.verdict(policy)?;
        let (equivalence_residual, equivalence_verdict) = match einstein {
            Some(g) => {
                let star_g_lower = g[d].scale_int(eta);
                let r = &lhs + &star_g_lower;
                let v = r.verdict(policy)?;
                (Some(r), Some(v))
            }
            None => (None, None),
        };
        indices.push(IndexReport {
            index: d,
            superpotential: s[d].clone(),
            pseudo_energy: t[d].clone(),
            h: h[d].clone(),
            residual,
            residual_verdict,
            coderivative_residual,
            coderivative_verdict,
            equivalence_residual,
            equivalence_verdict,
        });
    }
    Ok(FieldEquationReport { conventions: Conventions::new(cf, variant), indices })
}

/// Compare `d★S_d + ★t_d` with `-★G_d` for every index.
pub fn equivalence_check(
    cf: &Arc<Coframe>,
    variant: DuplicateTerm,
    policy: &ZeroTestPolicy,
) -> Result<FieldEquationReport> {
    require_4d(cf)?;
    let ing = Ingredients::new(cf)?;
    let data = cartan_curvature(&Connection::levi_civita(cf)?)?;
    let g = einstein_3forms_from(cf, &data)?;
    build_report(&ing, &MatterSource::vacuum(cf), variant, Some(&g), policy)
}

/// First form of `★t_d`, in the order verbatim, single copy, complete, for
/// which the equivalence with the Einstein 3-forms holds.
pub fn resolve_duplicate_term(cf: &Arc<Coframe>, policy: &ZeroTestPolicy) -> Result<Option<(DuplicateTerm, FieldEquationReport)>> {
    for variant in [DuplicateTerm::Verbatim, DuplicateTerm::SingleCopy, DuplicateTerm::Complete] {
        let report = equivalence_check(cf, variant, policy)?;
        if report.equivalence_verdict(policy).is_some_and(|v| v.is_zero()) {
            return Ok(Some((variant, report)));
        }
    }
    Ok(None)
}

/// `δ(𝒯^d + 𝐭^d)` per index, computed from `★t_d` and `h_d` directly.
pub fn conservation_forms(
    cf: &Arc<Coframe>,
    src: &MatterSource,
    variant: DuplicateTerm,
) -> Result<Vec<MultiForm>> {
    require_4d(cf)?;
    let ing = Ingredients::new(cf)?;
    let t = pseudo_energy_momentum_from(&ing, variant)?;
    let h = h_forms_from(&ing)?;
    Ok((0..cf.dim())
        .map(|d| {
            let total = &(&src.star_forms()[d].hodge_inverse() + &t[d].hodge_inverse()) - &h[d].hodge_inverse();
            total.scale_int(cf.eta(d)).coderivative()
        })
        .collect())
}

pub fn conservation_check(
    cf: &Arc<Coframe>,
    src: &MatterSource,
    variant: DuplicateTerm,
    policy: &ZeroTestPolicy,
) -> Result<Verdict> {
    let forms = conservation_forms(cf, src, variant)?;
    let vs = forms.iter().map(|f| f.verdict(policy)).collect::<Result<Vec<_>>>()?;
    Ok(Verdict::merge(&vs, policy))
}

/// `L_g - L_EH - d(θ^a ∧ ★dθ_a)`.
pub fn lagrangian_decomposition_residual(cf: &Arc<Coframe>) -> Result<MultiForm> {
    require_4d(cf)?;
    let ing = Ingredients::new(cf)?;
    let lg = lagrangian_g_from(&ing)?;
    let leh = lagrangian_eh(cf)?;
    let mut exact = MultiForm::zero(cf);
    for a in 0..cf.dim() {
        exact = &exact + &ing.theta[a].wedge(&ing.star_dtheta_lower[a])?;
    }
    Ok(&(&lg - &leh) - &exact.exterior_d())
}

pub fn lagrangian_decomposition_check(cf: &Arc<Coframe>, policy: &ZeroTestPolicy) -> Result<Verdict> {
    lagrangian_decomposition_residual(cf)?.verdict(policy)
}

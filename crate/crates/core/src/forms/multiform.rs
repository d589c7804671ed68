use std::collections::BTreeMap;
use std::sync::Arc;

use crate::expr::{is_zero_all, simplify, Expr, Verdict, ZeroTestPolicy};
use crate::{par, Error, Result};

use super::{grade, indices, merge_sign, reversion_sign, Blade, Coframe};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A (possibly inhomogeneous) differential form in the frame basis.
///
/// Components are stored only for strictly increasing index sets, so
/// antisymmetry is structural. Zero components are dropped.
#[derive(Debug, Clone)]
pub struct MultiForm {
    coframe: Arc<Coframe>,
    terms: BTreeMap<Blade, Expr>,
}

impl PartialEq for MultiForm {
    fn eq(&self, other: &MultiForm) -> bool {
        Arc::ptr_eq(&self.coframe, &other.coframe) && self.terms == other.terms
    }
}

fn accumulate(terms: &mut BTreeMap<Blade, Vec<Expr>>, blade: Blade, value: Expr) {
    if !value.is_zero() {
        terms.entry(blade).or_default().push(value);
    }
}

impl MultiForm {
    pub fn zero(cf: &Arc<Coframe>) -> MultiForm {
        MultiForm { coframe: cf.clone(), terms: BTreeMap::new() }
    }

    pub fn scalar(cf: &Arc<Coframe>, value: Expr) -> MultiForm {
        MultiForm::from_terms(cf, [(0, value)])
    }

    pub fn from_terms<I: IntoIterator<Item = (Blade, Expr)>>(cf: &Arc<Coframe>, terms: I) -> MultiForm {
        let mut acc = BTreeMap::new();
        for (b, v) in terms {
            assert!((b as u16) < (1u16 << cf.dim()), "blade {b:#b} exceeds dimension {}", cf.dim());
            accumulate(&mut acc, b, v);
        }
        MultiForm::collect(cf, acc)
    }

    fn collect(cf: &Arc<Coframe>, acc: BTreeMap<Blade, Vec<Expr>>) -> MultiForm {
        let terms = acc
            .into_iter()
            .map(|(b, vs)| (b, Expr::sum(vs)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        MultiForm { coframe: cf.clone(), terms }
    }

    /// `θ^a`
    pub fn theta(cf: &Arc<Coframe>, a: usize) -> MultiForm {
        MultiForm::from_terms(cf, [(1 << a, Expr::one())])
    }

    /// `θ_a = η_ab θ^b`
    pub fn theta_lower(cf: &Arc<Coframe>, a: usize) -> MultiForm {
        MultiForm::from_terms(cf, [(1 << a, Expr::int(cf.eta(a)))])
    }

    /// `θ^{i1}∧…∧θ^{ir}` for arbitrary (possibly unsorted) indices.
    pub fn basis(cf: &Arc<Coframe>, idx: &[usize]) -> MultiForm {
        idx.iter().fold(MultiForm::scalar(cf, Expr::one()), |acc, &a| {
            acc.wedge(&MultiForm::theta(cf, a)).expect("same coframe")
        })
    }

    /// Orientation form `τ = θ^0∧…∧θ^{n-1}`.
    pub fn volume(cf: &Arc<Coframe>) -> MultiForm {
        MultiForm::from_terms(cf, [(cf.top_blade(), Expr::one())])
    }

    /// Coordinate differential `dx^μ` expanded in the frame basis.
    pub fn coordinate_differential(cf: &Arc<Coframe>, mu: usize) -> MultiForm {
        MultiForm::from_terms(cf, (0..cf.dim()).map(|a| (1 << a, cf.frame(a, mu).clone())))
    }

    /// Form given by components on `dx^{μ1}∧…∧dx^{μr}` (increasing `μ`).
    pub fn from_coordinate<I: IntoIterator<Item = (Blade, Expr)>>(cf: &Arc<Coframe>, coords: I) -> MultiForm {
        let coords: Vec<(Blade, Expr)> = coords.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        let n = cf.dim();
        let mut acc = BTreeMap::new();
        for (m, v) in &coords {
            for i in super::blades(n, grade(*m)) {
                let minor = cf.frame_minor(*m, i);
                if !minor.is_zero() {
                    accumulate(&mut acc, i, v * &minor);
                }
            }
        }
        MultiForm::collect(cf, acc)
    }

    /// Components on `dx^{μ1}∧…∧dx^{μr}`.
    pub fn to_coordinate(&self) -> BTreeMap<Blade, Expr> {
        let n = self.coframe.dim();
        let mut acc = BTreeMap::new();
        for (i, v) in &self.terms {
            for m in super::blades(n, grade(*i)) {
                let minor = self.coframe.theta_minor(*i, m);
                if !minor.is_zero() {
                    accumulate(&mut acc, m, v * &minor);
                }
            }
        }
        acc.into_iter().map(|(b, vs)| (b, Expr::sum(vs))).filter(|(_, v)| !v.is_zero()).collect()
    }

    pub fn coframe(&self) -> &Arc<Coframe> {
        &self.coframe
    }

    pub fn terms(&self) -> &BTreeMap<Blade, Expr> {
        &self.terms
    }

    /// Component on the sorted blade; zero when absent.
    pub fn component(&self, b: Blade) -> Expr {
        self.terms.get(&b).cloned().unwrap_or_else(Expr::zero)
    }

    /// Component on `θ^{i1}∧…∧θ^{ir}` for any index order.
    pub fn component_at(&self, idx: &[usize]) -> Expr {
        let basis = MultiForm::basis(&self.coframe, idx);
        match basis.terms.iter().next() {
            Some((b, sign)) => &self.component(*b) * sign,
            None => Expr::zero(),
        }
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Grades present, ascending.
    pub fn grades(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.terms.keys().map(|b| grade(*b)).collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    /// The single grade of a homogeneous form; `None` for the zero form.
    pub fn homogeneous_grade(&self) -> Result<Option<usize>> {
        match self.grades().as_slice() {
            [] => Ok(None),
            [r] => Ok(Some(*r)),
            _ => Err(Error::Inhomogeneous),
        }
    }

    pub fn grade_part(&self, r: usize) -> MultiForm {
        MultiForm {
            coframe: self.coframe.clone(),
            terms: self.terms.iter().filter(|(b, _)| grade(**b) == r).map(|(b, v)| (*b, v.clone())).collect(),
        }
    }

    fn check(&self, other: &MultiForm) -> Result<()> {
        if Arc::ptr_eq(&self.coframe, &other.coframe) {
            Ok(())
        } else {
            Err(Error::CoframeMismatch)
        }
    }

    pub fn try_add(&self, other: &MultiForm) -> Result<MultiForm> {
        self.check(other)?;
        let mut acc = BTreeMap::new();
        for (b, v) in self.terms.iter().chain(other.terms.iter()) {
            accumulate(&mut acc, *b, v.clone());
        }
        Ok(MultiForm::collect(&self.coframe, acc))
    }

    /// Multiply every component by a scalar expression.
    pub fn scale(&self, f: &Expr) -> MultiForm {
        MultiForm::from_terms(&self.coframe, self.terms.iter().map(|(b, v)| (*b, v * f)))
    }

    pub fn scale_int(&self, k: i64) -> MultiForm {
        self.scale(&Expr::int(k))
    }

    /// Apply `f` to every component.
    pub fn map(&self, f: impl Fn(&Expr) -> Expr + Sync + Send) -> MultiForm {
        let entries: Vec<(Blade, Expr)> = self.terms.iter().map(|(b, v)| (*b, v.clone())).collect();
        let mapped = par::map(&entries, |(b, v)| (*b, f(v)));
        MultiForm::from_terms(&self.coframe, mapped)
    }

    pub fn simplified(&self) -> MultiForm {
        self.map(simplify)
    }

    /// Zero test over all components.
    pub fn verdict(&self, policy: &ZeroTestPolicy) -> Result<Verdict> {
        let comps: Vec<Expr> = self.terms.values().cloned().collect();
        Ok(is_zero_all(&comps, policy)?)
    }

    pub fn wedge(&self, other: &MultiForm) -> Result<MultiForm> {
        self.check(other)?;
        let mut acc = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let s = merge_sign(*a, *b);
                if s != 0 {
                    accumulate(&mut acc, a | b, (x * y).scaled(s.into()));
                }
            }
        }
        Ok(MultiForm::collect(&self.coframe, acc))
    }

    /// Metric scalar product; blades of different grade are orthogonal.
    pub fn scalar_product(&self, other: &MultiForm) -> Result<Expr> {
        self.check(other)?;
        let cf = &self.coframe;
        Ok(Expr::sum(self.terms.iter().filter_map(|(b, x)| {
            other.terms.get(b).map(|y| (x * y).scaled(cf.eta_blade(*b).into()))
        })))
    }

    /// Left (`self ⌟ other`) or right (`other ⌞ self`) contraction by `self`.
    pub fn contract(&self, other: &MultiForm, side: Side) -> Result<MultiForm> {
        match side {
            Side::Left => self.left_contract(other),
            Side::Right => other.right_contract(self),
        }
    }

    /// `self ⌟ other`, adjoint to `Z ↦ self~ ∧ Z` under the scalar product.
    pub fn left_contract(&self, other: &MultiForm) -> Result<MultiForm> {
        self.check(other)?;
        let cf = &self.coframe;
        let mut acc = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if a & b != *a {
                    continue;
                }
                let rest = b & !a;
                let s = reversion_sign(grade(*a)) * merge_sign(*a, rest) * cf.eta_blade(*a);
                accumulate(&mut acc, rest, (x * y).scaled(s.into()));
            }
        }
        Ok(MultiForm::collect(cf, acc))
    }

    /// `self ⌞ other`, adjoint to `Z ↦ Z ∧ other~` under the scalar product.
    pub fn right_contract(&self, other: &MultiForm) -> Result<MultiForm> {
        self.check(other)?;
        let cf = &self.coframe;
        let mut acc = BTreeMap::new();
        for (b, x) in &self.terms {
            for (a, y) in &other.terms {
                if a & b != *a {
                    continue;
                }
                let rest = b & !a;
                let s = reversion_sign(grade(*a)) * merge_sign(rest, *a) * cf.eta_blade(*a);
                accumulate(&mut acc, rest, (x * y).scaled(s.into()));
            }
        }
        Ok(MultiForm::collect(cf, acc))
    }

    pub fn reversion(&self) -> MultiForm {
        MultiForm::from_terms(
            &self.coframe,
            self.terms.iter().map(|(b, v)| (*b, v.scaled(reversion_sign(grade(*b)).into()))),
        )
    }

    /// Hodge dual, fixed by `A ∧ ★B = (A·B) τ` with `τ = θ^0∧…∧θ^{n-1}`.
    ///
    /// Applied blade by blade: `θ^B ∧ θ^{Bᶜ} = σ τ` gives
    /// `★θ^B = η^B σ θ^{Bᶜ}`.
    pub fn hodge(&self) -> MultiForm {
        let cf = &self.coframe;
        let top = cf.top_blade();
        MultiForm::from_terms(
            cf,
            self.terms.iter().map(|(b, v)| {
                let comp = top & !b;
                (comp, v.scaled((cf.eta_blade(*b) * merge_sign(*b, comp)).into()))
            }),
        )
    }

    /// `★⁻¹ = (-1)^{r(n-r)} sgn(g) ★`, grade by grade.
    pub fn hodge_inverse(&self) -> MultiForm {
        let cf = &self.coframe;
        let n = cf.dim();
        let starred = self.hodge();
        MultiForm::from_terms(
            cf,
            starred.terms.into_iter().map(|(b, v)| {
                let r = grade(b);
                let s = if (r * (n - r)) % 2 == 0 { 1 } else { -1 } * cf.metric_sign();
                (b, v.scaled(s.into()))
            }),
        )
    }

    /// Exterior derivative through the frame: `d(f θ^I) = e_a(f) θ^a ∧ θ^I + f dθ^I`
    /// with `dθ^a = -½ c^a_kl θ^k ∧ θ^l`.
    pub fn exterior_d(&self) -> MultiForm {
        let cf = &self.coframe;
        let n = cf.dim();
        let entries: Vec<(Blade, Expr)> = self.terms.iter().map(|(b, v)| (*b, v.clone())).collect();
        let parts = par::map(&entries, |(blade, f)| {
            let mut out: Vec<(Blade, Expr)> = Vec::new();
            for a in 0..n {
                let s = merge_sign(1 << a, *blade);
                if s != 0 {
                    let ef = cf.directional(a, f);
                    if !ef.is_zero() {
                        out.push((blade | (1 << a), ef.scaled(s.into())));
                    }
                }
            }
            for (b, c) in d_blade(cf, *blade) {
                out.push((b, f * &c));
            }
            out
        });
        MultiForm::from_terms(cf, parts.into_iter().flatten())
    }

    /// Exterior derivative through coordinate components; an independent
    /// route used to cross-check [`MultiForm::exterior_d`].
    pub fn exterior_d_coordinate(&self) -> MultiForm {
        let cf = &self.coframe;
        let n = cf.dim();
        let coords = self.to_coordinate();
        let entries: Vec<(Blade, Expr)> = coords.into_iter().collect();
        let parts = par::map(&entries, |(m, f)| {
            let mut out = Vec::new();
            for nu in 0..n {
                let s = merge_sign(1 << nu, *m);
                if s != 0 {
                    let df = f.diff(&cf.chart().coords()[nu]);
                    if !df.is_zero() {
                        out.push((m | (1 << nu), df.scaled(s.into())));
                    }
                }
            }
            out
        });
        MultiForm::from_coordinate(cf, parts.into_iter().flatten())
    }

    /// `δA = (-1)^r ★⁻¹ d ★ A`, grade by grade.
    pub fn coderivative(&self) -> MultiForm {
        let cf = &self.coframe;
        let mut total = MultiForm::zero(cf);
        for r in self.grades() {
            let part = self.grade_part(r).hodge().exterior_d().hodge_inverse();
            let part = if r % 2 == 0 { part } else { -&part };
            total = &total + &part;
        }
        total
    }
}

/// `d(θ^{i1}∧…∧θ^{ir}) = Σ_k (-1)^k θ^{i1}∧…∧dθ^{ik}∧…∧θ^{ir}` as blade terms.
fn d_blade(cf: &Arc<Coframe>, blade: Blade) -> Vec<(Blade, Expr)> {
    let c = cf.structure_coefficients();
    let n = cf.dim();
    let idx = indices(blade);
    let mut out = Vec::new();
    for (k, &i) in idx.iter().enumerate() {
        let before: Blade = idx[..k].iter().fold(0, |acc, j| acc | (1 << j));
        let after: Blade = idx[k + 1..].iter().fold(0, |acc, j| acc | (1 << j));
        let sk = if k % 2 == 0 { 1 } else { -1 };
        for p in 0..n {
            for q in p + 1..n {
                let coef = &c[i][p][q];
                if coef.is_zero() {
                    continue;
                }
                let pair: Blade = (1 << p) | (1 << q);
                let s1 = merge_sign(before, pair);
                if s1 == 0 {
                    continue;
                }
                let s2 = merge_sign(before | pair, after);
                if s2 == 0 {
                    continue;
                }
                out.push((before | pair | after, coef.scaled((-sk * s1 * s2).into())));
            }
        }
    }
    out
}

impl std::ops::Add for &MultiForm {
    type Output = MultiForm;
    /// Panics if the operands live on different coframes; see [`MultiForm::try_add`].
    fn add(self, rhs: &MultiForm) -> MultiForm {
        self.try_add(rhs).expect("adding forms on different coframes")
    }
}

impl std::ops::Sub for &MultiForm {
    type Output = MultiForm;
    fn sub(self, rhs: &MultiForm) -> MultiForm {
        self.try_add(&-rhs).expect("subtracting forms on different coframes")
    }
}

impl std::ops::Neg for &MultiForm {
    type Output = MultiForm;
    fn neg(self) -> MultiForm {
        MultiForm { coframe: self.coframe.clone(), terms: self.terms.iter().map(|(b, v)| (*b, v.neg())).collect() }
    }
}

impl std::ops::Neg for MultiForm {
    type Output = MultiForm;
    fn neg(self) -> MultiForm {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, SamplingDomain, Status};
    use crate::forms::{blades, Chart};

    fn sphere() -> Arc<Coframe> {
        let pi = std::f64::consts::PI;
        let chart = Chart::new(
            "sphere",
            &["theta", "phi"],
            SamplingDomain::new().interval("theta", 0.2, pi - 0.2).interval("phi", 0.2, 2.0 * pi - 0.2),
        )
        .unwrap();
        let th = vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), parse("sin(theta)").unwrap()]];
        Coframe::new(chart, th, vec![1, 1]).unwrap()
    }

    fn minkowski() -> Arc<Coframe> {
        let names = ["x0", "x1", "x2", "x3"];
        let domain = names.iter().fold(SamplingDomain::new(), |d, s| d.interval(s, -1.0, 1.0));
        let chart = Chart::new("minkowski", &names, domain).unwrap();
        let th = (0..4).map(|a| (0..4).map(|m| Expr::int((a == m) as i64)).collect()).collect();
        Coframe::new(chart, th, vec![1, -1, -1, -1]).unwrap()
    }

    #[test]
    fn anticommutes_and_nilpotent() {
        let cf = sphere();
        let t1 = MultiForm::theta(&cf, 0);
        let t2 = MultiForm::theta(&cf, 1);
        assert_eq!(t1.wedge(&t2).unwrap(), -&t2.wedge(&t1).unwrap());
        assert!(t1.wedge(&t1).unwrap().is_structurally_zero());
    }

    #[test]
    fn coordinate_wedge_on_sphere() {
        let cf = sphere();
        let dtheta = MultiForm::coordinate_differential(&cf, 0);
        let sin_dphi = MultiForm::coordinate_differential(&cf, 1).scale(&parse("sin(theta)").unwrap());
        let w = dtheta.wedge(&sin_dphi).unwrap();
        assert_eq!(w.terms().len(), 1);
        assert_eq!(w.component(0b11), Expr::one());
    }

    #[test]
    fn scalar_products_minkowski() {
        let cf = minkowski();
        let t = |a| MultiForm::theta(&cf, a);
        assert_eq!(t(0).scalar_product(&t(0)).unwrap(), Expr::one());
        assert_eq!(t(1).scalar_product(&t(1)).unwrap(), Expr::int(-1));
        let t01 = t(0).wedge(&t(1)).unwrap();
        assert_eq!(t01.scalar_product(&t01).unwrap(), Expr::int(-1));
        assert!(t(0).scalar_product(&t01).unwrap().is_zero());
    }

    #[test]
    fn contraction_examples() {
        let cf = minkowski();
        let t = |a| MultiForm::theta(&cf, a);
        assert_eq!(t(1).left_contract(&t(1)).unwrap(), MultiForm::scalar(&cf, Expr::int(-1)));
        let y = t(1).wedge(&t(2)).unwrap();
        // θ_d ⌟ (θ^a∧θ^b) = δ_d^a θ^b − δ_d^b θ^a
        for d in 0..4 {
            let lhs = MultiForm::theta_lower(&cf, d).left_contract(&y).unwrap();
            let mut rhs = MultiForm::zero(&cf);
            if d == 1 {
                rhs = &rhs + &t(2);
            }
            if d == 2 {
                rhs = &rhs - &t(1);
            }
            assert_eq!(lhs, rhs, "d = {d}");
        }
        let s = MultiForm::scalar(&cf, Expr::int(3));
        assert_eq!(s.left_contract(&y).unwrap(), y.scale_int(3));
    }

    #[test]
    fn reversion_signs_by_grade() {
        let cf = minkowski();
        for r in 0..=4 {
            let b = MultiForm::from_terms(&cf, [(blades(4, r)[0], Expr::one())]);
            let expected = if r == 2 || r == 3 { -&b } else { b.clone() };
            assert_eq!(b.reversion(), expected);
        }
    }

    #[test]
    fn hodge_examples() {
        let cf = minkowski();
        assert_eq!(MultiForm::scalar(&cf, Expr::one()).hodge(), MultiForm::volume(&cf));
        assert_eq!(MultiForm::volume(&cf).hodge(), MultiForm::scalar(&cf, Expr::int(-1)));
        let t0 = MultiForm::theta(&cf, 0);
        assert_eq!(t0.hodge().hodge_inverse(), t0);

        let s = sphere();
        assert_eq!(MultiForm::theta(&s, 0).hodge(), MultiForm::theta(&s, 1));
        assert_eq!(MultiForm::theta(&s, 1).hodge(), -&MultiForm::theta(&s, 0));
        let area = MultiForm::volume(&s);
        assert_eq!(area.hodge().hodge_inverse(), area);
    }

    #[test]
    fn sphere_dtheta() {
        let cf = sphere();
        let d = MultiForm::theta(&cf, 1).exterior_d();
        let expected = MultiForm::from_terms(&cf, [(0b11, parse("cot(theta)").unwrap())]);
        let v = (&d - &expected).verdict(&cf.chart().policy()).unwrap();
        assert_eq!(v.status, Status::Zero);
        let dc = MultiForm::theta(&cf, 1).exterior_d_coordinate();
        assert_eq!((&d - &dc).verdict(&cf.chart().policy()).unwrap().status, Status::Zero);
    }

    #[test]
    fn coordinate_differentials_are_closed() {
        let cf = sphere();
        for mu in 0..2 {
            let dx = MultiForm::coordinate_differential(&cf, mu);
            assert_eq!(dx.exterior_d().verdict(&cf.chart().policy()).unwrap().status, Status::Zero);
        }
    }

    #[test]
    fn coderivative_examples() {
        let cf = minkowski();
        assert!(MultiForm::theta(&cf, 0).scale_int(5).coderivative().is_structurally_zero());
        assert!(MultiForm::scalar(&cf, parse("x1*x2").unwrap()).coderivative().is_structurally_zero());
    }

    #[test]
    fn mismatched_coframes() {
        let a = MultiForm::theta(&sphere(), 0);
        let b = MultiForm::theta(&sphere(), 0);
        assert_eq!(a.wedge(&b), Err(Error::CoframeMismatch));
    }
}

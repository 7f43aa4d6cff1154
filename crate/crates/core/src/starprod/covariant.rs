use num_complex::Complex64;

use crate::geometry::{
    covariant_derivative, ricci, Frame, IndexKind, LiftedConnection, Riemann, TensorJet, CONVENTION,
};
use crate::jetcalc::{CJet, HbarSeries};

use super::{half_i_power, StarError, StarProduct};

/// `[f, ∇f, ∇∇f, …]` up to rank `k`; the newest derivative index is appended last.
pub fn iterated_covariant_derivative(
    f: &CJet,
    lifted: &LiftedConnection,
    k: usize,
) -> Result<Vec<TensorJet<Complex64>>, StarError> {
    if lifted.frame != Frame::Darboux {
        return Err(crate::geometry::GeometryError::InvalidModel(
            "covariant derivatives are taken in the Darboux frame".into(),
        )
        .into());
    }
    let mut out = vec![TensorJet::scalar(f.clone())];
    for _ in 0..k {
        let next = covariant_derivative(out.last().expect("nonempty"), &lifted.conn)?;
        out.push(next);
    }
    Ok(out)
}

/// Index paired with `a` by ω, and the sign of `ω^{a, partner(a)}`.
pub(crate) fn partner(a: usize, n: usize) -> (usize, f64) {
    if a < n {
        (a + n, 1.0)
    } else {
        (a - n, -1.0)
    }
}

/// Calls `visit(μ, ν, sign)` for every term of `ω^{μ_1ν_1}⋯ω^{μ_kν_k}` that is nonzero.
fn for_each_omega_pairing(k: usize, n: usize, mut visit: impl FnMut(&[usize], &[usize], f64)) {
    let d = 2 * n;
    let total = d.pow(k as u32);
    let mut mu = vec![0usize; k];
    let mut nu = vec![0usize; k];
    for flat in 0..total {
        let mut rest = flat;
        let mut sign = 1.0;
        for slot in (0..k).rev() {
            mu[slot] = rest % d;
            rest /= d;
            let (p, s) = partner(mu[slot], n);
            nu[slot] = p;
            sign *= s;
        }
        visit(&mu, &nu, sign);
    }
}

fn accumulate(acc: &mut Option<CJet>, t: CJet) -> Result<(), StarError> {
    *acc = Some(match acc.take() {
        None => t,
        Some(a) => a.try_add(&t)?,
    });
    Ok(())
}

/// `ω^{⊗k}` contraction of two rank-`k` tensors.
pub(crate) fn contract(a: &TensorJet<Complex64>, b: &TensorJet<Complex64>, n: usize) -> Result<Option<CJet>, StarError> {
    let k = a.rank();
    let mut acc = None;
    let mut err = None;
    for_each_omega_pairing(k, n, |mu, nu, sign| {
        if err.is_some() {
            return;
        }
        let (x, y) = (a.get(mu), b.get(nu));
        if x.is_zero() || y.is_zero() {
            return;
        }
        let r = x.try_mul(y).map_err(StarError::from).and_then(|t| accumulate(&mut acc, t.scale(sign)));
        if let Err(e) = r {
            err = Some(e);
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

fn zero_term(f: &CJet, g: &CJet, k: usize) -> CJet {
    f.truncate(f.valid_order().min(g.valid_order()).saturating_sub(k)).zero_like()
}

/// `Σ_k (i/2)^k/k! ω^{μ_1ν_1}⋯ω^{μ_kν_k} (∇^k f)_{μ…} (∇^k g)_{ν…}` for a flat lift.
#[derive(Debug, Clone)]
pub struct CovariantStar {
    lifted: LiftedConnection,
    k: usize,
}

impl CovariantStar {
    pub fn new(lifted: LiftedConnection, k: usize) -> Result<Self, StarError> {
        if !lifted.base_flat {
            return Err(StarError::CurvedConnection);
        }
        Ok(CovariantStar { lifted, k })
    }
}

impl StarProduct for CovariantStar {
    fn name(&self) -> &'static str {
        "covariant"
    }

    fn truncation(&self) -> usize {
        self.k
    }

    fn star(&self, f: &CJet, g: &CJet) -> Result<HbarSeries, StarError> {
        let n = self.lifted.n();
        let df = iterated_covariant_derivative(f, &self.lifted, self.k)?;
        let dg = iterated_covariant_derivative(g, &self.lifted, self.k)?;
        let mut terms = Vec::with_capacity(self.k + 1);
        for k in 0..=self.k {
            let t = contract(&df[k], &dg[k], n)?;
            terms.push(match t {
                Some(t) => t.scale_by(half_i_power(k)),
                None => zero_term(f, g, k),
            });
        }
        Ok(HbarSeries::new(terms))
    }
}

/// Curvature data of a lifted connection used by the curved engines.
#[derive(Debug, Clone)]
pub struct PhaseCurvature {
    pub n: usize,
    pub riemann: Riemann,
    /// `R̃_{αβγδ} = ω_{αλ} R̃^λ_{βγδ}`
    pub lowered: TensorJet,
    /// Ricci tensor `R̃_{αβ}` (same contraction as the base Ricci tensor).
    pub ricci: TensorJet,
    /// `R̃_{αβ;γ}`
    pub ricci_derivative: TensorJet,
}

impl PhaseCurvature {
    pub fn new(lifted: &LiftedConnection) -> Result<Self, StarError> {
        let n = lifted.n();
        let d = 2 * n;
        let riemann = lifted.curvature()?;
        let lowered = TensorJet::from_fn(d, vec![IndexKind::Lower; 4], |idx| {
            let (p, _) = partner(idx[0], n);
            // ω_{a, partner(a)} = −1 for a < N, +1 otherwise.
            let s = if idx[0] < n { -1.0 } else { 1.0 };
            riemann.get(p, idx[1], idx[2], idx[3]).scale(s)
        });
        let ric = ricci(&riemann, CONVENTION.1);
        let ricci_t = TensorJet::from_fn(d, vec![IndexKind::Lower; 2], |idx| ric[idx[0]][idx[1]].clone());
        let ricci_derivative = covariant_derivative(&ricci_t, &lifted.conn)?;
        Ok(PhaseCurvature {
            n,
            riemann,
            lowered,
            ricci: ricci_t,
            ricci_derivative,
        })
    }

    /// `W_{abc} = R̃_{abcα} ω^{αβ} ∇_β f`.
    pub fn w_tensor(&self, grad: &TensorJet<Complex64>) -> Result<TensorJet<Complex64>, StarError> {
        let n = self.n;
        let d = 2 * n;
        let mut err = None;
        let zero = grad.components()[0].zero_like();
        let w = TensorJet::from_fn(d, vec![IndexKind::Lower; 3], |idx| {
            let mut acc = zero.clone();
            for alpha in 0..d {
                let r = self.lowered.get(&[idx[0], idx[1], idx[2], alpha]);
                if r.is_zero() {
                    continue;
                }
                let (beta, s) = partner(alpha, n);
                match grad.get(&[beta]).mul_real(r).and_then(|t| acc.try_add(&t.scale(s))) {
                    Ok(v) => acc = v,
                    Err(e) => err = Some(e),
                }
            }
            acc
        });
        match err {
            Some(e) => Err(e.into()),
            None => Ok(w),
        }
    }

    /// `D_{abc} f = (∇∇∇f)_{abc} − W_{abc}`.
    pub fn d3(&self, df: &[TensorJet<Complex64>]) -> Result<TensorJet<Complex64>, StarError> {
        let w = self.w_tensor(&df[1])?;
        let d = 2 * self.n;
        let mut err = None;
        let out = TensorJet::from_fn(d, vec![IndexKind::Lower; 3], |idx| {
            match df[3].get(idx).try_sub(w.get(idx)) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    w.get(idx).clone()
                }
            }
        });
        match err {
            Some(e) => Err(e.into()),
            None => Ok(out),
        }
    }
}

fn check_k(k: usize) -> Result<(), StarError> {
    if k > 3 {
        return Err(StarError::TruncationTooHigh { requested: k, max: 3 });
    }
    Ok(())
}

/// One-parameter family `⋆_a` for a curved lift, through ħ³.
#[derive(Debug, Clone)]
pub struct FamilyAStar {
    lifted: LiftedConnection,
    curvature: PhaseCurvature,
    a: f64,
    k: usize,
}

impl FamilyAStar {
    pub fn new(lifted: LiftedConnection, a: f64, k: usize) -> Result<Self, StarError> {
        check_k(k)?;
        let curvature = PhaseCurvature::new(&lifted)?;
        Ok(FamilyAStar {
            lifted,
            curvature,
            a,
            k,
        })
    }

    pub fn curvature(&self) -> &PhaseCurvature {
        &self.curvature
    }
}

impl StarProduct for FamilyAStar {
    fn name(&self) -> &'static str {
        "family-a"
    }

    fn truncation(&self) -> usize {
        self.k
    }

    fn star(&self, f: &CJet, g: &CJet) -> Result<HbarSeries, StarError> {
        let n = self.lifted.n();
        let a = self.a;
        let df = iterated_covariant_derivative(f, &self.lifted, self.k)?;
        let dg = iterated_covariant_derivative(g, &self.lifted, self.k)?;
        let mut terms = Vec::with_capacity(self.k + 1);
        for k in 0..=self.k {
            let mut acc = contract(&df[k], &dg[k], n)?;
            if k == 2 && a != 0.0 {
                // −a R̃_{μ1μ2} ∇_{ν1}f ∇_{ν2}g
                let ric = &self.curvature.ricci;
                let mut err = None;
                for_each_omega_pairing(2, n, |mu, nu, sign| {
                    let r = ric.get(mu);
                    if r.is_zero() || err.is_some() {
                        return;
                    }
                    let res = df[1].get(&nu[..1])
                        .try_mul(dg[1].get(&nu[1..]))
                        .and_then(|t| t.mul_real(r))
                        .map_err(StarError::from)
                        .and_then(|t| accumulate(&mut acc, t.scale(-a * sign)));
                    if let Err(e) = res {
                        err = Some(e);
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
            if k == 3 {
                self.add_third_order_b(&mut acc, &df, &dg)?;
            }
            terms.push(match acc {
                Some(t) => t.scale_by(half_i_power(k)),
                None => zero_term(f, g, k),
            });
        }
        Ok(HbarSeries::new(terms))
    }
}

impl FamilyAStar {
    fn add_third_order_b(
        &self,
        acc: &mut Option<CJet>,
        df: &[TensorJet<Complex64>],
        dg: &[TensorJet<Complex64>],
    ) -> Result<(), StarError> {
        let n = self.lifted.n();
        let a = self.a;
        let wf = self.curvature.w_tensor(&df[1])?;
        let wg = self.curvature.w_tensor(&dg[1])?;
        let ric = &self.curvature.ricci;
        let dric = &self.curvature.ricci_derivative;
        let mut err: Option<StarError> = None;
        for_each_omega_pairing(3, n, |mu, nu, sign| {
            if err.is_some() {
                return;
            }
            let mut run = || -> Result<(), StarError> {
                let mut add = |t: CJet, c: f64| accumulate(acc, t.scale(c * sign));
                // −R̃_{ν1ν2ν3α}ω^{αβ}(∇∇∇f)_{μ1μ2μ3}∇_βg
                add(df[3].get(mu).try_mul(wg.get(nu))?, -1.0)?;
                // −R̃_{μ1μ2μ3α}ω^{αβ}∇_βf(∇∇∇g)_{ν1ν2ν3}
                add(wf.get(mu).try_mul(dg[3].get(nu))?, -1.0)?;
                if a != 0.0 {
                    let r = dric.get(mu);
                    if !r.is_zero() {
                        // −(3/2)a R̃_{μ1μ2;μ3} ∇_{ν3}f (∇∇g)_{ν1ν2}
                        let t = df[1].get(&nu[2..]).try_mul(dg[2].get(&nu[..2]))?.mul_real(r)?;
                        add(t, -1.5 * a)?;
                        // +(3/2)a R̃_{μ1μ2;μ3} (∇∇f)_{ν1ν2} ∇_{ν3}g
                        let t = df[2].get(&nu[..2]).try_mul(dg[1].get(&nu[2..]))?.mul_real(r)?;
                        add(t, 1.5 * a)?;
                    }
                    let r = ric.get(&[mu[1], nu[2]]);
                    if !r.is_zero() {
                        // 3a R̃_{μ2ν3} (∇∇f)_{μ1μ3} (∇∇g)_{ν1ν2}
                        let t = df[2]
                            .get(&[mu[0], mu[2]])
                            .try_mul(dg[2].get(&nu[..2]))?
                            .mul_real(r)?;
                        add(t, 3.0 * a)?;
                    }
                }
                // R̃_{μ1μ2μ3α}R̃_{ν1ν2ν3γ}ω^{αβ}ω^{γδ}∇_βf∇_δg
                add(wf.get(mu).try_mul(wg.get(nu))?, 1.0)?;
                Ok(())
            };
            if let Err(e) = run() {
                err = Some(e);
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// The `a = 0` member written with the symmetric operators `D_{μ…}`.
#[derive(Debug, Clone)]
pub struct FedosovLikeStar {
    lifted: LiftedConnection,
    curvature: PhaseCurvature,
    k: usize,
}

impl FedosovLikeStar {
    pub fn new(lifted: LiftedConnection, k: usize) -> Result<Self, StarError> {
        check_k(k)?;
        let curvature = PhaseCurvature::new(&lifted)?;
        Ok(FedosovLikeStar {
            lifted,
            curvature,
            k,
        })
    }

    /// `[D_0 f, D_μ f, D_{μν} f, D_{μνρ} f]` truncated at the engine order.
    pub fn operators(&self, f: &CJet) -> Result<Vec<TensorJet<Complex64>>, StarError> {
        let mut df = iterated_covariant_derivative(f, &self.lifted, self.k)?;
        if self.k >= 3 {
            df[3] = self.curvature.d3(&df)?;
        }
        Ok(df)
    }
}

impl StarProduct for FedosovLikeStar {
    fn name(&self) -> &'static str {
        "fedosov-like"
    }

    fn truncation(&self) -> usize {
        self.k
    }

    fn star(&self, f: &CJet, g: &CJet) -> Result<HbarSeries, StarError> {
        let n = self.lifted.n();
        let df = self.operators(f)?;
        let dg = self.operators(g)?;
        let mut terms = Vec::with_capacity(self.k + 1);
        for k in 0..=self.k {
            terms.push(match contract(&df[k], &dg[k], n)? {
                Some(t) => t.scale_by(half_i_power(k)),
                None => zero_term(f, g, k),
            });
        }
        Ok(HbarSeries::new(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{catalog, lift_flat, lift_general, poisson_bracket, ConnectionField, PhasePoint};
    use crate::jetcalc::Jet;
    use crate::starprod::{CurvilinearStar, MoyalStar};

    fn complexify(js: &[Jet]) -> Vec<CJet> {
        js.iter().map(Jet::to_complex).collect()
    }

    fn sphere(order: usize) -> (LiftedConnection, Vec<CJet>) {
        let model = catalog("unit-sphere").unwrap();
        let pt = PhasePoint::new(vec![1.1, 0.3], vec![0.4, -0.7]);
        let cf = ConnectionField::new(&model, &pt.x, order).unwrap();
        let l = lift_general(&cf, &pt, Frame::Darboux).unwrap();
        (l, complexify(&pt.coordinate_jets(order)))
    }

    #[test]
    fn flat_cartesian_lift_reproduces_moyal() {
        let model = catalog("euclidean-cartesian").unwrap();
        let pt = PhasePoint::new(vec![0.1, 0.2], vec![0.3, 0.4]);
        let cf = ConnectionField::new(&model, &pt.x, 6).unwrap();
        let z = complexify(&pt.coordinate_jets(6));
        let f = &(&z[0] * &z[2]) * &z[3];
        let g = &(&z[1] * &z[3]) * &z[2];
        let c = CovariantStar::new(lift_flat(&cf, &pt).unwrap(), 4).unwrap().star(&f, &g).unwrap();
        let m = MoyalStar::new(2, 4).star(&f, &g).unwrap();
        for (x, y) in c.terms().iter().zip(m.terms()) {
            assert!(x.max_abs_diff(y).unwrap() < 1e-15);
        }
    }

    #[test]
    fn polar_covariant_equals_curvilinear() {
        let model = catalog("euclidean-polar").unwrap();
        let pt = PhasePoint::new(vec![2.0, std::f64::consts::PI / 6.0], vec![0.3, -0.5]);
        let cf = ConnectionField::new(&model, &pt.x, 8).unwrap();
        let z = complexify(&pt.coordinate_jets(8));
        let f = &(&(&z[0] * &z[3]) * &z[3]) + &z[1];
        let g = &(&z[2] * &z[1]) * &(&z[0] + &z[2]);
        let c = CovariantStar::new(lift_flat(&cf, &pt).unwrap(), 4).unwrap().star(&f, &g).unwrap();
        let v = CurvilinearStar::new(&cf, &pt, 4).star(&f, &g).unwrap();
        for (x, y) in c.terms().iter().zip(v.terms()) {
            assert!(x.relative_defect(y).unwrap() < 1e-10);
        }
    }

    #[test]
    fn curved_lift_is_refused_by_flat_engine() {
        let (l, _) = sphere(5);
        assert!(matches!(CovariantStar::new(l, 4), Err(StarError::CurvedConnection)));
    }

    #[test]
    fn family_a_limits_and_fedosov_agreement() {
        let (l, z) = sphere(8);
        let f = &(&(&z[0] * &z[2]) * &z[3]) + &z[1];
        let g = &(&z[3] * &z[3]) * &z[0];
        let fam = FamilyAStar::new(l.clone(), 0.0, 3).unwrap();
        let fed = FedosovLikeStar::new(l.clone(), 3).unwrap();
        let a = fam.star(&f, &g).unwrap();
        let b = fed.star(&f, &g).unwrap();
        for (x, y) in a.terms().iter().zip(b.terms()) {
            assert!(x.relative_defect(y).unwrap() < 1e-12);
        }
        // Poisson limit: ħ¹ antisymmetric part is i{f,g}.
        let fam1 = FamilyAStar::new(l, 0.7, 3).unwrap();
        let fg = fam1.star(&f, &g).unwrap();
        let gf = fam1.star(&g, &f).unwrap();
        let pb = poisson_bracket(&f, &g, 2).unwrap().scale_by(Complex64::new(0.0, 1.0));
        let diff = fg.term(1).try_sub(gf.term(1)).unwrap();
        assert!(diff.max_abs_diff(&pb).unwrap() < 1e-12);
        assert!(matches!(
            FamilyAStar::new(sphere(5).0, 0.0, 4),
            Err(StarError::TruncationTooHigh { .. })
        ));
    }

    #[test]
    fn third_order_operator_is_symmetric() {
        let (l, z) = sphere(8);
        let f = &(&(&z[0] * &z[2]) * &z[3]) + &(&z[1] * &z[1]);
        let fed = FedosovLikeStar::new(l, 3).unwrap();
        let d = fed.operators(&f).unwrap();
        for (s, t) in [(0, 1), (0, 2), (1, 2)] {
            assert!(d[3].asymmetry(s, t).unwrap() < 1e-10, "{s}{t}");
        }
    }
}

use std::collections::HashMap;

use num_complex::Complex64;

use crate::geometry::{omega_upper, ConnectionField, PhaseMap, VectorField};
use crate::jetcalc::{CJet, HbarSeries, MultiIndex};

use super::{StarError, StarProduct};

/// Memoized iterated application of a commuting operator family.
struct OpCache<'a> {
    memo: HashMap<MultiIndex, CJet>,
    op: &'a dyn Fn(usize, &CJet) -> Result<CJet, StarError>,
}

impl<'a> OpCache<'a> {
    fn new(f: &CJet, op: &'a dyn Fn(usize, &CJet) -> Result<CJet, StarError>) -> Self {
        let mut memo = HashMap::new();
        memo.insert(MultiIndex::zero(f.nvars()), f.clone());
        OpCache { memo, op }
    }

    fn get(&mut self, m: &MultiIndex) -> Result<CJet, StarError> {
        if let Some(j) = self.memo.get(m) {
            return Ok(j.clone());
        }
        let v = m.first_nonzero().expect("zero index is memoized");
        let lower = m.with_decremented(v).expect("nonzero exponent");
        let inner = self.get(&lower)?;
        let out = (self.op)(v, &inner)?;
        self.memo.insert(m.clone(), out.clone());
        Ok(out)
    }
}

/// `Σ_k (i/2)^k Σ_{|α|+|β|=k} (−1)^{|β|}/(α!β!) (X^α Y^β f)(Y^α X^β g)`,
/// where operator `v < n` is `X_v` and `v ≥ n` is `Y_{v−n}`.
fn exponential_bidifferential(
    f: &CJet,
    g: &CJet,
    n: usize,
    k_max: usize,
    op: &dyn Fn(usize, &CJet) -> Result<CJet, StarError>,
) -> Result<HbarSeries, StarError> {
    let mut left = OpCache::new(f, op);
    let mut right = OpCache::new(g, op);
    let mut terms = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut acc: Option<CJet> = None;
        for gamma in MultiIndex::all_of_degree(2 * n, k) {
            let e = gamma.exponents();
            let beta_deg: usize = e[n..].iter().map(|&b| b as usize).sum();
            let swapped: Vec<u8> = e[n..].iter().chain(&e[..n]).copied().collect();
            let lf = left.get(&gamma)?;
            if lf.is_zero() {
                continue;
            }
            let rg = right.get(&MultiIndex::from_slice(&swapped))?;
            if rg.is_zero() {
                continue;
            }
            let sign = if beta_deg.is_multiple_of(2) { 1.0 } else { -1.0 };
            let c = Complex64::new(0.0, 0.5).powu(k as u32) * (sign / gamma.factorial());
            let t = lf.try_mul(&rg)?.scale_by(c);
            acc = Some(match acc {
                None => t,
                Some(a) => a.try_add(&t)?,
            });
        }
        let term = match acc {
            Some(a) => a,
            None => {
                let v = f.valid_order().min(g.valid_order()).saturating_sub(k);
                f.truncate(v).zero_like()
            }
        };
        terms.push(term);
    }
    Ok(HbarSeries::new(terms))
}

/// Moyal product in Darboux coordinates `(x, p)` of a `2N`-dimensional phase space.
#[derive(Debug, Clone)]
pub struct MoyalStar {
    pub n: usize,
    pub k: usize,
}

impl MoyalStar {
    pub fn new(n: usize, k: usize) -> Self {
        MoyalStar { n, k }
    }
}

impl StarProduct for MoyalStar {
    fn name(&self) -> &'static str {
        "moyal"
    }

    fn truncation(&self) -> usize {
        self.k
    }

    fn star(&self, f: &CJet, g: &CJet) -> Result<HbarSeries, StarError> {
        let op = |v: usize, j: &CJet| Ok(j.partial(v)?);
        exponential_bidifferential(f, g, self.n, self.k, &op)
    }
}

/// Commuting fields `X_1…X_N, Y_1…Y_N` with `P = Σ X_i ∧ Y_i`.
#[derive(Debug, Clone)]
pub struct VectorFieldSet {
    pub x: Vec<VectorField>,
    pub y: Vec<VectorField>,
}

impl VectorFieldSet {
    /// `X_i = ∂_{x^i}`, `Y_i = ∂_{p_i}`.
    pub fn coordinate(n: usize, order: usize) -> Self {
        VectorFieldSet {
            x: (0..n).map(|i| VectorField::coordinate(2 * n, order, i)).collect(),
            y: (0..n).map(|i| VectorField::coordinate(2 * n, order, n + i)).collect(),
        }
    }

    /// Cartesian coordinate fields expressed in a curvilinear Darboux chart:
    /// `X_i = [(φ′)^{-1}]^j_i (∂_{x′^j} + Γ^r_{jl} p′_r ∂_{p′_l})`, `Y_i = [φ′]^i_j ∂_{p′_j}`.
    pub fn from_point_transformation(map: &PhaseMap, cf: &ConnectionField) -> Self {
        let n = map.source.n();
        let order = map.components[0].order();
        let nv = 2 * n;
        let p: Vec<_> = (0..n).map(|r| map.source.momentum_jet(r, order)).collect();
        let zero = p[0].zero_like();
        let mut adopted = Vec::with_capacity(n);
        for j in 0..n {
            let mut comps = vec![zero.clone(); nv];
            comps[j] = zero.constant_like(1.0);
            for l in 0..n {
                let mut acc = zero.clone();
                for (r, pr) in p.iter().enumerate() {
                    acc = &acc + &(&cf.gamma.get(r, j, l).embed(nv, 0) * pr);
                }
                comps[n + l] = acc;
            }
            adopted.push(comps);
        }
        let x = (0..n)
            .map(|i| {
                let mut comps = vec![zero.clone(); nv];
                for (j, a) in adopted.iter().enumerate() {
                    let c = map.jacobian_inv[j][i].embed(nv, 0);
                    for mu in 0..nv {
                        comps[mu] = &comps[mu] + &(&c * &a[mu]);
                    }
                }
                VectorField { comps }
            })
            .collect();
        let y = (0..n)
            .map(|i| {
                let mut comps = vec![zero.clone(); nv];
                for j in 0..n {
                    comps[n + j] = map.jacobian[i][j].embed(nv, 0);
                }
                VectorField { comps }
            })
            .collect();
        VectorFieldSet { x, y }
    }

    fn all(&self) -> impl Iterator<Item = &VectorField> {
        self.x.iter().chain(&self.y)
    }

    /// Largest coefficient of any pairwise bracket.
    pub fn commutator_norm(&self) -> Result<f64, StarError> {
        let fields: Vec<&VectorField> = self.all().collect();
        let mut m = 0.0f64;
        for a in 0..fields.len() {
            for b in a + 1..fields.len() {
                m = m.max(fields[a].bracket(fields[b])?.max_abs());
            }
        }
        Ok(m)
    }

    /// Largest deviation of `Σ (X_i^μ Y_i^ν − Y_i^μ X_i^ν)` from `ω^{μν}`.
    pub fn poisson_defect(&self) -> Result<f64, StarError> {
        let n = self.x.len();
        let w = omega_upper(n);
        let mut m = 0.0f64;
        for mu in 0..2 * n {
            for nu in 0..2 * n {
                let mut acc = self.x[0].comps[0].zero_like();
                for i in 0..n {
                    let a = &self.x[i].comps[mu] * &self.y[i].comps[nu];
                    let b = &self.y[i].comps[mu] * &self.x[i].comps[nu];
                    acc = &acc + &(&a - &b);
                }
                m = m.max(acc.max_abs_diff(&acc.constant_like(w[mu][nu]))?);
            }
        }
        Ok(m)
    }
}

/// Star-product built from a commuting decomposition of the Poisson tensor.
#[derive(Debug, Clone)]
pub struct VectorFieldStar {
    fields: VectorFieldSet,
    k: usize,
}

impl VectorFieldStar {
    /// Refuses field sets whose brackets or Poisson defect exceed `tol`.
    pub fn new(fields: VectorFieldSet, k: usize, tol: f64) -> Result<Self, StarError> {
        let c = fields.commutator_norm()?;
        if c > tol {
            return Err(StarError::NonCommuting(c));
        }
        let p = fields.poisson_defect()?;
        if p > tol {
            return Err(StarError::NotPoissonDecomposition(p));
        }
        Ok(VectorFieldStar { fields, k })
    }
}

impl StarProduct for VectorFieldStar {
    fn name(&self) -> &'static str {
        "vector-field"
    }

    fn truncation(&self) -> usize {
        self.k
    }

    fn star(&self, f: &CJet, g: &CJet) -> Result<HbarSeries, StarError> {
        let n = self.fields.x.len();
        let op = |v: usize, j: &CJet| {
            let field = if v < n { &self.fields.x[v] } else { &self.fields.y[v - n] };
            Ok(field.apply(j)?)
        };
        exponential_bidifferential(f, g, n, self.k, &op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PhasePoint;
    use crate::jetcalc::Jet;

    fn cz(pt: &PhasePoint, order: usize) -> Vec<CJet> {
        pt.coordinate_jets(order).iter().map(Jet::to_complex).collect()
    }

    #[test]
    fn x_star_p() {
        let pt = PhasePoint::new(vec![0.3], vec![-0.7]);
        let z = cz(&pt, 4);
        let s = MoyalStar::new(1, 4).star(&z[0], &z[1]).unwrap();
        assert!(s.term(0).max_abs_diff(&(&z[0] * &z[1])).unwrap() < 1e-15);
        assert_eq!(s.term(1).value(), Complex64::new(0.0, 0.5));
        assert!(s.term(1).coeffs()[1..].iter().all(|c| c.norm() == 0.0));
        assert!(s.terms()[2..].iter().all(|t| t.is_zero()));
    }

    #[test]
    fn p_squared_star_x_squared() {
        let pt = PhasePoint::new(vec![0.4], vec![1.3]);
        let z = cz(&pt, 6);
        let p2 = &z[1] * &z[1];
        let x2 = &z[0] * &z[0];
        let s = MoyalStar::new(1, 4).star(&p2, &x2).unwrap();
        let xp = &z[0] * &z[1];
        let i = Complex64::new(0.0, 1.0);
        assert!(s.term(0).max_abs_diff(&(&x2 * &p2)).unwrap() < 1e-14);
        assert!(s.term(1).max_abs_diff(&xp.scale_by(-2.0 * i)).unwrap() < 1e-14);
        let c = s.term(2).constant_like(Complex64::new(-0.5, 0.0));
        assert!(s.term(2).max_abs_diff(&c).unwrap() < 1e-14);
    }

    #[test]
    fn unit_is_neutral() {
        let pt = PhasePoint::new(vec![0.4, 0.1], vec![1.3, -0.2]);
        let z = cz(&pt, 6);
        let f = &(&z[0] * &z[3]) + &(&z[1] * &z[2]);
        let one = f.constant_like(Complex64::new(1.0, 0.0));
        let m = MoyalStar::new(2, 4);
        for s in [m.star(&f, &one).unwrap(), m.star(&one, &f).unwrap()] {
            assert!(s.term(0).max_abs_diff(&f).unwrap() == 0.0);
            assert!(s.terms()[1..].iter().all(|t| t.max_abs() == 0.0));
        }
    }

    #[test]
    fn coordinate_fields_reproduce_moyal() {
        let pt = PhasePoint::new(vec![0.4, 0.1], vec![1.3, -0.2]);
        let z = cz(&pt, 6);
        let f = &(&(&z[0] * &z[0]) * &z[3]) + &z[1];
        let g = &(&z[2] * &z[2]) * &(&z[1] * &z[3]);
        let v = VectorFieldStar::new(VectorFieldSet::coordinate(2, 6), 4, 1e-12).unwrap();
        let a = v.star(&f, &g).unwrap();
        let b = MoyalStar::new(2, 4).star(&f, &g).unwrap();
        for (x, y) in a.terms().iter().zip(b.terms()) {
            assert_eq!(x.max_abs_diff(y).unwrap(), 0.0);
        }
    }

    #[test]
    fn non_commuting_fields_are_refused() {
        let pt = PhasePoint::new(vec![0.5], vec![0.2]);
        let z = pt.coordinate_jets(4);
        let mut set = VectorFieldSet::coordinate(1, 4);
        // Y = ∂_p + x ∂_x does not commute with X = ∂_x.
        set.y[0].comps[0] = z[0].clone();
        assert!(matches!(
            VectorFieldStar::new(set, 4, 1e-12),
            Err(StarError::NonCommuting(_))
        ));
    }
}

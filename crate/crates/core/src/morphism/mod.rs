//! Equivalence morphisms `S = id + ħ²S₂ + o(ħ⁴)` between the Moyal product
//! and the natural star-products, and the identities used to derive `S₂`.

mod identities;

pub use identities::{
    a2_closed_form, a_alpha_k, connection_identity_defects, quantum_canonicity_defect, quantum_canonicity_matrix, verify_commutator_identities,
    CommutatorReport,
};

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{ConnectionField, GeometryError, LiftedConnection, PhasePoint};
use crate::jetcalc::{CJet, DiffOp, HbarSeries, Jet, JetError, MultiIndex};
use crate::starprod::{partner, MoyalStar, PhaseCurvature, StarError, StarProduct};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MorphismError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Star(#[from] StarError),
    #[error("the flat morphism needs a lift of a flat connection")]
    CurvedConnection,
    #[error("A^alpha_k is defined here for k in {{2, 3}}, got {0}")]
    UnsupportedOrder(usize),
}

/// Differential operator on phase space with real jet coefficients.
pub type PhaseOperator = DiffOp<f64>;

/// Which closed form produced a morphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MorphismForm {
    /// `Γ̃`-form for a flat lift.
    Flat,
    /// `Γ̃`-form with the `a R̃_{αβ}` term.
    Curved,
    /// Coordinate form in `(x, p)` with parameters `a` and `b`.
    Coordinate,
}

#[derive(Debug, Clone)]
pub struct MorphismS {
    n: usize,
    truncation: usize,
    s2: PhaseOperator,
    a: f64,
    b: f64,
    form: MorphismForm,
}

/// `∂^α∂^β⋯` as a signed multi-index over the phase variables.
fn raised_partials(n: usize, idx: &[usize]) -> (MultiIndex, f64) {
    let mut vars = Vec::with_capacity(idx.len());
    let mut sign = 1.0;
    for &a in idx {
        let (v, s) = partner(a, n);
        vars.push(v);
        sign *= s;
    }
    (MultiIndex::from_vars(2 * n, &vars), sign)
}

fn add_term(op: &mut PhaseOperator, c: Jet, alpha: MultiIndex) -> Result<(), JetError> {
    if c.is_zero() {
        return Ok(());
    }
    *op = op.try_add(&PhaseOperator::term(c, alpha))?;
    Ok(())
}

/// `(1/16) Γ̃^μ_{να} Γ̃^ν_{μβ}` as an `[α][β]` table.
pub fn connection_square(lifted: &LiftedConnection) -> Result<Vec<Vec<Jet>>, JetError> {
    let d = lifted.dim();
    let conn = &lifted.conn;
    let zero = conn.get(0, 0, 0).zero_like();
    let mut out = vec![vec![zero; d]; d];
    for (a, row) in out.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            for mu in 0..d {
                for nu in 0..d {
                    if conn.is_nonzero(mu, nu, a) && conn.is_nonzero(nu, mu, b) {
                        *slot = slot.try_add(&conn.get(mu, nu, a).try_mul(conn.get(nu, mu, b))?)?;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn build_lifted_form(lifted: &LiftedConnection, ricci: Option<(&PhaseCurvature, f64)>) -> Result<PhaseOperator, MorphismError> {
    let n = lifted.n();
    let d = 2 * n;
    let order = lifted.conn.get(0, 0, 0).order();
    let mut s2 = PhaseOperator::zero(d, order);
    let low = lifted.lowered();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let g = &low[(a * d + b) * d + c];
                if g.is_zero() {
                    continue;
                }
                let (alpha, sign) = raised_partials(n, &[a, b, c]);
                add_term(&mut s2, g.scale(-sign / 24.0), alpha)?;
            }
        }
    }
    let sq = connection_square(lifted)?;
    for a in 0..d {
        for b in 0..d {
            let mut c = sq[a][b].clone();
            if let Some((curv, av)) = ricci {
                if av != 0.0 {
                    c = c.try_add(&curv.ricci.get(&[a, b]).scale(av))?;
                }
            }
            let (alpha, sign) = raised_partials(n, &[a, b]);
            add_term(&mut s2, c.scale(sign / 16.0), alpha)?;
        }
    }
    Ok(s2)
}

/// `S₂ = −(1/24) Γ̃_{αβγ}∂^α∂^β∂^γ + (1/16) Γ̃^μ_{να}Γ̃^ν_{μβ}∂^α∂^β`.
pub fn build_s_flat(lifted: &LiftedConnection, truncation: usize) -> Result<MorphismS, MorphismError> {
    if !lifted.base_flat {
        return Err(MorphismError::CurvedConnection);
    }
    Ok(MorphismS {
        n: lifted.n(),
        truncation,
        s2: build_lifted_form(lifted, None)?,
        a: 0.0,
        b: 0.0,
        form: MorphismForm::Flat,
    })
}

/// Flat form plus `(a/16) R̃_{αβ}∂^α∂^β`.
pub fn build_s_curved(lifted: &LiftedConnection, a: f64, truncation: usize) -> Result<MorphismS, MorphismError> {
    let curv = PhaseCurvature::new(lifted)?;
    Ok(MorphismS {
        n: lifted.n(),
        truncation,
        s2: build_lifted_form(lifted, Some((&curv, a)))?,
        a,
        b: 0.0,
        form: MorphismForm::Curved,
    })
}

/// Coordinate form on `T*Q`:
///
/// `4! S₂ = 3(Γ^i_{lj}Γ^l_{ik} + a R_{jk}) ∂_{p_j}∂_{p_k} + 3Γ^i_{jk} ∂_{x^i}∂_{p_j}∂_{p_k}
///        + (2Γ^i_{nl}Γ^n_{jk} − ∂_lΓ^i_{jk}) p_i ∂_{p_j}∂_{p_k}∂_{p_l}
///        − 3b ∂_{p_j} V_j ∂_{p_k} V_k`, with `V_j = ∂_{x^j} + Γ^i_{jl} p_i ∂_{p_l}`.
///
/// The `b` term is composed left to right exactly as written.
pub fn build_s_ab(
    cf: &ConnectionField,
    point: &PhasePoint,
    a: f64,
    b: f64,
    truncation: usize,
) -> Result<MorphismS, MorphismError> {
    let n = cf.dimension();
    if point.n() != n {
        return Err(GeometryError::PointDimension {
            expected: n,
            found: point.n(),
        }
        .into());
    }
    let d = 2 * n;
    let gamma = &cf.gamma;
    let order = gamma.get(0, 0, 0).order();
    let emb = |j: &Jet| j.embed(d, 0);
    let g = |i: usize, j: usize, k: usize| emb(gamma.get(i, j, k));
    let p: Vec<Jet> = (0..n).map(|l| point.momentum_jet(l, order)).collect();
    let px = |i: usize| MultiIndex::unit(d, i);
    let pp = |j: usize| MultiIndex::unit(d, n + j);

    let mut op = PhaseOperator::zero(d, order);
    for j in 0..n {
        for k in 0..n {
            let mut c = cf.ricci[j][k].scale(a);
            for i in 0..n {
                for l in 0..n {
                    if gamma.is_nonzero(i, l, j) && gamma.is_nonzero(l, i, k) {
                        c = c.try_add(&gamma.get(i, l, j).try_mul(gamma.get(l, i, k))?)?;
                    }
                }
            }
            add_term(&mut op, emb(&c).scale(3.0), pp(j).add(&pp(k)))?;
            for i in 0..n {
                if gamma.is_nonzero(i, j, k) {
                    add_term(&mut op, g(i, j, k).scale(3.0), px(i).add(&pp(j)).add(&pp(k)))?;
                }
            }
            for l in 0..n {
                let mut c = p[0].zero_like();
                for i in 0..n {
                    let mut t = gamma.get(i, j, k).partial(l)?.scale(-1.0);
                    for m in 0..n {
                        if gamma.is_nonzero(i, m, l) && gamma.is_nonzero(m, j, k) {
                            t = t.try_add(&gamma.get(i, m, l).try_mul(gamma.get(m, j, k))?.scale(2.0))?;
                        }
                    }
                    c = c.try_add(&emb(&t).try_mul(&p[i])?)?;
                }
                add_term(&mut op, c, pp(j).add(&pp(k)).add(&pp(l)))?;
            }
        }
    }
    if b != 0.0 {
        let v = |j: usize| -> Result<PhaseOperator, JetError> {
            let mut v = PhaseOperator::partial(d, order, j);
            for l in 0..n {
                let mut c = p[0].zero_like();
                for i in 0..n {
                    if gamma.is_nonzero(i, j, l) {
                        c = c.try_add(&g(i, j, l).try_mul(&p[i])?)?;
                    }
                }
                if !c.is_zero() {
                    v = v.try_add(&PhaseOperator::term(c, pp(l)))?;
                }
            }
            Ok(v)
        };
        let dp = |j: usize| PhaseOperator::partial(d, order, n + j);
        let mut half = PhaseOperator::zero(d, order);
        for j in 0..n {
            half = half.try_add(&dp(j).compose(&v(j)?)?)?;
        }
        op = op.try_add(&half.compose(&half)?.scale(-3.0 * b))?;
    }
    Ok(MorphismS {
        n,
        truncation,
        s2: op.scale(1.0 / 24.0),
        a,
        b,
        form: MorphismForm::Coordinate,
    })
}

impl MorphismS {
    pub fn identity(n: usize, order: usize, truncation: usize) -> Self {
        MorphismS {
            n,
            truncation,
            s2: PhaseOperator::zero(2 * n, order),
            a: 0.0,
            b: 0.0,
            form: MorphismForm::Flat,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn s2(&self) -> &PhaseOperator {
        &self.s2
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn form(&self) -> MorphismForm {
        self.form
    }

    /// `(Sf)_k = f_k + S₂ f_{k−2}`.
    pub fn apply(&self, f: &HbarSeries) -> Result<HbarSeries, MorphismError> {
        let mut terms = Vec::with_capacity(f.truncation() + 1);
        for k in 0..=f.truncation() {
            let mut t = f.term(k).clone();
            if k >= 2 {
                t = t.try_add(&self.s2.apply_to(f.term(k - 2))?)?;
            }
            terms.push(t);
        }
        Ok(HbarSeries::new(terms))
    }

    pub fn apply_jet(&self, f: &CJet) -> Result<HbarSeries, MorphismError> {
        self.apply(&HbarSeries::classical(f, self.truncation))
    }

    /// `S⁻¹ = id − ħ²S₂ + ħ⁴S₂²`; only the terms through ħ³ are determined.
    pub fn apply_inverse(&self, f: &HbarSeries) -> Result<HbarSeries, MorphismError> {
        let mut terms = Vec::with_capacity(f.truncation() + 1);
        for k in 0..=f.truncation() {
            let mut t = f.term(k).clone();
            if k >= 2 {
                t = t.try_sub(&self.s2.apply_to(f.term(k - 2))?)?;
            }
            if k >= 4 {
                let s = self.s2.apply_to(&self.s2.apply_to(f.term(k - 4))?)?;
                t = t.try_add(&s)?;
            }
            terms.push(t);
        }
        Ok(HbarSeries::new(terms))
    }

    pub fn apply_inverse_jet(&self, f: &CJet) -> Result<HbarSeries, MorphismError> {
        self.apply_inverse(&HbarSeries::classical(f, self.truncation))
    }
}

/// `S(f ⋆_M g) − (Sf) ⋆ (Sg)` truncated at the engine order.
pub fn equivalence_defect(
    s: &MorphismS,
    star: &dyn StarProduct,
    f: &CJet,
    g: &CJet,
) -> Result<HbarSeries, MorphismError> {
    let k = star.truncation();
    let moyal = MoyalStar::new(s.n(), k);
    let lhs = s.apply(&moyal.star(f, g)?)?;
    let sf = s.apply(&HbarSeries::classical(f, k))?;
    let sg = s.apply(&HbarSeries::classical(g, k))?;
    let rhs = star.star_series(&sf, &sg)?;
    Ok(lhs.try_sub(&rhs)?)
}

/// `S(f ⋆_M g ⋆_M h) − Sf ⋆ Sg ⋆ Sh`.
pub fn triple_equivalence_defect(
    s: &MorphismS,
    star: &dyn StarProduct,
    f: &CJet,
    g: &CJet,
    h: &CJet,
) -> Result<HbarSeries, MorphismError> {
    let k = star.truncation();
    let moyal = MoyalStar::new(s.n(), k);
    let fg = moyal.star(f, g)?;
    let lhs = s.apply(&moyal.star_series(&fg, &HbarSeries::classical(h, k))?)?;
    let sf = s.apply(&HbarSeries::classical(f, k))?;
    let sg = s.apply(&HbarSeries::classical(g, k))?;
    let sh = s.apply(&HbarSeries::classical(h, k))?;
    let rhs = star.star_series(&star.star_series(&sf, &sg)?, &sh)?;
    Ok(lhs.try_sub(&rhs)?)
}

#[cfg(test)]
mod tests;

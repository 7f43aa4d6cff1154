//! Identities that pin down `S₂`: the operators `A^α_k`, the commutator
//! system `[S₂, z^α] = −¼A^α₂`, `[S₂, ∂^α] = −¼A^α₃`, and the contractions
//! of third covariant derivatives of the coordinate functions.

use serde::Serialize;

use super::{MorphismError, MorphismS};
use crate::geometry::{Frame, GeometryError, LiftedConnection};
use crate::jetcalc::{factorial, CJet, Jet};
use crate::starprod::{contract, iterated_covariant_derivative, partner};

fn coordinate(lifted: &LiftedConnection, alpha: usize) -> CJet {
    let order = lifted.conn.get(0, 0, 0).order();
    let z = lifted.point.z();
    Jet::variable(lifted.dim(), order, alpha, z[alpha]).to_complex()
}

fn zero_from(f: &CJet, used: usize) -> CJet {
    f.truncate(f.valid_order().saturating_sub(used)).zero_like()
}

/// `A^α_k f = (1/k!) ω^{μ_1ν_1}⋯ω^{μ_kν_k} (∇̃^k z^α)_{μ…} (∇̃^k f)_{ν…}` for `k ∈ {2, 3}`.
pub fn a_alpha_k(lifted: &LiftedConnection, alpha: usize, k: usize, f: &CJet) -> Result<CJet, MorphismError> {
    if !(2..=3).contains(&k) {
        return Err(MorphismError::UnsupportedOrder(k));
    }
    let n = lifted.n();
    let dz = iterated_covariant_derivative(&coordinate(lifted, alpha), lifted, k)?;
    let df = iterated_covariant_derivative(f, lifted, k)?;
    Ok(match contract(&dz[k], &df[k], n)? {
        Some(t) => t.scale(1.0 / factorial(k)),
        None => zero_from(f, k),
    })
}

/// `−½ Γ̃^α_{μν} ∂^μ∂^ν f − ½ ω^{μα} Γ̃^ν_{μρ} Γ̃^ρ_{νσ} ∂^σ f`.
pub fn a2_closed_form(lifted: &LiftedConnection, alpha: usize, f: &CJet) -> Result<CJet, MorphismError> {
    let n = lifted.n();
    let d = 2 * n;
    let conn = &lifted.conn;
    let mut acc = zero_from(f, 2);
    for mu in 0..d {
        let (pm, sm) = partner(mu, n);
        for nu in 0..d {
            if !conn.is_nonzero(alpha, mu, nu) {
                continue;
            }
            let (pn, sn) = partner(nu, n);
            let t = f.partial(pm)?.partial(pn)?.mul_real(conn.get(alpha, mu, nu))?;
            acc = acc.try_add(&t.scale(-0.5 * sm * sn))?;
        }
    }
    // ω^{μα} is nonzero only for μ = partner(α), where ω^{μα} = −ω^{αμ}.
    let (mu, s_alpha) = partner(alpha, n);
    let w = -s_alpha;
    for sigma in 0..d {
        let mut c = conn.get(0, 0, 0).zero_like();
        for nu in 0..d {
            for rho in 0..d {
                if conn.is_nonzero(nu, mu, rho) && conn.is_nonzero(rho, nu, sigma) {
                    c = c.try_add(&conn.get(nu, mu, rho).try_mul(conn.get(rho, nu, sigma))?)?;
                }
            }
        }
        if c.is_zero() {
            continue;
        }
        let (ps, ss) = partner(sigma, n);
        let t = f.partial(ps)?.mul_real(&c)?;
        acc = acc.try_add(&t.scale(-0.5 * w * ss))?;
    }
    Ok(acc)
}

/// Largest defects of the two contraction identities for `∇̃∇̃∇̃z^α`
/// (first and second slot contracted with ω), with the curvature term included.
pub fn connection_identity_defects(lifted: &LiftedConnection) -> Result<(f64, f64), MorphismError> {
    if lifted.frame != Frame::Darboux {
        return Err(GeometryError::InvalidModel("identities are stated in the Darboux frame".into()).into());
    }
    let n = lifted.n();
    let d = 2 * n;
    let conn = &lifted.conn;
    let riem = lifted.curvature()?;
    let mut da = 0.0f64;
    let mut db = 0.0f64;
    for alpha in 0..d {
        let dz = iterated_covariant_derivative(&coordinate(lifted, alpha), lifted, 3)?;
        let t3 = &dz[3];
        // ω^{αμ}: nonzero for μ = partner(α)
        let (ma, sa) = partner(alpha, n);
        for nu in 0..d {
            // ω^{μν}: nonzero for μ = partner(ν), value −sign(ν)
            let (mn, sn) = partner(nu, n);
            let w_mn = -sn;
            for x in 0..d {
                for y in 0..d {
                    let rhs_a = conn
                        .get(nu, x, y)
                        .partial(ma)?
                        .try_add(riem.get(nu, x, y, ma))?
                        .scale(sa)
                        .to_complex();
                    let lhs_a = t3.get(&[mn, x, y]).scale(w_mn);
                    da = da.max(lhs_a.max_abs_diff(&rhs_a)?);
                    let lhs_b = t3.get(&[x, mn, y]).scale(w_mn);
                    db = db.max(lhs_b.max_abs_diff(&rhs_a)?);
                }
            }
        }
    }
    Ok((da, db))
}

/// `ω^{μ_1ν_1}⋯ω^{μ_kν_k} (∇̃^k z^α)_{μ…} (∇̃^k z^β)_{ν…}` for odd `k ≥ 3`.
pub fn quantum_canonicity_defect(
    lifted: &LiftedConnection,
    alpha: usize,
    beta: usize,
    k: usize,
) -> Result<CJet, MorphismError> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(MorphismError::UnsupportedOrder(k));
    }
    let n = lifted.n();
    let za = iterated_covariant_derivative(&coordinate(lifted, alpha), lifted, k)?;
    let zb = iterated_covariant_derivative(&coordinate(lifted, beta), lifted, k)?;
    Ok(match contract(&za[k], &zb[k], n)? {
        Some(t) => t,
        None => zero_from(&coordinate(lifted, alpha), k),
    })
}

/// [`quantum_canonicity_defect`] for every pair `(α, β)`, sharing the derivatives.
pub fn quantum_canonicity_matrix(lifted: &LiftedConnection, k: usize) -> Result<Vec<Vec<CJet>>, MorphismError> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(MorphismError::UnsupportedOrder(k));
    }
    let n = lifted.n();
    let derivs = (0..2 * n)
        .map(|a| Ok(iterated_covariant_derivative(&coordinate(lifted, a), lifted, k)?.swap_remove(k)))
        .collect::<Result<Vec<_>, MorphismError>>()?;
    let mut out = Vec::with_capacity(2 * n);
    for (alpha, za) in derivs.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * n);
        for zb in &derivs {
            row.push(match contract(za, zb, n)? {
                Some(t) => t,
                None => zero_from(&coordinate(lifted, alpha), k),
            });
        }
        out.push(row);
    }
    Ok(out)
}

/// Largest relative defects of the two commutator identities over all `α`
/// and the supplied test jets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub position: f64,
    pub derivative: f64,
}

pub fn verify_commutator_identities(s: &MorphismS, lifted: &LiftedConnection, tests: &[CJet]) -> Result<CommutatorReport, MorphismError> {
    let n = lifted.n();
    let d = 2 * n;
    let s2 = s.s2();
    let mut rep = CommutatorReport {
        position: 0.0,
        derivative: 0.0,
    };
    for f in tests {
        let s2f = s2.apply_to(f)?;
        for alpha in 0..d {
            let z = coordinate(lifted, alpha);
            let lhs = s2.apply_to(&z.try_mul(f)?)?.try_sub(&z.try_mul(&s2f)?)?;
            let rhs = a_alpha_k(lifted, alpha, 2, f)?.scale(-0.25);
            rep.position = rep.position.max(lhs.relative_defect(&rhs)?);

            let (v, sign) = partner(alpha, n);
            let lhs = s2
                .apply_to(&f.partial(v)?)?
                .try_sub(&s2f.partial(v)?)?
                .scale(sign);
            let rhs = a_alpha_k(lifted, alpha, 3, f)?.scale(-0.25);
            rep.derivative = rep.derivative.max(lhs.relative_defect(&rhs)?);
        }
    }
    Ok(rep)
}

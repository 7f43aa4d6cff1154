use crate::jetcalc::Jet;

use super::connection::{riemann, Connection, ConnectionField, CurvatureSign, Riemann};
use super::phase::{omega_lower, omega_upper, PhasePoint, VectorField};
use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Coordinate frame `{∂_{x^i}, ∂_{p_i}}`.
    Darboux,
    /// Frame `{D_i = ∂_{x^i} + Γ^m_{in} p_m ∂_{p_n}, D^i = ∂_{p_i}}`.
    Adopted,
}

/// Base connections with curvature below this are treated as flat.
pub const FLATNESS_TOLERANCE: f64 = 1e-9;

/// Symplectic connection on phase space induced by a base connection.
/// Index `a < N` is `x^a`; index `N + i` is `p_i`.
#[derive(Debug, Clone)]
pub struct LiftedConnection {
    pub frame: Frame,
    pub point: PhasePoint,
    pub conn: Connection,
    /// True when the base connection is flat, so the lift is flat as well.
    pub base_flat: bool,
}

struct Embedded {
    n: usize,
    gamma: Connection,
    /// dgamma[(l, i, j, k)] = ∂_k Γ^l_{ij}
    dgamma: Vec<Jet>,
    riemann: Riemann,
    p: Vec<Jet>,
}

impl Embedded {
    fn new(cf: &ConnectionField, point: &PhasePoint) -> Result<Self, GeometryError> {
        let n = cf.dimension();
        if point.n() != n || point.x.as_slice() != cf.point() {
            return Err(GeometryError::PointDimension {
                expected: n,
                found: point.n(),
            });
        }
        let order = cf.gamma.get(0, 0, 0).order();
        let mut dgamma = Vec::with_capacity(n.pow(4));
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        dgamma.push(cf.gamma.get(l, i, j).partial(k)?.embed(2 * n, 0));
                    }
                }
            }
        }
        Ok(Embedded {
            n,
            gamma: cf.gamma.embed(2 * n, 0),
            dgamma,
            riemann: cf.riemann.embed(2 * n, 0),
            p: (0..n).map(|l| point.momentum_jet(l, order)).collect(),
        })
    }

    fn g(&self, a: usize, b: usize, c: usize) -> &Jet {
        self.gamma.get(a, b, c)
    }

    fn dg(&self, l: usize, i: usize, j: usize, k: usize) -> &Jet {
        let n = self.n;
        &self.dgamma[((l * n + i) * n + j) * n + k]
    }

    fn r(&self, l: usize, i: usize, j: usize, k: usize) -> &Jet {
        self.riemann.get(l, i, j, k)
    }

    /// `p_l X^l` summed.
    fn contract_p(&self, mut x: impl FnMut(usize) -> Jet) -> Jet {
        let mut acc = self.p[0].zero_like();
        for l in 0..self.n {
            let t = x(l);
            if !t.is_zero() {
                acc = &acc + &(&self.p[l] * &t);
            }
        }
        acc
    }

    fn zero(&self) -> Jet {
        self.dgamma[0].zero_like()
    }

    /// Γ̃^{ī}_{jk} in the Darboux frame; curvature terms included when `curved`.
    fn darboux_pxx(&self, i: usize, j: usize, k: usize, curved: bool) -> Jet {
        self.contract_p(|l| {
            let mut t = self.zero();
            for r in 0..self.n {
                t = &t + &(self.g(r, j, k) * self.g(l, r, i));
                t = &t + &(self.g(r, i, k) * self.g(l, r, j));
            }
            t = &t - self.dg(l, i, j, k);
            if curved {
                let rr = self.r(l, i, j, k) + self.r(l, j, i, k);
                t = &t - &rr.scale(1.0 / 3.0);
            }
            t
        })
    }

    fn build(&self, f: impl Fn(usize, usize, usize) -> Option<Jet>) -> Connection {
        let zero = self.zero();
        Connection::from_fn(2 * self.n, |a, b, c| f(a, b, c).unwrap_or_else(|| zero.clone()))
    }
}

fn darboux(e: &Embedded, curved: bool) -> Connection {
    let n = e.n;
    e.build(|a, b, c| {
        let bar = |x: usize| x >= n;
        match (bar(a), bar(b), bar(c)) {
            (false, false, false) => Some(e.g(a, b, c).clone()),
            (true, true, false) => Some(-e.g(b - n, a - n, c)),
            (true, false, true) => Some(-e.g(c - n, b, a - n)),
            (true, false, false) => Some(e.darboux_pxx(a - n, b, c, curved)),
            _ => None,
        }
    })
}

fn adopted(e: &Embedded) -> Connection {
    let n = e.n;
    e.build(|a, b, c| {
        let bar = |x: usize| x >= n;
        match (bar(a), bar(b), bar(c)) {
            (false, false, false) => Some(e.g(a, b, c).clone()),
            (true, true, false) => Some(-e.g(b - n, a - n, c)),
            (true, false, false) => {
                let (i, j, k) = (a - n, b, c);
                Some(
                    e.contract_p(|l| e.r(l, i, j, k) + e.r(l, j, i, k))
                        .scale(-1.0 / 3.0),
                )
            }
            _ => None,
        }
    })
}

/// Lift of a flat Levi-Civita connection in the Darboux frame (no curvature terms).
pub fn lift_flat(cf: &ConnectionField, point: &PhasePoint) -> Result<LiftedConnection, GeometryError> {
    let norm = cf.curvature_norm();
    if norm > FLATNESS_TOLERANCE {
        return Err(GeometryError::NonFlat(norm));
    }
    let e = Embedded::new(cf, point)?;
    Ok(LiftedConnection {
        frame: Frame::Darboux,
        point: point.clone(),
        conn: darboux(&e, false),
        base_flat: true,
    })
}

/// Lift of an arbitrary Levi-Civita connection, in the requested frame.
pub fn lift_general(
    cf: &ConnectionField,
    point: &PhasePoint,
    frame: Frame,
) -> Result<LiftedConnection, GeometryError> {
    let e = Embedded::new(cf, point)?;
    let conn = match frame {
        Frame::Darboux => darboux(&e, true),
        Frame::Adopted => adopted(&e),
    };
    Ok(LiftedConnection {
        frame,
        point: point.clone(),
        conn,
        base_flat: cf.curvature_norm() <= FLATNESS_TOLERANCE,
    })
}

/// The adopted frame `E_a` and its dual coframe `θ^a`, as jets in phase coordinates.
#[derive(Debug, Clone)]
pub struct AdoptedFrame {
    pub n: usize,
    /// `vectors[a]`: `D_a` for `a < N`, `D^{a−N}` otherwise.
    pub vectors: Vec<VectorField>,
    /// `coframe[a][μ] = θ^a_μ`.
    pub coframe: Vec<Vec<Jet>>,
}

pub fn adopted_frame(cf: &ConnectionField, point: &PhasePoint) -> Result<AdoptedFrame, GeometryError> {
    let e = Embedded::new(cf, point)?;
    let n = e.n;
    let order = e.p[0].order();
    let one = |nonzero: bool| Jet::constant(2 * n, order, if nonzero { 1.0 } else { 0.0 });
    // Γ^m_{kn} p_m
    let gp = |k: usize, j: usize| e.contract_p(|m| e.g(m, k, j).clone());
    let mut vectors = Vec::with_capacity(2 * n);
    for k in 0..n {
        let comps = (0..2 * n)
            .map(|mu| if mu < n { one(mu == k) } else { gp(k, mu - n) })
            .collect();
        vectors.push(VectorField { comps });
    }
    for k in 0..n {
        vectors.push(VectorField::coordinate(2 * n, order, n + k));
    }
    let mut coframe = Vec::with_capacity(2 * n);
    for i in 0..n {
        coframe.push((0..2 * n).map(|mu| one(mu == i)).collect());
    }
    for i in 0..n {
        coframe.push(
            (0..2 * n)
                .map(|mu| if mu < n { -&gp(mu, i) } else { one(mu == n + i) })
                .collect(),
        );
    }
    Ok(AdoptedFrame {
        n,
        vectors,
        coframe,
    })
}

impl AdoptedFrame {
    /// Structure constants `[E_c, E_b] = C^a_{cb} E_a`, indexed `[a][c][b]`.
    pub fn structure_constants(&self) -> Result<Vec<Vec<Vec<Jet>>>, GeometryError> {
        let d = 2 * self.n;
        let mut brackets = Vec::with_capacity(d * d);
        for c in 0..d {
            for b in 0..d {
                brackets.push(self.vectors[c].bracket(&self.vectors[b])?);
            }
        }
        let mut out = vec![vec![Vec::with_capacity(d); d]; d];
        for (a, row) in out.iter_mut().enumerate() {
            for (c, col) in row.iter_mut().enumerate() {
                for b in 0..d {
                    col.push(self.project(a, &brackets[c * d + b].comps)?);
                }
            }
        }
        Ok(out)
    }

    /// `θ^a_μ v^μ`.
    fn project(&self, a: usize, v: &[Jet]) -> Result<Jet, GeometryError> {
        let mut acc = v[0].zero_like();
        for (mu, comp) in v.iter().enumerate() {
            if !comp.is_zero() && !self.coframe[a][mu].is_zero() {
                acc = acc.try_add(&comp.try_mul(&self.coframe[a][mu])?)?;
            }
        }
        Ok(acc)
    }
}

/// Express a Darboux-frame connection in the adopted frame:
/// `Γ^a_{bc} = θ^a_μ (E_c^λ ∂_λ E_b^μ + E_c^λ E_b^ν Γ̃^μ_{νλ})`.
pub fn frame_to_adopted(
    lifted: &LiftedConnection,
    frame: &AdoptedFrame,
) -> Result<LiftedConnection, GeometryError> {
    assert_eq!(lifted.frame, Frame::Darboux, "input must be in the Darboux frame");
    let d = 2 * frame.n;
    let gt = &lifted.conn;
    let mut comps: Vec<Jet> = Vec::with_capacity(d * d * d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let eb = &frame.vectors[b].comps;
                let ec = &frame.vectors[c].comps;
                let mut v: Vec<Jet> = Vec::with_capacity(d);
                for mu in 0..d {
                    let mut t = frame.vectors[c].apply(&eb[mu])?;
                    for nu in 0..d {
                        if eb[nu].is_zero() {
                            continue;
                        }
                        for la in 0..d {
                            if ec[la].is_zero() || !gt.is_nonzero(mu, nu, la) {
                                continue;
                            }
                            t = &t + &(&(&ec[la] * &eb[nu]) * gt.get(mu, nu, la));
                        }
                    }
                    v.push(t);
                }
                comps.push(frame.project(a, &v)?);
            }
        }
    }
    let mut it = comps.into_iter();
    Ok(LiftedConnection {
        frame: Frame::Adopted,
        point: lifted.point.clone(),
        conn: Connection::from_fn(d, |_, _, _| it.next().expect("d³ components")),
        base_flat: lifted.base_flat,
    })
}

impl LiftedConnection {
    pub fn n(&self) -> usize {
        self.point.n()
    }

    pub fn dim(&self) -> usize {
        2 * self.n()
    }

    /// Torsion defect. In the adopted frame the structure constants of the
    /// frame enter: `T^a_{bc} = Γ^a_{bc} − Γ^a_{cb} − C^a_{cb}`.
    pub fn torsion_defect(&self, frame: Option<&AdoptedFrame>) -> Result<f64, GeometryError> {
        match self.frame {
            Frame::Darboux => self.conn.asymmetry(),
            Frame::Adopted => {
                let frame = frame.ok_or_else(|| {
                    GeometryError::InvalidModel("adopted-frame torsion needs the frame".into())
                })?;
                let cs = frame.structure_constants()?;
                let d = self.dim();
                let mut m = 0.0f64;
                for a in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            let t = self.conn.get(a, b, c).try_sub(self.conn.get(a, c, b))?;
                            m = m.max(t.max_abs_diff(&cs[a][c][b])?);
                        }
                    }
                }
                Ok(m)
            }
        }
    }

    /// Defects of `ω^{δβ}Γ^α_{βγ} = ω^{αβ}Γ^δ_{βγ}` and
    /// `ω_{δα}Γ^α_{βγ} = ω_{βα}Γ^α_{δγ}` (constant ω in both supported frames).
    pub fn symplecticity_defects(&self) -> Result<(f64, f64), GeometryError> {
        let n = self.n();
        let d = 2 * n;
        let (wu, wl) = (omega_upper(n), omega_lower(n));
        // ω is a signed permutation: partner(a) and its sign.
        let partner = |a: usize| if a < n { a + n } else { a - n };
        let mut da = 0.0f64;
        let mut db = 0.0f64;
        for x in 0..d {
            for y in 0..d {
                for g in 0..d {
                    // (24a) with δ = x, α = y
                    let lhs = self.conn.get(y, partner(x), g).scale(wu[x][partner(x)]);
                    let rhs = self.conn.get(x, partner(y), g).scale(wu[y][partner(y)]);
                    da = da.max(lhs.max_abs_diff(&rhs)?);
                    // (24b) with δ = x, β = y
                    let lhs = self.conn.get(partner(x), y, g).scale(wl[x][partner(x)]);
                    let rhs = self.conn.get(partner(y), x, g).scale(wl[y][partner(y)]);
                    db = db.max(lhs.max_abs_diff(&rhs)?);
                }
            }
        }
        Ok((da, db))
    }

    /// `Γ̃_{αβγ} = ω_{αδ} Γ̃^δ_{βγ}`, flattened `[(α·d + β)·d + γ]`.
    pub fn lowered(&self) -> Vec<Jet> {
        let n = self.n();
        let d = 2 * n;
        let wl = omega_lower(n);
        let mut out = Vec::with_capacity(d * d * d);
        for a in 0..d {
            let delta = if a < n { a + n } else { a - n };
            for b in 0..d {
                for c in 0..d {
                    out.push(self.conn.get(delta, b, c).scale(wl[a][delta]));
                }
            }
        }
        out
    }

    /// Largest deviation of `Γ̃_{αβγ}` from total symmetry.
    pub fn total_symmetry_defect(&self) -> Result<f64, GeometryError> {
        let d = self.dim();
        let low = self.lowered();
        let at = |a: usize, b: usize, c: usize| &low[(a * d + b) * d + c];
        let mut m = 0.0f64;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    m = m.max(at(a, b, c).max_abs_diff(at(b, a, c))?);
                    m = m.max(at(a, b, c).max_abs_diff(at(a, c, b))?);
                }
            }
        }
        Ok(m)
    }

    /// Phase-space curvature `R̃^α_{βγδ}` (Darboux frame only).
    pub fn curvature(&self) -> Result<Riemann, GeometryError> {
        if self.frame != Frame::Darboux {
            return Err(GeometryError::InvalidModel(
                "phase-space curvature is computed in the Darboux frame".into(),
            ));
        }
        riemann(&self.conn, CurvatureSign::Standard)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog;

    fn setup(name: &str, x: &[f64], p: &[f64], order: usize) -> (ConnectionField, PhasePoint) {
        let model = catalog(name).unwrap();
        let cf = ConnectionField::new(&model, x, order).unwrap();
        (cf, PhasePoint::new(x.to_vec(), p.to_vec()))
    }

    #[test]
    fn cartesian_lift_vanishes() {
        let (cf, pt) = setup("euclidean-cartesian", &[0.1, 0.2], &[0.3, 0.4], 4);
        let l = lift_flat(&cf, &pt).unwrap();
        assert_eq!(l.conn.max_abs(), 0.0);
    }

    #[test]
    fn flat_lift_refuses_curved_base() {
        let (cf, pt) = setup("unit-sphere", &[1.0, 0.2], &[0.3, 0.4], 4);
        assert!(matches!(lift_flat(&cf, &pt), Err(GeometryError::NonFlat(_))));
    }

    #[test]
    fn polar_flat_lift_is_symmetric_symplectic_and_flat() {
        let (cf, pt) = setup("euclidean-polar", &[2.0, 0.5], &[0.3, -0.5], 6);
        let l = lift_flat(&cf, &pt).unwrap();
        assert!(l.torsion_defect(None).unwrap() < 1e-12);
        let (a, b) = l.symplecticity_defects().unwrap();
        assert!(a < 1e-12 && b < 1e-12, "{a} {b}");
        assert!(l.total_symmetry_defect().unwrap() < 1e-12);
        assert!(l.curvature().unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn sphere_lifts_agree_between_frames() {
        let (cf, pt) = setup("unit-sphere", &[1.1, 0.3], &[0.4, -0.7], 6);
        let dar = lift_general(&cf, &pt, Frame::Darboux).unwrap();
        let ado = lift_general(&cf, &pt, Frame::Adopted).unwrap();
        let frame = adopted_frame(&cf, &pt).unwrap();
        assert!(dar.torsion_defect(None).unwrap() < 1e-12);
        assert!(ado.torsion_defect(Some(&frame)).unwrap() < 1e-12);
        let (a, b) = ado.symplecticity_defects().unwrap();
        assert!(a < 1e-12 && b < 1e-12);
        let moved = frame_to_adopted(&dar, &frame).unwrap();
        let diff = moved.conn.max_abs_diff(&ado.conn).unwrap();
        assert!(diff < 1e-10, "{diff}");
        assert!(dar.curvature().unwrap().max_value() > 0.1);
    }
}

use crate::exprlang::{Expr, ExprError};
use crate::jetcalc::{Jet, Scalar};

use super::model::MetricModel;
use super::GeometryError;

/// A point `(x, p)` of `T*Q`; phase coordinates are `z^i = x^i`, `z^{N+i} = p_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, p: Vec<f64>) -> Self {
        assert_eq!(x.len(), p.len(), "position and momentum dimensions differ");
        PhasePoint { x, p }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn z(&self) -> Vec<f64> {
        self.x.iter().chain(&self.p).copied().collect()
    }

    /// Coordinate jets `z^α` in `2N` variables.
    pub fn coordinate_jets(&self, order: usize) -> Vec<Jet> {
        let z = self.z();
        (0..z.len())
            .map(|a| Jet::variable(z.len(), order, a, z[a]))
            .collect()
    }

    /// Momentum jet `p_l`.
    pub fn momentum_jet(&self, l: usize, order: usize) -> Jet {
        let n = self.n();
        Jet::variable(2 * n, order, n + l, self.p[l])
    }

    /// Evaluate an expression parsed against [`phase_variable_names`].
    pub fn eval_expr(&self, e: &Expr, order: usize) -> Result<Jet, ExprError> {
        let mut vars = self.coordinate_jets(order);
        let n = self.n();
        vars.extend_from_within(n..2 * n);
        e.eval_with(&vars)
    }
}

/// Names usable in phase-space expressions: the chart variables, then
/// `p1 … pN`, then the aliases `p_<variable>`.
pub fn phase_variable_names(model: &MetricModel) -> Vec<String> {
    let n = model.dimension();
    let mut names = model.variables.clone();
    names.extend((1..=n).map(|i| format!("p{i}")));
    names.extend(model.variables.iter().map(|v| format!("p_{v}")));
    names
}

/// `ω^{αβ}`: `ω^{i,N+i} = 1`, `ω^{N+i,i} = −1`, so `{f,g} = ω^{αβ}∂_αf ∂_βg`.
pub fn omega_upper(n: usize) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        w[i][n + i] = 1.0;
        w[n + i][i] = -1.0;
    }
    w
}

/// `ω_{αβ}`, the inverse in the sense `ω^{αδ}ω_{δβ} = δ^α_β`.
pub fn omega_lower(n: usize) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        w[i][n + i] = -1.0;
        w[n + i][i] = 1.0;
    }
    w
}

/// Canonical Poisson bracket of phase jets in `2n` variables.
pub fn poisson_bracket<S: Scalar>(f: &Jet<S>, g: &Jet<S>, n: usize) -> Result<Jet<S>, GeometryError> {
    let mut acc: Option<Jet<S>> = None;
    for i in 0..n {
        let t = f.partial(i)?.try_mul(&g.partial(n + i)?)?;
        let u = f.partial(n + i)?.try_mul(&g.partial(i)?)?;
        let d = t.try_sub(&u)?;
        acc = Some(match acc {
            None => d,
            Some(a) => a.try_add(&d)?,
        });
    }
    Ok(acc.expect("n > 0"))
}

/// First-order operator `X = X^μ ∂_μ` with real jet coefficients.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub comps: Vec<Jet>,
}

impl VectorField {
    /// Coordinate field `∂_var` in `nvars` variables.
    pub fn coordinate(nvars: usize, order: usize, var: usize) -> Self {
        VectorField {
            comps: (0..nvars)
                .map(|m| Jet::constant(nvars, order, if m == var { 1.0 } else { 0.0 }))
                .collect(),
        }
    }

    pub fn apply<S: Scalar>(&self, f: &Jet<S>) -> Result<Jet<S>, GeometryError> {
        let mut acc: Option<Jet<S>> = None;
        for (mu, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = f.partial(mu)?.mul_real(c)?;
            acc = Some(match acc {
                None => t,
                Some(a) => a.try_add(&t)?,
            });
        }
        Ok(match acc {
            Some(a) => a,
            None => f.partial(0)?.zero_like(),
        })
    }

    /// `[X, Y]^μ = X(Y^μ) − Y(X^μ)`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, GeometryError> {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| Ok(self.apply(y)?.try_sub(&other.apply(x)?)?))
            .collect::<Result<_, GeometryError>>()?;
        Ok(VectorField { comps })
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_matrices_are_inverse() {
        let (u, l) = (omega_upper(3), omega_lower(3));
        for a in 0..6 {
            for b in 0..6 {
                let s: f64 = (0..6).map(|d| u[a][d] * l[d][b]).sum();
                assert_eq!(s, if a == b { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn canonical_brackets() {
        let pt = PhasePoint::new(vec![0.3, 0.1], vec![-0.2, 0.5]);
        let z = pt.coordinate_jets(3);
        assert_eq!(poisson_bracket(&z[0], &z[2], 2).unwrap().value(), 1.0);
        assert_eq!(poisson_bracket(&z[2], &z[0], 2).unwrap().value(), -1.0);
        assert_eq!(poisson_bracket(&z[0], &z[3], 2).unwrap().value(), 0.0);
        assert_eq!(poisson_bracket(&z[0], &z[1], 2).unwrap().value(), 0.0);
    }

    #[test]
    fn coordinate_fields_commute() {
        let x = VectorField::coordinate(2, 3, 0);
        let y = VectorField::coordinate(2, 3, 1);
        assert_eq!(x.bracket(&y).unwrap().max_abs(), 0.0);
    }
}

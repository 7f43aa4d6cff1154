use crate::jetcalc::{Jet, JetError};

use super::{BinOp, Expr, ExprError, ExprErrorKind, ExprKind, Func};

impl Expr {
    /// Taylor expansion at `point` (one coordinate per declared variable).
    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet, ExprError> {
        let vars: Vec<Jet> = (0..point.len())
            .map(|i| Jet::variable(point.len(), order, i, point[i]))
            .collect();
        self.eval_with(&vars)
    }

    /// Plain numeric value at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<f64, ExprError> {
        Ok(self.eval_jet(point, 0)?.value())
    }

    /// Evaluate with arbitrary jets substituted for the variables; this is
    /// how expressions are pulled back through maps.
    pub fn eval_with(&self, vars: &[Jet]) -> Result<Jet, ExprError> {
        let template = vars.first().ok_or_else(|| {
            ExprError::new(
                ExprErrorKind::Dimension,
                self.span,
                "expression evaluated without any variables",
            )
        })?;
        self.eval_inner(vars, template)
    }

    fn eval_inner(&self, vars: &[Jet], template: &Jet) -> Result<Jet, ExprError> {
        let jet_err = |e: JetError, msg: &str| {
            let kind = match e {
                JetError::ZeroConstantTerm | JetError::NonPositive(_) => ExprErrorKind::Domain,
                _ => ExprErrorKind::Dimension,
            };
            ExprError::new(kind, self.span, format!("{msg}: {e}"))
        };
        match &self.kind {
            ExprKind::Num(v) => Ok(template.constant_like(*v)),
            ExprKind::Var(i, name) => vars.get(*i).cloned().ok_or_else(|| {
                ExprError::new(
                    ExprErrorKind::Dimension,
                    self.span,
                    format!("no value supplied for variable '{name}'"),
                )
            }),
            ExprKind::Neg(a) => Ok(-&a.eval_inner(vars, template)?),
            ExprKind::Binary(op, l, r) => {
                let a = l.eval_inner(vars, template)?;
                let b = r.eval_inner(vars, template)?;
                let dim = |e: JetError| jet_err(e, "incompatible operands");
                match op {
                    BinOp::Add => a.try_add(&b).map_err(dim),
                    BinOp::Sub => a.try_sub(&b).map_err(dim),
                    BinOp::Mul => a.try_mul(&b).map_err(dim),
                    BinOp::Div => {
                        let inv = b.inverse().map_err(|e| jet_err(e, "division by zero"))?;
                        a.try_mul(&inv).map_err(dim)
                    }
                    BinOp::Pow => power(&a, &b).map_err(|e| jet_err(e, "invalid power")),
                }
            }
            ExprKind::Call(func, arg) => {
                let a = arg.eval_inner(vars, template)?;
                match func {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Tan => a.tan().map_err(|e| jet_err(e, "tan at a pole")),
                    Func::Exp => Ok(a.exp()),
                    Func::Ln => a.ln().map_err(|e| jet_err(e, "ln of a non-positive value")),
                    Func::Sqrt => a.sqrt().map_err(|e| jet_err(e, "sqrt of a non-positive value")),
                }
            }
        }
    }
}

fn power(base: &Jet, exponent: &Jet) -> Result<Jet, JetError> {
    if exponent.is_constant() {
        let e = exponent.value();
        if e.fract() == 0.0 && e.abs() < 1e9 {
            return base.powi(e as i64);
        }
        return base.powf(e);
    }
    // a^b = exp(b ln a) with a positive base.
    Ok((&base.ln()? * exponent).exp())
}

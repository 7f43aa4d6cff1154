use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::geometry::MetricJets;
use crate::jetcalc::{CJet, DiffOp, JetError, MultiIndex};

/// Configuration-space operator with complex jet coefficients.
pub type ConfigOp = DiffOp<Complex64>;

/// `Σ_k ħ^k A_k`, each `A_k` in normal form.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    n: usize,
    order: usize,
    parts: BTreeMap<usize, ConfigOp>,
}

/// One coefficient of an operator comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientDefect {
    pub hbar_power: usize,
    /// Derivative multi-index, e.g. `"1,0"` for `∂_1`.
    pub derivative: String,
    /// `|a − b|` maximised over the Taylor coefficients of the coefficient jets.
    pub defect: f64,
    pub lhs_value: [f64; 2],
    pub rhs_value: [f64; 2],
}

pub fn multi_index_key(m: &MultiIndex) -> String {
    m.exponents()
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl DiffOperator {
    pub fn zero(n: usize, order: usize) -> Self {
        DiffOperator {
            n,
            order,
            parts: BTreeMap::new(),
        }
    }

    /// `ħ^power · op`
    pub fn graded(power: usize, op: ConfigOp) -> Self {
        let mut out = Self::zero(op.nvars(), op.order());
        if !op.is_zero() {
            out.parts.insert(power, op);
        }
        out
    }

    pub fn identity(n: usize, order: usize) -> Self {
        Self::graded(0, ConfigOp::identity(n, order))
    }

    pub fn multiplication(c: CJet) -> Self {
        Self::graded(0, ConfigOp::multiplication(c))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn parts(&self) -> &BTreeMap<usize, ConfigOp> {
        &self.parts
    }

    pub fn part(&self, power: usize) -> Option<&ConfigOp> {
        self.parts.get(&power)
    }

    pub fn hbar_powers(&self) -> Vec<usize> {
        self.parts.keys().copied().collect()
    }

    pub fn coefficient(&self, power: usize, alpha: &MultiIndex) -> Option<&CJet> {
        self.parts.get(&power).and_then(|p| p.coeff(alpha))
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn derivative_order(&self) -> usize {
        self.parts.values().map(ConfigOp::derivative_order).max().unwrap_or(0)
    }

    fn check(&self, other: &Self) -> Result<(), JetError> {
        if self.n != other.n {
            return Err(JetError::DimensionMismatch(self.n, other.n));
        }
        if self.order != other.order {
            return Err(JetError::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    fn insert_add(&mut self, power: usize, op: ConfigOp) -> Result<(), JetError> {
        let merged = match self.parts.remove(&power) {
            Some(e) => e.try_add(&op)?,
            None => op,
        };
        if !merged.is_zero() {
            self.parts.insert(power, merged);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let mut out = self.clone();
        for (&k, op) in &other.parts {
            out.insert_add(k, op.clone())?;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, JetError> {
        self.try_add(&other.scale(-1.0))
    }

    pub fn scale(&self, r: f64) -> Self {
        self.map(|op| op.scale(r))
    }

    pub fn scale_by(&self, c: Complex64) -> Self {
        self.map(|op| op.scale_by(c))
    }

    fn map(&self, f: impl Fn(&ConfigOp) -> ConfigOp) -> Self {
        let mut out = Self::zero(self.n, self.order);
        for (&k, op) in &self.parts {
            let m = f(op);
            if !m.is_zero() {
                out.parts.insert(k, m);
            }
        }
        out
    }

    /// Multiply every part by `ħ^shift`.
    pub fn shift_hbar(&self, shift: usize) -> Self {
        DiffOperator {
            n: self.n,
            order: self.order,
            parts: self.parts.iter().map(|(&k, op)| (k + shift, op.clone())).collect(),
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let mut out = Self::zero(self.n, self.order);
        for (&i, a) in &self.parts {
            for (&j, b) in &other.parts {
                out.insert_add(i + j, a.compose(b)?)?;
            }
        }
        Ok(out)
    }

    /// Action on a wavefunction jet, one jet per ħ power.
    pub fn apply(&self, psi: &CJet) -> Result<BTreeMap<usize, CJet>, JetError> {
        self.parts
            .iter()
            .map(|(&k, op)| Ok((k, op.apply(psi)?)))
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.parts.values().map(ConfigOp::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, JetError> {
        self.check(other)?;
        let zero = ConfigOp::zero(self.n, self.order);
        let mut m = 0.0f64;
        for k in self.parts.keys().chain(other.parts.keys()) {
            let a = self.parts.get(k).unwrap_or(&zero);
            let b = other.parts.get(k).unwrap_or(&zero);
            m = m.max(a.max_abs_diff(b)?);
        }
        Ok(m)
    }

    /// Coefficient-wise defect scaled by `max(1, |A|, |B|)`.
    pub fn relative_defect(&self, other: &Self) -> Result<f64, JetError> {
        Ok(self.max_abs_diff(other)? / 1f64.max(self.max_abs()).max(other.max_abs()))
    }

    /// Like [`relative_defect`](Self::relative_defect) but on coefficient values at the
    /// expansion point only, ignoring higher Taylor coefficients.
    pub fn value_defect(&self, other: &Self) -> Result<f64, JetError> {
        let defects = self.coefficient_defects(other)?;
        let mut diff = 0.0f64;
        let mut scale = 1.0f64;
        for c in &defects {
            let d = (c.lhs_value[0] - c.rhs_value[0]).hypot(c.lhs_value[1] - c.rhs_value[1]);
            diff = diff.max(d);
            scale = scale
                .max(c.lhs_value[0].hypot(c.lhs_value[1]))
                .max(c.rhs_value[0].hypot(c.rhs_value[1]));
        }
        Ok(diff / scale)
    }

    /// Per-coefficient comparison over the union of terms, in stable order.
    pub fn coefficient_defects(&self, other: &Self) -> Result<Vec<CoefficientDefect>, JetError> {
        self.check(other)?;
        let mut keys: Vec<(usize, MultiIndex)> = Vec::new();
        for op in [self, other] {
            for (&k, part) in &op.parts {
                for alpha in part.terms().keys() {
                    keys.push((k, alpha.clone()));
                }
            }
        }
        keys.sort();
        keys.dedup();
        let mut out = Vec::with_capacity(keys.len());
        for (k, alpha) in keys {
            let a = self.coefficient(k, &alpha);
            let b = other.coefficient(k, &alpha);
            let defect = match (a, b) {
                (Some(a), Some(b)) => a.max_abs_diff(b)?,
                (Some(a), None) => a.max_abs(),
                (None, Some(b)) => b.max_abs(),
                (None, None) => 0.0,
            };
            let val = |c: Option<&CJet>| c.map(|c| [c.value().re, c.value().im]).unwrap_or([0.0, 0.0]);
            out.push(CoefficientDefect {
                hbar_power: k,
                derivative: multi_index_key(&alpha),
                defect,
                lhs_value: val(a),
                rhs_value: val(b),
            });
        }
        Ok(out)
    }
}

/// Formal adjoint with respect to `∫ φ̄ ψ √|g| dx`:
/// `c ∂^α ↦ (−1)^{|α|} |g|^{−1/2} ∂^α (|g|^{1/2} c̄ ·)`.
pub fn formal_adjoint(a: &DiffOperator, metric: &MetricJets) -> Result<DiffOperator, JetError> {
    let n = a.n();
    let order = a.order();
    let mu = metric.sqrt_det.to_complex();
    let mu_inv = mu.inverse()?;
    let mut out = DiffOperator::zero(n, order);
    for (&k, part) in a.parts() {
        let mut acc = ConfigOp::zero(n, order);
        for (alpha, c) in part.terms() {
            let inner = ConfigOp::multiplication(mu.try_mul(&c.conj())?);
            let d = ConfigOp::term(CJet::constant(n, order, Complex64::new(1.0, 0.0)), alpha.clone());
            let sign = if alpha.degree() % 2 == 0 { 1.0 } else { -1.0 };
            acc = acc.try_add(&d.compose(&inner)?.premultiply(&mu_inv)?.scale(sign))?;
        }
        out = out.try_add(&DiffOperator::graded(k, acc))?;
    }
    Ok(out)
}

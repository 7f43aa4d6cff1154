use std::collections::BTreeMap;

use super::{Jet, JetError, MultiIndex, Scalar};

/// Linear differential operator `Σ_α c_α(z) ∂^α` in normal form (all
/// derivatives to the right of their coefficients).
#[derive(Debug, Clone)]
pub struct DiffOp<S: Scalar = f64> {
    nvars: usize,
    order: usize,
    terms: BTreeMap<MultiIndex, Jet<S>>,
}

impl<S: Scalar> DiffOp<S> {
    pub fn zero(nvars: usize, order: usize) -> Self {
        DiffOp {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(nvars: usize, order: usize) -> Self {
        Self::multiplication(Jet::constant(nvars, order, S::ONE))
    }

    pub fn multiplication(c: Jet<S>) -> Self {
        Self::term(c, MultiIndex::zero(0))
    }

    /// Single term `c ∂^α`. A zero-length `α` means "no derivative".
    pub fn term(c: Jet<S>, alpha: MultiIndex) -> Self {
        let alpha = if alpha.nvars() == 0 {
            MultiIndex::zero(c.nvars())
        } else {
            alpha
        };
        let mut op = Self::zero(c.nvars(), c.order());
        if !c.is_zero() {
            op.terms.insert(alpha, c);
        }
        op
    }

    pub fn partial(nvars: usize, order: usize, var: usize) -> Self {
        Self::term(Jet::constant(nvars, order, S::ONE), MultiIndex::unit(nvars, var))
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Jet<S>> {
        &self.terms
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Option<&Jet<S>> {
        self.terms.get(alpha)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest derivative order present.
    pub fn derivative_order(&self) -> usize {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn valid_order(&self) -> usize {
        self.terms.values().map(Jet::valid_order).min().unwrap_or(self.order)
    }

    fn insert_add(&mut self, alpha: MultiIndex, c: Jet<S>) -> Result<(), JetError> {
        if c.is_zero() {
            return Ok(());
        }
        match self.terms.get_mut(&alpha) {
            Some(e) => {
                *e = e.try_add(&c)?;
                if e.is_zero() {
                    self.terms.remove(&alpha);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
        Ok(())
    }

    fn check(&self, other: &Self) -> Result<(), JetError> {
        if self.nvars != other.nvars {
            return Err(JetError::DimensionMismatch(self.nvars, other.nvars));
        }
        if self.order != other.order {
            return Err(JetError::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.insert_add(a.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, JetError> {
        self.try_add(&other.scale(-1.0))
    }

    pub fn scale(&self, r: f64) -> Self {
        self.map_coeffs(|c| c.scale(r))
    }

    pub fn scale_by(&self, s: S) -> Self {
        self.map_coeffs(|c| c.scale_by(s))
    }

    fn map_coeffs(&self, f: impl Fn(&Jet<S>) -> Jet<S>) -> Self {
        DiffOp {
            nvars: self.nvars,
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), f(c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    /// Left multiplication by a function: `c · self`.
    pub fn premultiply(&self, c: &Jet<S>) -> Result<Self, JetError> {
        let mut out = Self::zero(self.nvars, self.order);
        for (a, t) in &self.terms {
            out.insert_add(a.clone(), c.try_mul(t)?)?;
        }
        Ok(out)
    }

    /// Operator product `self ∘ other`, brought back to normal form with the
    /// Leibniz rule `∂^α b = Σ_{γ≤α} C(α,γ) (∂^γ b) ∂^{α−γ}`.
    pub fn compose(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let mut out = Self::zero(self.nvars, self.order);
        for (alpha, a) in &self.terms {
            for (beta, b) in &other.terms {
                for gamma in alpha.sub_indices() {
                    let rest = alpha.checked_sub(&gamma).expect("sub-index");
                    let db = b.partial_multi(&gamma)?;
                    if db.is_zero() {
                        continue;
                    }
                    let c = a.try_mul(&db)?.scale(alpha.binomial(&gamma));
                    out.insert_add(rest.add(beta), c)?;
                }
            }
        }
        Ok(out)
    }

    /// `[self, other] = self∘other − other∘self`
    pub fn commutator(&self, other: &Self) -> Result<Self, JetError> {
        self.compose(other)?.try_sub(&other.compose(self)?)
    }

    pub fn apply(&self, f: &Jet<S>) -> Result<Jet<S>, JetError> {
        if f.nvars() != self.nvars {
            return Err(JetError::DimensionMismatch(self.nvars, f.nvars()));
        }
        let mut acc: Option<Jet<S>> = None;
        for (alpha, c) in &self.terms {
            let t = c.try_mul(&f.partial_multi(alpha)?)?;
            acc = Some(match acc {
                None => t,
                Some(a) => a.try_add(&t)?,
            });
        }
        Ok(acc.unwrap_or_else(|| f.truncate(f.valid_order().saturating_sub(self.derivative_order())).zero_like()))
    }

    /// Largest coefficient difference, with absent terms read as zero.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, JetError> {
        self.check(other)?;
        let mut m = 0.0f64;
        for (a, c) in &self.terms {
            m = m.max(match other.terms.get(a) {
                Some(d) => c.max_abs_diff(d)?,
                None => c.max_abs(),
            });
        }
        for (a, d) in &other.terms {
            if !self.terms.contains_key(a) {
                m = m.max(d.max_abs());
            }
        }
        Ok(m)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Jet::max_abs).fold(0.0, f64::max)
    }

    /// Formal conjugation of the coefficients.
    pub fn conj(&self) -> Self {
        self.map_coeffs(Jet::conj)
    }
}

impl DiffOp<f64> {
    /// Apply a real-coefficient operator to a jet over any scalar field.
    pub fn apply_to<T: Scalar>(&self, f: &Jet<T>) -> Result<Jet<T>, JetError> {
        if f.nvars() != self.nvars {
            return Err(JetError::DimensionMismatch(self.nvars, f.nvars()));
        }
        let mut acc: Option<Jet<T>> = None;
        for (alpha, c) in &self.terms {
            let t = f.partial_multi(alpha)?.mul_real(c)?;
            acc = Some(match acc {
                None => t,
                Some(a) => a.try_add(&t)?,
            });
        }
        Ok(acc.unwrap_or_else(|| f.truncate(f.valid_order().saturating_sub(self.derivative_order())).zero_like()))
    }

    pub fn to_complex(&self) -> DiffOp<num_complex::Complex64> {
        DiffOp {
            nvars: self.nvars,
            order: self.order,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.to_complex())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_matches_sequential_application() {
        let x = Jet::<f64>::variable(2, 8, 0, 0.3);
        let y = Jet::<f64>::variable(2, 8, 1, -0.2);
        let a = DiffOp::term(&x * &y, MultiIndex::from_slice(&[1, 0]))
            .try_add(&DiffOp::term(&x * &x, MultiIndex::from_slice(&[0, 2])))
            .unwrap();
        let b = DiffOp::term(&(&y * &y) * &x, MultiIndex::from_slice(&[1, 1]))
            .try_add(&DiffOp::multiplication(x.clone()))
            .unwrap();
        let f = &(&(&x * &x) * &y) + &(&y * &y);
        let ab = a.compose(&b).unwrap();
        let direct = a.apply(&b.apply(&f).unwrap()).unwrap();
        assert!(ab.apply(&f).unwrap().max_abs_diff(&direct).unwrap() < 1e-14);
    }

    #[test]
    fn canonical_commutator() {
        let x = Jet::<f64>::variable(1, 6, 0, 0.5);
        let d = DiffOp::partial(1, 6, 0);
        let c = d.commutator(&DiffOp::multiplication(x)).unwrap();
        assert!(c.max_abs_diff(&DiffOp::identity(1, 6)).unwrap() < 1e-15);
    }
}

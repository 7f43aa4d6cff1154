use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::layout::Layout;
use super::multi_index::MultiIndex;
use super::scalar::Scalar;
use super::JetError;

/// Truncated multivariate Taylor expansion at an (implicit) expansion point.
///
/// Coefficients are stored for the monomials `(z - z0)^m` with `|m| <= valid_order`;
/// everything above `valid_order` is unknown and never stored. `order` is the
/// maximum degree of the underlying layout.
#[derive(Clone)]
pub struct Jet<S: Scalar = f64> {
    layout: Arc<Layout>,
    valid: usize,
    coeffs: Vec<S>,
}

pub type CJet = Jet<Complex64>;

impl<S: Scalar> Jet<S> {
    pub fn zero(nvars: usize, order: usize) -> Self {
        Self::constant(nvars, order, S::ZERO)
    }

    pub fn constant(nvars: usize, order: usize, c: S) -> Self {
        let layout = Layout::get(nvars, order);
        let mut coeffs = vec![S::ZERO; layout.len()];
        coeffs[0] = c;
        Jet {
            layout,
            valid: order,
            coeffs,
        }
    }

    /// The coordinate function `z_var` expanded at a point where it equals `value`.
    pub fn variable(nvars: usize, order: usize, var: usize, value: S) -> Self {
        assert!(var < nvars, "variable index {var} out of range for {nvars} variables");
        let mut j = Self::constant(nvars, order, value);
        if order > 0 {
            j.coeffs[1 + var] = S::ONE;
        }
        j
    }

    /// Same layout and valid order as `self`, all coefficients zero.
    pub fn zero_like(&self) -> Self {
        Jet {
            layout: self.layout.clone(),
            valid: self.valid,
            coeffs: vec![S::ZERO; self.coeffs.len()],
        }
    }

    /// Constant with the layout of `self` (valid to the full order).
    pub fn constant_like(&self, c: S) -> Self {
        Self::constant(self.nvars(), self.order(), c)
    }

    pub fn from_fn(nvars: usize, order: usize, valid: usize, mut f: impl FnMut(&MultiIndex) -> S) -> Self {
        let layout = Layout::get(nvars, order);
        let valid = valid.min(order);
        let coeffs = (0..layout.count(valid)).map(|i| f(layout.monomial(i))).collect();
        Jet {
            layout,
            valid,
            coeffs,
        }
    }

    pub(crate) fn from_raw(layout: Arc<Layout>, valid: usize, coeffs: Vec<S>) -> Self {
        debug_assert_eq!(coeffs.len(), layout.count(valid));
        Jet {
            layout,
            valid,
            coeffs,
        }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars()
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn valid_order(&self) -> usize {
        self.valid
    }

    /// Value at the expansion point.
    pub fn value(&self) -> S {
        self.coeffs[0]
    }

    /// Stored coefficients in graded order, up to the valid order.
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn coeff(&self, m: &MultiIndex) -> Result<S, JetError> {
        if m.nvars() != self.nvars() {
            return Err(JetError::DimensionMismatch(m.nvars(), self.nvars()));
        }
        let degree = m.degree();
        if degree > self.valid {
            return Err(JetError::BeyondValidOrder {
                degree,
                valid: self.valid,
            });
        }
        let i = self.layout.index_of(m).expect("monomial within order");
        Ok(self.coeffs[i])
    }

    /// Partial derivative `∂^m` evaluated at the expansion point.
    pub fn derivative_at(&self, m: &MultiIndex) -> Result<S, JetError> {
        Ok(self.coeff(m)?.scale(m.factorial()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, S)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.layout.monomial(i), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == S::ZERO)
    }

    /// True when every coefficient above degree zero vanishes.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == S::ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.modulus()))
    }

    /// Drop coefficients above `valid` (no-op when already lower).
    pub fn truncate(&self, valid: usize) -> Self {
        let valid = valid.min(self.valid);
        Jet {
            layout: self.layout.clone(),
            valid,
            coeffs: self.coeffs[..self.layout.count(valid)].to_vec(),
        }
    }

    fn check_compatible<T: Scalar>(&self, other: &Jet<T>) -> Result<(), JetError> {
        if Arc::ptr_eq(&self.layout, &other.layout) {
            return Ok(());
        }
        if self.nvars() != other.nvars() {
            return Err(JetError::DimensionMismatch(self.nvars(), other.nvars()));
        }
        Err(JetError::OrderMismatch(self.order(), other.order()))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        let valid = self.valid.min(other.valid);
        let n = self.layout.count(valid);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Jet::from_raw(self.layout.clone(), valid, coeffs))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        let valid = self.valid.min(other.valid);
        let n = self.layout.count(valid);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Jet::from_raw(self.layout.clone(), valid, coeffs))
    }

    /// In-place `self += factor * other`.
    pub fn add_scaled(&mut self, other: &Self, factor: S) -> Result<(), JetError> {
        self.check_compatible(other)?;
        if other.valid < self.valid {
            self.valid = other.valid;
            self.coeffs.truncate(self.layout.count(other.valid));
        }
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        Ok(mul_generic(self, other, |a, b| a * b))
    }

    pub fn scale(&self, r: f64) -> Self {
        Jet::from_raw(
            self.layout.clone(),
            self.valid,
            self.coeffs.iter().map(|c| c.scale(r)).collect(),
        )
    }

    pub fn scale_by(&self, s: S) -> Self {
        Jet::from_raw(
            self.layout.clone(),
            self.valid,
            self.coeffs.iter().map(|&c| c * s).collect(),
        )
    }

    /// Formal partial derivative; consumes one order of the derivative budget.
    pub fn partial(&self, var: usize) -> Result<Self, JetError> {
        if var >= self.nvars() {
            return Err(JetError::DimensionMismatch(var + 1, self.nvars()));
        }
        if self.valid == 0 {
            return Err(JetError::BudgetExhausted);
        }
        let valid = self.valid - 1;
        let n = self.layout.count(valid);
        let coeffs = (0..n)
            .map(|i| {
                let src = self.layout.raised(var, i);
                let k = self.layout.monomial(i).get(var) as f64 + 1.0;
                self.coeffs[src].scale(k)
            })
            .collect();
        Ok(Jet::from_raw(self.layout.clone(), valid, coeffs))
    }

    /// Iterated partial derivative `∂^m`.
    pub fn partial_multi(&self, m: &MultiIndex) -> Result<Self, JetError> {
        let mut out = self.clone();
        for (v, &e) in m.exponents().iter().enumerate() {
            for _ in 0..e {
                out = out.partial(v)?;
            }
        }
        Ok(out)
    }

    /// Largest coefficient difference over the common valid order.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, JetError> {
        self.check_compatible(other)?;
        let n = self.layout.count(self.valid.min(other.valid));
        Ok(self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .fold(0.0, |m, (&a, &b)| m.max((a - b).modulus())))
    }

    /// `max|a - b| / max(1, max|a|, max|b|)` over the common valid order.
    pub fn relative_defect(&self, other: &Self) -> Result<f64, JetError> {
        let diff = self.max_abs_diff(other)?;
        let n = self.layout.count(self.valid.min(other.valid));
        let scale = self.coeffs[..n]
            .iter()
            .chain(&other.coeffs[..n])
            .fold(1.0f64, |m, c| m.max(c.modulus()));
        Ok(diff / scale)
    }

    /// Re-express a jet in `nvars` variables, mapping variable `v` to `offset + v`.
    pub fn embed(&self, nvars: usize, offset: usize) -> Self {
        assert!(offset + self.nvars() <= nvars);
        let layout = Layout::get(nvars, self.order());
        let mut coeffs = vec![S::ZERO; layout.count(self.valid)];
        for (m, c) in self.iter() {
            let idx = layout
                .index_of(&m.embed(nvars, offset))
                .expect("embedded monomial within order");
            coeffs[idx] = c;
        }
        Jet::from_raw(layout, self.valid, coeffs)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Jet<T> {
        Jet::from_raw(
            self.layout.clone(),
            self.valid,
            self.coeffs.iter().map(|&c| f(c)).collect(),
        )
    }

    pub fn to_complex(&self) -> CJet {
        self.map(|c| c.to_complex())
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }
}

impl<S: Scalar> Jet<S> {
    /// Product with a real jet.
    pub fn mul_real(&self, other: &Jet<f64>) -> Result<Jet<S>, JetError> {
        self.check_compatible(other)?;
        // Outer loop over the real factor: connection and metric jets are the sparse side.
        Ok(mul_generic(other, self, |r, c| c.scale(r)))
    }
}

impl CJet {
    pub fn re(&self) -> Jet<f64> {
        self.map(|c| c.re)
    }

    pub fn im(&self) -> Jet<f64> {
        self.map(|c| c.im)
    }
}

fn mul_generic<A: Scalar, B: Scalar, O: Scalar>(
    a: &Jet<A>,
    b: &Jet<B>,
    f: impl Fn(A, B) -> O,
) -> Jet<O> {
    let layout = &a.layout;
    let valid = a.valid.min(b.valid);
    let n = layout.count(valid);
    let mut out = vec![O::ZERO; n];
    for i in 0..n {
        let ai = a.coeffs[i];
        if ai == A::ZERO {
            continue;
        }
        let limit = layout.count(valid - layout.degree(i));
        let targets = layout.mul_targets(i, limit);
        for (&t, &bj) in targets.iter().zip(&b.coeffs[..limit]) {
            out[t as usize] += f(ai, bj);
        }
    }
    Jet::from_raw(layout.clone(), valid, out)
}

impl<S: Scalar> fmt::Debug for Jet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(n={}, valid={}/{}) {{", self.nvars(), self.valid, self.order())?;
        let mut first = true;
        for (m, c) in self.iter() {
            if c == S::ZERO {
                continue;
            }
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{m}: {c:?}")?;
        }
        write!(f, "}}")
    }
}

// Operator sugar for same-layout arithmetic. Mismatched layouts are a
// programming error here; use the `try_*` methods on untrusted inputs.
impl<S: Scalar> Add for &Jet<S> {
    type Output = Jet<S>;
    fn add(self, rhs: Self) -> Jet<S> {
        self.try_add(rhs).expect("jet add: incompatible layouts")
    }
}

impl<S: Scalar> Sub for &Jet<S> {
    type Output = Jet<S>;
    fn sub(self, rhs: Self) -> Jet<S> {
        self.try_sub(rhs).expect("jet sub: incompatible layouts")
    }
}

impl<S: Scalar> Mul for &Jet<S> {
    type Output = Jet<S>;
    fn mul(self, rhs: Self) -> Jet<S> {
        self.try_mul(rhs).expect("jet mul: incompatible layouts")
    }
}

impl Mul<&Jet<f64>> for &CJet {
    type Output = CJet;
    fn mul(self, rhs: &Jet<f64>) -> CJet {
        self.mul_real(rhs).expect("jet mul: incompatible layouts")
    }
}

impl<S: Scalar> Neg for &Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.map(|c| -c)
    }
}

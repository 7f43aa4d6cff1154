//! Elementary functions of jets via univariate Taylor series in `a - a(z0)`.

use super::jet::Jet;
use super::multi_index::factorial;
use super::scalar::Scalar;
use super::JetError;

impl<S: Scalar> Jet<S> {
    /// `Σ_k c_k (a - a0)^k` by Horner's rule; `coeffs` must have at least
    /// `valid_order + 1` entries.
    pub fn compose_univariate(&self, coeffs: &[S]) -> Jet<S> {
        let v = self.valid_order();
        let mut delta = self.clone();
        let c0 = delta.value();
        delta = delta.try_sub(&delta.constant_like(c0)).expect("same layout");
        let mut acc = self.constant_like(coeffs[v]).truncate(v);
        for k in (0..v).rev() {
            acc = &acc * &delta;
            acc = &acc + &self.constant_like(coeffs[k]);
        }
        acc
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inverse(&self) -> Result<Jet<S>, JetError> {
        let a0 = self.value();
        if a0 == S::ZERO || a0.modulus() < 1e-300 {
            return Err(JetError::ZeroConstantTerm);
        }
        // 1/(a0 + d) = Σ (-1)^k d^k / a0^(k+1); a0^{-1} via the reciprocal of a complex/real.
        let inv0 = reciprocal(a0);
        let mut coeffs = Vec::with_capacity(self.valid_order() + 1);
        let mut c = inv0;
        for _ in 0..=self.valid_order() {
            coeffs.push(c);
            c = -(c * inv0);
        }
        Ok(self.compose_univariate(&coeffs))
    }

    /// Integer power (negative exponents go through [`Jet::inverse`]).
    pub fn powi(&self, n: i64) -> Result<Jet<S>, JetError> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut result = self.constant_like(S::ONE);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(result)
    }
}

fn reciprocal<S: Scalar>(a: S) -> S {
    // 1/a = conj(a)/|a|^2 works for both real and complex scalars.
    let m2 = a.modulus() * a.modulus();
    a.conj().scale(1.0 / m2)
}

impl Jet<f64> {
    pub fn sqrt(&self) -> Result<Jet<f64>, JetError> {
        let a0 = self.value();
        if a0 <= 0.0 {
            return Err(JetError::NonPositive(a0));
        }
        Ok(self.powf(0.5).expect("positive base"))
    }

    /// Real power `a^r`; requires a positive constant term.
    pub fn powf(&self, r: f64) -> Result<Jet<f64>, JetError> {
        let a0 = self.value();
        if a0 <= 0.0 {
            return Err(JetError::NonPositive(a0));
        }
        let mut coeffs = Vec::with_capacity(self.valid_order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.valid_order() {
            coeffs.push(binom * a0.powf(r - k as f64));
            binom *= (r - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.compose_univariate(&coeffs))
    }

    pub fn exp(&self) -> Jet<f64> {
        let e0 = self.value().exp();
        let coeffs: Vec<f64> = (0..=self.valid_order())
            .map(|k| e0 / factorial(k))
            .collect();
        self.compose_univariate(&coeffs)
    }

    pub fn ln(&self) -> Result<Jet<f64>, JetError> {
        let a0 = self.value();
        if a0 <= 0.0 {
            return Err(JetError::NonPositive(a0));
        }
        let coeffs: Vec<f64> = (0..=self.valid_order())
            .map(|k| {
                if k == 0 {
                    a0.ln()
                } else {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    sign / (k as f64 * a0.powi(k as i32))
                }
            })
            .collect();
        Ok(self.compose_univariate(&coeffs))
    }

    pub fn sin(&self) -> Jet<f64> {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let coeffs: Vec<f64> = (0..=self.valid_order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose_univariate(&coeffs)
    }

    pub fn cos(&self) -> Jet<f64> {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let coeffs: Vec<f64> = (0..=self.valid_order())
            .map(|k| cycle[k % 4] / factorial(k))
            .collect();
        self.compose_univariate(&coeffs)
    }

    pub fn tan(&self) -> Result<Jet<f64>, JetError> {
        Ok(&self.sin() * &self.cos().inverse()?)
    }
}

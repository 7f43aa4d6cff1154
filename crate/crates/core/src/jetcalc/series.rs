use super::jet::CJet;
use super::JetError;
use num_complex::Complex64;

/// Formal power series `Σ_{k<=K} ħ^k f_k` with jet coefficients.
#[derive(Clone, Debug)]
pub struct HbarSeries {
    terms: Vec<CJet>,
}

impl HbarSeries {
    /// Series with `terms[k]` the ħ^k coefficient; truncation is `terms.len() - 1`.
    pub fn new(terms: Vec<CJet>) -> Self {
        assert!(!terms.is_empty(), "series needs at least the ħ^0 term");
        HbarSeries { terms }
    }

    /// `f` as a classical (ħ-independent) series truncated at `k`.
    pub fn classical(f: &CJet, k: usize) -> Self {
        let mut terms = vec![f.zero_like(); k + 1];
        terms[0] = f.clone();
        HbarSeries { terms }
    }

    pub fn truncation(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn terms(&self) -> &[CJet] {
        &self.terms
    }

    pub fn term(&self, k: usize) -> &CJet {
        &self.terms[k]
    }

    fn check(&self, other: &Self) -> Result<(), JetError> {
        if self.truncation() != other.truncation() {
            return Err(JetError::TruncationMismatch(self.truncation(), other.truncation()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let terms = self
            .terms
            .iter()
            .zip(&other.terms)
            .map(|(a, b)| a.try_add(b))
            .collect::<Result<_, _>>()?;
        Ok(HbarSeries { terms })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let terms = self
            .terms
            .iter()
            .zip(&other.terms)
            .map(|(a, b)| a.try_sub(b))
            .collect::<Result<_, _>>()?;
        Ok(HbarSeries { terms })
    }

    /// Cauchy product in ħ, truncated at the common order.
    pub fn try_mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let k = self.truncation();
        let mut terms = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = self.terms[0].try_mul(&other.terms[n])?;
            for i in 1..=n {
                acc = acc.try_add(&self.terms[i].try_mul(&other.terms[n - i])?)?;
            }
            terms.push(acc);
        }
        Ok(HbarSeries { terms })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        HbarSeries {
            terms: self.terms.iter().map(|t| t.scale_by(c)).collect(),
        }
    }

    /// Per-order maximum coefficient modulus of `self - other`.
    pub fn defects(&self, other: &Self) -> Result<Vec<f64>, JetError> {
        self.check(other)?;
        self.terms
            .iter()
            .zip(&other.terms)
            .map(|(a, b)| a.max_abs_diff(b))
            .collect()
    }

    /// Evaluate the ħ-polynomial at a numeric ħ, coefficient-wise.
    pub fn at_hbar(&self, hbar: f64) -> CJet {
        let mut acc = self.terms[0].clone();
        let mut h = 1.0;
        for t in &self.terms[1..] {
            h *= hbar;
            acc.add_scaled(t, Complex64::new(h, 0.0)).expect("same layout");
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::Jet;

    fn c(v: f64) -> CJet {
        Jet::constant(1, 2, Complex64::new(v, 0.0))
    }

    #[test]
    fn product_of_polynomials_in_hbar() {
        let a = HbarSeries::new(vec![c(1.0), c(1.0), c(0.0)]);
        let b = HbarSeries::new(vec![c(1.0), c(-1.0), c(0.0)]);
        let p = a.try_mul(&b).unwrap();
        let vals: Vec<f64> = p.terms().iter().map(|t| t.value().re).collect();
        assert_eq!(vals, vec![1.0, 0.0, -1.0]);
        assert_eq!(p.at_hbar(0.5).value().re, 0.75);
    }

    #[test]
    fn truncation_mismatch_is_reported() {
        let a = HbarSeries::classical(&c(1.0), 2);
        let b = HbarSeries::classical(&c(1.0), 3);
        assert_eq!(a.try_add(&b).unwrap_err(), JetError::TruncationMismatch(2, 3));
    }
}

//! Star-product engines. Every engine maps two phase-space jets to an
//! ħ-series truncated at its configured order.

mod covariant;
mod curvilinear;
mod moyal;

pub use covariant::{
    iterated_covariant_derivative, CovariantStar, FamilyAStar, FedosovLikeStar, PhaseCurvature,
};
pub(crate) use covariant::{contract, partner};
pub use curvilinear::{AdoptedDerivatives, CurvilinearStar, Route};
pub use moyal::{MoyalStar, VectorFieldSet, VectorFieldStar};

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::jetcalc::{CJet, HbarSeries, JetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StarError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("vector fields do not commute (max |[X, Y]| = {0:e})")]
    NonCommuting(f64),
    #[error("vector fields do not decompose the canonical Poisson tensor (defect {0:e})")]
    NotPoissonDecomposition(f64),
    #[error("connection is curved; use the family-a or Fedosov-like engine")]
    CurvedConnection,
    #[error("engine defines terms only through hbar^{max}, requested {requested}")]
    TruncationTooHigh { requested: usize, max: usize },
}

pub trait StarProduct: Sync {
    fn name(&self) -> &'static str;

    fn truncation(&self) -> usize;

    fn star(&self, f: &CJet, g: &CJet) -> Result<HbarSeries, StarError>;

    /// Bilinear extension to ħ-series, truncated at the engine's order.
    fn star_series(&self, f: &HbarSeries, g: &HbarSeries) -> Result<HbarSeries, StarError> {
        let k = self.truncation();
        if f.truncation() != k || g.truncation() != k {
            return Err(JetError::TruncationMismatch(f.truncation(), g.truncation()).into());
        }
        let mut terms: Vec<Option<CJet>> = vec![None; k + 1];
        for i in 0..=k {
            if f.term(i).is_zero() {
                continue;
            }
            for j in 0..=k - i {
                if g.term(j).is_zero() {
                    continue;
                }
                let prod = self.star(f.term(i), g.term(j))?;
                for l in 0..=k - i - j {
                    let slot = &mut terms[i + j + l];
                    *slot = Some(match slot.take() {
                        None => prod.term(l).clone(),
                        Some(acc) => acc.try_add(prod.term(l))?,
                    });
                }
            }
        }
        let zero = f.term(0).zero_like();
        Ok(HbarSeries::new(
            terms
                .into_iter()
                .map(|t| t.unwrap_or_else(|| zero.clone()))
                .collect(),
        ))
    }
}

/// `(f ⋆ g) ⋆ h − f ⋆ (g ⋆ h)`.
pub fn associativity_defect(
    engine: &dyn StarProduct,
    f: &CJet,
    g: &CJet,
    h: &CJet,
) -> Result<HbarSeries, StarError> {
    let k = engine.truncation();
    let lhs = engine.star_series(&engine.star(f, g)?, &HbarSeries::classical(h, k))?;
    let rhs = engine.star_series(&HbarSeries::classical(f, k), &engine.star(g, h)?)?;
    Ok(lhs.try_sub(&rhs)?)
}

/// `(i/2)^k / k!`
pub(crate) fn half_i_power(k: usize) -> Complex64 {
    let mut c = Complex64::new(1.0, 0.0);
    for j in 1..=k {
        c *= Complex64::new(0.0, 0.5) / j as f64;
    }
    c
}

/// Per-order relative defect of two series: `max|a_k − b_k| / max(1, max|a_k|, max|b_k|)`.
pub fn series_relative_defects(a: &HbarSeries, b: &HbarSeries) -> Result<Vec<f64>, StarError> {
    if a.truncation() != b.truncation() {
        return Err(JetError::TruncationMismatch(a.truncation(), b.truncation()).into());
    }
    a.terms()
        .iter()
        .zip(b.terms())
        .map(|(x, y)| Ok(x.relative_defect(y)?))
        .collect()
}

/// Per-order max coefficient modulus of a series (used on defect series).
pub fn series_magnitudes(s: &HbarSeries) -> Vec<f64> {
    s.terms().iter().map(CJet::max_abs).collect()
}

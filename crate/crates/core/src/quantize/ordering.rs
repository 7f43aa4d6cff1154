use num_complex::Complex64;

use super::{ConfigOp, DiffOperator, MomentumSymbol, PSymbol, QuantizeError};
use crate::geometry::{ConnectionField, PhasePoint};
use crate::jetcalc::{CJet, HbarSeries};
use crate::morphism::{build_s_ab, MorphismS};

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// `½ Γ^k_{jk} = ½ ∂_j ln √|g|`
fn half_trace(cf: &ConnectionField, j: usize) -> Result<CJet, QuantizeError> {
    let n = cf.dimension();
    let mut t = cf.gamma.get(0, 0, 0).zero_like();
    for k in 0..n {
        t = t.try_add(cf.gamma.get(k, j, k))?;
    }
    Ok(t.scale(0.5).to_complex())
}

/// `p̂_j = −iħ(∂_j + ½Γ^k_{jk})`
pub fn momentum_operator(cf: &ConnectionField, j: usize) -> Result<DiffOperator, QuantizeError> {
    let n = cf.dimension();
    let order = cf.gamma.get(0, 0, 0).order();
    let op = ConfigOp::partial(n, order, j)
        .try_add(&ConfigOp::multiplication(half_trace(cf, j)?))?
        .scale_by(MINUS_I);
    Ok(DiffOperator::graded(1, op))
}

fn momentum_product(p: &[DiffOperator], idx: &[usize], n: usize, order: usize) -> Result<DiffOperator, QuantizeError> {
    let mut acc = DiffOperator::identity(n, order);
    for &i in idx {
        acc = acc.compose(&p[i])?;
    }
    Ok(acc)
}

/// `2^{−m} Σ` over the `2^m` placements of `c` among `p̂_{i_1}⋯p̂_{i_m}`.
pub fn weyl_monomial(cf: &ConnectionField, c: &CJet, idx: &[usize]) -> Result<DiffOperator, QuantizeError> {
    let n = cf.dimension();
    let order = c.order();
    let p: Vec<DiffOperator> = (0..n).map(|j| momentum_operator(cf, j)).collect::<Result<_, _>>()?;
    let m = idx.len();
    let mult = DiffOperator::multiplication(c.clone());
    let mut acc = DiffOperator::zero(n, order);
    for mask in 0..(1usize << m) {
        let left: Vec<usize> = (0..m).filter(|s| mask >> s & 1 == 1).map(|s| idx[s]).collect();
        let right: Vec<usize> = (0..m).filter(|s| mask >> s & 1 == 0).map(|s| idx[s]).collect();
        let term = momentum_product(&p, &left, n, order)?
            .compose(&mult)?
            .compose(&momentum_product(&p, &right, n, order)?)?;
        acc = acc.try_add(&term)?;
    }
    Ok(acc.scale(1.0 / (1usize << m) as f64))
}

pub fn weyl_order_psymbol(symbol: &PSymbol, cf: &ConnectionField) -> Result<DiffOperator, QuantizeError> {
    if symbol.max_momentum_degree() > 3 {
        return Err(QuantizeError::UnsupportedDegree(symbol.max_momentum_degree()));
    }
    let n = cf.dimension();
    let order = cf.gamma.get(0, 0, 0).order();
    let mut acc = DiffOperator::zero(n, order);
    for ((k, beta), c) in symbol.terms() {
        let mut idx = Vec::new();
        for (v, &e) in beta.exponents().iter().enumerate() {
            idx.extend(std::iter::repeat_n(v, e as usize));
        }
        acc = acc.try_add(&weyl_monomial(cf, c, &idx)?.shift_hbar(*k))?;
    }
    Ok(acc)
}

pub fn weyl_order(symbol: &MomentumSymbol, cf: &ConnectionField) -> Result<DiffOperator, QuantizeError> {
    weyl_order_psymbol(&PSymbol::from_symbol(symbol), cf)
}

/// Coordinate-form morphism expanded at `p = 0`, as required by [`s_order`].
pub fn quantization_morphism(cf: &ConnectionField, a: f64, b: f64) -> Result<MorphismS, QuantizeError> {
    let n = cf.dimension();
    let point = PhasePoint::new(cf.point().to_vec(), vec![0.0; n]);
    Ok(build_s_ab(cf, &point, a, b, 2)?)
}

/// `A_S = (S⁻¹ A)_W`. `S` must be expanded at `p = 0` over the same chart point
/// (see [`quantization_morphism`]); the momentum polynomial is then read off exactly.
pub fn s_order(symbol: &MomentumSymbol, s: &MorphismS, cf: &ConnectionField) -> Result<DiffOperator, QuantizeError> {
    let n = cf.dimension();
    if s.n() != n || symbol.n() != n {
        return Err(QuantizeError::Dimension(s.n(), n));
    }
    let point = PhasePoint::new(cf.point().to_vec(), vec![0.0; n]);
    let h = symbol.phase_jet(&point)?.to_complex();
    let transformed = s.apply_inverse(&HbarSeries::classical(&h, 2))?;
    weyl_order_psymbol(&PSymbol::from_phase_series(&transformed, n), cf)
}

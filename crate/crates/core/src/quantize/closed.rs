use num_complex::Complex64;

use super::{ConfigOp, DiffOperator, MomentumSymbol, QuantizeError};
use crate::geometry::{covariant_derivative, ConnectionField};
use crate::jetcalc::{CJet, Jet};

struct Ops<'a> {
    cf: &'a ConnectionField,
    n: usize,
    order: usize,
}

impl<'a> Ops<'a> {
    fn new(cf: &'a ConnectionField) -> Self {
        Ops {
            cf,
            n: cf.dimension(),
            order: cf.gamma.get(0, 0, 0).order(),
        }
    }

    fn zero(&self) -> ConfigOp {
        ConfigOp::zero(self.n, self.order)
    }

    fn mult(&self, c: &Jet) -> ConfigOp {
        ConfigOp::multiplication(c.to_complex())
    }

    fn d(&self, i: usize) -> ConfigOp {
        ConfigOp::partial(self.n, self.order, i)
    }

    fn gamma(&self, a: usize, b: usize, c: usize) -> Option<CJet> {
        self.cf.gamma.is_nonzero(a, b, c).then(|| self.cf.gamma.get(a, b, c).to_complex())
    }

    /// `∇_i V^i` for an operator-valued vector.
    fn divergence(&self, v: &[ConfigOp]) -> Result<ConfigOp, QuantizeError> {
        let mut acc = self.zero();
        for i in 0..self.n {
            acc = acc.try_add(&self.d(i).compose(&v[i])?)?;
            for j in 0..self.n {
                if let Some(g) = self.gamma(j, j, i) {
                    acc = acc.try_add(&v[i].premultiply(&g)?)?;
                }
            }
        }
        Ok(acc)
    }

    /// `∇_i ∇_j T^{ij}` for an operator-valued tensor stored `[i·n + j]`.
    fn double_divergence(&self, t: &[ConfigOp]) -> Result<ConfigOp, QuantizeError> {
        let n = self.n;
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = self.zero();
            for j in 0..n {
                acc = acc.try_add(&self.d(j).compose(&t[i * n + j])?)?;
                for l in 0..n {
                    if let Some(g) = self.gamma(i, l, j) {
                        acc = acc.try_add(&t[l * n + j].premultiply(&g)?)?;
                    }
                    if let Some(g) = self.gamma(j, l, j) {
                        acc = acc.try_add(&t[i * n + l].premultiply(&g)?)?;
                    }
                }
            }
            v.push(acc);
        }
        self.divergence(&v)
    }

    /// `∇_j ∇_k ψ = ∂_j∂_kψ − Γ^l_{jk}∂_lψ`
    fn hessian(&self, j: usize, k: usize) -> Result<ConfigOp, QuantizeError> {
        let mut h = self.d(j).compose(&self.d(k))?;
        for l in 0..self.n {
            if let Some(g) = self.gamma(l, j, k) {
                h = h.try_sub(&self.d(l).premultiply(&g)?)?;
            }
        }
        Ok(h)
    }

    /// `Σ_i V^i ∂_i`
    fn along(&self, v: &[Jet]) -> Result<ConfigOp, QuantizeError> {
        let mut acc = self.zero();
        for (i, c) in v.iter().enumerate() {
            acc = acc.try_add(&self.d(i).premultiply(&c.to_complex())?)?;
        }
        Ok(acc)
    }
}

fn check_degree(symbol: &MomentumSymbol, d: usize) -> Result<(), QuantizeError> {
    if symbol.degree() != d {
        return Err(QuantizeError::DegreeMismatch {
            expected: d,
            found: symbol.degree(),
        });
    }
    Ok(())
}

/// `K^{ij}R_{ij}` or `K^{ijk}R_{jk}` contracted over the last two slots.
fn ricci_contraction(symbol: &MomentumSymbol, cf: &ConnectionField, lead: Option<usize>) -> Result<Jet, QuantizeError> {
    let n = cf.dimension();
    let mut acc = cf.ricci[0][0].zero_like();
    for j in 0..n {
        for k in 0..n {
            let c = match lead {
                Some(i) => symbol.component(&[i, j, k]),
                None => symbol.component(&[j, k]),
            };
            acc = acc.try_add(&c.try_mul(&cf.ricci[j][k])?)?;
        }
    }
    Ok(acc)
}

/// `Ĥ = −(iħ/2)(K^i∇_i + ∇_iK^i)`
pub fn op_linear(symbol: &MomentumSymbol, cf: &ConnectionField) -> Result<DiffOperator, QuantizeError> {
    check_degree(symbol, 1)?;
    let o = Ops::new(cf);
    let k: Vec<Jet> = (0..o.n).map(|i| symbol.component(&[i]).clone()).collect();
    let v: Vec<ConfigOp> = k.iter().map(|c| o.mult(c)).collect();
    let op = o.along(&k)?.try_add(&o.divergence(&v)?)?;
    finish(symbol, 1, op.scale_by(Complex64::new(0.0, -0.5)))
}

/// `Ĥ = −ħ²(∇_iK^{ij}∇_j + ¼(1−b)K^{ij}_{;ij} − ¼(1−a)K^{ij}R_{ij})`
pub fn op_quadratic(symbol: &MomentumSymbol, cf: &ConnectionField, a: f64, b: f64) -> Result<DiffOperator, QuantizeError> {
    check_degree(symbol, 2)?;
    let o = Ops::new(cf);
    let n = o.n;
    let v: Vec<ConfigOp> = (0..n)
        .map(|i| {
            let k: Vec<Jet> = (0..n).map(|j| symbol.component(&[i, j]).clone()).collect();
            o.along(&k)
        })
        .collect::<Result<_, _>>()?;
    let dd = covariant_derivative(&covariant_derivative(&symbol.tensor(), &cf.gamma)?, &cf.gamma)?;
    let mut kdd = cf.gamma.get(0, 0, 0).zero_like();
    for i in 0..n {
        for j in 0..n {
            kdd = kdd.try_add(dd.get(&[i, j, i, j]))?;
        }
    }
    let kr = ricci_contraction(symbol, cf, None)?;
    let op = o
        .divergence(&v)?
        .try_add(&o.mult(&kdd.scale(0.25 * (1.0 - b))))?
        .try_sub(&o.mult(&kr.scale(0.25 * (1.0 - a))))?;
    finish(symbol, 2, op.scale(-1.0))
}

/// `Ĥ = (iħ³/2)(∇_iK^{ijk}∇_j∇_k + ∇_i∇_jK^{ijk}∇_k + ¼(1−b)∇_kK^{ijk}_{;ij}
///      + ¼(1−b)K^{ijk}_{;ij}∇_k − ¾(1−a)∇_iK^{ijk}R_{jk} − ¾(1−a)K^{ijk}R_{jk}∇_i)`
pub fn op_cubic(symbol: &MomentumSymbol, cf: &ConnectionField, a: f64, b: f64) -> Result<DiffOperator, QuantizeError> {
    op_cubic_with(symbol, cf, 0.75 * (1.0 - a), 0.25 * (1.0 - b))
}

/// Cubic operator with explicit weights: `cr` multiplies the two `K^{ijk}R_{jk}`
/// terms and `cb` the two `K^{ijk}_{;ij}` terms. [`op_cubic`] uses
/// `cr = ¾(1−a)`, `cb = ¼(1−b)`; S-ordering with the coordinate-form morphism
/// reproduces `cb = ¼(1−3b)` instead.
pub fn op_cubic_with(symbol: &MomentumSymbol, cf: &ConnectionField, cr: f64, cb: f64) -> Result<DiffOperator, QuantizeError> {
    check_degree(symbol, 3)?;
    let o = Ops::new(cf);
    let n = o.n;
    let kc = |i: usize, j: usize, k: usize| symbol.component(&[i, j, k]).to_complex();

    let mut first = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = o.zero();
        for j in 0..n {
            for k in 0..n {
                acc = acc.try_add(&o.hessian(j, k)?.premultiply(&kc(i, j, k))?)?;
            }
        }
        first.push(acc);
    }
    let mut second = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let k: Vec<Jet> = (0..n).map(|k| symbol.component(&[i, j, k]).clone()).collect();
            second.push(o.along(&k)?);
        }
    }
    let dd = covariant_derivative(&covariant_derivative(&symbol.tensor(), &cf.gamma)?, &cf.gamma)?;
    let v: Vec<Jet> = (0..n)
        .map(|k| {
            let mut acc = cf.gamma.get(0, 0, 0).zero_like();
            for i in 0..n {
                for j in 0..n {
                    acc = acc.try_add(dd.get(&[i, j, k, i, j]))?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, QuantizeError>>()?;
    let w: Vec<Jet> = (0..n)
        .map(|i| ricci_contraction(symbol, cf, Some(i)))
        .collect::<Result<_, _>>()?;
    let vm: Vec<ConfigOp> = v.iter().map(|c| o.mult(c)).collect();
    let wm: Vec<ConfigOp> = w.iter().map(|c| o.mult(c)).collect();
    let op = o
        .divergence(&first)?
        .try_add(&o.double_divergence(&second)?)?
        .try_add(&o.divergence(&vm)?.scale(cb))?
        .try_add(&o.along(&v)?.scale(cb))?
        .try_sub(&o.divergence(&wm)?.scale(cr))?
        .try_sub(&o.along(&w)?.scale(cr))?;
    finish(symbol, 3, op.scale_by(Complex64::new(0.0, 0.5)))
}

fn finish(symbol: &MomentumSymbol, power: usize, op: ConfigOp) -> Result<DiffOperator, QuantizeError> {
    let mut out = DiffOperator::graded(power, op);
    if let Some(v) = symbol.potential() {
        out = out.try_add(&DiffOperator::multiplication(v.to_complex()))?;
    }
    Ok(out)
}

/// Closed-form operator for a symbol of degree 1, 2 or 3.
pub fn closed_form(symbol: &MomentumSymbol, cf: &ConnectionField, a: f64, b: f64) -> Result<DiffOperator, QuantizeError> {
    match symbol.degree() {
        1 => op_linear(symbol, cf),
        2 => op_quadratic(symbol, cf, a, b),
        3 => op_cubic(symbol, cf, a, b),
        d => Err(QuantizeError::UnsupportedDegree(d)),
    }
}

use super::jet::{CJet, Jet};
use super::JetError;
use super::scalar::Scalar;

/// Taylor expansion of `f ∘ φ`, where `f` is expanded at `at` and the
/// constant terms of `φ` must reproduce `at`.
pub fn compose<S: Scalar>(f: &Jet<S>, at: &[f64], phi: &[Jet<f64>]) -> Result<Jet<S>, JetError> {
    if phi.len() != f.nvars() || at.len() != f.nvars() {
        return Err(JetError::DimensionMismatch(phi.len(), f.nvars()));
    }
    let first = phi.first().ok_or(JetError::DimensionMismatch(0, 1))?;
    for p in phi {
        if p.nvars() != first.nvars() || p.order() != first.order() {
            return Err(JetError::DimensionMismatch(p.nvars(), first.nvars()));
        }
    }
    for (i, (p, &a)) in phi.iter().zip(at).enumerate() {
        if (p.value() - a).abs() > 1e-10 * (1.0 + a.abs()) {
            return Err(JetError::ExpansionPointMismatch {
                var: i,
                expected: a,
                found: p.value(),
            });
        }
    }
    let valid = phi
        .iter()
        .map(|p| p.valid_order())
        .min()
        .unwrap_or(0)
        .min(f.valid_order());
    let deltas: Vec<Jet<f64>> = phi
        .iter()
        .map(|p| {
            let p = p.truncate(valid);
            &p - &p.constant_like(p.value())
        })
        .collect();

    let flayout = f.layout().clone();
    let n = flayout.count(valid);
    // products[i] = Π δ^{m_i}, built incrementally in graded order.
    let mut products: Vec<Jet<f64>> = Vec::with_capacity(n);
    let mut out = Jet::<S>::zero(first.nvars(), first.order()).truncate(valid);
    for i in 0..n {
        let m = flayout.monomial(i);
        let prod = match m.first_nonzero() {
            None => Jet::constant(first.nvars(), first.order(), 1.0),
            Some(v) => {
                let prev = m.with_decremented(v).expect("nonzero exponent");
                let j = flayout.index_of(&prev).expect("lower monomial");
                &products[j] * &deltas[v]
            }
        };
        let c = f.coeffs()[i];
        if c != S::ZERO {
            out.add_scaled(&prod.map(S::from_f64), c)?;
        }
        products.push(prod);
    }
    Ok(out)
}

/// Composition for complex jets (convenience wrapper).
pub fn compose_complex(f: &CJet, at: &[f64], phi: &[Jet<f64>]) -> Result<CJet, JetError> {
    compose(f, at, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::MultiIndex;

    #[test]
    fn square_of_shift() {
        let y = Jet::variable(1, 4, 0, 1.0);
        let f = &y * &y;
        let x = Jet::variable(1, 4, 0, 0.0);
        let phi = &x + &x.constant_like(1.0);
        let g = compose(&f, &[1.0], &[phi]).unwrap();
        assert_eq!(g.coeffs(), &[1.0, 2.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn identity_map_is_neutral() {
        let at = [0.3, -1.2];
        let x = Jet::variable(2, 5, 0, at[0]);
        let y = Jet::variable(2, 5, 1, at[1]);
        let f = &(&x.sin() * &y) + &x.exp();
        let g = compose(&f, &at, &[x.clone(), y.clone()]).unwrap();
        assert!(g.max_abs_diff(&f).unwrap() < 1e-15);
    }

    #[test]
    fn cartesian_monomial_through_polar_map() {
        let (r0, t0) = (2.0, std::f64::consts::PI / 6.0);
        let r = Jet::variable(2, 5, 0, r0);
        let t = Jet::variable(2, 5, 1, t0);
        let xs = &r * &t.cos();
        let ys = &r * &t.sin();
        let at = [xs.value(), ys.value()];
        let x = Jet::variable(2, 5, 0, at[0]);
        let y = Jet::variable(2, 5, 1, at[1]);
        let g = compose(&(&x * &y), &at, &[xs, ys]).unwrap();
        // r² cosθ sinθ = ½ r² sin 2θ; coefficient of (δr)^a (δθ)^b.
        for a in 0..=2usize {
            for b in 0..=3usize {
                let dr = match a {
                    0 => r0 * r0,
                    1 => 2.0 * r0,
                    _ => 1.0,
                };
                let fact = (1..=b).map(|k| k as f64).product::<f64>();
                let ang = 0.5 * 2f64.powi(b as i32) * (2.0 * t0 + b as f64 * std::f64::consts::FRAC_PI_2).sin() / fact;
                let c = g.coeff(&MultiIndex::from_slice(&[a as u8, b as u8])).unwrap();
                assert!((c - dr * ang).abs() < 1e-13, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn expansion_point_mismatch() {
        let y = Jet::variable(1, 3, 0, 1.0);
        let x = Jet::variable(1, 3, 0, 0.0);
        assert!(matches!(
            compose(&y, &[1.0], &[x]),
            Err(JetError::ExpansionPointMismatch { .. })
        ));
    }
}

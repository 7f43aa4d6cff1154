use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use super::QuantizeError;
use crate::geometry::{ConnectionField, IndexKind, PhasePoint, TensorJet};
use crate::jetcalc::{factorial, CJet, HbarSeries, Jet, MultiIndex};

/// `H = K^{i…}(x) p_i… + V(x)` with `K` totally symmetric, degree 1 to 3.
#[derive(Debug, Clone)]
pub struct MomentumSymbol {
    n: usize,
    degree: usize,
    components: Vec<Jet>,
    potential: Option<Jet>,
}

fn flat_index(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

impl MomentumSymbol {
    /// `f` is called with sorted index tuples only, so the result is symmetric.
    pub fn new(n: usize, degree: usize, f: impl Fn(&[usize]) -> Jet) -> Result<Self, QuantizeError> {
        if !(1..=3).contains(&degree) {
            return Err(QuantizeError::UnsupportedDegree(degree));
        }
        let mut cache: HashMap<Vec<usize>, Jet> = HashMap::new();
        let total = n.pow(degree as u32);
        let mut components = Vec::with_capacity(total);
        for flat in 0..total {
            let mut idx: Vec<usize> = (0..degree).map(|s| flat / n.pow((degree - 1 - s) as u32) % n).collect();
            idx.sort_unstable();
            let c = cache.entry(idx.clone()).or_insert_with(|| f(&idx)).clone();
            if c.nvars() != n {
                return Err(QuantizeError::Dimension(c.nvars(), n));
            }
            components.push(c);
        }
        Ok(MomentumSymbol {
            n,
            degree,
            components,
            potential: None,
        })
    }

    /// `½ g^{ij} p_i p_j`
    pub fn natural(cf: &ConnectionField) -> Self {
        let n = cf.dimension();
        Self::new(n, 2, |idx| cf.metric.ginv[idx[0]][idx[1]].scale(0.5)).expect("degree 2")
    }

    /// Reads `K^{i…}p_i… + V(x)` off a phase-space jet expanded at `p = 0`.
    /// The momentum part must be homogeneous of degree 1, 2 or 3. Components
    /// are returned at jet order `order`; expand `jet` to `order + 3` to keep
    /// them fully valid.
    pub fn from_phase_jet(jet: &Jet, n: usize, order: usize) -> Result<Self, QuantizeError> {
        if jet.nvars() != 2 * n {
            return Err(QuantizeError::Dimension(jet.nvars(), 2 * n));
        }
        let split = PSymbol::from_phase_series(&HbarSeries::classical(&jet.to_complex(), 0), n);
        let mut degrees: Vec<usize> = split.terms.keys().map(|(_, b)| b.degree()).filter(|&d| d > 0).collect();
        degrees.sort_unstable();
        degrees.dedup();
        let degree = match degrees.as_slice() {
            [d] => *d,
            [] => return Err(QuantizeError::UnsupportedDegree(0)),
            _ => return Err(QuantizeError::MixedDegree(degrees)),
        };
        if degree > 3 {
            return Err(QuantizeError::UnsupportedDegree(degree));
        }
        let zero = Jet::zero(n, order);
        let relayout = |c: &CJet| {
            let re = c.re();
            let valid = order.min(re.valid_order());
            Jet::from_fn(n, order, valid, |m| re.coeff(m).unwrap_or(0.0))
        };
        let symbol = Self::new(n, degree, |idx| {
            let beta = MultiIndex::from_vars(n, idx);
            match split.terms.get(&(0, beta.clone())) {
                // Σ K p…p counts each sorted tuple d!/β! times
                Some(c) => relayout(c).scale(beta.factorial() / factorial(degree)),
                None => zero.clone(),
            }
        })?;
        Ok(match split.terms.get(&(0, MultiIndex::zero(n))) {
            Some(v) => symbol.with_potential(relayout(v)),
            None => symbol,
        })
    }

    pub fn with_potential(mut self, v: Jet) -> Self {
        self.potential = Some(v);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.components[0].order()
    }

    pub fn component(&self, idx: &[usize]) -> &Jet {
        &self.components[flat_index(idx, self.n)]
    }

    pub fn potential(&self) -> Option<&Jet> {
        self.potential.as_ref()
    }

    pub fn tensor(&self) -> TensorJet {
        TensorJet::from_fn(self.n, vec![IndexKind::Upper; self.degree], |idx| {
            self.component(idx).clone()
        })
    }

    /// The symbol as a phase-space jet expanded at `(x⁰, p)`.
    pub fn phase_jet(&self, point: &PhasePoint) -> Result<Jet, QuantizeError> {
        let n = self.n;
        let order = self.order();
        let p: Vec<Jet> = (0..n).map(|l| point.momentum_jet(l, order)).collect();
        let mut acc = Jet::zero(2 * n, order);
        let total = n.pow(self.degree as u32);
        for flat in 0..total {
            let idx: Vec<usize> = (0..self.degree)
                .map(|s| flat / n.pow((self.degree - 1 - s) as u32) % n)
                .collect();
            let mut t = self.components[flat].embed(2 * n, 0);
            for &i in &idx {
                t = t.try_mul(&p[i])?;
            }
            acc = acc.try_add(&t)?;
        }
        if let Some(v) = &self.potential {
            acc = acc.try_add(&v.embed(2 * n, 0))?;
        }
        Ok(acc)
    }
}

/// Polynomial-in-momentum symbol `Σ ħ^k c_{k,β}(x) p^β`.
#[derive(Debug, Clone)]
pub struct PSymbol {
    n: usize,
    terms: BTreeMap<(usize, MultiIndex), CJet>,
}

impl PSymbol {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(usize, MultiIndex), CJet> {
        &self.terms
    }

    pub fn max_momentum_degree(&self) -> usize {
        self.terms.keys().map(|(_, b)| b.degree()).max().unwrap_or(0)
    }

    pub fn from_symbol(symbol: &MomentumSymbol) -> Self {
        let mut terms = BTreeMap::new();
        let n = symbol.n;
        let total = n.pow(symbol.degree as u32);
        for flat in 0..total {
            let idx: Vec<usize> = (0..symbol.degree)
                .map(|s| flat / n.pow((symbol.degree - 1 - s) as u32) % n)
                .collect();
            let beta = MultiIndex::from_vars(n, &idx);
            let c = symbol.components[flat].to_complex();
            terms
                .entry((0, beta))
                .and_modify(|e: &mut CJet| *e = e.try_add(&c).expect("same layout"))
                .or_insert(c);
        }
        if let Some(v) = &symbol.potential {
            terms.insert((0, MultiIndex::zero(n)), v.to_complex());
        }
        terms.retain(|_, c| !c.is_zero());
        PSymbol { n, terms }
    }

    /// Split phase-space jets expanded at `p = 0` by momentum monomial. Exact
    /// for symbols polynomial in `p`; the `x`-jets keep `valid − |β|` orders.
    pub fn from_phase_series(series: &HbarSeries, n: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (k, jet) in series.terms().iter().enumerate() {
            let order = jet.order();
            let valid = jet.valid_order();
            let mut groups: BTreeMap<MultiIndex, HashMap<MultiIndex, Complex64>> = BTreeMap::new();
            for (m, c) in jet.iter() {
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let e = m.exponents();
                let x = MultiIndex::from_slice(&e[..n]);
                let p = MultiIndex::from_slice(&e[n..]);
                groups.entry(p).or_default().insert(x, c);
            }
            for (beta, coeffs) in groups {
                let v = valid - beta.degree();
                let c = Jet::from_fn(n, order, v, |x| {
                    coeffs.get(x).copied().unwrap_or(Complex64::new(0.0, 0.0))
                });
                if !c.is_zero() {
                    terms.insert((k, beta), c);
                }
            }
        }
        PSymbol { n, terms }
    }
}

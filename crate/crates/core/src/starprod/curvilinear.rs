use std::collections::HashMap;

use num_complex::Complex64;

use crate::geometry::{Connection, ConnectionField, PhasePoint};
use crate::jetcalc::{factorial, CJet, HbarSeries, Jet};

use super::{StarError, StarProduct};

/// Order in which mixed operators `D^{j…}_{i…}` are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// All lower indices by the connection recursion, then upper indices by `∂_p`.
    LowersFirst,
    /// All upper indices first, then lower indices (with upper-index corrections).
    UppersFirst,
}

/// Tensor families `D^{j_1…j_m}_{i_1…i_n} f`, stored per `(n, m)` with the
/// lower indices first in row-major order.
pub struct AdoptedDerivatives<'a> {
    engine: &'a CurvilinearStar,
    route: Route,
    families: HashMap<(usize, usize), Vec<CJet>>,
}

impl<'a> AdoptedDerivatives<'a> {
    pub fn new(engine: &'a CurvilinearStar, f: &CJet, route: Route) -> Self {
        let mut families = HashMap::new();
        families.insert((0, 0), vec![f.clone()]);
        AdoptedDerivatives {
            engine,
            route,
            families,
        }
    }

    pub fn get(&mut self, n: usize, m: usize) -> Result<&[CJet], StarError> {
        if !self.families.contains_key(&(n, m)) {
            let built = self.build(n, m)?;
            self.families.insert((n, m), built);
        }
        Ok(&self.families[&(n, m)])
    }

    fn build(&mut self, n: usize, m: usize) -> Result<Vec<CJet>, StarError> {
        let use_lower = match self.route {
            Route::LowersFirst => m == 0,
            Route::UppersFirst => n > 0,
        };
        if use_lower {
            let prev = self.get(n - 1, m)?.to_vec();
            self.engine.raise_lower(&prev, n - 1, m)
        } else {
            let prev = self.get(n, m - 1)?.to_vec();
            self.engine.raise_upper(&prev)
        }
    }
}

/// Canonical product written in a curvilinear Darboux chart through the
/// adopted-frame operators `D_i = ∂_{x^i} + Γ^k_{ij} p_k ∂_{p_j}`, `D^j = ∂_{p_j}`.
#[derive(Debug, Clone)]
pub struct CurvilinearStar {
    n: usize,
    k: usize,
    gamma: Connection,
    /// `gp[i * n + j] = Γ^k_{ij} p_k`
    gp: Vec<Jet>,
    route: Route,
}

impl CurvilinearStar {
    pub fn new(cf: &ConnectionField, point: &PhasePoint, k: usize) -> Self {
        let n = cf.dimension();
        let order = cf.gamma.get(0, 0, 0).order();
        let gamma = cf.gamma.embed(2 * n, 0);
        let p: Vec<Jet> = (0..n).map(|l| point.momentum_jet(l, order)).collect();
        let mut gp = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = p[0].zero_like();
                for (kk, pk) in p.iter().enumerate() {
                    if gamma.is_nonzero(kk, i, j) {
                        acc = &acc + &(gamma.get(kk, i, j) * pk);
                    }
                }
                gp.push(acc);
            }
        }
        CurvilinearStar {
            n,
            k,
            gamma,
            gp,
            route: Route::LowersFirst,
        }
    }

    pub fn with_route(mut self, route: Route) -> Self {
        self.route = route;
        self
    }

    /// `D_i f`.
    pub fn d_lower(&self, i: usize, f: &CJet) -> Result<CJet, StarError> {
        let n = self.n;
        let mut acc = f.partial(i)?;
        for j in 0..n {
            let c = &self.gp[i * n + j];
            if !c.is_zero() {
                acc = acc.try_add(&f.partial(n + j)?.mul_real(c)?)?;
            }
        }
        Ok(acc)
    }

    /// Family `(n+1, m)` from `(n, m)` by the connection recursion.
    fn raise_lower(&self, prev: &[CJet], n: usize, m: usize) -> Result<Vec<CJet>, StarError> {
        let d = self.n;
        let rank = n + m;
        let mut out = Vec::with_capacity(prev.len() * d);
        let mut idx = vec![0usize; rank + 1];
        let mut tmp = vec![0usize; rank];
        let total = prev.len() * d;
        for flat in 0..total {
            decode(flat, d, &mut idx);
            // New index layout: (i_1..i_n, i_new, j_1..j_m).
            let inew = idx[n];
            tmp[..n].copy_from_slice(&idx[..n]);
            tmp[n..].copy_from_slice(&idx[n + 1..]);
            let base = &prev[encode(&tmp, d)];
            let mut acc = self.d_lower(inew, base)?;
            for s in 0..rank {
                let original = tmp[s];
                for kk in 0..d {
                    // lower slot: −Γ^k_{i_s i_new};  upper slot: +Γ^{j_t}_{k i_new}
                    let (a, b) = if s < n { (kk, original) } else { (original, kk) };
                    if !self.gamma.is_nonzero(a, b, inew) {
                        continue;
                    }
                    tmp[s] = kk;
                    let t = prev[encode(&tmp, d)].mul_real(self.gamma.get(a, b, inew))?;
                    acc = if s < n { acc.try_sub(&t)? } else { acc.try_add(&t)? };
                }
                tmp[s] = original;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Family `(n, m+1)` from `(n, m)`: `D^{j…j_{m+1}}_{i…} f = ∂_{p_{j_{m+1}}} D^{j…}_{i…} f`.
    fn raise_upper(&self, prev: &[CJet]) -> Result<Vec<CJet>, StarError> {
        let d = self.n;
        let mut out = Vec::with_capacity(prev.len() * d);
        for base in prev {
            for j in 0..d {
                out.push(base.partial(d + j)?);
            }
        }
        Ok(out)
    }

    pub fn derivatives(&self, f: &CJet) -> AdoptedDerivatives<'_> {
        AdoptedDerivatives::new(self, f, self.route)
    }

    /// Largest difference between the two assembly routes over all `n + m ≤ k`.
    pub fn order_swap_defect(&self, f: &CJet, k: usize) -> Result<f64, StarError> {
        let mut a = AdoptedDerivatives::new(self, f, Route::LowersFirst);
        let mut b = AdoptedDerivatives::new(self, f, Route::UppersFirst);
        let mut worst = 0.0f64;
        for total in 0..=k {
            for n in 0..=total {
                let fa = a.get(n, total - n)?.to_vec();
                let fb = b.get(n, total - n)?;
                for (x, y) in fa.iter().zip(fb) {
                    worst = worst.max(x.max_abs_diff(y)?);
                }
            }
        }
        Ok(worst)
    }
}

fn decode(mut flat: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

fn encode(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

impl StarProduct for CurvilinearStar {
    fn name(&self) -> &'static str {
        "curvilinear"
    }

    fn truncation(&self) -> usize {
        self.k
    }

    fn star(&self, f: &CJet, g: &CJet) -> Result<HbarSeries, StarError> {
        let d = self.n;
        let mut fd = self.derivatives(f);
        let mut gd = self.derivatives(g);
        let mut terms = Vec::with_capacity(self.k + 1);
        for k in 0..=self.k {
            let mut acc: Option<CJet> = None;
            for n in 0..=k {
                let m = k - n;
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let c = Complex64::new(0.0, 0.5).powu(k as u32)
                    * (sign / (factorial(n) * factorial(m)));
                let ff = fd.get(n, m)?.to_vec();
                let gg = gd.get(m, n)?;
                let mut idx = vec![0usize; k];
                let mut swapped = vec![0usize; k];
                for (flat, a) in ff.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    decode(flat, d, &mut idx);
                    // f carries (I lower, J upper); g carries (J lower, I upper).
                    swapped[..m].copy_from_slice(&idx[n..]);
                    swapped[m..].copy_from_slice(&idx[..n]);
                    let b = &gg[encode(&swapped, d)];
                    if b.is_zero() {
                        continue;
                    }
                    let t = a.try_mul(b)?.scale_by(c);
                    acc = Some(match acc {
                        None => t,
                        Some(x) => x.try_add(&t)?,
                    });
                }
            }
            terms.push(match acc {
                Some(a) => a,
                None => f.truncate(f.valid_order().min(g.valid_order()).saturating_sub(k)).zero_like(),
            });
        }
        Ok(HbarSeries::new(terms))
    }
}

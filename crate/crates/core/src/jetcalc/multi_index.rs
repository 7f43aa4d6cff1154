use std::fmt;

use serde::{Serialize, Serializer};

/// Exponent vector of a monomial, one entry per variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut m = Self::zero(nvars);
        m.0[var] = 1;
        m
    }

    pub fn from_slice(exponents: &[u8]) -> Self {
        MultiIndex(exponents.to_vec())
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, var: usize) -> u8 {
        self.0[var]
    }

    pub fn with_incremented(&self, var: usize) -> Self {
        let mut m = self.clone();
        m.0[var] += 1;
        m
    }

    pub fn with_decremented(&self, var: usize) -> Option<Self> {
        if self.0[var] == 0 {
            return None;
        }
        let mut m = self.clone();
        m.0[var] -= 1;
        Some(m)
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` when some exponent would go negative.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e as usize)).product()
    }

    /// Product of binomial coefficients `C(self_i, sub_i)`.
    pub fn binomial(&self, sub: &Self) -> f64 {
        self.0
            .iter()
            .zip(&sub.0)
            .map(|(&n, &k)| binomial(n as usize, k as usize))
            .product()
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&e| e > 0)
    }

    /// All multi-indices `γ ≤ self` (componentwise).
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(Vec::with_capacity(self.0.len()))];
        for &e in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for m in &out {
                for k in 0..=e {
                    let mut v = m.0.clone();
                    v.push(k);
                    next.push(MultiIndex(v));
                }
            }
            out = next;
        }
        out
    }

    /// Every multi-index over `nvars` variables with total degree exactly `degree`.
    pub fn all_of_degree(nvars: usize, degree: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u8; nvars];
        fn rec(pos: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
            let n = cur.len();
            if n == 0 {
                if left == 0 {
                    out.push(MultiIndex(Vec::new()));
                }
                return;
            }
            if pos == n - 1 {
                cur[pos] = left as u8;
                out.push(MultiIndex(cur.clone()));
                cur[pos] = 0;
                return;
            }
            for e in (0..=left).rev() {
                cur[pos] = e as u8;
                rec(pos + 1, left - e, cur, out);
            }
            cur[pos] = 0;
        }
        rec(0, degree, &mut cur, &mut out);
        out
    }

    /// Multi-index counting occurrences of each variable in `vars`.
    pub fn from_vars(nvars: usize, vars: &[usize]) -> Self {
        let mut m = Self::zero(nvars);
        for &v in vars {
            m.0[v] += 1;
        }
        m
    }

    /// Zero-pad the exponent vector to `nvars`, placing the existing entries at `offset`.
    pub fn embed(&self, nvars: usize, offset: usize) -> Self {
        let mut m = Self::zero(nvars);
        m.0[offset..offset + self.0.len()].copy_from_slice(&self.0);
        m
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_enumeration_counts() {
        // C(d + n - 1, n - 1)
        assert_eq!(MultiIndex::all_of_degree(3, 2).len(), 6);
        assert_eq!(MultiIndex::all_of_degree(4, 3).len(), 20);
        assert_eq!(MultiIndex::all_of_degree(2, 0), vec![MultiIndex::zero(2)]);
    }

    #[test]
    fn sub_indices_and_binomials() {
        let m = MultiIndex::from_slice(&[2, 1]);
        let subs = m.sub_indices();
        assert_eq!(subs.len(), 6);
        let total: f64 = subs.iter().map(|s| m.binomial(s)).sum();
        assert_eq!(total, 8.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(factorial(4), 24.0);
    }
}

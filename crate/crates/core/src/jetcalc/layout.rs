use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::multi_index::MultiIndex;

/// Graded enumeration of the monomials of a jet space together with the
/// precomputed index tables that drive multiplication and differentiation.
///
/// Monomials are ordered by total degree, so the coefficients of degree
/// `<= d` always form the prefix `0..count(d)`.
#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    degrees: Vec<usize>,
    /// `counts[d]` = number of monomials of degree `<= d`.
    counts: Vec<usize>,
    index: HashMap<MultiIndex, usize>,
    /// For monomial `i`, `mul_target[mul_offset[i] + j]` is the index of
    /// `m_i + m_j` for every `j < count(order - deg i)`.
    mul_offset: Vec<usize>,
    mul_target: Vec<u32>,
    /// `raise[v][i]` = index of `m_i + e_v` (only for `deg m_i < order`).
    raise: Vec<Vec<u32>>,
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Self {
        let mut monomials = Vec::new();
        let mut degrees = Vec::new();
        let mut counts = Vec::with_capacity(order + 1);
        for d in 0..=order {
            for m in MultiIndex::all_of_degree(nvars, d) {
                monomials.push(m);
                degrees.push(d);
            }
            counts.push(monomials.len());
        }
        let index: HashMap<MultiIndex, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let mut mul_offset = Vec::with_capacity(monomials.len());
        let mut mul_target = Vec::new();
        for (i, mi) in monomials.iter().enumerate() {
            mul_offset.push(mul_target.len());
            let limit = counts[order - degrees[i]];
            for mj in &monomials[..limit] {
                mul_target.push(index[&mi.add(mj)] as u32);
            }
        }

        let below = if order == 0 { 0 } else { counts[order - 1] };
        let raise = (0..nvars)
            .map(|v| {
                monomials[..below]
                    .iter()
                    .map(|m| index[&m.with_incremented(v)] as u32)
                    .collect()
            })
            .collect();

        Layout {
            nvars,
            order,
            monomials,
            degrees,
            counts,
            index,
            mul_offset,
            mul_target,
            raise,
        }
    }

    /// Shared layout for `(nvars, order)`; built once per process.
    pub fn get(nvars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((nvars, order))
            .or_insert_with(|| Arc::new(Layout::build(nvars, order)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of monomials with total degree `<= degree`.
    pub fn count(&self, degree: usize) -> usize {
        self.counts[degree.min(self.order)]
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &MultiIndex {
        &self.monomials[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.index.get(m).copied()
    }

    #[inline]
    pub(crate) fn mul_targets(&self, i: usize, limit: usize) -> &[u32] {
        let start = self.mul_offset[i];
        &self.mul_target[start..start + limit]
    }

    #[inline]
    pub(crate) fn raised(&self, var: usize, i: usize) -> usize {
        self.raise[var][i] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_prefix_property() {
        let l = Layout::get(3, 4);
        assert_eq!(l.count(0), 1);
        assert_eq!(l.count(1), 4);
        assert_eq!(l.count(4), 35);
        for i in 0..l.len() {
            assert!(l.degree(i) <= 4);
            if i > 0 {
                assert!(l.degree(i - 1) <= l.degree(i));
            }
        }
    }

    #[test]
    fn layouts_are_shared() {
        let a = Layout::get(2, 5);
        let b = Layout::get(2, 5);
        assert!(Arc::ptr_eq(&a, &b));
    }
}

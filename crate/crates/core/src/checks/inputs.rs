use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::jetcalc::{CJet, Jet};
use crate::quantize::MomentumSymbol;

/// Random real polynomial of total degree ≤ `degree` in the given coordinate jets.
pub fn random_polynomial(rng: &mut ChaCha8Rng, coords: &[CJet], degree: usize) -> CJet {
    let one = coords[0].constant_like(Complex64::new(1.0, 0.0));
    let mut acc = one.scale(rng.gen_range(-1.0..1.0));
    // monomials as non-decreasing index tuples
    let mut layer: Vec<(usize, CJet)> = vec![(0, one)];
    for _ in 0..degree {
        let mut next = Vec::new();
        for (start, m) in &layer {
            for (i, z) in coords.iter().enumerate().skip(*start) {
                let t = m * z;
                acc = &acc + &t.scale(rng.gen_range(-1.0..1.0));
                next.push((i, t));
            }
        }
        layer = next;
    }
    acc
}

/// Random real jet with coefficients damped by degree.
pub fn random_jet(rng: &mut ChaCha8Rng, nvars: usize, order: usize) -> Jet {
    Jet::from_fn(nvars, order, order, |m| rng.gen_range(-1.0..1.0) / (1 + m.degree()) as f64)
}

/// Random complex jet with coefficients damped by degree.
pub fn random_cjet(rng: &mut ChaCha8Rng, nvars: usize, order: usize) -> CJet {
    CJet::from_fn(nvars, order, order, |m| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (1 + m.degree()) as f64
    })
}

/// Symbol `K^{i…}p_i…` of the given degree with independent random components.
pub fn random_symbol(rng: &mut ChaCha8Rng, n: usize, degree: usize, order: usize) -> MomentumSymbol {
    let comps: Vec<Jet> = (0..n.pow(degree as u32)).map(|_| random_jet(rng, n, order)).collect();
    MomentumSymbol::new(n, degree, |idx| comps[idx.iter().fold(0, |a, &i| a * n + i)].clone())
        .expect("degree in 1..=3")
}

use num_complex::Complex64;
use proptest::prelude::*;

use natstar::geometry::{catalog, ConnectionField};
use natstar::jetcalc::{binomial, compose, CJet, Jet};
use natstar::quantize::{formal_adjoint, weyl_order, MomentumSymbol};
use natstar::starprod::{MoyalStar, StarProduct};

const N: usize = 2;
const ORDER: usize = 6;

fn size(n: usize, order: usize) -> usize {
    binomial(n + order, order) as usize
}

fn jet_from(n: usize, order: usize, coeffs: Vec<f64>) -> Jet {
    let mut it = coeffs.into_iter();
    Jet::from_fn(n, order, order, |_| it.next().unwrap_or(0.0))
}

fn jet(n: usize, order: usize) -> impl Strategy<Value = Jet> {
    prop::collection::vec(-1.0..1.0f64, size(n, order)).prop_map(move |c| jet_from(n, order, c))
}

/// Jet whose constant term stays in `[lo, hi]`.
fn positive_jet(lo: f64, hi: f64) -> impl Strategy<Value = Jet> {
    (lo..hi, jet(N, ORDER)).prop_map(|(c, j)| {
        let shift = c - j.value();
        j.try_add(&j.constant_like(shift)).unwrap()
    })
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.relative_defect(b).unwrap() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_ring_axioms(a in jet(N, ORDER), b in jet(N, ORDER), c in jet(N, ORDER)) {
        prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-12));
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-15));
        prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-12));
        let one = a.constant_like(1.0);
        prop_assert!(close(&(&a * &one), &a, 1e-15));
    }

    #[test]
    fn leibniz_rule(a in jet(N, ORDER), b in jet(N, ORDER), var in 0..N) {
        let lhs = (&a * &b).partial(var).unwrap();
        let rhs = &(&a.partial(var).unwrap() * &b.truncate(ORDER - 1))
            + &(&a.truncate(ORDER - 1) * &b.partial(var).unwrap());
        prop_assert_eq!(lhs.valid_order(), ORDER - 1);
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn composition_is_functorial(
        f in jet(N, ORDER),
        phi in prop::collection::vec(jet(N, ORDER), N),
        psi in prop::collection::vec(jet(N, ORDER), N),
        at in prop::collection::vec(-1.0..1.0f64, N),
    ) {
        // phi maps a neighbourhood of 0 to one of `at`; psi maps 0 to 0
        let phi: Vec<Jet> = phi.iter().zip(&at).map(|(p, &x)| p.try_add(&p.constant_like(x - p.value())).unwrap()).collect();
        let psi: Vec<Jet> = psi.iter().map(|p| p.try_sub(&p.constant_like(p.value())).unwrap()).collect();
        let zero = vec![0.0; N];
        let stepwise = compose(&compose(&f, &at, &phi).unwrap(), &zero, &psi).unwrap();
        let chained: Vec<Jet> = phi.iter().map(|p| compose(p, &zero, &psi).unwrap()).collect();
        let direct = compose(&f, &at, &chained).unwrap();
        prop_assert!(close(&stepwise, &direct, 1e-10));

        let identity: Vec<Jet> = (0..N).map(|i| Jet::variable(N, ORDER, i, at[i])).collect();
        prop_assert!(close(&compose(&f, &at, &identity).unwrap(), &f, 1e-15));
    }

    #[test]
    fn inverse_round_trip(a in positive_jet(0.5, 2.0), neg in any::<bool>()) {
        let a = if neg { a.scale(-1.0) } else { a };
        let one = a.constant_like(1.0);
        prop_assert!(close(&(&a * &a.inverse().unwrap()), &one, 1e-9));
        prop_assert!(close(&a.inverse().unwrap().inverse().unwrap(), &a, 1e-9));
    }

    #[test]
    fn sqrt_and_log_round_trips(a in positive_jet(0.5, 2.0)) {
        let r = a.sqrt().unwrap();
        prop_assert!(close(&(&r * &r), &a, 1e-9));
        prop_assert!(close(&a.ln().unwrap().exp(), &a, 1e-9));
    }

    #[test]
    fn moyal_is_bilinear_with_classical_limit(
        f in jet(2 * N, 5), g in jet(2 * N, 5), h in jet(2 * N, 5), s in -2.0..2.0f64,
    ) {
        let star = MoyalStar::new(N, 3);
        let (f, g, h) = (f.to_complex(), g.to_complex(), h.to_complex());
        let sum = f.try_add(&h.scale(s)).unwrap();
        let lhs = star.star(&sum, &g).unwrap();
        let rhs = star.star(&f, &g).unwrap().try_add(&star.star(&h, &g).unwrap().scale(Complex64::new(s, 0.0))).unwrap();
        prop_assert!(lhs.defects(&rhs).unwrap().iter().all(|d| *d < 1e-12));

        let fg = star.star(&f, &g).unwrap();
        prop_assert!(fg.term(0).max_abs_diff(&(&f * &g)).unwrap() < 1e-12);
        // ħ¹ term is (i/2){f, g}
        let mut bracket: CJet = f.zero_like().truncate(4);
        for i in 0..N {
            let t = &f.partial(i).unwrap() * &g.partial(N + i).unwrap();
            let u = &f.partial(N + i).unwrap() * &g.partial(i).unwrap();
            bracket = bracket.try_add(&t.try_sub(&u).unwrap()).unwrap();
        }
        let expect = bracket.scale_by(Complex64::new(0.0, 0.5));
        prop_assert!(fg.term(1).truncate(4).max_abs_diff(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn moyal_conjugation_reverses_order(f in jet(2 * N, 5), g in jet(2 * N, 5)) {
        let star = MoyalStar::new(N, 3);
        let (f, g) = (f.to_complex(), g.to_complex());
        let fg = star.star(&f, &g).unwrap();
        let gf = star.star(&g, &f).unwrap();
        for k in 0..=3 {
            prop_assert!(fg.term(k).conj().max_abs_diff(gf.term(k)).unwrap() < 1e-12);
        }
    }
}

fn polar(r: f64, theta: f64) -> ConnectionField {
    ConnectionField::new(&catalog("euclidean-polar").unwrap(), &[r, theta], ORDER).unwrap()
}

fn symbol_from(d: usize, comps: &[Jet]) -> MomentumSymbol {
    MomentumSymbol::new(N, d, |idx| comps[idx.iter().sum::<usize>()].clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weyl_ordering_is_linear(
        d in 1..=3usize,
        u in prop::collection::vec(jet(N, ORDER), N * 3 + 1),
        v in prop::collection::vec(jet(N, ORDER), N * 3 + 1),
        s in -2.0..2.0f64,
        r in 0.5..2.0f64, theta in -3.0..3.0f64,
    ) {
        let cf = polar(r, theta);
        let w: Vec<Jet> = u.iter().zip(&v).map(|(a, b)| a.try_add(&b.scale(s)).unwrap()).collect();
        let lhs = weyl_order(&symbol_from(d, &w), &cf).unwrap();
        let rhs = weyl_order(&symbol_from(d, &u), &cf).unwrap()
            .try_add(&weyl_order(&symbol_from(d, &v), &cf).unwrap().scale(s)).unwrap();
        prop_assert!(lhs.relative_defect(&rhs).unwrap() < 1e-11);
    }

    #[test]
    fn weyl_ordering_of_real_symbols_is_symmetric(
        d in 1..=3usize,
        u in prop::collection::vec(jet(N, ORDER), N * 3 + 1),
        r in 0.5..2.0f64, theta in -3.0..3.0f64,
    ) {
        let cf = polar(r, theta);
        let op = weyl_order(&symbol_from(d, &u), &cf).unwrap();
        let adj = formal_adjoint(&op, &cf.metric).unwrap();
        prop_assert!(adj.value_defect(&op).unwrap() < 1e-10);
    }
}

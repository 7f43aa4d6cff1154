use super::*;
use crate::geometry::{catalog, lift_flat, lift_general, Frame};
use crate::starprod::{series_magnitudes, CovariantStar, FamilyAStar};

fn setup(name: &str, x: &[f64], p: &[f64], order: usize) -> (ConnectionField, PhasePoint) {
    let model = catalog(name).unwrap();
    let pt = PhasePoint::new(x.to_vec(), p.to_vec());
    (ConnectionField::new(&model, x, order).unwrap(), pt)
}

fn zc(pt: &PhasePoint, order: usize) -> Vec<CJet> {
    pt.coordinate_jets(order).iter().map(Jet::to_complex).collect()
}

fn max_through(s: &HbarSeries, k: usize) -> f64 {
    series_magnitudes(s)[..=k].iter().cloned().fold(0.0, f64::max)
}

#[test]
fn cartesian_morphism_is_identity() {
    let (cf, pt) = setup("euclidean-cartesian", &[0.2, -0.4], &[0.5, 0.1], 6);
    let s = build_s_flat(&lift_flat(&cf, &pt).unwrap(), 4).unwrap();
    assert!(s.s2().is_zero());
    let z = zc(&pt, 6);
    let one = z[0].constant_like(Complex64::new(1.0, 0.0));
    let s1 = s.apply_jet(&one).unwrap();
    assert!(s1.term(0).max_abs_diff(&one).unwrap() == 0.0);
    assert!(s1.terms()[1..].iter().all(CJet::is_zero));
}

use num_complex::Complex64;

#[test]
fn coordinate_form_cartesian_b_term() {
    let (cf, pt) = setup("euclidean-cartesian", &[0.2, -0.4], &[0.5, 0.1], 6);
    let b = 0.7;
    let s = build_s_ab(&cf, &pt, 0.3, b, 4).unwrap();
    let mut expect = PhaseOperator::zero(4, 6);
    for j in 0..2 {
        for k in 0..2 {
            let m = MultiIndex::from_vars(4, &[j, 2 + j, k, 2 + k]);
            expect = expect
                .try_add(&PhaseOperator::term(Jet::constant(4, 6, -3.0 * b / 24.0), m))
                .unwrap();
        }
    }
    assert!(s.s2().max_abs_diff(&expect).unwrap() < 1e-15);
}

#[test]
fn polar_coordinate_form_matches_lifted_form() {
    let (cf, pt) = setup("euclidean-polar", &[1.7, 0.4], &[0.3, -0.8], 8);
    let flat = build_s_flat(&lift_flat(&cf, &pt).unwrap(), 4).unwrap();
    let coord = build_s_ab(&cf, &pt, 0.0, 0.0, 4).unwrap();
    assert!(flat.s2().max_abs_diff(coord.s2()).unwrap() < 1e-12);
    // S₂ p_r² by both routes
    let z = zc(&pt, 8);
    let pr2 = z[2].try_mul(&z[2]).unwrap();
    let a = flat.s2().apply_to(&pr2).unwrap();
    let b = coord.s2().apply_to(&pr2).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
}

#[test]
fn phase_ricci_is_two_thirds_of_base_ricci() {
    let (cf, pt) = setup("unit-sphere", &[1.1, 0.3], &[0.4, -0.7], 8);
    let lifted = lift_general(&cf, &pt, Frame::Darboux).unwrap();
    let curv = PhaseCurvature::new(&lifted).unwrap();
    for j in 0..2 {
        for k in 0..2 {
            let base = cf.ricci[j][k].embed(4, 0).scale(2.0 / 3.0);
            assert!(curv.ricci.get(&[j, k]).max_abs_diff(&base).unwrap() < 1e-12);
            assert!(curv.ricci.get(&[j + 2, k]).max_abs() < 1e-12);
            assert!(curv.ricci.get(&[j + 2, k + 2]).max_abs() < 1e-12);
        }
    }
}

#[test]
fn sphere_coordinate_form_matches_curved_form() {
    // R̃_{jk} = (2/3) R_{jk}, so the a-term of the lifted form equals the
    // coordinate form with a/3.
    let (cf, pt) = setup("unit-sphere", &[1.1, 0.3], &[0.4, -0.7], 8);
    let lifted = lift_general(&cf, &pt, Frame::Darboux).unwrap();
    for a in [0.0, 0.5, 1.0] {
        let curved = build_s_curved(&lifted, a, 3).unwrap();
        let same = build_s_ab(&cf, &pt, a / 3.0, 0.0, 3).unwrap();
        assert!(curved.s2().max_abs_diff(same.s2()).unwrap() < 1e-12, "a = {a}");
        if a != 0.0 {
            let literal = build_s_ab(&cf, &pt, a, 0.0, 3).unwrap();
            assert!(curved.s2().max_abs_diff(literal.s2()).unwrap() > 1e-3);
        }
    }
}

#[test]
fn inverse_round_trip() {
    let (cf, pt) = setup("unit-sphere", &[1.1, 0.3], &[0.4, -0.7], 8);
    let s = build_s_ab(&cf, &pt, 0.3, 0.7, 4).unwrap();
    let z = zc(&pt, 8);
    let f = z[0].try_mul(&z[2]).unwrap().try_mul(&z[3]).unwrap().try_mul(&z[3]).unwrap();
    let sf = s.apply_jet(&f).unwrap();
    let back = s.apply_inverse(&sf).unwrap();
    let d = back.try_sub(&HbarSeries::classical(&f, 4)).unwrap();
    assert!(max_through(&d, 3) < 1e-12);
    // even in ħ
    assert!(sf.term(1).is_zero() && sf.term(3).is_zero());
}

#[test]
fn polar_flat_equivalence() {
    let (cf, pt) = setup("euclidean-polar", &[1.7, 0.4], &[0.3, -0.8], 9);
    let lifted = lift_flat(&cf, &pt).unwrap();
    let s = build_s_flat(&lifted, 3).unwrap();
    let star = CovariantStar::new(lifted, 3).unwrap();
    let z = zc(&pt, 9);
    let f = z[0].try_mul(&z[2]).unwrap().try_mul(&z[3]).unwrap().try_add(&z[1]).unwrap();
    let g = z[3].try_mul(&z[3]).unwrap().try_mul(&z[1]).unwrap().try_mul(&z[0]).unwrap();
    let d = equivalence_defect(&s, &star, &f, &g).unwrap();
    assert!(max_through(&d, 3) < 1e-9, "{:?}", series_magnitudes(&d));
}

#[test]
fn sphere_curved_equivalence() {
    let (cf, pt) = setup("unit-sphere", &[1.1, 0.3], &[0.4, -0.7], 9);
    let lifted = lift_general(&cf, &pt, Frame::Darboux).unwrap();
    let z = zc(&pt, 9);
    let f = z[0].try_mul(&z[2]).unwrap().try_mul(&z[3]).unwrap().try_add(&z[1]).unwrap();
    let g = z[3].try_mul(&z[3]).unwrap().try_mul(&z[1]).unwrap().try_mul(&z[2]).unwrap();
    for a in [0.0, 0.5, 1.0] {
        let s = build_s_curved(&lifted, a, 3).unwrap();
        let star = FamilyAStar::new(lifted.clone(), a, 3).unwrap();
        let d = equivalence_defect(&s, &star, &f, &g).unwrap();
        assert!(max_through(&d, 3) < 1e-8, "a = {a}: {:?}", series_magnitudes(&d));
    }
}

#[test]
fn commutator_system_on_flat_lifts() {
    for (name, x, p) in [
        ("euclidean-polar", vec![1.7, 0.4], vec![0.3, -0.8]),
        ("euclidean-spherical", vec![1.3, 1.0, 0.4], vec![0.3, -0.8, 0.5]),
    ] {
        let (cf, pt) = setup(name, &x, &p, 8);
        let lifted = lift_flat(&cf, &pt).unwrap();
        let s = build_s_flat(&lifted, 4).unwrap();
        let z = zc(&pt, 8);
        let n = x.len();
        let f = z[0].try_mul(&z[n]).unwrap().try_mul(&z[2 * n - 1]).unwrap().try_mul(&z[n]).unwrap();
        let g = z[1].try_mul(&z[1]).unwrap().try_mul(&z[n + 1]).unwrap();
        let rep = verify_commutator_identities(&s, &lifted, &[f, g]).unwrap();
        assert!(rep.position < 1e-9 && rep.derivative < 1e-9, "{name}: {rep:?}");
        let (da, db) = connection_identity_defects(&lifted).unwrap();
        assert!(da < 1e-9 && db < 1e-9, "{name}: {da:e} {db:e}");
    }
}

#[test]
fn a2_closed_form_and_canonicity() {
    for (name, x, p) in [
        ("euclidean-polar", vec![1.7, 0.4], vec![0.3, -0.8]),
        ("unit-sphere", vec![1.1, 0.3], vec![0.4, -0.7]),
    ] {
        let (cf, pt) = setup(name, &x, &p, 8);
        let lifted = lift_general(&cf, &pt, Frame::Darboux).unwrap();
        let z = zc(&pt, 8);
        let f = z[0].try_mul(&z[2]).unwrap().try_mul(&z[3]).unwrap().try_mul(&z[1]).unwrap();
        for alpha in 0..4 {
            let a = a_alpha_k(&lifted, alpha, 2, &f).unwrap();
            let b = a2_closed_form(&lifted, alpha, &f).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-10, "{name} {alpha}");
            for beta in 0..4 {
                let q = quantum_canonicity_defect(&lifted, alpha, beta, 3).unwrap();
                assert!(q.max_abs() < 1e-10, "{name} {alpha} {beta}: {}", q.max_abs());
            }
        }
        assert!(matches!(a_alpha_k(&lifted, 0, 4, &f), Err(MorphismError::UnsupportedOrder(4))));
    }
}

#[test]
fn curved_connection_identities_with_curvature_term() {
    let (cf, pt) = setup("unit-sphere", &[1.1, 0.3], &[0.4, -0.7], 8);
    let lifted = lift_general(&cf, &pt, Frame::Darboux).unwrap();
    let (da, db) = connection_identity_defects(&lifted).unwrap();
    assert!(da < 1e-9 && db < 1e-9, "{da:e} {db:e}");
}


#[test]
fn canonicity_matrix_matches_pairwise() {
    let (cf, pt) = setup("euclidean-polar", &[1.7, 0.4], &[0.3, -0.8], 8);
    let lifted = lift_flat(&cf, &pt).unwrap();
    let m = quantum_canonicity_matrix(&lifted, 3).unwrap();
    for a in 0..4 {
        for b in 0..4 {
            let single = quantum_canonicity_defect(&lifted, a, b, 3).unwrap();
            assert_eq!(m[a][b].max_abs_diff(&single).unwrap(), 0.0);
        }
    }
    assert!(quantum_canonicity_matrix(&lifted, 4).is_err());
}

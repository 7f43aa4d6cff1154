use std::error::Error;

use rand_chacha::ChaCha8Rng;

use crate::geometry::{
    adopted_frame, frame_to_adopted, lift_flat, lift_general, point_transform, ConnectionField, Frame,
    LiftedConnection, MetricModel, PhasePoint, PointTransformation,
};
use crate::jetcalc::{CJet, HbarSeries, Jet};
use crate::morphism::{
    build_s_curved, build_s_flat, connection_identity_defects, equivalence_defect, quantum_canonicity_matrix, verify_commutator_identities,
    MorphismS,
};
use crate::quantize::{
    closed_form, formal_adjoint, op_cubic_with, op_quadratic, quantization_morphism, s_order, CoefficientDefect,
    ConfigOp, DiffOperator, MomentumSymbol,
};
use crate::starprod::{
    iterated_covariant_derivative, series_relative_defects, CovariantStar, CurvilinearStar, FamilyAStar,
    FedosovLikeStar, MoyalStar, PhaseCurvature, StarProduct,
};

use super::inputs::{random_cjet, random_polynomial, random_symbol};
use super::RunConfig;

type CaseResult = Result<Outcome, Box<dyn Error + Send + Sync>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum CheckKind {
    MoyalAssociativity,
    FlatCovariance,
    FlatCovariantForm,
    LiftTorsion,
    LiftSymplecticity,
    LiftFrameConsistency,
    LiftFlatReduction,
    FlatEquivalence,
    Commutators,
    ConnectionIdentities,
    Canonicity,
    CurvedEquivalence,
    CurvedAssociativity,
    FedosovAgreement,
    D3Symmetry,
    SOrder(usize),
    Hermiticity(usize),
    NaturalB,
    NaturalA,
}

/// Result of one check at one sample point.
#[derive(Debug, Clone, Default)]
pub(super) struct Outcome {
    pub defect: f64,
    pub orders: Vec<f64>,
    pub coefficients: Vec<CoefficientDefect>,
    pub note: Option<String>,
}

impl Outcome {
    fn scalar(defect: f64) -> Self {
        Outcome {
            defect,
            ..Default::default()
        }
    }

    fn from_orders(orders: Vec<f64>) -> Self {
        Outcome {
            defect: orders.iter().copied().fold(0.0, f64::max),
            orders,
            ..Default::default()
        }
    }
}

/// Polynomial triples per sample point in the Moyal check.
const MOYAL_TRIPLES: usize = 5;
/// Wave functions per sample point in the operator checks.
const PSI_COUNT: usize = 30;
/// Highest ħ order of the curved engines.
const CURVED_MAX: usize = 3;

fn merge_max(acc: &mut Vec<f64>, v: &[f64]) {
    if acc.len() < v.len() {
        acc.resize(v.len(), 0.0);
    }
    for (a, b) in acc.iter_mut().zip(v) {
        *a = a.max(*b);
    }
}

fn phase_coords(pt: &PhasePoint, order: usize) -> Vec<CJet> {
    pt.coordinate_jets(order).iter().map(Jet::to_complex).collect()
}

/// `|S(f ⋆_M g) − Sf ⋆ Sg|_k / max(1, |S(f ⋆_M g)|_k)`.
fn relative_equivalence(s: &MorphismS, star: &dyn StarProduct, f: &CJet, g: &CJet) -> Result<Vec<f64>, Box<dyn Error + Send + Sync>> {
    let d = equivalence_defect(s, star, f, g)?;
    let lhs = s.apply(&MoyalStar::new(s.n(), star.truncation()).star(f, g)?)?;
    Ok(d.terms()
        .iter()
        .zip(lhs.terms())
        .map(|(x, y)| x.max_abs() / y.max_abs().max(1.0))
        .collect())
}

fn associativity_orders(engine: &dyn StarProduct, f: &CJet, g: &CJet, h: &CJet) -> Result<Vec<f64>, Box<dyn Error + Send + Sync>> {
    let k = engine.truncation();
    let lhs = engine.star_series(&engine.star(f, g)?, &HbarSeries::classical(h, k))?;
    let rhs = engine.star_series(&HbarSeries::classical(f, k), &engine.star(g, h)?)?;
    Ok(series_relative_defects(&lhs, &rhs)?)
}

fn darboux(model: &MetricModel, pt: &PhasePoint, order: usize) -> Result<(ConnectionField, LiftedConnection), Box<dyn Error + Send + Sync>> {
    let cf = ConnectionField::new(model, &pt.x, order)?;
    let lifted = lift_general(&cf, pt, Frame::Darboux)?;
    Ok((cf, lifted))
}

/// `max(1, largest coefficient of Γ̃)`; jet-valued lift defects are divided by this.
fn scale(l: &LiftedConnection) -> f64 {
    l.conn.max_abs().max(1.0)
}

/// Per-ħ-power relative defect of two operators applied to the same wave functions.
fn applied_defects(lhs: &DiffOperator, rhs: &DiffOperator, psis: &[CJet]) -> Result<Vec<f64>, Box<dyn Error + Send + Sync>> {
    let mut orders = Vec::new();
    for psi in psis {
        let l = lhs.apply(psi)?;
        let r = rhs.apply(psi)?;
        let top = l.keys().chain(r.keys()).copied().max().unwrap_or(0);
        let mut row = vec![0.0; top + 1];
        for (k, slot) in row.iter_mut().enumerate() {
            let zero = psi.zero_like();
            let a = l.get(&k).unwrap_or(&zero);
            let b = r.get(&k).unwrap_or(&zero);
            *slot = a.relative_defect(b)?;
        }
        merge_max(&mut orders, &row);
    }
    Ok(orders)
}

/// Coefficient values at the point decide; the full-jet defect is noted when large.
fn natural_outcome(pairs: &[(DiffOperator, DiffOperator)]) -> CaseResult {
    let mut at_point: f64 = 0.0;
    let mut full: f64 = 0.0;
    for (x, y) in pairs {
        at_point = at_point.max(x.value_defect(y)?);
        full = full.max(x.relative_defect(y)?);
    }
    let mut out = Outcome::scalar(at_point);
    if full > 1e-12 {
        out.note = Some(format!("full-jet relative defect {full:.1e}"));
    }
    Ok(out)
}

fn significant(defects: Vec<CoefficientDefect>) -> Vec<CoefficientDefect> {
    defects.into_iter().filter(|c| c.defect > 1e-12).collect()
}

/// `g^{ij} R_{ij}`.
fn scalar_curvature(cf: &ConnectionField) -> Result<Jet, Box<dyn Error + Send + Sync>> {
    let n = cf.dimension();
    let mut s = cf.metric.ginv[0][0].zero_like();
    for i in 0..n {
        for j in 0..n {
            s = s.try_add(&cf.metric.ginv[i][j].try_mul(&cf.ricci[i][j])?)?;
        }
    }
    Ok(s)
}

pub(super) fn evaluate(
    kind: CheckKind,
    model: &MetricModel,
    cfg: &RunConfig,
    pt: &PhasePoint,
    rng: &mut ChaCha8Rng,
) -> CaseResult {
    let order = cfg.order;
    let k = cfg.hbar_order;
    let kc = k.min(CURVED_MAX);
    let n = pt.n();
    match kind {
        CheckKind::MoyalAssociativity => {
            let z = phase_coords(pt, order);
            let engine = MoyalStar::new(n, k);
            let mut orders = Vec::new();
            for _ in 0..MOYAL_TRIPLES {
                let f = random_polynomial(rng, &z, 3);
                let g = random_polynomial(rng, &z, 3);
                let h = random_polynomial(rng, &z, 3);
                merge_max(&mut orders, &associativity_orders(&engine, &f, &g, &h)?);
            }
            Ok(Outcome::from_orders(orders))
        }
        CheckKind::FlatCovariance => {
            let t = PointTransformation::to_cartesian(model).ok_or("model has no Cartesian map")?;
            let map = t.phase_map(pt, order)?;
            let zt = phase_coords(&map.target, order);
            let f = random_polynomial(rng, &zt, 3);
            let g = random_polynomial(rng, &zt, 3);
            let moyal = MoyalStar::new(n, k).star(&f, &g)?;
            let pulled = HbarSeries::new(
                moyal
                    .terms()
                    .iter()
                    .map(|t| point_transform(&map, t))
                    .collect::<Result<_, _>>()?,
            );
            let cf = ConnectionField::new(model, &pt.x, order)?;
            let curv = CurvilinearStar::new(&cf, pt, k).star(&point_transform(&map, &f)?, &point_transform(&map, &g)?)?;
            Ok(Outcome::from_orders(series_relative_defects(&curv, &pulled)?))
        }
        CheckKind::FlatCovariantForm => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            let z = phase_coords(pt, order);
            let f = random_polynomial(rng, &z, 3);
            let g = random_polynomial(rng, &z, 3);
            let cov = CovariantStar::new(lift_flat(&cf, pt)?, k)?.star(&f, &g)?;
            let curv = CurvilinearStar::new(&cf, pt, k).star(&f, &g)?;
            Ok(Outcome::from_orders(series_relative_defects(&cov, &curv)?))
        }
        CheckKind::LiftTorsion => {
            let (cf, dar) = darboux(model, pt, order)?;
            let frame = adopted_frame(&cf, pt)?;
            let ad = lift_general(&cf, pt, Frame::Adopted)?;
            let mut d = dar.torsion_defect(None)? / scale(&dar);
            d = d.max(ad.torsion_defect(Some(&frame))? / scale(&ad));
            if model.flat {
                let flat = lift_flat(&cf, pt)?;
                d = d.max(flat.torsion_defect(None)? / scale(&flat));
            }
            Ok(Outcome::scalar(d))
        }
        CheckKind::LiftSymplecticity => {
            let (cf, dar) = darboux(model, pt, order)?;
            let ad = lift_general(&cf, pt, Frame::Adopted)?;
            let (a1, b1) = dar.symplecticity_defects()?;
            let (a2, b2) = ad.symplecticity_defects()?;
            Ok(Outcome::scalar(a1.max(b1).max(a2).max(b2)))
        }
        CheckKind::LiftFrameConsistency => {
            let (cf, dar) = darboux(model, pt, order)?;
            let frame = adopted_frame(&cf, pt)?;
            let ad = lift_general(&cf, pt, Frame::Adopted)?;
            let moved = frame_to_adopted(&dar, &frame)?;
            Ok(Outcome::scalar(moved.conn.max_abs_diff(&ad.conn)? / scale(&ad).max(scale(&moved))))
        }
        CheckKind::LiftFlatReduction => {
            let (cf, dar) = darboux(model, pt, order)?;
            let flat = lift_flat(&cf, pt)?;
            Ok(Outcome::scalar(dar.conn.max_abs_diff(&flat.conn)? / scale(&dar).max(scale(&flat))))
        }
        CheckKind::FlatEquivalence => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            let lifted = lift_flat(&cf, pt)?;
            let s = build_s_flat(&lifted, kc)?;
            let star = CovariantStar::new(lifted, kc)?;
            let z = phase_coords(pt, order);
            let f = random_polynomial(rng, &z, 3);
            let g = random_polynomial(rng, &z, 3);
            Ok(Outcome::from_orders(relative_equivalence(&s, &star, &f, &g)?))
        }
        CheckKind::Commutators => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            let lifted = lift_flat(&cf, pt)?;
            let s = build_s_flat(&lifted, k)?;
            let z = phase_coords(pt, order);
            let tests = [random_polynomial(rng, &z, 3), random_polynomial(rng, &z, 3)];
            let rep = verify_commutator_identities(&s, &lifted, &tests)?;
            Ok(Outcome::scalar(rep.position.max(rep.derivative)))
        }
        CheckKind::ConnectionIdentities => {
            let (_, lifted) = darboux(model, pt, order)?;
            let (a, b) = connection_identity_defects(&lifted)?;
            Ok(Outcome::scalar(a.max(b)))
        }
        CheckKind::Canonicity => {
            let (_, lifted) = darboux(model, pt, order)?;
            let d = quantum_canonicity_matrix(&lifted, 3)?
                .iter()
                .flatten()
                .map(CJet::max_abs)
                .fold(0.0, f64::max);
            Ok(Outcome::scalar(d))
        }
        CheckKind::CurvedEquivalence => {
            let (_, lifted) = darboux(model, pt, order)?;
            let s = build_s_curved(&lifted, cfg.a, kc)?;
            let star = FamilyAStar::new(lifted, cfg.a, kc)?;
            let z = phase_coords(pt, order);
            let f = random_polynomial(rng, &z, 3);
            let g = random_polynomial(rng, &z, 3);
            Ok(Outcome::from_orders(relative_equivalence(&s, &star, &f, &g)?))
        }
        CheckKind::CurvedAssociativity => {
            let (_, lifted) = darboux(model, pt, order)?;
            let star = FamilyAStar::new(lifted, cfg.a, kc)?;
            let z = phase_coords(pt, order);
            let f = random_polynomial(rng, &z, 3);
            let g = random_polynomial(rng, &z, 3);
            let h = random_polynomial(rng, &z, 3);
            Ok(Outcome::from_orders(associativity_orders(&star, &f, &g, &h)?))
        }
        CheckKind::FedosovAgreement => {
            let (_, lifted) = darboux(model, pt, order)?;
            let z = phase_coords(pt, order);
            let f = random_polynomial(rng, &z, 3);
            let g = random_polynomial(rng, &z, 3);
            let fam = FamilyAStar::new(lifted.clone(), 0.0, kc)?.star(&f, &g)?;
            let fed = FedosovLikeStar::new(lifted, kc)?.star(&f, &g)?;
            Ok(Outcome::from_orders(series_relative_defects(&fam, &fed)?))
        }
        CheckKind::D3Symmetry => {
            let (_, lifted) = darboux(model, pt, order)?;
            let z = phase_coords(pt, order);
            let f = random_polynomial(rng, &z, 3);
            let df = iterated_covariant_derivative(&f, &lifted, 3)?;
            let d3 = PhaseCurvature::new(&lifted)?.d3(&df)?;
            let scale = d3.components().iter().map(CJet::max_abs).fold(1.0, f64::max);
            let mut asym: f64 = 0.0;
            for (s, t) in [(0, 1), (0, 2), (1, 2)] {
                asym = asym.max(d3.asymmetry(s, t)?);
            }
            Ok(Outcome::scalar(asym / scale))
        }
        CheckKind::SOrder(d) => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            let symbol = random_symbol(rng, n, d, order);
            let s = quantization_morphism(&cf, cfg.a, cfg.b)?;
            let lhs = s_order(&symbol, &s, &cf)?;
            let rhs = closed_form(&symbol, &cf, cfg.a, cfg.b)?;
            let psis: Vec<CJet> = (0..PSI_COUNT).map(|_| random_cjet(rng, n, order)).collect();
            let mut out = Outcome::from_orders(applied_defects(&lhs, &rhs, &psis)?);
            out.coefficients = significant(lhs.coefficient_defects(&rhs)?);
            if d == 3 && cfg.b != 0.0 {
                let alt = op_cubic_with(&symbol, &cf, 0.75 * (1.0 - cfg.a), 0.25 * (1.0 - 3.0 * cfg.b))?;
                let alt_defect = applied_defects(&lhs, &alt, &psis)?.into_iter().fold(0.0, f64::max);
                out.note = Some(format!(
                    "with the cubic weight (1-3b)/4 in place of (1-b)/4 the defect is {alt_defect:.1e}"
                ));
            }
            Ok(out)
        }
        CheckKind::Hermiticity(d) => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            let symbol = random_symbol(rng, n, d, order);
            let op = closed_form(&symbol, &cf, cfg.a, cfg.b)?;
            let adj = formal_adjoint(&op, &cf.metric)?;
            let mut out = Outcome::scalar(adj.relative_defect(&op)?);
            out.coefficients = significant(adj.coefficient_defects(&op)?);
            Ok(out)
        }
        CheckKind::NaturalB => {
            let cf = ConnectionField::new(model, &pt.x, order)?;
            let h = MomentumSymbol::natural(&cf);
            let base = op_quadratic(&h, &cf, cfg.a, 0.0)?;
            let mut pairs = Vec::new();
            for b in [1.0, 0.3, cfg.b] {
                pairs.push((op_quadratic(&h, &cf, cfg.a, b)?, base.clone()));
            }
            natural_outcome(&pairs)
        }
        CheckKind::NaturalA => {
            // op(a) − op(1) = ħ²(1 − a)·g^{ij}R_{ij}/8; zero on flat models
            let cf = ConnectionField::new(model, &pt.x, order)?;
            let h = MomentumSymbol::natural(&cf);
            let minimal = op_quadratic(&h, &cf, 1.0, cfg.b)?;
            let curvature = scalar_curvature(&cf)?;
            let mut pairs = Vec::new();
            for a in [0.0, 0.5, cfg.a] {
                let shift = op_quadratic(&h, &cf, a, cfg.b)?.try_sub(&minimal)?;
                let expect = DiffOperator::graded(
                    2,
                    ConfigOp::multiplication(curvature.scale((1.0 - a) / 8.0).to_complex()),
                );
                pairs.push((shift, expect));
            }
            natural_outcome(&pairs)
        }
    }
}

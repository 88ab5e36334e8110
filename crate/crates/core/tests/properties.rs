use std::f64::consts::TAU;

use lmgd_core::analysis::{self, Regime};
use lmgd_core::dynamics::{self, IntegratorConfig};
use lmgd_core::fixed_points::{self, BranchSign, Stability, DEFAULT_SCAN_SAMPLES, MERGE_DISTANCE};
use lmgd_core::model;
use lmgd_core::{ModelParams, PhasePoint};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_params(rng: &mut StdRng) -> ModelParams {
    let l: f64 = rng.gen_range(0.0..10.0);
    let d_max = 1.0 / l.max(1.0);
    ModelParams::new(rng.gen_range(-d_max..d_max), l, rng.gen_range(0.05..20.0)).unwrap()
}

fn classify_at(p: &ModelParams, x: &PhasePoint) -> Stability {
    let h = model::hessian(p, x).unwrap();
    let det = h.zz * h.phiphi - h.zphi * h.zphi;
    if det < 0.0 {
        Stability::Saddle
    } else if h.phiphi > 0.0 {
        Stability::Minimum
    } else {
        Stability::Maximum
    }
}

proptest! {
    #[test]
    fn energy_is_even_and_periodic_in_phase(
        d in -3.0..3.0f64, l in 0.0..10.0f64, k in 0.05..20.0f64, t in 0.0..1.0f64, phi in -10.0..10.0f64,
    ) {
        let p = ModelParams::new(d, l, k).unwrap();
        let z = -1.0 + t * (p.z_upper() + 1.0);
        let h = model::hamiltonian(&p, &PhasePoint::new(z, phi)).unwrap();
        let tol = 1e-12 * (1.0 + h.abs());
        prop_assert!((model::hamiltonian(&p, &PhasePoint::new(z, -phi)).unwrap() - h).abs() <= tol);
        prop_assert!((model::hamiltonian(&p, &PhasePoint::new(z, phi + TAU)).unwrap() - h).abs() <= tol);
    }

    #[test]
    fn coupling_vanishes_on_the_boundary(d in -3.0..3.0f64, l in 0.0..10.0f64, k in -0.99..3.0f64, phi in 0.0..TAU) {
        let p = ModelParams::new(d, l, k).unwrap();
        let edge = p.z_upper();
        let h = model::hamiltonian(&p, &PhasePoint::new(edge, phi)).unwrap();
        prop_assert_eq!(h, (d + l * edge / 2.0) * edge);
    }

    #[test]
    fn excitation_ratio_endpoints(d in -1e3..1e3f64, l in -1e3..1e3f64) {
        for sign in [BranchSign::Plus, BranchSign::Minus] {
            prop_assert_eq!(fixed_points::k_of_z(d, l, 1.0, sign).unwrap(), 1.0);
            prop_assert_eq!(fixed_points::k_of_z(d, l, -1.0, sign).unwrap(), -1.0);
        }
    }
}

#[test]
fn fixed_points_solve_the_closed_form_and_are_stationary() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..100 {
        let p = random_params(&mut rng);
        for f in fixed_points::find_fixed_points(&p) {
            let g = model::gradient(&p, &f.point()).unwrap();
            assert_eq!(g.dh_dphi, 0.0, "{p:?} {f:?}");
            assert!(g.dh_dz.abs() < 1e-9, "{p:?} {f:?}");
            if f.z.abs() < 1e-12 {
                continue;
            }
            let err = [BranchSign::Plus, BranchSign::Minus]
                .iter()
                .filter_map(|&s| fixed_points::k_of_z(p.delta, p.lambda_ratio, f.z, s).ok())
                .map(|k| (k - p.k).abs() / p.k.abs())
                .fold(f64::INFINITY, f64::min);
            assert!(err < 1e-8, "{p:?} {f:?}: {err:e}");
        }
    }
}

#[test]
fn scan_matches_inverted_closed_form() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..200 {
        let p = random_params(&mut rng);
        let mut scan: Vec<f64> = fixed_points::find_fixed_points(&p).iter().map(|f| f.z).collect();
        scan.sort_by(f64::total_cmp);
        scan.dedup_by(|a, b| (*a - *b).abs() < MERGE_DISTANCE);
        let inv: Vec<f64> = fixed_points::invert_excitation_ratio(&p, 20_000).iter().map(|r| r.0).collect();
        assert_eq!(scan.len(), inv.len(), "{p:?}: {scan:?} vs {inv:?}");
        for (a, b) in scan.iter().zip(&inv) {
            assert!((a - b).abs() < 1e-7, "{p:?}: {a} vs {b}");
        }
    }
}

#[test]
fn classification_survives_phase_turns_and_denser_scans() {
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let coarse = fixed_points::find_fixed_points(&p);
        let fine = fixed_points::find_fixed_points_with(&p, 2 * DEFAULT_SCAN_SAMPLES);
        assert_eq!(fixed_points::branch_counts(&coarse), fixed_points::branch_counts(&fine), "{p:?}");
        for (a, b) in coarse.iter().zip(&fine) {
            assert_eq!(a.classification, b.classification, "{p:?}");
            assert!((a.z - b.z).abs() < 1e-9);
        }
        for f in coarse.iter().filter(|f| !f.boundary) {
            let turned = PhasePoint::new(f.z, f.phi() + TAU);
            assert_eq!(classify_at(&p, &turned), f.classification, "{p:?} {f:?}");
        }
        let regime = analysis::regime_report(&p, &fine);
        let base = analysis::classify_regime(&p);
        assert_eq!(regime.regime, base.regime);
        assert_eq!(regime.fixed_point_counts, base.fixed_point_counts);
    }
}

#[test]
fn josephson_counts_stay_inside_the_window_or_are_noted() {
    for l in [2.0, 3.0, 6.0, 10.0] {
        for k in fixed_points::linspace(0.05, 60.0, 120) {
            let r = analysis::classify_regime(&ModelParams::new(0.0, l, k).unwrap());
            if r.regime != Regime::JosephsonBistable {
                continue;
            }
            let (lo, hi) = r.critical_window.expect("window for lambda_ratio >= 2");
            assert!((lo - 1e-9..=hi + 1e-9).contains(&k) || !r.notes.is_empty(), "{l} {k}: {r:?}");
        }
    }
}

#[test]
fn halving_tolerances_converges() {
    // a few oscillation periods; phase errors grow linearly with time
    let mut rng = StdRng::seed_from_u64(14);
    for _ in 0..50 {
        let p = random_params(&mut rng);
        let z0 = rng.gen_range(-0.98..p.z_upper() - 0.02);
        let x0 = PhasePoint::new(z0, rng.gen_range(0.0..TAU));
        let loose = IntegratorConfig::default().with_tau_max(10.0);
        let tight = IntegratorConfig { abs_tol: loose.abs_tol / 2.0, rel_tol: loose.rel_tol / 2.0, ..loose };
        let a = dynamics::integrate(&p, &x0, &loose).unwrap();
        let b = dynamics::integrate(&p, &x0, &tight).unwrap();
        if a.termination != dynamics::Termination::Completed {
            continue;
        }
        let (ea, eb) = (a.last(), b.last());
        let diff = (ea.z - eb.z).abs().max((ea.phi - eb.phi).abs());
        assert!(diff < 10.0 * loose.abs_tol, "{p:?} from {x0:?}: {diff:e}");
    }
}

#[test]
fn trajectories_stay_in_the_domain() {
    let mut rng = StdRng::seed_from_u64(15);
    let cfg = IntegratorConfig::default().with_tau_max(30.0);
    for _ in 0..40 {
        let p = random_params(&mut rng);
        let x0 = PhasePoint::new(rng.gen_range(-0.999..p.z_upper() - 1e-3), rng.gen_range(0.0..TAU));
        let t = dynamics::integrate(&p, &x0, &cfg).unwrap();
        for s in &t.samples {
            assert!(p.k - s.z >= 0.0 && s.z.abs() <= 1.0, "{p:?}: {s:?}");
        }
    }
}

#[test]
fn phase_class_ignores_whole_turns() {
    let mut rng = StdRng::seed_from_u64(16);
    for _ in 0..20 {
        let p = random_params(&mut rng);
        let z0 = rng.gen_range(-0.95..p.z_upper() - 0.05);
        let phi0 = rng.gen_range(0.0..TAU);
        let a = dynamics::classify_phase(&p, &PhasePoint::new(z0, phi0));
        let b = dynamics::classify_phase(&p, &PhasePoint::new(z0, phi0 + TAU));
        assert_eq!(a, b, "{p:?} z0={z0} phi0={phi0}");
    }
}

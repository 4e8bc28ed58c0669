use super::*;
use crate::analytic::Family;
use crate::conformal::{exterior_map, validate_curve, FitOptions};
use crate::qc::wirtinger;
use crate::qc::WirtingerMode;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Cx<f64> {
    Cx::new(re, im)
}

fn schlicht(family: Family) -> SchlichtFunction<f64> {
    SchlichtFunction::from_family(&family, 64).unwrap()
}

fn small_params() -> ConstructionParams {
    ConstructionParams {
        n: 128,
        n_corrected: 6,
        n_aw: 3,
        subharmonic_grid: 40,
        dilatation_radii: 4,
        dilatation_angles: 8,
        ..ConstructionParams::default()
    }
}

#[test]
fn mobius_fixes_invariant_circle_and_maps_zero_to_z0() {
    let z0 = c(0.3, -0.2);
    let m = Mobius::new(z0).unwrap();
    assert!((m.eval(c(0.0, 0.0)) - z0).norm() < 1e-15);
    let r = m.invariant_radius();
    for j in 0..16 {
        let z = Cx::from_polar(r, j as f64 * 0.4);
        assert!((m.eval(z).norm() - r).abs() < 1e-14);
        assert!((m.inverse(m.eval(z)) - z).norm() < 1e-14);
    }
    assert!(Mobius::new(c(1.0, 0.0)).is_err());
    assert!(Mobius::new(c(0.0, 0.0)).unwrap().pole().is_none());
}

#[test]
fn mobius_derivatives_match_differences() {
    let m = Mobius::new(c(0.25, 0.1)).unwrap();
    let z = c(0.2, 0.3);
    let h = 1e-5;
    let d = (m.eval(z + h) - m.eval(z - h)) / (2.0 * h);
    assert!((d - m.derivative(z)).norm() < 1e-9);
    let d2 = (m.derivative(z + h) - m.derivative(z - h)) / (2.0 * h);
    assert!((d2 - m.second(z)).norm() < 1e-8);
    let p = m.pole().unwrap();
    assert!(m.derivative(p + 1e-9).norm() > 1e12);
}

#[test]
fn newton_inverts_an_affine_real_linear_map() {
    // w = 2z + 0.5 zbar + 1: exact inverse by hand.
    let map = |z: Cx<f64>| Ok((z * 2.0 + z.conj() * 0.5 + 1.0, c(2.0, 0.0), c(0.5, 0.0)));
    let w = c(3.0, 1.5);
    let z = newton_invert(map, w, c(0.0, 0.0)).unwrap();
    // Real part: 2.5 x + 1 = 3; imaginary part: 1.5 y = 1.5.
    assert!((z - c(0.8, 1.0)).norm() < 1e-14);
}

#[test]
fn becker_radius_of_constant_values() {
    assert!(becker_disk_radius(&[c(1.0, 0.0); 4]) < 1e-16);
    assert!((becker_disk_radius(&[c(2.0, 0.0)]) - 1.0 / 3.0).abs() < 1e-16);
    assert!((becker_disk_radius(&[c(0.5, 0.0), c(1.0, 1.0)]) - 0.2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn time_grids() {
    let ts: Vec<f64> = corrected_times(1.0, 5.0, 24);
    assert_eq!(ts.len(), 24);
    assert!(ts[0] > 1.0 && (ts[23] - 6.0).abs() < 1e-12);
    let gaps: Vec<f64> = ts.iter().map(|t| (-t).exp()).collect::<Vec<_>>().windows(2).map(|w| w[0] - w[1]).collect();
    assert!(gaps.iter().all(|g| (g - gaps[0]).abs() < 1e-12));
    let aw = aw_times(2.0, 4);
    assert_eq!(aw, vec![0.25, 0.75, 1.25, 1.75]);
}

#[test]
fn params_reject_unknown_fields_and_bad_values() {
    let p: ConstructionParams = serde_json::from_str(r#"{"n": 256}"#).unwrap();
    assert_eq!(p.n, 256);
    assert_eq!(p.n_corrected, 24);
    assert!(serde_json::from_str::<ConstructionParams>(r#"{"nn": 256}"#).is_err());
    assert!(ConstructionParams { tspan: -1.0, ..ConstructionParams::default() }.validate().is_err());
    assert!(ConstructionParams { n: 8, ..ConstructionParams::default() }.validate().is_err());
}

/// `1/G` inside the disk written out for `f = z + c z^2`, independent of `AwExtension`.
fn aw_quadratic(cq: f64, z: Cx<f64>) -> Cx<f64> {
    let zb = z.conj();
    let f = zb + zb * zb * cq;
    let f1 = zb * (2.0 * cq) + 1.0;
    let f2 = c(2.0 * cq, 0.0);
    let a = 1.0 - z.norm_sqr();
    (f + f1 * a / (z - f2 / f1 * (a / 2.0))).inv()
}

#[test]
fn z0_matches_a_direct_minimization() {
    let cq = 0.2;
    let state = ConstructionState::new(schlicht(Family::quadratic(cq)), None).unwrap();
    // Grid search for the zero of the hand-written G, refined by shrinking grids.
    let (mut best, mut h) = (c(0.0, 0.0), 0.02);
    for _ in 0..12 {
        let centre = best;
        let mut bv = f64::INFINITY;
        for i in -20..=20 {
            for j in -20..=20 {
                let z = centre + c(i as f64 * h, j as f64 * h);
                if z.norm() >= 0.99 || z.norm() == 0.0 {
                    continue;
                }
                let v = aw_quadratic(cq, z).norm();
                if v < bv {
                    bv = v;
                    best = z;
                }
            }
        }
        h /= 8.0;
    }
    let z0 = best * state.t0.exp();
    assert!((state.z0 - z0).norm() < 1e-9, "{} vs {}", state.z0, z0);
    assert!(state.z0.norm() <= (3.0 * state.q).sqrt());
    assert!(state.t2 <= state.t1 && state.t0 <= state.t1);
}

#[test]
fn identity_has_trivial_correction() {
    let state = ConstructionState::new(schlicht(Family::Identity), Some(0.05)).unwrap();
    assert!(state.z0.norm() < 1e-14);
    assert_eq!(state.q_hat(), 0.0);
    // G is the identity, so Psi(z) = e^{-t0} z.
    for z in [c(0.3, 0.1), c(-0.5, 0.4), c(0.9, 0.0)] {
        let (v, a, b) = state.psi.jet(z).unwrap();
        let s = (-state.t0).exp();
        assert!((v - z * s).norm() < 1e-14);
        assert!((a - s).norm() < 1e-14 && b.norm() < 1e-14);
    }
}

#[test]
fn declared_q_below_estimate_is_rejected() {
    let err = ConstructionState::new(schlicht(Family::quadratic(0.2)), Some(0.01)).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
}

#[test]
fn psi_jet_matches_numerical_wirtinger() {
    let state = ConstructionState::new(schlicht(Family::quadratic(0.2)), None).unwrap();
    for z in [c(0.2, 0.1), c(-0.4, 0.3), c(0.1, -0.6)] {
        let (_, a, b) = state.psi.jet(z).unwrap();
        let (na, nb) = wirtinger(&state.psi, z, WirtingerMode::FiniteDifference).unwrap();
        assert!((a - na).norm() < 1e-7 && (b - nb).norm() < 1e-7);
        let w = state.psi.eval(z).unwrap();
        let back = state.psi.inverse(w, z * 0.9).unwrap();
        assert!((back - z).norm() < 1e-12);
    }
}

#[test]
fn corrected_curves_are_nested_jordan_curves() {
    let state = ConstructionState::new(schlicht(Family::quadratic(0.2)), None).unwrap();
    let mut prev: Option<Vec<Cx<f64>>> = None;
    for dt in [0.0, 0.5, 1.0, 3.0] {
        let curve = state.curve_at(state.t1 + dt).unwrap();
        validate_curve(&curve, 512).unwrap();
        let (_, xt, _) = curve.derivatives(0.7).unwrap();
        assert!((xt - curve.tangent(0.7).unwrap()).norm() < 1e-14);
        let pts = crate::conformal::sample_curve(&curve, 512).unwrap();
        assert_eq!(crate::geometry::winding_number(&pts, c(0.0, 0.0)), 1);
        if let Some(outer) = &prev {
            assert!(pts.iter().all(|&p| crate::geometry::winding_number(outer, p) == 1));
        }
        prev = Some(pts);
    }
    assert!(state.curve_at(state.t2 - 0.1).is_err());
}

#[test]
fn time_derivative_matches_differences() {
    let state = ConstructionState::new(schlicht(Family::quadratic(0.2)), None).unwrap();
    let t = state.t1 + 0.3;
    let h = 1e-5;
    let (p, m) = (state.curve_at(t + h).unwrap(), state.curve_at(t - h).unwrap());
    let fd = (p.point(1.1).unwrap() - m.point(1.1).unwrap()) / (2.0 * h);
    let exact = state.curve_at(t).unwrap().time_derivative(1.1).unwrap();
    assert!((fd - exact).norm() < 1e-8);
}

#[test]
fn identity_trace_is_one() {
    let state = ConstructionState::new(schlicht(Family::Identity), Some(0.05)).unwrap();
    let t = state.t1 + 0.5;
    let map = exterior_map(&state.curve_at(t).unwrap(), &FitOptions { n: 64, ..FitOptions::default() }, None).unwrap();
    let trace = herglotz_boundary(&state, t, &map).unwrap();
    assert!(trace.re_p.iter().all(|v| (v - 1.0).abs() < 1e-12));
    assert!(trace.im_p.iter().all(|v| v.abs() < 1e-12));
    assert!(trace.k_hat < 1e-12);
    assert!((trace.eval_exterior(c(1.5, 0.5)).unwrap() - 1.0).norm() < 1e-12);
    assert!(trace.eval_exterior(c(0.5, 0.0)).is_err());
}

#[test]
fn trace_coefficients_reproduce_samples() {
    let state = ConstructionState::new(schlicht(Family::quadratic(0.2)), None).unwrap();
    let t = state.t1 + 0.2;
    let map = exterior_map(&state.curve_at(t).unwrap(), &FitOptions { n: 256, ..FitOptions::default() }, None).unwrap();
    let trace = herglotz_boundary(&state, t, &map).unwrap();
    assert!(trace.re_p.iter().all(|&v| v > 0.0));
    assert!(trace.im_p.iter().sum::<f64>().abs() < 1e-10);
    // p(1/w) on |w| = 1 at w = e^{i theta_j} is sample j.
    for j in [0, 37, 200] {
        let w = Cx::from_polar(1.0, trace.theta[j]);
        let v = trace.eval_exterior(w).unwrap();
        assert!((v - trace.values()[j]).norm() < 1e-8, "{j}: {v} vs {}", trace.values()[j]);
    }
}

#[test]
fn subharmonicity_of_a_power_of_the_modulus() {
    // Psi^{-1} = identity: phi = |w|^{-a} has Laplacian a^2 |w|^{-a-2} > 0.
    let side = 41;
    let h = 0.05;
    let mut values = Vec::new();
    for j in 0..side {
        for i in 0..side {
            values.push(Some(c(-1.0 + h * i as f64, -1.0 + h * j as f64)));
        }
    }
    let grid = InverseGrid { h, side, values, inside: side * side, failures: 0 };
    let r = subharmonicity_min(&grid, 2.0);
    assert!(r.min_laplacian > 0.0);
    assert!(r.near_pole > 0 && r.nodes > 0);
}

#[test]
fn tangent_disks_outside_a_circle() {
    let circle = crate::conformal::Circle { center: c(0.2, 0.0), radius: 0.5 };
    assert_eq!(tangent_disk_failures(&circle, 0.1, 64).unwrap(), 0);
    assert_eq!(tangent_disk_failures(&circle, 50.0, 64).unwrap(), 0);
    // Concave stretches of a dented curve swallow large tangent disks.
    let dented = crate::conformal::CurveFn {
        point: |t: f64| Cx::from_polar(1.0 + 0.4 * (3.0 * t).cos(), t),
        tangent: |t: f64| {
            let r = 1.0 + 0.4 * (3.0 * t).cos();
            let dr = -1.2 * (3.0 * t).sin();
            Cx::from_polar(1.0, t) * c(dr, r)
        },
    };
    assert!(tangent_disk_failures(&dented, 5.0, 64).unwrap() > 0);
}

#[test]
fn check_outcome_directions() {
    assert!(CheckOutcome::at_most("x", 1.0, 2.0, String::new()).passed);
    assert!(!CheckOutcome::at_most("x", 3.0, 2.0, String::new()).passed);
    assert!(CheckOutcome::at_least("x", 3.0, 2.0, String::new()).passed);
    let r = CheckOutcome::recorded("x", 7.0, String::new());
    assert!(r.passed && !r.asserted);
    assert_eq!(CheckOutcome::at_most("x", 1.0, 2.5, String::new()).slack(), Some(1.5));
    assert_eq!(r.slack(), None);
}

#[test]
fn identity_run_is_accepted_and_extends_to_the_identity() {
    let (cons, report) = run_construction(schlicht(Family::Identity), Some(0.05), small_params()).unwrap();
    assert!(report.accepted, "{:?}", report.failed_checks());
    assert!(report.k0 < 1e-10);
    let ext = FinalExtension::new(&cons);
    for z in [c(0.3, 0.2), c(1.5, 0.5), c(-4.0, 2.0), c(10.0, -30.0)] {
        assert!((ext.eval(z).unwrap() - z).norm() < 1e-9 * (1.0 + z.norm()), "{z}");
    }
    assert!(report.dilatation.iter().all(|s| s.abs_mu < 1e-6));
    let json = serde_json::to_string(&report).unwrap();
    let back: ConstructionReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.checks.len(), report.checks.len());
}

#[test]
fn final_extension_is_continuous_across_the_seams() {
    let cons = Construction::build(schlicht(Family::quadratic(0.2)), None, small_params()).unwrap();
    let ext = FinalExtension::new(&cons);
    let t1 = cons.state.t1;
    for th in [0.3, 2.0, 4.5] {
        let inner = ext.eval(Cx::from_polar(1.0 - 1e-9, th)).unwrap();
        let outer = ext.eval(Cx::from_polar(1.0, th)).unwrap();
        assert!((inner - outer).norm() < 1e-7);
        let below = ext.eval_polar(t1 - 1e-9, th).unwrap();
        let above = ext.eval_polar(t1, th).unwrap();
        assert!((below - above).norm() < 1e-6 * below.norm(), "{below} vs {above}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_inverse_roundtrip(x in -0.6f64..0.6, y in -0.6f64..0.6, zr in 0.0f64..0.9, za in 0.0f64..6.3) {
        let m = Mobius::new(c(x, y) * 0.9).unwrap();
        let z = Cx::from_polar(zr, za);
        prop_assert!((m.inverse(m.eval(z)) - z).norm() < 1e-12);
    }

    #[test]
    fn newton_roundtrip_for_real_linear_maps(a in 1.0f64..3.0, b in -0.9f64..0.9, wr in -2.0f64..2.0, wi in -2.0f64..2.0) {
        let map = move |z: Cx<f64>| Ok((z * a + z.conj() * b, c(a, 0.0), c(b, 0.0)));
        let w = c(wr, wi);
        let z = newton_invert(map, w, c(0.0, 0.0)).unwrap();
        prop_assert!((z * a + z.conj() * b - w).norm() < 1e-12);
    }
}

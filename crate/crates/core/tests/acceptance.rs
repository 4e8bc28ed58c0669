//! One test per acceptance criterion. Each prints a single `criterion N: PASS|FAIL` line
//! before asserting, so `cargo test --test acceptance -- --nocapture` gives the summary.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qcbecker::analytic::{Family, QEstimate, SchlichtFunction};
use qcbecker::bounds::{angular_derivative_bound, minimize_angular_bound};
use qcbecker::conformal::{exterior_map, Circle, Ellipse, FitOptions};
use qcbecker::construction::{
    names, estimate_grid, run_construction, ConstructionParams, ConstructionReport,
};
use qcbecker::loewner::{chain_from_herglotz, koebe_field, solve_lk_ode, unit_field, ChainOptions};
use qcbecker::qc::{beltrami, AwExtension, WirtingerMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, passed: bool, line: String) {
    println!("criterion {n:>2}: {} {line}", if passed { "PASS" } else { "FAIL" });
    assert!(passed, "criterion {n} failed: {line}");
}

fn schlicht(family: Family) -> SchlichtFunction<f64> {
    SchlichtFunction::from_family(&family, 64).unwrap()
}

fn q_hat(f: &SchlichtFunction<f64>) -> f64 {
    QEstimate::sample(f, &estimate_grid().unwrap()).unwrap().schwarzian
}

struct Run {
    report: ConstructionReport,
    elapsed: Duration,
}

/// The reference run: `z + 0.2 z^2`, default parameters (`n = 512`, 24 corrected times).
fn quadratic_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let (_, report) = run_construction(schlicht(Family::quadratic(0.2)), None, ConstructionParams::default()).unwrap();
        Run { report, elapsed: start.elapsed() }
    })
}

fn check_line(report: &ConstructionReport, name: &str) -> (bool, String) {
    let c = report.check(name).unwrap_or_else(|| panic!("check {name} missing"));
    let bound = c.bound.map(|b| format!("{b:.6e}")).unwrap_or_else(|| "-".into());
    (c.passed, format!("{name}: measured {:.6e}, bound {bound} ({})", c.measured, c.detail))
}

fn checks_verdict(n: u32, report: &ConstructionReport, checks: &[&str]) {
    let lines: Vec<(bool, String)> = checks.iter().map(|c| check_line(report, c)).collect();
    let passed = lines.iter().all(|l| l.0);
    verdict(n, passed, lines.into_iter().map(|l| l.1).collect::<Vec<_>>().join("; "));
}

#[test]
fn criterion_01_aw_dilatation() {
    let mut worst_slack = f64::INFINITY;
    let mut lines = Vec::new();
    let mut passed = true;
    for family in [Family::quadratic(0.05), Family::quadratic(0.1), Family::quadratic(0.2), Family::cubic(0.15)] {
        let start = Instant::now();
        let f = schlicht(family.clone());
        let bound = 3.0 * q_hat(&f) + 1e-3;
        let g = AwExtension::new(f);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for _ in 0..4096 {
            let z = Complex64::from_polar(rng.gen_range(0.01..=0.999), rng.gen_range(0.0..std::f64::consts::TAU));
            worst = worst.max(beltrami(&g, z, WirtingerMode::Analytic).unwrap().mu.norm());
        }
        let secs = start.elapsed().as_secs_f64();
        passed &= worst <= bound && secs <= 10.0;
        worst_slack = worst_slack.min(bound - worst);
        lines.push(format!("{} {:?}: max |mu| {worst:.5e} <= {bound:.5e} in {secs:.2}s", family.name(), family.parameter().re));
    }
    verdict(1, passed, format!("{}; min slack {worst_slack:.3e}", lines.join(", ")));
}

#[test]
fn criterion_02_becker_regimes() {
    let run = quadratic_run();
    let (aw_ok, aw) = check_line(&run.report, names::AW_BECKER);
    let (cor_ok, cor) = check_line(&run.report, names::CORRECTED_BECKER);
    let k0 = run.report.k0;
    let secs = run.elapsed.as_secs_f64();
    let passed = aw_ok && cor_ok && k0 < 1.0 && secs <= 300.0;
    verdict(2, passed, format!("{aw}; {cor}; k0 = {k0:.6}; run {secs:.1}s"));
}

#[test]
fn criterion_03_angular_derivative() {
    let start = Instant::now();
    let k = 0.999;
    let (eps, min) = minimize_angular_bound(k, 1e-3, 1e3, 121).unwrap();
    let slack_ok = 165.0 - min >= 1.0;
    let at = |e: f64| angular_derivative_bound(e, k).unwrap();
    let (lo, lower) = (at(1e-8), at(1e-12));
    let (hi, higher) = (at(1e8), at(1e12));
    let blows_up = lo > 10.0 * min && lower >= lo && hi > 10.0 * min && higher >= hi;
    let secs = start.elapsed().as_secs_f64();
    let passed = min < 165.0 && slack_ok && blows_up && secs < 1.0;
    verdict(
        3,
        passed,
        format!(
            "min M = {min:.6} at eps = {eps:.4} (needs < 165 with slack >= 1, slack {:.4}); \
             M(1e-8) = {lo:.3e}, M(1e-12) = {lower:.3e}, M(1e8) = {hi:.3e}, M(1e12) = {higher:.3e}; {secs:.3}s",
            165.0 - min
        ),
    );
}

#[test]
fn criterion_04_exterior_map_oracle() {
    let start = Instant::now();
    let origin = Complex64::new(0.0, 0.0);
    let ellipse = Ellipse { center: origin, a: 2.0, b: 1.0, angle: 0.0 };
    let m = exterior_map(&ellipse, &FitOptions { n: 512, ..Default::default() }, None).unwrap();
    let cap_err = (m.capacity - 1.5).abs();
    let exact = |z: Complex64| 1.5 * z + 0.5 / z;
    // Node images are exact curve points, so this measures the boundary correspondence.
    let mut img_err = m.thetas().iter().zip(&m.boundary).map(|(&t, &w)| (w - exact(Complex64::cis(t))).norm()).fold(0.0, f64::max);
    // Off-grid through the series; the radius sits a rounding error outside the circle.
    for j in 0..1000 {
        let z = Complex64::from_polar(1.0 + 1e-12, std::f64::consts::TAU * (j as f64 + 0.37) / 1000.0);
        img_err = img_err.max((m.eval(z).unwrap() - exact(z)).norm());
    }
    let rel_img = img_err / m.diameter;

    let circle = Circle { center: Complex64::new(0.3, -0.2), radius: 1.7 };
    let c = exterior_map(&circle, &FitOptions { n: 512, ..Default::default() }, None).unwrap();
    let mut circ_err = (c.capacity - 1.7).abs();
    for j in 0..100 {
        let z = Complex64::from_polar(1.3, 0.1 + j as f64);
        circ_err = circ_err.max((c.eval(z).unwrap() - (circle.center + 1.7 * z)).norm());
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = cap_err <= 1e-6 && rel_img <= 1e-6 && circ_err <= 1e-10 && secs < 1.0;
    verdict(
        4,
        passed,
        format!("ellipse capacity error {cap_err:.3e}, boundary error {rel_img:.3e} diam; circle error {circ_err:.3e}; {secs:.3}s"),
    );
}

#[test]
fn criterion_05_distortion_sandwich() {
    checks_verdict(5, &quadratic_run().report, &[names::DISTORTION]);
}

#[test]
fn criterion_06_kuhnau() {
    checks_verdict(6, &quadratic_run().report, &[names::KUHNAU]);
}

#[test]
fn criterion_07_subharmonicity() {
    let quad = &quadratic_run().report;
    let (q_ok, q_line) = check_line(quad, names::SUBHARMONICITY);
    let params = ConstructionParams { n_corrected: 8, ..ConstructionParams::default() };
    let (_, id) = run_construction(schlicht(Family::Identity), Some(0.05), params).unwrap();
    let c = id.check(names::SUBHARMONICITY).unwrap();
    let id_ok = c.measured > 0.0;
    verdict(7, q_ok && id_ok, format!("{q_line}; identity min Laplacian {:.6e} > 0", c.measured));
}

#[test]
fn criterion_08_front_distance() {
    checks_verdict(8, &quadratic_run().report, &[names::FRONT_DISTANCE]);
}

#[test]
fn criterion_09_curvature() {
    checks_verdict(9, &quadratic_run().report, &[names::CURVATURE]);
}

#[test]
fn criterion_10_capacity() {
    checks_verdict(10, &quadratic_run().report, &[names::CAPACITY_DECAY, names::CAPACITY_DIAMETER]);
}

#[test]
fn criterion_11_pde_residual() {
    checks_verdict(11, &quadratic_run().report, &[names::PDE_RESIDUAL]);
}

#[test]
fn criterion_12_loewner_oracles() {
    let tol = 1e-10;
    let opts = ChainOptions::default();
    let unit = unit_field::<f64>();
    let mut unit_err = 0.0f64;
    for (z, s, t) in [(Complex64::new(0.3, 0.4), 0.0, 1.5), (Complex64::new(-0.7, 0.1), 0.5, 3.0)] {
        let w = solve_lk_ode(&unit, z, s, t, tol).unwrap();
        unit_err = unit_err.max((w - z * (s - t).exp()).norm());
        let f = chain_from_herglotz(&unit, s, z, &opts).unwrap();
        unit_err = unit_err.max((f - z * s.exp()).norm());
    }
    let koebe = koebe_field::<f64>();
    let k = chain_from_herglotz(&koebe, 0.0, Complex64::new(0.4, 0.0), &opts).unwrap();
    let koebe_err = (k - Complex64::new(0.4 / 0.36, 0.0)).norm();
    let z = Complex64::new(0.2, -0.5);
    let direct = solve_lk_ode(&koebe, z, 0.0, 2.0, tol).unwrap();
    let mid = solve_lk_ode(&koebe, z, 0.0, 0.7, tol).unwrap();
    let composed = solve_lk_ode(&koebe, mid, 0.7, 2.0, tol).unwrap();
    let semigroup = (direct - composed).norm();
    let passed = unit_err <= opts.cauchy && koebe_err <= 1e-6 && semigroup <= 10.0 * tol;
    verdict(
        12,
        passed,
        format!("p = 1 error {unit_err:.3e}; Koebe f_0(0.4) error {koebe_err:.3e}; semigroup defect {semigroup:.3e}"),
    );
}

#[test]
fn criterion_13_final_dilatation() {
    let report = &quadratic_run().report;
    let c = report.check(names::FINAL_DILATATION).unwrap();
    let bound = report.k0 + 5e-3;
    let samples = report.dilatation.len();
    let passed = c.measured <= bound && samples >= 256;
    verdict(13, passed, format!("max |mu| {:.6e} <= k0 + 5e-3 = {bound:.6e} over {samples} samples", c.measured));
}

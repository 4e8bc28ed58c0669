//! Constants of the bound ledger against an independent 256-bit evaluation and
//! against values frozen from a 40-digit evaluation of the same closed forms.

// Frozen values keep every digit of the extended-precision evaluation.
#![allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]

use astro_float::{BigFloat, Consts, RoundingMode};
use proptest::prelude::*;
use qcbecker::bounds::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

const P: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// 256-bit arithmetic for the oracle.
struct Big(Consts);

impl Big {
    fn new() -> Self {
        Big(Consts::new().expect("astro-float constants"))
    }

    fn n(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, P)
    }

    fn pow(&mut self, x: &BigFloat, y: &BigFloat) -> BigFloat {
        x.pow(y, P, RM, &mut self.0)
    }

    fn f64(&mut self, x: &BigFloat) -> f64 {
        x.format(astro_float::Radix::Dec, RM, &mut self.0).unwrap().parse().unwrap()
    }
}

fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, P, RM)
}
fn sub(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.sub(b, P, RM)
}
fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, P, RM)
}
fn div(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.div(b, P, RM)
}

/// Every constant evaluated in 256-bit arithmetic from the closed forms, sharing no code
/// with the library.
struct Oracle {
    m: f64,
    m1: f64,
    m2: f64,
    m5: f64,
    m6: f64,
    alpha: f64,
    a: f64,
    rho0: f64,
    eps0: f64,
    eps0_normalized: f64,
}

fn oracle(q: f64) -> Oracle {
    let mut b = Big::new();
    let one = b.n(1.0);
    let two = b.n(2.0);
    let q = b.n(q);
    let k = mul(&q, &b.n(3.0));
    let sk = k.sqrt(P, RM);
    let omk = sub(&one, &k);
    let big_k = div(&add(&one, &k), &omk);
    let m = add(
        &div(&mul(&two, &mul(&k, &k)), &mul(&omk, &omk)),
        &div(&mul(&b.n(8.0), &mul(&k, &sk)), &omk),
    );
    let kk = sub(&one, &mul(&k, &k));
    let m1 = mul(&div(&m, &mul(&kk, &kk)), &add(&one, &div(&b.n(8.0), &kk)));
    let omk_1q = b.pow(&omk, &add(&one, &q));
    let m2 = div(&one, &mul(&omk_1q, &sub(&one, &sk).powi(4, P, RM)));
    let kk2 = add(&one, &mul(&k, &k)).powi(2, P, RM);
    let m5 = div(&mul(&mul(&big_k, &big_k), &kk2), &omk_1q);
    let omk_2q = b.pow(&omk, &add(&two, &q));
    let m6 = div(&mul(&mul(&b.n(4.0), &div(&m, &sk)), &kk2), &omk_2q);
    let alpha = div(&one, &mul(&b.pow(&b.n(3.0), &add(&one, &k)), &b.pow(&b.n(8.0), &add(&big_k, &one))));
    let omk_16q = b.pow(&omk, &add(&one, &mul(&b.n(6.0), &q)));
    let num = mul(
        &mul(&m1, &add(&one, &mul(&k, &k)).powi(8, P, RM)),
        &add(&one, &sk).powi(2, P, RM),
    );
    let den = mul(&mul(&mul(&k, &omk_16q), &sub(&one, &sk)), &kk.powi(4, P, RM));
    let a = div(&add(&div(&num, &den), &div(&mul(&b.n(32.0), &k), &omk)), &mul(&omk, &omk));
    let rho1 = div(&mul(&omk, &omk), &mul(&mul(&b.n(4.0), &add(&one, &k)), &m));
    let rho2 = sub(&one, &div(&add(&one, &mul(&b.n(3.0), &q)), &two).sqrt(P, RM));
    let rho0 = if rho1 < rho2 { rho1 } else { rho2 };
    let kappa_star = div(
        &mul(&add(&big_k, &div(&mul(&mul(&b.n(4.0), &m), &rho0), &omk)), &kk2),
        &mul(&mul(&sk, &rho0), &omk_1q),
    );
    let eps0 = div(&one, &kappa_star);
    let eps0_normalized = div(&eps0, &sk);
    Oracle {
        m: b.f64(&m),
        m1: b.f64(&m1),
        m2: b.f64(&m2),
        m5: b.f64(&m5),
        m6: b.f64(&m6),
        alpha: b.f64(&alpha),
        a: b.f64(&a),
        rho0: b.f64(&rho0),
        eps0: b.f64(&eps0),
        eps0_normalized: b.f64(&eps0_normalized),
    }
}

// At q = 0.33, K = 199 and alpha ~ 8^{-K} amplifies the rounding of 3q by about 4e4.
#[test]
fn constants_match_the_extended_precision_oracle() {
    for (q, tol) in [(1e-4, 1e-12), (0.01, 1e-12), (0.05, 1e-12), (0.1, 1e-12), (0.2, 1e-12), (0.3, 1e-12), (0.33, 1e-10)] {
        let c = explicit_constants(q).unwrap();
        let o = oracle(q);
        let pairs = [
            ("M", c.m, o.m),
            ("M1", c.m1, o.m1),
            ("M2", c.m2, o.m2),
            ("M5", c.m5, o.m5),
            ("M6", c.m6, o.m6),
            ("alpha", c.alpha, o.alpha),
            ("a", c.a, o.a),
            ("rho0", c.rho0, o.rho0),
            ("eps0", c.eps0, o.eps0),
        ];
        for (name, got, want) in pairs {
            assert!(rel(got, want) < tol, "{name} at q = {q}: {got:e} vs {want:e}");
        }
        assert!(rel(normalized_tangent_disk_radius(q).unwrap(), o.eps0_normalized) < tol);
    }
}

#[test]
fn frozen_values_at_q_one_tenth() {
    let c = explicit_constants(0.1f64).unwrap();
    let frozen = [
        ("t_star", c.t_star, 1.203_972_804_325_935_992_6),
        ("t0", c.t0, 0.601_986_402_162_967_996_31),
        ("K", c.big_k, 1.857_142_857_142_857_142_9),
        ("k'", c.k_prime, 0.550_458_715_596_330_275_23),
        ("M", c.m, 2.245_252_850_221_794_021_6),
        ("M1", c.m1, 26.547_203_774_397_083_663),
        ("M2", c.m2, 35.381_190_772_953_114_552),
        ("alpha", c.alpha, 6.302_099_608_408_684_912_6e-4),
        ("a", c.a, 4945.804_568_021_070_288),
        ("M5", c.m5, 6.066_466_119_404_113_476_9),
        ("M6", c.m6, 41.201_377_120_412_468_363),
        ("rho1", c.rho1, 0.041_968_889_704_988_363_309),
        ("rho2", c.rho2, 0.193_774_225_170_145_034_76),
        ("kappa_star", c.kappa_star, 183.304_085_964_284_042_92),
        ("eps0", c.eps0, 0.005_455_415_763_044_394_958_3),
    ];
    for (name, got, want) in frozen {
        assert!(rel(got, want) < 1e-12, "{name}: {got} vs {want}");
    }
    let (_, _, kappa0) = curvature_bound(0.1f64, 2.0).unwrap();
    assert!(rel(kappa0, 86.026_835_598_951_587_248) < 1e-12);
    assert!(rel(normalized_tangent_disk_radius(0.1f64).unwrap(), 0.009_960_180_913_295_577_631_3) < 1e-12);
}

#[test]
fn distortion_constants_frozen() {
    let (d1, d2) = dist_annulus(0.3f64, 2.0).unwrap();
    assert!(rel(d1, 0.229_328_688_660_600_422_71) < 1e-12);
    assert!(rel(d2, 4.360_553_430_277_404_110_6) < 1e-12);
    assert_eq!(dist_annulus(0.0f64, 2.0).unwrap(), (0.25, 4.0));
    assert!(rel(henkin_lower_bound(-1.0f64, 2.0, 1.0).unwrap(), 4.0 / std::f64::consts::PI) < 1e-15);
}

#[test]
fn angular_bound_frozen() {
    assert!(rel(angular_derivative_bound(1.0f64, 0.0).unwrap(), 88.913_140_774_085_029_009) < 1e-10);
    let (eps, m) = minimize_angular_bound(0.999f64, 1e-3, 1e3, 121).unwrap();
    assert!(rel(m, 164.454_035_975_281_384_42) < 1e-9, "{m}");
    assert!((eps - 19.833).abs() < 1e-2);
}

#[test]
fn schedule_examples() {
    let (t1, t2) = schedule_times(0.1f64, 0.5).unwrap();
    let t0 = core_times(0.1f64).unwrap().1;
    assert!((t1 - t0 - 0.235_001_814_622_867_78).abs() < 1e-12);
    assert!((t2 - t0 - 0.182_321_556_793_954_63).abs() < 1e-12);
    let (ts, _) = core_times(1.0 / (3.0 * std::f64::consts::E)).unwrap();
    assert!((ts - 1.0).abs() < 1e-15);
}

#[test]
fn growing_constants_increase_in_q() {
    let qs: Vec<f64> = (1..=50).map(|i| 0.33 * i as f64 / 50.0).collect();
    let tables: Vec<_> = qs.iter().map(|&q| explicit_constants(q).unwrap()).collect();
    for w in tables.windows(2) {
        assert!(w[1].m > w[0].m && w[1].m1 > w[0].m1 && w[1].m2 > w[0].m2);
        assert!(w[1].eps0 * w[1].t0.exp() <= w[0].eps0 * w[0].t0.exp());
    }
}

#[test]
fn angular_bound_is_unimodal() {
    for k in [0.1f64, 0.5, 0.9, 0.999] {
        let vals: Vec<f64> = (0..=120)
            .map(|i| angular_derivative_bound(10f64.powf(-3.0 + 6.0 * i as f64 / 120.0), k).unwrap())
            .collect();
        let signs: Vec<bool> = vals.windows(2).map(|w| w[1] > w[0]).collect();
        let changes = signs.windows(2).filter(|s| s[0] != s[1]).count();
        assert_eq!(changes, 1, "k = {k}");
    }
}

proptest! {
    #[test]
    fn d1_below_d2(k in 0.0f64..0.99, r in 1.0001f64..50.0) {
        let (d1, d2) = dist_annulus(k, r).unwrap();
        prop_assert!(d1 < d2);
    }

    #[test]
    fn kuhnau_sandwich_contains_one(k in 0.0f64..0.99, r in 1.0001f64..100.0) {
        let (lo, hi) = kuhnau_bounds(k, r).unwrap();
        prop_assert!(lo <= 1.0 && 1.0 <= hi);
    }

    #[test]
    fn schedule_ordering(q in 0.001f64..0.33, s in 0.0f64..1.0) {
        let z0 = s * (3.0 * q).sqrt();
        let (t1, t2) = schedule_times(q, z0).unwrap();
        let t0 = core_times(q).unwrap().1;
        prop_assert!(t0 <= t2 + 1e-15 && t2 <= t1 + 1e-15);
    }

    #[test]
    fn kappa0_ratio_tends_to_e(q in 0.01f64..0.3) {
        let (_, _, a) = curvature_bound(q, 40.0).unwrap();
        let (_, _, b) = curvature_bound(q, 41.0).unwrap();
        prop_assert!((b / a - std::f64::consts::E).abs() < 1e-10);
    }
}

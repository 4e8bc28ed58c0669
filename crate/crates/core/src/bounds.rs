//! Closed-form constants of the corrected-chain construction and the elementary
//! distortion bounds used to check it.
//!
//! Notation: `k = 3q`, `K = (1+k)/(1-k)`, `e^{-t0} = sqrt(k)`. Derivations of the
//! assembled constants are in `docs/derivations.md`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest admissible `q` (exclusive).
pub const Q_MAX: f64 = 1.0 / 3.0;

fn check_q<T: Real>(q: T) -> Result<()> {
    if q.is_finite() && q >= T::zero() && q < T::one() / T::lit(3.0) {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must lie in [0, 1/3), got {}", q.f64())))
    }
}

fn check_k<T: Real>(k: T) -> Result<()> {
    if k.is_finite() && k >= T::zero() && k < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("k must lie in [0, 1), got {}", k.f64())))
    }
}

/// `K = (1 + k) / (1 - k)`.
pub fn big_k<T: Real>(k: T) -> T {
    (T::one() + k) / (T::one() - k)
}

/// `k' = 2k / (1 + k^2)`, the dilatation bound after one reflection.
pub fn k_prime<T: Real>(k: T) -> T {
    T::lit(2.0) * k / (T::one() + k * k)
}

/// `t_* = -log(3q)` and `t0 = t_*/2`.
pub fn core_times<T: Real>(q: T) -> Result<(T, T)> {
    check_q(q)?;
    if q == T::zero() {
        return Err(Error::Domain("core times need q > 0".into()));
    }
    let t_star = -(T::lit(3.0) * q).ln();
    Ok((t_star, t_star / T::lit(2.0)))
}

/// `t1 = t0 + log(2/(1+|z0|^2))/2` and `t2 = t0 + log((1+|z0|)/(1+|z0|^2))`.
pub fn schedule_times<T: Real>(q: T, z0_abs: T) -> Result<(T, T)> {
    let (_, t0) = core_times(q)?;
    let bound = (T::lit(3.0) * q).sqrt();
    if !(z0_abs >= T::zero() && z0_abs <= bound * (T::one() + T::lit(1e-12))) {
        return Err(Error::Domain(format!(
            "|z0| = {} exceeds sqrt(3q) = {}",
            z0_abs.f64(),
            bound.f64()
        )));
    }
    let s = z0_abs * z0_abs;
    let t1 = t0 + (T::lit(2.0) / (T::one() + s)).ln() / T::lit(2.0);
    let t2 = t0 + ((T::one() + z0_abs) / (T::one() + s)).ln();
    Ok((t1, t2))
}

/// Distortion bounds on the exterior disk with the annulus `1 < |z| <= R`:
/// `d1(k, R) = R^{-2k} (R-1)^{1+k} (R+1)^k / 4` and
/// `d2(k, R) = 4 R^{2k} (R-1)^{1-k} (R+1)^{-k}`.
pub fn dist_annulus<T: Real>(k: T, r: T) -> Result<(T, T)> {
    check_k(k)?;
    if !(r > T::one()) || !r.is_finite() {
        return Err(Error::Domain(format!("R must exceed 1, got {}", r.f64())));
    }
    let two = T::lit(2.0);
    let d1 = r.powf(-two * k) * (r - T::one()).powf(T::one() + k) * (r + T::one()).powf(k) / T::lit(4.0);
    let d2 = T::lit(4.0) * r.powf(two * k) * (r - T::one()).powf(T::one() - k) * (r + T::one()).powf(-k);
    Ok((d1, d2))
}

/// `(1 - |z|^{-2})^k <= |g'(z)| <= (1 - |z|^{-2})^{-k}` for `g` in `Sigma(k)`.
pub fn kuhnau_bounds<T: Real>(k: T, r: T) -> Result<(T, T)> {
    check_k(k)?;
    if !(r > T::one()) {
        return Err(Error::Domain(format!("|z| must exceed 1, got {}", r.f64())));
    }
    let base = T::one() - (r * r).recip();
    Ok((base.powf(k), base.powf(-k)))
}

/// Every constant of the construction at a given `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable<T: Real> {
    pub q: T,
    pub k: T,
    pub big_k: T,
    pub k_prime: T,
    pub big_k_prime: T,
    pub t_star: T,
    pub t0: T,
    /// Second-derivative constant `M = 2k^2/(1-k)^2 + 8k^{3/2}/(1-k)`.
    pub m: T,
    /// Laplacian constant `M1 = M (1 + 8/(1-k^2)) / (1-k^2)^2`.
    pub m1: T,
    /// Front-distance constant `M2 = 1 / ((1-k)^{1+q} (1 - sqrt k)^4)`.
    pub m2: T,
    /// Curvature growth coefficient of `kappa0(q, t) = M5 e^t + M6`.
    pub m5: T,
    pub m6: T,
    /// `alpha(k) = 1 / (3^{1+k} 8^{K+1})`.
    pub alpha: T,
    /// Subharmonicity exponent `a(q)`.
    pub a: T,
    /// `rho1 = (1-k)^2 / (4 (1+k) M)` (infinite when `M = 0`).
    pub rho1: T,
    /// `rho2 = 1 - sqrt((1 + 3q)/2)`.
    pub rho2: T,
    pub rho0: T,
    /// Uniform curvature bound on the normalized curves.
    pub kappa_star: T,
    /// Tangent-disk radius `1 / kappa_star`.
    pub eps0: T,
}

/// `M(q)`.
pub fn second_derivative_constant<T: Real>(k: T) -> T {
    let one = T::one();
    T::lit(2.0) * k * k / ((one - k) * (one - k)) + T::lit(8.0) * k * k.sqrt() / (one - k)
}

/// `M / sqrt(k)`, finite at `k = 0`.
fn m_over_sqrt_k<T: Real>(k: T) -> T {
    let one = T::one();
    T::lit(2.0) * k * k.sqrt() / ((one - k) * (one - k)) + T::lit(8.0) * k / (one - k)
}

/// `alpha(k)`.
pub fn alpha<T: Real>(k: T) -> T {
    let three = T::lit(3.0);
    let eight = T::lit(8.0);
    (three.powf(T::one() + k) * eight.powf(big_k(k) + T::one())).recip()
}

/// Subharmonicity exponent `a(q)`.
pub fn subharmonic_exponent<T: Real>(q: T) -> Result<T> {
    check_q(q)?;
    let k = T::lit(3.0) * q;
    if k == T::zero() {
        return Ok(T::zero());
    }
    let one = T::one();
    let sk = k.sqrt();
    let m1 = laplacian_constant(k);
    let kk = one - k * k;
    let first = m1 * (one + k * k).powi(8) * (one + sk).powi(2)
        / (k * (one - k).powf(one + T::lit(6.0) * q) * (one - sk) * kk.powi(4));
    let second = T::lit(32.0) * k / (one - k);
    Ok((first + second) / ((one - k) * (one - k)))
}

fn laplacian_constant<T: Real>(k: T) -> T {
    let one = T::one();
    let kk = one - k * k;
    second_derivative_constant(k) / (kk * kk) * (one + T::lit(8.0) / kk)
}

/// Coefficients `(M5, M6)` and the value of `kappa0(q, t) = M5 e^t + M6`.
pub fn curvature_bound<T: Real>(q: T, t: T) -> Result<(T, T, T)> {
    check_q(q)?;
    let k = T::lit(3.0) * q;
    if k == T::zero() {
        return Err(Error::Domain("curvature bound needs q > 0".into()));
    }
    let one = T::one();
    let kk2 = (one + k * k) * (one + k * k);
    let m5 = big_k(k) * big_k(k) * kk2 / (one - k).powf(one + q);
    let m6 = T::lit(4.0) * m_over_sqrt_k(k) * kk2 / (one - k).powf(T::lit(2.0) + q);
    Ok((m5, m6, m5 * t.exp() + m6))
}

/// Tangent-disk radius `eps0(q) = 1 / kappa_*(q)`.
pub fn tangent_disk_radius<T: Real>(q: T) -> Result<T> {
    Ok(explicit_constants(q)?.eps0)
}

/// Scale-free tangent-disk radius `eps0(q) e^{t0}`.
pub fn normalized_tangent_disk_radius<T: Real>(q: T) -> Result<T> {
    check_q(q)?;
    let k = T::lit(3.0) * q;
    let one = T::one();
    let (rho0, _) = rho0_and_parts(q, k);
    let kk2 = (one + k * k) * (one + k * k);
    // eps0 * e^{t0} = rho0 (1-k)^{1+q} / ((K + 4 M rho0/(1-k)) (1+k^2)^2)
    let den = (big_k(k) + T::lit(4.0) * second_derivative_constant(k) * rho0 / (one - k)) * kk2;
    Ok(rho0 * (one - k).powf(one + q) / den)
}

fn rho0_and_parts<T: Real>(q: T, k: T) -> (T, T) {
    let one = T::one();
    let m = second_derivative_constant(k);
    let rho1 = if m == T::zero() {
        T::infinity()
    } else {
        (one - k) * (one - k) / (T::lit(4.0) * (one + k) * m)
    };
    let rho2 = one - ((one + T::lit(3.0) * q) / T::lit(2.0)).sqrt();
    (rho1.min(rho2), rho1)
}

/// All constants at `q in (0, 1/3)`.
pub fn explicit_constants<T: Real>(q: T) -> Result<ConstantsTable<T>> {
    check_q(q)?;
    if q == T::zero() {
        return Err(Error::Domain("constants need q > 0 (t0 is infinite at q = 0)".into()));
    }
    let one = T::one();
    let k = T::lit(3.0) * q;
    let sk = k.sqrt();
    let (t_star, t0) = core_times(q)?;
    let m = second_derivative_constant(k);
    let m1 = laplacian_constant(k);
    let m2 = ((one - k).powf(one + q) * (one - sk).powi(4)).recip();
    let (m5, m6, _) = curvature_bound(q, T::zero())?;
    let (rho0, rho1) = rho0_and_parts(q, k);
    let rho2 = one - ((one + T::lit(3.0) * q) / T::lit(2.0)).sqrt();
    let kk2 = (one + k * k) * (one + k * k);
    let kappa_star =
        (big_k(k) + T::lit(4.0) * m * rho0 / (one - k)) * kk2 / (sk * rho0 * (one - k).powf(one + q));
    let kp = k_prime(k);
    Ok(ConstantsTable {
        q,
        k,
        big_k: big_k(k),
        k_prime: kp,
        big_k_prime: big_k(k) * big_k(k),
        t_star,
        t0,
        m,
        m1,
        m2,
        m5,
        m6,
        alpha: alpha(k),
        a: subharmonic_exponent(q)?,
        rho1,
        rho2,
        rho0,
        kappa_star,
        eps0: kappa_star.recip(),
    })
}

/// `-4 u0 / (pi (R - 1) |grad u|)`, the boundary lower bound for `|g'|` from a
/// negative subharmonic barrier `u` with `u <= u0 < 0` on the outer half annulus.
pub fn henkin_lower_bound<T: Real>(u0: T, r: T, grad_norm: T) -> Result<T> {
    if !(u0 < T::zero()) {
        return Err(Error::Domain(format!("u0 must be negative, got {}", u0.f64())));
    }
    if !(r > T::one()) {
        return Err(Error::Domain(format!("R must exceed 1, got {}", r.f64())));
    }
    if !(grad_norm > T::zero()) || !grad_norm.is_finite() {
        return Err(Error::Domain(format!("|grad u| must be positive and finite, got {}", grad_norm.f64())));
    }
    Ok(-T::lit(4.0) * u0 / (T::PI() * (r - T::one()) * grad_norm))
}

/// Solution `R > 1` of `d2(k, R) = (1 - 1/sqrt 2) eps`, found by bisection in `log(R - 1)`.
pub fn annulus_radius_for<T: Real>(eps: T, k: T) -> Result<T> {
    Ok(annulus_log_radius_for(eps, k)?.1)
}

/// `(log(R - 1), log R)` for [`annulus_radius_for`]; both stay finite when `R - 1` underflows.
fn annulus_log_radius_for<T: Real>(eps: T, k: T) -> Result<(T, T)> {
    check_k(k)?;
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::Domain(format!("eps must be positive and finite, got {}", eps.f64())));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let target = ((one - T::FRAC_1_SQRT_2()) * eps).ln();
    // log d2 as a function of x = log(R - 1); increasing in x.
    let log_d2 = |x: T| {
        let log_r = x.exp().ln_1p();
        let log_r1 = (two + x.exp()).ln();
        T::lit(4.0).ln() + two * k * log_r + (one - k) * x - k * log_r1
    };
    // R - 1 can be far below the smallest float (k near 1, small eps); x stays representable.
    let (mut lo, mut hi) = (T::lit(-1e6), T::lit(700.0));
    if log_d2(lo) > target || log_d2(hi) < target {
        return Err(Error::Domain(format!("no annulus radius for eps = {}, k = {}", eps.f64(), k.f64())));
    }
    for _ in 0..400 {
        let mid = (lo + hi) / two;
        if log_d2(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::eps() * (T::one() + lo.mag()) {
            break;
        }
    }
    let x = (lo + hi) / two;
    Ok((x, x.exp().ln_1p()))
}

/// Angular-derivative constant `M(eps, k) = 2 pi eps / log R` with `R` from
/// [`annulus_radius_for`].
pub fn angular_derivative_bound<T: Real>(eps: T, k: T) -> Result<T> {
    let (x, log_r) = annulus_log_radius_for(eps, k)?;
    if x < T::lit(-30.0) {
        // log R = e^x to double precision; the bound may overflow to +inf, which is its value.
        return Ok((T::TAU() * eps).ln().sub(x).exp());
    }
    if !(log_r > T::zero()) {
        return Err(Error::Domain(format!("annulus degenerates for eps = {}, k = {}", eps.f64(), k.f64())));
    }
    Ok(T::TAU() * eps / log_r)
}

/// Minimum of `M(eps, k)` over a logarithmic grid of `n` values of `eps` in `[eps_lo, eps_hi]`,
/// refined by golden-section search around the best grid point. Returns `(eps, M)`.
pub fn minimize_angular_bound<T: Real>(k: T, eps_lo: T, eps_hi: T, n: usize) -> Result<(T, T)> {
    if n < 3 || !(eps_lo > T::zero()) || !(eps_hi > eps_lo) {
        return Err(Error::Argument("need n >= 3 and 0 < eps_lo < eps_hi".into()));
    }
    let (a, b) = (eps_lo.ln(), eps_hi.ln());
    let step = (b - a) / T::from_usize_lossy(n - 1);
    let mut best = (0usize, T::infinity());
    for i in 0..n {
        let e = (a + step * T::from_usize_lossy(i)).exp();
        let v = angular_derivative_bound(e, k)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let lo_i = best.0.saturating_sub(1);
    let hi_i = (best.0 + 1).min(n - 1);
    let (mut lo, mut hi) = (a + step * T::from_usize_lossy(lo_i), a + step * T::from_usize_lossy(hi_i));
    let g = T::lit(0.618_033_988_749_894_8);
    let f = |x: T| angular_derivative_bound(x.exp(), k);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..200 {
        if hi - lo < T::lit(1e-12) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let x = (lo + hi) / T::lit(2.0);
    let v = f(x)?;
    if v <= best.1 {
        Ok((x.exp(), v))
    } else {
        Ok(((a + step * T::from_usize_lossy(best.0)).exp(), best.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_errors() {
        assert!(core_times(0.34f64).is_err());
        assert!(core_times(-0.1f64).is_err());
        assert!(explicit_constants(1.0f64 / 3.0).is_err());
        assert!(dist_annulus(0.5f64, 1.0).is_err());
        assert!(henkin_lower_bound(0.1f64, 2.0, 1.0).is_err());
        assert!(schedule_times(0.1f64, 0.6).is_err());
    }

    #[test]
    fn core_times_example() {
        let (ts, t0) = core_times(0.1f64).unwrap();
        assert!((ts - 1.203_972_804_325_936).abs() < 1e-12);
        assert!((t0 - 0.601_986_402_162_968).abs() < 1e-12);
        assert!((big_k(0.3f64) - 1.857_142_857_142_857).abs() < 1e-12);
        assert!((k_prime(0.3f64) - 0.550_458_715_596_330_3).abs() < 1e-12);
    }

    #[test]
    fn schedule_times_example() {
        let (t1, t2) = schedule_times(0.1f64, 0.2).unwrap();
        let t0 = 0.601_986_402_162_968;
        assert!((t1 - (t0 + 0.5 * (2.0f64 / 1.04).ln())).abs() < 1e-12);
        assert!((t2 - (t0 + (1.2f64 / 1.04).ln())).abs() < 1e-12);
        assert!(t2 < t1);
    }

    #[test]
    fn limits_at_small_q() {
        assert_eq!(subharmonic_exponent(0.0f64).unwrap(), 0.0);
        assert!((alpha(0.0f64) - 1.0 / 192.0).abs() < 1e-15);
        let a = subharmonic_exponent(1e-12f64).unwrap();
        assert!(a > 0.0 && a < 1e-3);
        let e = normalized_tangent_disk_radius(0.0f64).unwrap();
        assert!((e - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn blowup_near_one_third() {
        let c = explicit_constants(0.3333f64).unwrap();
        assert!(c.m2 > 1e6 && c.a > 1e6);
    }

    #[test]
    fn angular_bound_at_k_zero_eps_one() {
        let m = angular_derivative_bound(1.0f64, 0.0).unwrap();
        // d2(0, R) = 4 (R - 1) so R = 1 + (1 - 1/sqrt 2)/4.
        let r = 1.0 + (1.0 - std::f64::consts::FRAC_1_SQRT_2) / 4.0;
        assert!((m - std::f64::consts::TAU / r.ln()).abs() < 1e-9);
        assert!((m - 88.9131).abs() < 1e-3);
    }
}

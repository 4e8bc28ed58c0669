//! Quasiconformal plane maps: Wirtinger derivatives, Beltrami coefficients, the
//! Becker extension of a Loewner chain and the Ahlfors-Weill extension.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{invert_to_sigma, DiskGrid, SchlichtFunction, SigmaFunction};
use crate::bounds::second_derivative_constant;
use crate::error::{Error, Result};
use crate::loewner::LoewnerChain;
use crate::scalar::{to_c64, Cx, Real};

/// Orientation-preserving homeomorphism of the plane, evaluated pointwise.
pub trait PlaneMap<T: Real>: Sync {
    fn eval(&self, z: Cx<T>) -> Result<Cx<T>>;

    /// `(dF/dz, dF/dzbar)` in closed form, when available.
    fn wirtinger_analytic(&self, _z: Cx<T>) -> Option<Result<(Cx<T>, Cx<T>)>> {
        None
    }
}

impl<T: Real, M: PlaneMap<T> + ?Sized> PlaneMap<T> for &M {
    fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        (**self).eval(z)
    }

    fn wirtinger_analytic(&self, z: Cx<T>) -> Option<Result<(Cx<T>, Cx<T>)>> {
        (**self).wirtinger_analytic(z)
    }
}

/// How Wirtinger derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WirtingerMode {
    Analytic,
    FiniteDifference,
}

/// Wirtinger derivatives of a plane function by central differences with step
/// `1e-5 max(1, |z|)` and one Richardson extrapolation. Steps shrink when an
/// evaluation fails.
pub fn fd_wirtinger<T: Real>(f: impl Fn(Cx<T>) -> Result<Cx<T>>, z: Cx<T>) -> Result<(Cx<T>, Cx<T>)> {
    let mut h = T::lit(1e-5) * z.norm().max(T::one());
    let i = Cx::new(T::zero(), T::one());
    let half = T::lit(0.5);
    let pair = |h: T| -> Result<(Cx<T>, Cx<T>)> {
        let two_h = h * T::lit(2.0);
        let fx = (f(z + h)? - f(z - h)?) / two_h;
        let fy = (f(z + i * h)? - f(z - i * h)?) / two_h;
        Ok(((fx - i * fy) * half, (fx + i * fy) * half))
    };
    for _ in 0..8 {
        match (pair(h), pair(h * half)) {
            (Ok((a1, b1)), Ok((a2, b2))) => {
                let three = T::lit(3.0);
                let four = T::lit(4.0);
                return Ok(((a2 * four - a1) / three, (b2 * four - b1) / three));
            }
            _ => h = h * T::lit(0.125),
        }
    }
    Err(Error::StepUnderflow { z: to_c64(z) })
}

/// `(dF/dz, dF/dzbar)` at `z`.
pub fn wirtinger<T: Real, M: PlaneMap<T> + ?Sized>(map: &M, z: Cx<T>, mode: WirtingerMode) -> Result<(Cx<T>, Cx<T>)> {
    match mode {
        WirtingerMode::Analytic => map
            .wirtinger_analytic(z)
            .unwrap_or_else(|| Err(Error::Unsupported("map has no closed-form Wirtinger derivatives".into()))),
        WirtingerMode::FiniteDifference => fd_wirtinger(|w| map.eval(w), z),
    }
}

/// Beltrami data at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BeltramiSample<T: Real> {
    pub z: Cx<T>,
    pub dz: Cx<T>,
    pub dzbar: Cx<T>,
    pub mu: Cx<T>,
    pub jacobian: T,
}

/// Beltrami coefficient `mu = dF/dzbar / dF/dz` and Jacobian `|dF|^2 - |dbarF|^2`.
pub fn beltrami<T: Real, M: PlaneMap<T> + ?Sized>(map: &M, z: Cx<T>, mode: WirtingerMode) -> Result<BeltramiSample<T>> {
    let (dz, dzbar) = wirtinger(map, z, mode)?;
    if dz.norm() <= T::min_positive_value() {
        return Err(Error::Singularity { z: to_c64(z), what: "dF/dz vanishes".into() });
    }
    Ok(BeltramiSample { z, dz, dzbar, mu: dzbar / dz, jacobian: dz.norm_sqr() - dzbar.norm_sqr() })
}

/// Beltrami samples at many points, evaluated in parallel (order preserved).
pub fn dilatation_sweep<T: Real, M: PlaneMap<T> + ?Sized>(
    map: &M,
    points: &[Cx<T>],
    mode: WirtingerMode,
) -> Result<Vec<BeltramiSample<T>>> {
    points.par_iter().map(|&z| beltrami(map, z, mode)).collect()
}

/// Writes samples as CSV: `z_re,z_im,abs_mu,arg_mu,jacobian`.
pub fn write_beltrami_csv<T: Real, W: Write>(mut out: W, samples: &[BeltramiSample<T>]) -> Result<()> {
    writeln!(out, "z_re,z_im,abs_mu,arg_mu,jacobian")?;
    for s in samples {
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            s.z.re.f64(),
            s.z.im.f64(),
            s.mu.norm().f64(),
            s.mu.arg().f64(),
            s.jacobian.f64()
        )?;
    }
    Ok(())
}

/// `z -> a z + b zbar`.
#[derive(Clone, Copy, Debug)]
pub struct Affine<T: Real> {
    pub a: Cx<T>,
    pub b: Cx<T>,
}

impl<T: Real> PlaneMap<T> for Affine<T> {
    fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        Ok(self.a * z + self.b * z.conj())
    }

    fn wirtinger_analytic(&self, _z: Cx<T>) -> Option<Result<(Cx<T>, Cx<T>)>> {
        Some(Ok((self.a, self.b)))
    }
}

/// `z -> M(lambda z)` for real `lambda > 0`.
#[derive(Clone, Debug)]
pub struct Scaled<T: Real, M> {
    pub inner: M,
    pub lambda: T,
}

impl<T: Real, M: PlaneMap<T>> PlaneMap<T> for Scaled<T, M> {
    fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        self.inner.eval(z * self.lambda)
    }

    fn wirtinger_analytic(&self, z: Cx<T>) -> Option<Result<(Cx<T>, Cx<T>)>> {
        self.inner
            .wirtinger_analytic(z * self.lambda)
            .map(|r| r.map(|(a, b)| (a * self.lambda, b * self.lambda)))
    }
}

/// Becker extension of a chain: `F(z) = f_0(z)` on the disk and
/// `F(e^{t + i theta}) = f_t(e^{i theta})` outside.
#[derive(Clone, Debug)]
pub struct BeckerExtension<C> {
    pub chain: C,
}

impl<C> BeckerExtension<C> {
    pub fn new(chain: C) -> Self {
        Self { chain }
    }
}

impl<T: Real, C: LoewnerChain<T>> PlaneMap<T> for BeckerExtension<C> {
    fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        let r = z.norm();
        if r < T::one() {
            return self.chain.value(z, T::zero());
        }
        let t = r.ln();
        self.chain.value(z / r, t).map_err(|e| {
            Error::Domain(format!("chain is not evaluable on the unit circle at t = {}: {e}", t.f64()))
        })
    }
}

/// Ahlfors-Weill extension `G` of `g_0(w) = 1/f(1/w)`: `G = g_0` on `|z| >= 1` and
/// `G(z) = g_0(1/zbar) - (1-|z|^2) g_0'(1/zbar) / (zbar + (1-|z|^2) P_{g_0}(1/zbar)/2)`
/// on the disk, evaluated through the equivalent form in terms of `f`.
#[derive(Clone, Debug)]
pub struct AwExtension<T: Real> {
    pub f: SchlichtFunction<T>,
    pub g0: SigmaFunction<T>,
}

impl<T: Real> AwExtension<T> {
    pub fn new(f: SchlichtFunction<T>) -> Self {
        let m = f.terms().max(64);
        let g0 = invert_to_sigma(&f, m);
        Self { f, g0 }
    }

    /// `G(0) = -a_2`.
    pub fn center_value(&self) -> Cx<T> {
        -self.f.a(2)
    }
}

impl<T: Real> PlaneMap<T> for AwExtension<T> {
    fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        let r2 = z.norm_sqr();
        if r2 == T::zero() {
            return Ok(self.center_value());
        }
        if r2 >= T::one() {
            return Ok(self.g0.jet_unchecked(z)[0]);
        }
        // 1/G(z) = f(zbar) + (1-|z|^2) f'(zbar) / (z - (1-|z|^2) P_f(zbar)/2), written
        // as D / (f D + (1-|z|^2) f') so that zeros of G (D = 0) are regular points.
        let zb = z.conj();
        let j = self.f.jet_unchecked(zb);
        let a = T::one() - r2;
        let den = z - j[2] / j[1] * (a * T::lit(0.5));
        let full = j[0] * den + j[1] * a;
        if full.norm() <= T::eps() * den.norm() || full.norm() <= T::min_positive_value() {
            return Err(Error::Singularity { z: to_c64(z), what: "extension pole".into() });
        }
        Ok(den / full)
    }

    fn wirtinger_analytic(&self, z: Cx<T>) -> Option<Result<(Cx<T>, Cx<T>)>> {
        Some(self.wirtinger_closed_form(z))
    }
}

impl<T: Real> AwExtension<T> {
    fn wirtinger_closed_form(&self, z: Cx<T>) -> Result<(Cx<T>, Cx<T>)> {
        let r2 = z.norm_sqr();
        let zero = Cx::new(T::zero(), T::zero());
        if r2 >= T::one() {
            return Ok((self.g0.jet_unchecked(z)[1], zero));
        }
        let half = T::lit(0.5);
        let jf = self.f.jet_unchecked(z.conj());
        let sf = jf[3] / jf[1] - (jf[2] / jf[1]) * (jf[2] / jf[1]) * T::lit(1.5);
        let a = T::one() - r2;
        if r2 == T::zero() {
            return Ok((Cx::new(T::one(), T::zero()), -sf * half));
        }
        // With zeta = zbar: g_0'(1/zbar) = f'(zeta) zeta^2 / f(zeta)^2 and the
        // denominator 1 + (w - 1/wbar) P_{g_0}(w)/2 equals
        // |z|^2 - (1-|z|^2) zeta P_f(zeta)/2 + (1-|z|^2) zeta f'(zeta)/f(zeta).
        let zeta = z.conj();
        let pf = jf[2] / jf[1];
        let d = zeta * pf * (-a * half) + zeta * jf[1] / jf[0] * a + r2;
        if d.norm() <= T::eps() {
            return Err(Error::Singularity { z: to_c64(z), what: "extension Jacobian denominator".into() });
        }
        let ratio = zeta / jf[0];
        let g0p = jf[1] * ratio * ratio;
        let dz = g0p / (d * d);
        let dzbar = -dz * sf * (a * a * half);
        Ok((dz, dzbar))
    }
}

/// One violated inequality found by a derivative check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub inequality: String,
    pub z: (f64, f64),
    pub value: f64,
    pub bound: f64,
}

/// Outcome of a sampled derivative check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub points: usize,
    /// Smallest `bound - value` over all points, per inequality, relative to the bound.
    pub min_relative_slack: Vec<(String, f64)>,
    pub violations: Vec<Violation>,
}

impl DerivativeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn scaled_extension<T: Real>(f: &SchlichtFunction<T>, q: T) -> Result<(Scaled<T, AwExtension<T>>, T)> {
    crate::bounds::core_times(q)?;
    let k = T::lit(3.0) * q;
    let lambda = k.sqrt();
    Ok((Scaled { inner: AwExtension::new(f.clone()), lambda }, k))
}

struct Tally {
    names: Vec<String>,
    slack: Vec<f64>,
    violations: Vec<Violation>,
}

impl Tally {
    fn new(names: &[&str]) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            slack: vec![f64::INFINITY; names.len()],
            violations: Vec::new(),
        }
    }

    /// Records `lo <= value <= hi`; a relative tolerance absorbs rounding.
    fn check(&mut self, idx: usize, z: Cx<f64>, value: f64, lo: f64, hi: f64) {
        let tol = 1e-9;
        let s_hi = (hi - value) / hi.abs().max(f64::MIN_POSITIVE);
        let s_lo = if lo > 0.0 { (value - lo) / lo } else { f64::INFINITY };
        self.slack[idx] = self.slack[idx].min(s_hi.min(s_lo));
        if value > hi * (1.0 + tol) || value < lo * (1.0 - tol) || !value.is_finite() {
            self.violations.push(Violation {
                inequality: self.names[idx].clone(),
                z: (z.re, z.im),
                value,
                bound: if value > hi { hi } else { lo },
            });
        }
    }

    fn finish(self, points: usize) -> DerivativeReport {
        DerivativeReport {
            points,
            min_relative_slack: self.names.into_iter().zip(self.slack).collect(),
            violations: self.violations,
        }
    }
}

/// Checks the two-sided distortion bounds for `F(z) = G(e^{-t0} z)` on the closed disk:
/// `|dF|`, `D_* = |dF| - |dbarF|`, `D^* = |dF| + |dbarF|` and the Jacobian.
pub fn first_derivative_check<T: Real>(f: &SchlichtFunction<T>, q: T, grid: &DiskGrid<T>) -> Result<DerivativeReport> {
    let (map, k) = scaled_extension(f, q)?;
    let (k, q) = (k.f64(), q.f64());
    let sk = k.sqrt();
    let kk = 1.0 - k * k;
    let p2 = (1.0 + k * k).powi(2);
    let bounds = [
        (sk * (1.0 - k).powf(q) / p2, sk / (kk * kk * (1.0 - k).powf(q))),
        (sk * (1.0 - k).powf(1.0 + q) / p2, sk / (kk * (1.0 - k).powf(1.0 + q))),
        (sk * (1.0 - k).powf(1.0 + q) / p2, sk / (kk * (1.0 - k).powf(1.0 + q))),
        (k * kk * (1.0 - k).powf(2.0 * q) / (p2 * p2), k / (kk.powi(4) * (1.0 - k).powf(2.0 * q))),
    ];
    let mut tally = Tally::new(&["|dF|", "D_*", "D^*", "J_F"]);
    let samples: Vec<Result<(Cx<T>, Cx<T>)>> =
        grid.points().par_iter().map(|&z| wirtinger(&map, z, WirtingerMode::Analytic)).collect();
    for (&z, s) in grid.points().iter().zip(samples) {
        let (a, b) = s?;
        let (a, b) = (a.norm().f64(), b.norm().f64());
        let zc = to_c64(z);
        let vals = [a, a - b, a + b, a * a - b * b];
        for (i, (&v, &(lo, hi))) in vals.iter().zip(bounds.iter()).enumerate() {
            tally.check(i, zc, v, lo, hi);
        }
    }
    Ok(tally.finish(grid.len()))
}

/// Checks `max(|d^2 F|, |dbar^2 F|, |d dbar F|) <= M |dF|` and `|d J_F| <= 4 M |dF|^2`
/// for `F(z) = G(e^{-t0} z)`, with second derivatives by finite differences of the
/// closed-form first derivatives.
pub fn second_derivative_check<T: Real>(f: &SchlichtFunction<T>, q: T, grid: &DiskGrid<T>) -> Result<DerivativeReport> {
    let (map, k) = scaled_extension(f, q)?;
    let m = second_derivative_constant(k).f64();
    let mut tally = Tally::new(&["second derivatives", "|dJ_F|"]);
    let results: Vec<Result<(f64, f64, f64)>> = grid
        .points()
        .par_iter()
        .map(|&z| {
            let first = |w: Cx<T>| wirtinger(&map, w, WirtingerMode::Analytic);
            let (a, _) = first(z)?;
            let (d_a, dbar_a) = fd_wirtinger(|w| Ok(first(w)?.0), z)?;
            let (d_b, dbar_b) = fd_wirtinger(|w| Ok(first(w)?.1), z)?;
            let second = d_a.norm().max(dbar_b.norm()).max(d_b.norm()).max(dbar_a.norm());
            let jac = |w: Cx<T>| -> Result<Cx<T>> {
                let (p, q) = first(w)?;
                Ok(Cx::new(p.norm_sqr() - q.norm_sqr(), T::zero()))
            };
            let (d_j, _) = fd_wirtinger(jac, z)?;
            Ok((a.norm().f64(), second.f64(), d_j.norm().f64()))
        })
        .collect();
    for (&z, r) in grid.points().iter().zip(results) {
        let (a, second, dj) = r?;
        let zc = to_c64(z);
        // Finite differences of smooth data resolve values near zero only to ~1e-9.
        tally.check(0, zc, second, 0.0, m * a + 1e-8);
        tally.check(1, zc, dj, 0.0, 4.0 * m * a * a + 1e-8);
    }
    Ok(tally.finish(grid.len()))
}

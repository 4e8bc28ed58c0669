//! Conformal maps of the exterior disk onto the exterior of a Jordan curve.
//!
//! The map `g(z) = rho z + c_0 + c_1/z + ...` with `rho > 0` is computed by the
//! Theodorsen iteration on a polar representation of the curve about an interior
//! centre: writing `g(z) = centre + z e^{h(z)}` with `h` holomorphic on the exterior
//! disk and `h(oo)` real, the boundary polar angle `Phi(theta)` solves
//! `Phi = theta - C[log r(Phi)]`, where `C` is the conjugate-function operator.

use std::f64::consts::TAU;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry;
use crate::scalar::{to_c64, Cx, Real};

/// Smooth closed curve parametrized by `tau in [0, 2 pi)`, positively oriented.
pub trait JordanCurve<T: Real>: Sync {
    fn point(&self, tau: T) -> Result<Cx<T>>;

    fn tangent(&self, tau: T) -> Result<Cx<T>>;

    /// Second derivative; central differences of the tangent by default.
    fn second(&self, tau: T) -> Result<Cx<T>> {
        let h = T::lit(1e-4);
        let d = |h: T| -> Result<Cx<T>> { Ok((self.tangent(tau + h)? - self.tangent(tau - h)?) / (h * T::lit(2.0))) };
        let (a, b) = (d(h)?, d(h * T::lit(0.5))?);
        Ok((b * T::lit(4.0) - a) / T::lit(3.0))
    }
}

/// Circle `centre + radius e^{i tau}`.
#[derive(Clone, Copy, Debug)]
pub struct Circle<T: Real> {
    pub center: Cx<T>,
    pub radius: T,
}

impl<T: Real> JordanCurve<T> for Circle<T> {
    fn point(&self, tau: T) -> Result<Cx<T>> {
        Ok(self.center + Cx::from_polar(self.radius, tau))
    }

    fn tangent(&self, tau: T) -> Result<Cx<T>> {
        Ok(Cx::new(T::zero(), T::one()) * Cx::from_polar(self.radius, tau))
    }

    fn second(&self, tau: T) -> Result<Cx<T>> {
        Ok(-Cx::from_polar(self.radius, tau))
    }
}

/// Ellipse `centre + e^{i angle} (a cos tau + i b sin tau)`.
#[derive(Clone, Copy, Debug)]
pub struct Ellipse<T: Real> {
    pub center: Cx<T>,
    pub a: T,
    pub b: T,
    pub angle: T,
}

impl<T: Real> JordanCurve<T> for Ellipse<T> {
    fn point(&self, tau: T) -> Result<Cx<T>> {
        let rot = Cx::from_polar(T::one(), self.angle);
        Ok(self.center + rot * Cx::new(self.a * tau.cos(), self.b * tau.sin()))
    }

    fn tangent(&self, tau: T) -> Result<Cx<T>> {
        let rot = Cx::from_polar(T::one(), self.angle);
        Ok(rot * Cx::new(-self.a * tau.sin(), self.b * tau.cos()))
    }

    fn second(&self, tau: T) -> Result<Cx<T>> {
        let rot = Cx::from_polar(T::one(), self.angle);
        Ok(-(rot * Cx::new(self.a * tau.cos(), self.b * tau.sin())))
    }
}

/// Curve given by closures for the point and the tangent.
pub struct CurveFn<P, D> {
    pub point: P,
    pub tangent: D,
}

impl<T: Real, P, D> JordanCurve<T> for CurveFn<P, D>
where
    P: Fn(T) -> Cx<T> + Sync,
    D: Fn(T) -> Cx<T> + Sync,
{
    fn point(&self, tau: T) -> Result<Cx<T>> {
        Ok((self.point)(tau))
    }

    fn tangent(&self, tau: T) -> Result<Cx<T>> {
        Ok((self.tangent)(tau))
    }
}

/// Samples `curve(2 pi j / n)`.
pub fn sample_curve<T: Real, C: JordanCurve<T> + ?Sized>(curve: &C, n: usize) -> Result<Vec<Cx<T>>> {
    (0..n)
        .into_par_iter()
        .map(|j| curve.point(T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(n)))
        .collect()
}

/// Basic geometry of a validated curve.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurveSummary<T: Real> {
    pub area: T,
    pub diameter: T,
    pub min_speed: T,
    pub centroid: Cx<T>,
}

/// Checks closure, regularity, positive orientation and simplicity of an `n`-point sampling.
pub fn validate_curve<T: Real, C: JordanCurve<T> + ?Sized>(curve: &C, n: usize) -> Result<CurveSummary<T>> {
    let pts = sample_curve(curve, n)?;
    let diameter = geometry::diameter(&pts);
    if !(diameter > T::zero()) || !diameter.is_finite() {
        return Err(Error::InvalidMap("curve is degenerate".into()));
    }
    let gap = (curve.point(T::TAU())? - pts[0]).norm();
    if gap > T::lit(1e-9).max(T::eps() * T::lit(100.0)) * diameter {
        return Err(Error::InvalidMap(format!("curve is not closed (gap {:e})", gap.f64())));
    }
    let speeds: Vec<T> = (0..n)
        .into_par_iter()
        .map(|j| curve.tangent(T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(n)).map(|d| d.norm()))
        .collect::<Result<_>>()?;
    let min_speed = speeds.iter().copied().fold(T::infinity(), |a, b| a.min(b));
    if !(min_speed > T::zero()) {
        return Err(Error::InvalidMap("curve has a vanishing tangent".into()));
    }
    let area = geometry::signed_area(&pts);
    if !(area > T::zero()) {
        return Err(Error::InvalidMap("curve is not positively oriented".into()));
    }
    if geometry::self_intersects(&pts) {
        return Err(Error::InvalidMap("curve sampling self-intersects".into()));
    }
    Ok(CurveSummary { area, diameter, min_speed, centroid: geometry::centroid(&pts) })
}

/// Normalized DFT `c_k = (1/n) sum_j x_j e^{-2 pi i jk/n}`, indexed `k = 0..n` (wrapping).
pub fn dft<T: Real>(x: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = x.len();
    let mut buf = x.to_vec();
    if n == 0 {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv = T::from_usize_lossy(n).recip();
    buf.iter_mut().for_each(|c| *c = *c * inv);
    buf
}

/// Inverse of [`dft`].
pub fn idft<T: Real>(c: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = c.len();
    let mut buf = c.to_vec();
    if n == 0 {
        return buf;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Signed frequency of DFT index `k` for length `n`; the Nyquist index maps to `n/2`.
fn freq(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn spectral_multiply<T: Real>(samples: &[T], mult: impl Fn(i64, bool) -> Cx<T>) -> Vec<T> {
    let n = samples.len();
    let x: Vec<Cx<T>> = samples.iter().map(|&s| Cx::new(s, T::zero())).collect();
    let mut c = dft(&x);
    for (k, ck) in c.iter_mut().enumerate() {
        let nyquist = n % 2 == 0 && k == n / 2;
        *ck = *ck * mult(freq(k, n), nyquist);
    }
    idft(&c).into_iter().map(|v| v.re).collect()
}

/// Discrete conjugate function on uniform samples of `[0, 2 pi)`: Fourier mode `k`
/// is multiplied by `-i sign(k)`; the mean and the Nyquist mode are dropped.
pub fn conjugate_function<T: Real>(samples: &[T]) -> Vec<T> {
    spectral_multiply(samples, |k, nyq| {
        if k == 0 || nyq {
            Cx::new(T::zero(), T::zero())
        } else if k > 0 {
            Cx::new(T::zero(), -T::one())
        } else {
            Cx::new(T::zero(), T::one())
        }
    })
}

/// Spectral derivative of uniform periodic samples.
pub fn spectral_derivative<T: Real>(samples: &[T]) -> Vec<T> {
    spectral_multiply(samples, |k, nyq| {
        if nyq {
            Cx::new(T::zero(), T::zero())
        } else {
            Cx::new(T::zero(), T::lit(k as f64))
        }
    })
}

/// Trigonometric interpolant of real uniform samples on `[0, 2 pi)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigSeries<T: Real> {
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> TrigSeries<T> {
    pub fn new(samples: &[T]) -> Self {
        let x: Vec<Cx<T>> = samples.iter().map(|&s| Cx::new(s, T::zero())).collect();
        Self { coeffs: dft(&x) }
    }

    pub fn eval(&self, theta: T) -> T {
        let n = self.coeffs.len();
        let mut acc = T::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            let f = freq(k, n);
            let nyq = n % 2 == 0 && k == n / 2;
            let term = (*c * Cx::from_polar(T::one(), theta * T::lit(f as f64))).re;
            // The Nyquist mode is split evenly between +n/2 and -n/2.
            acc = acc + if nyq { c.re * (theta * T::lit(f as f64)).cos() } else { term };
        }
        acc
    }
}

/// Settings for [`exterior_map`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FitOptions<T: Real> {
    /// Number of boundary nodes (a power of two is fastest).
    pub n: usize,
    /// Largest admissible off-grid residual relative to the curve diameter.
    pub tol: T,
    pub max_iter: usize,
    /// Polar centre; the area centroid when absent.
    pub center: Option<Cx<T>>,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self { n: 512, tol: T::lit(1e-8), max_iter: 2000, center: None }
    }
}

/// Exterior conformal map `g(z) = capacity z + sum_{m >= 0} coeffs[m] z^{-m}` together
/// with its boundary correspondence `theta_j -> tau_j` on `theta_j = 2 pi j / n`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ExteriorMap<T: Real> {
    pub n: usize,
    pub center: Cx<T>,
    pub capacity: T,
    pub coeffs: Vec<Cx<T>>,
    /// Curve parameter of the image of `e^{i theta_j}` (continuous, increasing).
    pub tau: Vec<T>,
    /// `g(e^{i theta_j})`, exact curve points.
    pub boundary: Vec<Cx<T>>,
    /// `|g'(e^{i theta_j})|`.
    pub boundary_speed: Vec<T>,
    /// Largest off-grid mismatch between series and curve, relative to the diameter.
    pub residual: T,
    pub diameter: T,
    pub iterations: usize,
}

struct PolarCurve<'a, T: Real, C: ?Sized> {
    curve: &'a C,
    center: Cx<T>,
    taus: Vec<T>,
    angles: Vec<T>,
}

fn unwrap_near<T: Real>(raw: T, reference: T) -> T {
    raw + T::TAU() * ((reference - raw) / T::TAU()).round()
}

impl<'a, T: Real, C: JordanCurve<T> + ?Sized> PolarCurve<'a, T, C> {
    fn new(curve: &'a C, center: Cx<T>, m: usize) -> Result<Self> {
        let taus: Vec<T> = (0..=m).map(|i| T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(m)).collect();
        let raw: Vec<T> = taus.par_iter().map(|&t| curve.point(t).map(|w| (w - center).arg())).collect::<Result<_>>()?;
        let mut angles = Vec::with_capacity(m + 1);
        angles.push(raw[0]);
        for i in 1..=m {
            let a = unwrap_near(raw[i], angles[i - 1]);
            if !(a > angles[i - 1]) {
                return Err(Error::NotStarShaped {
                    center: to_c64(center),
                    detail: format!("polar angle decreases near tau = {:.6}", taus[i].f64()),
                });
            }
            angles.push(a);
        }
        let turn = angles[m] - angles[0];
        if (turn - T::TAU()).mag() > T::lit(1e-6) {
            return Err(Error::NotStarShaped {
                center: to_c64(center),
                detail: format!("total polar turn {:.6} differs from 2 pi", turn.f64()),
            });
        }
        Ok(Self { curve, center, taus, angles })
    }

    /// Curve parameter with polar angle `phi` (continuous in `phi`) and its radius.
    fn solve(&self, phi: T, guess: Option<T>) -> Result<(T, T)> {
        let a0 = self.angles[0];
        let wraps = ((phi - a0) / T::TAU()).floor();
        let target = phi - wraps * T::TAU();
        let m = self.taus.len() - 1;
        let i = match self.angles.binary_search_by(|a| a.partial_cmp(&target).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(m - 1),
            Err(i) => i.saturating_sub(1).min(m - 1),
        };
        let (mut lo, mut hi) = (self.taus[i], self.taus[i + 1]);
        let frac = (target - self.angles[i]) / (self.angles[i + 1] - self.angles[i]);
        let mut tau = lo + (hi - lo) * frac;
        if let Some(g) = guess {
            let g = g - wraps * T::TAU();
            if g > lo && g < hi {
                tau = g;
            }
        }
        let reference = target;
        for _ in 0..80 {
            let w = self.curve.point(tau)? - self.center;
            let dw = self.curve.tangent(tau)?;
            let a = unwrap_near(w.arg(), reference);
            let resid = a - target;
            if resid.mag() <= T::lit(2.0) * T::eps() * (T::one() + target.mag()) {
                break;
            }
            if resid > T::zero() {
                hi = tau;
            } else {
                lo = tau;
            }
            let slope = (dw / w).im;
            if !(slope > T::zero()) {
                return Err(Error::NotStarShaped {
                    center: to_c64(self.center),
                    detail: format!("polar angle not increasing at tau = {:.6}", tau.f64()),
                });
            }
            let mut next = tau - resid / slope;
            if !(next >= lo && next <= hi) {
                next = (lo + hi) / T::lit(2.0);
            }
            let step = (next - tau).mag();
            tau = next;
            if step <= T::lit(2.0) * T::eps() * (T::one() + tau.mag()) {
                break;
            }
        }
        let r = (self.curve.point(tau)? - self.center).norm();
        Ok((tau + wraps * T::TAU(), r))
    }
}

fn theta<T: Real>(j: usize, n: usize) -> T {
    T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(n)
}

/// Fits the exterior map of `curve`; `guess` (a map of a nearby curve with the same
/// parametrization) seeds the boundary correspondence.
pub fn exterior_map<T: Real, C: JordanCurve<T> + ?Sized>(
    curve: &C,
    opts: &FitOptions<T>,
    guess: Option<&ExteriorMap<T>>,
) -> Result<ExteriorMap<T>> {
    let n = opts.n;
    if n < 8 {
        return Err(Error::Argument("exterior map needs at least 8 nodes".into()));
    }
    let summary = validate_curve(curve, (2 * n).max(256))?;
    let center = opts.center.unwrap_or(summary.centroid);
    let polar = PolarCurve::new(curve, center, 4 * n)?;

    let thetas: Vec<T> = (0..n).map(|j| theta(j, n)).collect();
    let mut tau_guess: Vec<Option<T>> = vec![None; n];
    let mut phi: Vec<T> = thetas.clone();
    if let Some(g) = guess {
        for j in 0..n {
            let t = if g.n == n { g.tau[j] } else { g.correspondence(thetas[j]) };
            let w = curve.point(t)? - center;
            let reference = if j == 0 { thetas[0] } else { phi[j - 1] };
            phi[j] = unwrap_near(w.arg(), reference);
            tau_guess[j] = Some(t);
        }
        let mean = phi.iter().zip(&thetas).fold(T::zero(), |s, (p, t)| s + (*p - *t)) / T::from_usize_lossy(n);
        let shift = T::TAU() * (mean / T::TAU()).round();
        phi.iter_mut().for_each(|p| *p = *p - shift);
    }

    let mut iterations = 0;
    let mut last_change = T::infinity();
    let mut solved: Vec<(T, T)>;
    loop {
        solved = phi
            .par_iter()
            .zip(tau_guess.par_iter())
            .map(|(&p, &g)| polar.solve(p, g))
            .collect::<Result<_>>()?;
        let log_r: Vec<T> = solved.iter().map(|&(_, r)| r.ln()).collect();
        let conj = conjugate_function(&log_r);
        let mut change = T::zero();
        for j in 0..n {
            let next = thetas[j] - conj[j];
            change = change.max((next - phi[j]).mag());
            phi[j] = next;
            tau_guess[j] = Some(solved[j].0);
        }
        iterations += 1;
        if change <= T::lit(64.0) * T::eps() {
            break;
        }
        if iterations >= opts.max_iter || !change.is_finite() || (iterations > 20 && change > T::lit(10.0)) {
            return Err(Error::NoConvergence {
                what: "Theodorsen iteration".into(),
                iterations,
                last: change.f64(),
                hint: "increase n or continue from a nearby curve".into(),
            });
        }
        // Stagnation at the rounding floor.
        if iterations > 50 && change >= last_change && change <= T::lit(1e-11) {
            break;
        }
        last_change = change;
    }
    solved = phi
        .par_iter()
        .zip(tau_guess.par_iter())
        .map(|(&p, &g)| polar.solve(p, g))
        .collect::<Result<_>>()?;
    let tau: Vec<T> = solved.iter().map(|&(t, _)| t).collect();
    let log_r: Vec<T> = solved.iter().map(|&(_, r)| r.ln()).collect();
    let capacity = (log_r.iter().fold(T::zero(), |s, &v| s + v) / T::from_usize_lossy(n)).exp();

    let boundary: Vec<Cx<T>> = tau.par_iter().map(|&t| curve.point(t)).collect::<Result<_>>()?;
    let spectrum = dft(&boundary);
    let mut coeffs = Vec::with_capacity(n / 2);
    for m in 0..n / 2 {
        coeffs.push(spectrum[(n - m) % n]);
    }
    let head = spectrum[1];

    let offset: Vec<T> = tau.iter().zip(&thetas).map(|(t, th)| *t - *th).collect();
    let doffset = spectral_derivative(&offset);
    let speeds: Vec<T> = tau.par_iter().map(|&t| curve.tangent(t).map(|d| d.norm())).collect::<Result<_>>()?;
    let mut boundary_speed = Vec::with_capacity(n);
    for j in 0..n {
        let dtau = T::one() + doffset[j];
        if !(dtau > T::zero()) {
            return Err(Error::InvalidMap(format!(
                "boundary correspondence is not increasing at theta = {:.6}",
                thetas[j].f64()
            )));
        }
        boundary_speed.push(speeds[j] * dtau);
    }

    let mut map = ExteriorMap {
        n,
        center,
        capacity,
        coeffs,
        tau,
        boundary,
        boundary_speed,
        residual: T::zero(),
        diameter: summary.diameter,
        iterations,
    };
    let interp = TrigSeries::new(&offset);
    let half = T::PI() / T::from_usize_lossy(n);
    let mids: Vec<T> = (0..n)
        .into_par_iter()
        .map(|j| -> Result<T> {
            let th = thetas[j] + half;
            let exact = curve.point(th + interp.eval(th))?;
            Ok((map.series(Cx::from_polar(T::one(), th)) - exact).norm())
        })
        .collect::<Result<_>>()?;
    let mismatch = mids.into_iter().fold(T::zero(), |a, b| a.max(b));
    let head_gap = (head - Cx::new(capacity, T::zero())).norm();
    map.residual = mismatch.max(head_gap) / summary.diameter;
    if !(map.residual <= opts.tol) {
        return Err(Error::NoConvergence {
            what: "exterior map residual".into(),
            iterations,
            last: map.residual.f64(),
            hint: format!("residual exceeds {:e}; increase n", opts.tol.f64()),
        });
    }
    Ok(map)
}

impl<T: Real> ExteriorMap<T> {
    fn series(&self, z: Cx<T>) -> Cx<T> {
        let u = z.inv();
        let mut acc = Cx::new(T::zero(), T::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc * u + *c;
        }
        z * self.capacity + acc
    }

    fn series_derivative(&self, z: Cx<T>) -> Cx<T> {
        let u = z.inv();
        let mut acc = Cx::new(T::zero(), T::zero());
        for (m, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * u + *c * T::from_usize_lossy(m);
        }
        Cx::new(self.capacity, T::zero()) - acc * u
    }

    fn check_exterior(z: Cx<T>) -> Result<()> {
        if z.norm() >= T::one() {
            Ok(())
        } else {
            Err(Error::Domain(format!("|z| = {} is inside the unit disk", z.norm().f64())))
        }
    }

    /// `g(z)` for `|z| >= 1`.
    pub fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        Self::check_exterior(z)?;
        Ok(self.series(z))
    }

    /// `g'(z)` for `|z| >= 1`.
    pub fn derivative(&self, z: Cx<T>) -> Result<Cx<T>> {
        Self::check_exterior(z)?;
        Ok(self.series_derivative(z))
    }

    /// Curve parameter of `g(e^{i theta})`.
    pub fn correspondence(&self, theta: T) -> T {
        let offset: Vec<T> = self.tau.iter().enumerate().map(|(j, t)| *t - self::theta::<T>(j, self.n)).collect();
        theta + TrigSeries::new(&offset).eval(theta)
    }

    /// `|g'(e^{i theta})|`, interpolated spectrally between nodes.
    pub fn boundary_derivative(&self, theta: T) -> T {
        let j_f = theta * T::from_usize_lossy(self.n) / T::TAU();
        let j = j_f.round();
        if (j_f - j).mag() < T::lit(1e-9) {
            let idx = j.to_i64().unwrap_or(0).rem_euclid(self.n as i64) as usize;
            return self.boundary_speed[idx];
        }
        TrigSeries::new(&self.boundary_speed).eval(theta)
    }

    /// Map of the curve scaled by `1 / capacity`, so that `g'(oo) = 1`.
    pub fn normalized(&self) -> Self {
        let s = self.capacity.recip();
        ExteriorMap {
            n: self.n,
            center: self.center * s,
            capacity: T::one(),
            coeffs: self.coeffs.iter().map(|c| *c * s).collect(),
            tau: self.tau.clone(),
            boundary: self.boundary.iter().map(|c| *c * s).collect(),
            boundary_speed: self.boundary_speed.iter().map(|v| *v * s).collect(),
            residual: self.residual,
            diameter: self.diameter * s,
            iterations: self.iterations,
        }
    }

    /// Node angles `theta_j`.
    pub fn thetas(&self) -> Vec<T> {
        (0..self.n).map(|j| theta(j, self.n)).collect()
    }
}

impl ExteriorMap<f64> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `2 pi j / n`.
pub fn node_angle(j: usize, n: usize) -> f64 {
    TAU * j as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    #[test]
    fn conjugate_of_cosine() {
        let n = 64;
        let x: Vec<f64> = (0..n).map(|j| (3.0 * node_angle(j, n)).cos() + 2.0).collect();
        let y = conjugate_function(&x);
        for (j, v) in y.iter().enumerate() {
            assert!((v - (3.0 * node_angle(j, n)).sin()).abs() < 1e-13);
        }
        assert!(conjugate_function(&[1.5f64; 16]).iter().all(|v: &f64| v.abs() < 1e-15));
    }

    #[test]
    fn circle_map() {
        let circle = Circle { center: c(0.5, -0.25), radius: 2.0 };
        let m = exterior_map(&circle, &FitOptions { n: 64, ..Default::default() }, None).unwrap();
        assert!((m.capacity - 2.0).abs() < 1e-13);
        assert!((m.coeffs[0] - c(0.5, -0.25)).norm() < 1e-13);
        assert!(m.coeffs[1..].iter().all(|v| v.norm() < 1e-13));
        assert!((m.boundary_derivative(0.3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_map() {
        let e = Ellipse { center: c(0.0, 0.0), a: 2.0, b: 1.0, angle: 0.0 };
        let m = exterior_map(&e, &FitOptions { n: 256, ..Default::default() }, None).unwrap();
        assert!((m.capacity - 1.5).abs() < 1e-10);
        assert!((m.coeffs[1] - c(0.5, 0.0)).norm() < 1e-10);
        assert!(m.residual <= 1e-8);
        for &th in &[0.0, 0.7, 2.0] {
            let exact = (c(1.5, 0.0) - Cx::from_polar(0.5, -2.0 * th)).norm();
            assert!((m.boundary_derivative(th) - exact).abs() < 1e-9);
        }
        let z = c(1.3, 0.4);
        assert!((m.eval(z).unwrap() - (z * 1.5 + z.inv() * 0.5)).norm() < 1e-10);
        assert!(matches!(m.eval(c(0.5, 0.0)), Err(Error::Domain(_))));
        assert!((m.normalized().capacity - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spectral_convergence_on_ellipse() {
        let e = Ellipse { center: c(0.1, 0.2), a: 2.0, b: 1.0, angle: 0.4 };
        let mut prev: Option<f64> = None;
        for n in [16usize, 32, 64, 128] {
            let m = exterior_map(&e, &FitOptions { n, tol: 1.0, ..Default::default() }, None).unwrap();
            if let Some(p) = prev {
                if p > 1e-12 {
                    assert!(m.residual * 4.0 <= p, "n = {n}: {} vs {p}", m.residual);
                }
            }
            prev = Some(m.residual);
        }
        assert!(prev.unwrap() < 1e-12);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let e1 = Ellipse { center: c(0.0, 0.0), a: 1.5, b: 1.0, angle: 0.2 };
        let e2 = Ellipse { center: c(0.0, 0.0), a: 1.55, b: 1.0, angle: 0.2 };
        let opts = FitOptions { n: 128, ..Default::default() };
        let m1 = exterior_map(&e1, &opts, None).unwrap();
        let cold = exterior_map(&e2, &opts, None).unwrap();
        let warm = exterior_map(&e2, &opts, Some(&m1)).unwrap();
        assert!((cold.capacity - warm.capacity).abs() < 1e-12);
        assert!(warm.iterations <= cold.iterations);
    }

    #[test]
    fn rejects_bad_curves() {
        let cw = CurveFn { point: |t: f64| Cx::from_polar(1.0, -t), tangent: |t: f64| c(0.0, -1.0) * Cx::from_polar(1.0, -t) };
        assert!(matches!(exterior_map(&cw, &FitOptions { n: 32, ..Default::default() }, None), Err(Error::InvalidMap(_))));
        // A curve whose polar angle about the origin turns back.
        let wobble = CurveFn {
            point: |t: f64| Cx::from_polar(1.0 + 0.3 * t.cos(), t + 1.5 * t.sin()),
            tangent: |t: f64| {
                let r = 1.0 + 0.3 * t.cos();
                let a = t + 1.5 * t.sin();
                Cx::from_polar(1.0, a) * c(-0.3 * t.sin(), r * (1.0 + 1.5 * t.cos()))
            },
        };
        let r = exterior_map(&wobble, &FitOptions { n: 32, center: Some(c(0.0, 0.0)), ..Default::default() }, None);
        assert!(matches!(r, Err(Error::NotStarShaped { .. }) | Err(Error::InvalidMap(_))), "{r:?}");
    }

    #[test]
    fn json_round_trip() {
        let e = Ellipse { center: c(0.0, 0.0), a: 1.2, b: 1.0, angle: 0.0 };
        let m = exterior_map(&e, &FitOptions { n: 32, ..Default::default() }, None).unwrap();
        let back = ExteriorMap::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn f32_fit() {
        let e = Ellipse { center: Cx::new(0.0f32, 0.0), a: 1.5, b: 1.0, angle: 0.0 };
        let m = exterior_map(&e, &FitOptions { n: 64, tol: 1e-4, ..Default::default() }, None).unwrap();
        assert!((m.capacity - 1.25).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn conjugate_twice_is_minus_identity(a in proptest::collection::vec(-1.0f64..1.0, 1..8),
                                             b in proptest::collection::vec(-1.0f64..1.0, 1..8)) {
            let n = 64;
            let x: Vec<f64> = (0..n).map(|j| {
                let th = node_angle(j, n);
                a.iter().enumerate().map(|(k, v)| v * ((k + 1) as f64 * th).cos()).sum::<f64>()
                    + b.iter().enumerate().map(|(k, v)| v * ((k + 1) as f64 * th).sin()).sum::<f64>()
            }).collect();
            let y = conjugate_function(&conjugate_function(&x));
            for j in 0..n {
                prop_assert!((y[j] + x[j]).abs() < 1e-12);
            }
        }
    }
}

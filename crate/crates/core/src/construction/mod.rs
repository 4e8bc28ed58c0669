//! The corrected Loewner chain that turns the Ahlfors-Weill extension `G` into a
//! quasiconformal extension of `f` fixing the origin.
//!
//! Pipeline: `G`, then `z0 = e^{t0} G^{-1}(0)`, the Moebius correction `T` with
//! `T(0) = z0`, the composed map `Psi = G(e^{-t0} T(.))`, the curve family
//! `Psi(e^{t0 - t} e^{i tau})` for `t >= t1`, exterior maps of those curves, their
//! Herglotz boundary trace and Becker's condition. For `t < t1` the chain is the
//! Ahlfors-Weill chain itself.

mod checks;
mod extension;
mod run;

pub use checks::*;
pub use extension::*;
pub use run::*;

use serde::{Deserialize, Serialize};

use crate::analytic::{DiskGrid, QEstimate, SchlichtFunction};
use crate::bounds::{core_times, schedule_times};
use crate::conformal::{conjugate_function, dft, ExteriorMap, JordanCurve};
use crate::error::{Error, Result};
use crate::loewner::aw_herglotz;
use crate::qc::{AwExtension, PlaneMap};
use crate::scalar::{to_c64, Cx, Real};

/// `T(z) = (1+|z0|^2)(z + z0) / (1 + |z0|^2 + 2 conj(z0) z)`.
#[derive(Clone, Copy, Debug)]
pub struct Mobius<T: Real> {
    pub z0: Cx<T>,
    s: T,
}

impl<T: Real> Mobius<T> {
    pub fn new(z0: Cx<T>) -> Result<Self> {
        if !(z0.norm() < T::one()) {
            return Err(Error::Domain(format!("|z0| = {} must be below 1", z0.norm().f64())));
        }
        Ok(Self { z0, s: T::one() + z0.norm_sqr() })
    }

    fn den(&self, z: Cx<T>) -> Cx<T> {
        self.z0.conj() * z * T::lit(2.0) + self.s
    }

    pub fn eval(&self, z: Cx<T>) -> Cx<T> {
        (z + self.z0) * self.s / self.den(z)
    }

    /// `T'(z) = (1+|z0|^2)(1-|z0|^2) / D^2`.
    pub fn derivative(&self, z: Cx<T>) -> Cx<T> {
        let d = self.den(z);
        Cx::new(self.s * (T::lit(2.0) - self.s), T::zero()) / (d * d)
    }

    /// `T''(z) = -4 conj(z0) T'(z) / D`.
    pub fn second(&self, z: Cx<T>) -> Cx<T> {
        -(self.z0.conj() * self.derivative(z) * T::lit(4.0)) / self.den(z)
    }

    pub fn inverse(&self, w: Cx<T>) -> Cx<T> {
        (w - self.z0) * self.s / (Cx::new(self.s, T::zero()) - self.z0.conj() * w * T::lit(2.0))
    }

    /// `-(1+|z0|^2) / (2 conj(z0))`, absent for `z0 = 0`.
    pub fn pole(&self) -> Option<Cx<T>> {
        if self.z0.norm() == T::zero() {
            None
        } else {
            Some(-Cx::new(self.s, T::zero()) / (self.z0.conj() * T::lit(2.0)))
        }
    }

    /// Radius `sqrt((1+|z0|^2)/2)` of the circle `T` maps onto itself.
    pub fn invariant_radius(&self) -> T {
        (self.s / T::lit(2.0)).sqrt()
    }
}

/// `Psi(z) = G(e^{-t0} T(z))`.
#[derive(Clone, Debug)]
pub struct Psi<T: Real> {
    pub g: AwExtension<T>,
    pub scale: T,
    pub mobius: Mobius<T>,
}

impl<T: Real> Psi<T> {
    /// `(Psi, dPsi, dbarPsi)`.
    pub fn jet(&self, z: Cx<T>) -> Result<(Cx<T>, Cx<T>, Cx<T>)> {
        let tz = self.mobius.eval(z);
        let d = self.mobius.derivative(z);
        let zeta = tz * self.scale;
        let val = self.g.eval(zeta)?;
        let (a, b) = self.g.wirtinger_analytic(zeta).unwrap_or_else(|| unreachable!())?;
        Ok((val, a * d * self.scale, b * d.conj() * self.scale))
    }

    /// Derivative of `Psi` along the direction `dz`.
    pub fn directional(&self, z: Cx<T>, dz: Cx<T>) -> Result<Cx<T>> {
        let (_, a, b) = self.jet(z)?;
        Ok(a * dz + b * dz.conj())
    }

    /// `Psi^{-1}(w)` by damped Newton from `seed`.
    pub fn inverse(&self, w: Cx<T>, seed: Cx<T>) -> Result<Cx<T>> {
        newton_invert(|z| self.jet(z), w, seed)
    }

    /// `F(zeta) = G(e^{-t0} zeta)` with its Wirtinger derivatives.
    pub fn f_jet(&self, zeta: Cx<T>) -> Result<(Cx<T>, Cx<T>, Cx<T>)> {
        let val = self.g.eval(zeta * self.scale)?;
        let (a, b) = self.g.wirtinger_analytic(zeta * self.scale).unwrap_or_else(|| unreachable!())?;
        Ok((val, a * self.scale, b * self.scale))
    }
}

impl<T: Real> PlaneMap<T> for Psi<T> {
    fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        self.g.eval(self.mobius.eval(z) * self.scale)
    }

    fn wirtinger_analytic(&self, z: Cx<T>) -> Option<Result<(Cx<T>, Cx<T>)>> {
        Some(self.jet(z).map(|(_, a, b)| (a, b)))
    }
}

/// Solves `map(z) = w` for an orientation-preserving real-analytic map given as
/// `z -> (value, dz, dzbar)`; each step solves `a dz + b conj(dz) = r`.
pub fn newton_invert<T: Real>(
    map: impl Fn(Cx<T>) -> Result<(Cx<T>, Cx<T>, Cx<T>)>,
    w: Cx<T>,
    seed: Cx<T>,
) -> Result<Cx<T>> {
    let tol = T::lit(64.0) * T::eps() * (T::one() + w.norm());
    let mut z = seed;
    let (mut val, mut a, mut b) = map(z)?;
    let mut last = T::infinity();
    for it in 0..80 {
        let r = w - val;
        let rn = r.norm();
        if rn <= tol || (it > 4 && rn >= last && rn <= tol * T::lit(64.0)) {
            return Ok(z);
        }
        last = rn;
        let jac = a.norm_sqr() - b.norm_sqr();
        if !(jac > T::zero()) {
            return Err(Error::Singularity { z: to_c64(z), what: "non-positive Jacobian during inversion".into() });
        }
        let step = (a.conj() * r - b * r.conj()) / jac;
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let cand = z + step * lambda;
            if let Ok(next) = map(cand) {
                if (w - next.0).norm() < rn {
                    z = cand;
                    (val, a, b) = next;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    if (w - val).norm() <= T::lit(1e-10) * (T::one() + w.norm()) {
        return Ok(z);
    }
    Err(Error::NoConvergence {
        what: "Newton inversion".into(),
        iterations: 80,
        last: (w - val).norm().f64(),
        hint: "seed closer to the preimage".into(),
    })
}

/// `z0 = e^{t0} G^{-1}(0)` by damped Newton from `a_2`, with a grid-search fallback on
/// `|zeta| <= 3q`.
pub fn find_z0<T: Real>(g: &AwExtension<T>, t0: T, q: T) -> Result<Cx<T>> {
    let zero = Cx::new(T::zero(), T::zero());
    let map = |z: Cx<T>| -> Result<(Cx<T>, Cx<T>, Cx<T>)> {
        let (a, b) = g.wirtinger_analytic(z).unwrap_or_else(|| unreachable!())?;
        Ok((g.eval(z)?, a, b))
    };
    let accept = |z: Cx<T>| -> bool { g.eval(z).map(|v| v.norm() <= T::lit(1e-12)).unwrap_or(false) };
    if let Ok(z) = newton_invert(map, zero, g.f.a(2)) {
        if accept(z) {
            return Ok(z * t0.exp());
        }
    }
    let radius = (T::lit(3.0) * q).min(T::lit(0.99));
    let m = 81;
    let mut best = (T::infinity(), zero);
    for i in 0..m {
        for j in 0..m {
            let x = radius * (T::lit(2.0) * T::from_usize_lossy(i) / T::from_usize_lossy(m - 1) - T::one());
            let y = radius * (T::lit(2.0) * T::from_usize_lossy(j) / T::from_usize_lossy(m - 1) - T::one());
            let z = Cx::new(x, y);
            if z.norm() > radius {
                continue;
            }
            if let Ok(v) = g.eval(z) {
                if v.norm() < best.0 {
                    best = (v.norm(), z);
                }
            }
        }
    }
    match newton_invert(map, zero, best.1) {
        Ok(z) if accept(z) => Ok(z * t0.exp()),
        Ok(z) => Err(Error::NoConvergence {
            what: "root of G".into(),
            iterations: 80,
            last: g.eval(z).map(|v| v.norm().f64()).unwrap_or(f64::NAN),
            hint: "G may have no zero in the expected disk; check q".into(),
        }),
        Err(e) => Err(e),
    }
}

/// Immutable data of a construction run.
#[derive(Clone, Debug)]
pub struct ConstructionState<T: Real> {
    pub f: SchlichtFunction<T>,
    /// The `q` the construction runs at.
    pub q: T,
    /// Sampled Schwarzian and pre-Schwarzian estimates.
    pub estimate: QEstimate<T>,
    pub z0: Cx<T>,
    pub t0: T,
    pub t1: T,
    pub t2: T,
    pub psi: Psi<T>,
}

/// Grid used for the sampled `q` estimates.
pub fn estimate_grid<T: Real>() -> Result<DiskGrid<T>> {
    DiskGrid::disk(0.999, 200, 256)
}

impl<T: Real> ConstructionState<T> {
    /// Builds the state; `q = None` runs at the certified estimate.
    pub fn new(f: SchlichtFunction<T>, q: Option<T>) -> Result<Self> {
        let estimate = QEstimate::sample(&f, &estimate_grid()?)?;
        let q = match q {
            Some(q) => {
                if q < estimate.schwarzian * (T::one() - T::lit(1e-9)) {
                    return Err(Error::Domain(format!(
                        "declared q = {} is below the Schwarzian estimate {}",
                        q.f64(),
                        estimate.schwarzian.f64()
                    )));
                }
                q
            }
            None => estimate.certified(),
        };
        let (_, t0) = core_times(q)?;
        let g = AwExtension::new(f.clone());
        let z0 = find_z0(&g, t0, q)?;
        let bound = (T::lit(3.0) * q).sqrt();
        if z0.norm() > bound * (T::one() + T::lit(1e-12)) {
            return Err(Error::Invariant(format!(
                "|z0| = {} exceeds sqrt(3q) = {}; q is too small for this f",
                z0.norm().f64(),
                bound.f64()
            )));
        }
        let (t1, t2) = schedule_times(q, z0.norm())?;
        let mobius = Mobius::new(z0)?;
        let r = mobius.invariant_radius();
        for j in 0..32 {
            let z = Cx::from_polar(r, T::TAU() * T::from_usize_lossy(j) / T::lit(32.0));
            let gap = (mobius.eval(z).norm() - r).mag();
            if gap > T::lit(1e-10) {
                return Err(Error::Invariant(format!("T moves the invariant circle by {}", gap.f64())));
            }
        }
        let psi = Psi { g, scale: (-t0).exp(), mobius };
        let state = Self { f, q, estimate, z0, t0, t1, t2, psi };
        state.check_orientation()?;
        Ok(state)
    }

    /// `q_hat`, the Schwarzian estimate the acceptance bounds are stated in.
    pub fn q_hat(&self) -> T {
        self.estimate.schwarzian
    }

    fn check_orientation(&self) -> Result<()> {
        let rmax = (self.t0 - self.t2).exp();
        for i in 0..=8 {
            let r = rmax * T::from_usize_lossy(i) / T::lit(8.0);
            for j in 0..32 {
                let z = Cx::from_polar(r, T::TAU() * T::from_usize_lossy(j) / T::lit(32.0));
                let (_, a, b) = self.psi.jet(z)?;
                if !(a.norm_sqr() - b.norm_sqr() > T::zero()) {
                    return Err(Error::Invariant(format!("Psi is not orientation-preserving at {z}")));
                }
            }
        }
        Ok(())
    }

    /// Corrected curve `tau -> Psi(e^{t0 - t} e^{i tau})`, defined for `t >= t2`.
    pub fn curve_at(&self, t: T) -> Result<CorrectedCurve<'_, T>> {
        if t < self.t2 - T::lit(1e-12) {
            return Err(Error::Domain(format!(
                "corrected curves need t >= t2 = {}, got {}",
                self.t2.f64(),
                t.f64()
            )));
        }
        Ok(CorrectedCurve { psi: &self.psi, radius: (self.t0 - t).exp(), t })
    }

    /// Uncorrected curve `tau -> G(e^{-t} e^{i tau})`, `t > 0`.
    pub fn aw_curve(&self, t: T) -> Result<AwCurve<'_, T>> {
        if !(t > T::zero()) {
            return Err(Error::Domain("uncorrected curves need t > 0".into()));
        }
        Ok(AwCurve { g: &self.psi.g, radius: (-t).exp() })
    }

    /// `sup |(p-1)/(p+1)|` of the Ahlfors-Weill Herglotz function at time `t`,
    /// over `n` points of the unit circle (the supremum over the disk, by the maximum principle).
    pub fn aw_k_hat(&self, t: T, n: usize) -> Result<T> {
        let mut vals = Vec::with_capacity(n);
        for j in 0..n {
            let z = Cx::from_polar(T::one(), T::TAU() * T::from_usize_lossy(j) / T::from_usize_lossy(n));
            vals.push(aw_herglotz(&self.f, z, t)?);
        }
        Ok(becker_disk_radius(&vals))
    }
}

/// `Psi(r e^{i tau})` for fixed `r = e^{t0 - t}`.
#[derive(Clone, Copy, Debug)]
pub struct CorrectedCurve<'a, T: Real> {
    psi: &'a Psi<T>,
    pub radius: T,
    pub t: T,
}

impl<'a, T: Real> CorrectedCurve<'a, T> {
    fn z(&self, tau: T) -> Cx<T> {
        Cx::from_polar(self.radius, tau)
    }

    /// `d/dt Psi(e^{t0 - t} e^{i tau})`.
    pub fn time_derivative(&self, tau: T) -> Result<Cx<T>> {
        let z = self.z(tau);
        self.psi.directional(z, -z)
    }

    /// `(X, dX/dtau, dX/dt)`.
    pub fn derivatives(&self, tau: T) -> Result<(Cx<T>, Cx<T>, Cx<T>)> {
        let z = self.z(tau);
        let (val, a, b) = self.psi.jet(z)?;
        let iz = Cx::new(T::zero(), T::one()) * z;
        Ok((val, a * iz + b * iz.conj(), -(a * z + b * z.conj())))
    }

    /// Preimage point `e^{t0 - t} e^{i tau}` of the curve parameter.
    pub fn preimage(&self, tau: T) -> Cx<T> {
        self.z(tau)
    }
}

impl<'a, T: Real> JordanCurve<T> for CorrectedCurve<'a, T> {
    fn point(&self, tau: T) -> Result<Cx<T>> {
        self.psi.eval(self.z(tau))
    }

    fn tangent(&self, tau: T) -> Result<Cx<T>> {
        let z = self.z(tau);
        self.psi.directional(z, Cx::new(T::zero(), T::one()) * z)
    }
}

/// `G(r e^{i tau})`.
#[derive(Clone, Copy, Debug)]
pub struct AwCurve<'a, T: Real> {
    g: &'a AwExtension<T>,
    pub radius: T,
}

impl<'a, T: Real> JordanCurve<T> for AwCurve<'a, T> {
    fn point(&self, tau: T) -> Result<Cx<T>> {
        self.g.eval(Cx::from_polar(self.radius, tau))
    }

    fn tangent(&self, tau: T) -> Result<Cx<T>> {
        let z = Cx::from_polar(self.radius, tau);
        let (a, b) = self.g.wirtinger_analytic(z).unwrap_or_else(|| unreachable!())?;
        let iz = Cx::new(T::zero(), T::one()) * z;
        Ok(a * iz + b * iz.conj())
    }
}

/// `sup |(p-1)/(p+1)|`: the smallest `k` with all values in Becker's disk `U(k)`.
pub fn becker_disk_radius<T: Real>(values: &[Cx<T>]) -> T {
    let one = Cx::new(T::one(), T::zero());
    values.iter().map(|&p| ((p - one) / (p + one)).norm()).fold(T::zero(), |a, b| a.max(b))
}

/// Boundary values of the Herglotz function of the corrected chain at one time.
///
/// Sampled at `w = e^{i theta_j}` of the exterior disk; in the disk picture these are
/// `p(e^{-i theta_j}, t)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HerglotzBoundaryTrace<T: Real> {
    pub t: T,
    pub theta: Vec<T>,
    pub re_p: Vec<T>,
    pub im_p: Vec<T>,
    pub capacity: T,
    pub k_hat: T,
    /// Relative residual of the exterior map the trace is built on.
    pub residual: T,
}

impl<T: Real> HerglotzBoundaryTrace<T> {
    pub fn values(&self) -> Vec<Cx<T>> {
        self.re_p.iter().zip(&self.im_p).map(|(&r, &i)| Cx::new(r, i)).collect()
    }

    /// Coefficients `c_m` of `p(1/w, t) = sum_m c_m w^{-m}`.
    pub fn coefficients(&self) -> Vec<Cx<T>> {
        let n = self.theta.len();
        let spec = dft(&self.values());
        (0..n / 2).map(|m| spec[(n - m) % n]).collect()
    }

    /// `p(1/w, t)` for `|w| >= 1`.
    pub fn eval_exterior(&self, w: Cx<T>) -> Result<Cx<T>> {
        if w.norm() < T::one() {
            return Err(Error::Domain("trace is evaluated on the exterior disk".into()));
        }
        let u = w.inv();
        let mut acc = Cx::new(T::zero(), T::zero());
        for c in self.coefficients().iter().rev() {
            acc = acc * u + *c;
        }
        Ok(acc)
    }
}

/// Herglotz boundary trace of the corrected chain at `t` from the fitted exterior map of
/// `curve_at(t)`. The real part is the inward normal speed of the curve divided by
/// `|g'|`; the imaginary part is fixed by holomorphy in the exterior disk and `Im p(oo) = 0`.
pub fn herglotz_boundary<T: Real>(
    state: &ConstructionState<T>,
    t: T,
    map: &ExteriorMap<T>,
) -> Result<HerglotzBoundaryTrace<T>> {
    let curve = state.curve_at(t)?;
    let n = map.n;
    let mut re_p = Vec::with_capacity(n);
    for j in 0..n {
        let (_, d_tau, d_t) = curve.derivatives(map.tau[j])?;
        let re = (d_tau.conj() * d_t).im / (d_tau.norm() * map.boundary_speed[j]);
        if !(re > T::zero()) {
            return Err(Error::Positivity { z: to_c64(map.boundary[j]), t: t.f64(), re_p: re.f64() });
        }
        re_p.push(re);
    }
    let im_p: Vec<T> = conjugate_function(&re_p).into_iter().map(|v| -v).collect();
    let values: Vec<Cx<T>> = re_p.iter().zip(&im_p).map(|(&r, &i)| Cx::new(r, i)).collect();
    Ok(HerglotzBoundaryTrace {
        t,
        theta: map.thetas(),
        k_hat: becker_disk_radius(&values),
        re_p,
        im_p,
        capacity: map.capacity,
        residual: map.residual,
    })
}

#[cfg(test)]
mod tests;

use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::run::{stage, Construction};
use crate::conformal::{exterior_map, ExteriorMap, JordanCurve, TrigSeries};
use crate::error::{Error, Result};
use crate::qc::PlaneMap;
use crate::scalar::{to_c64, Cx, Real};

#[derive(Clone)]
struct CachedMap<T: Real> {
    t: T,
    map: Arc<ExteriorMap<T>>,
    /// Trigonometric interpolant of `tau_j - theta_j`.
    offset: Arc<TrigSeries<T>>,
}

/// Becker extension of the glued chain `f_t(zeta) = 1/g~_t(1/zeta)`:
/// `f` on the disk, `1/G(1/z)` for `1 <= |z| < e^{t1}` and `1/g~_t(e^{-i theta})` with
/// `z = e^{t + i theta}` beyond. Exterior maps at new times are fitted on demand
/// and cached.
pub struct FinalExtension<'a, T: Real> {
    pub construction: &'a Construction<T>,
    cache: Mutex<Vec<CachedMap<T>>>,
}

impl<'a, T: Real> FinalExtension<'a, T> {
    pub fn new(construction: &'a Construction<T>) -> Self {
        let cache = construction
            .times
            .iter()
            .zip(&construction.maps)
            .map(|(&t, m)| cached(t, m.clone()))
            .collect();
        Self { construction, cache: Mutex::new(cache) }
    }

    fn lookup(&self, t: T) -> (Option<CachedMap<T>>, Option<Arc<ExteriorMap<T>>>) {
        let cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(hit) = cache.iter().find(|e| e.t == t) {
            return (Some(hit.clone()), None);
        }
        let nearest = cache
            .iter()
            .min_by(|a, b| (a.t - t).mag().partial_cmp(&(b.t - t).mag()).unwrap_or(std::cmp::Ordering::Equal))
            .map(|e| e.map.clone());
        (None, nearest)
    }

    fn map_at(&self, t: T) -> Result<CachedMap<T>> {
        let (hit, guess) = self.lookup(t);
        if let Some(hit) = hit {
            return Ok(hit);
        }
        let c = self.construction;
        let curve = c.state.curve_at(t)?;
        let map = exterior_map(&curve, &c.params.fit_options(), guess.as_deref()).map_err(|e| stage(e, "exterior map", t))?;
        let entry = cached(t, map);
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).push(entry.clone());
        Ok(entry)
    }

    /// Fits and caches the maps at the given times, in order.
    pub fn prefetch(&self, times: &[T]) -> Result<()> {
        for &t in times {
            if t >= self.construction.state.t1 {
                self.map_at(t)?;
            }
        }
        Ok(())
    }

    /// Value at `z = e^{t + i theta}`.
    pub fn eval_polar(&self, t: T, theta: T) -> Result<Cx<T>> {
        let s = &self.construction.state;
        if t < T::zero() {
            return s.f.eval(Cx::from_polar(t.exp(), theta));
        }
        if t < s.t1 {
            let g = s.psi.g.eval(Cx::from_polar((-t).exp(), -theta))?;
            return Ok(g.inv());
        }
        let entry = self.map_at(t)?;
        let phi = -theta;
        let tau = phi + entry.offset.eval(phi);
        let x = s.curve_at(t)?.point(tau)?;
        if x.norm() == T::zero() {
            return Err(Error::Singularity { z: to_c64(Cx::from_polar(t.exp(), theta)), what: "curve passes through 0".into() });
        }
        Ok(x.inv())
    }

    /// Beltrami coefficient at `z = e^{t + i theta}` from central differences of step `h`
    /// in `(t, theta)`: with `s = log z`, `mu = (dF/dsbar)/(dF/ds) z/zbar`.
    pub fn beltrami_polar(&self, t: T, theta: T, h: T) -> Result<Cx<T>> {
        let two_h = h * T::lit(2.0);
        let f_t = (self.eval_polar(t + h, theta)? - self.eval_polar(t - h, theta)?) / two_h;
        let f_th = (self.eval_polar(t, theta + h)? - self.eval_polar(t, theta - h)?) / two_h;
        let i = Cx::new(T::zero(), T::one());
        let ds = (f_t - i * f_th) * T::lit(0.5);
        let dsbar = (f_t + i * f_th) * T::lit(0.5);
        if ds.norm() == T::zero() {
            return Err(Error::Singularity { z: to_c64(Cx::from_polar(t.exp(), theta)), what: "dF/ds vanishes".into() });
        }
        let rot = Cx::from_polar(T::one(), theta * T::lit(2.0));
        Ok(dsbar / ds * rot)
    }
}

fn cached<T: Real>(t: T, map: ExteriorMap<T>) -> CachedMap<T> {
    let offset: Vec<T> = map.tau.iter().zip(map.thetas()).map(|(tau, th)| *tau - th).collect();
    CachedMap { t, offset: Arc::new(TrigSeries::new(&offset)), map: Arc::new(map) }
}

impl<'a, T: Real> PlaneMap<T> for FinalExtension<'a, T> {
    fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        let r = z.norm();
        if r < T::one() {
            return self.construction.state.f.eval(z);
        }
        self.eval_polar(r.ln(), z.arg())
    }
}

/// One sampled dilatation of the final extension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilatationSample {
    pub re: f64,
    pub im: f64,
    pub t: f64,
    pub abs_mu: f64,
    pub corrected: bool,
}

/// Radii `e^t` of the dilatation sweep: 3/8 of them inside `(0, t1)`, the rest on
/// `[t1 + 0.1, t1 + tspan]`, all away from the seam at `t1`.
pub fn dilatation_times<T: Real>(c: &Construction<T>) -> Vec<T> {
    let total = c.params.dilatation_radii;
    let inner = (total * 3 / 8).max(1);
    let outer = total - inner;
    let t1 = c.state.t1;
    let mut ts: Vec<T> = (0..inner)
        .map(|i| t1 * T::from_usize_lossy(i + 1) / T::from_usize_lossy(inner + 1))
        .collect();
    let (lo, hi) = (t1 + T::lit(0.1), t1 + T::lit(c.params.tspan));
    for i in 0..outer {
        let frac = if outer == 1 { T::zero() } else { T::from_usize_lossy(i) / T::from_usize_lossy(outer - 1) };
        ts.push(lo + (hi - lo) * frac);
    }
    ts
}

/// Sampled `|mu|` of the final extension on the dilatation grid.
pub fn final_dilatation_sweep<T: Real>(ext: &FinalExtension<'_, T>) -> Result<Vec<DilatationSample>> {
    let c = ext.construction;
    let h = T::lit(1e-4);
    let ts = dilatation_times(c);
    let mut needed = Vec::with_capacity(3 * ts.len());
    for &t in &ts {
        needed.extend([t - h, t, t + h]);
    }
    ext.prefetch(&needed)?;
    let m = c.params.dilatation_angles;
    let jobs: Vec<(T, T)> = ts
        .iter()
        .flat_map(|&t| {
            (0..m).map(move |j| (t, T::TAU() * (T::from_usize_lossy(j) + T::lit(0.5)) / T::from_usize_lossy(m)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(t, th)| {
            let mu = ext.beltrami_polar(t, th, h)?;
            let z = Cx::from_polar(t.exp(), th);
            Ok(DilatationSample { re: z.re.f64(), im: z.im.f64(), t: t.f64(), abs_mu: mu.norm().f64(), corrected: t >= c.state.t1 })
        })
        .collect()
}

//! Adaptive Dormand-Prince 5(4) integration of complex systems.

use crate::error::{Error, Result};
use crate::scalar::{to_c64, Cx, Real};

/// Step-size controller settings.
#[derive(Clone, Copy, Debug)]
pub struct Dopri5<T: Real> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Dopri5<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Self { rtol, atol, max_steps: 200_000 }
    }
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn comb<T: Real, const N: usize>(y: &[Cx<T>; N], h: T, terms: &[(f64, &[Cx<T>; N])]) -> [Cx<T>; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Cx::new(T::zero(), T::zero());
        for (c, k) in terms {
            if *c != 0.0 {
                acc = acc + k[i] * T::lit(*c);
            }
        }
        *o = *o + acc * h;
    }
    out
}

impl<T: Real> Dopri5<T> {
    /// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
    ///
    /// A right-hand side error inside a trial step shrinks the step; it is only
    /// reported if the step collapses.
    pub fn integrate<const N: usize, F>(&self, mut f: F, t0: T, y0: [Cx<T>; N], t1: T) -> Result<[Cx<T>; N]>
    where
        F: FnMut(T, &[Cx<T>; N]) -> Result<[Cx<T>; N]>,
    {
        let span = t1 - t0;
        if span == T::zero() {
            return Ok(y0);
        }
        let dir = if span > T::zero() { T::one() } else { -T::one() };
        let mut t = t0;
        let mut y = y0;
        let mut h = dir * span.mag().min(T::lit(0.05));
        let mut k1 = f(t, &y)?;
        let mut last_err: Option<Error> = None;
        for _ in 0..self.max_steps {
            let remaining = t1 - t;
            if remaining * dir <= T::zero() {
                return Ok(y);
            }
            if (h * dir) > (remaining * dir) {
                h = remaining;
            }
            let h_floor = T::lit(1e3) * T::eps() * (T::one() + t.mag());
            if h.mag() < h_floor {
                let reason = last_err.map(|e| e.to_string()).unwrap_or_else(|| "step size underflow".into());
                return Err(Error::Integration {
                    t: t.f64(),
                    reason,
                    state: y.iter().map(|c| to_c64(*c)).collect(),
                });
            }
            let stage = |f: &mut F, tt: T, yy: [Cx<T>; N]| f(tt, &yy);
            let trial = (|| -> Result<([Cx<T>; N], [Cx<T>; N], T)> {
                let k2 = stage(&mut f, t + h * T::lit(C2), comb(&y, h, &[(A21, &k1)]))?;
                let k3 = stage(&mut f, t + h * T::lit(C3), comb(&y, h, &[(A31, &k1), (A32, &k2)]))?;
                let k4 = stage(&mut f, t + h * T::lit(C4), comb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
                let k5 = stage(
                    &mut f,
                    t + h * T::lit(C5),
                    comb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                )?;
                let k6 = stage(
                    &mut f,
                    t + h,
                    comb(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
                )?;
                let y_new = comb(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
                let k7 = stage(&mut f, t + h, y_new)?;
                let zero = [Cx::new(T::zero(), T::zero()); N];
                let err_vec = comb(&zero, h, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
                let mut err = T::zero();
                for i in 0..N {
                    let scale = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                    err = err.max(err_vec[i].norm() / scale);
                }
                Ok((y_new, k7, err))
            })();
            match trial {
                Ok((y_new, k7, err)) if err.is_finite() && err <= T::one() => {
                    t = if (t1 - (t + h)) * dir <= T::zero() { t1 } else { t + h };
                    y = y_new;
                    k1 = k7;
                    let fac = if err == T::zero() {
                        T::lit(5.0)
                    } else {
                        (T::lit(0.9) * err.powf(T::lit(-0.2))).min(T::lit(5.0)).max(T::lit(0.2))
                    };
                    h = h * fac;
                    last_err = None;
                }
                Ok((_, _, err)) => {
                    let fac = if err.is_finite() {
                        (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.1))
                    } else {
                        T::lit(0.25)
                    };
                    h = h * fac.min(T::lit(0.9));
                }
                Err(e) => {
                    last_err = Some(e);
                    h = h * T::lit(0.25);
                }
            }
        }
        Err(Error::Integration {
            t: t.f64(),
            reason: format!("more than {} steps", self.max_steps),
            state: y.iter().map(|c| to_c64(*c)).collect(),
        })
    }
}

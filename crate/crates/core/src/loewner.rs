//! Herglotz vector fields, the Loewner-Kufarev equation and Loewner chains.
//!
//! Conventions: a field `p(z, t)` is holomorphic in `z` on the unit disk with
//! `Re p > 0`; the transition maps solve `dw/dt = -w p(w, t)`; the chain is
//! `f_s(z) = lim_{t -> oo} w(z; s, t) / w'(0; 0, t)` and satisfies
//! `d f_t / dt = z f_t'(z) p(z, t)`.

use crate::analytic::SchlichtFunction;
use crate::error::{Error, Result};
use crate::ode::Dopri5;
use crate::scalar::{to_c64, Cx, Real};

/// Herglotz vector field on the unit disk.
pub trait HerglotzField<T: Real>: Sync {
    fn eval(&self, z: Cx<T>, t: T) -> Result<Cx<T>>;

    /// Whether `p(0, t) = 1` for all `t`.
    fn normalized(&self) -> bool {
        true
    }
}

/// Herglotz field given by a closure.
#[derive(Clone, Copy)]
pub struct FieldFn<F> {
    f: F,
    normalized: bool,
}

impl<F> FieldFn<F> {
    pub fn new(f: F) -> Self {
        Self { f, normalized: true }
    }

    pub fn unnormalized(f: F) -> Self {
        Self { f, normalized: false }
    }
}

impl<T: Real, F: Fn(Cx<T>, T) -> Cx<T> + Sync> HerglotzField<T> for FieldFn<F> {
    fn eval(&self, z: Cx<T>, t: T) -> Result<Cx<T>> {
        Ok((self.f)(z, t))
    }

    fn normalized(&self) -> bool {
        self.normalized
    }
}

/// `p = 1`, generating `f_t(z) = e^t z`.
pub fn unit_field<T: Real>() -> FieldFn<fn(Cx<T>, T) -> Cx<T>> {
    FieldFn::new(|_, _| Cx::new(T::one(), T::zero()))
}

/// `p(w) = (1 - w) / (1 + w)`, generating the Koebe chain `e^t z / (1 - z)^2`.
pub fn koebe_field<T: Real>() -> FieldFn<fn(Cx<T>, T) -> Cx<T>> {
    FieldFn::new(|w, _| {
        let one = Cx::new(T::one(), T::zero());
        (one - w) / (one + w)
    })
}

/// Options for computing chain values as limits of transition maps.
#[derive(Clone, Copy, Debug)]
pub struct ChainOptions<T: Real> {
    /// Integration starts checking convergence at `s + warmup`.
    pub warmup: T,
    /// Successive limit estimates one time unit apart must differ by less than this.
    pub cauchy: T,
    /// Give up after integrating to `s + horizon`.
    pub horizon: T,
    pub rtol: T,
    pub atol: T,
}

impl<T: Real> Default for ChainOptions<T> {
    fn default() -> Self {
        Self {
            warmup: T::lit(8.0),
            cauchy: T::lit(1e-8),
            horizon: T::lit(80.0),
            rtol: T::lit(1e-12),
            atol: T::lit(1e-14),
        }
    }
}

fn check_disk<T: Real>(z: Cx<T>) -> Result<()> {
    if z.norm() < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("|z| = {} is not inside the unit disk", z.norm().f64())))
    }
}

/// Transition map `w(z; s, t)` of the Loewner-Kufarev equation, `s <= t`.
pub fn solve_lk_ode<T: Real, P: HerglotzField<T> + ?Sized>(p: &P, z: Cx<T>, s: T, t: T, tol: T) -> Result<Cx<T>> {
    check_disk(z)?;
    if t < s {
        return Err(Error::Argument(format!("need s <= t, got s = {}, t = {}", s.f64(), t.f64())));
    }
    let solver = Dopri5::new(tol * T::lit(0.1), tol * T::lit(0.01));
    let [w] = solver.integrate(|tau, y: &[Cx<T>; 1]| Ok([-y[0] * p.eval(y[0], tau)?]), s, [z], t)?;
    Ok(w)
}

/// Chain value `f_s(z)` from the field, computed as the limit of normalized
/// transition maps. Integration is done in logarithmic form, so the limit is
/// taken of `log w(z; s, t) + int_0^t p(0, tau) dtau`.
pub fn chain_from_herglotz<T: Real, P: HerglotzField<T> + ?Sized>(
    p: &P,
    s: T,
    z: Cx<T>,
    opts: &ChainOptions<T>,
) -> Result<Cx<T>> {
    check_disk(z)?;
    let zero = Cx::new(T::zero(), T::zero());
    if z == zero {
        return Ok(zero);
    }
    let solver = Dopri5::new(opts.rtol, opts.atol);
    let origin_integral = if p.normalized() {
        Cx::new(s, T::zero())
    } else {
        let [acc] = solver.integrate(|tau, _y: &[Cx<T>; 1]| Ok([p.eval(zero, tau)?]), T::zero(), [zero], s)?;
        acc
    };
    // State: [Y, S] with S(t) = int_0^t p(0), Y(t) = log w(t) + S(t).
    let rhs = |tau: T, y: &[Cx<T>; 2]| -> Result<[Cx<T>; 2]> {
        let w = (y[0] - y[1]).exp();
        let p0 = p.eval(zero, tau)?;
        Ok([p0 - p.eval(w, tau)?, p0])
    };
    let mut state = [z.ln() + origin_integral, origin_integral];
    let mut t = s;
    let warm_end = s + opts.warmup;
    state = solver.integrate(rhs, t, state, warm_end)?;
    t = warm_end;
    let mut prev = state[0].exp();
    let mut diffs = Vec::new();
    while t < s + opts.horizon {
        let next_t = t + T::one();
        state = solver.integrate(rhs, t, state, next_t)?;
        t = next_t;
        let cur = state[0].exp();
        let d = (cur - prev).norm();
        diffs.push(d.f64());
        if d < opts.cauchy {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Horizon { t_max: t.f64(), diffs })
}

/// Holomorphic derivative from the four-point stencil `sum_k i^{-k} f(z + h i^k) / (4h)`,
/// retrying with smaller steps when an evaluation fails.
pub fn holomorphic_derivative<T: Real>(f: impl Fn(Cx<T>) -> Result<Cx<T>>, z: Cx<T>, h: T) -> Result<Cx<T>> {
    let mut h = h;
    let mut last = None;
    for _ in 0..6 {
        let dirs = [
            Cx::new(T::one(), T::zero()),
            Cx::new(T::zero(), T::one()),
            Cx::new(-T::one(), T::zero()),
            Cx::new(T::zero(), -T::one()),
        ];
        let mut acc = Cx::new(T::zero(), T::zero());
        let mut failed = false;
        for d in dirs {
            match f(z + d * h) {
                Ok(v) => acc = acc + v * d.conj(),
                Err(e) => {
                    last = Some(e);
                    failed = true;
                    break;
                }
            }
        }
        if !failed {
            return Ok(acc / (h * T::lit(4.0)));
        }
        h = h * T::lit(0.25);
    }
    Err(last.unwrap_or(Error::StepUnderflow { z: to_c64(z) }))
}

/// A Loewner chain `(f_t)`.
pub trait LoewnerChain<T: Real>: Sync {
    fn value(&self, z: Cx<T>, t: T) -> Result<Cx<T>>;

    /// `f_t'(z)`.
    fn derivative(&self, z: Cx<T>, t: T) -> Result<Cx<T>> {
        holomorphic_derivative(|w| self.value(w, t), z, T::lit(1e-3))
    }
}

/// Chain generated by a Herglotz field.
pub struct HerglotzChain<P, T: Real> {
    pub field: P,
    pub options: ChainOptions<T>,
}

impl<T: Real, P: HerglotzField<T>> HerglotzChain<P, T> {
    pub fn new(field: P) -> Self {
        Self { field, options: ChainOptions::default() }
    }
}

impl<T: Real, P: HerglotzField<T>> LoewnerChain<T> for HerglotzChain<P, T> {
    fn value(&self, z: Cx<T>, t: T) -> Result<Cx<T>> {
        chain_from_herglotz(&self.field, t, z, &self.options)
    }
}

/// Closed-form chain `f_t(z) = e^t z`, defined on the closed disk.
#[derive(Clone, Copy, Debug, Default)]
pub struct RadialChain;

impl<T: Real> LoewnerChain<T> for RadialChain {
    fn value(&self, z: Cx<T>, t: T) -> Result<Cx<T>> {
        if z.norm() > T::one() {
            return Err(Error::Domain("radial chain evaluated outside the closed disk".into()));
        }
        Ok(z * t.exp())
    }

    fn derivative(&self, _z: Cx<T>, t: T) -> Result<Cx<T>> {
        Ok(Cx::new(t.exp(), T::zero()))
    }
}

/// Chain of the Ahlfors-Weill extension:
/// `f_t(z) = f(e^{-t} z) + (e^t - e^{-t}) z f'(e^{-t} z) / (1 - (e^t - e^{-t}) z P_f(e^{-t} z) / 2)`.
#[derive(Clone, Debug)]
pub struct AwChain<T: Real> {
    pub f: SchlichtFunction<T>,
}

impl<T: Real> AwChain<T> {
    pub fn new(f: SchlichtFunction<T>) -> Self {
        Self { f }
    }
}

impl<T: Real> LoewnerChain<T> for AwChain<T> {
    fn value(&self, z: Cx<T>, t: T) -> Result<Cx<T>> {
        let e = (-t).exp();
        let jet = self.f.jet(z * e)?;
        let s = t.exp() - e;
        let p = jet[2] / jet[1];
        let one = Cx::new(T::one(), T::zero());
        let den = one - z * p * (s * T::lit(0.5));
        if den.norm() <= T::eps() {
            return Err(Error::Singularity { z: to_c64(z), what: "Ahlfors-Weill chain denominator".into() });
        }
        Ok(jet[0] + z * jet[1] * s / den)
    }
}

/// Herglotz function of the Ahlfors-Weill chain, from
/// `(1 - p) / (1 + p) = z^2 (1 - e^{-2t})^2 S_f(e^{-t} z) / 2`.
pub fn aw_herglotz<T: Real>(f: &SchlichtFunction<T>, z: Cx<T>, t: T) -> Result<Cx<T>> {
    if t < T::zero() {
        return Err(Error::Domain("Ahlfors-Weill field needs t >= 0".into()));
    }
    let e = (-t).exp();
    let s = f.schwarzian(z * e)?;
    let damp = T::one() - e * e;
    let x = z * z * s * (damp * damp * T::lit(0.5));
    let one = Cx::new(T::one(), T::zero());
    if (one + x).norm() <= T::eps() {
        return Err(Error::Singularity { z: to_c64(z), what: "Ahlfors-Weill Herglotz pole".into() });
    }
    Ok((one - x) / (one + x))
}

/// [`aw_herglotz`] as a field.
#[derive(Clone, Debug)]
pub struct AwField<T: Real> {
    pub f: SchlichtFunction<T>,
}

impl<T: Real> HerglotzField<T> for AwField<T> {
    fn eval(&self, z: Cx<T>, t: T) -> Result<Cx<T>> {
        aw_herglotz(&self.f, z, t)
    }
}

/// `|d f_t/dt - z f_t'(z) p(z, t)|` with a central difference of step `h` in `t`.
pub fn pde_residual<T: Real, C: LoewnerChain<T> + ?Sized, P: HerglotzField<T> + ?Sized>(
    chain: &C,
    p: &P,
    z: Cx<T>,
    t: T,
    h: T,
) -> Result<T> {
    if t - h < T::zero() {
        return Err(Error::Domain(format!("central difference needs t >= h, got t = {}", t.f64())));
    }
    let dt = (chain.value(z, t + h)? - chain.value(z, t - h)?) / (h * T::lit(2.0));
    let rhs = z * chain.derivative(z, t)? * p.eval(z, t)?;
    Ok((dt - rhs).norm())
}

//! Truncated Taylor series on the unit disk, their Laurent counterparts on the
//! exterior disk, Schwarzian kernels and sample grids.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{max_of, polar, to_c64, Cx, Real};

/// Default number of Taylor coefficients kept for catalog families.
pub const DEFAULT_TERMS: usize = 64;

/// Largest admissible difference between the truncations at `N` and `2N` terms.
pub const TRUNCATION_TOLERANCE: f64 = 1e-9;

/// Named univalent functions with known Taylor coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Family {
    /// `f(z) = z`.
    Identity,
    /// `f(z) = z / (1 - c z)`, `|c| < 1`.
    Mobius {
        c: f64,
        #[serde(default)]
        c_im: f64,
    },
    /// `f(z) = z + c z^2`, `|c| <= 1/2`.
    Quadratic {
        c: f64,
        #[serde(default)]
        c_im: f64,
    },
    /// `f(z) = z + c z^3`, `|c| <= 1/3`.
    Cubic {
        c: f64,
        #[serde(default)]
        c_im: f64,
    },
    /// `f(z) = z / (1 - z)^2`.
    Koebe,
}

impl Family {
    pub fn quadratic(c: f64) -> Self {
        Family::Quadratic { c, c_im: 0.0 }
    }

    pub fn cubic(c: f64) -> Self {
        Family::Cubic { c, c_im: 0.0 }
    }

    pub fn mobius(c: f64) -> Self {
        Family::Mobius { c, c_im: 0.0 }
    }

    /// Complex family parameter (zero for parameter-free families).
    pub fn parameter(&self) -> Complex64 {
        match *self {
            Family::Mobius { c, c_im } | Family::Quadratic { c, c_im } | Family::Cubic { c, c_im } => {
                Complex64::new(c, c_im)
            }
            Family::Identity | Family::Koebe => Complex64::new(0.0, 0.0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::Mobius { .. } => "mobius",
            Family::Quadratic { .. } => "quadratic",
            Family::Cubic { .. } => "cubic",
            Family::Koebe => "koebe",
        }
    }

    /// Checks the parameter range in which the family is univalent on the disk.
    pub fn validate(&self) -> Result<()> {
        let c = self.parameter().norm();
        let (ok, range) = match self {
            Family::Identity | Family::Koebe => (true, ""),
            Family::Mobius { .. } => (c < 1.0, "|c| < 1"),
            Family::Quadratic { .. } => (c <= 0.5, "|c| <= 1/2"),
            Family::Cubic { .. } => (c <= 1.0 / 3.0, "|c| <= 1/3"),
        };
        if ok && c.is_finite() {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "{} family needs {range}, got |c| = {c}",
                self.name()
            )))
        }
    }

    /// Taylor coefficients `a_1, ..., a_n`.
    pub fn coefficients(&self, n: usize) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let c = self.parameter();
        let mut a = vec![zero; n];
        if n == 0 {
            return a;
        }
        match self {
            Family::Identity => a[0] = one,
            Family::Mobius { .. } => {
                let mut p = one;
                for coef in a.iter_mut() {
                    *coef = p;
                    p *= c;
                }
            }
            Family::Quadratic { .. } => {
                a[0] = one;
                if n > 1 {
                    a[1] = c;
                }
            }
            Family::Cubic { .. } => {
                a[0] = one;
                if n > 2 {
                    a[2] = c;
                }
            }
            Family::Koebe => {
                for (i, coef) in a.iter_mut().enumerate() {
                    *coef = Complex64::new((i + 1) as f64, 0.0);
                }
            }
        }
        a
    }
}

/// Normalized univalent function on the unit disk, stored as the truncated
/// Taylor series `z + a_2 z^2 + ... + a_N z^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchlichtFunction<T: Real> {
    coeffs: Vec<Cx<T>>,
    family: Option<Family>,
}

/// Value and the first three derivatives.
pub type Jet<T> = [Cx<T>; 4];

fn horner_jet<T: Real>(coeffs_from_zero: impl DoubleEndedIterator<Item = Cx<T>>, z: Cx<T>) -> Jet<T> {
    let zero = Cx::new(T::zero(), T::zero());
    let (mut d0, mut d1, mut d2, mut d3) = (zero, zero, zero, zero);
    for c in coeffs_from_zero.rev() {
        d3 = d3 * z + d2;
        d2 = d2 * z + d1;
        d1 = d1 * z + d0;
        d0 = d0 * z + c;
    }
    [d0, d1, d2 * T::lit(2.0), d3 * T::lit(6.0)]
}

impl<T: Real> SchlichtFunction<T> {
    /// Builds a function from `a_1, ..., a_N`; `a_1` must equal 1.
    pub fn new(coeffs: Vec<Cx<T>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Argument("at least one Taylor coefficient is required".into()));
        }
        let one = Cx::new(T::one(), T::zero());
        if coeffs[0] != one {
            return Err(Error::Argument(format!(
                "normalization requires a_1 = 1, got {}",
                to_c64(coeffs[0])
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Argument("non-finite Taylor coefficient".into()));
        }
        Ok(Self { coeffs, family: None })
    }

    /// Catalog function truncated to `n` terms.
    pub fn from_family(family: &Family, n: usize) -> Result<Self> {
        family.validate()?;
        if n < 3 {
            return Err(Error::Argument("need at least three Taylor terms".into()));
        }
        let coeffs = family
            .coefficients(n)
            .into_iter()
            .map(|c| Cx::new(T::lit(c.re), T::lit(c.im)))
            .collect();
        Ok(Self { coeffs, family: Some(family.clone()) })
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    /// Taylor coefficients `a_1..a_N`.
    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    /// Coefficient `a_n` (zero beyond the truncation).
    pub fn a(&self, n: usize) -> Cx<T> {
        if n == 0 || n > self.coeffs.len() {
            Cx::new(T::zero(), T::zero())
        } else {
            self.coeffs[n - 1]
        }
    }

    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    fn check_disk(&self, z: Cx<T>) -> Result<()> {
        let r = z.norm();
        if r < T::one() {
            Ok(())
        } else {
            Err(Error::Domain(format!("|z| = {} is not inside the unit disk", r.f64())))
        }
    }

    /// Value and derivatives up to order three without a domain check.
    pub(crate) fn jet_unchecked(&self, z: Cx<T>) -> Jet<T> {
        let zero = Cx::new(T::zero(), T::zero());
        horner_jet(std::iter::once(zero).chain(self.coeffs.iter().copied()), z)
    }

    /// Value and derivatives up to order three at `|z| < 1`.
    pub fn jet(&self, z: Cx<T>) -> Result<Jet<T>> {
        self.check_disk(z)?;
        Ok(self.jet_unchecked(z))
    }

    /// `f^{(order)}(z)` for `order <= 3`.
    pub fn eval_order(&self, z: Cx<T>, order: usize) -> Result<Cx<T>> {
        if order > 3 {
            return Err(Error::Unsupported(format!("derivative of order {order}")));
        }
        Ok(self.jet(z)?[order])
    }

    /// `f(z)` at `|z| < 1`.
    pub fn eval(&self, z: Cx<T>) -> Result<Cx<T>> {
        self.eval_order(z, 0)
    }

    /// `f'(z)`.
    pub fn derivative(&self, z: Cx<T>) -> Result<Cx<T>> {
        self.eval_order(z, 1)
    }

    /// Pre-Schwarzian `f''/f'`.
    pub fn pre_schwarzian(&self, z: Cx<T>) -> Result<Cx<T>> {
        let j = self.jet(z)?;
        pre_schwarzian_of_jet(&j, z)
    }

    /// Schwarzian `(f''/f')' - (f''/f')^2 / 2`.
    pub fn schwarzian(&self, z: Cx<T>) -> Result<Cx<T>> {
        let j = self.jet(z)?;
        schwarzian_of_jet(&j, z)
    }

    /// Compares the truncation with the catalog function at twice as many terms
    /// on circles up to radius 0.999 and returns the largest gap.
    pub fn certify_truncation(&self) -> Result<T> {
        let Some(family) = &self.family else {
            // A coefficient-defined polynomial is exact.
            return Ok(T::zero());
        };
        let wide = SchlichtFunction::<T>::from_family(family, 2 * self.coeffs.len())?;
        let mut worst = T::zero();
        let mut worst_r = T::zero();
        for &r in &[0.5, 0.9, 0.99, 0.999] {
            let r = T::lit(r);
            for j in 0..64 {
                let theta = T::TAU() * T::from_usize_lossy(j) / T::lit(64.0);
                let z = polar(r, theta);
                let gap = (self.jet_unchecked(z)[0] - wide.jet_unchecked(z)[0]).norm();
                if !(gap <= worst) {
                    worst = gap;
                    worst_r = r;
                }
            }
        }
        if worst.f64() <= TRUNCATION_TOLERANCE {
            Ok(worst)
        } else {
            Err(Error::Truncation { gap: worst.f64(), radius: worst_r.f64() })
        }
    }
}

pub(crate) fn pre_schwarzian_of_jet<T: Real>(j: &Jet<T>, z: Cx<T>) -> Result<Cx<T>> {
    if j[1].norm() <= T::min_positive_value() {
        return Err(Error::Singularity { z: to_c64(z), what: "derivative vanishes".into() });
    }
    Ok(j[2] / j[1])
}

pub(crate) fn schwarzian_of_jet<T: Real>(j: &Jet<T>, z: Cx<T>) -> Result<Cx<T>> {
    let p = pre_schwarzian_of_jet(j, z)?;
    Ok(j[3] / j[1] - p * p * T::lit(1.5))
}

/// Function of class Sigma on the exterior disk, stored as the truncated Laurent
/// series `w + b_0 + b_1 / w + ... + b_M / w^M`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaFunction<T: Real> {
    tail: Vec<Cx<T>>,
}

impl<T: Real> SigmaFunction<T> {
    /// Builds `w + sum_j b_j w^{-j}` from `b_0, ..., b_M`.
    pub fn new(tail: Vec<Cx<T>>) -> Self {
        Self { tail }
    }

    /// Coefficients `b_0..b_M`.
    pub fn tail(&self) -> &[Cx<T>] {
        &self.tail
    }

    /// Value and derivatives up to order three without a domain check.
    pub(crate) fn jet_unchecked(&self, w: Cx<T>) -> Jet<T> {
        let u = w.inv();
        let zero = Cx::new(T::zero(), T::zero());
        let (mut h0, mut h1, mut h2, mut h3) = (zero, zero, zero, zero);
        for (j, &b) in self.tail.iter().enumerate().rev() {
            let jf = T::from_usize_lossy(j);
            h0 = h0 * u + b;
            h1 = h1 * u + b * jf;
            h2 = h2 * u + b * (jf * (jf + T::one()));
            h3 = h3 * u + b * (jf * (jf + T::one()) * (jf + T::lit(2.0)));
        }
        let u2 = u * u;
        let one = Cx::new(T::one(), T::zero());
        [w + h0, one - h1 * u, h2 * u2, -(h3 * u2 * u)]
    }

    /// Value and derivatives up to order three at `|w| > 1`.
    pub fn jet(&self, w: Cx<T>) -> Result<Jet<T>> {
        let r = w.norm();
        if r > T::one() {
            Ok(self.jet_unchecked(w))
        } else {
            Err(Error::Domain(format!("|w| = {} is not outside the unit disk", r.f64())))
        }
    }

    pub fn eval(&self, w: Cx<T>) -> Result<Cx<T>> {
        Ok(self.jet(w)?[0])
    }

    pub fn derivative(&self, w: Cx<T>) -> Result<Cx<T>> {
        Ok(self.jet(w)?[1])
    }

    pub fn pre_schwarzian(&self, w: Cx<T>) -> Result<Cx<T>> {
        pre_schwarzian_of_jet(&self.jet(w)?, w)
    }

    pub fn schwarzian(&self, w: Cx<T>) -> Result<Cx<T>> {
        schwarzian_of_jet(&self.jet(w)?, w)
    }

    /// Taylor coefficients of `1 / g(1/z)` up to `z^n`.
    pub fn to_schlicht_coefficients(&self, n: usize) -> Vec<Cx<T>> {
        // g(1/z) = (1/z) (1 + b_0 z + b_1 z^2 + ...), so 1/g(1/z) = z / D(z).
        let mut d = vec![Cx::new(T::zero(), T::zero()); n];
        if n == 0 {
            return d;
        }
        d[0] = Cx::new(T::one(), T::zero());
        for (i, &b) in self.tail.iter().enumerate() {
            if i + 1 < n {
                d[i + 1] = b;
            }
        }
        series_reciprocal(&d)
    }
}

/// Reciprocal of a power series with unit constant term, to the same length.
fn series_reciprocal<T: Real>(d: &[Cx<T>]) -> Vec<Cx<T>> {
    let n = d.len();
    let mut e = vec![Cx::new(T::zero(), T::zero()); n];
    if n == 0 {
        return e;
    }
    e[0] = Cx::new(T::one(), T::zero());
    for m in 1..n {
        let mut s = Cx::new(T::zero(), T::zero());
        for i in 1..=m {
            s = s + d[i] * e[m - i];
        }
        e[m] = -s;
    }
    e
}

/// Laurent tail of `g_0(w) = 1 / f(1/w)` with `m + 1` coefficients `b_0..b_m`.
pub fn invert_to_sigma<T: Real>(f: &SchlichtFunction<T>, m: usize) -> SigmaFunction<T> {
    // f(1/w) = (1/w)(1 + a_2/w + a_3/w^2 + ...), so g_0(w) = w / (1 + a_2 u + ...).
    let len = m + 2;
    let mut d = vec![Cx::new(T::zero(), T::zero()); len];
    for (i, slot) in d.iter_mut().enumerate() {
        *slot = f.a(i + 1);
    }
    let e = series_reciprocal(&d);
    SigmaFunction::new(e[1..].to_vec())
}

/// Shape of a sample grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum GridKind {
    /// Closed disk `|z| <= outer`, origin included once.
    Disk { outer: f64 },
    /// `inner <= |z| <= outer`.
    Annulus { inner: f64, outer: f64 },
    /// `|z| = radius`.
    Circle { radius: f64 },
}

/// Polar sample grid inside the unit disk.
#[derive(Clone, Debug)]
pub struct DiskGrid<T: Real> {
    pub kind: GridKind,
    pub n_radial: usize,
    pub n_angular: usize,
    points: Vec<Cx<T>>,
}

impl<T: Real> DiskGrid<T> {
    fn build(kind: GridKind, n_radial: usize, n_angular: usize) -> Result<Self> {
        if n_angular == 0 || n_radial == 0 {
            return Err(Error::Argument("grid sizes must be positive".into()));
        }
        let (inner, outer) = match kind {
            GridKind::Disk { outer } => (0.0, outer),
            GridKind::Annulus { inner, outer } => (inner, outer),
            GridKind::Circle { radius } => (radius, radius),
        };
        if !(0.0..1.0).contains(&inner) || !(inner..1.0).contains(&outer) {
            return Err(Error::Argument(format!(
                "grid radii must satisfy 0 <= inner <= outer < 1, got [{inner}, {outer}]"
            )));
        }
        let n_r = if matches!(kind, GridKind::Circle { .. }) { 1 } else { n_radial };
        let mut points = Vec::with_capacity(n_r * n_angular);
        for i in 0..n_r {
            let r = if n_r == 1 {
                outer
            } else {
                inner + (outer - inner) * i as f64 / (n_r - 1) as f64
            };
            if r == 0.0 {
                points.push(Cx::new(T::zero(), T::zero()));
                continue;
            }
            for j in 0..n_angular {
                let theta = std::f64::consts::TAU * j as f64 / n_angular as f64;
                points.push(polar(T::lit(r), T::lit(theta)));
            }
        }
        Ok(Self { kind, n_radial: n_r, n_angular, points })
    }

    pub fn disk(outer: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        Self::build(GridKind::Disk { outer }, n_radial, n_angular)
    }

    pub fn annulus(inner: f64, outer: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        Self::build(GridKind::Annulus { inner, outer }, n_radial, n_angular)
    }

    pub fn circle(radius: f64, n_angular: usize) -> Result<Self> {
        Self::build(GridKind::Circle { radius }, 1, n_angular)
    }

    pub fn points(&self) -> &[Cx<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `sup (1 - |z|^2)^2 |S_f(z)|` over the grid.
pub fn schwarzian_norm<T: Real>(f: &SchlichtFunction<T>, grid: &DiskGrid<T>) -> Result<T> {
    let mut vals = Vec::with_capacity(grid.len());
    for &z in grid.points() {
        let w = T::one() - z.norm_sqr();
        vals.push(w * w * f.schwarzian(z)?.norm());
    }
    Ok(max_of(vals).unwrap_or_else(T::zero))
}

/// `sup (1 - |z|^2) |f''/f'(z)|` over the grid.
pub fn pre_schwarzian_norm<T: Real>(f: &SchlichtFunction<T>, grid: &DiskGrid<T>) -> Result<T> {
    let mut vals = Vec::with_capacity(grid.len());
    for &z in grid.points() {
        vals.push((T::one() - z.norm_sqr()) * f.pre_schwarzian(z)?.norm());
    }
    Ok(max_of(vals).unwrap_or_else(T::zero))
}

/// Sampled estimates of the quasiconformality parameter `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QEstimate<T: Real> {
    /// Schwarzian estimate `sup (1-|z|^2)^2 |S_f| / 6`.
    pub schwarzian: T,
    /// Pre-Schwarzian estimate `sup (1-|z|^2) |P_f| / 6`.
    pub pre_schwarzian: T,
}

impl<T: Real> QEstimate<T> {
    pub fn sample(f: &SchlichtFunction<T>, grid: &DiskGrid<T>) -> Result<Self> {
        let six = T::lit(6.0);
        Ok(Self {
            schwarzian: schwarzian_norm(f, grid)? / six,
            pre_schwarzian: pre_schwarzian_norm(f, grid)? / six,
        })
    }

    /// The value the construction runs at: both sampled necessary conditions hold.
    pub fn certified(&self) -> T {
        self.schwarzian.max(self.pre_schwarzian)
    }
}

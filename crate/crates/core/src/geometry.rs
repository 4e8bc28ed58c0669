//! Closed-polygon utilities: winding numbers, distances, diameters.

use crate::scalar::{Cx, Real};

/// Winding number of the closed polygon around `p` (0 outside a positively oriented Jordan polygon).
pub fn winding_number<T: Real>(poly: &[Cx<T>], p: Cx<T>) -> i32 {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let a = poly[i] - p;
        let b = poly[(i + 1) % n] - p;
        let cross = a.re * b.im - a.im * b.re;
        if a.im <= T::zero() {
            if b.im > T::zero() && cross > T::zero() {
                wn += 1;
            }
        } else if b.im <= T::zero() && cross < T::zero() {
            wn -= 1;
        }
    }
    wn
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance<T: Real>(p: Cx<T>, a: Cx<T>, b: Cx<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == T::zero() {
        return (p - a).norm();
    }
    let s = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let s = s.max(T::zero()).min(T::one());
    (p - (a + ab * s)).norm()
}

/// Distance from `p` to the closed polygon.
pub fn distance_to_polygon<T: Real>(p: Cx<T>, poly: &[Cx<T>]) -> T {
    let n = poly.len();
    let mut best = T::infinity();
    for i in 0..n {
        best = best.min(point_segment_distance(p, poly[i], poly[(i + 1) % n]));
    }
    best
}

/// Hausdorff distance between two closed polygons.
pub fn hausdorff_distance<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> T {
    let one_way = |x: &[Cx<T>], y: &[Cx<T>]| {
        x.iter().map(|&p| distance_to_polygon(p, y)).fold(T::zero(), |m, d| m.max(d))
    };
    one_way(a, b).max(one_way(b, a))
}

/// Largest distance between two vertices.
pub fn diameter<T: Real>(poly: &[Cx<T>]) -> T {
    let mut d = T::zero();
    for i in 0..poly.len() {
        for j in i + 1..poly.len() {
            d = d.max((poly[i] - poly[j]).norm());
        }
    }
    d
}

/// Signed area (positive for counterclockwise polygons).
pub fn signed_area<T: Real>(poly: &[Cx<T>]) -> T {
    let n = poly.len();
    let mut s = T::zero();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s = s + a.re * b.im - a.im * b.re;
    }
    s / T::lit(2.0)
}

/// Area centroid of a simple polygon.
pub fn centroid<T: Real>(poly: &[Cx<T>]) -> Cx<T> {
    let n = poly.len();
    let mut acc = Cx::new(T::zero(), T::zero());
    let mut area2 = T::zero();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let cross = a.re * b.im - a.im * b.re;
        area2 = area2 + cross;
        acc = acc + (a + b) * cross;
    }
    if area2 == T::zero() {
        return poly.iter().fold(acc, |s, &p| s + p) / T::from_usize_lossy(n.max(1));
    }
    acc / (area2 * T::lit(3.0))
}

fn orient<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>) -> T {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

/// Whether two non-adjacent edges of the closed polygon cross.
pub fn self_intersects<T: Real>(poly: &[Cx<T>]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            let o1 = orient(a, b, c);
            let o2 = orient(a, b, d);
            let o3 = orient(c, d, a);
            let o4 = orient(c, d, b);
            if o1 * o2 < T::zero() && o3 * o4 < T::zero() {
                return true;
            }
        }
    }
    false
}

/// Signed curvature `Im(conj(w') w'') / |w'|^3` of a parametrized curve.
pub fn curvature<T: Real>(d1: Cx<T>, d2: Cx<T>) -> T {
    (d1.conj() * d2).im / d1.norm().powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Cx<f64>> {
        vec![Cx::new(0.0, 0.0), Cx::new(1.0, 0.0), Cx::new(1.0, 1.0), Cx::new(0.0, 1.0)]
    }

    #[test]
    fn square_metrics() {
        let s = square();
        assert_eq!(winding_number(&s, Cx::new(0.5, 0.5)), 1);
        assert_eq!(winding_number(&s, Cx::new(1.5, 0.5)), 0);
        assert!((signed_area(&s) - 1.0).abs() < 1e-15);
        assert!((centroid(&s) - Cx::new(0.5, 0.5)).norm() < 1e-15);
        assert!((diameter(&s) - 2f64.sqrt()).abs() < 1e-15);
        assert!((distance_to_polygon(Cx::new(0.5, 2.0), &s) - 1.0).abs() < 1e-15);
        assert!(!self_intersects(&s));
        let bow = vec![Cx::new(0.0, 0.0), Cx::new(1.0, 1.0), Cx::new(1.0, 0.0), Cx::new(0.0, 1.0)];
        assert!(self_intersects(&bow));
        let shifted: Vec<_> = s.iter().map(|p| p + Cx::new(0.25, 0.0)).collect();
        assert!((hausdorff_distance(&s, &shifted) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn circle_curvature() {
        let r = 2.0;
        let th = 0.3f64;
        let d1 = Cx::new(0.0, r) * Cx::from_polar(1.0, th);
        let d2 = -Cx::from_polar(r, th);
        assert!((curvature(d1, d2) - 0.5).abs() < 1e-15);
    }
}

//! Static SVG and CSV emitters.

use std::fmt::Write;

use qcbecker::construction::{DilatationSample, ProfilePoint};

/// Blue-to-red ramp for `s` in `[0, 1]`.
pub fn ramp(s: f64) -> String {
    let s = s.clamp(0.0, 1.0);
    let r = (40.0 + 200.0 * s) as u8;
    let b = (220.0 - 180.0 * s) as u8;
    format!("#{r:02x}30{b:02x}")
}

struct Frame {
    x0: f64,
    y0: f64,
    scale_x: f64,
    scale_y: f64,
    size: f64,
    pad: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone, size: f64, equal: bool) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        let pad = 30.0;
        let inner = size - 2.0 * pad;
        let (mut sx, mut sy) = (inner / (x1 - x0).max(1e-300), inner / (y1 - y0).max(1e-300));
        if equal {
            sx = sx.min(sy);
            sy = sx;
        }
        Self { x0, y0, scale_x: sx, scale_y: sy, size, pad }
    }

    fn x(&self, x: f64) -> f64 {
        self.pad + (x - self.x0) * self.scale_x
    }

    fn y(&self, y: f64) -> f64 {
        self.size - self.pad - (y - self.y0) * self.scale_y
    }
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo.is_finite() && hi.is_finite() && hi > lo {
        (lo, hi)
    } else {
        (lo.min(0.0) - 1.0, hi.max(0.0) + 1.0)
    }
}

fn header(size: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Closed polylines colored by their time, earliest blue.
pub fn curves_svg(curves: &[(f64, Vec<[f64; 2]>)]) -> String {
    let size = 640.0;
    let xs = curves.iter().flat_map(|(_, c)| c.iter().map(|p| p[0]));
    let ys = curves.iter().flat_map(|(_, c)| c.iter().map(|p| p[1]));
    let frame = Frame::new(xs, ys, size, true);
    let (t0, t1) = bounds(curves.iter().map(|(t, _)| *t));
    let mut out = header(size);
    for (t, pts) in curves {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.3},{:.3} ", if i == 0 { "M" } else { "L" }, frame.x(p[0]), frame.y(p[1]));
        }
        d.push('Z');
        let _ = writeln!(
            out,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"><title>t = {t:.4}</title></path>",
            ramp((t - t0) / (t1 - t0))
        );
    }
    let _ = writeln!(out, "<text x=\"10\" y=\"20\" font-size=\"12\">curves for t in [{t0:.3}, {t1:.3}]</text>");
    out.push_str("</svg>\n");
    out
}

/// `k_hat(t)` with both regimes; the Ahlfors-Weill part is drawn in blue.
pub fn profile_svg(profile: &[ProfilePoint], k0: f64) -> String {
    let size = 640.0;
    let frame = Frame::new(profile.iter().map(|p| p.t), profile.iter().map(|p| p.k_hat).chain([0.0, k0]), size, false);
    let mut out = header(size);
    for p in profile {
        let color = if p.corrected { "#c03030" } else { "#3030c0" };
        let _ = writeln!(out, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"{color}\"/>", frame.x(p.t), frame.y(p.k_hat));
    }
    let (x0, x1) = (frame.x(frame.x0), frame.size - frame.pad);
    let y = frame.y(k0);
    let _ = writeln!(out, "<line x1=\"{x0:.3}\" y1=\"{y:.3}\" x2=\"{x1:.3}\" y2=\"{y:.3}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>");
    let _ = writeln!(out, "<text x=\"10\" y=\"20\" font-size=\"12\">k_hat(t); dashed: k0 = {k0:.6}</text>");
    out.push_str("</svg>\n");
    out
}

/// Dilatation samples as colored dots in the plane, on a logarithmic radius.
pub fn dilatation_svg(samples: &[DilatationSample]) -> String {
    let size = 640.0;
    let polar = |s: &DilatationSample| {
        let r = s.t.exp();
        let rho = 1.0 + s.t.max(0.0);
        (s.re / r * rho, s.im / r * rho)
    };
    let frame = Frame::new(samples.iter().map(|s| polar(s).0), samples.iter().map(|s| polar(s).1), size, true);
    let top = samples.iter().map(|s| s.abs_mu).fold(0.0f64, f64::max).max(1e-300);
    let mut out = header(size);
    for s in samples {
        let (x, y) = polar(s);
        let _ = writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"{}\"><title>|mu| = {:.4e}</title></circle>",
            frame.x(x),
            frame.y(y),
            ramp(s.abs_mu / top),
            s.abs_mu
        );
    }
    let _ = writeln!(out, "<text x=\"10\" y=\"20\" font-size=\"12\">|mu| at radius 1 + log|z|; max {top:.4e}</text>");
    out.push_str("</svg>\n");
    out
}

pub fn profile_csv(profile: &[ProfilePoint]) -> String {
    let mut out = String::from("t,regime,k_hat\n");
    for p in profile {
        let _ = writeln!(out, "{:.17e},{},{:.17e}", p.t, if p.corrected { "corrected" } else { "ahlfors_weill" }, p.k_hat);
    }
    out
}

pub fn dilatation_csv(samples: &[DilatationSample]) -> String {
    let mut out = String::from("z_re,z_im,t,regime,abs_mu\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{},{:.17e}",
            s.re,
            s.im,
            s.t,
            if s.corrected { "corrected" } else { "ahlfors_weill" },
            s.abs_mu
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#2830dc");
        assert_eq!(ramp(1.0), "#f03028");
        assert_eq!(ramp(7.0), ramp(1.0));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let c = vec![(1.0, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), (2.0, vec![[0.1, 0.1], [0.5, 0.1], [0.1, 0.5]])];
        let s = curves_svg(&c);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<path").count(), 2);
        let p = [ProfilePoint { t: 0.5, corrected: false, k_hat: 0.1 }, ProfilePoint { t: 1.5, corrected: true, k_hat: 0.4 }];
        assert_eq!(profile_svg(&p, 0.4).matches("<circle").count(), 2);
        assert_eq!(profile_csv(&p).lines().count(), 3);
    }
}

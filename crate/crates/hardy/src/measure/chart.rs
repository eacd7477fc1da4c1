//! Change-of-variable descriptors mapping a bounded reference interval onto
//! the working interval, so every quadrature runs over a bounded domain.

use std::f64::consts::PI;

use super::Interval;

#[derive(Clone, Copy, Debug, PartialEq)]
enum ChartKind {
    /// Bounded interval, t = x.
    Identity,
    /// `(base, +inf)`: x = base + t/(1-t) on t in (0, 1).
    HalfUp { base: f64 },
    /// `(-inf, base)`: x = base - (1-t)/t on t in (0, 1).
    HalfDown { base: f64 },
    /// `(-inf, +inf)`: x = tan(pi t / 2) on t in (-1, 1).
    FullLine,
}

/// Smooth monotone map from the bounded reference coordinates `(t_lo, t_hi)`
/// onto the working interval, together with its derivative and inverse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    kind: ChartKind,
    t_lo: f64,
    t_hi: f64,
}

impl Chart {
    pub(crate) fn for_interval(iv: Interval) -> Chart {
        match (iv.left().is_infinite(), iv.right().is_infinite()) {
            (false, false) => Chart {
                kind: ChartKind::Identity,
                t_lo: iv.left(),
                t_hi: iv.right(),
            },
            (false, true) => Chart { kind: ChartKind::HalfUp { base: iv.left() }, t_lo: 0.0, t_hi: 1.0 },
            (true, false) => {
                Chart { kind: ChartKind::HalfDown { base: iv.right() }, t_lo: 0.0, t_hi: 1.0 }
            }
            (true, true) => Chart { kind: ChartKind::FullLine, t_lo: -1.0, t_hi: 1.0 },
        }
    }

    pub fn t_lo(&self) -> f64 {
        self.t_lo
    }

    pub fn t_hi(&self) -> f64 {
        self.t_hi
    }

    pub fn is_identity(&self) -> bool {
        self.kind == ChartKind::Identity
    }

    /// Reference coordinate to working coordinate.
    pub fn to_x(&self, t: f64) -> f64 {
        match self.kind {
            ChartKind::Identity => t,
            ChartKind::HalfUp { base } => base + t / (1.0 - t),
            ChartKind::HalfDown { base } => base - (1.0 - t) / t,
            ChartKind::FullLine => {
                if t.abs() > 0.5 {
                    // complement form: u = 1 - |t| is exact here, and
                    // tan(pi t/2) = sign(t) cos(pi u/2) / sin(pi u/2) keeps
                    // full relative precision toward the endpoints
                    let u = 1.0 - t.abs();
                    let half = PI * u / 2.0;
                    t.signum() * half.cos() / half.sin()
                } else {
                    (PI * t / 2.0).tan()
                }
            }
        }
    }

    /// Working coordinate to reference coordinate (monotone inverse of `to_x`).
    pub fn to_t(&self, x: f64) -> f64 {
        match self.kind {
            ChartKind::Identity => x,
            ChartKind::HalfUp { base } => {
                let u = x - base;
                u / (1.0 + u)
            }
            ChartKind::HalfDown { base } => 1.0 / (1.0 + (base - x)),
            ChartKind::FullLine => (2.0 / PI) * x.atan(),
        }
    }

    /// dx/dt, strictly positive on the open reference interval.
    pub fn dx_dt(&self, t: f64) -> f64 {
        match self.kind {
            ChartKind::Identity => 1.0,
            ChartKind::HalfUp { .. } => {
                let d = 1.0 - t;
                1.0 / (d * d)
            }
            ChartKind::HalfDown { .. } => 1.0 / (t * t),
            ChartKind::FullLine => {
                if t.abs() > 0.5 {
                    let s = (PI * (1.0 - t.abs()) / 2.0).sin();
                    PI / (2.0 * s * s)
                } else {
                    let c = (PI * t / 2.0).cos();
                    PI / (2.0 * c * c)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_line_up_matches_standard_substitution() {
        let iv = Interval::new(0.0, f64::INFINITY).unwrap();
        let c = Chart::for_interval(iv);
        assert_eq!(c.to_x(0.5), 1.0);
        assert!((c.dx_dt(0.5) - 4.0).abs() < 1e-15); // 1/(1-t)^2
        for t in [0.1, 0.25, 0.5, 0.9, 0.99] {
            let x = c.to_x(t);
            assert!((c.to_t(x) - t).abs() < 1e-12);
        }
    }

    #[test]
    fn full_line_is_scaled_tangent() {
        let iv = Interval::new(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let c = Chart::for_interval(iv);
        assert_eq!(c.to_x(0.0), 0.0);
        assert!((c.to_x(0.5) - 1.0).abs() < 1e-15);
        for x in [-50.0, -1.0, 0.0, 0.3, 7.0, 1e4] {
            let t = c.to_t(x);
            assert!((c.to_x(t) - x).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn half_line_down() {
        let iv = Interval::new(f64::NEG_INFINITY, 0.0).unwrap();
        let c = Chart::for_interval(iv);
        for x in [-1e6, -17.0, -0.1, -1e-8] {
            let t = c.to_t(x);
            assert!(t > 0.0 && t < 1.0);
            assert!((c.to_x(t) - x).abs() <= 1e-9 * x.abs().max(1.0));
        }
        // derivative consistent with finite differences
        let t = 0.37;
        let h = 1e-7;
        let fd = (c.to_x(t + h) - c.to_x(t - h)) / (2.0 * h);
        assert!((c.dx_dt(t) - fd).abs() / fd < 1e-6);
    }

    #[test]
    fn bounded_is_identity() {
        let c = Chart::for_interval(Interval::new(-2.0, 3.0).unwrap());
        assert!(c.is_identity());
        assert_eq!(c.to_x(0.7), 0.7);
        assert_eq!(c.dx_dt(0.7), 1.0);
    }
}

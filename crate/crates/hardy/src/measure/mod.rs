//! Weighted Borel measures on an interval, represented by densities with
//! cached cumulative integrals, the dual measure `nu_hat_p`, and the
//! construction of `(mu, nu, nu_hat)` from elliptic coefficients.
//!
//! Measures here are absolutely continuous by construction; the
//! `absolutely_continuous` flag records the hypothesis (vanishing pure point
//! part) that the upper estimates rely on.

mod chart;
mod table;

pub use chart::Chart;

use std::fmt;
use std::sync::Arc;

use crate::expr::{EvalError, Expression};
use table::{Antiderivative, IntegrandT};

/// An interval `(-M, N)` with possibly infinite endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    left: f64,
    right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self, MeasureError> {
        if left.is_nan() || right.is_nan() || !(left < right) {
            return Err(MeasureError::BadInterval { left, right });
        }
        Ok(Interval { left, right })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn is_bounded(&self) -> bool {
        self.left.is_finite() && self.right.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.left && x < self.right
    }

    /// The mirror image under `x -> -x`.
    pub fn reflected(&self) -> Interval {
        Interval { left: -self.right, right: -self.left }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.left, self.right)
    }
}

/// A cumulative integral: finite, or an explicit divergence flag so that
/// downstream formulas get exact `1/inf = 0` semantics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mass {
    Finite(f64),
    Infinite,
}

impl Mass {
    pub fn is_finite(&self) -> bool {
        matches!(self, Mass::Finite(_))
    }

    /// Collapse to `f64`, mapping the flag to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match self {
            Mass::Finite(v) => *v,
            Mass::Infinite => f64::INFINITY,
        }
    }

    pub(crate) fn add(self, other: Mass) -> Mass {
        match (self, other) {
            (Mass::Finite(a), Mass::Finite(b)) => Mass::Finite(a + b),
            _ => Mass::Infinite,
        }
    }

    pub(crate) fn add_finite(self, d: f64) -> Mass {
        match self {
            Mass::Finite(v) => Mass::Finite(v + d),
            Mass::Infinite => Mass::Infinite,
        }
    }
}

/// Why a density could not be evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityError {
    Expr(EvalError),
    /// The elliptic profile's `C(x)` integral failed.
    Elliptic(Box<MeasureError>),
    NonPositiveDiffusion { x: f64 },
}

impl fmt::Display for DensityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityError::Expr(e) => write!(f, "{}", e),
            DensityError::Elliptic(e) => write!(f, "elliptic profile: {}", e),
            DensityError::NonPositiveDiffusion { x } => {
                write!(f, "diffusion coefficient a(x) <= 0 at x = {}", x)
            }
        }
    }
}

impl std::error::Error for DensityError {}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureError {
    Density(DensityError),
    NegativeDensity { x: f64 },
    NonConvergent { achieved: f64, requested: f64 },
    NonFiniteSample { x: f64 },
    OutsideInterval { x: f64 },
    BadInterval { left: f64, right: f64 },
    BadCumulativeRange { a: f64, b: f64 },
    DualExponentOutOfRange { p: f64 },
    BadScale { c: f64 },
    ThetaOutsideInterval { theta: f64 },
    BoundedTransformRequest,
}

impl fmt::Display for MeasureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureError::Density(e) => write!(f, "density evaluation failed: {}", e),
            MeasureError::NegativeDensity { x } => {
                write!(f, "negative density encountered at x = {}", x)
            }
            MeasureError::NonConvergent { achieved, requested } => write!(
                f,
                "quadrature did not converge: achieved {:.3e}, requested {:.3e}",
                achieved, requested
            ),
            MeasureError::NonFiniteSample { x } => {
                write!(f, "integrand overflowed at x = {}", x)
            }
            MeasureError::OutsideInterval { x } => {
                write!(f, "point {} lies outside the interval closure", x)
            }
            MeasureError::BadInterval { left, right } => {
                write!(f, "invalid interval ({}, {})", left, right)
            }
            MeasureError::BadCumulativeRange { a, b } => {
                write!(f, "cumulative requires a <= b, got ({}, {})", a, b)
            }
            MeasureError::DualExponentOutOfRange { p } => {
                write!(f, "dual measure requires p > 1, got {}", p)
            }
            MeasureError::BadScale { c } => write!(f, "scale factor must be positive, got {}", c),
            MeasureError::ThetaOutsideInterval { theta } => {
                write!(f, "reference point theta = {} must lie inside the interval", theta)
            }
            MeasureError::BoundedTransformRequest => {
                write!(f, "endpoint transform requires at least one infinite endpoint")
            }
        }
    }
}

impl std::error::Error for MeasureError {}

impl From<DensityError> for MeasureError {
    fn from(e: DensityError) -> Self {
        MeasureError::Density(e)
    }
}

/// Which density of the elliptic triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EllipticPart {
    /// `e^{C(x)} / a(x)`
    Mu,
    /// `e^{C(x)}`
    Nu,
    /// `e^{-C(x)}`
    NuHat,
}

/// Density of a weighted measure: a named builtin, an expression, or a
/// wrapper (scaling, dual power, reflection, truncation, elliptic profile).
#[derive(Clone)]
pub enum Density {
    /// Density 1.
    Lebesgue,
    /// `x^alpha` (meaningful on intervals with `x > 0`).
    Power(f64),
    /// `e^{-x^2/2}` (unnormalized Gaussian weight).
    Gauss,
    Expr(Arc<Expression>),
    Scaled(f64, Arc<Density>),
    /// `base(x)^e`; the dual measure uses `e = -1/(p-1)`.
    DualPow(Arc<Density>, f64),
    Reflected(Arc<Density>),
    /// `base` on `[lo, hi]`, zero outside.
    Truncated(Arc<Density>, f64, f64),
    Elliptic(Arc<EllipticProfile>, EllipticPart),
}

impl Density {
    pub fn eval(&self, x: f64) -> Result<f64, DensityError> {
        match self {
            Density::Lebesgue => Ok(1.0),
            Density::Power(alpha) => Ok(x.powf(*alpha)),
            Density::Gauss => Ok((-0.5 * x * x).exp()),
            Density::Expr(e) => e.eval(x).map_err(DensityError::Expr),
            Density::Scaled(c, base) => Ok(c * base.eval(x)?),
            Density::DualPow(base, e) => Ok(base.eval(x)?.powf(*e)),
            Density::Reflected(base) => base.eval(-x),
            Density::Truncated(base, lo, hi) => {
                if x >= *lo && x <= *hi {
                    base.eval(x)
                } else {
                    Ok(0.0)
                }
            }
            Density::Elliptic(profile, part) => profile.density(x, *part),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Density::Lebesgue => "lebesgue".into(),
            Density::Power(a) => format!("power:{}", a),
            Density::Gauss => "gauss".into(),
            Density::Expr(e) => e.to_string(),
            Density::Scaled(c, base) => format!("{} * ({})", c, base.describe()),
            Density::DualPow(base, e) => format!("({})^{}", base.describe(), e),
            Density::Reflected(base) => format!("reflect({})", base.describe()),
            Density::Truncated(base, lo, hi) => {
                format!("({}) restricted to [{}, {}]", base.describe(), lo, hi)
            }
            Density::Elliptic(_, part) => match part {
                EllipticPart::Mu => "exp(C(x))/a(x)".into(),
                EllipticPart::Nu => "exp(C(x))".into(),
                EllipticPart::NuHat => "exp(-C(x))".into(),
            },
        }
    }
}

/// Elliptic coefficients `a` (diffusion, positive) and `b` (drift) with the
/// reference point `theta`, defining `C(x) = int_theta^x b/a`.
#[derive(Clone)]
pub struct EllipticCoefficients {
    pub a: Expression,
    pub b: Expression,
    pub theta: f64,
}

/// Shared evaluator of `C(x)` backed by its own antiderivative table.
pub struct EllipticProfile {
    a: Expression,
    c_table: Antiderivative,
    f_theta: f64,
}

struct RatioIntegrand {
    num: Expression,
    den: Expression,
    chart: Chart,
}

impl IntegrandT for RatioIntegrand {
    fn eval_t(&self, t: f64) -> Result<f64, MeasureError> {
        let x = self.chart.to_x(t);
        let a = self.den.eval(x).map_err(DensityError::Expr)?;
        if a <= 0.0 {
            return Err(MeasureError::Density(DensityError::NonPositiveDiffusion { x }));
        }
        let b = self.b_eval(x)?;
        Ok(b / a * self.chart.dx_dt(t))
    }

    fn nonneg(&self) -> bool {
        false
    }
}

impl RatioIntegrand {
    fn b_eval(&self, x: f64) -> Result<f64, MeasureError> {
        self.num.eval(x).map_err(|e| MeasureError::Density(DensityError::Expr(e)))
    }
}

impl EllipticProfile {
    fn new(coef: &EllipticCoefficients, interval: Interval) -> Result<Arc<Self>, MeasureError> {
        if !interval.contains(coef.theta) {
            return Err(MeasureError::ThetaOutsideInterval { theta: coef.theta });
        }
        let chart = Chart::for_interval(interval);
        let integrand = RatioIntegrand { num: coef.b.clone(), den: coef.a.clone(), chart };
        // denser base grid: C is queried inside every density evaluation
        let c_table = Antiderivative::build(chart, Box::new(integrand), 2048)?;
        let f_theta = c_table.f_at_t(chart.to_t(coef.theta))?;
        Ok(Arc::new(EllipticProfile { a: coef.a.clone(), c_table, f_theta }))
    }

    /// `C(x) = int_theta^x b/a`, from the cached table.
    pub fn c_at(&self, x: f64) -> Result<f64, MeasureError> {
        let t = self.c_table.chart().to_t(x);
        Ok(self.c_table.f_at_t(t)? - self.f_theta)
    }

    fn density(&self, x: f64, part: EllipticPart) -> Result<f64, DensityError> {
        let c = self.c_at(x).map_err(|e| DensityError::Elliptic(Box::new(e)))?;
        match part {
            EllipticPart::Mu => {
                let a = self.a.eval(x).map_err(DensityError::Expr)?;
                if a <= 0.0 {
                    return Err(DensityError::NonPositiveDiffusion { x });
                }
                Ok(c.exp() / a)
            }
            EllipticPart::Nu => Ok(c.exp()),
            EllipticPart::NuHat => Ok((-c).exp()),
        }
    }
}

struct DensityIntegrand {
    density: Density,
    chart: Chart,
}

impl IntegrandT for DensityIntegrand {
    fn eval_t(&self, t: f64) -> Result<f64, MeasureError> {
        let x = self.chart.to_x(t);
        let v = self.density.eval(x)?;
        if v < 0.0 {
            // tolerate rounding noise right below zero
            if v > -1e-12 {
                return Ok(0.0);
            }
            return Err(MeasureError::NegativeDensity { x });
        }
        Ok(v * self.chart.dx_dt(t))
    }

    fn nonneg(&self) -> bool {
        true
    }
}

struct MeasureInner {
    interval: Interval,
    density: Density,
    chart: Chart,
    table: Antiderivative,
}

/// A weighted measure `density(x) dx` on an interval, with cached cumulative
/// integrals. Cheap to clone (the cache is shared); the cache is a
/// thread-safe memo whose values do not depend on query order.
#[derive(Clone)]
pub struct WeightedMeasure {
    inner: Arc<MeasureInner>,
}

/// Base breakpoints of the cumulative cache per measure.
const BASE_CELLS: usize = 512;

impl WeightedMeasure {
    pub fn new(interval: Interval, density: Density) -> Result<Self, MeasureError> {
        let chart = Chart::for_interval(interval);
        let table = Antiderivative::build(
            chart,
            Box::new(DensityIntegrand { density: density.clone(), chart }),
            BASE_CELLS,
        )?;
        Ok(WeightedMeasure {
            inner: Arc::new(MeasureInner { interval, density, chart, table }),
        })
    }

    pub fn interval(&self) -> Interval {
        self.inner.interval
    }

    pub fn density(&self) -> &Density {
        &self.inner.density
    }

    pub fn chart(&self) -> &Chart {
        &self.inner.chart
    }

    /// Always true in this representation: the pure point part vanishes.
    pub fn absolutely_continuous(&self) -> bool {
        true
    }

    pub fn density_at(&self, x: f64) -> Result<f64, DensityError> {
        self.inner.density.eval(x)
    }

    /// `int_a^b density dx` for `a <= b` within the interval closure.
    /// Returns the divergence flag when the integral is infinite.
    pub fn cumulative(&self, a: f64, b: f64) -> Result<Mass, MeasureError> {
        let iv = self.inner.interval;
        if a.is_nan() || b.is_nan() || a > b {
            return Err(MeasureError::BadCumulativeRange { a, b });
        }
        if a < iv.left() {
            return Err(MeasureError::OutsideInterval { x: a });
        }
        if b > iv.right() {
            return Err(MeasureError::OutsideInterval { x: b });
        }
        if a == b {
            return Ok(Mass::Finite(0.0));
        }
        let a_is_left = a <= iv.left();
        let b_is_right = b >= iv.right();
        let t = &self.inner.table;
        match (a_is_left, b_is_right) {
            (true, true) => t.total(),
            (true, false) => t.mass_from_left(self.inner.chart.to_t(b)),
            (false, true) => t.mass_from_right(self.inner.chart.to_t(a)),
            (false, false) => {
                let ta = self.inner.chart.to_t(a);
                let tb = self.inner.chart.to_t(b);
                if tb - ta <= 2.0 * t.base_cell_width() {
                    // short spans directly, to keep small masses accurate
                    Ok(Mass::Finite(t.span(ta, tb)?))
                } else {
                    Ok(Mass::Finite(t.f_at_t(tb)? - t.f_at_t(ta)?))
                }
            }
        }
    }

    pub fn total(&self) -> Result<Mass, MeasureError> {
        self.inner.table.total()
    }

    /// The measure scaled by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<WeightedMeasure, MeasureError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(MeasureError::BadScale { c });
        }
        WeightedMeasure::new(
            self.inner.interval,
            Density::Scaled(c, Arc::new(self.inner.density.clone())),
        )
    }

    /// The mirror image under `x -> -x`.
    pub fn reflected(&self) -> Result<WeightedMeasure, MeasureError> {
        WeightedMeasure::new(
            self.inner.interval.reflected(),
            Density::Reflected(Arc::new(self.inner.density.clone())),
        )
    }

    /// The dual measure with density `v(x)^{-1/(p-1)}`.
    pub fn dual(&self, p: f64) -> Result<WeightedMeasure, MeasureError> {
        dual_measure(self, p)
    }
}

/// Dual measure `nu_hat_p(dx) = (d nu / dx)^{-1/(p-1)} dx` for `p > 1`.
pub fn dual_measure(nu: &WeightedMeasure, p: f64) -> Result<WeightedMeasure, MeasureError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(MeasureError::DualExponentOutOfRange { p });
    }
    let e = -1.0 / (p - 1.0);
    WeightedMeasure::new(
        nu.interval(),
        Density::DualPow(Arc::new(nu.density().clone()), e),
    )
}

/// Builds the measures of the elliptic operator `L = a D^2 + b D`:
/// `mu = e^C/a dx`, `nu = e^C dx`, `nu_hat = e^{-C} dx` with
/// `C(x) = int_theta^x b/a`.
pub fn measures_from_elliptic(
    coef: &EllipticCoefficients,
    interval: Interval,
) -> Result<(WeightedMeasure, WeightedMeasure, WeightedMeasure), MeasureError> {
    let profile = EllipticProfile::new(coef, interval)?;
    let mu = WeightedMeasure::new(interval, Density::Elliptic(profile.clone(), EllipticPart::Mu))?;
    let nu = WeightedMeasure::new(interval, Density::Elliptic(profile.clone(), EllipticPart::Nu))?;
    let nu_hat =
        WeightedMeasure::new(interval, Density::Elliptic(profile, EllipticPart::NuHat))?;
    Ok((mu, nu, nu_hat))
}

/// Change-of-variable descriptor for intervals with an infinite endpoint.
/// Bounded intervals are rejected here per the operation contract; internal
/// callers use [`Chart::for_interval`], whose bounded case is the identity.
pub fn endpoint_transform(interval: Interval) -> Result<Chart, MeasureError> {
    if interval.is_bounded() {
        return Err(MeasureError::BoundedTransformRequest);
    }
    Ok(Chart::for_interval(interval))
}

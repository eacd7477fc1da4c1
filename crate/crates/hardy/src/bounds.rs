//! The isoperimetric constants `B^+`, `B^-`, `B^*`, `B_*`, `kappa`,
//! `kappa_0` and split constants, and their assembly into certified
//! two-sided estimates of the optimal constant `A`.
//!
//! Conventions for the extended arithmetic in the objectives: a mass of 0
//! raised to a negative power is `+inf`, any sum containing `+inf` is
//! `+inf`, and a positive quantity divided by `+inf` is 0. The indeterminate
//! products/ratios (`0 * inf`, `inf / inf`) take the limit value 0, which
//! keeps degenerate cut points out of the suprema. Quantities that merely
//! overflow `f64` (as opposed to genuinely divergent masses) are excluded
//! from suprema the same way.

use std::fmt;
use std::sync::Mutex;

use crate::measure::{Mass, MeasureError, WeightedMeasure};
use crate::measure::{dual_measure, Interval};
use crate::optim;
use crate::special::{k_factor, Exponents, SpecialError};

/// Boundary behaviour of the inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Centering `f - pi(f)` against the normalized `mu`; needs finite `mu`.
    Ergodic,
    /// `f(-M) = 0`.
    DirichletLeft,
    /// `f(N) = 0`.
    DirichletRight,
    /// `f = 0` at both endpoints.
    DirichletBoth,
}

impl BoundaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryKind::Ergodic => "ergodic",
            BoundaryKind::DirichletLeft => "dirichlet-left",
            BoundaryKind::DirichletRight => "dirichlet-right",
            BoundaryKind::DirichletBoth => "dirichlet-both",
        }
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub enum BoundsError {
    Measure(MeasureError),
    Special(SpecialError),
    /// The ergodic case requires a finite total `mu` mass.
    ErgodicNeedsFiniteMu,
    /// `nu_hat` disagrees with the dual of `nu` at a sampled point.
    InconsistentDual { x: f64, stored: f64, recomputed: f64 },
    RequiresLinearExponents { op: &'static str, p: f64, q: f64 },
    ThetaOutsideInterval { theta: f64 },
    /// The two algebraic routes to the same constant disagreed.
    RouteDisagreement { op: &'static str, a: f64, b: f64 },
    ObjectiveFailure(MeasureError),
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::Measure(e) => write!(f, "{}", e),
            BoundsError::Special(e) => write!(f, "{}", e),
            BoundsError::ErgodicNeedsFiniteMu => {
                write!(f, "the ergodic boundary requires mu to have finite total mass")
            }
            BoundsError::InconsistentDual { x, stored, recomputed } => write!(
                f,
                "nu_hat density {} at x = {} disagrees with the dual of nu ({})",
                stored, x, recomputed
            ),
            BoundsError::RequiresLinearExponents { op, p, q } => {
                write!(f, "{} requires p = q = 2, got p = {}, q = {}", op, p, q)
            }
            BoundsError::ThetaOutsideInterval { theta } => {
                write!(f, "split point theta = {} must lie strictly inside the interval", theta)
            }
            BoundsError::RouteDisagreement { op, a, b } => write!(
                f,
                "{}: optimizer routes disagree beyond tolerance ({} vs {})",
                op, a, b
            ),
            BoundsError::ObjectiveFailure(e) => write!(f, "objective evaluation failed: {}", e),
        }
    }
}

impl std::error::Error for BoundsError {}

impl From<MeasureError> for BoundsError {
    fn from(e: MeasureError) -> Self {
        BoundsError::Measure(e)
    }
}

impl From<SpecialError> for BoundsError {
    fn from(e: SpecialError) -> Self {
        BoundsError::Special(e)
    }
}

/// The full problem statement: interval, the measure pair (with the derived
/// dual), exponents and boundary kind.
#[derive(Clone)]
pub struct HardySetup {
    interval: Interval,
    mu: WeightedMeasure,
    nu: WeightedMeasure,
    nu_hat: WeightedMeasure,
    exponents: Exponents,
    boundary: BoundaryKind,
}

impl HardySetup {
    /// Builds a setup, deriving `nu_hat` from `nu` and `p`.
    pub fn new(
        mu: WeightedMeasure,
        nu: WeightedMeasure,
        exponents: Exponents,
        boundary: BoundaryKind,
    ) -> Result<Self, BoundsError> {
        let nu_hat = dual_measure(&nu, exponents.p())?;
        Self::assemble(mu, nu, nu_hat, exponents, boundary, false)
    }

    /// Builds a setup from an explicitly provided `nu_hat`; the density is
    /// cross-checked pointwise against the dual of `nu`.
    pub fn with_dual(
        mu: WeightedMeasure,
        nu: WeightedMeasure,
        nu_hat: WeightedMeasure,
        exponents: Exponents,
        boundary: BoundaryKind,
    ) -> Result<Self, BoundsError> {
        Self::assemble(mu, nu, nu_hat, exponents, boundary, true)
    }

    fn assemble(
        mu: WeightedMeasure,
        nu: WeightedMeasure,
        nu_hat: WeightedMeasure,
        exponents: Exponents,
        boundary: BoundaryKind,
        check_dual: bool,
    ) -> Result<Self, BoundsError> {
        let interval = mu.interval();
        if boundary == BoundaryKind::Ergodic && !mu.total()?.is_finite() {
            return Err(BoundsError::ErgodicNeedsFiniteMu);
        }
        if check_dual {
            let e = -1.0 / (exponents.p() - 1.0);
            let w = interval;
            let chart = nu.chart();
            for k in 1..8 {
                let t = chart.t_lo() + (chart.t_hi() - chart.t_lo()) * k as f64 / 8.0;
                let x = chart.to_x(t);
                if !w.contains(x) {
                    continue;
                }
                let stored = nu_hat.density_at(x).map_err(MeasureError::from)?;
                let recomputed = nu.density_at(x).map_err(MeasureError::from)?.powf(e);
                if !stored.is_finite() || !recomputed.is_finite() {
                    continue;
                }
                let scale = stored.abs().max(recomputed.abs()).max(1e-300);
                if (stored - recomputed).abs() > 1e-9 * scale {
                    return Err(BoundsError::InconsistentDual { x, stored, recomputed });
                }
            }
        }
        Ok(HardySetup { interval, mu, nu, nu_hat, exponents, boundary })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn mu(&self) -> &WeightedMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &WeightedMeasure {
        &self.nu
    }

    pub fn nu_hat(&self) -> &WeightedMeasure {
        &self.nu_hat
    }

    pub fn exponents(&self) -> &Exponents {
        &self.exponents
    }

    pub fn boundary(&self) -> BoundaryKind {
        self.boundary
    }

    /// The mirror image under `x -> -x`, with the boundary side swapped.
    pub fn reflected(&self) -> Result<HardySetup, BoundsError> {
        let boundary = match self.boundary {
            BoundaryKind::DirichletLeft => BoundaryKind::DirichletRight,
            BoundaryKind::DirichletRight => BoundaryKind::DirichletLeft,
            b => b,
        };
        Ok(HardySetup {
            interval: self.interval.reflected(),
            mu: self.mu.reflected()?,
            nu: self.nu.reflected()?,
            nu_hat: self.nu_hat.reflected()?,
            exponents: self.exponents,
            boundary,
        })
    }

    /// The setup with `mu` replaced by `c * mu`.
    pub fn with_scaled_mu(&self, c: f64) -> Result<HardySetup, BoundsError> {
        Ok(HardySetup { mu: self.mu.scaled(c)?, ..self.clone() })
    }

    /// The setup with `nu` replaced by `c * nu` (and `nu_hat` re-derived).
    pub fn with_scaled_nu(&self, c: f64) -> Result<HardySetup, BoundsError> {
        let nu = self.nu.scaled(c)?;
        let nu_hat = dual_measure(&nu, self.exponents.p())?;
        Ok(HardySetup { nu, nu_hat, ..self.clone() })
    }
}

/// A one-point supremum: value and maximizer.
#[derive(Clone, Copy, Debug)]
pub struct Sup1 {
    pub value: f64,
    pub at: f64,
}

/// A two-point supremum over cut points `x <= y`.
#[derive(Clone, Copy, Debug)]
pub struct Sup2 {
    pub value: f64,
    pub at: (f64, f64),
}

/// Every isoperimetric constant computed for a setup, plus the assembled
/// two-sided estimate of `A` for its boundary kind.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub boundary: BoundaryKind,
    pub p: f64,
    pub q: f64,
    pub b_plus: Option<Sup1>,
    pub b_minus: Option<Sup1>,
    pub b_star: Option<Sup2>,
    pub b_substar: Option<Sup2>,
    pub kappa: Option<f64>,
    pub kappa0: Option<f64>,
    /// Certified lower estimate of `A`, when a theorem provides one.
    pub lower: Option<f64>,
    /// Certified upper estimate of `A`, when the hypotheses hold.
    pub upper: Option<f64>,
    /// Why no upper (or lower) estimate is emitted, when one is absent.
    pub gap_note: Option<String>,
    /// The factor relating lower and upper (`k_{q,p}`, `k_{2,p}`, or 2).
    pub factor: Option<f64>,
    /// Set when refinement seeds disagreed (possible multimodality); the
    /// reported value is still the best found.
    pub non_concave_flag: bool,
}

/// Margin keeping the optimizer off the endpoints, relative to the width of
/// the transformed domain.
const ENDPOINT_MARGIN: f64 = 1e-12;
const GRID_1D: usize = 257;
const GRID_2D: usize = 129;
const REFINE_TOL: f64 = 1e-10;
/// Seed values farther apart than this (relatively) raise the flag.
const SEED_AGREEMENT: f64 = 1e-8;

fn ext_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn ext_div(num: f64, den: f64) -> f64 {
    if num == 0.0 || (num.is_infinite() && den.is_infinite()) {
        0.0
    } else {
        num / den
    }
}

/// Mass to extended value for the objectives. A flagged-divergent mass is a
/// genuine `+inf`; a finite mass that overflowed `f64` is not usable and is
/// mapped to NaN so the optimizer excludes the point.
fn mass_ext(m: Mass) -> f64 {
    match m {
        Mass::Infinite => f64::INFINITY,
        Mass::Finite(v) if v.is_finite() => v,
        Mass::Finite(_) => f64::NAN,
    }
}

/// Shared error slot for objective closures running under the optimizer.
struct ErrSlot(Mutex<Option<MeasureError>>);

impl ErrSlot {
    fn new() -> Self {
        ErrSlot(Mutex::new(None))
    }

    /// Evaluates a mass query, converting hard failures into NaN (excluded
    /// from the supremum) while recording the first genuine error.
    fn mass(&self, r: Result<Mass, MeasureError>) -> f64 {
        match r {
            Ok(m) => mass_ext(m),
            Err(MeasureError::NonFiniteSample { .. }) => f64::NAN,
            Err(e) => {
                let mut g = self.0.lock().unwrap();
                if g.is_none() {
                    *g = Some(e);
                }
                f64::NAN
            }
        }
    }

    fn take(&self) -> Option<MeasureError> {
        self.0.lock().unwrap().take()
    }
}

struct Domain {
    lo: f64,
    hi: f64,
}

fn search_domain(m: &WeightedMeasure) -> Domain {
    let chart = m.chart();
    let w = chart.t_hi() - chart.t_lo();
    Domain { lo: chart.t_lo() + ENDPOINT_MARGIN * w, hi: chart.t_hi() - ENDPOINT_MARGIN * w }
}

/// `B^+ = sup_y nu_hat(-M, y]^{1/p*} mu(y, N)^{1/q}` with its maximizer
/// (the one-sided constant for the left-Dirichlet condition `f(-M) = 0`).
pub fn b_plus(s: &HardySetup) -> Result<Sup1, BoundsError> {
    b_plus_impl(s).map(|(sup, _)| sup)
}

fn b_plus_impl(s: &HardySetup) -> Result<(Sup1, bool), BoundsError> {
    let iv = s.interval();
    let (ps, q) = (s.exponents().p_star(), s.exponents().q());
    let dom = search_domain(s.mu());
    let chart = *s.mu().chart();
    let errs = ErrSlot::new();
    let f = |t: f64| -> f64 {
        let y = chart.to_x(t);
        let nv = errs.mass(s.nu_hat().cumulative(iv.left(), y));
        let mt = errs.mass(s.mu().cumulative(y, iv.right()));
        ext_mul(nv.powf(1.0 / ps), mt.powf(1.0 / q))
    };
    let r = optim::grid_golden_max(&f, dom.lo, dom.hi, GRID_1D, REFINE_TOL);
    if let Some(e) = errs.take() {
        return Err(BoundsError::ObjectiveFailure(e));
    }
    let flag = r.value.is_finite() && r.seed_spread > SEED_AGREEMENT * r.value.abs().max(1e-300);
    Ok((Sup1 { value: r.value.max(0.0), at: chart.to_x(r.t) }, flag))
}

/// `B^- = sup_x nu_hat(x, N)^{1/p*} mu(-M, x)^{1/q}`, the mirror of [`b_plus`]
/// under reflection; computed exactly through that reflection.
pub fn b_minus(s: &HardySetup) -> Result<Sup1, BoundsError> {
    b_minus_impl(s).map(|(sup, _)| sup)
}

fn b_minus_impl(s: &HardySetup) -> Result<(Sup1, bool), BoundsError> {
    let reflected = s.reflected()?;
    let (sup, flag) = b_plus_impl(&reflected)?;
    Ok((Sup1 { value: sup.value, at: -sup.at }, flag))
}

/// Exponent selection for the two-point suprema. At `q = p` the two
/// formulas coincide; both routes then use identical floating-point
/// expressions so they agree exactly.
struct TwoPointExponents {
    inner: f64,
    outer: f64,
    numerator: f64,
}

fn b_star_exponents(e: &Exponents) -> TwoPointExponents {
    let (p, q) = (e.p(), e.q());
    if p == q {
        b_substar_exponents(e)
    } else {
        TwoPointExponents {
            inner: p / (q * (1.0 - p)),
            outer: (p - 1.0) / p,
            numerator: (p - 1.0) / p,
        }
    }
}

fn b_substar_exponents(e: &Exponents) -> TwoPointExponents {
    let (p, q) = (e.p(), e.q());
    TwoPointExponents {
        inner: 1.0 / (1.0 - q),
        outer: (q - 1.0) / q,
        numerator: (p - 1.0) / p,
    }
}

fn two_point_sup(s: &HardySetup, exps: TwoPointExponents) -> Result<(Sup2, bool), BoundsError> {
    let iv = s.interval();
    let dom = search_domain(s.mu());
    let chart = *s.mu().chart();
    let errs = ErrSlot::new();
    let f = |tx: f64, ty: f64| -> f64 {
        let x = chart.to_x(tx);
        // the transform is monotone, but rounding may fold very close
        // coordinates over each other
        let y = chart.to_x(ty).max(x);
        let v = errs.mass(s.nu_hat().cumulative(x, y));
        let m1 = errs.mass(s.mu().cumulative(iv.left(), x));
        let m2 = errs.mass(s.mu().cumulative(y, iv.right()));
        let den = m1.powf(exps.inner) + m2.powf(exps.inner);
        ext_div(v.powf(exps.numerator), den.powf(exps.outer))
    };
    let r = optim::triangular_max(&f, dom.lo, dom.hi, GRID_2D, REFINE_TOL);
    if let Some(e) = errs.take() {
        return Err(BoundsError::ObjectiveFailure(e));
    }
    let flag = r.value.is_finite() && r.seed_spread > SEED_AGREEMENT * r.value.abs().max(1e-300);
    Ok((
        Sup2 { value: r.value.max(0.0), at: (chart.to_x(r.tx), chart.to_x(r.ty)) },
        flag,
    ))
}

/// `B^* = sup_{x<=y} nu_hat(x,y)^{1/p*} / {mu(-M,x)^{p/(q(1-p))} +
/// mu(y,N)^{p/(q(1-p))}}^{1/p*}`, the two-point constant behind the ergodic
/// upper estimate.
pub fn b_star(s: &HardySetup) -> Result<Sup2, BoundsError> {
    two_point_sup(s, b_star_exponents(s.exponents())).map(|(sup, _)| sup)
}

/// `B_* = sup_{x<=y} nu_hat(x,y)^{1/p*} / {mu(-M,x)^{1/(1-q)} +
/// mu(y,N)^{1/(1-q)}}^{(q-1)/q}`, the ergodic lower estimate.
pub fn b_substar(s: &HardySetup) -> Result<Sup2, BoundsError> {
    two_point_sup(s, b_substar_exponents(s.exponents())).map(|(sup, _)| sup)
}

/// The kappa optimizer shared by `kappa` (roles: `mu`, `nu_hat`) and
/// `kappa0` (roles exchanged): `sup_{x<=y} [ (side(-M,x)^{-1} +
/// side(y,N)^{-1}) / mid(x,y) ]^{-1/2}`.
fn kappa_core(
    side: &WeightedMeasure,
    mid: &WeightedMeasure,
    iv: Interval,
) -> Result<(Sup2, bool), BoundsError> {
    let dom = search_domain(side);
    let chart = *side.chart();
    let errs = ErrSlot::new();
    let f = |tx: f64, ty: f64| -> f64 {
        let x = chart.to_x(tx);
        let y = chart.to_x(ty).max(x);
        let m1 = errs.mass(side.cumulative(iv.left(), x));
        let m2 = errs.mass(side.cumulative(y, iv.right()));
        let v = errs.mass(mid.cumulative(x, y));
        // [ (m1^{-1} + m2^{-1}) * v^{-1} ]^{-1/2}
        ext_div(v, m1.recip() + m2.recip()).sqrt()
    };
    let r = optim::triangular_max(&f, dom.lo, dom.hi, GRID_2D, REFINE_TOL);
    if let Some(e) = errs.take() {
        return Err(BoundsError::ObjectiveFailure(e));
    }
    let flag = r.value.is_finite() && r.seed_spread > SEED_AGREEMENT * r.value.abs().max(1e-300);
    Ok((
        Sup2 { value: r.value.max(0.0), at: (chart.to_x(r.tx), chart.to_x(r.ty)) },
        flag,
    ))
}

/// `kappa` with `kappa^{-2} = inf_{x<y} [mu(-M,x)^{-1} + mu(y,N)^{-1}]
/// nu_hat(x,y)^{-1}`; requires `p = q = 2` and the ergodic boundary. The
/// value is cross-checked against `b_star` specialized to `p = q = 2`.
pub fn kappa(s: &HardySetup) -> Result<f64, BoundsError> {
    let e = s.exponents();
    if !e.is_linear() {
        return Err(BoundsError::RequiresLinearExponents { op: "kappa", p: e.p(), q: e.q() });
    }
    let (sup, _) = kappa_core(s.mu(), s.nu_hat(), s.interval())?;
    let star = b_star(s)?;
    let scale = sup.value.abs().max(star.value.abs()).max(1e-300);
    if sup.value.is_finite()
        && star.value.is_finite()
        && (sup.value - star.value).abs() > 1e-9 * scale
    {
        return Err(BoundsError::RouteDisagreement {
            op: "kappa vs b_star",
            a: sup.value,
            b: star.value,
        });
    }
    Ok(sup.value)
}

/// `kappa_0` for double Dirichlet boundaries: the same optimizer with the
/// roles of `mu` and `nu_hat` exchanged, so the duality identity holds
/// exactly as computed. Requires `p = q = 2`.
pub fn kappa0(s: &HardySetup) -> Result<f64, BoundsError> {
    let e = s.exponents();
    if !e.is_linear() {
        return Err(BoundsError::RequiresLinearExponents { op: "kappa0", p: e.p(), q: e.q() });
    }
    let (sup, _) = kappa_core(s.nu_hat(), s.mu(), s.interval())?;
    Ok(sup.value)
}

/// Split constants at `theta`: `B_theta^- = sup_{x<theta}
/// nu_hat(x,theta)^{1/p*} mu(-M,x)^{1/q}` and `B_theta^+ = sup_{y>theta}
/// nu_hat(theta,y)^{1/p*} mu(y,N)^{1/q}`.
pub fn split_bounds(s: &HardySetup, theta: f64) -> Result<(f64, f64), BoundsError> {
    let iv = s.interval();
    if !iv.contains(theta) {
        return Err(BoundsError::ThetaOutsideInterval { theta });
    }
    let (ps, q) = (s.exponents().p_star(), s.exponents().q());
    let chart = *s.mu().chart();
    let dom = search_domain(s.mu());
    let t_theta = chart.to_t(theta);

    let errs = ErrSlot::new();
    let minus = if t_theta > dom.lo {
        let f = |t: f64| -> f64 {
            let x = chart.to_x(t).min(theta);
            let nv = errs.mass(s.nu_hat().cumulative(x, theta));
            let m = errs.mass(s.mu().cumulative(iv.left(), x));
            ext_mul(nv.powf(1.0 / ps), m.powf(1.0 / q))
        };
        optim::grid_golden_max(&f, dom.lo, t_theta, GRID_1D, REFINE_TOL).value.max(0.0)
    } else {
        0.0
    };
    let plus = if t_theta < dom.hi {
        let f = |t: f64| -> f64 {
            let y = chart.to_x(t).max(theta);
            let nv = errs.mass(s.nu_hat().cumulative(theta, y));
            let m = errs.mass(s.mu().cumulative(y, iv.right()));
            ext_mul(nv.powf(1.0 / ps), m.powf(1.0 / q))
        };
        optim::grid_golden_max(&f, t_theta, dom.hi, GRID_1D, REFINE_TOL).value.max(0.0)
    } else {
        0.0
    };
    if let Some(e) = errs.take() {
        return Err(BoundsError::ObjectiveFailure(e));
    }
    Ok((minus, plus))
}

/// Assembles the certified two-sided estimate for the setup's boundary kind:
///
/// * ergodic, `p = q = 2`: `(kappa, 2 kappa)`;
/// * ergodic, general: lower `B_*`; upper `k_{2,p} B^*` when
///   `1 < p <= 2 <= q` (no certified upper outside that range);
/// * one-sided Dirichlet: lower `B^{+/-}`, upper `k_{q,p} B^{+/-}` when
///   `q >= p`;
/// * double Dirichlet, `p = q = 2`: `(kappa_0, 2 kappa_0)`.
pub fn two_sided(s: &HardySetup) -> Result<BoundsReport, BoundsError> {
    let e = s.exponents();
    let (p, q) = (e.p(), e.q());
    let mut report = BoundsReport {
        boundary: s.boundary(),
        p,
        q,
        b_plus: None,
        b_minus: None,
        b_star: None,
        b_substar: None,
        kappa: None,
        kappa0: None,
        lower: None,
        upper: None,
        gap_note: None,
        factor: None,
        non_concave_flag: false,
    };
    match s.boundary() {
        BoundaryKind::Ergodic => {
            let (star, flag_a) = two_point_sup(s, b_star_exponents(e))?;
            let (substar, flag_b) = two_point_sup(s, b_substar_exponents(e))?;
            report.non_concave_flag = flag_a || flag_b;
            report.b_star = Some(star);
            report.b_substar = Some(substar);
            report.lower = Some(substar.value);
            if e.is_linear() {
                let k = kappa(s)?;
                report.kappa = Some(k);
                report.lower = Some(k);
                report.upper = Some(2.0 * k);
                report.factor = Some(2.0);
            } else if p <= 2.0 && q >= 2.0 {
                // mu is absolutely continuous by representation, so the
                // vanishing-pure-point hypothesis of the upper estimate holds
                let k2p = k_factor(&Exponents::new(p, 2.0).map_err(BoundsError::Special)?)?;
                report.upper = Some(k2p * star.value);
                report.factor = Some(k2p);
            } else {
                report.gap_note = Some(format!(
                    "no certified upper bound from this theorem (requires 1 < p <= 2 <= q, got p = {}, q = {})",
                    p, q
                ));
            }
        }
        BoundaryKind::DirichletLeft | BoundaryKind::DirichletRight => {
            let (sup, flag) = if s.boundary() == BoundaryKind::DirichletLeft {
                let r = b_plus_impl(s)?;
                report.b_plus = Some(r.0);
                r
            } else {
                let r = b_minus_impl(s)?;
                report.b_minus = Some(r.0);
                r
            };
            report.non_concave_flag = flag;
            report.lower = Some(sup.value);
            if e.q_ge_p() {
                let k = k_factor(e)?;
                report.upper = Some(k * sup.value);
                report.factor = Some(k);
            } else {
                report.gap_note = Some(format!(
                    "no certified upper bound from this theorem (requires q >= p, got p = {}, q = {})",
                    p, q
                ));
            }
        }
        BoundaryKind::DirichletBoth => {
            if e.is_linear() {
                let k0 = kappa0(s)?;
                report.kappa0 = Some(k0);
                report.lower = Some(k0);
                report.upper = Some(2.0 * k0);
                report.factor = Some(2.0);
            } else {
                report.gap_note = Some(format!(
                    "double-Dirichlet bounds are implemented only for p = q = 2 (got p = {}, q = {})",
                    p, q
                ));
            }
        }
    }
    if let (Some(lo), Some(hi)) = (report.lower, report.upper) {
        debug_assert!(lo <= hi * (1.0 + 1e-12) || !lo.is_finite());
    }
    Ok(report)
}

#[cfg(test)]
mod tests;

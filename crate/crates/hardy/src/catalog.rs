//! Built-in measures and setups used by the verification suite, the CLI
//! catalog names (`lebesgue`, `power:alpha`, `gauss`) and the tests.

use crate::bounds::{BoundaryKind, BoundsError, HardySetup};
use crate::expr;
use crate::measure::{
    measures_from_elliptic, Density, EllipticCoefficients, Interval, MeasureError,
    WeightedMeasure,
};
use crate::special::Exponents;

/// Parses a CLI density name: `lebesgue`, `power:alpha`, `gauss`, or an
/// arbitrary expression in `x`.
pub fn density_by_name(name: &str) -> Result<Density, String> {
    match name {
        "lebesgue" => Ok(Density::Lebesgue),
        "gauss" => Ok(Density::Gauss),
        _ => {
            if let Some(alpha) = name.strip_prefix("power:") {
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|_| format!("bad exponent in density '{}'", name))?;
                return Ok(Density::Power(alpha));
            }
            expr::parse(name)
                .map(|e| Density::Expr(std::sync::Arc::new(e)))
                .map_err(|e| format!("density '{}' is not a catalog name or expression: {}", name, e))
        }
    }
}

/// How a catalog setup builds its measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogSource {
    Density,
    Elliptic,
}

/// One named test setup.
pub struct CatalogEntry {
    pub name: &'static str,
    pub source: CatalogSource,
    interval: (f64, f64),
    builder: fn(Interval) -> Result<(WeightedMeasure, WeightedMeasure), MeasureError>,
    /// Boundary kinds with a finite optimal constant at `p = q = 2`.
    finite_at: &'static [BoundaryKind],
}

fn build_lebesgue(iv: Interval) -> Result<(WeightedMeasure, WeightedMeasure), MeasureError> {
    let m = WeightedMeasure::new(iv, Density::Lebesgue)?;
    Ok((m.clone(), m))
}

fn build_power_neg_half(iv: Interval) -> Result<(WeightedMeasure, WeightedMeasure), MeasureError> {
    let m = WeightedMeasure::new(iv, Density::Power(-0.5))?;
    Ok((m.clone(), m))
}

fn build_power_one(iv: Interval) -> Result<(WeightedMeasure, WeightedMeasure), MeasureError> {
    let m = WeightedMeasure::new(iv, Density::Power(1.0))?;
    Ok((m.clone(), m))
}

fn build_gauss(iv: Interval) -> Result<(WeightedMeasure, WeightedMeasure), MeasureError> {
    let m = WeightedMeasure::new(iv, Density::Gauss)?;
    Ok((m.clone(), m))
}

fn build_ou(iv: Interval) -> Result<(WeightedMeasure, WeightedMeasure), MeasureError> {
    let coef = EllipticCoefficients {
        a: expr::parse("1").expect("static"),
        b: expr::parse("-x").expect("static"),
        theta: 0.0,
    };
    let (mu, nu, _hat) = measures_from_elliptic(&coef, iv)?;
    Ok((mu, nu))
}

const ALL_FOUR: &[BoundaryKind] = &[
    BoundaryKind::Ergodic,
    BoundaryKind::DirichletLeft,
    BoundaryKind::DirichletRight,
    BoundaryKind::DirichletBoth,
];
/// `x dx` on (0,1): the dual density 1/x makes the left-Dirichlet constant
/// infinite, the other kinds stay finite.
const NO_LEFT: &[BoundaryKind] = &[
    BoundaryKind::Ergodic,
    BoundaryKind::DirichletRight,
    BoundaryKind::DirichletBoth,
];
/// Gaussian weights on the whole line: only the ergodic constant is finite.
const ERGODIC_ONLY: &[BoundaryKind] = &[BoundaryKind::Ergodic];

/// The verification catalog: Lebesgue and power weights on the unit
/// interval, the Gaussian weight on the line, and the same line measures
/// built through the elliptic route (`a = 1`, `b = -x`).
pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "lebesgue",
            source: CatalogSource::Density,
            interval: (0.0, 1.0),
            builder: build_lebesgue,
            finite_at: ALL_FOUR,
        },
        CatalogEntry {
            name: "power:-0.5",
            source: CatalogSource::Density,
            interval: (0.0, 1.0),
            builder: build_power_neg_half,
            finite_at: ALL_FOUR,
        },
        CatalogEntry {
            name: "power:1",
            source: CatalogSource::Density,
            interval: (0.0, 1.0),
            builder: build_power_one,
            finite_at: NO_LEFT,
        },
        CatalogEntry {
            name: "gauss",
            source: CatalogSource::Density,
            interval: (f64::NEG_INFINITY, f64::INFINITY),
            builder: build_gauss,
            finite_at: ERGODIC_ONLY,
        },
        CatalogEntry {
            name: "ou-elliptic",
            source: CatalogSource::Elliptic,
            interval: (f64::NEG_INFINITY, f64::INFINITY),
            builder: build_ou,
            finite_at: ERGODIC_ONLY,
        },
    ]
}

impl CatalogEntry {
    pub fn interval(&self) -> Interval {
        Interval::new(self.interval.0, self.interval.1).expect("static interval")
    }

    pub fn measures(&self) -> Result<(WeightedMeasure, WeightedMeasure), MeasureError> {
        (self.builder)(self.interval())
    }

    /// Whether the optimal constant is finite for this boundary at `p = q = 2`.
    pub fn applicable(&self, boundary: BoundaryKind) -> bool {
        self.finite_at.contains(&boundary)
    }

    pub fn setup(
        &self,
        exponents: Exponents,
        boundary: BoundaryKind,
    ) -> Result<HardySetup, BoundsError> {
        let (mu, nu) = self.measures()?;
        HardySetup::new(mu, nu, exponents, boundary)
    }
}

//! Independent numerical estimation of the optimal constant `A`, used to
//! validate that the reported bounds actually sandwich it.
//!
//! Two routes: a generalized tridiagonal eigensolver for `p = q = 2`
//! (`A^{-2}` is the variational eigenvalue), and variational iterations for
//! general exponents (a two-integral fixed point for the Dirichlet cases,
//! cross-checked by projected-gradient ascent from seeded random starts).

mod linear;
mod nonlinear;

pub use linear::{oracle_linear, oracle_linear_detailed, LinearDetail};
pub use nonlinear::{oracle_ergodic_nonlinear, oracle_nonlinear};

use std::fmt;

use crate::bounds::{BoundaryKind, HardySetup};
use crate::measure::MeasureError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    LinearEig,
    NonlinearIter,
}

/// An independent estimate of `A` with convergence diagnostics.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub a_estimate: f64,
    pub method: OracleMethod,
    pub grid_size: usize,
    pub iterations: usize,
    /// Last relative change (bisection width or iteration movement).
    pub residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub enum OracleError {
    Measure(MeasureError),
    UnsupportedBoundary { op: &'static str, boundary: BoundaryKind },
    RequiresLinearExponents { p: f64, q: f64 },
    GridTooSmall { n: usize },
    /// A mass-matrix entry vanished or overflowed (zero-density cells).
    MassMatrixSingular { node: usize },
    /// A stiffness cell has no `nu` mass.
    DegenerateMeasure { cell: usize },
    /// The measure has no finite total to truncate against.
    InfiniteMass,
    /// Fixed point and gradient ascent disagree beyond `5 * tol`.
    CrossCheckDisagreement { fixed_point: f64, ascent: f64, tol: f64 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Measure(e) => write!(f, "{}", e),
            OracleError::UnsupportedBoundary { op, boundary } => {
                write!(f, "{} does not support the {} boundary", op, boundary)
            }
            OracleError::RequiresLinearExponents { p, q } => {
                write!(f, "the eigensolver oracle requires p = q = 2, got p = {}, q = {}", p, q)
            }
            OracleError::GridTooSmall { n } => write!(f, "grid size {} below the minimum 16", n),
            OracleError::MassMatrixSingular { node } => {
                write!(f, "mass matrix singular at node {}", node)
            }
            OracleError::DegenerateMeasure { cell } => {
                write!(f, "nu carries no mass on cell {}", cell)
            }
            OracleError::InfiniteMass => {
                write!(f, "mesh truncation needs a finite total mu mass")
            }
            OracleError::CrossCheckDisagreement { fixed_point, ascent, tol } => write!(
                f,
                "fixed point ({}) and gradient ascent ({}) disagree beyond 5 * tol = {}",
                fixed_point,
                ascent,
                5.0 * tol
            ),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<MeasureError> for OracleError {
    fn from(e: MeasureError) -> Self {
        OracleError::Measure(e)
    }
}

/// Mass fraction discarded on each infinite side when truncating the mesh.
/// The eigensolver keeps essentially everything; the variational iterations
/// drop a bit more so the near-massless tail cells (where both the stiffness
/// and the mass weights vanish) cannot pollute their search directions.
pub(crate) const TRUNC_LINEAR: f64 = 1e-12;
pub(crate) const TRUNC_VARIATIONAL: f64 = 1e-8;

/// Discretization shared by the oracles: nodes equidistributed in the
/// transformed coordinate (resolving endpoint weight singularities), cell
/// `nu` masses for the stiffness part and lumped nodal `mu` masses.
pub(crate) struct Mesh {
    pub x: Vec<f64>,
    pub dx: Vec<f64>,
    pub nu_cell: Vec<f64>,
    pub mu_node: Vec<f64>,
}

impl Mesh {
    pub(crate) fn n_cells(&self) -> usize {
        self.dx.len()
    }
}

pub(crate) fn build_mesh(s: &HardySetup, n: usize, trunc: f64) -> Result<Mesh, OracleError> {
    if n < 16 {
        return Err(OracleError::GridTooSmall { n });
    }
    let iv = s.interval();
    let chart = *s.mu().chart();
    let mut t_a = chart.t_lo();
    let mut t_b = chart.t_hi();

    // truncate infinite sides at a negligible mu-mass quantile
    if !iv.left().is_finite() || !iv.right().is_finite() {
        let total = match s.mu().total()? {
            crate::measure::Mass::Finite(v) if v.is_finite() && v > 0.0 => v,
            _ => return Err(OracleError::InfiniteMass),
        };
        let target = trunc * total;
        if !iv.left().is_finite() {
            t_a = bisect_monotone(
                |t| {
                    s.mu()
                        .cumulative(iv.left(), chart.to_x(t))
                        .map(|m| m.value())
                },
                chart.t_lo(),
                0.5 * (chart.t_lo() + chart.t_hi()),
                target,
            )?;
        }
        if !iv.right().is_finite() {
            t_b = bisect_monotone(
                |t| {
                    s.mu()
                        .cumulative(chart.to_x(t), iv.right())
                        .map(|m| -m.value())
                },
                0.5 * (chart.t_lo() + chart.t_hi()),
                chart.t_hi(),
                -target,
            )?;
        }
    }

    let nodes_t: Vec<f64> = (0..=n)
        .map(|i| t_a + (t_b - t_a) * i as f64 / n as f64)
        .collect();
    let x: Vec<f64> = nodes_t.iter().map(|&t| chart.to_x(t)).collect();
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();

    let mut nu_cell = Vec::with_capacity(n);
    for i in 0..n {
        let m = s.nu().cumulative(x[i], x[i + 1])?.value();
        if !m.is_finite() {
            return Err(OracleError::DegenerateMeasure { cell: i });
        }
        nu_cell.push(m);
    }
    let mut mu_node = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let lo = if i == 0 { x[0] } else { 0.5 * (x[i - 1] + x[i]) };
        let hi = if i == n { x[n] } else { 0.5 * (x[i] + x[i + 1]) };
        let m = s.mu().cumulative(lo, hi)?.value();
        if !m.is_finite() {
            return Err(OracleError::MassMatrixSingular { node: i });
        }
        mu_node.push(m);
    }
    Ok(Mesh { x, dx, nu_cell, mu_node })
}

/// Bisection for the point where the monotone increasing `f` crosses
/// `target`.
fn bisect_monotone(
    f: impl Fn(f64) -> Result<f64, MeasureError>,
    mut lo: f64,
    mut hi: f64,
    target: f64,
) -> Result<f64, OracleError> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Free-node index range for the boundary kind: Dirichlet conditions clamp
/// the corresponding endpoint nodes.
pub(crate) fn free_range(boundary: BoundaryKind, n_nodes: usize) -> (usize, usize) {
    match boundary {
        BoundaryKind::Ergodic => (0, n_nodes),
        BoundaryKind::DirichletLeft => (1, n_nodes),
        BoundaryKind::DirichletRight => (0, n_nodes - 1),
        BoundaryKind::DirichletBoth => (1, n_nodes - 1),
    }
}

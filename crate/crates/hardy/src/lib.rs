//! Computable two-sided estimates of the optimal constant `A` in weighted
//! Hardy-type inequalities
//!
//! ```text
//! || f - pi(f) ||_{L^q(mu)}  <=  A  || f' ||_{L^p(nu)}
//! ```
//!
//! on an interval `(-M, N)` (endpoints may be infinite), together with the
//! exact constants of the Lebesgue model case, improved upper/lower bounds,
//! and independent numerical oracles (a Sturm-sequence eigensolver and
//! variational iterations) that cross-validate every reported bound.
//!
//! The crate is organised around the objects of the estimates:
//!
//! * [`expr`] — arithmetic expressions used to enter densities and
//!   elliptic coefficients,
//! * [`measure`] — weighted measures with cached cumulative integrals,
//!   the dual measure, and the elliptic construction of `(mu, nu, nu_hat)`,
//! * [`special`] — log-Gamma/Beta and the universal factor `k_{q,p}`,
//! * [`bounds`] — the isoperimetric constants `B^+`, `B^-`, `B^*`, `B_*`,
//!   `kappa`, `kappa_0`, split bounds, and assembled two-sided estimates,
//! * [`exact`] — closed-form constants of the model case and the
//!   improvement chain,
//! * [`oracle`] — independent numerical estimates of `A`,
//! * [`catalog`] — the built-in test measures,
//! * [`verify`] — the cross-module invariant suite behind `hardy verify`.

pub mod bounds;
pub mod catalog;
pub mod exact;
pub mod expr;
pub mod measure;
pub mod oracle;
pub mod special;
pub mod verify;

mod optim;
mod quad;

pub use bounds::{BoundaryKind, BoundsReport, HardySetup};
pub use exact::{Delta1Reading, ImprovementChain};
pub use expr::Expression;
pub use measure::{Density, Interval, Mass, WeightedMeasure};
pub use oracle::OracleResult;
pub use special::Exponents;

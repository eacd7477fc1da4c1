//! Generalized tridiagonal eigensolver for the linear case `p = q = 2`:
//! stiffness from `nu`-weighted difference quotients, diagonal mass from
//! lumped `mu` masses, eigenvalue by Sturm-sequence bisection on the pencil.

use super::{build_mesh, free_range, Mesh, OracleError, OracleMethod, OracleResult};
use crate::bounds::{BoundaryKind, HardySetup};

/// Tridiagonal pencil `(K, M)` on the free nodes.
struct Pencil {
    diag: Vec<f64>,
    off: Vec<f64>,
    mass: Vec<f64>,
}

fn assemble(mesh: &Mesh, boundary: BoundaryKind) -> Result<Pencil, OracleError> {
    let n = mesh.n_cells();
    let w: Vec<f64> = (0..n)
        .map(|i| mesh.nu_cell[i] / (mesh.dx[i] * mesh.dx[i]))
        .collect();
    let (lo, hi) = free_range(boundary, n + 1);
    let m = hi - lo;
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m.saturating_sub(1)];
    let mut mass = vec![0.0; m];
    for (r, i) in (lo..hi).enumerate() {
        let left = if i == 0 { 0.0 } else { w[i - 1] };
        let right = if i == n { 0.0 } else { w[i] };
        diag[r] = left + right;
        mass[r] = mesh.mu_node[i];
        if !(mass[r] > 0.0) || !mass[r].is_finite() {
            return Err(OracleError::MassMatrixSingular { node: i });
        }
        if r + 1 < m {
            off[r] = -w[i];
        }
    }
    Ok(Pencil { diag, off, mass })
}

/// Number of eigenvalues of `(K, M)` strictly below `lambda`, by the
/// Sturm/LDL^T sign count.
fn count_below(p: &Pencil, lambda: f64) -> usize {
    let mut count = 0;
    let mut d_prev = 0.0f64;
    for i in 0..p.diag.len() {
        let mut d = p.diag[i] - lambda * p.mass[i];
        if i > 0 {
            let off = p.off[i - 1];
            d -= off * off / d_prev;
        }
        if d == 0.0 {
            d = -f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
        d_prev = d;
    }
    count
}

/// Solves the tridiagonal system `(K - sigma M) v = rhs` in place (Thomas
/// with a tiny-pivot guard; adequate for inverse iteration).
fn shifted_solve(p: &Pencil, sigma: f64, rhs: &mut [f64]) {
    let n = p.diag.len();
    let mut c = vec![0.0f64; n];
    let mut d = vec![0.0f64; n];
    let tiny = 1e-300;
    let mut denom = p.diag[0] - sigma * p.mass[0];
    if denom.abs() < tiny {
        denom = tiny;
    }
    if n > 1 {
        c[0] = p.off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        let mut den = p.diag[i] - sigma * p.mass[i] - p.off[i - 1] * c[i - 1];
        if den.abs() < tiny {
            den = tiny;
        }
        if i + 1 < n {
            c[i] = p.off[i] / den;
        }
        d[i] = (rhs[i] - p.off[i - 1] * d[i - 1]) / den;
    }
    rhs[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = d[i] - c[i] * rhs[i + 1];
    }
}

/// Everything the eigensolver saw, for consistency checks.
pub struct LinearDetail {
    pub result: OracleResult,
    pub lambda: f64,
    /// Rayleigh quotient of the recovered eigenvector.
    pub rayleigh: f64,
    pub nodes: Vec<f64>,
    pub eigenvector: Vec<f64>,
}

/// Eigenvalue oracle: `A = lambda^{-1/2}` where `lambda` is the variational
/// eigenvalue of the setup's boundary kind (second-smallest for the ergodic
/// case, whose smallest is the zero mode of constants; smallest with the
/// corresponding rows clamped for Dirichlet kinds).
pub fn oracle_linear(s: &HardySetup, n: usize, tol: f64) -> Result<OracleResult, OracleError> {
    oracle_linear_detailed(s, n, tol).map(|d| d.result)
}

pub fn oracle_linear_detailed(
    s: &HardySetup,
    n: usize,
    tol: f64,
) -> Result<LinearDetail, OracleError> {
    let e = s.exponents();
    if !e.is_linear() {
        return Err(OracleError::RequiresLinearExponents { p: e.p(), q: e.q() });
    }
    let mesh = build_mesh(s, n, super::TRUNC_LINEAR)?;
    let pencil = assemble(&mesh, s.boundary())?;
    let target = match s.boundary() {
        BoundaryKind::Ergodic => 2usize,
        _ => 1usize,
    };

    // Gershgorin-style upper bound for the pencil spectrum
    let mut hi = 0.0f64;
    for i in 0..pencil.diag.len() {
        let mut row = pencil.diag[i];
        if i > 0 {
            row += pencil.off[i - 1].abs();
        }
        if i < pencil.off.len() {
            row += pencil.off[i].abs();
        }
        hi = hi.max(row / pencil.mass[i]);
    }
    hi = hi.max(f64::MIN_POSITIVE) * 1.000001;
    let mut lo = 0.0f64;
    while count_below(&pencil, hi) < target {
        hi *= 2.0;
    }
    let mut iterations = 0usize;
    while hi - lo > tol * hi && iterations < 400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(&pencil, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let lambda = 0.5 * (lo + hi);
    let residual = (hi - lo) / lambda.max(f64::MIN_POSITIVE);
    let converged = residual <= tol;

    // inverse iteration for the eigenvector; deflate constants for ergodic
    let m = pencil.diag.len();
    let (free_lo, _) = free_range(s.boundary(), mesh.x.len());
    let mut v: Vec<f64> = (0..m).map(|i| mesh.x[free_lo + i]).collect();
    let ergodic = s.boundary() == BoundaryKind::Ergodic;
    let recenter = |v: &mut Vec<f64>, pencil: &Pencil| {
        if ergodic {
            let tot: f64 = pencil.mass.iter().sum();
            let mean: f64 =
                v.iter().zip(&pencil.mass).map(|(a, b)| a * b).sum::<f64>() / tot;
            for vi in v.iter_mut() {
                *vi -= mean;
            }
        }
    };
    recenter(&mut v, &pencil);
    let sigma = lambda * (1.0 - 1e-7) - 1e-30;
    for _ in 0..4 {
        let mut rhs: Vec<f64> = v.iter().zip(&pencil.mass).map(|(a, b)| a * b).collect();
        shifted_solve(&pencil, sigma, &mut rhs);
        let norm = rhs.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            break;
        }
        for r in rhs.iter_mut() {
            *r /= norm;
        }
        v = rhs;
        recenter(&mut v, &pencil);
    }
    // Rayleigh quotient v^T K v / v^T M v
    let mut num = 0.0f64;
    for i in 0..m {
        num += pencil.diag[i] * v[i] * v[i];
        if i + 1 < m {
            num += 2.0 * pencil.off[i] * v[i] * v[i + 1];
        }
    }
    let den: f64 = v.iter().zip(&pencil.mass).map(|(a, b)| a * a * b).sum();
    let rayleigh = num / den;

    Ok(LinearDetail {
        result: OracleResult {
            a_estimate: lambda.powf(-0.5),
            method: OracleMethod::LinearEig,
            grid_size: n,
            iterations,
            residual,
            converged,
        },
        lambda,
        rayleigh,
        nodes: mesh.x,
        eigenvector: v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Density, Interval, WeightedMeasure};
    use crate::special::Exponents;
    use std::f64::consts::PI;

    fn lebesgue_setup(boundary: BoundaryKind) -> HardySetup {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let m = WeightedMeasure::new(iv, Density::Lebesgue).unwrap();
        HardySetup::new(m.clone(), m, Exponents::new(2.0, 2.0).unwrap(), boundary).unwrap()
    }

    #[test]
    fn lebesgue_ergodic_neumann_eigenvalue() {
        // classical: lambda_1 = pi^2, A = 1/pi, discretization error O(n^-2)
        let s = lebesgue_setup(BoundaryKind::Ergodic);
        let r = oracle_linear(&s, 1024, 1e-12).unwrap();
        assert!(r.converged);
        assert!((r.a_estimate - 1.0 / PI).abs() < 1e-5, "A = {}", r.a_estimate);

        // Richardson refinement: error shrinks by ~4 per doubling
        let errs: Vec<f64> = [256usize, 512, 1024]
            .iter()
            .map(|&n| {
                (oracle_linear(&s, n, 1e-12).unwrap().a_estimate - 1.0 / PI).abs()
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "errors {errs:?}");
        let rate = errs[0] / errs[2];
        assert!(rate > 8.0, "convergence rate {rate} too slow for O(n^-2)");
    }

    #[test]
    fn lebesgue_dirichlet_left_quarter_mode() {
        // mixed condition: lambda = (pi/2)^2, A = 2/pi
        let s = lebesgue_setup(BoundaryKind::DirichletLeft);
        let r = oracle_linear(&s, 2048, 1e-12).unwrap();
        assert!((r.a_estimate - 2.0 / PI).abs() < 1e-5, "A = {}", r.a_estimate);
    }

    #[test]
    fn lebesgue_dirichlet_both() {
        // lambda = pi^2, A = 1/pi; satisfies kappa0 <= A <= 2 kappa0 with kappa0 = 1/4
        let s = lebesgue_setup(BoundaryKind::DirichletBoth);
        let r = oracle_linear(&s, 2048, 1e-12).unwrap();
        assert!((r.a_estimate - 1.0 / PI).abs() < 1e-5);
        assert!(r.a_estimate >= 0.25 && r.a_estimate <= 0.5);
    }

    #[test]
    fn rayleigh_quotient_consistency() {
        // A^{-2} equals the Rayleigh quotient at the recovered eigenvector
        for boundary in [
            BoundaryKind::Ergodic,
            BoundaryKind::DirichletLeft,
            BoundaryKind::DirichletBoth,
        ] {
            let s = lebesgue_setup(boundary);
            let d = oracle_linear_detailed(&s, 512, 1e-13).unwrap();
            assert!(
                (d.rayleigh - d.lambda).abs() <= 1e-8 * d.lambda,
                "{boundary:?}: rayleigh {} vs lambda {}",
                d.rayleigh,
                d.lambda
            );
        }
    }

    #[test]
    fn ornstein_uhlenbeck_gap_is_one() {
        // mu = nu = gaussian weight on the line: lambda_1 = 1, A = 1
        let iv = Interval::new(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let m = WeightedMeasure::new(iv, Density::Gauss).unwrap();
        let s = HardySetup::new(
            m.clone(),
            m,
            Exponents::new(2.0, 2.0).unwrap(),
            BoundaryKind::Ergodic,
        )
        .unwrap();
        let r = oracle_linear(&s, 2048, 1e-12).unwrap();
        assert!((r.a_estimate - 1.0).abs() < 1e-3, "A = {}", r.a_estimate);
    }

    #[test]
    fn rejects_wrong_exponents_and_tiny_grids() {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let m = WeightedMeasure::new(iv, Density::Lebesgue).unwrap();
        let s = HardySetup::new(
            m.clone(),
            m,
            Exponents::new(2.0, 3.0).unwrap(),
            BoundaryKind::Ergodic,
        )
        .unwrap();
        assert!(matches!(
            oracle_linear(&s, 256, 1e-10),
            Err(OracleError::RequiresLinearExponents { .. })
        ));
        let s2 = lebesgue_setup(BoundaryKind::Ergodic);
        assert!(matches!(
            oracle_linear(&s2, 8, 1e-10),
            Err(OracleError::GridTooSmall { .. })
        ));
    }
}

//! Grid-seeded golden-section search for the one- and two-dimensional
//! suprema behind the isoperimetric constants.
//!
//! The objectives are not assumed concave: an exhaustive coarse grid picks
//! the best cells, local golden-section refinement polishes each, and the
//! spread between the refined seeds flags multimodality.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
/// Refinement seeds taken from the best coarse-grid cells.
const SEEDS: usize = 3;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Search1 {
    pub t: f64,
    pub value: f64,
    /// Largest disagreement between the refined seed values.
    pub seed_spread: f64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Search2 {
    pub tx: f64,
    pub ty: f64,
    pub value: f64,
    pub seed_spread: f64,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Golden-section maximization on `[a, b]`; assumes the bracket came from a
/// grid so a local maximum is inside. Returns (t, value).
fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sanitize(f(c));
    let mut fd = sanitize(f(d));
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sanitize(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sanitize(f(d));
        }
        iter += 1;
    }
    let m = 0.5 * (a + b);
    let fm = sanitize(f(m));
    if fm >= fc && fm >= fd {
        (m, fm)
    } else if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Indices of the best `SEEDS` entries, ties resolved toward lower index.
fn top_seeds(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx.truncate(SEEDS);
    idx
}

/// Coarse grid of `grid_n` points on `[lo, hi]` followed by golden-section
/// refinement around the best cells, to `tol` in the coordinate.
pub(crate) fn grid_golden_max(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_n: usize,
    tol: f64,
) -> Search1 {
    debug_assert!(grid_n >= 3 && lo < hi);
    let h = (hi - lo) / (grid_n - 1) as f64;
    let ts: Vec<f64> = (0..grid_n).map(|i| lo + h * i as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| sanitize(f(t))).collect();

    let mut best = Search1 { t: ts[0], value: vals[0], seed_spread: 0.0 };
    let mut refined: Vec<(f64, f64)> = Vec::new();
    for &i in &top_seeds(&vals) {
        let a = if i == 0 { ts[0] } else { ts[i - 1] };
        let b = if i + 1 == grid_n { ts[grid_n - 1] } else { ts[i + 1] };
        refined.push(golden_max(f, a, b, tol));
    }
    let finite: Vec<f64> = refined.iter().map(|r| r.1).filter(|v| v.is_finite()).collect();
    let spread = match (finite.iter().cloned().reduce(f64::max), finite.iter().cloned().reduce(f64::min)) {
        (Some(mx), Some(mn)) if finite.len() > 1 => mx - mn,
        _ => 0.0,
    };
    for (t, v) in refined.into_iter().chain(ts.iter().cloned().zip(vals.iter().cloned())) {
        if near(v, best.value) {
            if t < best.t {
                best = Search1 { t, value: v.max(best.value), seed_spread: 0.0 };
            }
        } else if v > best.value {
            best = Search1 { t, value: v, seed_spread: 0.0 };
        }
    }
    best.seed_spread = spread;
    best
}

fn near(a: f64, b: f64) -> bool {
    if !a.is_finite() || !b.is_finite() {
        return a == b;
    }
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

/// Supremum over the triangle `lo <= tx <= ty <= hi`: exhaustive coarse grid,
/// then alternating coordinate-wise golden refinement from the best cells
/// until the joint movement drops below `tol`.
pub(crate) fn triangular_max(
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    lo: f64,
    hi: f64,
    grid_n: usize,
    tol: f64,
) -> Search2 {
    debug_assert!(grid_n >= 3 && lo < hi);
    let h = (hi - lo) / (grid_n - 1) as f64;
    let ts: Vec<f64> = (0..grid_n).map(|i| lo + h * i as f64).collect();
    let cells: Vec<(usize, usize)> = (0..grid_n)
        .flat_map(|i| (i..grid_n).map(move |j| (i, j)))
        .collect();

    #[cfg(feature = "parallel")]
    let vals: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| sanitize(f(ts[i], ts[j])))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let vals: Vec<f64> = cells.iter().map(|&(i, j)| sanitize(f(ts[i], ts[j]))).collect();

    let refine = |i: usize, j: usize| -> (f64, f64, f64) {
        let mut tx = ts[i];
        let mut ty = ts[j];
        let mut best = (tx, ty, sanitize(f(tx, ty)));
        for _ in 0..60 {
            let (ax, bx) = ((tx - h).max(lo), (tx + h).min(ty));
            let (nx, vx) = if bx > ax {
                golden_max(&|t| f(t, ty), ax, bx, tol)
            } else {
                (tx, best.2)
            };
            if vx > best.2 {
                best = (nx, ty, vx);
            }
            let (ay, by) = ((ty - h).max(nx), (ty + h).min(hi));
            let (ny, vy) = if by > ay {
                golden_max(&|t| f(nx, t), ay, by, tol)
            } else {
                (ty, vx)
            };
            if vy > best.2 {
                best = (nx, ny, vy);
            }
            let moved = (nx - tx).abs() + (ny - ty).abs();
            tx = nx;
            ty = ny;
            if moved < tol {
                break;
            }
        }
        best
    };

    let mut candidates: Vec<(f64, f64, f64)> = Vec::new();
    for &c in &top_seeds(&vals) {
        let (i, j) = cells[c];
        candidates.push(refine(i, j));
    }
    let finite: Vec<f64> = candidates.iter().map(|c| c.2).filter(|v| v.is_finite()).collect();
    let spread = match (finite.iter().cloned().reduce(f64::max), finite.iter().cloned().reduce(f64::min)) {
        (Some(mx), Some(mn)) if finite.len() > 1 => mx - mn,
        _ => 0.0,
    };
    // include the raw grid argmax as a candidate
    if let Some(&gi) = top_seeds(&vals).first() {
        let (i, j) = cells[gi];
        candidates.push((ts[i], ts[j], vals[gi]));
    }

    let mut best = candidates[0];
    for &(tx, ty, v) in &candidates[1..] {
        if near(v, best.2) {
            if (tx, ty) < (best.0, best.1) {
                best = (tx, ty, v.max(best.2));
            }
        } else if v > best.2 {
            best = (tx, ty, v);
        }
    }
    Search2 { tx: best.0, ty: best.1, value: best.2, seed_spread: spread }
}

//! Adaptive Gauss–Kronrod quadrature (7-15 pair) with global bisection.
//!
//! All integrands arrive already transformed to a bounded domain; endpoint
//! singularities are handled one level up (measure::table) by graded
//! bisection toward the endpoint, so this engine only needs to resolve
//! smooth-to-moderately-singular behaviour on closed segments.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae for the (G7, K15) pair, positive half.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Gauss weights for the embedded 7-point rule (odd-indexed abscissae).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

const MAX_SEGMENTS: usize = 4096;
const MAX_DEPTH: u32 = 60;

#[derive(Clone, Copy, Debug)]
pub(crate) struct QuadOutcome {
    pub value: f64,
}

#[derive(Clone, Debug)]
pub(crate) enum QuadError<E> {
    /// The integrand itself failed to evaluate.
    Eval(E),
    /// A sample came back infinite or NaN.
    NonFiniteSample { at: f64 },
    /// Refinement budget exhausted; reports what was achieved.
    NonConvergent { value: f64, achieved: f64, requested: f64 },
}

struct Seg {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    resabs: f64,
    depth: u32,
    seq: u64,
}

impl PartialEq for Seg {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.seq == other.seq
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Seg {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on error; older segment wins ties for determinism
        self.err
            .total_cmp(&other.err)
            .then(other.seq.cmp(&self.seq))
    }
}

fn gk15<E>(
    f: &mut dyn FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
) -> Result<(f64, f64, f64), QuadError<E>> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sample = |x: f64| -> Result<f64, QuadError<E>> {
        let v = f(x).map_err(QuadError::Eval)?;
        if !v.is_finite() {
            return Err(QuadError::NonFiniteSample { at: x });
        }
        Ok(v)
    };

    let fc = sample(c)?;
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = resk.abs();
    let mut lo = [0.0f64; 7];
    let mut hi = [0.0f64; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = sample(c - dx)?;
        let f2 = sample(c + dx)?;
        lo[j] = f1;
        hi[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((lo[j] - reskh).abs() + (hi[j] - reskh).abs());
    }
    let value = resk * h;
    resabs *= h.abs();
    resasc *= h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    let round = f64::EPSILON * 50.0 * resabs;
    if round > 0.0 {
        err = err.max(round);
    }
    Ok((value, err, resabs))
}

/// Globally adaptive integration of `f` over `[a, b]` to relative tolerance
/// `rel` with absolute floor `abs_floor`.
pub(crate) fn integrate<E>(
    f: &mut dyn FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    rel: f64,
    abs_floor: f64,
) -> Result<QuadOutcome, QuadError<E>> {
    if a == b {
        return Ok(QuadOutcome { value: 0.0 });
    }
    debug_assert!(a < b);
    let (v0, e0, r0) = gk15(f, a, b)?;
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Seg { a, b, value: v0, err: e0, resabs: r0, depth: 0, seq });
    let mut total = v0;
    let mut total_err = e0;
    let mut total_resabs = r0;
    // value/error of segments frozen at max depth
    let mut frozen_val = 0.0;
    let mut frozen_err = 0.0;
    let mut n_segs = 1usize;

    loop {
        // cancellation-heavy integrals bottom out at the roundoff of int |f|
        let round_floor = 50.0 * f64::EPSILON * total_resabs;
        let tol = (rel * (total + frozen_val).abs()).max(abs_floor).max(round_floor);
        if total_err + frozen_err <= tol {
            return Ok(QuadOutcome { value: total + frozen_val });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => {
                return Err(QuadError::NonConvergent {
                    value: total + frozen_val,
                    achieved: frozen_err,
                    requested: tol,
                })
            }
        };
        total -= worst.value;
        total_err -= worst.err;
        if worst.depth >= MAX_DEPTH || n_segs >= MAX_SEGMENTS {
            frozen_val += worst.value;
            frozen_err += worst.err;
            continue;
        }
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval narrower than representable; freeze it
            frozen_val += worst.value;
            frozen_err += worst.err;
            continue;
        }
        let (vl, el, rl) = gk15(f, worst.a, m)?;
        let (vr, er, rr) = gk15(f, m, worst.b)?;
        total_resabs += rl + rr - worst.resabs;
        seq += 1;
        heap.push(Seg { a: worst.a, b: m, value: vl, err: el, resabs: rl, depth: worst.depth + 1, seq });
        seq += 1;
        heap.push(Seg { a: m, b: worst.b, value: vr, err: er, resabs: rr, depth: worst.depth + 1, seq });
        total += vl + vr;
        total_err += el + er;
        n_segs += 1;
    }
}

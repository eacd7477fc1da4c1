//! Special-function kernel: log-Gamma, Beta, conjugate exponents and the
//! universal factor `k_{q,p}`.
//!
//! Log-Gamma uses its own Lanczos approximation (g = 7, 9 coefficients) so
//! results are bit-stable across platforms instead of depending on whatever
//! the host libm ships.

use std::f64::consts::PI;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum SpecialError {
    NonPositiveArgument { name: &'static str, value: f64 },
    ExponentOutOfRange { name: &'static str, value: f64 },
    QBelowP { p: f64, q: f64 },
}

impl fmt::Display for SpecialError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecialError::NonPositiveArgument { name, value } => {
                write!(f, "{} must be positive, got {}", name, value)
            }
            SpecialError::ExponentOutOfRange { name, value } => {
                write!(f, "{} must lie in (1, inf), got {}", name, value)
            }
            SpecialError::QBelowP { p, q } => {
                write!(f, "k factor requires q >= p, got p = {}, q = {}", p, q)
            }
        }
    }
}

impl std::error::Error for SpecialError {}

/// The exponent pair `(p, q)` with the derived conjugate `p* = p/(p-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    p: f64,
    q: f64,
    p_star: f64,
    q_ge_p: bool,
}

impl Exponents {
    pub fn new(p: f64, q: f64) -> Result<Self, SpecialError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(SpecialError::ExponentOutOfRange { name: "p", value: p });
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(SpecialError::ExponentOutOfRange { name: "q", value: q });
        }
        Ok(Exponents { p, q, p_star: conjugate(p), q_ge_p: q >= p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Conjugate exponent `p* = p/(p-1)`, so `1/p + 1/p* = 1`.
    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    /// Whether `q >= p` (several of the estimates require it).
    pub fn q_ge_p(&self) -> bool {
        self.q_ge_p
    }

    pub fn is_linear(&self) -> bool {
        self.p == 2.0 && self.q == 2.0
    }
}

/// Conjugate exponent `p/(p-1)` for `p > 1`.
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

// Lanczos (g = 7, 9 coefficients). Relative accuracy ~1e-15 on (0, 1e3).
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(alpha, beta) = ln Gamma(alpha) + ln Gamma(beta) - ln Gamma(alpha+beta)`.
pub fn log_beta(alpha: f64, beta: f64) -> Result<f64, SpecialError> {
    if !(alpha > 0.0) {
        return Err(SpecialError::NonPositiveArgument { name: "alpha", value: alpha });
    }
    if !(beta > 0.0) {
        return Err(SpecialError::NonPositiveArgument { name: "beta", value: beta });
    }
    Ok(ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta))
}

/// Euler Beta function.
pub fn beta(alpha: f64, b: f64) -> Result<f64, SpecialError> {
    log_beta(alpha, b).map(f64::exp)
}

/// Threshold below which `q - p` is treated as the diagonal: the Beta-formula
/// is 0/0 there and loses precision nearby, so the closed limit takes over.
const DIAGONAL_SWITCH: f64 = 1e-8;

/// The universal factor
/// `k_{q,p} = [(q-p) / (p B(p/(q-p), p(q-1)/(q-p)))]^{1/p - 1/q}` for `q > p`,
/// with the limit `k_{p,p} = p^{1/p} (p*)^{1/p*}` on the diagonal.
/// Satisfies `k_{q,p} <= 2` for `q >= p`.
pub fn k_factor(e: &Exponents) -> Result<f64, SpecialError> {
    let (p, q) = (e.p(), e.q());
    if q < p {
        return Err(SpecialError::QBelowP { p, q });
    }
    if q - p < DIAGONAL_SWITCH {
        let ps = e.p_star();
        return Ok(p.powf(1.0 / p) * ps.powf(1.0 / ps));
    }
    let r = q - p;
    let lb = log_beta(p / r, p * (q - 1.0) / r)?;
    let ln_inner = r.ln() - p.ln() - lb;
    Ok(((1.0 / p - 1.0 / q) * ln_inner).exp())
}

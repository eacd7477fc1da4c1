use super::*;
use crate::expr;
use crate::measure::Density;
use std::sync::Arc;

fn unit() -> Interval {
    Interval::new(0.0, 1.0).unwrap()
}

fn lebesgue_setup(p: f64, q: f64, boundary: BoundaryKind) -> HardySetup {
    let m = WeightedMeasure::new(unit(), Density::Lebesgue).unwrap();
    HardySetup::new(m.clone(), m, Exponents::new(p, q).unwrap(), boundary).unwrap()
}

/// Closed form of B^+ for the Lebesgue model, from the stationarity
/// condition (1-y)/p* = y/q: value (q/(q+p*))^{1/p*} (p*/(q+p*))^{1/q}.
fn lebesgue_b_plus(p: f64, q: f64) -> (f64, f64) {
    let ps = p / (p - 1.0);
    let y = q / (q + ps);
    ((q / (q + ps)).powf(1.0 / ps) * (ps / (q + ps)).powf(1.0 / q), y)
}

#[test]
fn b_plus_lebesgue_p2q2() {
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::DirichletLeft);
    let r = b_plus(&s).unwrap();
    assert!((r.value - 0.5).abs() < 1e-9, "value {}", r.value);
    assert!((r.at - 0.5).abs() < 1e-5, "argmax {}", r.at);
}

#[test]
fn b_plus_lebesgue_general_exponents() {
    for (p, q) in [(1.5, 2.0), (2.0, 4.0), (3.0, 3.0), (2.5, 7.0), (5.0, 2.0)] {
        let s = lebesgue_setup(p, q, BoundaryKind::DirichletLeft);
        let r = b_plus(&s).unwrap();
        let (want, argmax) = lebesgue_b_plus(p, q);
        assert!(
            (r.value - want).abs() <= 1e-9 * want,
            "B+({p},{q}) = {}, want {want}",
            r.value
        );
        assert!((r.at - argmax).abs() < 1e-4);
    }
}

#[test]
fn b_plus_respects_restricted_support() {
    // mu supported on (0, 1/2) only: the second factor vanishes past 1/2,
    // so the maximizer cannot exceed it
    let mu = WeightedMeasure::new(
        unit(),
        Density::Truncated(Arc::new(Density::Lebesgue), 0.0, 0.5),
    )
    .unwrap();
    let nu = WeightedMeasure::new(unit(), Density::Lebesgue).unwrap();
    let s = HardySetup::new(mu, nu, Exponents::new(2.0, 2.0).unwrap(), BoundaryKind::DirichletLeft)
        .unwrap();
    let r = b_plus(&s).unwrap();
    assert!(r.value > 0.0);
    assert!(r.at <= 0.5 + 1e-9, "argmax {} leaked past the support", r.at);
}

#[test]
fn b_minus_is_the_exact_reflection_of_b_plus() {
    // the implementation routes b_minus through the reflected setup, so the
    // identity holds exactly, not merely within tolerance
    let s = lebesgue_setup(2.0, 3.0, BoundaryKind::DirichletRight);
    let direct = b_minus(&s).unwrap();
    let reflected = b_plus(&s.reflected().unwrap()).unwrap();
    assert_eq!(direct.value.to_bits(), reflected.value.to_bits());
    assert_eq!(direct.at.to_bits(), (-reflected.at).to_bits());
}

#[test]
fn b_minus_lebesgue_symmetry() {
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::DirichletRight);
    let r = b_minus(&s).unwrap();
    assert!((r.value - 0.5).abs() < 1e-9);
    assert!((r.at - 0.5).abs() < 1e-5);
}

#[test]
fn b_minus_gaussian_half_line_matches_dense_scan() {
    // mu = nu = gaussian weight on (-inf, 0), p = q = 2: compare against a
    // dense grid scan of the same objective (n = 1e5)
    let iv = Interval::new(f64::NEG_INFINITY, 0.0).unwrap();
    let m = WeightedMeasure::new(iv, Density::Gauss).unwrap();
    let s = HardySetup::new(
        m.clone(),
        m,
        Exponents::new(2.0, 2.0).unwrap(),
        BoundaryKind::DirichletRight,
    )
    .unwrap();
    let r = b_minus(&s).unwrap();
    assert!(r.value.is_finite() && r.value > 0.0);

    let n = 100_000;
    let mut best = 0.0f64;
    let chart = *s.mu().chart();
    for i in 1..n {
        let t = chart.t_lo() + (chart.t_hi() - chart.t_lo()) * i as f64 / n as f64;
        let x = chart.to_x(t);
        let nv = s.nu_hat().cumulative(x, 0.0).unwrap().value();
        let m1 = s.mu().cumulative(f64::NEG_INFINITY, x).unwrap().value();
        let v = nv.sqrt() * m1.sqrt();
        if v.is_finite() {
            best = best.max(v);
        }
    }
    assert!(
        (r.value - best).abs() <= 1e-8 * best.max(1.0) + 1e-8,
        "optimizer {} vs dense scan {}",
        r.value,
        best
    );
    assert!(r.value >= best - 1e-10);
}

#[test]
fn b_star_lebesgue_is_quarter() {
    // analytic: minimize [1/x + 1/(1-y)]/(y-x); symmetry gives x = 1-y = 1/4
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::Ergodic);
    let r = b_star(&s).unwrap();
    assert!((r.value - 0.25).abs() < 1e-9, "B* = {}", r.value);
    assert!((r.at.0 - 0.25).abs() < 1e-4);
    assert!((r.at.1 - 0.75).abs() < 1e-4);
    // degenerate diagonal x = y scores zero and is never selected
    assert!(r.at.1 > r.at.0);
}

#[test]
fn b_star_equals_b_substar_exactly_at_p_eq_q() {
    for p in [1.5, 2.0, 3.0] {
        let s = lebesgue_setup(p, p, BoundaryKind::Ergodic);
        let a = b_star(&s).unwrap();
        let b = b_substar(&s).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits(), "p = {p}");
    }
}

#[test]
fn b_substar_below_b_star_with_factor() {
    // B_* <= B^* <= 2^{1/p-1/q} B_* once q >= p
    for (p, q) in [(1.5, 2.0), (2.0, 4.0), (1.2, 6.0), (2.0, 2.0)] {
        let s = lebesgue_setup(p, q, BoundaryKind::Ergodic);
        let star = b_star(&s).unwrap().value;
        let sub = b_substar(&s).unwrap().value;
        let factor = 2.0f64.powf(1.0 / p - 1.0 / q);
        assert!(sub <= star + 1e-9, "({p},{q}): {sub} > {star}");
        assert!(star <= factor * sub + 1e-9, "({p},{q}): {star} > {factor} * {sub}");
    }
}

#[test]
fn kappa_lebesgue() {
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::Ergodic);
    let k = kappa(&s).unwrap();
    assert!((k - 0.25).abs() < 1e-8, "kappa = {k}");
    // scaling mu by c scales kappa by c^{1/2}
    let s4 = s.with_scaled_mu(4.0).unwrap();
    let k4 = kappa(&s4).unwrap();
    assert!((k4 - 2.0 * k).abs() < 1e-8 * k4, "kappa scaled = {k4}");
}

#[test]
fn kappa_requires_linear_exponents() {
    let s = lebesgue_setup(2.0, 3.0, BoundaryKind::Ergodic);
    assert!(matches!(kappa(&s), Err(BoundsError::RequiresLinearExponents { .. })));
}

#[test]
fn kappa_from_elliptic_matches_direct() {
    use crate::measure::{measures_from_elliptic, EllipticCoefficients};
    let coef = EllipticCoefficients {
        a: expr::parse("1").unwrap(),
        b: expr::parse("0").unwrap(),
        theta: 0.5,
    };
    let (mu, nu, _hat) = measures_from_elliptic(&coef, unit()).unwrap();
    let s = HardySetup::new(mu, nu, Exponents::new(2.0, 2.0).unwrap(), BoundaryKind::Ergodic)
        .unwrap();
    let direct = kappa(&lebesgue_setup(2.0, 2.0, BoundaryKind::Ergodic)).unwrap();
    let elliptic = kappa(&s).unwrap();
    assert!((direct - elliptic).abs() <= 1e-10, "{direct} vs {elliptic}");
}

#[test]
fn kappa0_lebesgue_and_duality() {
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::DirichletBoth);
    let k0 = kappa0(&s).unwrap();
    assert!((k0 - 0.25).abs() < 1e-8, "kappa0 = {k0}");

    // duality: kappa0 on (mu, nu_hat) equals kappa on the swapped pair,
    // exactly as computed (same optimizer path)
    let swapped = HardySetup::with_dual(
        s.nu_hat().clone(),
        s.nu().dual(2.0).unwrap(),
        s.mu().clone(),
        *s.exponents(),
        BoundaryKind::Ergodic,
    )
    .unwrap();
    let k_swapped = kappa(&swapped).unwrap();
    assert_eq!(k0.to_bits(), k_swapped.to_bits());
}

#[test]
fn kappa0_with_one_sided_blowup() {
    // nu = x on (0,1) at p = 2 gives nu_hat density 1/x, so nu_hat(0, x) is
    // infinite for every x: that term contributes zero and kappa0 stays finite
    let mu = WeightedMeasure::new(unit(), Density::Power(1.0)).unwrap();
    let nu = WeightedMeasure::new(unit(), Density::Power(1.0)).unwrap();
    let s = HardySetup::new(mu, nu, Exponents::new(2.0, 2.0).unwrap(), BoundaryKind::DirichletBoth)
        .unwrap();
    let k0 = kappa0(&s).unwrap();
    assert!(k0.is_finite() && k0 > 0.0, "kappa0 = {k0}");
}

#[test]
fn split_bounds_lebesgue() {
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::Ergodic);
    // theta = 1/2: B_theta^- = sup_{x<1/2} (1/2 - x)^{1/2} x^{1/2} = 1/4 at x = 1/4
    let (minus, plus) = split_bounds(&s, 0.5).unwrap();
    assert!((minus - 0.25).abs() < 1e-8, "B_theta^- = {minus}");
    assert!((plus - 0.25).abs() < 1e-8, "B_theta^+ = {plus}");
    // theta near the left endpoint kills the left supremum
    let (minus, _plus) = split_bounds(&s, 1e-6).unwrap();
    assert!(minus < 1e-5, "B_theta^- = {minus} should vanish");
    assert!(split_bounds(&s, 1.5).is_err());
}

#[test]
fn balanced_theta_exists_for_lebesgue() {
    // bisection on theta of B_theta^- - B_theta^+ finds the balance point 1/2
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::Ergodic);
    let g = |theta: f64| {
        let (m, p) = split_bounds(&s, theta).unwrap();
        m - p
    };
    let (mut lo, mut hi) = (0.05, 0.95);
    assert!(g(lo) < 0.0 && g(hi) > 0.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta_bar = 0.5 * (lo + hi);
    assert!((theta_bar - 0.5).abs() < 1e-6, "balanced theta = {theta_bar}");
}

#[test]
fn splitting_relation_bounds_b_star() {
    // B^* >= sup_theta min(B_theta^-, B_theta^+)
    let s = lebesgue_setup(2.0, 3.0, BoundaryKind::Ergodic);
    let star = b_star(&s).unwrap().value;
    for k in 1..33 {
        let theta = k as f64 / 33.0;
        let (m, p) = split_bounds(&s, theta).unwrap();
        let min = m.min(p);
        assert!(
            min <= star + 1e-9,
            "theta = {theta}: min(B-,B+) = {min} exceeds B* = {star}"
        );
    }
}

#[test]
fn two_sided_lebesgue_ergodic() {
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::Ergodic);
    let r = two_sided(&s).unwrap();
    assert!((r.lower.unwrap() - 0.25).abs() < 1e-8);
    assert!((r.upper.unwrap() - 0.5).abs() < 1e-8);
    assert_eq!(r.factor, Some(2.0));
    // true A = 1/pi lies inside
    let a = 1.0 / std::f64::consts::PI;
    assert!(r.lower.unwrap() - 1e-9 <= a && a <= r.upper.unwrap() + 1e-9);
}

#[test]
fn two_sided_lebesgue_dirichlet_left() {
    let s = lebesgue_setup(2.0, 2.0, BoundaryKind::DirichletLeft);
    let r = two_sided(&s).unwrap();
    assert!((r.lower.unwrap() - 0.5).abs() < 1e-8);
    assert!((r.upper.unwrap() - 1.0).abs() < 1e-8);
    let a = 2.0 / std::f64::consts::PI;
    assert!(r.lower.unwrap() <= a && a <= r.upper.unwrap());
}

#[test]
fn two_sided_lebesgue_p2_q4() {
    let s = lebesgue_setup(2.0, 4.0, BoundaryKind::DirichletLeft);
    let r = two_sided(&s).unwrap();
    let (b, _) = lebesgue_b_plus(2.0, 4.0);
    let k42 = 3.0f64.powf(0.25);
    assert!((r.lower.unwrap() - b).abs() < 1e-8);
    assert!((r.upper.unwrap() - k42 * b).abs() < 1e-7);
    // the exact constant for this case lies inside
    let a = 0.709_827_942_242_355_7;
    assert!(r.lower.unwrap() <= a && a <= r.upper.unwrap());
}

#[test]
fn two_sided_reports_gaps_explicitly() {
    // q < p: no certified Dirichlet upper bound
    let s = lebesgue_setup(3.0, 2.0, BoundaryKind::DirichletLeft);
    let r = two_sided(&s).unwrap();
    assert!(r.lower.is_some());
    assert!(r.upper.is_none());
    assert!(r.gap_note.as_deref().unwrap_or("").contains("q >= p"));

    // ergodic with p > 2: lower bound only
    let s = lebesgue_setup(3.0, 4.0, BoundaryKind::Ergodic);
    let r = two_sided(&s).unwrap();
    assert!(r.lower.is_some());
    assert!(r.upper.is_none());
    assert!(r.gap_note.is_some());

    // double Dirichlet away from p = q = 2: nothing certified
    let s = lebesgue_setup(2.0, 3.0, BoundaryKind::DirichletBoth);
    let r = two_sided(&s).unwrap();
    assert!(r.lower.is_none() && r.upper.is_none());
    assert!(r.gap_note.is_some());
}

#[test]
fn scaling_covariance() {
    // mu -> c mu multiplies the constants by c^{1/q}; nu -> c nu by c^{-1/p}
    let cases: [(f64, f64); 2] = [(2.0, 2.0), (1.5, 3.0)];
    for (p, q) in cases {
        let s = lebesgue_setup(p, q, BoundaryKind::DirichletLeft);
        let base = b_plus(&s).unwrap().value;
        for c in [0.5, 4.0] {
            let up = b_plus(&s.with_scaled_mu(c).unwrap()).unwrap().value;
            assert!(
                (up - c.powf(1.0 / q) * base).abs() <= 1e-8 * base,
                "mu scaling ({p},{q},{c}): {up} vs {}",
                c.powf(1.0 / q) * base
            );
            let un = b_plus(&s.with_scaled_nu(c).unwrap()).unwrap().value;
            assert!(
                (un - c.powf(-1.0 / p) * base).abs() <= 1e-8 * base,
                "nu scaling ({p},{q},{c}): {un} vs {}",
                c.powf(-1.0 / p) * base
            );
        }
    }
}

#[test]
fn ergodic_requires_finite_mu() {
    let iv = Interval::new(0.0, f64::INFINITY).unwrap();
    let m = WeightedMeasure::new(iv, Density::Lebesgue).unwrap();
    let r = HardySetup::new(
        m.clone(),
        m,
        Exponents::new(2.0, 2.0).unwrap(),
        BoundaryKind::Ergodic,
    );
    assert!(matches!(r, Err(BoundsError::ErgodicNeedsFiniteMu)));
}

#[test]
fn dual_consistency_check_rejects_mismatches() {
    let mu = WeightedMeasure::new(unit(), Density::Lebesgue).unwrap();
    let nu = WeightedMeasure::new(unit(), Density::Lebesgue).unwrap();
    let wrong_hat = WeightedMeasure::new(unit(), Density::Power(1.0)).unwrap();
    let r = HardySetup::with_dual(
        mu,
        nu,
        wrong_hat,
        Exponents::new(2.0, 2.0).unwrap(),
        BoundaryKind::Ergodic,
    );
    assert!(matches!(r, Err(BoundsError::InconsistentDual { .. })));
}

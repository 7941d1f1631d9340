//! Gamma-family special functions.
//!
//! Small arguments are shifted upward with the recurrence Γ(x+1) = xΓ(x) until
//! x ≥ 8, where the Stirling / Bernoulli asymptotic series are accurate to a few
//! ulps. The `*_diff` variants evaluate differences such as lnΓ(x+h) − lnΓ(x)
//! without cancellation when x is large, which the evidence objective needs for
//! very large Wishart degrees of freedom.

use crate::error::{domain, Result};

const ASYMPTOTIC_THRESHOLD: f64 = 8.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// B_{2k} / (2k (2k-1)) for k = 1..7.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

/// B_{2k} / (2k) for k = 1..7.
const DIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// B_{2k} for k = 1..6.
const TRIGAMMA_ASYMP: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

fn check_positive(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(
            function,
            format!("argument must be positive and finite, got {x}"),
        ))
    }
}

/// Stirling correction Σ B_{2k}/(2k(2k-1) y^{2k-1}) for y ≥ 8.
fn stirling_tail(y: f64) -> f64 {
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut acc = 0.0;
    for c in STIRLING {
        acc += c * pow;
        pow *= inv2;
    }
    acc
}

fn digamma_tail(y: f64) -> f64 {
    let inv2 = 1.0 / (y * y);
    let mut pow = inv2;
    let mut acc = 0.0;
    for c in DIGAMMA_ASYMP {
        acc += c * pow;
        pow *= inv2;
    }
    acc
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    let mut y = x;
    let mut log_prod = 0.0;
    if y < ASYMPTOTIC_THRESHOLD {
        let mut prod = 1.0;
        while y < ASYMPTOTIC_THRESHOLD {
            prod *= y;
            y += 1.0;
        }
        log_prod = prod.ln();
    }
    (y - 0.5) * y.ln() - y + HALF_LN_2PI + stirling_tail(y) - log_prod
}

pub(crate) fn digamma_unchecked(x: f64) -> f64 {
    let mut y = x;
    let mut acc = 0.0;
    while y < ASYMPTOTIC_THRESHOLD {
        acc -= 1.0 / y;
        y += 1.0;
    }
    acc + y.ln() - 0.5 / y - digamma_tail(y)
}

pub(crate) fn trigamma_unchecked(x: f64) -> f64 {
    let mut y = x;
    let mut acc = 0.0;
    while y < ASYMPTOTIC_THRESHOLD {
        acc += 1.0 / (y * y);
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // 1/y + 1/(2y²) + Σ B_{2k} / y^{2k+1}
    let mut pow = inv2 * inv;
    let mut tail = 0.0;
    for b in TRIGAMMA_ASYMP {
        tail += b * pow;
        pow *= inv2;
    }
    acc + inv + 0.5 * inv2 + tail
}

/// lnΓ(x+h) − lnΓ(x) for x > 0, h ≥ 0, stable for large x.
pub(crate) fn ln_gamma_diff_unchecked(x: f64, h: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    if x >= ASYMPTOTIC_THRESHOLD {
        let y = x + h;
        (x - 0.5) * (h / x).ln_1p() + h * y.ln() - h + (stirling_tail(y) - stirling_tail(x))
    } else {
        ln_gamma_unchecked(x + h) - ln_gamma_unchecked(x)
    }
}

/// ψ(x+h) − ψ(x) for x > 0, h ≥ 0, stable for large x.
pub(crate) fn digamma_diff_unchecked(x: f64, h: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    if x >= ASYMPTOTIC_THRESHOLD {
        let y = x + h;
        (h / x).ln_1p() + 0.5 * h / (x * y) - (digamma_tail(y) - digamma_tail(x))
    } else {
        digamma_unchecked(x + h) - digamma_unchecked(x)
    }
}

/// Digamma function ψ(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(digamma_unchecked(x))
}

/// Trigamma function ψ'(x) for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    Ok(trigamma_unchecked(x))
}

/// Natural log of the Gamma function for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", x)?;
    Ok(ln_gamma_unchecked(x))
}

/// lnΓ(x+h) − lnΓ(x), evaluated without cancellation for large x.
pub fn log_gamma_diff(x: f64, h: f64) -> Result<f64> {
    check_positive("log_gamma_diff", x)?;
    if !(h >= 0.0 && h.is_finite()) {
        return Err(domain(
            "log_gamma_diff",
            format!("increment must be non-negative, got {h}"),
        ));
    }
    Ok(ln_gamma_diff_unchecked(x, h))
}

/// ψ(x+h) − ψ(x), evaluated without cancellation for large x.
pub fn digamma_diff(x: f64, h: f64) -> Result<f64> {
    check_positive("digamma_diff", x)?;
    if !(h >= 0.0 && h.is_finite()) {
        return Err(domain(
            "digamma_diff",
            format!("increment must be non-negative, got {h}"),
        ));
    }
    Ok(digamma_diff_unchecked(x, h))
}

/// ln Γ_p(a) = p(p−1)/4 · ln π + Σ_{j=1}^{p} ln Γ(a − (j−1)/2).
pub fn log_multivariate_gamma(p: usize, a: f64) -> Result<f64> {
    if p == 0 {
        return Err(domain(
            "log_multivariate_gamma",
            "dimension must be at least 1",
        ));
    }
    let lower = (p as f64 - 1.0) / 2.0;
    if !a.is_finite() || a <= lower {
        return Err(domain(
            "log_multivariate_gamma",
            format!("argument {a} must exceed (p-1)/2 = {lower}"),
        ));
    }
    let pf = p as f64;
    let mut acc = pf * (pf - 1.0) / 4.0 * std::f64::consts::PI.ln();
    for j in 0..p {
        acc += ln_gamma_unchecked(a - j as f64 / 2.0);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn digamma_reference_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(2.0).unwrap() - 0.422_784_335_098_467_1).abs() < 1e-14);
        // ψ(1/2) = −γ − 2 ln 2
        let half = -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert!((digamma(0.5).unwrap() - half).abs() < 1e-13);
    }

    #[test]
    fn digamma_large_argument_matches_series_oracle() {
        let x: f64 = 100.0;
        let oracle = x.ln() - 1.0 / (2.0 * x) - 1.0 / (12.0 * x * x) + 1.0 / (120.0 * x.powi(4));
        assert!((digamma(x).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn digamma_small_argument() {
        // ψ(x) ≈ −1/x − γ + (π²/6) x for small x
        let x = 1e-3;
        let approx = -1.0 / x - EULER_GAMMA + std::f64::consts::PI.powi(2) / 6.0 * x;
        assert!((digamma(x).unwrap() - approx).abs() < 1e-5);
        assert!((digamma(x).unwrap() - (digamma(x + 1.0).unwrap() - 1.0 / x)).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
        assert!(log_multivariate_gamma(3, 1.0).is_err());
        assert!(log_multivariate_gamma(0, 1.0).is_err());
    }

    #[test]
    fn log_gamma_reference_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
        assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-14);
        // ln(9!) from the exact integer factorial
        let fact9: u64 = (1..=9).product();
        assert!((log_gamma(10.0).unwrap() - (fact9 as f64).ln()).abs() < 1e-12);
        assert!((log_gamma(10.0).unwrap() - 12.801_827_480_081_469).abs() < 1e-12);
        let fact30: f64 = (1..=30).map(|v| (v as f64).ln()).sum();
        assert!((log_gamma(31.0).unwrap() - fact30).abs() < 1e-11);
    }

    #[test]
    fn multivariate_gamma_values() {
        let v = log_multivariate_gamma(1, 1.5).unwrap();
        assert!((v - (-0.120_782_237_635_245_2)).abs() < 1e-13);
        let v = log_multivariate_gamma(2, 1.5).unwrap();
        assert!((v - (std::f64::consts::PI / 2.0).ln()).abs() < 1e-13);
        assert!((v - 0.451_582_705_289_454_8).abs() < 1e-13);
    }

    #[test]
    fn trigamma_values() {
        // ψ'(1) = π²/6
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((trigamma(1.0).unwrap() - z2).abs() < 1e-13);
        // ψ'(1/2) = π²/2
        assert!((trigamma(0.5).unwrap() - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
        // derivative check against digamma
        for &x in &[0.7, 3.0, 12.5, 80.0] {
            let h = 1e-5;
            let fd = (digamma(x + h).unwrap() - digamma(x - h).unwrap()) / (2.0 * h);
            assert!((trigamma(x).unwrap() - fd).abs() < 1e-7 * trigamma(x).unwrap().max(1.0));
        }
    }

    #[test]
    fn differences_match_direct_evaluation() {
        for &(x, h) in &[
            (0.3, 2.5),
            (5.0, 0.5),
            (9.0, 6.5),
            (40.0, 12.0),
            (250.5, 100.0),
        ] {
            let direct = log_gamma(x + h).unwrap() - log_gamma(x).unwrap();
            assert!((log_gamma_diff(x, h).unwrap() - direct).abs() < 1e-11 * direct.abs().max(1.0));
            let direct = digamma(x + h).unwrap() - digamma(x).unwrap();
            assert!((digamma_diff(x, h).unwrap() - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn differences_are_accurate_for_huge_arguments() {
        // ψ(x+h) − ψ(x) ≈ h/x − h(h−1)/(2x²) for x ≫ h; lnΓ diff ≈ h ln x + h(h−1)/(2x)
        let x = 5.0e11;
        let h = 6.5;
        let psi = digamma_diff(x, h).unwrap();
        let approx = h / x - h * (h - 1.0) / (2.0 * x * x);
        assert!(((psi - approx) / approx).abs() < 1e-12);
        let lg = log_gamma_diff(x, h).unwrap();
        let approx = h * x.ln() + h * (h - 1.0) / (2.0 * x);
        assert!(((lg - approx) / approx).abs() < 1e-14);
    }
}

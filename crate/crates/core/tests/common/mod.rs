//! Independent numerical oracles for the d = 1 evidence and predictive
//! probability: adaptive Gauss–Kronrod quadrature over (μ, ln λ) of the
//! exact likelihood × prior integrand.

#![allow(dead_code)]

use evida_core::evidence::Variant;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7–K15 panel: (Kronrod estimate, |Kronrod − Gauss|).
fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod on [a, b] by recursive bisection.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn rec(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        b: f64,
        whole: (f64, f64),
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (est, err) = whole;
        if err <= tol || depth == 0 {
            return est;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        rec(f, a, m, left, 0.5 * tol, depth - 1) + rec(f, m, b, right, 0.5 * tol, depth - 1)
    }
    let whole = gk15(f, a, b);
    let tol = rel_tol * whole.0.abs().max(1e-300);
    rec(f, a, b, whole, tol, 40)
}

/// ln Γ by the Lanczos approximation (g = 7, nine terms), with reflection.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Class data and hyperparameters of one d = 1 evidence integral.
#[derive(Debug, Clone)]
pub struct Evidence1d<'a> {
    pub x: &'a [f64],
    pub k: f64,
    pub r: f64,
    pub variant: Variant,
    /// Mean-prior precision (variant B only).
    pub gamma0: f64,
}

impl Evidence1d<'_> {
    fn mean(&self) -> f64 {
        self.x.iter().sum::<f64>() / self.x.len() as f64
    }

    /// Log of the integrand at (μ, λ).
    ///
    /// A: (2π)^{-1/2} λ^{1/2} p_W(λ) Π_i N(x_i | μ, 1/λ), the flat-mean-prior
    /// limit with the γ₁^{1/2} factor divided out.
    /// B: (γ₀/n)^{1/2} e^{−γ₀ X̂²/2} (n/2π)^{1/2} p_W(λ) Π_i N(x_i | μ, 1/λ).
    fn log_integrand(&self, mu: f64, lambda: f64) -> f64 {
        let n = self.x.len() as f64;
        let ln2pi = (2.0 * std::f64::consts::PI).ln();
        let ln_wishart = (0.5 * self.r - 1.0) * lambda.ln()
            - lambda / (2.0 * self.k)
            - 0.5 * self.r * (2.0 * self.k).ln()
            - ln_gamma(0.5 * self.r);
        let ln_lik: f64 = self
            .x
            .iter()
            .map(|xi| 0.5 * lambda.ln() - 0.5 * ln2pi - 0.5 * lambda * (xi - mu).powi(2))
            .sum();
        let prefactor = match self.variant {
            Variant::A => -0.5 * ln2pi + 0.5 * lambda.ln(),
            Variant::B => {
                let xbar = self.mean();
                0.5 * (self.gamma0 / n).ln() - 0.5 * self.gamma0 * xbar * xbar
                    + 0.5 * (n / (2.0 * std::f64::consts::PI)).ln()
            }
        };
        prefactor + ln_wishart + ln_lik
    }

    /// ln Ψ including the (2π)^{-n/2} of the likelihood, by 2-D quadrature
    /// over (μ, s = ln λ).
    pub fn log_evidence(&self) -> f64 {
        let n = self.x.len() as f64;
        let xbar = self.mean();
        // reference log scale and s-range from the integrand along μ = X̂
        let probe = |s: f64| self.log_integrand(xbar, s.exp()) + s - 0.5 * (n * s.exp()).ln();
        let grid: Vec<f64> = (-400..=200).map(|i| i as f64 * 0.25).collect();
        let vals: Vec<f64> = grid.iter().map(|&s| probe(s)).collect();
        let reference = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let above: Vec<usize> = (0..grid.len())
            .filter(|&i| vals[i] > reference - 90.0)
            .collect();
        let s_lo = grid[above[0].saturating_sub(2)];
        let s_hi = grid[(above[above.len() - 1] + 2).min(grid.len() - 1)];

        let mut outer = |s: f64| {
            let lambda = s.exp();
            let w = 1.0 / (n * lambda).sqrt();
            let mut inner = |mu: f64| (self.log_integrand(mu, lambda) + s - reference).exp();
            integrate(&mut inner, xbar - 14.0 * w, xbar, 1e-12)
                + integrate(&mut inner, xbar, xbar + 14.0 * w, 1e-12)
        };
        // split at the peak so the adaptive rule sees both tails
        let s_peak = grid[(0..grid.len())
            .max_by(|&a, &b| vals[a].total_cmp(&vals[b]))
            .unwrap()];
        let total =
            integrate(&mut outer, s_lo, s_peak, 1e-11) + integrate(&mut outer, s_peak, s_hi, 1e-11);
        total.ln() + reference
    }
}

/// Exact class posterior at x0 with fixed hyperparameters:
/// p(z | x0, D) ∝ p_z Ψ_z(D_z ∪ {x0}) / Ψ_z(D_z).
pub fn predictive_by_quadrature(classes: &[Evidence1d], priors: &[f64], x0: f64) -> Vec<f64> {
    let logs: Vec<f64> = classes
        .iter()
        .zip(priors)
        .map(|(c, p)| {
            let mut with: Vec<f64> = c.x.to_vec();
            with.push(x0);
            let extended = Evidence1d {
                x: &with,
                ..c.clone()
            };
            p.ln() + extended.log_evidence() - c.log_evidence()
        })
        .collect();
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

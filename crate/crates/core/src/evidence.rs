//! Per-class evidence objectives for variants A and B and the hyperparameter
//! solver.
//!
//! With m = n_z (A) or n_z − 1 (B) and ξ the eigenvalues of Ĉ_z, the reduced
//! objective is
//!
//! Ω̃_z(k, r) = (d r/2) ln k − lnΓ_d((r+m)/2) + lnΓ_d(r/2) + ((r+m)/2) Σ ln(n ξ_i + 1/k)
//!
//! which is evaluated here in the equivalent form
//! ((r+m)/2) Σ ln(1 + n k ξ_i) − (d m/2) ln k − Σ_j [lnΓ((r−j+1)/2 + m/2) − lnΓ((r−j+1)/2)].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{digamma_diff_unchecked, ln_gamma_diff_unchecked, trigamma_unchecked};
use crate::stats::ClassSufficientStats;

/// Solver floor for the Wishart seed scale.
pub const K_MIN: f64 = 1e-12;

/// Candidates whose objectives differ by less than this are tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// ‖X̂‖² below `DEGENERATE_MEAN * d` triggers the γ₀ cap.
pub const DEGENERATE_MEAN: f64 = 1e-12;

/// Upper end of the k range scanned when the objective is unbounded, and the
/// grid fallback, in units of 1/(n ξ̄⁺).
pub const K_CEILING_FACTOR: f64 = 1e3;

const ALTERNATION_DAMPING: f64 = 0.5;
const ALTERNATION_TOL: f64 = 1e-10;
const ALTERNATION_MAX_ITER: usize = 500;
const MULTISTART: [f64; 3] = [0.1, 1.0, 10.0];
const ZERO_EIGENVALUE_REL: f64 = 1e-12;
const R_DIVERGED: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    A,
    B,
}

impl Variant {
    /// m = n (A) or n − 1 (B).
    pub fn dof_shift(self, n: usize) -> usize {
        match self {
            Variant::A => n,
            Variant::B => n - 1,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::A => write!(f, "A"),
            Variant::B => write!(f, "B"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            other => Err(Error::InvalidArgument(format!("unknown variant {other:?}"))),
        }
    }
}

/// Which candidate family produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    /// Both stationarity equations hold with r > d.
    Interior,
    /// r = d with k from the k-equation.
    Boundary,
    /// k = K_MIN.
    Floor,
    /// Objective unbounded below as k → ∞; k capped at the ceiling.
    Ceiling,
    /// Every eigenvalue of Ĉ is zero, so no finite minimizer exists.
    Degenerate,
    /// Hyperparameters supplied by the caller.
    Injected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub k: f64,
    pub r: f64,
    pub objective: f64,
    pub kind: CandidateKind,
}

/// Outcome of the per-class solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSolution {
    pub k: f64,
    pub r: f64,
    pub objective: f64,
    pub kind: CandidateKind,
    pub res_k: f64,
    pub res_r: f64,
    /// Every finite candidate that was evaluated, in generation order.
    pub candidates: Vec<Candidate>,
    /// Multistart runs of the damped alternation that converged.
    pub alternation_converged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDiagnostics {
    pub kind: CandidateKind,
    pub objective: f64,
    pub res_k: f64,
    pub res_r: f64,
    pub candidates: usize,
    pub gamma0_capped: bool,
}

impl ClassDiagnostics {
    fn injected() -> Self {
        ClassDiagnostics {
            kind: CandidateKind::Injected,
            objective: f64::NAN,
            res_k: f64::NAN,
            res_r: f64::NAN,
            candidates: 0,
            gamma0_capped: false,
        }
    }
}

/// Per-class hyperparameters (p_z, k_z, r_z, γ_0z) for one variant.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub variant: Variant,
    pub p: Vec<f64>,
    pub k: Vec<f64>,
    pub r: Vec<f64>,
    pub gamma0: Vec<f64>,
    pub diagnostics: Vec<ClassDiagnostics>,
}

impl HyperParams {
    /// Hyperparameters supplied directly, bypassing the solver.
    pub fn from_parts(
        variant: Variant,
        p: Vec<f64>,
        k: Vec<f64>,
        r: Vec<f64>,
        gamma0: Vec<f64>,
    ) -> Result<Self> {
        let c = p.len();
        for len in [k.len(), r.len(), gamma0.len()] {
            if len != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: len,
                });
            }
        }
        if p.iter().any(|&v| !(v > 0.0 && v.is_finite()))
            || k.iter().any(|&v| !(v > 0.0 && v.is_finite()))
            || r.iter().any(|&v| !v.is_finite())
            || gamma0.iter().any(|&v| !(v >= 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidArgument(
                "hyperparameters must be finite with p, k > 0 and gamma0 >= 0".into(),
            ));
        }
        Ok(HyperParams {
            variant,
            p,
            k,
            r,
            gamma0,
            diagnostics: vec![ClassDiagnostics::injected(); c],
        })
    }

    pub fn n_classes(&self) -> usize {
        self.p.len()
    }
}

/// Reduced per-class objectives and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceTerms {
    pub per_class: Vec<f64>,
    pub total: f64,
}

/// Spectrum-dependent sums at a given ln k.
#[derive(Debug, Clone, Copy)]
struct Spectral {
    /// S = Σ a/(1+a) with a = n k ξ, so that T = d − S.
    s: f64,
    /// L = Σ ln(1 + a).
    l: f64,
    /// dS/d(ln k) = Σ a/(1+a)².
    ds: f64,
}

/// The objective for one class, with the spectrum preprocessed.
#[derive(Debug, Clone)]
struct Profile {
    d: usize,
    df: f64,
    n: f64,
    m: usize,
    mf: f64,
    /// n ξ_i for the nonzero eigenvalues.
    nxi: Vec<f64>,
    zeros: usize,
    /// Mean of the nonzero eigenvalues, 1 when there are none.
    mean_pos: f64,
}

impl Profile {
    fn new(stats: &ClassSufficientStats, variant: Variant) -> Self {
        let d = stats.dim();
        let xi = stats.eigenvalues();
        let top = xi.iter().cloned().fold(0.0f64, f64::max);
        let cutoff = top * ZERO_EIGENVALUE_REL;
        let positive: Vec<f64> = xi
            .iter()
            .cloned()
            .filter(|&v| v > cutoff && v > 0.0)
            .collect();
        let mean_pos = if positive.is_empty() {
            1.0
        } else {
            positive.iter().sum::<f64>() / positive.len() as f64
        };
        let n = stats.n as f64;
        let m = variant.dof_shift(stats.n);
        Profile {
            d,
            df: d as f64,
            n,
            m,
            mf: m as f64,
            nxi: positive.iter().map(|v| n * v).collect(),
            zeros: d - positive.len(),
            mean_pos,
        }
    }

    /// Natural scale for k: n k ξ̄⁺ = 1.
    fn t_ref(&self) -> f64 {
        -(self.n * self.mean_pos).ln()
    }

    /// Ω̃ → −∞ as k → ∞ at r = d exactly when d(d − d₀) < m d₀.
    fn unbounded(&self) -> bool {
        self.d * (self.d - self.zeros) < self.m * self.zeros
    }

    fn spectral(&self, t: f64) -> Spectral {
        let k = t.exp();
        let mut s = 0.0;
        let mut l = 0.0;
        let mut ds = 0.0;
        for &c in &self.nxi {
            let a = k * c;
            let inv = 1.0 / (1.0 + a);
            s += a * inv;
            l += a.ln_1p();
            ds += a * inv * inv;
        }
        Spectral { s, l, ds }
    }

    /// Σ_{j=1}^{d} f((r−j+1)/2, m/2), evaluated through the equal sum
    /// Σ_{i=1}^{m} f((r−d+i)/2, d/2) when m < d.
    fn pair_sum(&self, r: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
        if self.m < self.d {
            (1..=self.m)
                .map(|i| f((r - self.df + i as f64) / 2.0, self.df / 2.0))
                .sum()
        } else {
            (1..=self.d)
                .map(|j| f((r - j as f64 + 1.0) / 2.0, self.mf / 2.0))
                .sum()
        }
    }

    /// lnΓ_d((r+m)/2) − lnΓ_d(r/2).
    fn lgamma_sum(&self, r: f64) -> f64 {
        self.pair_sum(r, ln_gamma_diff_unchecked)
    }

    /// Σ_j [ψ((r+m−j+1)/2) − ψ((r−j+1)/2)].
    fn psi_sum(&self, r: f64) -> f64 {
        self.pair_sum(r, digamma_diff_unchecked)
    }

    /// d/dr of `psi_sum`.
    fn psi_sum_deriv(&self, r: f64) -> f64 {
        0.5 * self.pair_sum(r, |x, h| trigamma_unchecked(x + h) - trigamma_unchecked(x))
    }

    fn value_with(&self, sp: &Spectral, t: f64, r: f64) -> f64 {
        0.5 * (r + self.mf) * sp.l - 0.5 * self.df * self.mf * t - self.lgamma_sum(r)
    }

    fn value(&self, t: f64, r: f64) -> f64 {
        self.value_with(&self.spectral(t), t, r)
    }

    /// r from the k-equation, r = m T/(d − T).
    fn r_from_k_equation(&self, sp: &Spectral) -> f64 {
        if sp.s > 0.0 {
            self.mf * (self.df - sp.s) / sp.s
        } else {
            f64::INFINITY
        }
    }

    fn res_k(&self, sp: &Spectral, r: f64) -> f64 {
        r - self.r_from_k_equation(sp)
    }

    fn res_r(&self, sp: &Spectral, r: f64) -> f64 {
        (self.psi_sum(r) - sp.l) / self.df
    }

    /// argmin over r ≥ d of Ω̃ at fixed ln k: the root of the r-equation,
    /// clamped at d. Infinite when the log-determinant term vanishes.
    fn r_star(&self, sp: &Spectral) -> f64 {
        let target = sp.l;
        let g = |r: f64| self.psi_sum(r) - target;
        let mut lo = self.df;
        if g(lo) <= 0.0 {
            return lo;
        }
        if target <= 0.0 || self.m == 0 {
            return f64::INFINITY;
        }
        // psi_sum(r) ≈ d m / r for large r
        let mut hi = (self.df * self.mf / target).max(2.0 * lo);
        while g(hi) > 0.0 {
            lo = hi;
            hi *= 4.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        // g is decreasing and convex: Newton from a point with g > 0 stays left
        // of the root; bisection guards the bracket.
        let mut r = lo;
        for _ in 0..200 {
            let gr = g(r);
            if gr > 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let slope = self.psi_sum_deriv(r);
            let mut next = r - gr / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 1e-15 * r || hi - lo <= 1e-15 * hi {
                return next;
            }
            r = next;
        }
        r
    }

    /// ln k at which the k-equation gives r = `r_target`, if it exists.
    fn t_for_k_equation(&self, r_target: f64) -> Option<f64> {
        // r = m(d − S)/S  ⇔  S = m d/(m + r)
        let s_target = self.mf * self.df / (self.mf + r_target);
        let s_max = (self.d - self.zeros) as f64;
        if self.m == 0 || s_target >= s_max || self.nxi.is_empty() {
            return None;
        }
        let mut lo = K_MIN.ln();
        if self.spectral(lo).s >= s_target {
            return None;
        }
        let mut hi = self.t_ref();
        while self.spectral(hi).s < s_target {
            lo = hi;
            hi += 10.0;
            if hi > 700.0 {
                return None;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..200 {
            let sp = self.spectral(t);
            let f = sp.s - s_target;
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let mut next = t - f / sp.ds;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-14 * t.abs().max(1.0) || hi - lo <= 1e-14 * hi.abs().max(1.0)
            {
                return Some(next);
            }
            t = next;
        }
        Some(t)
    }

    /// Damped alternation between the two stationarity equations.
    fn alternate(&self, t0: f64) -> Option<(f64, f64)> {
        let t_floor = K_MIN.ln();
        let mut t = t0;
        let mut r = self.df + 1.0;
        for _ in 0..ALTERNATION_MAX_ITER {
            let sp = self.spectral(t);
            let r_new = self.r_from_k_equation(&sp).max(self.df);
            if !r_new.is_finite() || r_new > R_DIVERGED {
                return None;
            }
            let t_new = t + ALTERNATION_DAMPING * self.res_r(&sp, r_new);
            if !t_new.is_finite() || t_new < t_floor || t_new > 700.0 {
                return None;
            }
            let dk = (t_new - t).exp_m1().abs();
            let dr = (r_new - r).abs() / r;
            t = t_new;
            r = r_new;
            if dk < ALTERNATION_TOL && dr < ALTERNATION_TOL {
                return Some((t, r));
            }
        }
        None
    }

    /// Newton iteration on (res_k, res_r) in (ln k, r). Returns a point with
    /// r > d where both residuals vanish to working precision.
    fn polish(&self, t0: f64, r0: f64) -> Option<(f64, f64)> {
        let merit = |sp: &Spectral, t: f64, r: f64| {
            let _ = t;
            let a = self.res_k(sp, r) / r;
            let b = self.res_r(sp, r);
            a * a + b * b
        };
        let mut t = t0;
        let mut r = r0.max(self.df * (1.0 + 1e-9));
        for _ in 0..100 {
            let sp = self.spectral(t);
            let fk = self.res_k(&sp, r);
            let fr = self.res_r(&sp, r);
            if !fk.is_finite() || !fr.is_finite() {
                return None;
            }
            if fk.abs() <= 1e-13 * r && fr.abs() <= 1e-14 {
                break;
            }
            // ∂res_k/∂t = m d S'/S², ∂res_k/∂r = 1, ∂res_r/∂t = −S/d, ∂res_r/∂r = psi_sum'/d
            let j11 = self.mf * self.df * sp.ds / (sp.s * sp.s);
            let j12 = 1.0;
            let j21 = -sp.s / self.df;
            let j22 = self.psi_sum_deriv(r) / self.df;
            let det = j11 * j22 - j12 * j21;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let dt = (fk * j22 - j12 * fr) / det;
            let dr = (j11 * fr - j21 * fk) / det;
            let current = merit(&sp, t, r);
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let tn = t - step * dt;
                let rn = r - step * dr;
                if rn > self.df && tn.is_finite() && tn > K_MIN.ln() {
                    let spn = self.spectral(tn);
                    let mn = merit(&spn, tn, rn);
                    if mn.is_finite() && (mn < current || step < 1e-6) {
                        t = tn;
                        r = rn;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let sp = self.spectral(t);
        let fk = self.res_k(&sp, r);
        let fr = self.res_r(&sp, r);
        if fk.abs() <= 1e-9 * r && fr.abs() <= 1e-9 && r > self.df {
            Some((t, r))
        } else {
            None
        }
    }

    /// min over r ≥ d of Ω̃ at ln k = t, with the minimizing r.
    fn profile(&self, t: f64) -> (f64, f64) {
        let sp = self.spectral(t);
        let r = self.r_star(&sp);
        if r.is_finite() {
            (self.value_with(&sp, t, r), r)
        } else {
            (f64::NEG_INFINITY, r)
        }
    }

    /// Local minima of the profile objective over a logarithmic k scan.
    fn profile_minima(&self, t_hi_cap: Option<f64>) -> Vec<f64> {
        let step = std::f64::consts::LN_10 / 4.0;
        let t_ref = self.t_ref();
        let t_floor = K_MIN.ln();
        let mut ts: Vec<f64> = (-24..=16).map(|i| t_ref + i as f64 * step).collect();
        if let Some(cap) = t_hi_cap {
            ts.retain(|&t| t <= cap);
            ts.push(cap);
        }
        ts.retain(|&t| t >= t_floor);
        if ts.len() < 3 {
            return Vec::new();
        }
        let mut vals: Vec<f64> = ts.iter().map(|&t| self.profile(t).0).collect();
        // extend the scan while the minimum sits on an edge
        let t_top = t_ref + 12.0 * std::f64::consts::LN_10;
        while t_hi_cap.is_none() {
            let last = vals.len() - 1;
            if vals[last] < vals[last - 1] && ts[last] < t_top {
                let t = ts[last] + step;
                ts.push(t);
                vals.push(self.profile(t).0);
            } else {
                break;
            }
        }
        while vals[0] < vals[1] && ts[0] - step >= t_floor {
            let t = ts[0] - step;
            ts.insert(0, t);
            vals.insert(0, self.profile(t).0);
        }
        let mut minima = Vec::new();
        for i in 1..ts.len() - 1 {
            if vals[i].is_finite() && vals[i] <= vals[i - 1] && vals[i] < vals[i + 1] {
                minima.push(self.golden(ts[i - 1], ts[i + 1]));
            }
        }
        minima
    }

    fn golden(&self, mut a: f64, mut b: f64) -> f64 {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut e = a + inv_phi * (b - a);
        let mut fc = self.profile(c).0;
        let mut fe = self.profile(e).0;
        while b - a > 1e-7 {
            if fc < fe {
                b = e;
                e = c;
                fe = fc;
                c = b - inv_phi * (b - a);
                fc = self.profile(c).0;
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + inv_phi * (b - a);
                fe = self.profile(e).0;
            }
        }
        0.5 * (a + b)
    }
}

fn check_args(stats: &ClassSufficientStats, k: f64, r: f64) -> Result<()> {
    let d = stats.dim() as f64;
    if !(k > 0.0 && k.is_finite()) {
        return Err(domain(
            "evidence",
            format!("k must be positive and finite, got {k}"),
        ));
    }
    if !(r > d - 1.0 && r.is_finite()) {
        return Err(domain(
            "evidence",
            format!("r must exceed d - 1 = {}, got {r}", d - 1.0),
        ));
    }
    Ok(())
}

/// Reduced objective Ω̃_z(k, r) with every (k, r)-independent term dropped.
pub fn per_class_objective(
    stats: &ClassSufficientStats,
    k: f64,
    r: f64,
    variant: Variant,
) -> Result<f64> {
    check_args(stats, k, r)?;
    Ok(Profile::new(stats, variant).value(k.ln(), r))
}

/// Stationarity residuals (res_k, res_r).
///
/// res_k = r − m T/(d − T) with T = Σ (n k ξ_i + 1)⁻¹ and
/// res_r = (1/d) Σ_j [ψ((r+m−j+1)/2) − ψ((r−j+1)/2)] − (1/d) Σ ln(n k ξ_i + 1).
/// They relate to the gradient by ∂Ω̃/∂r = −(d/2) res_r and
/// k ∂Ω̃/∂k = ((d − T)/2) res_k. res_k is −∞ when every eigenvalue is zero.
pub fn stationarity_residuals(
    stats: &ClassSufficientStats,
    k: f64,
    r: f64,
    variant: Variant,
) -> Result<(f64, f64)> {
    check_args(stats, k, r)?;
    let p = Profile::new(stats, variant);
    let sp = p.spectral(k.ln());
    Ok((p.res_k(&sp, r), p.res_r(&sp, r)))
}

/// Mean-prior precision γ₀ = d/‖X̂‖², with the degenerate-mean cap. The flag
/// reports whether the cap was applied.
pub fn gamma0_with_flag(stats: &ClassSufficientStats) -> (f64, bool) {
    let d = stats.dim() as f64;
    let sq = stats.mean.norm_squared();
    if sq < DEGENERATE_MEAN * d {
        (d / (DEGENERATE_MEAN * d), true)
    } else {
        (d / sq, false)
    }
}

pub fn gamma0(stats: &ClassSufficientStats) -> f64 {
    gamma0_with_flag(stats).0
}

/// −ln Ψ_z with every constant restored.
///
/// For variant B this is the full −ln Ψ_z at the given γ₀. For variant A the
/// divergent factor (γ_1z)^{d/2} of the flat-prior limit is divided out, so the
/// value is −ln lim_{γ₁→0} Ψ_z γ₁^{−d/2}; `gamma0` is ignored.
pub fn neg_log_psi(
    stats: &ClassSufficientStats,
    k: f64,
    r: f64,
    variant: Variant,
    gamma0: f64,
) -> Result<f64> {
    check_args(stats, k, r)?;
    let p = Profile::new(stats, variant);
    let mut v =
        p.value(k.ln(), r) - 0.5 * p.df * p.mf * std::f64::consts::LN_2 + 0.5 * p.df * p.n.ln();
    if variant == Variant::B {
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(domain(
                "neg_log_psi",
                format!("gamma0 must be positive, got {gamma0}"),
            ));
        }
        v += -0.5 * p.df * gamma0.ln() + 0.5 * gamma0 * stats.mean.norm_squared();
    }
    Ok(v)
}

/// argmin over r ≥ d of Ω̃_z(k, r): the root of the r-equation, clamped at d.
pub fn solve_r_at_fixed_k(stats: &ClassSufficientStats, k: f64, variant: Variant) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(domain(
            "solve_r_at_fixed_k",
            format!("k must be positive, got {k}"),
        ));
    }
    let p = Profile::new(stats, variant);
    let r = p.r_star(&p.spectral(k.ln()));
    if r.is_finite() {
        Ok(r)
    } else {
        Err(domain(
            "solve_r_at_fixed_k",
            "objective decreases without bound in r (no spread in the class data)".to_string(),
        ))
    }
}

/// The k at which the k-equation gives r = d − 1, if such a k exists.
pub fn k_upper_limit(stats: &ClassSufficientStats, variant: Variant) -> Option<f64> {
    let p = Profile::new(stats, variant);
    p.t_for_k_equation(p.df - 1.0).map(f64::exp)
}

/// Fallback upper k: K_CEILING_FACTOR/(n ξ̄⁺).
pub fn k_ceiling(stats: &ClassSufficientStats) -> f64 {
    let p = Profile::new(stats, Variant::A);
    K_CEILING_FACTOR / (p.n * p.mean_pos)
}

/// Upper end of a k grid: [`k_upper_limit`] when it exists, otherwise [`k_ceiling`].
pub fn k_grid_max(stats: &ClassSufficientStats, variant: Variant) -> f64 {
    k_upper_limit(stats, variant).unwrap_or_else(|| k_ceiling(stats))
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    if (a.objective - b.objective).abs() >= TIE_TOLERANCE {
        return a.objective < b.objective;
    }
    if a.r != b.r {
        return a.r < b.r;
    }
    a.k < b.k
}

/// Minimizes Ω̃_z over k ≥ K_MIN, r ≥ d.
///
/// Candidates: interior fixed points of the damped alternation from each
/// multistart point, local minima of the profile min_r Ω̃ over a log-spaced k
/// scan (both polished by Newton's method), the r = d boundary point, the
/// k = K_MIN floor point and, when the objective is unbounded below, the
/// ceiling point. The candidate with the least objective wins; ties within
/// [`TIE_TOLERANCE`] go to smaller r, then smaller k.
pub fn solve_class(stats: &ClassSufficientStats, variant: Variant) -> Result<ClassSolution> {
    let p = Profile::new(stats, variant);
    if p.nxi.is_empty() || p.m == 0 {
        let k = 1.0 / (p.n * p.mean_pos);
        let r = p.df;
        let sp = p.spectral(k.ln());
        let objective = p.value_with(&sp, k.ln(), r);
        let cand = Candidate {
            k,
            r,
            objective,
            kind: CandidateKind::Degenerate,
        };
        return Ok(ClassSolution {
            k,
            r,
            objective,
            kind: CandidateKind::Degenerate,
            res_k: p.res_k(&sp, r),
            res_r: p.res_r(&sp, r),
            candidates: vec![cand],
            alternation_converged: 0,
        });
    }

    let mut candidates = Vec::new();
    let push = |t: f64, r: f64, kind: CandidateKind, out: &mut Vec<Candidate>| {
        let objective = p.value(t, r);
        if objective.is_finite() && r.is_finite() && t.is_finite() {
            out.push(Candidate {
                k: if kind == CandidateKind::Floor {
                    K_MIN
                } else {
                    t.exp()
                },
                r,
                objective,
                kind,
            });
        }
    };

    let t_ref = p.t_ref();
    let mut alternation_converged = 0;
    for f in MULTISTART {
        if let Some((t, r)) = p.alternate(t_ref + f64::ln(f)) {
            alternation_converged += 1;
            if let Some((t, r)) = p.polish(t, r) {
                push(t, r, CandidateKind::Interior, &mut candidates);
            }
        }
    }

    let unbounded = p.unbounded();
    let t_ceiling = t_ref + K_CEILING_FACTOR.ln();
    for t in p.profile_minima(unbounded.then_some(t_ceiling)) {
        let r = p.r_star(&p.spectral(t));
        if r > p.df {
            if let Some((t, r)) = p.polish(t, r) {
                push(t, r, CandidateKind::Interior, &mut candidates);
            }
        }
    }

    if let Some(t) = p.t_for_k_equation(p.df) {
        push(t, p.df, CandidateKind::Boundary, &mut candidates);
    }

    // Along r ∝ 1/k the objective tends to a finite limit as k → 0 (a fixed
    // isotropic precision), so the floor can win for near-isotropic classes.
    let t_floor = K_MIN.ln();
    let sp_floor = p.spectral(t_floor);
    let r_floor = p.r_from_k_equation(&sp_floor).max(p.df);
    push(t_floor, r_floor, CandidateKind::Floor, &mut candidates);
    push(
        t_floor,
        p.r_star(&sp_floor),
        CandidateKind::Floor,
        &mut candidates,
    );

    if unbounded {
        let (_, r) = p.profile(t_ceiling);
        push(t_ceiling, r, CandidateKind::Ceiling, &mut candidates);
    }

    let best = candidates
        .iter()
        .fold(None::<&Candidate>, |acc, c| match acc {
            Some(b) if !better(c, b) => Some(b),
            _ => Some(c),
        })
        .copied()
        .ok_or_else(|| Error::SolverFailed {
            class: 0,
            detail: "no finite candidate".into(),
        })?;
    let sp = p.spectral(best.k.ln());
    Ok(ClassSolution {
        k: best.k,
        r: best.r,
        objective: best.objective,
        kind: best.kind,
        res_k: p.res_k(&sp, best.r),
        res_r: p.res_r(&sp, best.r),
        candidates,
        alternation_converged,
    })
}

/// Solves every class: p_z = n_z/n, γ_0z per [`gamma0`] (B) or 0 (A), and
/// (k_z, r_z) from [`solve_class`].
pub fn solve_hyperparameters(
    stats_by_class: &[ClassSufficientStats],
    variant: Variant,
) -> Result<HyperParams> {
    if stats_by_class.is_empty() {
        return Err(Error::InvalidArgument("no classes".into()));
    }
    let n: usize = stats_by_class.iter().map(|s| s.n).sum();
    let c = stats_by_class.len();
    let mut hp = HyperParams {
        variant,
        p: Vec::with_capacity(c),
        k: Vec::with_capacity(c),
        r: Vec::with_capacity(c),
        gamma0: Vec::with_capacity(c),
        diagnostics: Vec::with_capacity(c),
    };
    for (z, stats) in stats_by_class.iter().enumerate() {
        let (k, r, diag) = solve_one(stats, variant).map_err(|e| match e {
            Error::SolverFailed { detail, .. } => Error::SolverFailed {
                class: z + 1,
                detail,
            },
            other => other,
        })?;
        hp.p.push(stats.n as f64 / n as f64);
        hp.k.push(k);
        hp.r.push(r);
        hp.gamma0.push(if variant == Variant::B {
            gamma0(stats)
        } else {
            0.0
        });
        hp.diagnostics.push(diag);
    }
    Ok(hp)
}

/// (k, r) and diagnostics for one class.
pub fn solve_one(
    stats: &ClassSufficientStats,
    variant: Variant,
) -> Result<(f64, f64, ClassDiagnostics)> {
    let sol = solve_class(stats, variant)?;
    let capped = variant == Variant::B && gamma0_with_flag(stats).1;
    Ok((
        sol.k,
        sol.r,
        ClassDiagnostics {
            kind: sol.kind,
            objective: sol.objective,
            res_k: sol.res_k,
            res_r: sol.res_r,
            candidates: sol.candidates.len(),
            gamma0_capped: capped,
        },
    ))
}

/// Ω̃_z at the given hyperparameters for every class.
pub fn evidence_terms(
    stats_by_class: &[ClassSufficientStats],
    hp: &HyperParams,
) -> Result<EvidenceTerms> {
    if stats_by_class.len() != hp.n_classes() {
        return Err(Error::DimensionMismatch {
            expected: hp.n_classes(),
            got: stats_by_class.len(),
        });
    }
    let per_class = stats_by_class
        .iter()
        .enumerate()
        .map(|(z, s)| per_class_objective(s, hp.k[z], hp.r[z], hp.variant))
        .collect::<Result<Vec<_>>>()?;
    let total = per_class.iter().sum();
    Ok(EvidenceTerms { per_class, total })
}

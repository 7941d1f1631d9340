//! Fitted models and the closed-form predictive probability p(y₀ | x₀, D).

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::evidence::{solve_hyperparameters, HyperParams, Variant};
use crate::numerics::log_gamma_diff;
use crate::stats::{compute_class_stats, ClassSufficientStats, LabeledDataset};

#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveDistribution {
    pub probabilities: Vec<f64>,
    pub log_scores: Vec<f64>,
}

impl PredictiveDistribution {
    fn from_log_scores(log_scores: Vec<f64>) -> Self {
        let max = log_scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        PredictiveDistribution {
            probabilities: weights.iter().map(|w| w / total).collect(),
            log_scores,
        }
    }

    /// 1-based class with the largest score; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (z, &s) in self.log_scores.iter().enumerate() {
            if s > self.log_scores[best] {
                best = z;
            }
        }
        best + 1
    }
}

/// Per-class quantities that do not depend on the query point.
#[derive(Debug, Clone, PartialEq)]
struct ClassCache {
    /// log W_z without the ln p_z term.
    log_w_base: f64,
    /// Eigenvalues of Ξ_z = n_z Ĉ_z + k_z⁻¹ I.
    xi_reg: DVector<f64>,
}

/// Sufficient statistics, hyperparameters and the cached predictive terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub stats: Vec<ClassSufficientStats>,
    pub hyper: HyperParams,
    pub label_names: Option<Vec<String>>,
    cache: Vec<ClassCache>,
}

/// Computes statistics and solves the hyperparameters.
pub fn fit(data: &LabeledDataset, variant: Variant) -> Result<FittedModel> {
    let stats = compute_class_stats(data)?;
    let hyper = solve_hyperparameters(&stats, variant)?;
    let mut model = FittedModel::from_parts(stats, hyper)?;
    model.label_names = data.label_names.clone();
    Ok(model)
}

impl FittedModel {
    /// Assembles a model from statistics and externally chosen hyperparameters.
    pub fn from_parts(stats: Vec<ClassSufficientStats>, hyper: HyperParams) -> Result<Self> {
        if stats.is_empty() {
            return Err(Error::InvalidArgument(
                "model needs at least one class".into(),
            ));
        }
        if stats.len() != hyper.n_classes() {
            return Err(Error::DimensionMismatch {
                expected: stats.len(),
                got: hyper.n_classes(),
            });
        }
        let d = stats[0].dim();
        let mut cache = Vec::with_capacity(stats.len());
        for (z, s) in stats.iter().enumerate() {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.dim(),
                });
            }
            cache.push(class_cache(s, hyper.k[z], hyper.r[z])?);
        }
        Ok(FittedModel {
            stats,
            hyper,
            label_names: None,
            cache,
        })
    }

    pub fn variant(&self) -> Variant {
        self.hyper.variant
    }

    pub fn dim(&self) -> usize {
        self.stats[0].dim()
    }

    pub fn n_classes(&self) -> usize {
        self.stats.len()
    }

    /// log W_z including ln p_z.
    pub fn log_w(&self, z: usize) -> f64 {
        self.hyper.p[z].ln() + self.cache[z].log_w_base
    }

    /// Quadratic form (x₀ − X̂_z)ᵀ Ξ_z⁻¹ (x₀ − X̂_z) through the eigenbasis of Ĉ_z.
    pub fn quadratic_form(&self, z: usize, x0: &DVector<f64>) -> f64 {
        let u = x0 - &self.stats[z].mean;
        let proj = self.stats[z].eigen.eigenvectors.tr_mul(&u);
        proj.iter()
            .zip(self.cache[z].xi_reg.iter())
            .map(|(p, l)| p * p / l)
            .sum()
    }

    fn check_query(&self, x0: &DVector<f64>) -> Result<()> {
        if x0.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x0.len(),
            });
        }
        Ok(())
    }

    /// Unnormalized log predictive score of every class.
    pub fn log_scores(&self, x0: &DVector<f64>) -> Result<Vec<f64>> {
        self.check_query(x0)?;
        Ok((0..self.n_classes())
            .map(|z| {
                let s = &self.stats[z];
                let u = x0 - &s.mean;
                log_score(
                    s.n as f64,
                    self.log_w(z),
                    self.hyper.r[z],
                    self.hyper.gamma0[z],
                    s.mean.dot(&u),
                    u.norm_squared(),
                    self.quadratic_form(z, x0),
                )
            })
            .collect())
    }

    pub fn predict(&self, x0: &DVector<f64>) -> Result<PredictiveDistribution> {
        Ok(PredictiveDistribution::from_log_scores(
            self.log_scores(x0)?,
        ))
    }

    /// 1-based predicted class; ties go to the lowest class index.
    pub fn classify(&self, x0: &DVector<f64>) -> Result<usize> {
        Ok(self.predict(x0)?.argmax())
    }
}

fn class_cache(s: &ClassSufficientStats, k: f64, r: f64) -> Result<ClassCache> {
    let n = s.n as f64;
    let xi_reg = s.eigen.eigenvalues.map(|xi| n * xi.max(0.0) + 1.0 / k);
    let log_w_base = log_w_base(s.eigenvalues(), s.n, k, r)?;
    Ok(ClassCache { log_w_base, xi_reg })
}

/// log W_z without ln p_z, from the eigenvalues of Ĉ_z.
pub(crate) fn log_w_base(eigenvalues: &[f64], n: usize, k: f64, r: f64) -> Result<f64> {
    let d = eigenvalues.len() as f64;
    let n = n as f64;
    // Σ ln(n ξ + 1/k) without losing n ξ against a large 1/k
    let log_det: f64 = eigenvalues
        .iter()
        .map(|xi| (n * k * xi.max(0.0)).ln_1p())
        .sum::<f64>()
        - d * k.ln();
    // Γ((r+n)/2)/Γ((r+n−d)/2)
    let gamma_ratio = log_gamma_diff((r + n - d) / 2.0, d / 2.0)?;
    let value = 0.5 * d * (n / (n + 1.0)).ln() + gamma_ratio - 0.5 * log_det;
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "non-finite predictive weight for k = {k}, r = {r}"
        )));
    }
    Ok(value)
}

/// Log score of one class given u = x₀ − X̂_z through X̂_z·u, ‖u‖² and the
/// quadratic form q = uᵀ Ξ_z⁻¹ u.
pub(crate) fn log_score(
    n: f64,
    log_w: f64,
    r: f64,
    gamma0: f64,
    mean_dot_u: f64,
    u_sq: f64,
    q: f64,
) -> f64 {
    let mean_term = if gamma0 == 0.0 {
        0.0
    } else {
        gamma0 / (2.0 * (n + 1.0)) * (2.0 * mean_dot_u + u_sq / (n + 1.0))
    };
    log_w - mean_term - 0.5 * (r + n) * (n / (n + 1.0) * q).ln_1p()
}

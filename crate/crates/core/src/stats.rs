//! Labeled datasets and per-class sufficient statistics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::{eig_sym_rank_bounded, SymEigen};

/// n covariate vectors in ℝ^d with labels in 1..=C.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// n × d, one sample per row.
    pub x: DMatrix<f64>,
    /// 1-based class labels.
    pub y: Vec<usize>,
    pub n_classes: usize,
    /// Original label strings, indexed by class − 1, when ingested from text.
    pub label_names: Option<Vec<String>>,
}

impl LabeledDataset {
    pub fn new(x: DMatrix<f64>, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one sample and one feature".into(),
            ));
        }
        if n_classes == 0 {
            return Err(Error::InvalidArgument(
                "dataset needs at least one class".into(),
            ));
        }
        if let Some(bad) = y.iter().find(|&&c| c == 0 || c > n_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside 1..={n_classes}"
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite covariate value".into()));
        }
        Ok(LabeledDataset {
            x,
            y,
            n_classes,
            label_names: None,
        })
    }

    pub fn with_label_names(mut self, names: Vec<String>) -> Self {
        self.label_names = Some(names);
        self
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn sample(&self, i: usize) -> DVector<f64> {
        self.x.row(i).transpose()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &c in &self.y {
            counts[c - 1] += 1;
        }
        counts
    }

    /// Indices of the samples of class `class` (1-based), in dataset order.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        self.y
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Sub-dataset of the given rows, keeping class count and label names.
    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        let d = self.dim();
        let x = DMatrix::from_fn(rows.len(), d, |i, j| self.x[(rows[i], j)]);
        LabeledDataset {
            x,
            y: rows.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
            label_names: self.label_names.clone(),
        }
    }

    /// The dataset with row `i` removed.
    pub fn without(&self, i: usize) -> LabeledDataset {
        let rows: Vec<usize> = (0..self.len()).filter(|&r| r != i).collect();
        self.subset(&rows)
    }
}

/// Count, mean X̂, covariance Ĉ (divisor n) and the cached eigendecomposition of Ĉ.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSufficientStats {
    pub n: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    /// Eigendecomposition of `cov` with rounding-level negative eigenvalues clamped to 0.
    pub eigen: SymEigen,
}

impl ClassSufficientStats {
    /// Builds the statistics from a count, mean and covariance, computing the
    /// eigendecomposition. Ĉ has rank at most n − 1, which selects the
    /// low-rank eigensolver when n ≤ d.
    pub fn from_moments(n: usize, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "class count must be positive".into(),
            ));
        }
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cov.nrows(),
            });
        }
        let mut eigen = eig_sym_rank_bounded(&cov, n - 1)?;
        eigen.clamp_nonnegative();
        Ok(ClassSufficientStats {
            n,
            mean,
            cov,
            eigen,
        })
    }

    /// Statistics of a set of sample rows.
    pub fn from_samples(samples: &[DVector<f64>]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        let d = samples[0].len();
        let mut mean = DVector::zeros(d);
        for s in samples {
            mean += s;
        }
        mean /= n as f64;
        let mut cov = DMatrix::zeros(d, d);
        for s in samples {
            let dev = s - &mean;
            cov.ger(1.0, &dev, &dev, 1.0);
        }
        cov /= n as f64;
        Self::from_moments(n, mean, cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Eigenvalues ξ₁ ≤ … ≤ ξ_d of Ĉ.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigen.eigenvalues.as_slice()
    }

    /// Statistics of the class with sample `x` removed.
    ///
    /// Uses the second-moment form S = n(Ĉ + X̂X̂ᵀ), S′ = S − xxᵀ and recomputes
    /// the eigendecomposition.
    pub fn downdate(&self, x: &DVector<f64>) -> Result<Self> {
        if self.n < 2 {
            return Err(Error::DowndateEmptiesClass);
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let n = self.n as f64;
        let n_new = n - 1.0;
        let mut second = &self.cov * n;
        second.ger(n, &self.mean, &self.mean, 1.0);
        second.ger(-1.0, x, x, 1.0);
        let mean = (&self.mean * n - x) / n_new;
        let mut cov = second / n_new;
        cov.ger(-1.0, &mean, &mean, 1.0);
        // restore exact symmetry lost to rounding
        let cov = (&cov + cov.transpose()) * 0.5;
        Self::from_moments(self.n - 1, mean, cov)
    }
}

/// Per-class statistics, index `z − 1` holding class `z`.
pub fn compute_class_stats(data: &LabeledDataset) -> Result<Vec<ClassSufficientStats>> {
    let mut groups: Vec<Vec<DVector<f64>>> = vec![Vec::new(); data.n_classes];
    for (i, &c) in data.y.iter().enumerate() {
        groups[c - 1].push(data.sample(i));
    }
    groups
        .iter()
        .enumerate()
        .map(|(z, samples)| {
            if samples.is_empty() {
                Err(Error::EmptyClass { class: z + 1 })
            } else {
                ClassSufficientStats::from_samples(samples)
            }
        })
        .collect()
}

/// Convenience wrapper for [`ClassSufficientStats::downdate`].
pub fn downdate_stats(
    stats: &ClassSufficientStats,
    x: &DVector<f64>,
) -> Result<ClassSufficientStats> {
    stats.downdate(x)
}

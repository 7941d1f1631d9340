//! Benchmark drivers: synthetic and real-data error rates, LOOCV accuracy,
//! LOOCV surfaces over (k₁, k₂) and train/validation overfitting curves.
//!
//! Every task draws from its own RNG stream keyed by task coordinates and
//! results are reduced in task order, so aggregates do not depend on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::datagen::{make_case_params, sample_dataset, stratified_split, SyntheticCaseSpec};
use crate::error::{Error, Result};
use crate::evidence::{
    gamma0, k_grid_max, solve_hyperparameters, solve_one, solve_r_at_fixed_k, CandidateKind,
    ClassDiagnostics, HyperParams, Variant,
};
use crate::numerics::{stream_id, RngStream};
use crate::predictor::{fit, log_score, log_w_base, FittedModel};
use crate::stats::{compute_class_stats, ClassSufficientStats, LabeledDataset};

/// Stream tag separating real-data splits from synthetic realizations.
const REAL_SPLIT_TAG: u64 = 0x5EA1;
/// Stream tag for overfitting-curve realizations.
const OVERFIT_TAG: u64 = 0x0F17;

/// One row of a benchmark report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    /// `case-<id>` for synthetic data, the dataset name otherwise.
    pub source: String,
    pub case_id: Option<u32>,
    pub d: usize,
    pub variant: Variant,
    /// Realizations that completed and entered the aggregates.
    pub realizations: usize,
    pub failed: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_accuracy: f64,
    /// Per class, the median of k_z and r_z over realizations.
    pub median_k: Vec<f64>,
    pub median_r: Vec<f64>,
    /// How often each solver candidate kind won, over all classes.
    pub solution_kinds: BTreeMap<String, usize>,
    /// Majority-class error on the full dataset (real data only).
    pub baseline_error: Option<f64>,
    /// Wall-clock seconds, present only when timing was requested.
    pub seconds: Option<f64>,
}

/// Error rate and fitted hyperparameters of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationOutcome {
    pub error_pct: f64,
    pub k: Vec<f64>,
    pub r: Vec<f64>,
    pub diagnostics: Vec<ClassDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBenchConfig {
    pub cases: Vec<u32>,
    pub dims: Vec<usize>,
    pub n_train_per_class: usize,
    pub n_valid_per_class: usize,
    pub realizations: usize,
    pub variants: Vec<Variant>,
    pub seed: u64,
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealBenchConfig {
    pub dataset: String,
    pub train_fraction: f64,
    pub repeats: usize,
    pub variants: Vec<Variant>,
    pub seed: u64,
    pub timings: bool,
}

/// Percentage of misclassified samples.
pub fn error_rate(model: &FittedModel, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("no samples to evaluate".into()));
    }
    let mut wrong = 0usize;
    for i in 0..data.len() {
        if model.classify(&data.sample(i))? != data.y[i] {
            wrong += 1;
        }
    }
    Ok(100.0 * wrong as f64 / data.len() as f64)
}

fn evaluate(
    train: &LabeledDataset,
    valid: &LabeledDataset,
    variant: Variant,
) -> Result<RealizationOutcome> {
    let model = fit(train, variant)?;
    Ok(RealizationOutcome {
        error_pct: error_rate(&model, valid)?,
        k: model.hyper.k.clone(),
        r: model.hyper.r.clone(),
        diagnostics: model.hyper.diagnostics.clone(),
    })
}

/// Fits and evaluates every realization of one synthetic experiment, in
/// realization order.
pub fn synthetic_realizations(
    spec: &SyntheticCaseSpec,
    realizations: usize,
    variant: Variant,
) -> Vec<Result<RealizationOutcome>> {
    (0..realizations)
        .into_par_iter()
        .map(|rep| {
            let (train, valid) = spec.realize(rep)?;
            evaluate(&train, &valid, variant)
        })
        .collect()
}

/// Sample mean and standard deviation (divisor m − 1; 0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn kind_name(kind: CandidateKind) -> String {
    match kind {
        CandidateKind::Interior => "interior",
        CandidateKind::Boundary => "boundary",
        CandidateKind::Floor => "floor",
        CandidateKind::Ceiling => "ceiling",
        CandidateKind::Degenerate => "degenerate",
        CandidateKind::Injected => "injected",
    }
    .to_string()
}

/// Reduces realization outcomes in order. Fails only if none succeeded.
fn aggregate(
    source: String,
    case_id: Option<u32>,
    d: usize,
    variant: Variant,
    outcomes: &[Result<RealizationOutcome>],
) -> Result<ExperimentResult> {
    let ok: Vec<&RealizationOutcome> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    if ok.is_empty() {
        let first = outcomes.iter().find_map(|o| o.as_ref().err().cloned());
        return Err(
            first.unwrap_or_else(|| Error::InvalidArgument("no realizations requested".into()))
        );
    }
    let errors: Vec<f64> = ok.iter().map(|o| o.error_pct).collect();
    let (mean_error, std_error) = mean_std(&errors);
    let c = ok[0].k.len();
    let median_k = (0..c)
        .map(|z| median(&ok.iter().map(|o| o.k[z]).collect::<Vec<_>>()))
        .collect();
    let median_r = (0..c)
        .map(|z| median(&ok.iter().map(|o| o.r[z]).collect::<Vec<_>>()))
        .collect();
    let mut solution_kinds = BTreeMap::new();
    for o in &ok {
        for dg in &o.diagnostics {
            *solution_kinds.entry(kind_name(dg.kind)).or_insert(0) += 1;
        }
    }
    let mean_accuracy = 100.0 - mean_error;
    debug_assert!((mean_error + mean_accuracy - 100.0).abs() < 1e-9);
    Ok(ExperimentResult {
        source,
        case_id,
        d,
        variant,
        realizations: ok.len(),
        failed: outcomes.len() - ok.len(),
        mean_error,
        std_error,
        mean_accuracy,
        median_k,
        median_r,
        solution_kinds,
        baseline_error: None,
        seconds: None,
    })
}

/// One experiment per (case, d, variant), in that nesting order.
pub fn run_synthetic_benchmark(cfg: &SyntheticBenchConfig) -> Result<Vec<ExperimentResult>> {
    if cfg.n_train_per_class == 0 || cfg.n_valid_per_class == 0 || cfg.realizations == 0 {
        return Err(Error::InvalidArgument(
            "sample sizes and realization count must be positive".into(),
        ));
    }
    let mut results = Vec::new();
    for &case_id in &cfg.cases {
        for &d in &cfg.dims {
            // reject bad (case, d) before any work
            make_case_params(case_id, d, &mut RngStream::new(cfg.seed, 0))?;
            let spec = SyntheticCaseSpec {
                case_id,
                d,
                n_train_per_class: cfg.n_train_per_class,
                n_valid_per_class: cfg.n_valid_per_class,
                seed: cfg.seed,
            };
            for &variant in &cfg.variants {
                let start = Instant::now();
                let outcomes = synthetic_realizations(&spec, cfg.realizations, variant);
                let mut res = aggregate(
                    format!("case-{case_id}"),
                    Some(case_id),
                    d,
                    variant,
                    &outcomes,
                )?;
                if cfg.timings {
                    res.seconds = Some(start.elapsed().as_secs_f64());
                }
                results.push(res);
            }
        }
    }
    Ok(results)
}

/// 100·(1 − max_z n_z/n): the error of always predicting the largest class.
pub fn majority_baseline_error(data: &LabeledDataset) -> f64 {
    let counts = data.class_counts();
    let max = counts.iter().copied().max().unwrap_or(0);
    100.0 * (1.0 - max as f64 / data.len() as f64)
}

/// Repeated stratified splits of `data`; every variant sees the same splits.
pub fn run_real_benchmark(
    data: &LabeledDataset,
    cfg: &RealBenchConfig,
) -> Result<Vec<ExperimentResult>> {
    if cfg.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be positive".into()));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "training fraction must lie in (0, 1), got {}",
            cfg.train_fraction
        )));
    }
    let baseline = majority_baseline_error(data);
    let splits: Vec<Result<(LabeledDataset, LabeledDataset)>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|rep| {
            let mut rng = RngStream::new(cfg.seed, stream_id(&[REAL_SPLIT_TAG, rep as u64]));
            stratified_split(data, cfg.train_fraction, &mut rng)
        })
        .collect();
    let mut results = Vec::new();
    for &variant in &cfg.variants {
        let start = Instant::now();
        let outcomes: Vec<Result<RealizationOutcome>> = splits
            .par_iter()
            .map(|split| {
                let (train, valid) = split.as_ref().map_err(Clone::clone)?;
                evaluate(train, valid, variant)
            })
            .collect();
        let mut res = aggregate(cfg.dataset.clone(), None, data.dim(), variant, &outcomes)?;
        res.baseline_error = Some(baseline);
        if cfg.timings {
            res.seconds = Some(start.elapsed().as_secs_f64());
        }
        results.push(res);
    }
    Ok(results)
}

/// How hyperparameters are treated inside leave-one-out folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LoocvMode {
    /// Hyperparameters come from the full data and stay fixed; only the
    /// statistics of the held-out sample's class are downdated.
    #[default]
    FixedHyper,
    /// The held-out sample's class is re-solved on its downdated statistics.
    Refit,
}

/// Result of a leave-one-out pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoocvOutcome {
    /// Fraction of evaluated folds classified correctly.
    pub accuracy: f64,
    pub evaluated: usize,
    /// Folds skipped because the held-out sample was alone in its class.
    pub skipped: usize,
}

#[derive(Debug, Clone, Copy)]
struct ClassFit {
    k: f64,
    r: f64,
    gamma0: f64,
}

fn class_fit(
    stats: &ClassSufficientStats,
    variant: Variant,
    k_fixed: Option<f64>,
) -> Result<ClassFit> {
    let (k, r) = match k_fixed {
        Some(k) => (k, solve_r_at_fixed_k(stats, k, variant)?),
        None => {
            let (k, r, _) = solve_one(stats, variant)?;
            (k, r)
        }
    };
    let gamma0 = if variant == Variant::B {
        gamma0(stats)
    } else {
        0.0
    };
    Ok(ClassFit { k, r, gamma0 })
}

fn check_loocv_input(data: &LabeledDataset) -> Result<()> {
    if data.len() < data.n_classes + 1 {
        return Err(Error::InvalidArgument(format!(
            "LOOCV needs n >= C + 1, got n = {} with C = {}",
            data.len(),
            data.n_classes
        )));
    }
    Ok(())
}

/// Leave-one-out accuracy with downdated class statistics.
///
/// For each sample i the statistics of its class are downdated and x_i is
/// classified against every class. Hyperparameters are either solved once on
/// the full data ([`LoocvMode::FixedHyper`]) or re-derived for the downdated
/// class ([`LoocvMode::Refit`]); with `k_override` the k_z are given and r_z
/// comes from the r-equation at that k on the same statistics. Folds whose
/// class would be emptied are skipped and counted.
pub fn loocv_accuracy(
    data: &LabeledDataset,
    variant: Variant,
    k_override: Option<&[f64]>,
    mode: LoocvMode,
) -> Result<LoocvOutcome> {
    check_loocv_input(data)?;
    if let Some(k) = k_override {
        if k.len() != data.n_classes {
            return Err(Error::DimensionMismatch {
                expected: data.n_classes,
                got: k.len(),
            });
        }
    }
    let stats = compute_class_stats(data)?;
    let k_for = |z: usize| k_override.map(|k| k[z]);
    let full: Vec<ClassFit> = stats
        .iter()
        .enumerate()
        .map(|(z, s)| class_fit(s, variant, k_for(z)))
        .collect::<Result<_>>()?;
    let n = data.len();
    let folds: Vec<Option<bool>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Option<bool>> {
            let z = data.y[i] - 1;
            if stats[z].n == 1 {
                return Ok(None);
            }
            let x = data.sample(i);
            let down = stats[z].downdate(&x)?;
            let fold = match mode {
                LoocvMode::FixedHyper => full[z],
                LoocvMode::Refit => class_fit(&down, variant, k_for(z))?,
            };
            let mut fold_stats = stats.clone();
            fold_stats[z] = down;
            let mut k = Vec::with_capacity(stats.len());
            let mut r = Vec::with_capacity(stats.len());
            let mut g = Vec::with_capacity(stats.len());
            for (c, f) in full.iter().enumerate() {
                let f = if c == z { &fold } else { f };
                k.push(f.k);
                r.push(f.r);
                g.push(f.gamma0);
            }
            let p = match mode {
                LoocvMode::FixedHyper => stats.iter().map(|s| s.n as f64 / n as f64).collect(),
                LoocvMode::Refit => fold_stats
                    .iter()
                    .map(|s| s.n as f64 / (n - 1) as f64)
                    .collect(),
            };
            let model =
                FittedModel::from_parts(fold_stats, HyperParams::from_parts(variant, p, k, r, g)?)?;
            Ok(Some(model.classify(&x)? == data.y[i]))
        })
        .collect::<Result<_>>()?;
    let evaluated = folds.iter().filter(|f| f.is_some()).count();
    if evaluated == 0 {
        return Err(Error::InvalidArgument(
            "every LOOCV fold empties its class".into(),
        ));
    }
    let correct = folds.iter().filter(|f| **f == Some(true)).count();
    Ok(LoocvOutcome {
        accuracy: correct as f64 / evaluated as f64,
        evaluated,
        skipped: n - evaluated,
    })
}

/// LOOCV accuracy over a G×G grid of (k₁, k₂).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracySurface {
    pub variant: Variant,
    /// k_z values, ascending: k_max,z · j/G for j = 1..G.
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    /// `accuracy[i][j]` is the accuracy at (k1[i], k2[j]).
    pub accuracy: Vec<Vec<f64>>,
    pub k_max: [f64; 2],
    /// Evidence-maximizing k_z on the full data and its fraction of k_max,z.
    pub evidence_k: [f64; 2],
    pub evidence_fraction: [f64; 2],
    pub best_accuracy: f64,
    /// Range of k_z/k_max,z over the grid cells that attain the best accuracy.
    pub best_k1_fraction: [f64; 2],
    pub best_k2_fraction: [f64; 2],
    pub mode: LoocvMode,
    pub skipped_folds: usize,
}

/// Query point projected on the eigenbasis of one class state, reusable across k.
struct Projection {
    sq: Vec<f64>,
    mean_dot_u: f64,
    u_sq: f64,
}

impl Projection {
    fn new(s: &ClassSufficientStats, x: &DVector<f64>) -> Self {
        let u = x - &s.mean;
        let proj = s.eigen.eigenvectors.tr_mul(&u);
        Projection {
            sq: proj.iter().map(|p| p * p).collect(),
            mean_dot_u: s.mean.dot(&u),
            u_sq: u.norm_squared(),
        }
    }
}

/// Everything class-dependent the grid needs at one k value.
struct GridClassTerms {
    r: f64,
    log_w_base: f64,
}

fn grid_terms(s: &ClassSufficientStats, k: f64, r: f64) -> Result<GridClassTerms> {
    Ok(GridClassTerms {
        r,
        log_w_base: log_w_base(s.eigenvalues(), s.n, k, r)?,
    })
}

fn grid_score(
    s: &ClassSufficientStats,
    t: &GridClassTerms,
    k: f64,
    ln_p: f64,
    g0: f64,
    proj: &Projection,
) -> f64 {
    let n = s.n as f64;
    let q: f64 = proj
        .sq
        .iter()
        .zip(s.eigenvalues())
        .map(|(p, xi)| p / (n * xi.max(0.0) + 1.0 / k))
        .sum();
    log_score(
        n,
        ln_p + t.log_w_base,
        t.r,
        g0,
        proj.mean_dot_u,
        proj.u_sq,
        q,
    )
}

/// LOOCV accuracy surface for a two-class dataset.
///
/// k_max,z is the k at which the k-equation reaches r = d − 1 when that point
/// exists, and 10³/(n_z ξ̄⁺_z) otherwise. r_z at each grid k comes from the
/// r-equation, on the full statistics or, under [`LoocvMode::Refit`], on the
/// downdated ones. A cell equals [`loocv_accuracy`] with the corresponding
/// `k_override` and mode.
pub fn loocv_grid(
    data: &LabeledDataset,
    g: usize,
    variant: Variant,
    mode: LoocvMode,
) -> Result<AccuracySurface> {
    if data.n_classes != 2 {
        return Err(Error::InvalidArgument(format!(
            "LOOCV surfaces need exactly 2 classes, got {}",
            data.n_classes
        )));
    }
    if g == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    check_loocv_input(data)?;
    let stats = compute_class_stats(data)?;
    let n = data.len();
    let k_max = [
        k_grid_max(&stats[0], variant),
        k_grid_max(&stats[1], variant),
    ];
    let grids: [Vec<f64>; 2] =
        [0, 1].map(|z| (1..=g).map(|j| k_max[z] * j as f64 / g as f64).collect());
    let g0 = |s: &ClassSufficientStats| {
        if variant == Variant::B {
            gamma0(s)
        } else {
            0.0
        }
    };

    // full-data r and terms per class and grid point
    let full_r: Vec<Vec<f64>> = (0..2)
        .map(|z| {
            grids[z]
                .par_iter()
                .map(|&k| solve_r_at_fixed_k(&stats[z], k, variant))
                .collect()
        })
        .collect::<Result<_>>()?;
    let full_terms: Vec<Vec<GridClassTerms>> = (0..2)
        .map(|z| {
            grids[z]
                .iter()
                .zip(&full_r[z])
                .map(|(&k, &r)| grid_terms(&stats[z], k, r))
                .collect()
        })
        .collect::<Result<_>>()?;
    let ln_p_full: Vec<f64> = stats.iter().map(|s| (s.n as f64 / n as f64).ln()).collect();

    // per fold: class of the held-out sample, its downdated state and the
    // projections of x_i on both class states
    struct Fold {
        z: usize,
        down: ClassSufficientStats,
        gamma0: f64,
        terms: Vec<GridClassTerms>,
        own: Projection,
        other: Projection,
    }
    let folds: Vec<Option<Fold>> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Option<Fold>> {
            let z = data.y[i] - 1;
            if stats[z].n == 1 {
                return Ok(None);
            }
            let x = data.sample(i);
            let down = stats[z].downdate(&x)?;
            let terms = grids[z]
                .iter()
                .zip(&full_r[z])
                .map(|(&k, &r_full)| {
                    let r = match mode {
                        LoocvMode::FixedHyper => r_full,
                        LoocvMode::Refit => solve_r_at_fixed_k(&down, k, variant)?,
                    };
                    grid_terms(&down, k, r)
                })
                .collect::<Result<_>>()?;
            let gamma0 = match mode {
                LoocvMode::FixedHyper => g0(&stats[z]),
                LoocvMode::Refit => g0(&down),
            };
            Ok(Some(Fold {
                z,
                gamma0,
                own: Projection::new(&down, &x),
                other: Projection::new(&stats[1 - z], &x),
                down,
                terms,
            }))
        })
        .collect::<Result<_>>()?;
    let evaluated = folds.iter().filter(|f| f.is_some()).count();
    if evaluated == 0 {
        return Err(Error::InvalidArgument(
            "every LOOCV fold empties its class".into(),
        ));
    }

    let accuracy: Vec<Vec<f64>> = (0..g)
        .into_par_iter()
        .map(|a| {
            (0..g)
                .map(|b| {
                    let idx = [a, b];
                    let mut correct = 0usize;
                    for f in folds.iter().flatten() {
                        let o = 1 - f.z;
                        let (ln_p_own, ln_p_other) = match mode {
                            LoocvMode::FixedHyper => (ln_p_full[f.z], ln_p_full[o]),
                            LoocvMode::Refit => (
                                (f.down.n as f64 / (n - 1) as f64).ln(),
                                (stats[o].n as f64 / (n - 1) as f64).ln(),
                            ),
                        };
                        let own = grid_score(
                            &f.down,
                            &f.terms[idx[f.z]],
                            grids[f.z][idx[f.z]],
                            ln_p_own,
                            f.gamma0,
                            &f.own,
                        );
                        let other = grid_score(
                            &stats[o],
                            &full_terms[o][idx[o]],
                            grids[o][idx[o]],
                            ln_p_other,
                            g0(&stats[o]),
                            &f.other,
                        );
                        // ties go to the lower class index
                        let predicted = if f.z == 0 { own >= other } else { own > other };
                        if predicted {
                            correct += 1;
                        }
                    }
                    correct as f64 / evaluated as f64
                })
                .collect()
        })
        .collect();

    let hp = solve_hyperparameters(&stats, variant)?;
    let best_accuracy = accuracy
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut b1 = [f64::INFINITY, f64::NEG_INFINITY];
    let mut b2 = [f64::INFINITY, f64::NEG_INFINITY];
    for (a, row) in accuracy.iter().enumerate() {
        for (b, &acc) in row.iter().enumerate() {
            if acc == best_accuracy {
                let (f1, f2) = ((a + 1) as f64 / g as f64, (b + 1) as f64 / g as f64);
                b1 = [b1[0].min(f1), b1[1].max(f1)];
                b2 = [b2[0].min(f2), b2[1].max(f2)];
            }
        }
    }
    Ok(AccuracySurface {
        variant,
        k1: grids[0].clone(),
        k2: grids[1].clone(),
        accuracy,
        k_max,
        evidence_k: [hp.k[0], hp.k[1]],
        evidence_fraction: [hp.k[0] / k_max[0], hp.k[1] / k_max[1]],
        best_accuracy,
        best_k1_fraction: b1,
        best_k2_fraction: b2,
        mode,
        skipped_folds: n - evaluated,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverfitConfig {
    pub case_id: u32,
    pub dims: Vec<usize>,
    pub n_per_class: usize,
    pub realizations: usize,
    pub variants: Vec<Variant>,
    pub seed: u64,
    pub mode: LoocvMode,
}

/// Mean accuracies (fractions in [0, 1]) at one dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverfitPoint {
    pub d: usize,
    pub variant: Variant,
    pub realizations: usize,
    pub failed: usize,
    /// In-sample accuracy of the full fit on its own training samples.
    pub train_accuracy: f64,
    /// LOOCV accuracy.
    pub validation_accuracy: f64,
    /// Accuracy of guessing uniformly, 1/C.
    pub random_guess: f64,
}

/// Training and LOOCV accuracy versus dimension for one synthetic case.
pub fn overfit_curve(cfg: &OverfitConfig) -> Result<Vec<OverfitPoint>> {
    if cfg.n_per_class < 2 || cfg.realizations == 0 {
        return Err(Error::InvalidArgument(
            "overfit curves need n_per_class >= 2 and at least one realization".into(),
        ));
    }
    let mut points = Vec::new();
    for &d in &cfg.dims {
        make_case_params(cfg.case_id, d, &mut RngStream::new(cfg.seed, 0))?;
        let datasets: Vec<Result<LabeledDataset>> = (0..cfg.realizations)
            .into_par_iter()
            .map(|rep| {
                let stream = stream_id(&[OVERFIT_TAG, cfg.case_id as u64, d as u64, rep as u64]);
                let mut rng = RngStream::new(cfg.seed, stream);
                let params = make_case_params(cfg.case_id, d, &mut rng)?;
                sample_dataset(&params, &vec![cfg.n_per_class; params.len()], &mut rng)
            })
            .collect();
        for &variant in &cfg.variants {
            let outcomes: Vec<Result<(f64, f64, usize)>> = datasets
                .par_iter()
                .map(|data| {
                    let data = data.as_ref().map_err(Clone::clone)?;
                    let model = fit(data, variant)?;
                    let train = 1.0 - error_rate(&model, data)? / 100.0;
                    let valid = loocv_accuracy(data, variant, None, cfg.mode)?;
                    Ok((train, valid.accuracy, data.n_classes))
                })
                .collect();
            let ok: Vec<&(f64, f64, usize)> =
                outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
            if ok.is_empty() {
                return Err(outcomes
                    .into_iter()
                    .find_map(|o| o.err())
                    .expect("no outcomes"));
            }
            let m = ok.len() as f64;
            points.push(OverfitPoint {
                d,
                variant,
                realizations: ok.len(),
                failed: outcomes.len() - ok.len(),
                train_accuracy: ok.iter().map(|o| o.0).sum::<f64>() / m,
                validation_accuracy: ok.iter().map(|o| o.1).sum::<f64>() / m,
                random_guess: 1.0 / ok[0].2 as f64,
            });
        }
    }
    Ok(points)
}

//! Synthetic benchmark populations, stratified splits and CSV ingestion.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::numerics::{cholesky, sample_gaussian_vector, stream_id, RngStream};
use crate::stats::LabeledDataset;

/// Mean and covariance of one class, with a factor F satisfying F Fᵀ = Σ.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassParams {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub factor: DMatrix<f64>,
}

impl ClassParams {
    /// Uses the Cholesky factor of `cov`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let factor = cholesky(&cov)?;
        Ok(ClassParams { mean, cov, factor })
    }

    /// Uses a known factor, avoiding a Cholesky factorization of an
    /// ill-conditioned product.
    pub fn with_factor(mean: DVector<f64>, factor: DMatrix<f64>) -> Self {
        let cov = &factor * factor.transpose();
        ClassParams { mean, cov, factor }
    }
}

/// One synthetic experiment: case, dimension, per-class sizes and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticCaseSpec {
    pub case_id: u32,
    pub d: usize,
    pub n_train_per_class: usize,
    pub n_valid_per_class: usize,
    pub seed: u64,
}

impl SyntheticCaseSpec {
    /// Stream for realization `rep`, independent of execution order.
    pub fn stream(&self, rep: usize) -> RngStream {
        RngStream::new(
            self.seed,
            stream_id(&[self.case_id as u64, self.d as u64, rep as u64]),
        )
    }

    /// Fresh population parameters, training set and validation set for one
    /// realization.
    pub fn realize(&self, rep: usize) -> Result<(LabeledDataset, LabeledDataset)> {
        let mut rng = self.stream(rep);
        let params = make_case_params(self.case_id, self.d, &mut rng)?;
        let train = sample_dataset(
            &params,
            &vec![self.n_train_per_class; params.len()],
            &mut rng,
        )?;
        let valid = sample_dataset(
            &params,
            &vec![self.n_valid_per_class; params.len()],
            &mut rng,
        )?;
        Ok((train, valid))
    }
}

fn diag_profile(d: usize, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| {
        let v = f((i + 1) as f64);
        v * v
    }))
}

fn unit(d: usize, i: usize, v: f64) -> DVector<f64> {
    let mut e = DVector::zeros(d);
    e[i] = v;
    e
}

fn alternate_sign(mu: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(
        mu.len(),
        |i, _| if (i + 1) % 2 == 0 { mu[i] } else { -mu[i] },
    )
}

/// Class populations of the ten synthetic benchmark cases (three classes each).
///
/// Cases 7–10 draw fresh R_z and, for 8 and 10, fresh means from `rng`.
pub fn make_case_params(case_id: u32, d: usize, rng: &mut RngStream) -> Result<Vec<ClassParams>> {
    let min_d = if matches!(case_id, 3 | 4) { 3 } else { 2 };
    if d < min_d {
        return Err(Error::InvalidCase(format!(
            "case {case_id} needs d >= {min_d}, got {d}"
        )));
    }
    let df = d as f64;
    let zero = DVector::zeros(d);
    let id = DMatrix::identity(d, d);
    let graded = || diag_profile(d, |i| 9.0 * (i - 1.0) / (df - 1.0) + 1.0);
    match case_id {
        1 => Ok(vec![
            ClassParams::new(zero.clone(), id.clone())?,
            ClassParams::new(unit(d, 0, 3.0), id.clone())?,
            ClassParams::new(unit(d, d - 1, 3.0), id)?,
        ]),
        2 => Ok(vec![
            ClassParams::new(zero.clone(), id.clone())?,
            ClassParams::new(unit(d, 0, 3.0), &id * 2.0)?,
            ClassParams::new(unit(d, d - 1, 4.0), &id * 3.0)?,
        ]),
        3 | 4 => {
            let cov = graded();
            let mu2 = DVector::from_fn(d, |k, _| {
                let i = (k + 1) as f64;
                let shape = if case_id == 3 { df - i } else { i - 1.0 };
                2.5 * (cov[(k, k)] / df).sqrt() * shape / (df / 2.0 - 1.0)
            });
            let mu3 = alternate_sign(&mu2);
            Ok(vec![
                ClassParams::new(zero, cov.clone())?,
                ClassParams::new(mu2, cov.clone())?,
                ClassParams::new(mu3, cov)?,
            ])
        }
        5 | 6 => {
            let c1 = graded();
            let c2 = diag_profile(d, |i| 9.0 * (df - i) / (df - 1.0) + 1.0);
            let c3 = diag_profile(d, |i| 9.0 * (i - (df - 1.0) / 2.0) / (df - 1.0) + 1.0);
            let (mu2, mu3) = if case_id == 5 {
                (zero.clone(), zero.clone())
            } else {
                let mu2 = DVector::from_element(d, 14.0 / df.sqrt());
                let mu3 = alternate_sign(&mu2);
                (mu2, mu3)
            };
            Ok(vec![
                ClassParams::new(zero, c1)?,
                ClassParams::new(mu2, c2)?,
                ClassParams::new(mu3, c3)?,
            ])
        }
        7..=10 => (0..3)
            .map(|_| {
                let r = DMatrix::from_fn(d, d, |_, _| rng.uniform());
                let mean = if matches!(case_id, 8 | 10) {
                    DVector::from_fn(d, |_, _| rng.standard_normal())
                } else {
                    DVector::zeros(d)
                };
                // Σ = RᵀR has factor Rᵀ; Σ = (RᵀR)² has the symmetric factor RᵀR
                let factor = if case_id <= 8 {
                    r.transpose()
                } else {
                    r.transpose() * &r
                };
                Ok(ClassParams::with_factor(mean, factor))
            })
            .collect(),
        other => Err(Error::InvalidCase(format!("unknown case id {other}"))),
    }
}

/// Two-class populations in dimension d with means 0 and (2.5, 0, …, 0) and
/// shared covariance I (uncorrelated) or the symmetric Toeplitz matrix with
/// first row (d, d−1, …, 1) (correlated).
pub fn landscape_params(d: usize, correlated: bool) -> Result<Vec<ClassParams>> {
    if d == 0 {
        return Err(Error::InvalidCase("d must be positive".into()));
    }
    let cov = if correlated {
        DMatrix::from_fn(d, d, |i, j| (d - i.abs_diff(j)) as f64)
    } else {
        DMatrix::identity(d, d)
    };
    Ok(vec![
        ClassParams::new(DVector::zeros(d), cov.clone())?,
        ClassParams::new(unit(d, 0, 2.5), cov)?,
    ])
}

/// Draws `n_per_class[z]` samples from class z + 1, grouped by class.
pub fn sample_dataset(
    params: &[ClassParams],
    n_per_class: &[usize],
    rng: &mut RngStream,
) -> Result<LabeledDataset> {
    if params.is_empty() || params.len() != n_per_class.len() {
        return Err(Error::DimensionMismatch {
            expected: params.len(),
            got: n_per_class.len(),
        });
    }
    let d = params[0].mean.len();
    let n: usize = n_per_class.iter().sum();
    let mut x = DMatrix::zeros(n, d);
    let mut y = Vec::with_capacity(n);
    let mut row = 0;
    for (z, (p, &count)) in params.iter().zip(n_per_class).enumerate() {
        for _ in 0..count {
            let v = sample_gaussian_vector(&p.mean, &p.factor, rng)?;
            x.row_mut(row).copy_from(&v.transpose());
            y.push(z + 1);
            row += 1;
        }
    }
    LabeledDataset::new(x, y, params.len())
}

/// Training fraction for [`stratified_split`]; per-class counts round up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

/// ceil(fraction · class size), with a guard against representation error
/// in products that are mathematically integral.
pub fn train_count(fraction: f64, class_size: usize) -> usize {
    ((fraction * class_size as f64 - 1e-9).ceil() as usize).clamp(1, class_size)
}

/// Per class, a uniformly random subset of ceil(fraction · n_z) samples goes to
/// the training set and the rest to validation. Both keep dataset order.
pub fn stratified_split(
    data: &LabeledDataset,
    fraction: f64,
    rng: &mut RngStream,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "training fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut in_train = vec![false; data.len()];
    for z in 1..=data.n_classes {
        let mut idx = data.class_indices(z);
        if idx.is_empty() {
            return Err(Error::EmptyClass { class: z });
        }
        let t = train_count(fraction, idx.len());
        idx.shuffle(rng);
        for &i in &idx[..t] {
            in_train[i] = true;
        }
    }
    let train: Vec<usize> = (0..data.len()).filter(|&i| in_train[i]).collect();
    let valid: Vec<usize> = (0..data.len()).filter(|&i| !in_train[i]).collect();
    Ok((data.subset(&train), data.subset(&valid)))
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    /// 0-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub delimiter: u8,
    pub header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: LabelColumn::Index(0),
            delimiter: b',',
            header: false,
        }
    }
}

/// Reads a labeled dataset. Labels are remapped to 1..=C in order of first
/// appearance and the original strings kept as label names. Parse errors carry
/// the 1-based file line and 1-based column.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let label_idx = match &opts.label_column {
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => {
            if !opts.header {
                return Err(Error::InvalidArgument(
                    "label column by name needs a header row".into(),
                ));
            }
            let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::InvalidArgument(format!("no column named {name:?}")))?
        }
    };
    let mut names: Vec<String> = Vec::new();
    let mut lookup: HashMap<String, usize> = HashMap::new();
    let mut values: Vec<f64> = Vec::new();
    let mut y = Vec::new();
    let mut width: Option<usize> = None;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse {
                row: line,
                column: 0,
                detail: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if label_idx >= record.len() {
            return Err(Error::Parse {
                row: line,
                column: label_idx + 1,
                detail: format!("label column missing (row has {} fields)", record.len()),
            });
        }
        let w = record.len() - 1;
        match width {
            None => width = Some(w),
            Some(expected) if expected != w => {
                return Err(Error::Parse {
                    row: line,
                    column: record.len(),
                    detail: format!("expected {} fields, found {}", expected + 1, record.len()),
                })
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: line,
                column: j + 1,
                detail: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: j + 1,
                    detail: format!("non-finite value {field:?}"),
                });
            }
            values.push(v);
        }
        let label = &record[label_idx];
        let next = names.len() + 1;
        let z = *lookup.entry(label.to_string()).or_insert_with(|| {
            names.push(label.to_string());
            next
        });
        y.push(z);
    }
    let d = width.unwrap_or(0);
    if y.is_empty() || d == 0 {
        return Err(Error::InvalidArgument(
            "CSV has no samples or no feature columns".into(),
        ));
    }
    let x = DMatrix::from_row_slice(y.len(), d, &values);
    Ok(LabeledDataset::new(x, y, names.len())?.with_label_names(names))
}

/// Reads an unlabeled feature matrix, one sample per row. `skip_column`
/// (0-based) is ignored when given, so labeled files can be passed as-is.
pub fn read_features<R: Read>(
    reader: R,
    delimiter: u8,
    header: bool,
    skip_column: Option<usize>,
) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut rows = 0usize;
    let mut width: Option<usize> = None;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            column: 0,
            detail: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let mut w = 0;
        for (j, field) in record.iter().enumerate() {
            if Some(j) == skip_column {
                continue;
            }
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row: line,
                    column: j + 1,
                    detail: format!("not a finite number: {field:?}"),
                })?;
            values.push(v);
            w += 1;
        }
        if *width.get_or_insert(w) != w {
            return Err(Error::Parse {
                row: line,
                column: record.len(),
                detail: format!("expected {} features, found {w}", width.unwrap_or(0)),
            });
        }
        rows += 1;
    }
    match width {
        Some(w) if w > 0 => Ok(DMatrix::from_row_slice(rows, w, &values)),
        _ => Err(Error::InvalidArgument(
            "CSV has no samples or no feature columns".into(),
        )),
    }
}

pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<LabeledDataset> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(file, opts)
}

/// Writes features followed by a `label` column, with a header row. Labels are
/// the stored names when present, otherwise the 1-based class numbers.
pub fn write_csv<W: Write>(data: &LabeledDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header: Vec<String> = (1..=data.dim()).map(|j| format!("x{j}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(io)?;
    for i in 0..data.len() {
        let mut rec: Vec<String> = data.x.row(i).iter().map(|v| v.to_string()).collect();
        let z = data.y[i];
        rec.push(match &data.label_names {
            Some(names) => names[z - 1].clone(),
            None => z.to_string(),
        });
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eig_sym;
    use proptest::prelude::*;

    #[test]
    fn case_one_parameters() {
        let mut rng = RngStream::new(1, 1);
        let p = make_case_params(1, 10, &mut rng).unwrap();
        assert_eq!(p.len(), 3);
        for c in &p {
            assert_eq!(c.cov, DMatrix::identity(10, 10));
        }
        assert_eq!(p[1].mean, unit(10, 0, 3.0));
        assert_eq!(p[2].mean, unit(10, 9, 3.0));
    }

    #[test]
    fn graded_diagonal_starts_at_one() {
        let mut rng = RngStream::new(1, 1);
        for case in [3, 4, 5, 6] {
            let p = make_case_params(case, 10, &mut rng).unwrap();
            assert_eq!(p[0].cov[(0, 0)], 1.0);
            assert_eq!(p[0].cov[(9, 9)], 100.0);
        }
    }

    #[test]
    fn case_three_and_four_means() {
        let mut rng = RngStream::new(1, 1);
        let d = 10.0;
        let p3 = make_case_params(3, 10, &mut rng).unwrap();
        // i = 1: e₁ = 1, shape (d − 1)/(d/2 − 1)
        assert!((p3[1].mean[0] - 2.5 * (1.0f64 / d).sqrt() * 9.0 / 4.0).abs() < 1e-14);
        assert!((p3[2].mean[0] + p3[1].mean[0]).abs() < 1e-15);
        assert_eq!(p3[2].mean[1], p3[1].mean[1]);
        let p4 = make_case_params(4, 10, &mut rng).unwrap();
        assert_eq!(p4[1].mean[0], 0.0);
        assert!(make_case_params(3, 2, &mut rng).is_err());
    }

    #[test]
    fn case_six_means_and_case_five_third_class() {
        let mut rng = RngStream::new(1, 1);
        let p = make_case_params(6, 16, &mut rng).unwrap();
        assert!((p[1].mean[3] - 3.5).abs() < 1e-15);
        assert!((p[2].mean[0] + 3.5).abs() < 1e-15);
        let p5 = make_case_params(5, 3, &mut rng).unwrap();
        assert_eq!(p5[2].cov[(0, 0)], 1.0);
        assert_eq!(p5[1].cov[(2, 2)], 1.0);
    }

    #[test]
    fn invalid_cases_rejected() {
        let mut rng = RngStream::new(1, 1);
        assert!(matches!(
            make_case_params(0, 10, &mut rng),
            Err(Error::InvalidCase(_))
        ));
        assert!(matches!(
            make_case_params(11, 10, &mut rng),
            Err(Error::InvalidCase(_))
        ));
        assert!(make_case_params(1, 1, &mut rng).is_err());
    }

    #[test]
    fn correlated_cases_have_a_dominant_eigenvalue() {
        for rep in 0..100u64 {
            let mut rng = RngStream::new(9, rep);
            let p = make_case_params(7, 12, &mut rng).unwrap();
            for c in &p {
                let e = eig_sym(&c.cov).unwrap();
                let ev = e.eigenvalues.as_slice();
                let top = ev[ev.len() - 1];
                assert!(ev[0] >= -1e-10 * top);
                assert!(top > 10.0 * ev[ev.len() / 2]);
            }
        }
    }

    #[test]
    fn class_counts_and_determinism() {
        let spec = SyntheticCaseSpec {
            case_id: 1,
            d: 10,
            n_train_per_class: 13,
            n_valid_per_class: 33,
            seed: 5,
        };
        let (train, valid) = spec.realize(0).unwrap();
        assert_eq!(train.len(), 39);
        assert_eq!(train.class_counts(), vec![13, 13, 13]);
        assert_eq!(valid.class_counts(), vec![33, 33, 33]);
        assert_eq!(spec.realize(0).unwrap().0, train);
        assert_ne!(spec.realize(1).unwrap().0, train);
    }

    #[test]
    fn zero_covariance_samples_the_mean() {
        let mean = DVector::from_vec(vec![1.0, 2.0]);
        let p = ClassParams::new(mean.clone(), DMatrix::zeros(2, 2)).unwrap();
        let mut rng = RngStream::new(3, 3);
        let data = sample_dataset(&[p], &[5], &mut rng).unwrap();
        for i in 0..5 {
            assert_eq!(data.sample(i), mean);
        }
    }

    #[test]
    fn sample_moments() {
        let mean = DVector::from_vec(vec![1.0, -2.0]);
        let cov = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 2.0]);
        let p = ClassParams::new(mean.clone(), cov.clone()).unwrap();
        let mut rng = RngStream::new(4, 4);
        let data = sample_dataset(&[p], &[100_000], &mut rng).unwrap();
        for j in 0..2 {
            let m = data.x.column(j).mean();
            assert!((m - mean[j]).abs() < 0.02 * cov[(j, j)].sqrt());
        }
    }

    #[test]
    fn split_counts_round_up() {
        assert_eq!(train_count(0.05, 225), 12);
        assert_eq!(train_count(0.05, 126), 7);
        assert_eq!(train_count(0.10, 50), 5);
        let y: Vec<usize> = (0..351).map(|i| if i < 225 { 1 } else { 2 }).collect();
        let data =
            LabeledDataset::new(DMatrix::from_fn(351, 2, |i, j| (i * 2 + j) as f64), y, 2).unwrap();
        let mut rng = RngStream::new(1, 0);
        let (train, valid) = stratified_split(&data, 0.05, &mut rng).unwrap();
        assert_eq!(train.class_counts(), vec![12, 7]);
        assert_eq!(valid.class_counts(), vec![213, 119]);
        assert!(stratified_split(&data, 1.0, &mut rng).is_err());
        assert!(stratified_split(&data, 0.0, &mut rng).is_err());
    }

    #[test]
    fn csv_remaps_labels() {
        let text = "1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n";
        let opts = CsvOptions {
            label_column: LabelColumn::Index(2),
            ..CsvOptions::default()
        };
        let data = read_csv(text.as_bytes(), &opts).unwrap();
        assert_eq!((data.len(), data.dim(), data.n_classes), (3, 2, 2));
        assert_eq!(data.y, vec![1, 2, 1]);
        assert_eq!(
            data.label_names,
            Some(vec!["a".to_string(), "b".to_string()])
        );
    }

    #[test]
    fn csv_reports_bad_cell() {
        let text = "f1,f2,class\n1.0,2.0,a\n3.0,oops,b\n";
        let opts = CsvOptions {
            label_column: LabelColumn::Name("class".into()),
            header: true,
            ..CsvOptions::default()
        };
        match read_csv(text.as_bytes(), &opts) {
            Err(Error::Parse {
                row,
                column,
                detail,
            }) => {
                assert_eq!((row, column), (3, 2));
                assert!(detail.contains("oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let spec = SyntheticCaseSpec {
            case_id: 2,
            d: 4,
            n_train_per_class: 3,
            n_valid_per_class: 1,
            seed: 1,
        };
        let (train, _) = spec.realize(0).unwrap();
        let mut buf = Vec::new();
        write_csv(&train, &mut buf).unwrap();
        let opts = CsvOptions {
            label_column: LabelColumn::Name("label".into()),
            header: true,
            ..CsvOptions::default()
        };
        let back = read_csv(buf.as_slice(), &opts).unwrap();
        assert_eq!(back.x, train.x);
        assert_eq!(back.y, train.y);
    }

    #[test]
    fn feature_reader_skips_label_column() {
        let m = read_features("1,a,2\n3,b,4\n".as_bytes(), b',', false, Some(1)).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        let err = read_features("1,2\n3,inf\n".as_bytes(), b',', false, None).unwrap_err();
        assert!(matches!(
            err,
            Error::Parse {
                row: 2,
                column: 2,
                ..
            }
        ));
    }

    proptest! {
        #[test]
        fn split_partitions_and_counts(sizes in proptest::collection::vec(1usize..40, 1..4), frac in 0.01f64..0.99, seed in 0u64..100) {
            let y: Vec<usize> = sizes.iter().enumerate().flat_map(|(z, &s)| std::iter::repeat_n(z + 1, s)).collect();
            let n = y.len();
            let data = LabeledDataset::new(DMatrix::from_fn(n, 1, |i, _| i as f64), y, sizes.len()).unwrap();
            let mut rng = RngStream::new(seed, 7);
            let (train, valid) = stratified_split(&data, frac, &mut rng).unwrap();
            prop_assert_eq!(train.len() + valid.len(), n);
            for (z, &s) in sizes.iter().enumerate() {
                prop_assert_eq!(train.class_counts()[z], train_count(frac, s));
            }
            let mut all: Vec<f64> = train.x.iter().chain(valid.x.iter()).cloned().collect();
            all.sort_by(f64::total_cmp);
            prop_assert_eq!(all, (0..n).map(|i| i as f64).collect::<Vec<_>>());
        }

        #[test]
        fn generated_covariances_are_psd(case in 1u32..=10, d in 3usize..12, seed in 0u64..50) {
            let mut rng = RngStream::new(seed, 0);
            for c in make_case_params(case, d, &mut rng).unwrap() {
                let e = eig_sym(&c.cov).unwrap();
                let top = e.eigenvalues.amax();
                prop_assert!(e.eigenvalues.min() >= -1e-10 * top);
            }
        }
    }
}

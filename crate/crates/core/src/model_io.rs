//! Plain-text model files.
//!
//! One `key = value` pair per line; vectors are space-separated and matrices
//! are written row-major. Floats use the shortest representation that parses
//! back to the same value, so a saved model predicts bit-for-bit like the
//! original.
//!
//! ```text
//! format = evida-model
//! version = 1
//! variant = B
//! d = 2
//! classes = 2
//! class.1.label = setosa
//! class.1.n = 13
//! class.1.mean = 0.1 -0.3
//! class.1.eigenvalues = 0.5 1.25
//! class.1.eigenvectors = 1 0 0 1
//! class.1.p = 0.5
//! class.1.k = 0.8
//! class.1.r = 4.5
//! class.1.gamma0 = 11.1
//! ...
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::evidence::{HyperParams, Variant};
use crate::numerics::SymEigen;
use crate::predictor::FittedModel;
use crate::stats::ClassSufficientStats;

const FORMAT: &str = "evida-model";
const VERSION: u32 = 1;

fn join(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn model_to_string(model: &FittedModel) -> String {
    let d = model.dim();
    let mut out = String::new();
    let _ = writeln!(out, "format = {FORMAT}");
    let _ = writeln!(out, "version = {VERSION}");
    let _ = writeln!(out, "variant = {}", model.variant());
    let _ = writeln!(out, "d = {d}");
    let _ = writeln!(out, "classes = {}", model.n_classes());
    for (z, s) in model.stats.iter().enumerate() {
        let c = z + 1;
        if let Some(name) = model.label_names.as_ref().and_then(|l| l.get(z)) {
            let _ = writeln!(out, "class.{c}.label = {name}");
        }
        let _ = writeln!(out, "class.{c}.n = {}", s.n);
        let _ = writeln!(out, "class.{c}.mean = {}", join(s.mean.iter().cloned()));
        let _ = writeln!(
            out,
            "class.{c}.eigenvalues = {}",
            join(s.eigen.eigenvalues.iter().cloned())
        );
        let v = &s.eigen.eigenvectors;
        let _ = writeln!(
            out,
            "class.{c}.eigenvectors = {}",
            join((0..d).flat_map(|i| (0..d).map(move |j| v[(i, j)])))
        );
        let _ = writeln!(out, "class.{c}.p = {}", model.hyper.p[z]);
        let _ = writeln!(out, "class.{c}.k = {}", model.hyper.k[z]);
        let _ = writeln!(out, "class.{c}.r = {}", model.hyper.r[z]);
        let _ = writeln!(out, "class.{c}.gamma0 = {}", model.hyper.gamma0[z]);
    }
    out
}

struct Entries {
    map: HashMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                row: i + 1,
                column: 1,
                detail: "expected `key = value`".into(),
            })?;
            map.insert(key.trim().to_string(), (i + 1, value.trim().to_string()));
        }
        Ok(Entries { map })
    }

    fn raw(&self, key: &str) -> Result<&(usize, String)> {
        self.map.get(key).ok_or_else(|| Error::Parse {
            row: 0,
            column: 0,
            detail: format!("missing key `{key}`"),
        })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (row, value) = self.raw(key)?;
        value.parse().map_err(|_| Error::Parse {
            row: *row,
            column: 1,
            detail: format!("bad value for `{key}`: {value:?}"),
        })
    }

    fn floats(&self, key: &str, len: usize) -> Result<Vec<f64>> {
        let (row, value) = self.raw(key)?;
        let parsed: Vec<f64> = value
            .split_whitespace()
            .enumerate()
            .map(|(j, tok)| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    row: *row,
                    column: j + 1,
                    detail: format!("bad number in `{key}`: {tok:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if parsed.len() != len {
            return Err(Error::Parse {
                row: *row,
                column: 1,
                detail: format!("`{key}` has {} values, expected {len}", parsed.len()),
            });
        }
        Ok(parsed)
    }
}

pub fn model_from_str(text: &str) -> Result<FittedModel> {
    let e = Entries::parse(text)?;
    let format: String = e.get("format")?;
    if format != FORMAT {
        return Err(Error::InvalidArgument(format!(
            "not a model file (format {format:?})"
        )));
    }
    let version: u32 = e.get("version")?;
    if version != VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported model version {version}"
        )));
    }
    let variant: Variant = {
        let (_, v) = e.raw("variant")?;
        v.parse()?
    };
    let d: usize = e.get("d")?;
    let c: usize = e.get("classes")?;
    if d == 0 || c == 0 {
        return Err(Error::InvalidArgument(
            "model needs d >= 1 and at least one class".into(),
        ));
    }
    let mut stats = Vec::with_capacity(c);
    let (mut p, mut k, mut r, mut g) = (vec![], vec![], vec![], vec![]);
    let mut labels = Vec::new();
    for z in 1..=c {
        let key = |f: &str| format!("class.{z}.{f}");
        let n: usize = e.get(&key("n"))?;
        let mean = DVector::from_vec(e.floats(&key("mean"), d)?);
        let eigenvalues = DVector::from_vec(e.floats(&key("eigenvalues"), d)?);
        let eigenvectors = DMatrix::from_row_slice(d, d, &e.floats(&key("eigenvectors"), d * d)?);
        let eigen = SymEigen {
            eigenvalues,
            eigenvectors,
        };
        let cov = eigen.reconstruct();
        stats.push(ClassSufficientStats {
            n,
            mean,
            cov,
            eigen,
        });
        p.push(e.get(&key("p"))?);
        k.push(e.get(&key("k"))?);
        r.push(e.get(&key("r"))?);
        g.push(e.get(&key("gamma0"))?);
        labels.push(e.map.get(&key("label")).map(|(_, v)| v.clone()));
    }
    let hyper = HyperParams::from_parts(variant, p, k, r, g)?;
    let mut model = FittedModel::from_parts(stats, hyper)?;
    if labels.iter().all(|l| l.is_some()) {
        model.label_names = Some(labels.into_iter().map(|l| l.unwrap_or_default()).collect());
    }
    Ok(model)
}

pub fn save_model(model: &FittedModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<FittedModel> {
    model_from_str(&std::fs::read_to_string(path)?)
}

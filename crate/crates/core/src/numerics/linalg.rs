use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues are sorted ascending; column `i` of `eigenvectors` pairs with
/// eigenvalue `i`. Each eigenvector is oriented so that its largest-magnitude
/// component is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// V diag(λ) Vᵀ.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[j];
        }
        &scaled * v.transpose()
    }

    /// Replaces eigenvalues below zero by zero.
    pub fn clamp_nonnegative(&mut self) {
        for l in self.eigenvalues.iter_mut() {
            if *l < 0.0 {
                *l = 0.0;
            }
        }
    }

    fn from_pairs(mut pairs: Vec<(f64, DVector<f64>)>) -> Self {
        let d = pairs.first().map_or(0, |p| p.1.len());
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut eigenvalues = DVector::zeros(pairs.len());
        let mut eigenvectors = DMatrix::zeros(d, pairs.len());
        for (j, (l, mut v)) in pairs.into_iter().enumerate() {
            orient(&mut v);
            eigenvalues[j] = l;
            eigenvectors.set_column(j, &v);
        }
        SymEigen {
            eigenvalues,
            eigenvectors,
        }
    }
}

fn orient(v: &mut DVector<f64>) {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn symmetrized(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(domain("eig_sym", "matrix has non-finite entries"));
    }
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > 1e-10 * scale {
                return Err(domain(
                    "eig_sym",
                    format!("matrix is not symmetric at ({i}, {j}): {a} vs {b}"),
                ));
            }
            let avg = 0.5 * (a + b);
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    Ok(out)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the off-diagonal Frobenius norm drops below 1e-12·‖M‖_F.
pub fn eig_sym(m: &DMatrix<f64>) -> Result<SymEigen> {
    let sym = symmetrized(m)?;
    let n = sym.nrows();
    // Row-major working copy.
    let mut a: Vec<f64> = (0..n * n).map(|idx| sym[(idx / n, idx % n)]).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = JACOBI_REL_TOL * frob;

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += a[p * n + q] * a[p * n + q];
            }
        }
        (2.0 * s).sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.0
                };
                if t == 0.0 {
                    continue;
                }
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let pairs = (0..n)
        .map(|j| {
            let col = DVector::from_iterator(n, (0..n).map(|k| v[k * n + j]));
            (a[j * n + j], col)
        })
        .collect();
    Ok(SymEigen::from_pairs(pairs))
}

/// Eigendecomposition of a symmetric PSD matrix whose rank is known not to
/// exceed `rank_bound`.
///
/// A pivoted Cholesky factor M ≈ L Lᵀ (d × rank_bound) is diagonalized through
/// its small Gram matrix LᵀL, and the null space is completed with Householder
/// reflections, so the cost is O(d²·rank) instead of O(d³) per sweep. Falls back
/// to [`eig_sym`] when the bound turns out to be violated.
pub fn eig_sym_rank_bounded(m: &DMatrix<f64>, rank_bound: usize) -> Result<SymEigen> {
    let d = m.nrows();
    if rank_bound >= d {
        return eig_sym(m);
    }
    let sym = symmetrized(m)?;
    let max_diag = (0..d).fold(0.0_f64, |acc, i| acc.max(sym[(i, i)]));
    if max_diag <= 0.0 {
        if max_abs(&sym) > 0.0 {
            return eig_sym(m);
        }
        return Ok(SymEigen {
            eigenvalues: DVector::zeros(d),
            eigenvectors: DMatrix::identity(d, d),
        });
    }

    // Pivoted Cholesky.
    let trace: f64 = (0..d).map(|i| sym[(i, i)].max(0.0)).sum();
    let stop = 1e-13 * trace;
    let mut diag: Vec<f64> = (0..d).map(|i| sym[(i, i)]).collect();
    let mut chosen = vec![false; d];
    let mut factor: Vec<DVector<f64>> = Vec::with_capacity(rank_bound);
    for _ in 0..rank_bound {
        let mut piv = usize::MAX;
        for i in 0..d {
            if !chosen[i] && (piv == usize::MAX || diag[i] > diag[piv]) {
                piv = i;
            }
        }
        if piv == usize::MAX || diag[piv] <= stop {
            break;
        }
        let root = diag[piv].sqrt();
        let mut col = DVector::from_iterator(d, (0..d).map(|i| sym[(i, piv)]));
        for prev in &factor {
            let w = prev[piv];
            if w != 0.0 {
                col.axpy(-w, prev, 1.0);
            }
        }
        col /= root;
        chosen[piv] = true;
        for i in 0..d {
            if chosen[i] && i != piv {
                col[i] = 0.0;
            }
        }
        col[piv] = root;
        for i in 0..d {
            if !chosen[i] {
                diag[i] -= col[i] * col[i];
            }
        }
        factor.push(col);
    }
    let residual = (0..d)
        .filter(|&i| !chosen[i])
        .fold(0.0_f64, |acc, i| acc.max(diag[i]));
    if residual > 1e-8 * max_diag {
        return eig_sym(m);
    }

    let q = factor.len();
    let l = DMatrix::from_columns(&factor);
    let gram = l.transpose() * &l;
    let small = eig_sym(&gram)?;
    let top = small.eigenvalues.iter().fold(0.0_f64, |acc, v| acc.max(*v));

    // Lift the nonzero eigenpairs, largest first.
    let mut lifted: Vec<(f64, DVector<f64>)> = Vec::with_capacity(q);
    for j in (0..q).rev() {
        let xi = small.eigenvalues[j];
        if xi <= 1e-14 * top || xi <= 0.0 {
            continue;
        }
        let w = &l * small.eigenvectors.column(j) / xi.sqrt();
        lifted.push((xi, w));
    }

    let basis = householder_complete(&lifted.iter().map(|p| p.1.clone()).collect::<Vec<_>>());
    let mut pairs = Vec::with_capacity(d);
    for (j, (xi, w)) in lifted.iter().enumerate() {
        let mut col = basis.column(j).into_owned();
        if col.dot(w) < 0.0 {
            col.neg_mut();
        }
        pairs.push((*xi, col));
    }
    for j in lifted.len()..d {
        pairs.push((0.0, basis.column(j).into_owned()));
    }
    Ok(SymEigen::from_pairs(pairs))
}

/// Full orthonormal d×d basis whose leading columns span `vectors` (in order).
fn householder_complete(vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let k = vectors.len();
    if k == 0 {
        return DMatrix::identity(0, 0);
    }
    let d = vectors[0].len();
    let mut a = DMatrix::from_columns(vectors);
    let mut reflectors: Vec<Option<DVector<f64>>> = Vec::with_capacity(k);
    for j in 0..k.min(d) {
        let x = a.view((j, j), (d - j, 1)).column(0).into_owned();
        let norm = x.norm();
        if norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let mut v = x;
        let alpha = if v[0] >= 0.0 { norm } else { -norm };
        v[0] += alpha;
        let vnorm = v.norm();
        v /= vnorm;
        // A[j.., j..] -= 2 v (vᵀ A[j.., j..])
        let mut block = a.view_mut((j, j), (d - j, k - j));
        let proj = v.transpose() * &block;
        block -= 2.0 * &v * proj;
        reflectors.push(Some(v));
    }
    let mut qm = DMatrix::<f64>::identity(d, d);
    for (j, refl) in reflectors.iter().enumerate().rev() {
        if let Some(v) = refl {
            let mut block = qm.view_mut((j, 0), (d - j, d));
            let proj = v.transpose() * &block;
            block -= 2.0 * v * proj;
        }
    }
    qm
}

/// Lower-triangular Cholesky factor of a symmetric positive semidefinite matrix.
///
/// Pivots down to −1e-8·‖M‖_max are treated as rounding noise: the column is
/// zeroed and factorization continues.
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = symmetrized(m).map_err(|e| match e {
        Error::Domain { detail, .. } => domain("cholesky", detail),
        other => other,
    })?;
    let n = sym.nrows();
    let scale = max_abs(&sym);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = sym[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot < -1e-8 * scale {
            return Err(Error::NotPsd { index: j, pivot });
        }
        if pivot <= 1e-13 * scale {
            continue;
        }
        let root = pivot.sqrt();
        l[(j, j)] = root;
        for i in (j + 1)..n {
            let mut s = sym[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / root;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    fn check_invariants(m: &DMatrix<f64>, e: &SymEigen) {
        let scale = max_abs(m).max(1.0);
        let rec = e.reconstruct();
        assert!(max_abs(&(&rec - m)) <= 1e-10 * scale, "reconstruction");
        let n = m.nrows();
        let gram = e.eigenvectors.transpose() * &e.eigenvectors;
        assert!(
            max_abs(&(gram - DMatrix::identity(n, n))) <= 1e-10,
            "orthonormality"
        );
        for w in e.eigenvalues.as_slice().windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let e = eig_sym(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 1.0, 1.0]);

        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = eig_sym(&m).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[1.0, 2.0, 3.0]);
        // axis-aligned: eigenvalue 1 ↔ e₂, 2 ↔ e₃, 3 ↔ e₁
        assert_eq!(e.eigenvectors[(1, 0)], 1.0);
        assert_eq!(e.eigenvectors[(2, 1)], 1.0);
        assert_eq!(e.eigenvectors[(0, 2)], 1.0);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = eig_sym(&m).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
        check_invariants(&m, &e);
    }

    #[test]
    fn random_symmetric_invariants() {
        for (n, seed) in [(1, 1), (5, 2), (17, 3), (40, 4)] {
            let m = random_sym(n, seed);
            let e = eig_sym(&m).unwrap();
            check_invariants(&m, &e);
            let trace = m.trace();
            assert!((e.eigenvalues.sum() - trace).abs() <= 1e-9 * trace.abs().max(1.0));
        }
    }

    #[test]
    fn deterministic() {
        let m = random_sym(12, 9);
        assert_eq!(eig_sym(&m).unwrap(), eig_sym(&m).unwrap());
    }

    #[test]
    fn rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(eig_sym(&m).is_err());
    }

    fn low_rank_psd(d: usize, rank: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = DMatrix::from_fn(d, rank, |_, _| rng.random_range(-1.0..1.0));
        &y * y.transpose() / rank as f64
    }

    #[test]
    fn rank_bounded_matches_full_jacobi() {
        for (d, rank, seed) in [(10, 3, 1), (30, 12, 2), (60, 12, 3), (25, 24, 4), (8, 1, 5)] {
            let m = low_rank_psd(d, rank, seed);
            let fast = eig_sym_rank_bounded(&m, rank).unwrap();
            let full = eig_sym(&m).unwrap();
            check_invariants(&m, &fast);
            let scale = full.eigenvalues.max();
            for (a, b) in fast.eigenvalues.iter().zip(full.eigenvalues.iter()) {
                assert!((a - b).abs() < 1e-11 * scale, "{a} vs {b}");
            }
            let nonzero = fast
                .eigenvalues
                .iter()
                .filter(|&&v| v > 1e-10 * scale)
                .count();
            assert!(nonzero <= rank);
            let zeros = fast.eigenvalues.iter().filter(|&&v| v == 0.0).count();
            assert_eq!(zeros, d - rank);
        }
    }

    #[test]
    fn rank_bounded_zero_and_fallback() {
        let e = eig_sym_rank_bounded(&DMatrix::zeros(4, 4), 1).unwrap();
        assert_eq!(e.eigenvalues.as_slice(), &[0.0; 4]);
        // bound violated: full rank matrix with a claimed rank of 2
        let m = low_rank_psd(6, 6, 7);
        let e = eig_sym_rank_bounded(&m, 2).unwrap();
        check_invariants(&m, &e);
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(l, DMatrix::identity(3, 3));
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let l = cholesky(&m).unwrap();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
    }

    #[test]
    fn cholesky_reconstructs_random_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        let m = r.transpose() * &r;
        let l = cholesky(&m).unwrap();
        let rec = &l * l.transpose();
        assert!((rec - &m).norm() <= 1e-9 * m.norm());
        for i in 0..5 {
            for j in (i + 1)..5 {
                assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn cholesky_semidefinite_and_indefinite() {
        let m = low_rank_psd(6, 2, 3);
        let l = cholesky(&m).unwrap();
        assert!((&l * l.transpose() - &m).norm() <= 1e-9 * m.norm());
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky(&bad), Err(Error::NotPsd { .. })));
    }
}

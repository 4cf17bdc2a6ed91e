//! Dense column-major matrices and the spectral primitives the rest of the
//! crate is built on: SVD, symmetric eigendecomposition, PSD square root,
//! spectral norm, condition number, rank truncation.
//!
//! Column-major storage is deliberate: every algorithm in this crate iterates
//! over columns. Values are immutable after construction and constructors
//! reject non-finite entries, so a `DenseMatrix` can be shared freely across
//! threads.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Max-abs orthogonality defect tolerated in SVD factors.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Relative elementwise symmetry tolerance (against the max-abs entry).
pub const SYMMETRY_REL_TOL: f64 = 1e-10;
/// Eigenvalues of a nominally PSD matrix below this are rejected; values in
/// `[PSD_EIG_FLOOR, 0)` are clamped to zero.
pub const PSD_EIG_FLOOR: f64 = -1e-10;

const SVD_MAX_NITER_PER_DIM: usize = 1_000;

/// Dense real matrix with column-major storage. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data. Rejects length mismatches and
    /// non-finite entries.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Self::from_inner(DMatrix::from_vec(rows, cols, data))
    }

    /// Builds a matrix from a row-per-entry nested layout (as parsed from CSV).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::InvalidArgument("ragged row lengths".into()));
        }
        Self::from_inner(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_inner(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::from_inner(DMatrix::from_diagonal(&DVector::from_row_slice(entries)))
    }

    pub(crate) fn from_inner(inner: DMatrix<f64>) -> Result<Self> {
        if inner.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix contains NaN or infinite entries".into(),
            ));
        }
        Ok(Self { inner })
    }

    pub(crate) fn inner(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    /// Entry at (i, j). Panics when out of bounds.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Column-major view of the raw data.
    pub fn data(&self) -> &[f64] {
        self.inner.as_slice()
    }

    /// Contiguous slice of column `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        let r = self.rows();
        &self.inner.as_slice()[j * r..(j + 1) * r]
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.column(j).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_column_norm(&self) -> f64 {
        (0..self.cols())
            .map(|j| self.column_norm(j))
            .fold(0.0, f64::max)
    }

    /// New matrix containing the listed columns, in the listed order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        for &j in indices {
            if j >= self.cols() {
                return Err(Error::InvalidArgument(format!(
                    "column index {} out of range for {} columns",
                    j,
                    self.cols()
                )));
            }
        }
        Ok(Self {
            inner: self.inner.select_columns(indices.iter()),
        })
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::from_inner(&self.inner * c)
    }

    /// Largest absolute entry (the max norm).
    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Inverse of a square matrix.
    pub fn try_inverse(&self) -> Result<Self> {
        if self.rows() != self.cols() {
            return Err(Error::InvalidArgument(format!(
                "cannot invert a {}x{} matrix",
                self.rows(),
                self.cols()
            )));
        }
        self.inner
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("matrix is not invertible".into()))
            .and_then(Self::from_inner)
    }

    /// Row-major nested representation, convenient for JSON reports.
    pub fn to_nested_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

impl std::ops::Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl std::ops::Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl std::ops::Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

/// Full singular value decomposition `A = U Σ Vᵀ` with `U` (d×d) and `V` (m×m)
/// orthogonal and the singular values sorted nonincreasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    u: DenseMatrix,
    sigma: Vec<f64>,
    v: DenseMatrix,
}

impl SvdFactors {
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    /// Singular values, nonincreasing, length `min(d, m)`.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.sigma.last().expect("nonempty sigma")
    }

    /// First `r` left singular vectors as a d×r matrix.
    pub fn u_prefix(&self, r: usize) -> DenseMatrix {
        DenseMatrix {
            inner: self.u.inner.columns(0, r).into_owned(),
        }
    }

    /// First `r` right singular vectors as an m×r matrix.
    pub fn v_prefix(&self, r: usize) -> DenseMatrix {
        DenseMatrix {
            inner: self.v.inner.columns(0, r).into_owned(),
        }
    }

    /// Builds factors from parts. Intended for tests that perturb a
    /// decomposition (e.g. sign flips); performs only shape checks.
    pub fn from_parts(u: DenseMatrix, sigma: Vec<f64>, v: DenseMatrix) -> Result<Self> {
        if u.rows() != u.cols() || v.rows() != v.cols() {
            return Err(Error::InvalidArgument("u and v must be square".into()));
        }
        if sigma.len() != u.rows().min(v.rows()) {
            return Err(Error::InvalidArgument(
                "sigma length must equal min(d, m)".into(),
            ));
        }
        Ok(Self { u, sigma, v })
    }
}

/// Full SVD with singular values in nonincreasing order.
///
/// The sign convention of the singular vector pairs is unconstrained;
/// downstream consumers must be sign-invariant.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactors> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("svd of an empty matrix".into()));
    }
    let (d, m) = (a.rows(), a.cols());
    let max_niter = SVD_MAX_NITER_PER_DIM * d.max(m);
    let svd = nalgebra::SVD::try_new(a.inner.clone(), true, true, f64::EPSILON, max_niter)
        .ok_or_else(|| {
            Error::Numerical(format!("svd did not converge for a {d}x{m} matrix"))
        })?;
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let u_thin = svd.u.expect("u requested");
    let v_thin = svd.v_t.expect("v requested").transpose();
    Ok(SvdFactors {
        u: DenseMatrix {
            inner: complete_orthonormal(&u_thin),
        },
        sigma,
        v: DenseMatrix {
            inner: complete_orthonormal(&v_thin),
        },
    })
}

/// Extends a matrix with orthonormal columns (n×t, t ≤ n) to a full n×n
/// orthogonal matrix whose first t columns are the input, via Householder QR.
fn complete_orthonormal(q0: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q0.nrows();
    let t = q0.ncols();
    if t == n {
        return q0.clone();
    }
    // Householder vectors of q0.
    let mut a = q0.clone();
    let mut reflectors: Vec<DVector<f64>> = Vec::with_capacity(t);
    for k in 0..t {
        let tail = n - k;
        let mut v = DVector::zeros(tail);
        for i in 0..tail {
            v[i] = a[(k + i, k)];
        }
        let norm = v.norm();
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm > 0.0 {
            v /= vnorm;
        }
        // Apply the reflector to the trailing columns of a.
        for j in k..t {
            let mut dot = 0.0;
            for i in 0..tail {
                dot += v[i] * a[(k + i, j)];
            }
            for i in 0..tail {
                a[(k + i, j)] -= 2.0 * dot * v[i];
            }
        }
        reflectors.push(v);
    }
    // Accumulate Q = H_0 ⋯ H_{t-1} applied to the identity, keeping only the
    // trailing n-t columns (the completion of the range of q0).
    let mut q = DMatrix::<f64>::identity(n, n);
    for k in (0..t).rev() {
        let v = &reflectors[k];
        let tail = n - k;
        for j in 0..n {
            let mut dot = 0.0;
            for i in 0..tail {
                dot += v[i] * q[(k + i, j)];
            }
            for i in 0..tail {
                q[(k + i, j)] -= 2.0 * dot * v[i];
            }
        }
    }
    let mut full = DMatrix::<f64>::zeros(n, n);
    full.columns_mut(0, t).copy_from(q0);
    full.columns_mut(t, n - t).copy_from(&q.columns(t, n - t));
    full
}

/// Best rank-`r` approximation `U Σʳ Vᵀ` rebuilt from the factors. The
/// discarded spectral mass is `σ_{r+1}` (zero when `r = min(d, m)`).
pub fn truncate_rank(f: &SvdFactors, r: usize) -> Result<DenseMatrix> {
    let t = f.sigma.len();
    if r < 1 || r > t {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range 1..={t}"
        )));
    }
    let ur = f.u_prefix(r);
    let vr = f.v_prefix(r);
    let mut scaled = ur.inner.clone();
    for j in 0..r {
        scaled.column_mut(j).scale_mut(f.sigma[j]);
    }
    DenseMatrix::from_inner(scaled * vr.inner.transpose())
}

/// Symmetric eigendecomposition with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

/// Eigendecomposition of a symmetric matrix. The input must be square and
/// symmetric within `SYMMETRY_REL_TOL` relative to its max-abs entry.
pub fn sym_eigen(a: &DenseMatrix) -> Result<SymEigen> {
    if a.rows() != a.cols() || a.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "symmetric eigendecomposition needs a square nonempty matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            defect = defect.max((a.get(i, j) - a.get(j, i)).abs());
        }
    }
    if defect > SYMMETRY_REL_TOL * a.max_abs() {
        return Err(Error::InvalidArgument(format!(
            "matrix is not symmetric: max asymmetry {defect:.3e}"
        )));
    }
    let sym = (&a.inner + a.inner.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SymEigen {
        values,
        vectors: DenseMatrix { inner: vectors },
    })
}

/// Relative eigenvalue floor in `psd_sqrt`: values below this fraction of
/// the largest eigenvalue are treated as exact zeros. Without the flush, a
/// rounding-level eigenvalue of ~1e-15 in an orthogonal projector would be
/// amplified to ~3e-8 by the square root.
pub const PSD_EIG_FLUSH_REL: f64 = 1e-14;

/// PSD square root `U Λ^{1/2} Uᵀ`. Eigenvalues below `PSD_EIG_FLOOR` are
/// rejected; values in `[PSD_EIG_FLOOR, 0)` are clamped to zero so that
/// rounding noise does not mask genuine indefiniteness, and nonnegative
/// values below `PSD_EIG_FLUSH_REL` of the largest are flushed to zero.
pub fn psd_sqrt(l: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = sym_eigen(l)?;
    let min_eig = eig.values[0];
    if min_eig < PSD_EIG_FLOOR {
        return Err(Error::InvalidArgument(format!(
            "matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}"
        )));
    }
    let n = l.rows();
    let flush = eig.values[n - 1].max(0.0) * PSD_EIG_FLUSH_REL;
    let mut scaled = eig.vectors.inner.clone();
    for j in 0..n {
        let lam = eig.values[j];
        let lam = if lam < flush { 0.0 } else { lam };
        scaled.column_mut(j).scale_mut(lam.sqrt());
    }
    DenseMatrix::from_inner(&scaled * eig.vectors.inner.transpose())
}

fn singular_values_only(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Err(Error::InvalidArgument(
            "singular values of an empty matrix".into(),
        ));
    }
    let max_niter = SVD_MAX_NITER_PER_DIM * a.rows().max(a.cols());
    let svd = nalgebra::SVD::try_new(a.inner.clone(), false, false, f64::EPSILON, max_niter)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "svd did not converge for a {}x{} matrix",
                a.rows(),
                a.cols()
            ))
        })?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Spectral norm σ₁.
pub fn spectral_norm(a: &DenseMatrix) -> Result<f64> {
    Ok(singular_values_only(a)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Condition number σ_max/σ_min with σ_min taken over all min(d, m) values.
pub fn cond_number(a: &DenseMatrix) -> Result<f64> {
    let sv = singular_values_only(a)?;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let floor = smax * f64::EPSILON * a.rows().max(a.cols()) as f64;
    if smin <= floor {
        return Err(Error::Singular(format!(
            "condition number undefined: sigma_min = {smin:.3e}"
        )));
    }
    Ok(smax / smin)
}

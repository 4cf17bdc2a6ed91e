//! Successive projection: greedy column selection by maximal squared norm
//! with orthogonal-projection deflation.

use nalgebra::{DMatrix, DVector};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Tie-breaking rule at the argmax. Lowest index keeps runs reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestIndex,
}

/// Knobs for the selection loop.
#[derive(Debug, Clone)]
pub struct SpaOptions {
    pub tie_break: TieBreak,
    /// Residual collapse threshold, relative to the initial max column norm.
    pub degenerate_threshold: f64,
}

impl Default for SpaOptions {
    fn default() -> Self {
        Self {
            tie_break: TieBreak::LowestIndex,
            degenerate_threshold: 1e-12,
        }
    }
}

/// Output of a selection run.
#[derive(Debug, Clone)]
pub struct ExtractionResult {
    /// Selected column indices (0-based), in pick order; pairwise distinct.
    pub indices: Vec<usize>,
    /// Norm of the winning residual column at each round; entrywise positive.
    pub step_norms: Vec<f64>,
    /// Max residual column norm after the final deflation.
    pub residual_final: f64,
}

impl ExtractionResult {
    /// Order-free comparison against a reference index set.
    pub fn matches_set(&self, truth: &[usize]) -> bool {
        let mut a = self.indices.clone();
        let mut b = truth.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// Greedy selection of `r` columns of `a` by maximal residual norm.
///
/// Each round picks the residual column of largest Euclidean norm (ties go to
/// the lowest index), then deflates the working matrix with the projector
/// `I − ttᵀ/‖t‖²`. A re-orthogonalization sweep against all previously
/// selected directions runs every round to suppress drift. Residual collapse
/// before `r` picks is an error, not a short return.
pub fn spa(a: &DenseMatrix, r: usize, opts: &SpaOptions) -> Result<ExtractionResult> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("spa on an empty matrix".into()));
    }
    let (d, m) = (a.rows(), a.cols());
    if r < 1 || r > d.min(m) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range 1..={} for a {d}x{m} matrix",
            d.min(m)
        )));
    }
    if !(opts.degenerate_threshold > 0.0) {
        return Err(Error::InvalidArgument(
            "degenerate_threshold must be positive".into(),
        ));
    }

    let mut work = a.inner().clone();
    let init_scale = a.max_column_norm();
    let floor = opts.degenerate_threshold * init_scale;

    let mut picked = vec![false; m];
    let mut indices = Vec::with_capacity(r);
    let mut step_norms = Vec::with_capacity(r);
    let mut dirs: Vec<DVector<f64>> = Vec::with_capacity(r);

    for round in 0..r {
        let TieBreak::LowestIndex = opts.tie_break;
        let mut best_j = usize::MAX;
        let mut best_n2 = f64::NEG_INFINITY;
        for j in 0..m {
            if picked[j] {
                continue;
            }
            let n2: f64 = work.column(j).iter().map(|x| x * x).sum();
            if n2 > best_n2 {
                best_n2 = n2;
                best_j = j;
            }
        }
        let norm = best_n2.max(0.0).sqrt();
        if best_j == usize::MAX || norm <= floor {
            return Err(Error::RankDeficient {
                found: round,
                requested: r,
            });
        }

        let q = work.column(best_j) / norm;
        deflate(&mut work, &q);
        dirs.push(q);
        // drift-suppression sweep over every selected direction
        for dir in &dirs {
            deflate(&mut work, dir);
        }

        picked[best_j] = true;
        indices.push(best_j);
        step_norms.push(norm);
    }

    let residual_final = (0..m)
        .map(|j| work.column(j).norm())
        .fold(0.0, f64::max);
    Ok(ExtractionResult {
        indices,
        step_norms,
        residual_final,
    })
}

/// `work ← work − q (qᵀ work)` for a unit vector `q`.
fn deflate(work: &mut DMatrix<f64>, q: &DVector<f64>) {
    let coeffs = work.tr_mul(q);
    work.ger(-1.0, q, &coeffs, 1.0);
}

/// Applies the projector `I − ttᵀ/‖t‖²` to every column of `s`.
pub fn project_out(s: &DenseMatrix, t: &[f64]) -> Result<DenseMatrix> {
    if t.len() != s.rows() {
        return Err(Error::InvalidArgument(format!(
            "direction length {} does not match {} rows",
            t.len(),
            s.rows()
        )));
    }
    let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument(
            "cannot project out a zero direction".into(),
        ));
    }
    let q = DVector::from_row_slice(t) / norm;
    let mut work = s.inner().clone();
    deflate(&mut work, &q);
    DenseMatrix::from_inner(work)
}

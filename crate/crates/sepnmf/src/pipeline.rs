//! Preconditioned selection pipeline: truncated-SVD reduction of the input
//! to the top-r right-singular row space, ellipsoidal whitening of the
//! reduced columns, then successive projection on the whitened matrix.
//! Column indices always refer to the original input.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::dense::{self, DenseMatrix, SvdFactors};
use crate::error::{Error, Result};
use crate::mvee::{self, MveeOptions, MveeSolution};
use crate::spa::{self, ExtractionResult, SpaOptions};
use crate::synth::SeparableInstance;

/// Wall-clock cost of each pipeline stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub svd: Duration,
    pub mvee: Duration,
    pub spa: Duration,
}

/// Rank-r reduction of the input.
#[derive(Debug, Clone)]
pub struct Reduced {
    /// `P = diag(σ₁…σ_r) (Vʳ)ᵀ`, r×m; shares column indexing with the input.
    pub p: DenseMatrix,
    /// Discarded spectral mass `σ_{r+1}` (zero when r = min(d, m)).
    pub sigma_tail: f64,
    /// First r left singular vectors, d×r, for lifting diagnostics.
    pub u_r: DenseMatrix,
}

/// Everything produced by one preconditioned run.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub extraction: ExtractionResult,
    /// The reduced matrix P, r×m.
    pub reduced: DenseMatrix,
    /// The whitened matrix `P° = (L*)^{1/2} P`, r×m.
    pub preconditioned: DenseMatrix,
    pub mvee: MveeSolution,
    pub sigma_tail: f64,
    pub timings: StageTimings,
}

/// Computes the SVD of `a_tilde` and reduces it to rank r.
pub fn build_reduced(a_tilde: &DenseMatrix, r: usize) -> Result<Reduced> {
    let factors = dense::svd(a_tilde)?;
    reduce_from_factors(&factors, r)
}

/// Builds `P` directly from the scaled right singular vectors, avoiding an
/// explicit d×m truncation product.
pub fn reduce_from_factors(factors: &SvdFactors, r: usize) -> Result<Reduced> {
    let t = factors.sigma().len();
    if r < 1 || r > t {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range 1..={t}"
        )));
    }
    let vr = factors.v_prefix(r);
    let mut p = vr.inner().transpose(); // r×m
    for i in 0..r {
        p.row_mut(i).scale_mut(factors.sigma()[i]);
    }
    let sigma_tail = if r < t { factors.sigma()[r] } else { 0.0 };
    Ok(Reduced {
        p: DenseMatrix::from_inner(p)?,
        sigma_tail,
        u_r: factors.u_prefix(r),
    })
}

/// Reduce, whiten with the enclosing-ellipsoid square root, then select.
pub fn preconditioned_spa(
    a_tilde: &DenseMatrix,
    r: usize,
    mvee_opts: &MveeOptions,
    spa_opts: &SpaOptions,
) -> Result<PipelineReport> {
    let start = Instant::now();
    let factors = dense::svd(a_tilde)?;
    let svd_time = start.elapsed();
    let mut report = preconditioned_spa_from_factors(&factors, r, mvee_opts, spa_opts)?;
    report.timings.svd = svd_time;
    Ok(report)
}

/// Pipeline body on a precomputed decomposition. The svd stage timing is
/// left at zero; callers that computed the factors own that cost.
pub fn preconditioned_spa_from_factors(
    factors: &SvdFactors,
    r: usize,
    mvee_opts: &MveeOptions,
    spa_opts: &SpaOptions,
) -> Result<PipelineReport> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!(
            "preconditioned selection needs rank >= 2, got {r}"
        )));
    }
    let reduced = reduce_from_factors(factors, r)?;

    let start = Instant::now();
    let mvee = mvee::solve_mvee(&reduced.p, mvee_opts)?;
    let mvee_time = start.elapsed();

    let sqrt_l = dense::psd_sqrt(&mvee.l_star)?;
    let preconditioned = &sqrt_l * &reduced.p;

    let start = Instant::now();
    let extraction = spa::spa(&preconditioned, r, spa_opts)?;
    let spa_time = start.elapsed();

    Ok(PipelineReport {
        extraction,
        reduced: reduced.p,
        preconditioned,
        mvee,
        sigma_tail: reduced.sigma_tail,
        timings: StageTimings {
            svd: Duration::ZERO,
            mvee: mvee_time,
            spa: spa_time,
        },
    })
}

/// Eigenvalues of `Gᵀ L* G`, sorted ascending. With the ground-truth reduced
/// basis this measures how well the whitening normalized the instance: all
/// ones in the noiseless case.
pub fn diagnostics_c_star(g_true: &DenseMatrix, mvee: &MveeSolution) -> Result<Vec<f64>> {
    let r = mvee.l_star.rows();
    if g_true.rows() != r || g_true.cols() != r {
        return Err(Error::InvalidArgument(format!(
            "basis must be {r}x{r}, got {}x{}",
            g_true.rows(),
            g_true.cols()
        )));
    }
    let c = &(&g_true.transpose() * &mvee.l_star) * g_true;
    let sym = DenseMatrix::from_inner((c.inner() + c.inner().transpose()) * 0.5)?;
    Ok(dense::sym_eigen(&sym)?.values)
}

/// Ground truth transported into the reduced row space.
#[derive(Debug, Clone)]
pub struct ReducedTruth {
    /// Reduced basis `G`, r×r: the image of the perturbed basis columns.
    pub g: DenseMatrix,
    /// Reduced noise `S`, r×(m−r), acting on the mixture columns.
    pub s: DenseMatrix,
}

/// Reconstructs the reduced-space ground truth `(G, S)` of a synthetic
/// instance, so that `P = (G, GK + S) Π` for the same decomposition that
/// produced `P`. The residual tail `Ã − Ãʳ` is folded into the effective
/// noise before projecting onto the top-r left singular directions.
pub fn reduced_truth(inst: &SeparableInstance, factors: &SvdFactors) -> Result<ReducedTruth> {
    let (d, m, r) = inst.dims();
    if factors.u().rows() != d || factors.v().rows() != m {
        return Err(Error::InvalidArgument(
            "decomposition does not match the instance dimensions".into(),
        ));
    }
    let t = factors.sigma().len();
    if r > t {
        return Err(Error::InvalidArgument(format!(
            "instance rank {r} exceeds min(d, m) = {t}"
        )));
    }

    // tail of the decomposition: Ã − Ãʳ rebuilt from the factors
    let tail = t - r;
    let a_tail: DMatrix<f64> = if tail == 0 {
        DMatrix::zeros(d, m)
    } else {
        let mut u_tail = factors.u().inner().columns(r, tail).into_owned();
        for j in 0..tail {
            u_tail.column_mut(j).scale_mut(factors.sigma()[r + j]);
        }
        &u_tail * factors.v().inner().columns(r, tail).transpose()
    };
    let n_eff = inst.n.inner() - a_tail;

    // un-permute the effective noise into basis and mixture blocks
    let mut inv_perm = vec![0usize; m];
    for (dest, &src) in inst.perm.iter().enumerate() {
        inv_perm[src] = dest;
    }
    let n1 = DMatrix::from_fn(d, r, |i, j| n_eff[(i, inv_perm[j])]);
    let n2 = DMatrix::from_fn(d, m - r, |i, j| n_eff[(i, inv_perm[r + j])]);

    let f_hat = inst.f.inner() + &n1;
    let n_hat = &n2 - &n1 * inst.k.inner();

    let u_r_t = factors.u().inner().columns(0, r).transpose();
    Ok(ReducedTruth {
        g: DenseMatrix::from_inner(&u_r_t * f_hat)?,
        s: DenseMatrix::from_inner(&u_r_t * n_hat)?,
    })
}

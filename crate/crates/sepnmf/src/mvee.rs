//! Origin-centered minimum-volume enclosing ellipsoid via Frank-Wolfe ascent
//! on the dual D-optimal design problem.
//!
//! The primal asks for the SPD matrix `L` maximizing `log det L` subject to
//! `pᵢᵀ L pᵢ ≤ 1` for every input point. The dual maximizes
//! `log det M(u)` with `M(u) = Σᵢ uᵢ pᵢ pᵢᵀ` over the weight simplex, and the
//! optimum satisfies `L* = (r · M(u*))⁻¹`. Each ascent step moves mass onto
//! the point of largest leverage `gᵢ = pᵢᵀ M(u)⁻¹ pᵢ` with the exact
//! line-search step size; the stopping rule `max gᵢ ≤ r (1 + tol)` doubles as
//! a feasibility certificate because `pᵢᵀ L* pᵢ = gᵢ / r`.
//!
//! Points whose leverage provably cannot reach `r` at the optimum are removed
//! from the working set as the gap shrinks (their mass is redistributed,
//! which can only increase the dual objective). This keeps the tail of the
//! ascent linear instead of sublinear. The final certificate is always

//! recomputed against the full point set, so a solution is never accepted on
//! the strength of the elimination rule alone.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::dense::{self, DenseMatrix};
use crate::error::{Error, Result};

/// Relative σ_min threshold below which a point set is treated as
/// non-spanning.
const SPAN_REL_TOL: f64 = 1e-12;

/// Solver knobs.
#[derive(Debug, Clone)]
pub struct MveeOptions {
    /// Stopping threshold on the relative gap `max gᵢ / r − 1`.
    pub tol: f64,
    /// Iteration cap; defaults to `100 · m · r` when `None`.
    pub max_iter: Option<usize>,
    /// Ridge added to `M(u)` for near-degenerate point sets. Zero disables
    /// it; when positive the degeneracy check is skipped and the result is
    /// flagged `regularized`.
    pub regularization: f64,
    /// Record `log det M(u)` once per iteration into `objective_trace`.
    pub record_objective: bool,
    /// Drop provably-interior points from the working set as the gap
    /// shrinks. On by default; disable for a pure reference ascent.
    pub eliminate_interior: bool,
}

impl Default for MveeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: None,
            regularization: 0.0,
            record_objective: false,
            eliminate_interior: true,
        }
    }
}

/// Certified solution of the ellipsoid problem.
#[derive(Debug, Clone)]
pub struct MveeSolution {
    /// The r×r SPD ellipsoid matrix `L* = (r · M(u))⁻¹`.
    pub l_star: DenseMatrix,
    /// Dual design weights on the simplex, one per input point.
    pub weights: Vec<f64>,
    /// Relative optimality certificate `max gᵢ / r − 1`, measured over the
    /// full point set at the returned weights.
    pub gap: f64,
    /// Frank-Wolfe steps taken.
    pub iterations: usize,
    /// True when the gap met the tolerance; false when the iteration cap was
    /// hit and the best iterate is returned uncertified.
    pub certified: bool,
    /// True when a ridge was added to the mass matrix.
    pub regularized: bool,
    /// Dual objective per iteration (empty unless requested).
    pub objective_trace: Vec<f64>,
}

impl MveeSolution {
    /// Max of `pᵢᵀ L* pᵢ` over the given points; at most `1 + gap`.
    pub fn max_feasibility(&self, points: &DenseMatrix) -> f64 {
        let lp = self.l_star.inner() * points.inner();
        (0..points.cols())
            .map(|i| points.inner().column(i).dot(&lp.column(i)))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One Frank-Wolfe ascent step.
#[derive(Debug, Clone)]
pub struct KhachiyanStep {
    pub weights: Vec<f64>,
    /// Index of the point with the largest leverage (lowest index on ties).
    pub chosen: usize,
    /// Step size; zero when the weights are already optimal.
    pub beta: f64,
}

/// Single exact-line-search ascent step on the dual design weights.
///
/// `minv` must be the inverse of the current mass matrix `M(u)`. Returns the
/// updated weights `(1−β)u + β e_j` for `j = argmax gᵢ` and
/// `β = (g_j − r) / (r (g_j − 1))`, or a zero step when `max gᵢ ≤ r`.
pub fn khachiyan_step(
    weights: &[f64],
    points: &DenseMatrix,
    minv: &DenseMatrix,
) -> Result<KhachiyanStep> {
    let r = points.rows();
    let m = points.cols();
    if m == 0 || r == 0 {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    if weights.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} points",
            weights.len(),
            m
        )));
    }
    if minv.rows() != r || minv.cols() != r {
        return Err(Error::InvalidArgument(format!(
            "minv must be {r}x{r}, got {}x{}",
            minv.rows(),
            minv.cols()
        )));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < -1e-12) || (sum - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(
            "weights must lie on the probability simplex".into(),
        ));
    }

    let g = leverages(minv.inner(), points.inner());
    let (j, gj) = argmax_lowest(&g, None);
    let rf = r as f64;
    if gj <= 1.0 {
        return Err(Error::Numerical(format!(
            "inconsistent dual state: max leverage {gj:.6e} ≤ 1; \
             minv does not invert the mass matrix of a spanning point set"
        )));
    }
    if gj <= rf {
        return Ok(KhachiyanStep {
            weights: weights.to_vec(),
            chosen: j,
            beta: 0.0,
        });
    }
    let beta = (gj - rf) / (rf * (gj - 1.0));
    let mut next: Vec<f64> = weights.iter().map(|w| w * (1.0 - beta)).collect();
    next[j] += beta;
    Ok(KhachiyanStep {
        weights: next,
        chosen: j,
        beta,
    })
}

/// Solves the origin-centered ellipsoid problem for the columns of `points`.
pub fn solve_mvee(points: &DenseMatrix, opts: &MveeOptions) -> Result<MveeSolution> {
    let r = points.rows();
    let m = points.cols();
    if r == 0 || m == 0 {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if opts.regularization < 0.0 {
        return Err(Error::InvalidArgument(
            "regularization must be nonnegative".into(),
        ));
    }
    let regularized = opts.regularization > 0.0;
    if !regularized {
        if m < r {
            return Err(Error::Degenerate(format!(
                "{m} points cannot span dimension {r}"
            )));
        }
        let sv = dense::svd(points)?;
        if sv.sigma_min() <= SPAN_REL_TOL * sv.sigma_max() {
            return Err(Error::Degenerate(format!(
                "points do not span dimension {r}: sigma_min = {:.3e}",
                sv.sigma_min()
            )));
        }
    }
    let max_iter = opts.max_iter.unwrap_or(100 * m * r).max(1);
    let refactor_period = 50 * r.max(1);
    let rf = r as f64;

    let p = points.inner();
    let mut u = DVector::from_element(m, 1.0 / m as f64);
    let mut active = vec![true; m];
    let mut iterations = 0usize;
    let mut trace: Vec<f64> = Vec::new();

    let factor = |u: &DVector<f64>| -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
        let mut pw = p.clone();
        for i in 0..m {
            pw.column_mut(i).scale_mut(u[i]);
        }
        let mut mass = &pw * &p.transpose();
        if regularized {
            for i in 0..r {
                mass[(i, i)] += opts.regularization;
            }
        }
        let chol = Cholesky::new(mass).ok_or_else(|| {
            Error::Degenerate("mass matrix is not positive definite".into())
        })?;
        let logdet = 2.0 * (0..r).map(|i| chol.l_dirty()[(i, i)].ln()).sum::<f64>();
        let minv = chol.inverse();
        let g = leverages(&minv, p);
        Ok((minv, g, logdet))
    };

    let (mut minv, mut g, mut logdet) = factor(&u)?;

    'outer: loop {
        loop {
            if opts.record_objective {
                trace.push(logdet);
            }
            let (j, gj) = argmax_lowest(&g, Some(&active));
            let relgap = gj / rf - 1.0;
            if relgap <= opts.tol || iterations >= max_iter {
                break;
            }

            // Eliminate points that provably carry no weight at the optimum:
            // at relative gap ε, every optimal-support point has leverage at
            // least r(1 + ε/2 − sqrt(ε(4 + ε − 4/r))/2).
            if opts.eliminate_interior && !regularized && r >= 2 {
                let eps = relgap;
                let disc = eps * (4.0 + eps - 4.0 / rf);
                let cutoff = rf * (1.0 + eps / 2.0 - disc.sqrt() / 2.0);
                let mut dropped_mass = 0.0;
                for i in 0..m {
                    if active[i] && g[i] < cutoff {
                        active[i] = false;
                        dropped_mass += u[i];
                        u[i] = 0.0;
                    }
                }
                if dropped_mass > 0.0 {
                    let total: f64 = u.iter().sum();
                    if total <= 0.0 {
                        return Err(Error::Numerical(
                            "design weights vanished during elimination".into(),
                        ));
                    }
                    u /= total;
                    // renormalization scales M by 1/total ≤ 1, so the dual
                    // objective cannot decrease
                    let (nm, ng, nl) = factor(&u)?;
                    minv = nm;
                    g = ng;
                    logdet = logdet.max(nl);
                    continue;
                }
            }

            if gj <= 1.0 {
                return Err(Error::Numerical(format!(
                    "inconsistent dual state: max leverage {gj:.6e} ≤ 1"
                )));
            }
            let beta = (gj - rf) / (rf * (gj - 1.0));
            let wv = &minv * p.column(j);
            let h = p.tr_mul(&wv);
            let ratio = beta / (1.0 - beta);
            let c = ratio / (1.0 + ratio * gj);
            for i in 0..m {
                g[i] = (g[i] - c * h[i] * h[i]) / (1.0 - beta);
            }
            minv.ger(-c, &wv, &wv, 1.0);
            minv /= 1.0 - beta;
            u *= 1.0 - beta;
            u[j] += beta;
            logdet += (rf - 1.0) * (-beta).ln_1p() + (beta * (gj - 1.0)).ln_1p();
            iterations += 1;

            if iterations % refactor_period == 0 {
                let (nm, ng, _) = factor(&u)?;
                minv = nm;
                g = ng;
            }
        }

        // Certificate against the full point set, independent of elimination.
        let (fm, fg, fl) = factor(&u)?;
        minv = fm;
        g = fg;
        logdet = logdet.max(fl);
        let (_, gmax) = argmax_lowest(&g, None);
        let gap = gmax / rf - 1.0;
        if gap <= opts.tol || iterations >= max_iter {
            let l_star = symmetrized(&minv / rf);
            return Ok(MveeSolution {
                l_star: DenseMatrix::from_inner(l_star)?,
                weights: u.iter().copied().collect(),
                gap,
                iterations,
                certified: gap <= opts.tol,
                regularized,
                objective_trace: trace,
            });
        }
        // An eliminated point re-entered the certificate; put everything
        // back and keep ascending.
        active.iter_mut().for_each(|a| *a = true);
        continue 'outer;
    }
}

/// Relative deviation of the solved ellipsoid from the closed form `(GGᵀ)⁻¹`
/// on the noiseless point set `(G, GK)` built from a nonsingular basis `g`
/// and mixing weights `k` with nonnegative entries and column sums ≤ 1.
pub fn noiseless_identity_check(g: &DenseMatrix, k: &DenseMatrix) -> Result<f64> {
    let r = g.rows();
    if r == 0 || g.cols() != r {
        return Err(Error::InvalidArgument(format!(
            "basis must be square and nonempty, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    if k.cols() > 0 {
        if k.rows() != r {
            return Err(Error::InvalidArgument(format!(
                "mixing weights have {} rows, expected {r}",
                k.rows()
            )));
        }
        for j in 0..k.cols() {
            let col = k.column(j);
            if col.iter().any(|&x| x < -1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "mixing column {j} has negative entries"
                )));
            }
            let sum: f64 = col.iter().sum();
            if sum > 1.0 + 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "mixing column {j} sums to {sum} > 1"
                )));
            }
        }
    }
    let mut cols = g.inner().clone();
    if k.cols() > 0 {
        let mixed = g.inner() * k.inner();
        cols = DMatrix::from_fn(r, r + k.cols(), |i, j| {
            if j < r {
                cols[(i, j)]
            } else {
                mixed[(i, j - r)]
            }
        });
    }
    let points = DenseMatrix::from_inner(cols)?;
    let sol = solve_mvee(&points, &MveeOptions::default())?;
    let gram = g.inner() * g.inner().transpose();
    let target = gram.try_inverse().ok_or_else(|| {
        Error::Singular("basis gram matrix is not invertible".into())
    })?;
    let target = DenseMatrix::from_inner(target)?;
    let dev = dense::spectral_norm(&(&sol.l_star - &target))?;
    Ok(dev / dense::spectral_norm(&target)?)
}

fn leverages(minv: &DMatrix<f64>, p: &DMatrix<f64>) -> DVector<f64> {
    let wp = minv * p;
    DVector::from_fn(p.ncols(), |i, _| p.column(i).dot(&wp.column(i)))
}

fn argmax_lowest(g: &DVector<f64>, active: Option<&[bool]>) -> (usize, f64) {
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..g.len() {
        if let Some(mask) = active {
            if !mask[i] {
                continue;
            }
        }
        if g[i] > best {
            best = g[i];
            best_i = i;
        }
    }
    (best_i, best)
}

fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

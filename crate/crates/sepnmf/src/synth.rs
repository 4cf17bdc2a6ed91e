//! Seeded generation of separable and near-separable instances with
//! controllable dimensions, basis condition number, mixture structure, and
//! noise. One root seed splits into independent substreams for the basis,
//! the mixtures, the permutation, and the noise, so changing the noise seed
//! never changes the geometry.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dense::{self, DenseMatrix};
use crate::error::{Error, Result};

const STREAM_BASIS: u64 = 0;
const STREAM_MIXTURE: u64 = 1;
const STREAM_PERMUTATION: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// How interior (non-vertex) columns are mixed from the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteriorModel {
    /// Uniform-on-the-simplex weights scaled by a uniform factor in (0, 1];
    /// generically strict-interior mixtures.
    Dirichlet,
    /// Averages of two random vertices; boundary mixtures with weight sum
    /// exactly one, stressing vertex selection.
    Midpoints,
}

impl std::str::FromStr for InteriorModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Self::Dirichlet),
            "midpoints" => Ok(Self::Midpoints),
            other => Err(Error::Parse(format!("unknown interior model '{other}'"))),
        }
    }
}

/// How a noise magnitude is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// Scale a dense Gaussian draw so its spectral norm equals epsilon.
    Spectral,
    /// Scale every column independently to Euclidean norm epsilon.
    Column,
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "column" => Ok(Self::Column),
            other => Err(Error::Parse(format!("unknown noise model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub epsilon: f64,
}

/// Ground-truth bundle for one experiment instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableInstance {
    /// Basis, d×r, rank r with a prescribed geometric singular spectrum.
    pub f: DenseMatrix,
    /// Mixing weights, r×(m−r); nonnegative columns with sums ≤ 1.
    pub k: DenseMatrix,
    /// Column permutation: `a[:, j] = [F | FK][:, perm[j]]`.
    pub perm: Vec<usize>,
    /// The separable matrix `F (I, K) Π`.
    pub a: DenseMatrix,
    /// Additive noise (zero for noiseless instances).
    pub n: DenseMatrix,
    /// `a + n`, the experiment input.
    pub a_tilde: DenseMatrix,
    /// Positions of the basis columns: `a[:, true_indices[j]] = f[:, j]`.
    pub true_indices: Vec<usize>,
    /// Root seed of the geometry substreams.
    pub seed: u64,
    pub noise: Option<NoiseSpec>,
    pub noise_seed: Option<u64>,
}

impl SeparableInstance {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.f.rows(), self.a.cols(), self.f.cols())
    }

    /// Construction audit: basis rank, mixture constraints, additive noise
    /// identity, and index consistency.
    pub fn audit(&self) -> Result<()> {
        let (_, _, r) = self.dims();
        let sv = dense::svd(&self.f)?;
        if !(sv.sigma_min() > 0.0) {
            return Err(Error::Degenerate("basis is rank deficient".into()));
        }
        for j in 0..self.k.cols() {
            let col = self.k.column(j);
            if col.iter().any(|&x| x < 0.0) {
                return Err(Error::Numerical(format!("mixture column {j} negative")));
            }
            let sum: f64 = col.iter().sum();
            if sum > 1.0 + 1e-15 {
                return Err(Error::Numerical(format!(
                    "mixture column {j} sums to {sum}"
                )));
            }
        }
        if &self.a + &self.n != self.a_tilde {
            return Err(Error::Numerical("a_tilde != a + n".into()));
        }
        for j in 0..r {
            if self.a.column(self.true_indices[j]) != self.f.column(j) {
                return Err(Error::Numerical(format!(
                    "true index {j} does not reproduce the basis column"
                )));
            }
        }
        Ok(())
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

/// Generates a noiseless instance satisfying the separability assumptions by
/// construction: `rank(F) = r` with condition number `kappa_target`, and
/// every mixing column nonnegative with coefficient sum at most one.
pub fn gen_instance(
    d: usize,
    m: usize,
    r: usize,
    kappa_target: f64,
    interior_model: InteriorModel,
    seed: u64,
) -> Result<SeparableInstance> {
    if r < 2 || r > d.min(m) || m <= r {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= r <= min(d, m) and m > r, got d={d} m={m} r={r}"
        )));
    }
    if !(kappa_target >= 1.0) || !kappa_target.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kappa_target must be finite and >= 1, got {kappa_target}"
        )));
    }

    // basis with prescribed geometric spectrum from 1 down to 1/kappa
    let mut rng_f = stream_rng(seed, STREAM_BASIS);
    let u = random_orthonormal(&mut rng_f, d, r);
    let v = random_orthonormal(&mut rng_f, r, r);
    let mut scaled = u;
    for j in 0..r {
        let sigma = kappa_target.powf(-(j as f64) / (r as f64 - 1.0));
        scaled.column_mut(j).scale_mut(sigma);
    }
    let f = DenseMatrix::from_inner(scaled * v.transpose())?;

    let mut rng_k = stream_rng(seed, STREAM_MIXTURE);
    let mut kdata = Vec::with_capacity(r * (m - r));
    for _ in 0..(m - r) {
        match interior_model {
            InteriorModel::Dirichlet => {
                // normalized iid Exp(1) is uniform on the simplex
                let mut w: Vec<f64> = (0..r).map(|_| rng_k.sample::<f64, _>(Exp1)).collect();
                let sum: f64 = w.iter().sum();
                let scale = (1.0 - rng_k.random::<f64>()) / sum; // (0, 1] / sum
                w.iter_mut().for_each(|x| *x *= scale);
                kdata.extend_from_slice(&w);
            }
            InteriorModel::Midpoints => {
                let a = rng_k.random_range(0..r);
                let mut b = rng_k.random_range(0..r - 1);
                if b >= a {
                    b += 1;
                }
                let mut w = vec![0.0; r];
                w[a] = 0.5;
                w[b] = 0.5;
                kdata.extend_from_slice(&w);
            }
        }
    }
    let k = DenseMatrix::from_column_major(r, m - r, kdata)?;

    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut stream_rng(seed, STREAM_PERMUTATION));

    let mixed = f.inner() * k.inner();
    let unpermuted = DMatrix::from_fn(d, m, |i, j| {
        if j < r {
            f.inner()[(i, j)]
        } else {
            mixed[(i, j - r)]
        }
    });
    let a = DenseMatrix::from_inner(DMatrix::from_fn(d, m, |i, j| unpermuted[(i, perm[j])]))?;
    let mut true_indices = vec![0usize; r];
    for (dest, &src) in perm.iter().enumerate() {
        if src < r {
            true_indices[src] = dest;
        }
    }

    let n = DenseMatrix::zeros(d, m);
    let a_tilde = a.clone();
    Ok(SeparableInstance {
        f,
        k,
        perm,
        a,
        n,
        a_tilde,
        true_indices,
        seed,
        noise: None,
        noise_seed: None,
    })
}

/// Returns a copy of the instance with fresh noise drawn from the given seed
/// and rescaled to the requested magnitude. The geometry is untouched.
pub fn add_noise(
    inst: &SeparableInstance,
    spec: &NoiseSpec,
    seed: u64,
) -> Result<SeparableInstance> {
    if spec.epsilon < 0.0 || !spec.epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be finite and >= 0, got {}",
            spec.epsilon
        )));
    }
    let (d, m, _) = inst.dims();
    let mut out = inst.clone();
    out.noise = Some(*spec);
    out.noise_seed = Some(seed);
    if spec.epsilon == 0.0 {
        out.n = DenseMatrix::zeros(d, m);
        out.a_tilde = out.a.clone();
        return Ok(out);
    }
    let mut rng = stream_rng(seed, STREAM_NOISE);
    let mut raw = DMatrix::from_fn(d, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    match spec.model {
        NoiseModel::Spectral => {
            let norm = dense::spectral_norm(&DenseMatrix::from_inner(raw.clone())?)?;
            if norm == 0.0 {
                return Err(Error::Numerical("degenerate noise draw".into()));
            }
            raw *= spec.epsilon / norm;
        }
        NoiseModel::Column => {
            for j in 0..m {
                let norm = raw.column(j).norm();
                if norm == 0.0 {
                    return Err(Error::Numerical("degenerate noise column".into()));
                }
                raw.column_mut(j).scale_mut(spec.epsilon / norm);
            }
        }
    }
    out.n = DenseMatrix::from_inner(raw)?;
    out.a_tilde = &out.a + &out.n;
    Ok(out)
}

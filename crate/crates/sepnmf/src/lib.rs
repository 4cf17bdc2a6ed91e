//! Separable nonnegative matrix factorization toolkit.
//!
//! Near-separable inputs factor as `Ã = F (I, K) Π + N`: a basis matrix
//! whose columns appear among the input columns, convex-ish mixtures of
//! them, and noise. The crate identifies the basis columns by successive
//! projection — greedy selection of the largest residual column followed by
//! orthogonal deflation — either directly (`spa`) or after a spectral
//! reduction and an ellipsoidal whitening step that normalizes the basis
//! condition number (`pspa`), which buys substantially more noise tolerance
//! on ill-conditioned instances.
//!
//! The crate also ships the supporting cast needed to certify those claims
//! at desk scale: an origin-centered minimum-volume-ellipsoid solver with a
//! duality-gap certificate, seeded synthetic instance generation, noise
//! threshold/error-bound calculators, bottleneck matching of recovered
//! columns, sweep harnesses, and file formats plus a CLI around all of it.

pub mod dense;
mod error;
pub mod io;
pub mod metrics;
pub mod mvee;
pub mod pipeline;
pub mod report;
pub mod selector;
pub mod spa;
pub mod sweep;
pub mod synth;

pub use dense::{cond_number, psd_sqrt, spectral_norm, svd, DenseMatrix, SvdFactors};
pub use error::{Error, Result};
pub use metrics::{bottleneck_match, precond_bounds, spa_bounds, BoundReport};
pub use mvee::{khachiyan_step, solve_mvee, MveeOptions, MveeSolution};
pub use pipeline::{build_reduced, preconditioned_spa, PipelineReport};
pub use selector::{EndmemberSelector, ExtractOptions, SelectorRegistry, SelectorReport};
pub use spa::{project_out, spa, ExtractionResult, SpaOptions};
pub use synth::{add_noise, gen_instance, InteriorModel, NoiseModel, NoiseSpec, SeparableInstance};

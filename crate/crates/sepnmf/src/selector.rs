//! Column-selection algorithms behind a common trait, registered by name and
//! selected at runtime (`--algo` on the CLI, config keys in the bench
//! harness).

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::mvee::MveeOptions;
use crate::pipeline::{self, PipelineReport, StageTimings};
use crate::spa::{self, ExtractionResult, SpaOptions};

/// Options shared by every selector; each implementation reads the parts it
/// needs.
#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    pub spa: SpaOptions,
    pub mvee: MveeOptions,
}

/// What a selector produced, with algorithm-specific detail when available.
#[derive(Debug, Clone)]
pub enum SelectorReport {
    Plain {
        extraction: ExtractionResult,
        timings: StageTimings,
    },
    Preconditioned(PipelineReport),
}

impl SelectorReport {
    pub fn extraction(&self) -> &ExtractionResult {
        match self {
            SelectorReport::Plain { extraction, .. } => extraction,
            SelectorReport::Preconditioned(report) => &report.extraction,
        }
    }

    pub fn pipeline(&self) -> Option<&PipelineReport> {
        match self {
            SelectorReport::Plain { .. } => None,
            SelectorReport::Preconditioned(report) => Some(report),
        }
    }

    pub fn timings(&self) -> StageTimings {
        match self {
            SelectorReport::Plain { timings, .. } => *timings,
            SelectorReport::Preconditioned(report) => report.timings,
        }
    }
}

/// A column-selection strategy for near-separable inputs.
pub trait EndmemberSelector: Send + Sync {
    /// Registry key and CLI name.
    fn name(&self) -> &'static str;

    /// Smallest rank the strategy accepts.
    fn min_rank(&self) -> usize {
        1
    }

    fn extract(
        &self,
        a_tilde: &DenseMatrix,
        r: usize,
        opts: &ExtractOptions,
    ) -> Result<SelectorReport>;
}

/// Plain successive projection on the raw input columns.
#[derive(Debug, Default)]
pub struct SpaSelector;

impl EndmemberSelector for SpaSelector {
    fn name(&self) -> &'static str {
        "spa"
    }

    fn extract(
        &self,
        a_tilde: &DenseMatrix,
        r: usize,
        opts: &ExtractOptions,
    ) -> Result<SelectorReport> {
        let start = Instant::now();
        let extraction = spa::spa(a_tilde, r, &opts.spa)?;
        let mut timings = StageTimings::default();
        timings.spa = start.elapsed();
        Ok(SelectorReport::Plain {
            extraction,
            timings,
        })
    }
}

/// Reduction + ellipsoidal whitening + successive projection.
#[derive(Debug, Default)]
pub struct PrecondSpaSelector;

impl EndmemberSelector for PrecondSpaSelector {
    fn name(&self) -> &'static str {
        "pspa"
    }

    fn min_rank(&self) -> usize {
        2
    }

    fn extract(
        &self,
        a_tilde: &DenseMatrix,
        r: usize,
        opts: &ExtractOptions,
    ) -> Result<SelectorReport> {
        let report = pipeline::preconditioned_spa(a_tilde, r, &opts.mvee, &opts.spa)?;
        Ok(SelectorReport::Preconditioned(report))
    }
}

/// Name-keyed registry of selection strategies.
pub struct SelectorRegistry {
    selectors: BTreeMap<&'static str, Arc<dyn EndmemberSelector>>,
}

impl SelectorRegistry {
    pub fn empty() -> Self {
        Self {
            selectors: BTreeMap::new(),
        }
    }

    /// Registry with the built-in strategies `spa` and `pspa`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(SpaSelector));
        reg.register(Arc::new(PrecondSpaSelector));
        reg
    }

    pub fn register(&mut self, selector: Arc<dyn EndmemberSelector>) {
        self.selectors.insert(selector.name(), selector);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn EndmemberSelector>> {
        self.selectors.get(name).cloned()
    }

    /// Resolves a name or fails with the list of known strategies.
    pub fn resolve(&self, name: &str) -> Result<Arc<dyn EndmemberSelector>> {
        self.get(name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown algorithm '{name}'; available: {}",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.selectors.keys().copied().collect()
    }
}

impl Default for SelectorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

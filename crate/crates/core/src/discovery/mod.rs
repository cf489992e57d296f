//! Causal order discovery robust to latent confounders.
//!
//! * [`hybrid_search`]: exogenous variables top-down, then sinks bottom-up.
//! * [`parcel_search`]: the hybrid search on every subset, merged by plausibility.
//! * [`parce_lingam`]: the full pipeline. One hybrid pass on all variables, a
//!   parcel search on whatever remains unordered, then connection strengths.

mod hybrid;
mod parcel;

pub use hybrid::{hybrid_search, plausibility, HybridOutcome, HybridTrace, StopReason, TraceStep};
pub use parcel::{parcel_search, subset_schedule};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::independence::{IndependenceError, IndependenceTest};
use crate::ordering::{CausalOrderingMatrix, OrderingError, PlausibilityRecord};
use crate::stats::{DataMatrix, LeastSquares, StatsError, VariableId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscoveryError {
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("subset cap must be at least 2, got {0}")]
    InvalidSubsetCap(usize),
    #[error("{d} variables exceed the subset budget of {cap}; raise the cap or reduce the variable set")]
    SubsetBudgetExceeded { d: usize, cap: usize },
    #[error("independence testing needs at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Independence(#[from] IndependenceError),
    #[error(transparent)]
    Ordering(#[from] OrderingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryConfig {
    /// Significance level for each combined independence test.
    pub alpha: f64,
    /// Largest variable count handed to the subset enumeration.
    pub subset_cap: usize,
    #[serde(skip)]
    pub least_squares: LeastSquares,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self { alpha: 0.05, subset_cap: 15, least_squares: LeastSquares::default() }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<(), DiscoveryError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(DiscoveryError::InvalidAlpha(self.alpha));
        }
        if self.subset_cap < 2 {
            return Err(DiscoveryError::InvalidSubsetCap(self.subset_cap));
        }
        Ok(())
    }
}

/// Estimated connection strength `b_ij`: the direct effect of `source` (j) on
/// `target` (i).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Strength {
    pub target: VariableId,
    pub source: VariableId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryResult {
    pub ordering: CausalOrderingMatrix,
    /// Only for targets whose ordering row is fully decided. Sorted by
    /// `(target, source)`; sources that follow the target have value 0.
    pub strengths: Vec<Strength>,
    /// Empty when the subset stage was skipped.
    pub subset_records: Vec<PlausibilityRecord>,
    /// Hybrid search on the full variable set.
    pub trace: HybridTrace,
    /// The merged ordering admits no total order.
    pub has_cycle: bool,
    pub warnings: Vec<String>,
}

impl DiscoveryResult {
    pub fn strength(&self, target: VariableId, source: VariableId) -> Option<f64> {
        self.strengths.iter().find(|s| s.target == target && s.source == source).map(|s| s.value)
    }
}

/// Full pipeline: hybrid search on all variables, subset search on the
/// variables it leaves unordered (after regressing out the head), then
/// connection strengths for every fully ordered row.
pub fn parce_lingam<T: IndependenceTest>(
    x: &DataMatrix,
    test: &T,
    config: &DiscoveryConfig,
) -> Result<DiscoveryResult, DiscoveryError> {
    let full = hybrid_search(x, test, config)?;
    let mut ordering = full.ordering.clone();
    let mut warnings = full.trace.warnings.clone();
    let mut subset_records = Vec::new();

    let remaining: Vec<usize> = (0..x.n_vars()).filter(|&p| !full.lists.contains(x.ids()[p])).collect();
    log::debug!(
        "first pass: head {:?}, tail {:?}, {} left",
        full.lists.k_head,
        full.lists.k_tail,
        remaining.len()
    );
    if remaining.len() > 2 {
        if remaining.len() > config.subset_cap {
            return Err(DiscoveryError::SubsetBudgetExceeded { d: remaining.len(), cap: config.subset_cap });
        }
        let heads: Vec<&[f64]> = full.lists.k_head.iter().filter_map(|&id| x.row_by_id(id)).collect();
        let mut rows = Vec::with_capacity(remaining.len());
        for &p in &remaining {
            let row = x.row(p);
            match config.least_squares.multiple_residual(row, &heads) {
                Ok(r) => rows.push(r),
                Err(e) => {
                    let msg = format!("could not regress head out of variable {}: {e}", x.ids()[p]);
                    log::warn!("{msg}");
                    warnings.push(msg);
                    rows.push(row.to_vec());
                }
            }
        }
        let ids = remaining.iter().map(|&p| x.ids()[p]).collect();
        let residual_data = DataMatrix::new(rows, ids)?;
        let (merged, records) = parcel_search(&residual_data, test, config)?;
        log::debug!("subset search: {} subsets, {} pairs decided", records.len(), merged.decided_pairs());
        for (ia, &a) in merged.variable_ids().iter().enumerate() {
            for (ib, &b) in merged.variable_ids().iter().enumerate() {
                let v = merged.get(ia, ib);
                let (pa, pb) = (ordering.position(a).unwrap(), ordering.position(b).unwrap());
                if v != 0 && ordering.get(pa, pb) == 0 {
                    ordering.set(pa, pb, v);
                }
            }
        }
        subset_records = records;
    }

    let strengths = estimate_strengths(x, &ordering, &config.least_squares, &mut warnings);
    Ok(DiscoveryResult {
        has_cycle: ordering.has_cycle(),
        ordering,
        strengths,
        subset_records,
        trace: full.trace,
        warnings,
    })
}

/// Regresses each fully ordered variable on every variable preceding it.
pub fn estimate_strengths(
    x: &DataMatrix,
    ordering: &CausalOrderingMatrix,
    ls: &LeastSquares,
    warnings: &mut Vec<String>,
) -> Vec<Strength> {
    let mut out = Vec::new();
    for (i, &target) in ordering.variable_ids().iter().enumerate() {
        if !ordering.row_decided(i) {
            continue;
        }
        let preceding: Vec<usize> = (0..ordering.dim()).filter(|&j| ordering.get(i, j) == 1).collect();
        let regressors: Vec<&[f64]> = preceding
            .iter()
            .map(|&j| x.row_by_id(ordering.variable_ids()[j]).expect("ordering ids come from the data"))
            .collect();
        let y = x.row_by_id(target).expect("ordering ids come from the data");
        let coefs = match ls.coefficients(y, &regressors) {
            Ok(c) => c,
            Err(e) => {
                let msg = format!("no strengths for variable {target}: {e}");
                log::warn!("{msg}");
                warnings.push(msg);
                continue;
            }
        };
        for (j, &source) in ordering.variable_ids().iter().enumerate() {
            if j == i {
                continue;
            }
            let value = preceding.iter().position(|&k| k == j).map_or(0.0, |k| coefs[k]);
            out.push(Strength { target, source, value });
        }
    }
    out.sort_by_key(|s| (s.target, s.source));
    out
}

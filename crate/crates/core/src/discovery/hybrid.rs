//! Top-down exogenous search followed by bottom-up sink search on one
//! variable set.

use serde::{Deserialize, Serialize};

use super::{DiscoveryConfig, DiscoveryError};
use crate::independence::{fisher_combine, IndependenceTest};
use crate::ordering::{build_ordering_matrix, CausalOrderingMatrix, OrderedLists};
use crate::stats::{DataMatrix, VariableId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AllOrdered,
    IndependenceRejectedTopDown,
    IndependenceRejectedBottomUp,
    FewerThanThreeRemain,
}

/// The pairwise p-values that justified appending `variable` to a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub variable: VariableId,
    pub p_values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HybridTrace {
    pub lists: OrderedLists,
    /// In the order the head variables were found.
    pub head_steps: Vec<TraceStep>,
    /// In the order the tail variables were found (last sink first).
    pub tail_steps: Vec<TraceStep>,
    pub stop_reasons: Vec<StopReason>,
    pub warnings: Vec<String>,
}

impl HybridTrace {
    pub fn component_p_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.head_steps.iter().chain(&self.tail_steps).flat_map(|s| s.p_values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridOutcome {
    pub lists: OrderedLists,
    pub ordering: CausalOrderingMatrix,
    pub trace: HybridTrace,
}

/// Plausibility of a run: Fisher-combined p-value over every pairwise test
/// that backed an appended variable. A run that ordered nothing scores 0.
pub fn plausibility(trace: &HybridTrace) -> f64 {
    plausibility_parts(trace).0
}

/// `(p_value, sum of ln p)` for [`plausibility`].
pub(crate) fn plausibility_parts(trace: &HybridTrace) -> (f64, f64) {
    let ps: Vec<f64> = trace.component_p_values().collect();
    if ps.is_empty() {
        return (0.0, 0.0);
    }
    let log_sum = ps.iter().map(|p| p.max(crate::independence::P_VALUE_FLOOR).ln()).sum();
    let p = fisher_combine(&ps).map(|f| f.p_value).unwrap_or(0.0);
    (p, log_sum)
}

struct Column {
    id: VariableId,
    values: Vec<f64>,
}

struct Choice<R> {
    pos: usize,
    p: f64,
    p_values: Vec<f64>,
    residuals: R,
}

/// Keeps the candidate with the highest p-value; ties go to the smaller id.
fn better<R>(current: &Option<Choice<R>>, p: f64, id: VariableId, ids: impl Fn(usize) -> VariableId) -> bool {
    match current {
        None => true,
        Some(c) => p > c.p || (p == c.p && id < ids(c.pos)),
    }
}

/// Estimates head and tail lists for the variables of `x` and the ordering
/// matrix they imply.
pub fn hybrid_search<T: IndependenceTest>(
    x: &DataMatrix,
    test: &T,
    config: &DiscoveryConfig,
) -> Result<HybridOutcome, DiscoveryError> {
    config.validate()?;
    if x.n_samples() < test.min_samples() {
        return Err(DiscoveryError::TooFewSamples { got: x.n_samples(), need: test.min_samples() });
    }
    let d = x.n_vars();
    let ls = &config.least_squares;
    let alpha = config.alpha;
    let mut trace = HybridTrace::default();

    let mut working: Vec<Column> = x
        .ids()
        .iter()
        .zip(x.rows())
        .map(|(&id, r)| Column { id, values: r.clone() })
        .collect();

    // Top-down: most exogenous variable first, then regress it out.
    loop {
        let targets: Vec<_> = working.iter().map(|c| test.prepare(&c.values)).collect();
        let mut best: Option<Choice<Vec<Vec<f64>>>> = None;
        for (j, cand) in working.iter().enumerate() {
            let mut residuals = Vec::with_capacity(working.len() - 1);
            let mut failed = None;
            for (i, other) in working.iter().enumerate() {
                if i == j {
                    continue;
                }
                match ls.simple_residual(&other.values, &cand.values) {
                    Ok(r) => residuals.push(r),
                    Err(e) => {
                        failed = Some(e);
                        break;
                    }
                }
            }
            if let Some(e) = failed {
                trace.warnings.push(format!("top-down: skipped variable {} ({e})", cand.id));
                continue;
            }
            let p_values: Vec<f64> = residuals
                .iter()
                .map(|r| test.pair_p_value(targets[j].as_ref(), test.prepare(r).as_ref()))
                .collect();
            let p = fisher_combine(&p_values)?.p_value;
            if better(&best, p, cand.id, |k| working[k].id) {
                best = Some(Choice { pos: j, p, p_values, residuals });
            }
        }
        let Some(choice) = best.filter(|c| c.p >= alpha) else {
            trace.stop_reasons.push(StopReason::IndependenceRejectedTopDown);
            break;
        };
        let chosen = working.remove(choice.pos);
        trace.lists.k_head.push(chosen.id);
        trace.head_steps.push(TraceStep { variable: chosen.id, p_values: choice.p_values });
        for (col, r) in working.iter_mut().zip(choice.residuals) {
            col.values = r;
        }
        if trace.lists.k_head.len() == d - 1 {
            let last = working.remove(0);
            trace.lists.k_head.push(last.id);
            trace.head_steps.push(TraceStep { variable: last.id, p_values: Vec::new() });
            trace.stop_reasons.push(StopReason::AllOrdered);
            break;
        }
    }

    // Bottom-up on what is left, with the head effects already regressed out.
    if !working.is_empty() && trace.lists.k_head.len() + 2 < d {
        loop {
            let prepared: Vec<_> = working.iter().map(|c| test.prepare(&c.values)).collect();
            let mut best: Option<Choice<()>> = None;
            for (j, cand) in working.iter().enumerate() {
                let regressors: Vec<&[f64]> = working
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .map(|(_, c)| c.values.as_slice())
                    .collect();
                let residual = match ls.multiple_residual(&cand.values, &regressors) {
                    Ok(r) => r,
                    Err(e) => {
                        trace.warnings.push(format!("bottom-up: skipped variable {} ({e})", cand.id));
                        continue;
                    }
                };
                let res = test.prepare(&residual);
                let p_values: Vec<f64> = (0..working.len())
                    .filter(|&i| i != j)
                    .map(|i| test.pair_p_value(prepared[i].as_ref(), res.as_ref()))
                    .collect();
                let p = fisher_combine(&p_values)?.p_value;
                if better(&best, p, cand.id, |k| working[k].id) {
                    best = Some(Choice { pos: j, p, p_values, residuals: () });
                }
            }
            let Some(choice) = best.filter(|c| c.p >= alpha) else {
                trace.stop_reasons.push(StopReason::IndependenceRejectedBottomUp);
                break;
            };
            let chosen = working.remove(choice.pos);
            trace.lists.k_tail.insert(0, chosen.id);
            trace.tail_steps.push(TraceStep { variable: chosen.id, p_values: choice.p_values });
            if working.len() < 3 {
                trace.stop_reasons.push(StopReason::FewerThanThreeRemain);
                break;
            }
        }
    } else if !working.is_empty() {
        trace.stop_reasons.push(StopReason::FewerThanThreeRemain);
    }

    for w in &trace.warnings {
        log::warn!("{w}");
    }
    let ordering = build_ordering_matrix(&trace.lists, x.ids())?;
    Ok(HybridOutcome { lists: trace.lists.clone(), ordering, trace })
}

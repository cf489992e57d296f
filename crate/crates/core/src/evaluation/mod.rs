//! Scoring estimated orderings and strengths against a generated ground truth.

pub mod calibration;
mod harness;
mod oracle;

pub use harness::{run_trial, run_trials, trial_seed, Method, TrialError, TrialOutcome, TrialSetup};
pub use oracle::{maximal_recall, oracle_discovery, PopulationOracle};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discovery::{DiscoveryResult, Strength};
use crate::ordering::CausalOrderingMatrix;
use crate::simgen::SemGroundTruth;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("estimated ordering covers variables {estimated:?}, ground truth covers {truth:?}")]
    IdMismatch { estimated: Vec<usize>, truth: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// `None` when no pair was decided.
    pub precision: Option<f64>,
    pub recall: f64,
    /// 0 when precision is undefined or both parts are 0.
    pub f_measure: f64,
    pub decided_pairs: usize,
    pub correct_pairs: usize,
    pub total_true_pairs: usize,
    pub excluded_pairs: usize,
    pub rmse: Option<f64>,
    pub strength_count: usize,
}

/// Pairwise precision and recall of `estimated`. Pairs without a directed
/// path between them are skipped when `exclude_path_free` is set; otherwise
/// either direction counts as correct for them.
pub fn score_ordering(
    estimated: &CausalOrderingMatrix,
    truth: &SemGroundTruth,
    exclude_path_free: bool,
) -> Result<ScoreReport, EvalError> {
    let t = &truth.true_ordering;
    let mut est_ids = estimated.variable_ids().to_vec();
    let mut true_ids = t.variable_ids().to_vec();
    est_ids.sort_unstable();
    true_ids.sort_unstable();
    if est_ids != true_ids {
        return Err(EvalError::IdMismatch { estimated: est_ids, truth: true_ids });
    }
    let (mut decided, mut correct, mut total, mut excluded) = (0, 0, 0, 0);
    let d = t.dim();
    for k in 0..d {
        for l in (k + 1)..d {
            let free = truth.path_free[k][l];
            if free && exclude_path_free {
                excluded += 1;
                continue;
            }
            total += 1;
            let (a, b) = (t.variable_ids()[k], t.variable_ids()[l]);
            let v = estimated.get_by_id(a, b).expect("ids checked");
            if v != 0 {
                decided += 1;
                if free || v == t.get(k, l) {
                    correct += 1;
                }
            }
        }
    }
    let precision = (decided > 0).then(|| correct as f64 / decided as f64);
    let recall = if total > 0 { correct as f64 / total as f64 } else { 0.0 };
    let f_measure = match precision {
        Some(p) if p + recall > 0.0 => 2.0 * p * recall / (p + recall),
        _ => 0.0,
    };
    Ok(ScoreReport {
        precision,
        recall,
        f_measure,
        decided_pairs: decided,
        correct_pairs: correct,
        total_true_pairs: total,
        excluded_pairs: excluded,
        rmse: None,
        strength_count: 0,
    })
}

/// RMSE of the estimated strengths against the true `b_ij`, with the
/// number of strengths compared. `None` when there are none.
pub fn score_strengths(estimated: &[Strength], truth: &SemGroundTruth) -> Option<(f64, usize)> {
    let d = truth.true_b.len();
    let errs: Vec<f64> = estimated
        .iter()
        .filter(|s| s.target < d && s.source < d)
        .map(|s| s.value - truth.true_b[s.target][s.source])
        .collect();
    if errs.is_empty() {
        return None;
    }
    Some(((errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt(), errs.len()))
}

/// Ordering and strength scores of a full discovery result.
pub fn score_result(
    result: &DiscoveryResult,
    truth: &SemGroundTruth,
    exclude_path_free: bool,
) -> Result<ScoreReport, EvalError> {
    let mut report = score_ordering(&result.ordering, truth, exclude_path_free)?;
    if let Some((rmse, count)) = score_strengths(&result.strengths, truth) {
        report.rmse = Some(rmse);
        report.strength_count = count;
    }
    Ok(report)
}

/// Means over trials. Undefined precision and RMSE values are skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanScores {
    pub precision: Option<f64>,
    pub recall: f64,
    pub f_measure: f64,
    pub rmse: Option<f64>,
    pub trials: usize,
    pub precision_defined: usize,
}

pub fn mean_scores(reports: &[ScoreReport]) -> MeanScores {
    let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let precisions: Vec<f64> = reports.iter().filter_map(|r| r.precision).collect();
    let defined = precisions.len();
    MeanScores {
        precision: mean(precisions),
        recall: mean(reports.iter().map(|r| r.recall).collect()).unwrap_or(0.0),
        f_measure: mean(reports.iter().map(|r| r.f_measure).collect()).unwrap_or(0.0),
        rmse: mean(reports.iter().filter_map(|r| r.rmse).collect()),
        trials: reports.len(),
        precision_defined: defined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{builtin_network, generate, NetworkName};

    fn truth() -> SemGroundTruth {
        let spec = builtin_network(&NetworkName::Fig2FiveVar, 2).unwrap();
        generate(&spec, 20).unwrap().1
    }

    #[test]
    fn truth_scores_perfectly() {
        let t = truth();
        for exclude in [false, true] {
            let r = score_ordering(&t.true_ordering, &t, exclude).unwrap();
            assert_eq!(r.precision, Some(1.0));
            assert_eq!(r.recall, 1.0);
            assert_eq!(r.f_measure, 1.0);
        }
        let r = score_ordering(&t.true_ordering, &t, true).unwrap();
        assert_eq!((r.total_true_pairs, r.excluded_pairs), (9, 1));
    }

    #[test]
    fn empty_estimate_has_no_precision() {
        let t = truth();
        let r = score_ordering(&CausalOrderingMatrix::unknown((0..5).collect()), &t, false).unwrap();
        assert_eq!(r.precision, None);
        assert_eq!(r.recall, 0.0);
        assert_eq!(r.f_measure, 0.0);
    }

    #[test]
    fn reversed_estimate_scores_zero_on_paths() {
        let t = truth();
        let mut rev = t.true_ordering.clone();
        for k in 0..5 {
            for l in 0..5 {
                if k != l {
                    rev.set(k, l, -t.true_ordering.get(k, l));
                }
            }
        }
        let r = score_ordering(&rev, &t, true).unwrap();
        assert_eq!(r.precision, Some(0.0));
        let r = score_ordering(&rev, &t, false).unwrap();
        assert_eq!(r.correct_pairs, 1, "only the path-free pair");
    }

    #[test]
    fn score_ignores_variable_order() {
        let t = truth();
        let ids: Vec<usize> = vec![3, 1, 4, 0, 2];
        let mut shuffled = CausalOrderingMatrix::unknown(ids.clone());
        for (k, &a) in ids.iter().enumerate() {
            for (l, &b) in ids.iter().enumerate() {
                if k != l && (a + b) % 2 == 0 {
                    shuffled.set(k, l, t.true_ordering.get_by_id(a, b).unwrap());
                }
            }
        }
        let direct = {
            let mut m = CausalOrderingMatrix::unknown((0..5).collect());
            for a in 0..5 {
                for b in 0..5 {
                    if a != b && (a + b) % 2 == 0 {
                        m.set(a, b, t.true_ordering.get(a, b));
                    }
                }
            }
            m
        };
        assert_eq!(score_ordering(&shuffled, &t, false), score_ordering(&direct, &t, false));
    }

    #[test]
    fn mismatched_ids_are_rejected() {
        let t = truth();
        let r = score_ordering(&CausalOrderingMatrix::unknown(vec![0, 1, 2, 3, 9]), &t, false);
        assert!(matches!(r, Err(EvalError::IdMismatch { .. })));
    }

    #[test]
    fn strength_rmse() {
        let mut t = truth();
        t.true_b = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let est = [Strength { target: 1, source: 0, value: 0.8 }];
        let (rmse, n) = score_strengths(&est, &t).unwrap();
        assert!((rmse - 0.2).abs() < 1e-12);
        assert_eq!(n, 1);
        assert_eq!(score_strengths(&[], &t), None);
    }

    #[test]
    fn means_skip_undefined() {
        let base = ScoreReport {
            precision: None,
            recall: 0.0,
            f_measure: 0.0,
            decided_pairs: 0,
            correct_pairs: 0,
            total_true_pairs: 3,
            excluded_pairs: 0,
            rmse: None,
            strength_count: 0,
        };
        let good = ScoreReport { precision: Some(1.0), recall: 1.0, f_measure: 1.0, rmse: Some(0.5), ..base.clone() };
        let m = mean_scores(&[base, good]);
        assert_eq!(m.precision, Some(1.0));
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.rmse, Some(0.5));
        assert_eq!((m.trials, m.precision_defined), (2, 1));
    }
}

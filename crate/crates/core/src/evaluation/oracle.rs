//! Exact independence on population mixing rows.
//!
//! Every variable, and every residual of a linear regression among variables,
//! is a linear combination of the independent non-Gaussian sources. Two such
//! combinations are independent exactly when no source enters both, so the
//! supports of the coefficient rows decide every test without sampling error.

use crate::discovery::{parce_lingam, DiscoveryConfig, DiscoveryError, DiscoveryResult};
use crate::independence::IndependenceTest;
use crate::simgen::SemGroundTruth;
use crate::stats::DataMatrix;

use super::score_ordering;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationOracle {
    /// Rows whose largest coefficient is below this are treated as zero.
    pub zero_tolerance: f64,
    /// Coefficients below this fraction of the row maximum are dropped.
    pub relative_tolerance: f64,
}

impl Default for PopulationOracle {
    fn default() -> Self {
        Self { zero_tolerance: 1e-9, relative_tolerance: 1e-8 }
    }
}

impl IndependenceTest for PopulationOracle {
    type Prepared = Vec<bool>;

    fn min_samples(&self) -> usize {
        0
    }

    fn prepare(&self, row: &[f64]) -> Option<Vec<bool>> {
        let max = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max <= self.zero_tolerance {
            return None;
        }
        Some(row.iter().map(|v| v.abs() > max * self.relative_tolerance).collect())
    }

    fn p_value(&self, a: &Vec<bool>, b: &Vec<bool>) -> f64 {
        if a.iter().zip(b).any(|(&x, &y)| x && y) {
            0.0
        } else {
            1.0
        }
    }
}

/// The pipeline run on the truth's mixing rows with the exact oracle.
pub fn oracle_discovery(truth: &SemGroundTruth, config: &DiscoveryConfig) -> Result<DiscoveryResult, DiscoveryError> {
    let d = truth.mixing.len();
    // Zero padding keeps regressions over-determined; it changes no
    // covariance and no support.
    let width = truth.mixing.first().map_or(0, Vec::len).max(d + 2);
    let rows = truth
        .mixing
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.resize(width, 0.0);
            r
        })
        .collect();
    let x = DataMatrix::new(rows, truth.true_ordering.variable_ids().to_vec())?;
    parce_lingam(&x, &PopulationOracle::default(), config)
}

/// Recall of the oracle run, counting path-free pairs as correct in either
/// direction: the best recall any consistent estimator can reach.
pub fn maximal_recall(truth: &SemGroundTruth, config: &DiscoveryConfig) -> Result<f64, DiscoveryError> {
    let result = oracle_discovery(truth, config)?;
    Ok(score_ordering(&result.ordering, truth, false).expect("same ids").recall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{builtin_network, generate, NetworkName};

    fn truth(name: NetworkName, seed: u64) -> SemGroundTruth {
        generate(&builtin_network(&name, seed).unwrap(), 16).unwrap().1
    }

    #[test]
    fn support_overlap_decides() {
        let o = PopulationOracle::default();
        let a = o.prepare(&[1.0, 0.0, 0.0]).unwrap();
        let b = o.prepare(&[0.0, 2.0, 1e-14]).unwrap();
        let c = o.prepare(&[0.5, 0.0, 3.0]).unwrap();
        assert_eq!(o.p_value(&a, &b), 1.0);
        assert_eq!(o.p_value(&a, &c), 0.0);
        assert!(o.prepare(&[1e-12, 0.0]).is_none());
        assert_eq!(o.pair_p_value(None, Some(&a)), 1.0);
    }

    #[test]
    fn unconfounded_chain_is_fully_ordered() {
        let t = truth(NetworkName::Chain { d: 5 }, 3);
        let r = oracle_discovery(&t, &DiscoveryConfig::default()).unwrap();
        assert_eq!(r.ordering, t.true_ordering);
        // Strengths from population rows are exact.
        for s in &r.strengths {
            assert!((s.value - t.true_b[s.target][s.source]).abs() < 1e-8, "{s:?}");
        }
    }

    #[test]
    fn five_variable_network_recall() {
        for seed in 0..5 {
            let t = truth(NetworkName::Fig2FiveVar, seed);
            let r = oracle_discovery(&t, &DiscoveryConfig::default()).unwrap();
            let s = score_ordering(&r.ordering, &t, false).unwrap();
            assert_eq!(s.precision, Some(1.0), "seed {seed}");
            assert!((s.recall - 0.8).abs() < 1e-12, "seed {seed}: recall {}", s.recall);
        }
    }

    #[test]
    fn oracle_is_precise_on_larger_networks() {
        for name in [NetworkName::Fig3TenVar, NetworkName::ConfoundedChain4Var] {
            let t = truth(name.clone(), 1);
            let r = oracle_discovery(&t, &DiscoveryConfig::default()).unwrap();
            let s = score_ordering(&r.ordering, &t, false).unwrap();
            assert_eq!(s.precision, Some(1.0), "{name}");
        }
    }
}

use itertools::Itertools;
use rayon::prelude::*;

use super::hybrid::{hybrid_search, plausibility_parts};
use super::{DiscoveryConfig, DiscoveryError};
use crate::independence::IndependenceTest;
use crate::ordering::{merge_orderings, CausalOrderingMatrix, PlausibilityRecord};
use crate::stats::DataMatrix;

/// All subsets of size `>= 2`, as row positions: larger subsets first, then
/// lexicographic in variable id.
pub fn subset_schedule(x: &DataMatrix) -> Vec<Vec<usize>> {
    let mut by_id: Vec<usize> = (0..x.n_vars()).collect();
    by_id.sort_by_key(|&p| x.ids()[p]);
    (2..=x.n_vars())
        .rev()
        .flat_map(|size| by_id.iter().copied().combinations(size).collect::<Vec<_>>())
        .collect()
}

/// Runs the hybrid search on every variable subset of size two or more and
/// merges the results by plausibility. Subsets are evaluated in parallel; the
/// merge is independent of scheduling.
pub fn parcel_search<T: IndependenceTest>(
    x: &DataMatrix,
    test: &T,
    config: &DiscoveryConfig,
) -> Result<(CausalOrderingMatrix, Vec<PlausibilityRecord>), DiscoveryError> {
    config.validate()?;
    if x.n_vars() > config.subset_cap {
        return Err(DiscoveryError::SubsetBudgetExceeded { d: x.n_vars(), cap: config.subset_cap });
    }
    let records = subset_schedule(x)
        .par_iter()
        .map(|positions| {
            let sub = x.select(positions)?;
            let out = hybrid_search(&sub, test, config)?;
            let (p_value, log_sum) = plausibility_parts(&out.trace);
            let mut subset = sub.ids().to_vec();
            subset.sort_unstable();
            Ok(PlausibilityRecord {
                subset,
                ordering: out.ordering,
                p_value,
                component_log_p_sum: log_sum,
            })
        })
        .collect::<Result<Vec<_>, DiscoveryError>>()?;
    Ok((merge_orderings(&records), records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_order_and_count() {
        let x = DataMatrix::new(vec![vec![0.0; 3]; 4], vec![4, 1, 3, 2]).unwrap();
        let s = subset_schedule(&x);
        assert_eq!(s.len(), (1 << 4) - 4 - 1);
        let as_ids = |p: &Vec<usize>| p.iter().map(|&k| x.ids()[k]).collect::<Vec<_>>();
        assert_eq!(as_ids(&s[0]), vec![1, 2, 3, 4]);
        assert_eq!(as_ids(&s[1]), vec![1, 2, 3]);
        assert_eq!(as_ids(s.last().unwrap()), vec![3, 4]);
    }

    #[test]
    fn budget_is_enforced() {
        let x = DataMatrix::with_default_ids(vec![vec![0.0; 20]; 4]).unwrap();
        let cfg = DiscoveryConfig { subset_cap: 3, ..Default::default() };
        let r = parcel_search(&x, &crate::independence::HsicTest::default(), &cfg);
        assert!(matches!(r, Err(DiscoveryError::SubsetBudgetExceeded { d: 4, cap: 3 })));
    }
}

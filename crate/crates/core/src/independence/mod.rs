//! Pairwise independence testing and Fisher's method for combining p-values.

mod fisher;
mod hsic;
pub mod permutation;

pub use fisher::{fisher_combine, FisherCombination, P_VALUE_FLOOR};
pub use hsic::{
    hsic_from_grams, hsic_test, median_bandwidth, median_pairwise_distance, GaussianGram,
    HsicConfig, HsicResult, HsicTest, MIN_SAMPLES,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndependenceError {
    #[error("input is constant; independence is undefined")]
    ConstantInput,
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("at least {min} samples are required, got {0}", min = MIN_SAMPLES)]
    TooFewSamples(usize),
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("no p-values to combine")]
    EmptyInput,
    #[error("p-value {0} is outside [0, 1]")]
    InvalidPValue(f64),
}

/// A pairwise independence test whose per-vector preprocessing can be cached.
///
/// Discovery tests one vector against many others, so each vector is
/// prepared once and then paired. `prepare` returns `None` for a constant
/// vector; pairs involving one are treated as independent (p = 1).
pub trait IndependenceTest: Sync {
    type Prepared: Send + Sync;

    fn min_samples(&self) -> usize;

    fn prepare(&self, v: &[f64]) -> Option<Self::Prepared>;

    fn p_value(&self, a: &Self::Prepared, b: &Self::Prepared) -> f64;

    /// p-value of a pair where either side may be degenerate.
    fn pair_p_value(&self, a: Option<&Self::Prepared>, b: Option<&Self::Prepared>) -> f64 {
        match (a, b) {
            (Some(a), Some(b)) => self.p_value(a, b),
            _ => 1.0,
        }
    }
}

/// Fisher-combined p-value of `target` tested against every row of `others`.
/// Constant rows contribute p = 1.
pub fn fisher_independence_with<T: IndependenceTest, R: AsRef<[f64]>>(
    test: &T,
    target: &[f64],
    others: &[R],
) -> Result<f64, IndependenceError> {
    if others.is_empty() {
        return Err(IndependenceError::EmptyInput);
    }
    let t = test.prepare(target);
    if t.is_none() {
        log::warn!("constant target in independence test; treating as independent");
    }
    let ps: Vec<f64> = others
        .iter()
        .map(|o| {
            let o = test.prepare(o.as_ref());
            test.pair_p_value(t.as_ref(), o.as_ref())
        })
        .collect();
    Ok(fisher_combine(&ps)?.p_value)
}

/// [`fisher_independence_with`] using the default HSIC test.
pub fn fisher_independence<R: AsRef<[f64]>>(
    target: &[f64],
    others: &[R],
) -> Result<f64, IndependenceError> {
    fisher_independence_with(&HsicTest::default(), target, others)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_row_equals_hsic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = fisher_independence(&u, std::slice::from_ref(&v)).unwrap();
        assert!((p - hsic_test(&u, &v).unwrap().p_value).abs() < 1e-12);
    }

    #[test]
    fn duplicated_target_is_dependent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let others = vec![u.clone(), u.clone(), u.clone()];
        assert!(fisher_independence(&u, &others).unwrap() < 0.01);
    }

    #[test]
    fn constant_rows_are_vacuously_independent() {
        let u: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let others = vec![vec![2.0; 30], vec![0.0; 30]];
        assert_eq!(fisher_independence(&u, &others).unwrap(), 1.0);
        let none: Vec<Vec<f64>> = Vec::new();
        assert_eq!(fisher_independence(&u, &none), Err(IndependenceError::EmptyInput));
    }
}

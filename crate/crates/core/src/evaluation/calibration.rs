//! Rejection-rate checks for the residual independence properties and for the
//! HSIC null calibration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial_seed;
use crate::independence::{fisher_independence_with, permutation::permutation_hsic, HsicTest};
use crate::simgen::{builtin_network, generate, NetworkName, SpecError};
use crate::stats::{DataMatrix, LeastSquares, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRates {
    /// Fraction of trials where the true candidate passed (p >= alpha).
    pub accept_true: f64,
    /// Smallest, over the other variables, fraction of trials where that
    /// variable failed (p < alpha).
    pub reject_others: f64,
    pub trials: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Independence(#[from] crate::independence::IndependenceError),
}

/// p-value of `j` as an exogenous candidate: `x_j` against the residual of
/// every other variable regressed on it.
pub fn exogenous_p_value(x: &DataMatrix, j: usize, test: &HsicTest) -> Result<f64, CalibrationError> {
    let ls = LeastSquares::default();
    let residuals = (0..x.n_vars())
        .filter(|&i| i != j)
        .map(|i| ls.simple_residual(x.row(i), x.row(j)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fisher_independence_with(test, x.row(j), &residuals)?)
}

/// p-value of `j` as a sink candidate: the residual of `x_j` regressed on all
/// other variables, against each of them.
pub fn sink_p_value(x: &DataMatrix, j: usize, test: &HsicTest) -> Result<f64, CalibrationError> {
    let others: Vec<&[f64]> = (0..x.n_vars()).filter(|&i| i != j).map(|i| x.row(i)).collect();
    let r = LeastSquares::default().multiple_residual(x.row(j), &others)?;
    Ok(fisher_independence_with(test, &r, &others)?)
}

/// Runs `p_value` for every variable of `trials` unconfounded chains of
/// length `d`; `truth` is the original index that should pass.
fn residual_rates(
    d: usize,
    n: usize,
    trials: usize,
    seed: u64,
    alpha: f64,
    truth: usize,
    p_value: fn(&DataMatrix, usize, &HsicTest) -> Result<f64, CalibrationError>,
) -> Result<ResidualRates, CalibrationError> {
    let test = HsicTest::default();
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let spec = builtin_network(&NetworkName::Chain { d }, trial_seed(seed, t))?;
            let (x, g) = generate(&spec, n)?;
            (0..d)
                .map(|orig| {
                    let row_pos = g.permutation.iter().position(|&p| p == orig).expect("bijection");
                    p_value(&x, row_pos, &test)
                })
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, CalibrationError>>()?;
    let accept = per_trial.iter().filter(|ps| ps[truth] >= alpha).count();
    let reject_others = (0..d)
        .filter(|&v| v != truth)
        .map(|v| per_trial.iter().filter(|ps| ps[v] < alpha).count())
        .min()
        .unwrap_or(trials);
    Ok(ResidualRates {
        accept_true: accept as f64 / trials as f64,
        reject_others: reject_others as f64 / trials as f64,
        trials,
    })
}

/// Simple-regression property on a `d`-chain: the root passes, the rest fail.
pub fn exogenous_rates(d: usize, n: usize, trials: usize, seed: u64, alpha: f64) -> Result<ResidualRates, CalibrationError> {
    residual_rates(d, n, trials, seed, alpha, 0, exogenous_p_value)
}

/// Multiple-regression property on a `d`-chain: the last variable passes.
pub fn sink_rates(d: usize, n: usize, trials: usize, seed: u64, alpha: f64) -> Result<ResidualRates, CalibrationError> {
    residual_rates(d, n, trials, seed, alpha, d - 1, sink_p_value)
}

fn normal_pair(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let v = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    (u, v)
}

/// Fraction of `reps` independent standard-normal pairs that the gamma
/// approximation rejects at `alpha`.
pub fn hsic_false_positive_rate(n: usize, reps: usize, seed: u64, alpha: f64) -> f64 {
    let test = HsicTest::default();
    let rejected = (0..reps)
        .into_par_iter()
        .filter(|&r| {
            let (u, v) = normal_pair(n, trial_seed(seed, r));
            test.test(&u, &v).expect("valid null sample").p_value < alpha
        })
        .count();
    rejected as f64 / reps as f64
}

/// Rejection rates of the gamma approximation and of a permutation test on
/// the same `instances` null pairs: `(gamma, permutation)`.
pub fn hsic_vs_permutation(n: usize, instances: usize, shuffles: usize, seed: u64, alpha: f64) -> (f64, f64) {
    let test = HsicTest::default();
    let (g, p) = (0..instances)
        .into_par_iter()
        .map(|r| {
            let s = trial_seed(seed, r);
            let (u, v) = normal_pair(n, s);
            let gamma = test.test(&u, &v).expect("valid null sample").p_value < alpha;
            let perm = permutation_hsic(&u, &v, shuffles, s).1 < alpha;
            (usize::from(gamma), usize::from(perm))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    (g as f64 / instances as f64, p as f64 / instances as f64)
}

//! Biased HSIC with Gaussian kernels and a two-moment gamma null.
//!
//! Gram matrices are stored packed (strict upper triangle, row-major) along
//! with their row means, so a kernel is built once per vector and a test is a
//! single fused pass over two packed arrays. The centered entries
//! `K_ab - m_a - m_b + g` are formed on the fly.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma};

use super::{IndependenceError, IndependenceTest};
use crate::stats::{mean, variance};

/// Smallest sample count the gamma moments are defined for with margin.
pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsicResult {
    /// `n * HSIC_b`, the n-scaled biased estimate.
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub bandwidth_u: f64,
    pub bandwidth_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsicConfig {
    /// Deterministic stride subsampling to at most this many samples.
    pub sample_cap: Option<usize>,
    /// Inputs with variance at or below this are treated as constant.
    pub constant_threshold: f64,
}

impl Default for HsicConfig {
    fn default() -> Self {
        Self { sample_cap: None, constant_threshold: 1e-12 }
    }
}

/// Packed Gaussian Gram matrix of one input vector.
#[derive(Debug, Clone)]
pub struct GaussianGram {
    n: usize,
    bandwidth: f64,
    upper: Vec<f64>,
    row_means: Vec<f64>,
    grand_mean: f64,
    /// Mean of the off-diagonal entries.
    offdiag_mean: f64,
}

impl GaussianGram {
    pub fn new(x: &[f64]) -> Self {
        let bandwidth = median_bandwidth(x);
        Self::with_bandwidth(x, bandwidth)
    }

    pub fn with_bandwidth(x: &[f64], bandwidth: f64) -> Self {
        let n = x.len();
        let scale = -0.5 / (bandwidth * bandwidth);
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        let mut row_sums = vec![1.0; n];
        for a in 0..n {
            let xa = x[a];
            let start = upper.len();
            upper.extend(x[a + 1..].iter().map(|&xb| {
                let d = xa - xb;
                (scale * d * d).exp()
            }));
            let row = &upper[start..];
            row_sums[a] += row.iter().sum::<f64>();
            for (s, k) in row_sums[a + 1..].iter_mut().zip(row) {
                *s += k;
            }
        }
        let total: f64 = row_sums.iter().sum();
        let nf = n as f64;
        Self {
            n,
            bandwidth,
            upper,
            row_means: row_sums.iter().map(|s| s / nf).collect(),
            grand_mean: total / (nf * nf),
            offdiag_mean: (total - nf) / (nf * (nf - 1.0)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

/// HSIC statistic and gamma-approximated p-value for two prepared Grams.
pub fn hsic_from_grams(k: &GaussianGram, l: &GaussianGram) -> HsicResult {
    assert_eq!(k.n, l.n, "gram matrices must have the same size");
    let n = k.n;
    let nf = n as f64;
    let (kr, lr) = (&k.row_means, &l.row_means);
    let (kg, lg) = (k.grand_mean, l.grand_mean);

    let mut cross = 0.0;
    let mut squares = 0.0;
    let mut diag = 0.0;
    let mut idx = 0;
    for a in 0..n {
        let ka = kg - kr[a];
        let la = lg - lr[a];
        diag += (1.0 + ka - kr[a]) * (1.0 + la - lr[a]);
        let len = n - a - 1;
        let ku = &k.upper[idx..idx + len];
        let lu = &l.upper[idx..idx + len];
        let (mut c, mut s) = (0.0, 0.0);
        for (((kv, lv), krb), lrb) in ku.iter().zip(lu).zip(&kr[a + 1..]).zip(&lr[a + 1..]) {
            let p = (kv + ka - krb) * (lv + la - lrb);
            c += p;
            s += p * p;
        }
        cross += c;
        squares += s;
        idx += len;
    }
    let statistic = ((2.0 * cross + diag) / nf).max(0.0);

    // Null moments of HSIC_b under independence.
    let var_core = 2.0 * squares / 36.0 / (nf * (nf - 1.0));
    let variance = var_core * 72.0 * (nf - 4.0) * (nf - 5.0)
        / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0));
    let (mu_k, mu_l) = (k.offdiag_mean, l.offdiag_mean);
    let mean = (1.0 + mu_k * mu_l - mu_k - mu_l) / nf;

    let p_value = if variance > 0.0 && mean > 0.0 {
        let shape = mean * mean / variance;
        let scale = variance * nf / mean;
        match Gamma::new(shape, 1.0 / scale) {
            Ok(g) => g.sf(statistic).clamp(0.0, 1.0),
            Err(_) => 1.0,
        }
    } else {
        1.0
    };

    HsicResult {
        statistic,
        p_value,
        n,
        bandwidth_u: k.bandwidth,
        bandwidth_v: l.bandwidth,
    }
}

/// Median of `|x_a - x_b|` over all pairs `a < b`, or 1.0 when that median is 0.
pub fn median_bandwidth(x: &[f64]) -> f64 {
    let m = median_pairwise_distance(x);
    if m > 0.0 && m.is_finite() {
        m
    } else {
        1.0
    }
}

/// Exact median of the pairwise absolute differences, in O(n log n) time and
/// O(n) memory.
pub fn median_pairwise_distance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pairs = n * (n - 1) / 2;
    if pairs % 2 == 1 {
        kth_pairwise_distance(&sorted, pairs / 2 + 1)
    } else {
        0.5 * (kth_pairwise_distance(&sorted, pairs / 2)
            + kth_pairwise_distance(&sorted, pairs / 2 + 1))
    }
}

/// Number of pairs `a < b` with `sorted[b] - sorted[a] <= t` (t >= 0).
fn count_within(sorted: &[f64], t: f64) -> usize {
    let mut lo = 0;
    let mut count = 0;
    for (i, &v) in sorted.iter().enumerate() {
        while v - sorted[lo] > t {
            lo += 1;
        }
        count += i - lo;
    }
    count
}

/// The `k`-th smallest (1-based) pairwise difference of an ascending slice.
fn kth_pairwise_distance(sorted: &[f64], k: usize) -> f64 {
    if count_within(sorted, 0.0) >= k {
        return 0.0;
    }
    // Invariant: count(lo) < k <= count(hi).
    let mut lo = 0.0;
    let mut hi = sorted[sorted.len() - 1] - sorted[0];
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_within(sorted, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // No difference lies strictly between lo and hi, so the answer is the
    // smallest difference above lo.
    let mut best = hi;
    let mut j = 0;
    for i in 0..sorted.len() {
        j = j.max(i + 1);
        while j < sorted.len() && sorted[j] - sorted[i] <= lo {
            j += 1;
        }
        if j == sorted.len() {
            break;
        }
        best = best.min(sorted[j] - sorted[i]);
    }
    best
}

fn stride_indices(n: usize, cap: Option<usize>) -> Option<Vec<usize>> {
    match cap {
        Some(cap) if cap >= 2 && n > cap => {
            let step = n.div_ceil(cap);
            Some((0..n).step_by(step).collect())
        }
        _ => None,
    }
}

/// HSIC independence test with median-heuristic Gaussian kernels.
#[derive(Debug, Clone, Copy, Default)]
pub struct HsicTest {
    pub config: HsicConfig,
}

impl HsicTest {
    pub fn new(config: HsicConfig) -> Self {
        Self { config }
    }

    pub fn test(&self, u: &[f64], v: &[f64]) -> Result<HsicResult, IndependenceError> {
        if u.len() != v.len() {
            return Err(IndependenceError::LengthMismatch(u.len(), v.len()));
        }
        if u.len() < MIN_SAMPLES {
            return Err(IndependenceError::TooFewSamples(u.len()));
        }
        if u.iter().chain(v).any(|x| !x.is_finite()) {
            return Err(IndependenceError::NonFinite);
        }
        let k = self.prepare(u).ok_or(IndependenceError::ConstantInput)?;
        let l = self.prepare(v).ok_or(IndependenceError::ConstantInput)?;
        Ok(hsic_from_grams(&k, &l))
    }
}

impl IndependenceTest for HsicTest {
    type Prepared = GaussianGram;

    fn min_samples(&self) -> usize {
        MIN_SAMPLES
    }

    fn prepare(&self, v: &[f64]) -> Option<GaussianGram> {
        let sub;
        let v = match stride_indices(v.len(), self.config.sample_cap) {
            Some(idx) => {
                sub = idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
                &sub[..]
            }
            None => v,
        };
        let m = mean(v);
        let centered: Vec<f64> = v.iter().map(|x| x - m).collect();
        if variance(&centered) <= self.config.constant_threshold {
            return None;
        }
        Some(GaussianGram::new(v))
    }

    fn p_value(&self, a: &GaussianGram, b: &GaussianGram) -> f64 {
        hsic_from_grams(a, b).p_value
    }
}

/// [`HsicTest::test`] with the default configuration.
pub fn hsic_test(u: &[f64], v: &[f64]) -> Result<HsicResult, IndependenceError> {
    HsicTest::default().test(u, v)
}

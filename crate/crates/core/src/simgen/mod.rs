//! Synthetic data from linear acyclic models with latent confounders:
//! `x = B x + Λ f + e`, with non-Gaussian `e` and `f`.

mod networks;
mod noise;
mod spec_file;

pub use networks::{builtin_network, random_dag, NetworkName};
pub use noise::{sample_noise, NoiseFamily};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordering::CausalOrderingMatrix;
use crate::stats::{center_in_place, DataMatrix, StatsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable {0} has a self loop")]
    SelfLoop(usize),
    #[error("the connection matrix B has a directed cycle")]
    Cyclic,
    #[error("every column of Λ must have at least two nonzero entries; column {column} has {nonzero}")]
    ConfounderChildren { column: usize, nonzero: usize },
    #[error("Λ must have full column rank")]
    LambdaRankDeficient,
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("unknown network `{0}`")]
    UnknownNetwork(String),
    #[error("invalid spec file: {0}")]
    Parse(String),
    #[error("unsupported spec schema {0}")]
    Schema(u32),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// A linear acyclic model with latent confounders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemSpec {
    pub d: usize,
    pub q: usize,
    /// `b[i][j]` is the direct effect of `x_j` on `x_i`.
    pub b: Vec<Vec<f64>>,
    /// `lambda[i][k]` is the loading of confounder `f_k` on `x_i`.
    pub lambda: Vec<Vec<f64>>,
    pub e_noise: Vec<NoiseFamily>,
    pub f_noise: Vec<NoiseFamily>,
    pub seed: u64,
    pub label: Option<String>,
}

impl SemSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        let (d, q) = (self.d, self.q);
        let dim = |what: String| Err(SpecError::Dimension(what));
        if d == 0 {
            return dim("d must be positive".into());
        }
        if self.b.len() != d || self.b.iter().any(|r| r.len() != d) {
            return dim(format!("B must be {d}x{d}"));
        }
        if self.lambda.len() != d || self.lambda.iter().any(|r| r.len() != q) {
            return dim(format!("Λ must be {d}x{q}"));
        }
        if self.e_noise.len() != d {
            return dim(format!("expected {d} noise families for e, got {}", self.e_noise.len()));
        }
        if self.f_noise.len() != q {
            return dim(format!("expected {q} noise families for f, got {}", self.f_noise.len()));
        }
        if self.b.iter().flatten().any(|v| !v.is_finite()) {
            return Err(SpecError::NonFinite("B"));
        }
        if self.lambda.iter().flatten().any(|v| !v.is_finite()) {
            return Err(SpecError::NonFinite("Λ"));
        }
        if let Some(i) = (0..d).find(|&i| self.b[i][i] != 0.0) {
            return Err(SpecError::SelfLoop(i));
        }
        if topological_order(&self.b).is_none() {
            return Err(SpecError::Cyclic);
        }
        for k in 0..q {
            let nonzero = (0..d).filter(|&i| self.lambda[i][k] != 0.0).count();
            if nonzero < 2 {
                return Err(SpecError::ConfounderChildren { column: k, nonzero });
            }
        }
        if q > 0 {
            let l = DMatrix::from_fn(d, q, |i, k| self.lambda[i][k]);
            let sv = l.singular_values();
            let max = sv.max();
            if q > d || sv.iter().any(|&s| s <= max * 1e-10) {
                return Err(SpecError::LambdaRankDeficient);
            }
        }
        Ok(())
    }

    /// Serializes to the TOML spec format.
    pub fn to_toml(&self) -> Result<String, SpecError> {
        spec_file::to_toml(self)
    }

    pub fn from_toml(text: &str) -> Result<Self, SpecError> {
        spec_file::from_toml(text)
    }
}

/// Everything needed to score an estimate on generated data. Variable ids
/// refer to the shuffled order of the returned data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemGroundTruth {
    pub true_ordering: CausalOrderingMatrix,
    /// `path_free[a][b]`: neither variable has a directed path to the other.
    pub path_free: Vec<Vec<bool>>,
    /// Connection strengths in shuffled coordinates.
    pub true_b: Vec<Vec<f64>>,
    /// `permutation[new] = original index`.
    pub permutation: Vec<usize>,
    /// Population mixing matrix in shuffled coordinates: `d` rows over the
    /// unit-variance sources `e_0 .. e_{d-1}, f_0 .. f_{q-1}` (original indices).
    pub mixing: Vec<Vec<f64>>,
    /// Scale applied to each standardized `e_i`, by original index.
    pub noise_scales: Vec<f64>,
    /// Realized `var(s_i e_i) / var(x_i)`, by original index.
    pub noise_ratios: Vec<f64>,
    pub label: Option<String>,
}

/// Kahn's algorithm, smallest index first. `None` on a cycle.
pub(crate) fn topological_order(b: &[Vec<f64>]) -> Option<Vec<usize>> {
    let d = b.len();
    let mut indeg: Vec<usize> = (0..d).map(|i| (0..d).filter(|&j| j != i && b[i][j] != 0.0).count()).collect();
    let mut order = Vec::with_capacity(d);
    let mut done = vec![false; d];
    while order.len() < d {
        let next = (0..d).find(|&i| !done[i] && indeg[i] == 0)?;
        done[next] = true;
        order.push(next);
        for i in 0..d {
            if i != next && b[i][next] != 0.0 {
                indeg[i] -= 1;
            }
        }
    }
    Some(order)
}

/// `reach[a][b]`: a directed path `a -> ... -> b` exists.
pub(crate) fn reachability(b: &[Vec<f64>]) -> Vec<Vec<bool>> {
    let d = b.len();
    let mut reach: Vec<Vec<bool>> = (0..d).map(|a| (0..d).map(|c| a != c && b[c][a] != 0.0).collect()).collect();
    for k in 0..d {
        for a in 0..d {
            if reach[a][k] {
                for c in 0..d {
                    if reach[k][c] {
                        reach[a][c] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Draws `n` samples. Each `e_i` is scaled so that it accounts for exactly
/// half of the sample variance of `x_i` (sourceless roots keep scale 1).
/// Variables are then shuffled and centered.
pub fn generate(spec: &SemSpec, n: usize) -> Result<(DataMatrix, SemGroundTruth), SpecError> {
    spec.validate()?;
    let (d, q) = (spec.d, spec.q);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);

    let f: Vec<Vec<f64>> = spec.f_noise.iter().map(|&fam| sample_noise(fam, n, &mut rng)).collect();
    let e: Vec<Vec<f64>> = spec.e_noise.iter().map(|&fam| sample_noise(fam, n, &mut rng)).collect();

    let order = topological_order(&spec.b).expect("validated");
    let mut x = vec![Vec::new(); d];
    let mut mix = vec![vec![0.0; d + q]; d];
    let mut scales = vec![1.0; d];
    let mut ratios = vec![1.0; d];
    for &i in &order {
        let mut rest = vec![0.0; n];
        let mut mix_i = vec![0.0; d + q];
        for j in (0..d).filter(|&j| spec.b[i][j] != 0.0) {
            let w = spec.b[i][j];
            rest.iter_mut().zip(&x[j]).for_each(|(r, v)| *r += w * v);
            mix_i.iter_mut().zip(&mix[j]).for_each(|(m, v)| *m += w * v);
        }
        for k in (0..q).filter(|&k| spec.lambda[i][k] != 0.0) {
            let w = spec.lambda[i][k];
            rest.iter_mut().zip(&f[k]).for_each(|(r, v)| *r += w * v);
            mix_i[d + k] += w;
        }
        let (r_var, c) = if n > 1 {
            let m = rest.iter().sum::<f64>() / n as f64;
            let denom = n as f64 - 1.0;
            let var = rest.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / denom;
            let cov = rest.iter().zip(&e[i]).map(|(r, v)| (r - m) * v).sum::<f64>() / denom;
            (var, cov)
        } else {
            (0.0, 0.0)
        };
        // s^2 - 2cs - R = 0 makes var(s e) equal to half of var(rest + s e).
        let s = if r_var > 1e-12 { c + (c * c + r_var).sqrt() } else { 1.0 };
        scales[i] = s;
        if r_var > 1e-12 {
            ratios[i] = s * s / (r_var + s * s + 2.0 * s * c);
        }
        rest.iter_mut().zip(&e[i]).for_each(|(r, v)| *r += s * v);
        mix_i[i] += s;
        x[i] = rest;
        mix[i] = mix_i;
    }

    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);

    let reach = reachability(&spec.b);
    let mut rank = vec![0; d];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut truth = CausalOrderingMatrix::unknown((0..d).collect());
    let mut path_free = vec![vec![false; d]; d];
    for k in 0..d {
        for l in (k + 1)..d {
            let (a, b) = (perm[k], perm[l]);
            let precedes = if reach[a][b] {
                true
            } else if reach[b][a] {
                false
            } else {
                path_free[k][l] = true;
                path_free[l][k] = true;
                rank[a] < rank[b]
            };
            truth.set(k, l, if precedes { -1 } else { 1 });
        }
    }

    let mut rows: Vec<Vec<f64>> = perm.iter().map(|&o| std::mem::take(&mut x[o])).collect();
    for r in &mut rows {
        center_in_place(r);
    }
    let data = DataMatrix::with_default_ids(rows)?;
    let ground = SemGroundTruth {
        true_ordering: truth,
        path_free,
        true_b: perm.iter().map(|&a| perm.iter().map(|&b| spec.b[a][b]).collect()).collect(),
        mixing: perm.iter().map(|&o| mix[o].clone()).collect(),
        permutation: perm,
        noise_scales: scales,
        noise_ratios: ratios,
        label: spec.label.clone(),
    };
    Ok((data, ground))
}

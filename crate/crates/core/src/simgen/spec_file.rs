//! TOML form of [`SemSpec`]:
//!
//! ```toml
//! schema = 1
//! d = 3
//! q = 1
//! seed = 7
//! label = "example"
//! # [target, source, weight]: the effect b_ij of x_j on x_i
//! edges = [[1, 0, 0.8], [2, 1, -1.2]]
//! e_noise = ["gauss_mix_asym", "laplace", "gauss_mix_sym"]
//! f_noise = ["laplace"]
//!
//! [[confounders]]
//! children = [0, 2]
//! weights = [1.0, -0.7]
//! ```

use serde::{Deserialize, Serialize};

use super::{NoiseFamily, SemSpec, SpecError};

const SCHEMA: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Confounder {
    children: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    schema: u32,
    d: usize,
    q: usize,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default)]
    edges: Vec<(usize, usize, f64)>,
    e_noise: Vec<NoiseFamily>,
    #[serde(default)]
    f_noise: Vec<NoiseFamily>,
    #[serde(default)]
    confounders: Vec<Confounder>,
}

pub(super) fn to_toml(spec: &SemSpec) -> Result<String, SpecError> {
    spec.validate()?;
    let mut edges = Vec::new();
    for (i, row) in spec.b.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if w != 0.0 {
                edges.push((i, j, w));
            }
        }
    }
    let confounders = (0..spec.q)
        .map(|k| {
            let children: Vec<usize> = (0..spec.d).filter(|&i| spec.lambda[i][k] != 0.0).collect();
            let weights = children.iter().map(|&i| spec.lambda[i][k]).collect();
            Confounder { children, weights }
        })
        .collect();
    let file = SpecFile {
        schema: SCHEMA,
        d: spec.d,
        q: spec.q,
        seed: spec.seed,
        label: spec.label.clone(),
        edges,
        e_noise: spec.e_noise.clone(),
        f_noise: spec.f_noise.clone(),
        confounders,
    };
    toml::to_string(&file).map_err(|e| SpecError::Parse(e.to_string()))
}

pub(super) fn from_toml(text: &str) -> Result<SemSpec, SpecError> {
    let file: SpecFile = toml::from_str(text).map_err(|e| SpecError::Parse(e.to_string()))?;
    if file.schema != SCHEMA {
        return Err(SpecError::Schema(file.schema));
    }
    let (d, q) = (file.d, file.q);
    if file.confounders.len() != q {
        return Err(SpecError::Dimension(format!("q = {q} but {} confounders listed", file.confounders.len())));
    }
    let mut b = vec![vec![0.0; d]; d];
    for &(i, j, w) in &file.edges {
        if i >= d || j >= d {
            return Err(SpecError::Dimension(format!("edge [{i}, {j}] out of range for d = {d}")));
        }
        b[i][j] = w;
    }
    let mut lambda = vec![vec![0.0; q]; d];
    for (k, c) in file.confounders.iter().enumerate() {
        if c.children.len() != c.weights.len() {
            return Err(SpecError::Dimension(format!("confounder {k}: children and weights differ in length")));
        }
        for (&i, &w) in c.children.iter().zip(&c.weights) {
            if i >= d {
                return Err(SpecError::Dimension(format!("confounder {k}: child {i} out of range")));
            }
            lambda[i][k] = w;
        }
    }
    let spec = SemSpec {
        d,
        q,
        b,
        lambda,
        e_noise: file.e_noise,
        f_noise: file.f_noise,
        seed: file.seed,
        label: file.label,
    };
    spec.validate()?;
    Ok(spec)
}

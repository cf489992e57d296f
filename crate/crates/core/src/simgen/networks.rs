use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{NoiseFamily, SemSpec, SpecError};

/// Builtin network structures. Weights are drawn per seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkName {
    /// Five variables, two confounders.
    Fig2FiveVar,
    /// Ten variables, four confounders.
    Fig3TenVar,
    /// Fifteen variables, six confounders.
    Fig4FifteenVar,
    /// `x0 -> x1 -> ... -> x_{d-1}`, no confounders.
    Chain { d: usize },
    /// Four-variable chain with one confounder of its two ends.
    ConfoundedChain4Var,
    RandomDag { d: usize, density: f64, q: usize },
}

impl fmt::Display for NetworkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fig2FiveVar => f.write_str("fig2_5var"),
            Self::Fig3TenVar => f.write_str("fig3_10var"),
            Self::Fig4FifteenVar => f.write_str("fig4_15var"),
            Self::ConfoundedChain4Var => f.write_str("confounded_chain_4var"),
            Self::Chain { d } => write!(f, "chain:{d}"),
            Self::RandomDag { d, density, q } => write!(f, "random_dag:{d}:{density}:{q}"),
        }
    }
}

impl FromStr for NetworkName {
    type Err = SpecError;

    /// Accepts `fig2_5var`, `fig3_10var`, `fig4_15var`,
    /// `confounded_chain_4var`, `chain[:d]` and `random_dag:d:density:q`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || SpecError::UnknownNetwork(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        Ok(match parts.as_slice() {
            ["fig2_5var"] => Self::Fig2FiveVar,
            ["fig3_10var"] => Self::Fig3TenVar,
            ["fig4_15var"] => Self::Fig4FifteenVar,
            ["confounded_chain_4var"] => Self::ConfoundedChain4Var,
            ["chain"] => Self::Chain { d: 3 },
            ["chain", d] => Self::Chain { d: d.parse().map_err(|_| unknown())? },
            ["random_dag", d, density, q] => Self::RandomDag {
                d: d.parse().map_err(|_| unknown())?,
                density: density.parse().map_err(|_| unknown())?,
                q: q.parse().map_err(|_| unknown())?,
            },
            _ => return Err(unknown()),
        })
    }
}

type Edge = (usize, usize);

/// `(d, edges as (parent, child), confounder children)`.
fn structure(name: &NetworkName) -> Option<(usize, Vec<Edge>, Vec<Vec<usize>>)> {
    Some(match name {
        NetworkName::Fig2FiveVar => {
            (5, vec![(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)], vec![vec![1, 3], vec![2, 3]])
        }
        NetworkName::ConfoundedChain4Var => (4, vec![(0, 1), (1, 2), (2, 3)], vec![vec![0, 3]]),
        NetworkName::Chain { d } => (*d, (1..*d).map(|i| (i - 1, i)).collect(), vec![]),
        NetworkName::Fig3TenVar => (
            10,
            vec![
                (0, 1),
                (0, 2),
                (1, 3),
                (2, 4),
                (3, 5),
                (4, 5),
                (5, 6),
                (6, 7),
                (6, 8),
                (7, 9),
                (8, 9),
            ],
            vec![vec![1, 2], vec![3, 4], vec![7, 8], vec![5, 9]],
        ),
        NetworkName::Fig4FifteenVar => (
            15,
            vec![
                (0, 1),
                (0, 2),
                (1, 3),
                (2, 4),
                (3, 5),
                (4, 5),
                (5, 6),
                (6, 7),
                (6, 8),
                (7, 9),
                (8, 9),
                (9, 10),
                (9, 11),
                (10, 12),
                (11, 13),
                (12, 14),
                (13, 14),
            ],
            vec![vec![1, 2], vec![3, 4], vec![7, 8], vec![10, 11], vec![12, 13], vec![5, 9]],
        ),
        NetworkName::RandomDag { .. } => return None,
    })
}

/// Magnitude ranges for edge weights and confounder loadings.
struct WeightRanges {
    edges: (f64, f64),
    loadings: (f64, f64),
}

const DEFAULT_RANGES: WeightRanges = WeightRanges { edges: (0.5, 1.5), loadings: (0.5, 1.5) };

fn ranges(name: &NetworkName) -> WeightRanges {
    match name {
        // Attenuating chain, dominant confounder: with generic weights the
        // sink is mostly chain signal and the confounding goes unseen.
        NetworkName::ConfoundedChain4Var => WeightRanges { edges: (0.5, 0.7), loadings: (1.5, 2.5) },
        _ => DEFAULT_RANGES,
    }
}

fn weight<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    let w = rng.random_range(lo..hi);
    if rng.random::<bool>() {
        w
    } else {
        -w
    }
}

fn assemble(
    d: usize,
    edges: &[Edge],
    confounders: &[Vec<usize>],
    rng: &mut ChaCha8Rng,
    ranges: &WeightRanges,
    seed: u64,
    label: String,
) -> SemSpec {
    let q = confounders.len();
    let mut b = vec![vec![0.0; d]; d];
    for &(parent, child) in edges {
        b[child][parent] = weight(rng, ranges.edges);
    }
    let mut lambda = vec![vec![0.0; q]; d];
    for (k, children) in confounders.iter().enumerate() {
        for &i in children {
            lambda[i][k] = weight(rng, ranges.loadings);
        }
    }
    SemSpec {
        d,
        q,
        b,
        lambda,
        e_noise: (0..d).map(NoiseFamily::cyclic).collect(),
        f_noise: (0..q).map(NoiseFamily::cyclic).collect(),
        seed,
        label: Some(label),
    }
}

/// Instantiates a builtin structure with weights `±U[0.5, 1.5]` drawn from
/// `seed` (the confounded chain uses `±U[0.5, 0.7]` edges and `±U[1.5, 2.5]`
/// loadings). Noise families cycle asym, laplace, sym by index.
pub fn builtin_network(name: &NetworkName, seed: u64) -> Result<SemSpec, SpecError> {
    if let NetworkName::RandomDag { d, density, q } = *name {
        return random_dag(d, density, q, seed);
    }
    let (d, edges, confounders) = structure(name).expect("fixed structure");
    if d == 0 {
        return Err(SpecError::Dimension("d must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = assemble(d, &edges, &confounders, &mut rng, &ranges(name), seed, name.to_string());
    spec.validate()?;
    Ok(spec)
}

/// Random DAG over `d` variables in index order with edge probability
/// `density`, plus `q` confounders of two or three children each.
pub fn random_dag(d: usize, density: f64, q: usize, seed: u64) -> Result<SemSpec, SpecError> {
    if d < 2 || q > d || !(0.0..=1.0).contains(&density) {
        return Err(SpecError::Dimension(format!("random_dag needs d >= 2, q <= d, density in [0, 1]; got d={d}, q={q}, density={density}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label = NetworkName::RandomDag { d, density, q }.to_string();
    for _ in 0..100 {
        let mut edges = Vec::new();
        for child in 1..d {
            for parent in 0..child {
                if rng.random::<f64>() < density {
                    edges.push((parent, child));
                }
            }
        }
        let confounders: Vec<Vec<usize>> = (0..q)
            .map(|_| {
                let size = if d > 2 { rng.random_range(2..=3) } else { 2 };
                rand::seq::index::sample(&mut rng, d, size).into_vec()
            })
            .collect();
        let spec = assemble(d, &edges, &confounders, &mut rng, &DEFAULT_RANGES, seed, label.clone());
        if spec.validate().is_ok() {
            return Ok(spec);
        }
    }
    Err(SpecError::LambdaRankDeficient)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in [
            NetworkName::Fig2FiveVar,
            NetworkName::Fig3TenVar,
            NetworkName::Fig4FifteenVar,
            NetworkName::ConfoundedChain4Var,
            NetworkName::Chain { d: 6 },
            NetworkName::RandomDag { d: 6, density: 0.4, q: 1 },
        ] {
            assert_eq!(name.to_string().parse::<NetworkName>().unwrap(), name);
        }
        assert_eq!("chain".parse::<NetworkName>().unwrap(), NetworkName::Chain { d: 3 });
        assert!(matches!("fig9".parse::<NetworkName>(), Err(SpecError::UnknownNetwork(_))));
    }

    #[test]
    fn five_variable_network_shape() {
        let s = builtin_network(&NetworkName::Fig2FiveVar, 1).unwrap();
        assert_eq!((s.d, s.q), (5, 2));
        let edges = s.b.iter().flatten().filter(|&&w| w != 0.0).count();
        assert_eq!(edges, 5);
        for w in s.b.iter().flatten().chain(s.lambda.iter().flatten()).filter(|&&w| w != 0.0) {
            assert!((0.5..1.5).contains(&w.abs()));
        }
        assert_eq!(s.e_noise[..3], [NoiseFamily::GaussMixAsym, NoiseFamily::Laplace, NoiseFamily::GaussMixSym]);
    }

    #[test]
    fn chain_pattern() {
        let s = builtin_network(&NetworkName::Chain { d: 4 }, 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.b[i][j] != 0.0, i == j + 1);
            }
        }
    }

    #[test]
    fn larger_builtins_validate() {
        for (name, d, q) in [(NetworkName::Fig3TenVar, 10, 4), (NetworkName::Fig4FifteenVar, 15, 6)] {
            let s = builtin_network(&name, 3).unwrap();
            assert_eq!((s.d, s.q), (d, q));
        }
    }

    #[test]
    fn random_dag_is_valid_and_seeded() {
        let a = random_dag(6, 0.4, 1, 7).unwrap();
        a.validate().unwrap();
        assert_eq!((a.d, a.q), (6, 1));
        assert_eq!(a, random_dag(6, 0.4, 1, 7).unwrap());
        assert!(random_dag(3, 0.5, 4, 1).is_err());
    }
}

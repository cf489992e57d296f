use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

/// Non-Gaussian source distributions. Every draw is standardized to zero
/// sample mean and unit sample variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// `0.7 N(-1.1, 0.7^2) + 0.3 N(2.57, 1)`: skewed, bimodal.
    GaussMixAsym,
    /// Standard double exponential.
    Laplace,
    /// `0.5 N(-1.5, 0.5^2) + 0.5 N(1.5, 0.5^2)`: symmetric, bimodal, sub-Gaussian.
    GaussMixSym,
}

impl NoiseFamily {
    /// Families cycle asym, laplace, sym over source index 0, 1, 2, ...
    pub fn cyclic(index: usize) -> Self {
        [Self::GaussMixAsym, Self::Laplace, Self::GaussMixSym][index % 3]
    }

    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        let mixture = |rng: &mut R, w: f64, a: (f64, f64), b: (f64, f64)| {
            let (m, s) = if rng.random::<f64>() < w { a } else { b };
            Normal::new(m, s).expect("valid normal").sample(rng)
        };
        match self {
            Self::GaussMixAsym => mixture(rng, 0.7, (-1.1, 0.7), (2.57, 1.0)),
            Self::GaussMixSym => mixture(rng, 0.5, (-1.5, 0.5), (1.5, 0.5)),
            Self::Laplace => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    e
                } else {
                    -e
                }
            }
        }
    }
}

/// `n` i.i.d. draws, standardized to exact zero mean and unit variance.
pub fn sample_noise<R: Rng + ?Sized>(family: NoiseFamily, n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| family.draw(rng)).collect();
    standardize(&mut v);
    v
}

pub(crate) fn standardize(v: &mut [f64]) {
    let n = v.len();
    if n == 0 {
        return;
    }
    let m = v.iter().sum::<f64>() / n as f64;
    v.iter_mut().for_each(|x| *x -= m);
    if n < 2 {
        return;
    }
    let var = v.iter().map(|x| x * x).sum::<f64>() / (n as f64 - 1.0);
    if var > 0.0 {
        let s = var.sqrt();
        v.iter_mut().for_each(|x| *x /= s);
    }
}
